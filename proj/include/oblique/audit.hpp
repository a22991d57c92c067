#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "oblique/dsl/lower.hpp"
#include "oblique/kglt.hpp"

namespace oblique {

enum class Framework { hkw, kglt, both };

struct AuditOptions {
    Framework framework = Framework::both;
    /// Threshold for oblique intent; queries may carry their own.
    Rational confidence = Rational(19) / 20;
    /// REF overrides by decision name; replaces the document's entry.
    std::map<std::string, std::vector<std::string>> reference;
    dsl::ParameterOverrides parameters;
    /// Name recorded in the report (normally the file's basename).
    std::string source;
    bool timing = false;
    KgltOptions kglt;
};

/// Semantic failure: the document does not lower, or an option names
/// something the model lacks.
class AuditError : public std::runtime_error {
public:
    AuditError(std::string message, std::vector<dsl::ParseDiagnostic> diagnostics = {})
        : std::runtime_error(std::move(message)), diagnostics_(std::move(diagnostics)) {}

    const std::vector<dsl::ParseDiagnostic>& diagnostics() const { return diagnostics_; }

private:
    std::vector<dsl::ParseDiagnostic> diagnostics_;
};

/// SHA-256 of the canonical serialization, lowercase hex.
std::string model_hash(const dsl::ModelDocument& doc);

/// Runs the direct-intent scan and every query of the document under the
/// selected frameworks. Keys appear in a fixed order; rationals print as p/q.
/// Throws AuditError, or ResourceLimitExceeded from the size guard.
nlohmann::ordered_json run_audit(const dsl::ModelDocument& doc, const AuditOptions& options);

/// Human-readable rendering of a report produced by run_audit.
std::string render_text(const nlohmann::ordered_json& report);

}  // namespace oblique
