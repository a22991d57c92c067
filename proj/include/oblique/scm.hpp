#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace oblique {

using VarId = std::size_t;
using ValueIndex = std::size_t;

/// Thrown for malformed models and for inputs that violate an operation's
/// preconditions (unknown variables, partial contexts, ...).
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Decision variables are endogenous variables fixed by the agent; they carry
/// no structural equation.
enum class VarKind { exogenous, endogenous, decision };

inline bool is_endogenous(VarKind kind) { return kind != VarKind::exogenous; }

struct Variable {
    std::string name;
    VarKind kind = VarKind::endogenous;
    std::vector<std::string> domain;

    bool operator==(const Variable&) const = default;
};

/// Variables with finite ordered domains. Variable order is fixed at
/// construction and drives every enumeration in the library.
class Signature {
public:
    Signature() = default;
    explicit Signature(std::vector<Variable> variables);

    std::size_t size() const { return variables_.size(); }
    const std::vector<Variable>& variables() const { return variables_; }
    const Variable& operator[](VarId id) const { return variables_.at(id); }
    std::size_t domain_size(VarId id) const { return variables_.at(id).domain.size(); }

    std::optional<VarId> find(std::string_view name) const;
    VarId id(std::string_view name) const;
    std::optional<ValueIndex> find_value(VarId var, std::string_view value) const;
    ValueIndex value(VarId var, std::string_view value) const;

    std::vector<VarId> of_kind(VarKind kind) const;

    bool operator==(const Signature& other) const { return variables_ == other.variables_; }

private:
    std::vector<Variable> variables_;
    std::unordered_map<std::string, VarId> index_;
};

/// Partial assignment keyed by variable id, iterated in variable order.
using Assignment = std::map<VarId, ValueIndex>;

/// Total assignment of the exogenous variables.
struct Context {
    Assignment values;
    bool operator==(const Context&) const = default;
    auto operator<=>(const Context&) const = default;
};

/// do(X <- x) on endogenous variables.
struct Intervention {
    Assignment targets;
    bool operator==(const Intervention&) const = default;
};

/// Values chosen for the model's decision variables.
struct ActionChoice {
    Assignment values;
    bool operator==(const ActionChoice&) const = default;
    auto operator<=>(const ActionChoice&) const = default;
};

/// Total assignment over every variable of a signature.
struct World {
    std::vector<ValueIndex> values;

    ValueIndex operator[](VarId id) const { return values.at(id); }
    bool operator==(const World&) const = default;
};

struct Literal {
    VarId var = 0;
    ValueIndex value = 0;
    bool negated = false;

    bool holds_in(const World& world) const { return (world[var] == value) != negated; }
    bool operator==(const Literal&) const = default;
};

/// Conjunction of (possibly negated) assignments; the empty formula is true.
struct CausalFormula {
    std::vector<Literal> literals;

    bool holds_in(const World& world) const;
};

/// Row index of `parents` inside a table laid out row-major with the last
/// parent varying fastest.
std::size_t row_index(const Signature& signature, std::span<const VarId> parents,
                      std::span<const ValueIndex> values);

/// Number of rows of a table over `parents` (1 for no parents).
std::size_t row_count(const Signature& signature, std::span<const VarId> parents);

/// Extensional structural equation.
struct StructuralEquation {
    VarId target = 0;
    std::vector<VarId> parents;
    std::vector<ValueIndex> table;

    static StructuralEquation constant(VarId target, ValueIndex value) { return {target, {}, {value}}; }

    ValueIndex evaluate(const Signature& signature, std::span<const ValueIndex> values) const {
        return table.at(row_index(signature, parents, values));
    }

    bool operator==(const StructuralEquation&) const = default;
};

/// A signature plus structural equations. Construction never fails on a
/// malformed equation set so that validate_model() can report on it; solve()
/// refuses models that do not validate.
class CausalModel {
public:
    CausalModel(std::shared_ptr<const Signature> signature, std::vector<StructuralEquation> equations);

    const Signature& signature() const { return *signature_; }
    const std::shared_ptr<const Signature>& signature_ptr() const { return signature_; }
    const std::vector<StructuralEquation>& equations() const { return equations_; }

    /// Equation determining `var`, or nullptr for exogenous variables and
    /// un-intervened decisions.
    const StructuralEquation* equation_for(VarId var) const;

    /// Decision variables without an equation. Intervening on a decision
    /// turns it into a constant, after which it is no longer an action.
    std::vector<VarId> actions() const;

    /// Evaluation order (ties broken by variable order); empty if cyclic.
    const std::vector<VarId>& evaluation_order() const { return order_; }
    bool acyclic() const { return acyclic_; }

    bool operator==(const CausalModel& other) const;

private:
    std::shared_ptr<const Signature> signature_;
    std::vector<StructuralEquation> equations_;
    std::vector<std::optional<std::size_t>> by_target_;
    std::vector<VarId> order_;
    bool acyclic_ = false;
};

struct ModelDiagnostic {
    enum class Kind { cycle, missing_equation, duplicate_equation, bad_target, bad_parent, bad_table };

    Kind kind;
    std::vector<std::string> variables;
    std::string message;
};

/// Empty iff the model is well formed.
std::vector<ModelDiagnostic> validate_model(const CausalModel& model);

/// Replaces the equation of every target with a constant, severing its
/// parents. Exogenous targets are rejected.
CausalModel intervene(const CausalModel& model, const Intervention& iv);

/// Evaluates the equations in topological order. The context must be total
/// over the exogenous variables and `action` total over model.actions().
World solve(const CausalModel& model, const Context& ctx, const ActionChoice& action);

/// (M, u) |= [iv] phi with the actions fixed.
bool satisfies(const CausalModel& model, const Context& ctx, const ActionChoice& action, const Intervention& iv,
               const CausalFormula& phi);

/// Renders `X=v` using the signature's names.
std::string describe(const Signature& signature, VarId var, ValueIndex value);

}  // namespace oblique
