#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "oblique/rational.hpp"
#include "oblique/scm.hpp"

namespace oblique::dsl {

/// 1-based source position. Positions never take part in equality, so a
/// reparsed document compares equal to the one it was printed from.
struct SourcePos {
    std::size_t line = 1;
    std::size_t column = 1;

    friend bool operator==(const SourcePos&, const SourcePos&) { return true; }
};

enum class Severity { error, warning };

struct ParseDiagnostic {
    Severity severity = Severity::error;
    std::size_t line = 1;
    std::size_t column = 1;
    std::string message;
    std::string token;
};

std::string format(const ParseDiagnostic& diagnostic);

struct VariableDecl {
    std::string name;
    VarKind kind = VarKind::endogenous;
    std::vector<std::string> domain;
    /// Decision nodes only: parents observed before deciding.
    std::vector<std::string> observes;
    SourcePos pos;

    bool operator==(const VariableDecl&) const = default;
};

/// Boolean expression over {0,1} variables.
struct Expr {
    enum class Op { constant, variable, equals, not_equals, negate, conjunction, disjunction };

    Op op = Op::constant;
    bool truth = false;     // constant
    std::string name;       // variable / equals / not_equals
    std::string value;      // equals / not_equals
    std::vector<Expr> args;
    SourcePos pos;

    bool operator==(const Expr&) const = default;
};

struct TableRow {
    std::vector<std::string> inputs;
    std::string output;
    SourcePos pos;

    bool operator==(const TableRow&) const = default;
};

struct TableDef {
    std::vector<std::string> parents;
    std::vector<TableRow> rows;

    bool operator==(const TableDef&) const = default;
};

struct EquationDecl {
    std::string target;
    std::variant<Expr, TableDef> body;
    SourcePos pos;

    bool operator==(const EquationDecl&) const = default;
};

struct DistributionDecl {
    std::string name;
    /// One weight (probability of the second value of a binary variable) or
    /// a full distribution over the domain.
    std::vector<Rational> weights;
    bool full = false;
    SourcePos pos;

    bool operator==(const DistributionDecl&) const = default;
};

/// A rational literal or a (possibly negated) parameter reference.
struct Amount {
    Rational literal = 0;
    std::string parameter;
    bool negated = false;

    bool operator==(const Amount&) const = default;
};

struct LiteralDecl {
    std::string name;
    std::string value;
    bool negated = false;
    SourcePos pos;

    bool operator==(const LiteralDecl&) const = default;
};

struct UtilityTerm {
    std::vector<LiteralDecl> condition;
    Amount amount;
    SourcePos pos;

    bool operator==(const UtilityTerm&) const = default;
};

struct UtilityDecl {
    std::vector<UtilityTerm> terms;
    std::optional<Amount> default_value;
    SourcePos pos;

    bool operator==(const UtilityDecl&) const = default;
};

struct ReferenceDecl {
    std::string decision;
    std::vector<std::string> values;
    SourcePos pos;

    bool operator==(const ReferenceDecl&) const = default;
};

struct ParameterDecl {
    std::string name;
    Rational value = 0;
    SourcePos pos;

    bool operator==(const ParameterDecl&) const = default;
};

enum class QueryKind { intent, affect, oblique, kglt, kglt_oblique };

/// intent   O=o [& ...] under A=a [, ...] [confidence C]
/// affect   X [, ...] under A=a
/// oblique  O*=o* given O=o under A=a [confidence C]
/// kglt
/// kglt_oblique Y=y [given Z=z] [under A=a] [confidence C]
struct QueryDecl {
    QueryKind kind = QueryKind::intent;
    std::vector<LiteralDecl> outcome;
    std::vector<std::string> variables;
    std::vector<LiteralDecl> given;
    std::vector<LiteralDecl> action;
    std::optional<Rational> confidence;
    SourcePos pos;

    bool operator==(const QueryDecl&) const = default;
};

struct ModelDocument {
    std::vector<ParameterDecl> parameters;
    std::vector<VariableDecl> variables;
    std::vector<EquationDecl> equations;
    std::vector<DistributionDecl> distribution;
    std::optional<UtilityDecl> utility;
    std::vector<ReferenceDecl> reference;
    std::vector<QueryDecl> queries;

    bool operator==(const ModelDocument&) const = default;

    const VariableDecl* variable(std::string_view name) const;
};

struct ParseResult {
    /// Everything that parsed, even when diagnostics were raised.
    ModelDocument document;
    std::vector<ParseDiagnostic> diagnostics;

    bool ok() const;
};

/// Total: collects every diagnostic instead of stopping at the first.
ParseResult parse(std::string_view text);

/// Canonical text: fixed section order, LF line endings.
std::string serialize(const ModelDocument& document);

/// One query in its canonical one-line form.
std::string render_query(const QueryDecl& query);

}  // namespace oblique::dsl
