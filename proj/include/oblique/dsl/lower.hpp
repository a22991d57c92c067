#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oblique/dsl/document.hpp"
#include "oblique/epistemics.hpp"
#include "oblique/influence.hpp"
#include "oblique/intent_scm.hpp"

namespace oblique::dsl {

/// Replacement values for `[parameters]` entries, keyed by name.
using ParameterOverrides = std::map<std::string, Rational>;

/// A query with names resolved against the model's signature.
struct ResolvedQuery {
    QueryDecl decl;
    OutcomeSpec outcome;
    VarSet variables;
    OutcomeSpec given;
    ActionChoice action;
};

struct ScmProgram {
    std::shared_ptr<const CausalModel> model;
    EpistemicState state;
    /// Exogenous distributions over their domains.
    std::map<VarId, std::vector<Rational>> distributions;
    /// Effective parameter values after overrides, in declaration order.
    std::vector<std::pair<std::string, Rational>> parameters;
    /// REF values per decision as written in `[reference]`.
    std::map<VarId, std::vector<ValueIndex>> reference;
    std::vector<ResolvedQuery> queries;

    const Signature& signature() const { return model->signature(); }

    /// Alternatives compared with `action`. A decision listed in
    /// `[reference]` ranges over its listed values; when the section is empty
    /// every decision ranges over its other values; otherwise an unlisted
    /// decision stays at its chosen value.
    ReferenceSet reference_for(const ActionChoice& action) const;
};

struct ScmLowering {
    std::optional<ScmProgram> program;
    std::vector<ParseDiagnostic> diagnostics;

    bool ok() const { return program.has_value(); }
};

ScmLowering lower_to_scm(const ModelDocument& doc, const ParameterOverrides& overrides = {});

struct IdLowering {
    std::optional<InfluenceDiagram> diagram;
    std::vector<ParseDiagnostic> diagnostics;

    bool ok() const { return diagram.has_value(); }
};

/// Exogenous variables become parentless chance nodes, endogenous ones
/// deterministic chance nodes, decisions decision nodes observing their
/// `observes` list; every utility term becomes a utility node U1..Un and a
/// nonzero default a parentless utility node U0. The result is in Howard
/// canonical form.
IdLowering lower_to_id(const ModelDocument& doc, const ParameterOverrides& overrides = {});

/// Builds the diagram from an already lowered SCM program.
InfluenceDiagram diagram_of(const ModelDocument& doc, const ScmProgram& program);

}  // namespace oblique::dsl
