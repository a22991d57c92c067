#pragma once

#include <optional>
#include <vector>

#include "oblique/influence.hpp"
#include "oblique/intent_scm.hpp"

namespace oblique {

struct NodeValue {
    NodeId node;
    ValueIndex value;

    bool operator==(const NodeValue&) const = default;
};

struct KgltOptions {
    /// Chance nodes count as intended only when the restricted diagram's
    /// canonical optimal policy differs from pi*, instead of when pi* falls
    /// short of the restricted optimum.
    bool strict_policy_match = false;
    EnumerationLimits limits;
};

/// Outcome of testing one node of the procedure.
struct NodeTest {
    NodeId node;
    ValueIndex foreseen;
    bool skipped = false;  // single-valued node, nothing to restrict to
    bool intended = false;
    Rational restricted_optimum = 0;   // max EU of ID_{Y != F}
    Rational policy_in_restricted = 0;  // EU of pi* in ID_{Y != F} (chance nodes)
};

struct KgltResult {
    InfluenceDiagram diagram;  // the canonical-form diagram the procedure ran on
    Policy policy;
    Rational expected_utility;
    ForeseenOutcome foreseen;
    /// Intended (node, foreseen value) pairs in topological order.
    std::vector<NodeValue> intended;
    /// One entry per tested node, in the order tested (reverse topological).
    std::vector<NodeTest> trace;
};

KgltResult kglt_intent(const InfluenceDiagram& id, const KgltOptions& options = {});

enum class IdObliqueClause { marginal, conditional };

struct IdObliqueResult {
    bool holds = false;
    std::optional<IdObliqueClause> clause;
    Rational marginal = 0;
    /// Best conditional over the intended outcomes with positive probability.
    std::optional<NodeValue> condition;
    std::optional<Rational> conditional;

    Rational achieved() const;
};

/// P(Y=y) > C, or P(Y=y | Z=z) > C for some intended (Z, z) with P(Z=z) > 0.
IdObliqueResult id_oblique_intent(const InfluenceDiagram& id, const Policy& policy, NodeId node, ValueIndex value,
                                  const Confidence& confidence, const std::vector<NodeValue>& intended,
                                  const EnumerationLimits& limits = {});

}  // namespace oblique
