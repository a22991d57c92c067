#include "oblique/kglt.hpp"

#include <algorithm>

namespace oblique {

KgltResult kglt_intent(const InfluenceDiagram& input, const KgltOptions& options) {
    const auto& limits = options.limits;
    InfluenceDiagram id = to_howard_canonical_form(input);
    Policy best = optimal_policy(id, limits);
    Rational best_value = expected_utility(id, best, limits);
    ForeseenOutcome foreseen = best_foreseen_outcome(id, best, limits);

    KgltResult result{id, best, best_value, foreseen, {}, {}};
    const auto& order = id.topological_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        NodeId y = *it;
        const auto& node = id.node(y);
        if (node.kind == NodeKind::utility || !id.has_decision_ancestor(y)) continue;

        NodeTest test{y, foreseen.outcome[y]};
        const bool single = node.kind == NodeKind::decision ? id.choices(y).size() < 2 : node.domain.size() < 2;
        if (single) {
            test.skipped = true;
            result.trace.push_back(test);
            continue;
        }

        auto restricted = restrict(id, y, test.foreseen).diagram;
        Policy restricted_best = optimal_policy(restricted, limits);
        test.restricted_optimum = expected_utility(restricted, restricted_best, limits);
        if (node.kind == NodeKind::decision) {
            test.intended = test.restricted_optimum < best_value;
        } else {
            test.policy_in_restricted = expected_utility(restricted, best, limits);
            test.intended = options.strict_policy_match ? !(restricted_best == best)
                                                        : test.policy_in_restricted < test.restricted_optimum;
        }
        result.trace.push_back(test);
    }

    for (NodeId y : order) {
        auto hit = std::find_if(result.trace.begin(), result.trace.end(),
                                [&](const NodeTest& t) { return t.node == y && t.intended; });
        if (hit != result.trace.end()) result.intended.push_back({y, hit->foreseen});
    }
    return result;
}

Rational IdObliqueResult::achieved() const {
    if (clause == IdObliqueClause::marginal) return marginal;
    if (clause == IdObliqueClause::conditional) return *conditional;
    if (conditional && *conditional > marginal) return *conditional;
    return marginal;
}

IdObliqueResult id_oblique_intent(const InfluenceDiagram& id, const Policy& policy, NodeId node, ValueIndex value,
                                  const Confidence& confidence, const std::vector<NodeValue>& intended,
                                  const EnumerationLimits& limits) {
    if (node >= id.size() || id.node(node).kind == NodeKind::utility) {
        throw ModelError("oblique intent is defined on decision and chance nodes");
    }
    if (value >= id.node(node).domain.size()) throw ModelError("value out of the domain of '" + id.node(node).name + "'");
    if (std::find(intended.begin(), intended.end(), NodeValue{node, value}) != intended.end()) {
        throw ModelError("'" + id.node(node).name + "' is already an intended outcome");
    }

    IdObliqueResult result;
    std::vector<Rational> condition_mass(intended.size(), 0);
    std::vector<Rational> joint_mass(intended.size(), 0);
    for_each_outcome(
        id, policy,
        [&](const Realization& xi, const Rational& p) {
            const bool hit = xi[node] == value;
            if (hit) result.marginal += p;
            for (std::size_t i = 0; i < intended.size(); ++i) {
                if (xi[intended[i].node] != intended[i].value) continue;
                condition_mass[i] += p;
                if (hit) joint_mass[i] += p;
            }
        },
        limits);

    for (std::size_t i = 0; i < intended.size(); ++i) {
        if (condition_mass[i] == 0) continue;
        Rational ratio = joint_mass[i] / condition_mass[i];
        if (!result.conditional || ratio > *result.conditional) {
            result.conditional = ratio;
            result.condition = intended[i];
        }
    }

    if (result.marginal > confidence.value()) {
        result.clause = IdObliqueClause::marginal;
    } else if (result.conditional && *result.conditional > confidence.value()) {
        result.clause = IdObliqueClause::conditional;
    }
    result.holds = result.clause.has_value();
    return result;
}

}  // namespace oblique
