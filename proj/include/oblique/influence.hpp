#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oblique/rational.hpp"
#include "oblique/scm.hpp"

namespace oblique {

using NodeId = std::size_t;

enum class NodeKind { decision, chance, utility };

struct Node {
    std::string name;
    NodeKind kind = NodeKind::chance;
    /// Empty for utility nodes.
    std::vector<std::string> domain;
    std::vector<NodeId> parents;
    /// Chance nodes: one distribution over `domain` per parent configuration
    /// (row-major, last parent fastest).
    std::vector<std::vector<Rational>> distribution;
    /// Utility nodes: one value per parent configuration.
    std::vector<Rational> utility;
    /// Decision nodes: values the agent may pick. Empty means all of them.
    std::vector<ValueIndex> choices;

    bool operator==(const Node&) const = default;
};

/// Realisation of every non-utility node, indexed by NodeId. Utility
/// entries are unused; utility values follow from their parents.
using Realization = std::vector<ValueIndex>;

class InfluenceDiagram {
public:
    /// Validates the DAG, table shapes and row sums; throws ModelError.
    explicit InfluenceDiagram(std::vector<Node> nodes);

    const std::vector<Node>& nodes() const { return nodes_; }
    const Node& node(NodeId id) const { return nodes_.at(id); }
    std::size_t size() const { return nodes_.size(); }
    std::optional<NodeId> find(std::string_view name) const;
    NodeId id(std::string_view name) const;

    /// Ties broken by node order.
    const std::vector<NodeId>& topological_order() const { return order_; }
    std::vector<NodeId> decisions() const;
    std::vector<ValueIndex> choices(NodeId decision) const;

    std::size_t configurations(NodeId id) const;
    std::size_t configuration(NodeId id, const Realization& values) const;

    bool is_deterministic(NodeId id) const;
    /// Every node counts as its own ancestor.
    bool has_decision_ancestor(NodeId id) const;

    /// U(xi): sum of the utility nodes.
    Rational total_utility(const Realization& values) const;

    bool operator==(const InfluenceDiagram& other) const { return nodes_ == other.nodes_; }

private:
    std::vector<Node> nodes_;
    std::vector<NodeId> order_;
};

/// One decision rule per decision node: a distribution over the node's
/// domain for every configuration of its parents.
struct Policy {
    std::map<NodeId, std::vector<std::vector<Rational>>> rules;

    /// Unit-mass rules from one chosen value per parent configuration.
    static Policy deterministic(const InfluenceDiagram& id, const std::map<NodeId, std::vector<ValueIndex>>& choice);

    /// Same value for every parent configuration of each decision.
    static Policy constant(const InfluenceDiagram& id, const std::map<NodeId, ValueIndex>& choice);

    bool operator==(const Policy&) const = default;
};

void check_policy(const InfluenceDiagram& id, const Policy& policy);

class ResourceLimitExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Size guard for exhaustive enumeration.
struct EnumerationLimits {
    std::size_t max_policies = 20;
    std::size_t max_realizations = std::size_t{1} << 16;

    /// Defaults overridden by OBLIQUE_MAX_POLICIES / OBLIQUE_MAX_REALIZATIONS.
    static EnumerationLimits from_environment();
};

/// Visits every realisation with positive probability under the policy, in
/// lexicographic order of (topological node order, domain order).
void for_each_outcome(const InfluenceDiagram& id, const Policy& policy,
                      const std::function<void(const Realization&, const Rational&)>& visit,
                      const EnumerationLimits& limits = {});

Rational expected_utility(const InfluenceDiagram& id, const Policy& policy, const EnumerationLimits& limits = {});

/// P(node = value) under the policy.
Rational marginal(const InfluenceDiagram& id, const Policy& policy, NodeId node, ValueIndex value,
                  const EnumerationLimits& limits = {});

/// Visits deterministic policies in canonical order: decisions in topological
/// order, parent configurations in order, values in choice order, the last
/// position varying fastest.
void for_each_deterministic_policy(const InfluenceDiagram& id, const std::function<void(const Policy&)>& visit,
                                   const EnumerationLimits& limits = {});

/// Exhaustive maximiser over deterministic policies; the first policy in
/// canonical order wins ties.
Policy optimal_policy(const InfluenceDiagram& id, const EnumerationLimits& limits = {});

struct ForeseenOutcome {
    Realization outcome;
    Rational score;        // U(xi) * P(xi | policy)
    Rational probability;  // P(xi | policy)
    Rational utility;      // U(xi)
};

/// argmax over positive-probability outcomes of U(xi) P(xi); ties go to the
/// lexicographically first outcome.
ForeseenOutcome best_foreseen_outcome(const InfluenceDiagram& id, const Policy& policy,
                                      const EnumerationLimits& limits = {});

struct RestrictedDiagram {
    InfluenceDiagram diagram;
    NodeId node;
    ValueIndex forbidden;
};

/// ID_{Y != forbidden}. Chance rows drop the forbidden value and renormalise
/// (uniform over the remaining values when nothing is left); decisions lose
/// the value from their choice set.
RestrictedDiagram restrict(const InfluenceDiagram& id, NodeId node, ValueIndex forbidden);

/// Gives every stochastic descendant Y of a decision a parentless noise node
/// u_Y so that Y becomes deterministic in its parents.
InfluenceDiagram to_howard_canonical_form(const InfluenceDiagram& id);

}  // namespace oblique
