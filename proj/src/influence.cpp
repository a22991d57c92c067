#include "oblique/influence.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

namespace oblique {

namespace {

std::size_t saturating_mul(std::size_t a, std::size_t b) {
    if (a != 0 && b > static_cast<std::size_t>(-1) / a) return static_cast<std::size_t>(-1);
    return a * b;
}

}  // namespace

InfluenceDiagram::InfluenceDiagram(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
    const auto n = nodes_.size();
    std::set<std::string> names;
    for (const auto& node : nodes_) {
        if (node.name.empty() || !names.insert(node.name).second) {
            throw ModelError("node names must be nonempty and unique ('" + node.name + "')");
        }
        if (node.kind != NodeKind::utility && node.domain.empty()) {
            throw ModelError("node '" + node.name + "' has an empty domain");
        }
        for (NodeId p : node.parents) {
            if (p >= n) throw ModelError("node '" + node.name + "' has an unknown parent");
            if (nodes_[p].kind == NodeKind::utility) {
                throw ModelError("utility node '" + nodes_[p].name + "' cannot have children");
            }
        }
    }

    std::vector<std::size_t> pending(n, 0);
    std::vector<std::vector<NodeId>> children(n);
    for (NodeId v = 0; v < n; ++v) {
        for (NodeId p : nodes_[v].parents) {
            ++pending[v];
            children[p].push_back(v);
        }
    }
    std::set<NodeId> ready;
    for (NodeId v = 0; v < n; ++v) {
        if (pending[v] == 0) ready.insert(v);
    }
    while (!ready.empty()) {
        NodeId v = *ready.begin();
        ready.erase(ready.begin());
        order_.push_back(v);
        for (NodeId c : children[v]) {
            if (--pending[c] == 0) ready.insert(c);
        }
    }
    if (order_.size() != n) throw ModelError("influence diagram is not acyclic");

    for (NodeId v = 0; v < n; ++v) {
        const auto& node = nodes_[v];
        const auto rows = configurations(v);
        switch (node.kind) {
            case NodeKind::chance:
                if (node.distribution.size() != rows) {
                    throw ModelError("node '" + node.name + "' needs one distribution per parent configuration");
                }
                for (const auto& row : node.distribution) {
                    if (row.size() != node.domain.size()) {
                        throw ModelError("distribution row of '" + node.name + "' does not match its domain");
                    }
                    Rational total = 0;
                    for (const auto& p : row) {
                        if (p < 0) throw ModelError("negative probability in '" + node.name + "'");
                        total += p;
                    }
                    if (total != 1) throw ModelError("distribution row of '" + node.name + "' does not sum to 1");
                }
                break;
            case NodeKind::utility:
                if (node.utility.size() != rows) {
                    throw ModelError("utility node '" + node.name + "' needs one value per parent configuration");
                }
                break;
            case NodeKind::decision:
                for (ValueIndex c : node.choices) {
                    if (c >= node.domain.size()) throw ModelError("choice out of the domain of '" + node.name + "'");
                }
                break;
        }
    }
}

std::optional<NodeId> InfluenceDiagram::find(std::string_view name) const {
    for (NodeId v = 0; v < nodes_.size(); ++v) {
        if (nodes_[v].name == name) return v;
    }
    return std::nullopt;
}

NodeId InfluenceDiagram::id(std::string_view name) const {
    if (auto found = find(name)) return *found;
    throw ModelError("unknown node '" + std::string(name) + "'");
}

std::vector<NodeId> InfluenceDiagram::decisions() const {
    std::vector<NodeId> out;
    for (NodeId v : order_) {
        if (nodes_[v].kind == NodeKind::decision) out.push_back(v);
    }
    return out;
}

std::vector<ValueIndex> InfluenceDiagram::choices(NodeId decision) const {
    const auto& node = nodes_.at(decision);
    if (!node.choices.empty()) return node.choices;
    std::vector<ValueIndex> all(node.domain.size());
    for (ValueIndex i = 0; i < all.size(); ++i) all[i] = i;
    return all;
}

std::size_t InfluenceDiagram::configurations(NodeId id) const {
    std::size_t count = 1;
    for (NodeId p : nodes_.at(id).parents) count = saturating_mul(count, nodes_[p].domain.size());
    return count;
}

std::size_t InfluenceDiagram::configuration(NodeId id, const Realization& values) const {
    std::size_t index = 0;
    for (NodeId p : nodes_[id].parents) index = index * nodes_[p].domain.size() + values[p];
    return index;
}

bool InfluenceDiagram::is_deterministic(NodeId id) const {
    const auto& node = nodes_.at(id);
    if (node.kind != NodeKind::chance) return false;
    return std::all_of(node.distribution.begin(), node.distribution.end(), [](const auto& row) {
        return std::count_if(row.begin(), row.end(), [](const Rational& p) { return p != 0; }) == 1;
    });
}

bool InfluenceDiagram::has_decision_ancestor(NodeId id) const {
    std::vector<bool> seen(nodes_.size(), false);
    std::vector<NodeId> stack{id};
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        if (seen[v]) continue;
        seen[v] = true;
        if (nodes_[v].kind == NodeKind::decision) return true;
        stack.insert(stack.end(), nodes_[v].parents.begin(), nodes_[v].parents.end());
    }
    return false;
}

Rational InfluenceDiagram::total_utility(const Realization& values) const {
    Rational total = 0;
    for (NodeId v = 0; v < nodes_.size(); ++v) {
        if (nodes_[v].kind == NodeKind::utility) total += nodes_[v].utility[configuration(v, values)];
    }
    return total;
}

Policy Policy::deterministic(const InfluenceDiagram& id, const std::map<NodeId, std::vector<ValueIndex>>& choice) {
    Policy policy;
    for (const auto& [decision, values] : choice) {
        const auto& node = id.node(decision);
        auto& rows = policy.rules[decision];
        for (ValueIndex value : values) {
            std::vector<Rational> row(node.domain.size(), 0);
            row.at(value) = 1;
            rows.push_back(std::move(row));
        }
    }
    return policy;
}

Policy Policy::constant(const InfluenceDiagram& id, const std::map<NodeId, ValueIndex>& choice) {
    std::map<NodeId, std::vector<ValueIndex>> expanded;
    for (const auto& [decision, value] : choice) {
        expanded[decision] = std::vector<ValueIndex>(id.configurations(decision), value);
    }
    return deterministic(id, expanded);
}

void check_policy(const InfluenceDiagram& id, const Policy& policy) {
    for (NodeId d : id.decisions()) {
        const auto& node = id.node(d);
        auto it = policy.rules.find(d);
        if (it == policy.rules.end()) throw ModelError("policy has no rule for '" + node.name + "'");
        if (it->second.size() != id.configurations(d)) {
            throw ModelError("rule for '" + node.name + "' is not total over its parent configurations");
        }
        const auto allowed = id.choices(d);
        for (const auto& row : it->second) {
            if (row.size() != node.domain.size()) throw ModelError("rule row for '" + node.name + "' has wrong size");
            Rational total = 0;
            for (ValueIndex v = 0; v < row.size(); ++v) {
                if (row[v] < 0) throw ModelError("negative probability in rule for '" + node.name + "'");
                if (row[v] != 0 && std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
                    throw ModelError("rule for '" + node.name + "' picks a forbidden value");
                }
                total += row[v];
            }
            if (total != 1) throw ModelError("rule row for '" + node.name + "' does not sum to 1");
        }
    }
    for (const auto& [d, rows] : policy.rules) {
        if (d >= id.size() || id.node(d).kind != NodeKind::decision) throw ModelError("rule for a non-decision");
    }
}

EnumerationLimits EnumerationLimits::from_environment() {
    EnumerationLimits limits;
    auto read = [](const char* name, std::size_t& target) {
        if (const char* text = std::getenv(name)) {
            char* end = nullptr;
            unsigned long long value = std::strtoull(text, &end, 10);
            if (end != text && *end == '\0' && value > 0) target = static_cast<std::size_t>(value);
        }
    };
    read("OBLIQUE_MAX_POLICIES", limits.max_policies);
    read("OBLIQUE_MAX_REALIZATIONS", limits.max_realizations);
    return limits;
}

void for_each_outcome(const InfluenceDiagram& id, const Policy& policy,
                      const std::function<void(const Realization&, const Rational&)>& visit,
                      const EnumerationLimits& limits) {
    check_policy(id, policy);
    std::size_t space = 1;
    std::vector<NodeId> order;
    for (NodeId v : id.topological_order()) {
        if (id.node(v).kind == NodeKind::utility) continue;
        space = saturating_mul(space, id.node(v).domain.size());
        order.push_back(v);
    }
    if (space > limits.max_realizations) {
        throw ResourceLimitExceeded("diagram has " + std::to_string(space) + " realizations; limit is " +
                                    std::to_string(limits.max_realizations));
    }

    Realization values(id.size(), 0);
    std::function<void(std::size_t, const Rational&)> descend = [&](std::size_t depth, const Rational& prob) {
        if (depth == order.size()) {
            visit(values, prob);
            return;
        }
        NodeId v = order[depth];
        const auto& node = id.node(v);
        const auto config = id.configuration(v, values);
        const auto& row = node.kind == NodeKind::decision ? policy.rules.at(v)[config] : node.distribution[config];
        for (ValueIndex x = 0; x < row.size(); ++x) {
            if (row[x] == 0) continue;
            values[v] = x;
            descend(depth + 1, prob * row[x]);
        }
        values[v] = 0;
    };
    descend(0, Rational(1));
}

Rational expected_utility(const InfluenceDiagram& id, const Policy& policy, const EnumerationLimits& limits) {
    Rational total = 0;
    for_each_outcome(
        id, policy, [&](const Realization& xi, const Rational& p) { total += p * id.total_utility(xi); }, limits);
    return total;
}

Rational marginal(const InfluenceDiagram& id, const Policy& policy, NodeId node, ValueIndex value,
                  const EnumerationLimits& limits) {
    if (node >= id.size() || id.node(node).kind == NodeKind::utility) throw ModelError("marginal of a utility node");
    Rational total = 0;
    for_each_outcome(
        id, policy, [&](const Realization& xi, const Rational& p) {
            if (xi[node] == value) total += p;
        },
        limits);
    return total;
}

void for_each_deterministic_policy(const InfluenceDiagram& id, const std::function<void(const Policy&)>& visit,
                                   const EnumerationLimits& limits) {
    struct Slot {
        NodeId decision;
        std::vector<ValueIndex> choices;
    };
    std::vector<Slot> slots;
    std::size_t count = 1;
    for (NodeId d : id.decisions()) {
        auto choices = id.choices(d);
        if (choices.empty()) throw ModelError("decision '" + id.node(d).name + "' has no choices");
        for (std::size_t c = 0; c < id.configurations(d); ++c) {
            count = saturating_mul(count, choices.size());
            slots.push_back({d, choices});
        }
    }
    if (count > limits.max_policies) {
        throw ResourceLimitExceeded("diagram has " + std::to_string(count) + " deterministic policies; limit is " +
                                    std::to_string(limits.max_policies));
    }

    std::vector<std::size_t> digits(slots.size(), 0);
    while (true) {
        std::map<NodeId, std::vector<ValueIndex>> choice;
        for (NodeId d : id.decisions()) choice[d];
        for (std::size_t i = 0; i < slots.size(); ++i) choice[slots[i].decision].push_back(slots[i].choices[digits[i]]);
        visit(Policy::deterministic(id, choice));

        std::size_t pos = slots.size();
        bool done = true;
        while (pos > 0) {
            --pos;
            if (++digits[pos] < slots[pos].choices.size()) {
                done = false;
                break;
            }
            digits[pos] = 0;
        }
        if (done) return;
    }
}

Policy optimal_policy(const InfluenceDiagram& id, const EnumerationLimits& limits) {
    std::optional<Policy> best;
    Rational best_value;
    for_each_deterministic_policy(
        id,
        [&](const Policy& policy) {
            Rational value = expected_utility(id, policy, limits);
            if (!best || value > best_value) {
                best = policy;
                best_value = value;
            }
        },
        limits);
    return *best;
}

ForeseenOutcome best_foreseen_outcome(const InfluenceDiagram& id, const Policy& policy,
                                      const EnumerationLimits& limits) {
    std::optional<ForeseenOutcome> best;
    for_each_outcome(
        id, policy,
        [&](const Realization& xi, const Rational& p) {
            Rational u = id.total_utility(xi);
            Rational score = u * p;
            if (!best || score > best->score) best = ForeseenOutcome{xi, score, p, u};
        },
        limits);
    return *best;
}

RestrictedDiagram restrict(const InfluenceDiagram& id, NodeId node_id, ValueIndex forbidden) {
    if (node_id >= id.size()) throw ModelError("restriction of an unknown node");
    std::vector<Node> nodes = id.nodes();
    Node& node = nodes[node_id];
    if (node.kind == NodeKind::utility) throw ModelError("utility nodes cannot be restricted");
    if (forbidden >= node.domain.size()) throw ModelError("forbidden value out of the domain of '" + node.name + "'");
    if (node.domain.size() == 1) throw ModelError("'" + node.name + "' has a single value; nothing remains");

    if (node.kind == NodeKind::decision) {
        auto choices = id.choices(node_id);
        std::erase(choices, forbidden);
        if (choices.empty()) throw ModelError("decision '" + node.name + "' has no choice left");
        node.choices = std::move(choices);
    } else {
        const Rational remaining_count(node.domain.size() - 1);
        for (auto& row : node.distribution) {
            row[forbidden] = 0;
            Rational remaining = 0;
            for (const auto& p : row) remaining += p;
            for (ValueIndex x = 0; x < row.size(); ++x) {
                if (x == forbidden) continue;
                row[x] = remaining == 0 ? Rational(1) / remaining_count : row[x] / remaining;
            }
        }
    }
    return {InfluenceDiagram(std::move(nodes)), node_id, forbidden};
}

InfluenceDiagram to_howard_canonical_form(const InfluenceDiagram& id) {
    std::vector<bool> needs_noise(id.size(), false);
    bool any = false;
    for (NodeId v = 0; v < id.size(); ++v) {
        const auto& node = id.node(v);
        if (node.kind == NodeKind::chance && !id.is_deterministic(v) && id.has_decision_ancestor(v)) {
            needs_noise[v] = true;
            any = true;
        }
    }
    if (!any) return id;

    std::set<std::string> names;
    for (const auto& node : id.nodes()) names.insert(node.name);

    // New ids: each noise node is placed immediately before its child.
    std::vector<NodeId> remap(id.size());
    {
        NodeId next = 0;
        for (NodeId v = 0; v < id.size(); ++v) {
            if (needs_noise[v]) ++next;
            remap[v] = next++;
        }
    }

    std::vector<Node> out;
    for (NodeId v = 0; v < id.size(); ++v) {
        Node node = id.node(v);
        for (auto& p : node.parents) p = remap[p];
        if (!needs_noise[v]) {
            out.push_back(std::move(node));
            continue;
        }

        // Cells of the common refinement of every row's cumulative breakpoints.
        std::set<Rational> cuts{Rational(0), Rational(1)};
        for (const auto& row : node.distribution) {
            Rational cum = 0;
            for (const auto& p : row) {
                cum += p;
                cuts.insert(cum);
            }
        }
        std::vector<Rational> bounds(cuts.begin(), cuts.end());

        Node noise;
        noise.name = "u_" + node.name;
        while (names.contains(noise.name)) noise.name += "_";
        names.insert(noise.name);
        noise.kind = NodeKind::chance;
        std::vector<Rational> weights;
        for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
            noise.domain.push_back(std::to_string(k));
            weights.push_back(bounds[k + 1] - bounds[k]);
        }
        noise.distribution.push_back(weights);

        std::vector<std::vector<Rational>> rows;
        for (const auto& row : node.distribution) {
            for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
                // The value whose cumulative interval contains cell k.
                Rational cum = 0;
                ValueIndex chosen = 0;
                for (ValueIndex x = 0; x < row.size(); ++x) {
                    cum += row[x];
                    if (bounds[k] < cum) {
                        chosen = x;
                        break;
                    }
                }
                std::vector<Rational> point(row.size(), 0);
                point[chosen] = 1;
                rows.push_back(std::move(point));
            }
        }
        node.distribution = std::move(rows);
        node.parents.push_back(remap[v] - 1);
        out.push_back(std::move(noise));
        out.push_back(std::move(node));
    }
    return InfluenceDiagram(std::move(out));
}

}  // namespace oblique
