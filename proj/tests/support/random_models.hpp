#pragma once

#include <memory>
#include <random>

#include "oblique/epistemics.hpp"
#include "oblique/influence.hpp"

namespace gen {

using namespace oblique;

struct RandomScm {
    std::shared_ptr<const CausalModel> model;
    std::vector<VarId> exogenous;
    std::vector<VarId> endogenous;  // non-decision
    std::vector<VarId> decisions;
};

/// Binary variables: 1..4 exogenous, 0..1 decisions, 1..6 endogenous, each
/// endogenous variable with up to three parents drawn from earlier variables.
inline RandomScm scm(std::mt19937& rng, bool with_decision = true) {
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    int n_exo = pick(1, 4);
    int n_dec = with_decision ? pick(0, 1) : 0;
    int n_endo = pick(1, 6);

    std::vector<Variable> vars;
    RandomScm out;
    for (int i = 0; i < n_exo; ++i) {
        out.exogenous.push_back(vars.size());
        vars.push_back({"u" + std::to_string(i), VarKind::exogenous, {"0", "1"}});
    }
    for (int i = 0; i < n_dec; ++i) {
        out.decisions.push_back(vars.size());
        vars.push_back({"A" + std::to_string(i), VarKind::decision, {"0", "1"}});
    }
    std::vector<StructuralEquation> eqs;
    for (int i = 0; i < n_endo; ++i) {
        VarId target = vars.size();
        out.endogenous.push_back(target);
        vars.push_back({"X" + std::to_string(i), VarKind::endogenous, {"0", "1"}});
        std::vector<VarId> pool(target);
        for (VarId v = 0; v < target; ++v) pool[v] = v;
        std::shuffle(pool.begin(), pool.end(), rng);
        int n_parents = std::min<int>(pick(0, 3), static_cast<int>(pool.size()));
        std::vector<VarId> parents(pool.begin(), pool.begin() + n_parents);
        std::vector<ValueIndex> table(std::size_t{1} << n_parents);
        for (auto& cell : table) cell = pick(0, 1);
        eqs.push_back({target, parents, table});
    }
    // Shuffle equation order so nothing relies on declaration order.
    std::shuffle(eqs.begin(), eqs.end(), rng);
    auto sig = std::make_shared<const Signature>(std::move(vars));
    out.model = std::make_shared<const CausalModel>(sig, std::move(eqs));
    return out;
}

/// Small rational in [0, 1] with denominator up to 8.
inline Rational probability(std::mt19937& rng) {
    int q = std::uniform_int_distribution<int>(1, 8)(rng);
    int p = std::uniform_int_distribution<int>(0, q)(rng);
    return Rational(p) / q;
}

inline std::vector<Rational> distribution(std::mt19937& rng, std::size_t n) {
    std::vector<int> weights(n);
    int total = 0;
    for (auto& w : weights) total += (w = std::uniform_int_distribution<int>(0, 4)(rng));
    if (total == 0) {
        weights[0] = total = 1;
    }
    std::vector<Rational> out;
    for (int w : weights) out.push_back(Rational(w) / total);
    return out;
}

inline UtilityFunction utility(std::mt19937& rng, const RandomScm& m) {
    std::vector<UtilityFunction::LocalTerm> terms;
    const auto& sig = m.model->signature();
    int n_terms = std::uniform_int_distribution<int>(1, 3)(rng);
    std::vector<VarId> pool = m.endogenous;
    for (int i = 0; i < n_terms; ++i) {
        std::shuffle(pool.begin(), pool.end(), rng);
        std::size_t width = std::min<std::size_t>(std::uniform_int_distribution<int>(1, 2)(rng), pool.size());
        std::vector<VarId> scope(pool.begin(), pool.begin() + width);
        std::sort(scope.begin(), scope.end());
        std::vector<Rational> table(row_count(sig, scope));
        for (auto& v : table) v = std::uniform_int_distribution<int>(-5, 10)(rng);
        terms.push_back({scope, table});
    }
    return UtilityFunction::factored(m.model->signature_ptr(), terms, std::uniform_int_distribution<int>(-2, 2)(rng));
}

inline EpistemicState state(std::mt19937& rng, const RandomScm& m) {
    std::map<VarId, std::vector<Rational>> dists;
    for (VarId u : m.exogenous) dists[u] = distribution(rng, 2);
    return product_state(m.model, dists, utility(rng, m));
}

/// Random diagram: 1..2 decisions (at most one observed parent each),
/// 1..5 chance nodes with random rows, 1..2 utility nodes. Policies stay
/// within the default size guard.
inline InfluenceDiagram diagram(std::mt19937& rng) {
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    std::vector<Node> nodes;
    int n_roots = pick(0, 2);
    for (int i = 0; i < n_roots; ++i) {
        nodes.push_back({"r" + std::to_string(i), NodeKind::chance, {"0", "1"}, {}, {distribution(rng, 2)}, {}, {}});
    }
    int n_dec = pick(1, 2);
    for (int i = 0; i < n_dec; ++i) {
        Node d{"D" + std::to_string(i), NodeKind::decision, {"0", "1"}, {}, {}, {}, {}};
        // Only the first decision may observe something, keeping policies <= 16.
        if (i == 0 && !nodes.empty() && pick(0, 1)) d.parents.push_back(pick(0, static_cast<int>(nodes.size()) - 1));
        nodes.push_back(std::move(d));
    }
    int n_chance = pick(1, 5);
    for (int i = 0; i < n_chance; ++i) {
        std::size_t here = nodes.size();
        std::size_t arity = pick(2, 3);
        Node c{"X" + std::to_string(i), NodeKind::chance, {}, {}, {}, {}, {}};
        for (std::size_t v = 0; v < arity; ++v) c.domain.push_back(std::to_string(v));
        std::vector<NodeId> pool(here);
        for (NodeId n = 0; n < here; ++n) pool[n] = n;
        std::shuffle(pool.begin(), pool.end(), rng);
        c.parents.assign(pool.begin(), pool.begin() + std::min<std::size_t>(pick(1, 2), pool.size()));
        std::size_t rows = 1;
        for (NodeId p : c.parents) rows *= nodes[p].domain.size();
        for (std::size_t r = 0; r < rows; ++r) c.distribution.push_back(distribution(rng, arity));
        nodes.push_back(std::move(c));
    }
    int n_util = pick(1, 2);
    std::size_t non_utility = nodes.size();
    for (int i = 0; i < n_util; ++i) {
        Node u{"U" + std::to_string(i), NodeKind::utility, {}, {}, {}, {}, {}};
        u.parents.push_back(pick(static_cast<int>(non_utility) - n_chance, static_cast<int>(non_utility) - 1));
        if (pick(0, 1)) {
            NodeId extra = pick(0, static_cast<int>(non_utility) - 1);
            if (extra != u.parents[0]) u.parents.push_back(extra);
        }
        std::size_t rows = 1;
        for (NodeId p : u.parents) rows *= nodes[p].domain.size();
        for (std::size_t r = 0; r < rows; ++r) u.utility.push_back(pick(-6, 12));
        nodes.push_back(std::move(u));
    }
    return InfluenceDiagram(std::move(nodes));
}

}  // namespace gen
