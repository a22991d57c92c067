#pragma once

#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "oblique/rational.hpp"
#include "oblique/scm.hpp"

namespace oblique {

struct CausalSetting {
    std::shared_ptr<const CausalModel> model;
    Context context;

    bool operator==(const CausalSetting& other) const {
        return context == other.context && (model == other.model || *model == *other.model);
    }
};

/// Utility over complete worlds. Either a sum of local tables plus a baseline
/// constant, or an explicit table over every assignment of the signature.
class UtilityFunction {
public:
    struct LocalTerm {
        std::vector<VarId> scope;
        std::vector<Rational> table;  // row-major over scope, last variable fastest
    };

    static UtilityFunction factored(std::shared_ptr<const Signature> signature, std::vector<LocalTerm> terms,
                                    Rational baseline = 0);
    static UtilityFunction extensional(std::shared_ptr<const Signature> signature,
                                       std::map<std::vector<ValueIndex>, Rational> table);
    static UtilityFunction constant(std::shared_ptr<const Signature> signature, Rational value) {
        return factored(std::move(signature), {}, std::move(value));
    }

    Rational operator()(const World& world) const;

    const Signature& signature() const { return *signature_; }
    const std::vector<LocalTerm>& terms() const { return terms_; }
    const Rational& baseline() const { return baseline_; }
    bool is_extensional() const { return !table_.empty(); }

private:
    UtilityFunction() = default;

    std::shared_ptr<const Signature> signature_;
    std::vector<LocalTerm> terms_;
    Rational baseline_ = 0;
    std::map<std::vector<ValueIndex>, Rational> table_;
};

struct WeightedSetting {
    CausalSetting setting;
    Rational probability;
};

/// (P, K, u). Probabilities are exact and must sum to one; zero-weight
/// settings are kept (they are simply not possible).
class EpistemicState {
public:
    EpistemicState(std::vector<WeightedSetting> settings, UtilityFunction utility);

    const std::vector<WeightedSetting>& settings() const { return settings_; }
    const UtilityFunction& utility() const { return utility_; }
    const Signature& signature() const { return utility_.signature(); }

    std::optional<std::size_t> find(const CausalSetting& setting) const;

private:
    std::vector<WeightedSetting> settings_;
    UtilityFunction utility_;
};

/// Product distribution over the exogenous variables: one setting per
/// context, contexts enumerated in variable/domain order.
EpistemicState product_state(std::shared_ptr<const CausalModel> model,
                             const std::map<VarId, std::vector<Rational>>& distributions, UtilityFunction utility);

/// Binary exogenous variables only; each parameter is the probability of the
/// variable's second domain value.
EpistemicState product_state_bernoulli(std::shared_ptr<const CausalModel> model,
                                       const std::map<VarId, Rational>& params, UtilityFunction utility);

/// w_{M,u,A<-a,X<-x}
struct CounterfactualWorldSpec {
    CausalSetting setting;
    ActionChoice action;
    Intervention holds;
};

World world_of(const CounterfactualWorldSpec& spec);

/// Computes per-setting frozen values; an empty function means no holds.
using HoldsBuilder = std::function<Intervention(const CausalSetting&)>;

Rational expected_utility(const EpistemicState& state, const ActionChoice& action, const HoldsBuilder& holds = {});

}  // namespace oblique
