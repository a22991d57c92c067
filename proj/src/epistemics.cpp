#include "oblique/epistemics.hpp"

namespace oblique {

UtilityFunction UtilityFunction::factored(std::shared_ptr<const Signature> signature, std::vector<LocalTerm> terms,
                                          Rational baseline) {
    if (!signature) throw ModelError("utility without a signature");
    for (const auto& term : terms) {
        for (VarId v : term.scope) {
            if (v >= signature->size()) throw ModelError("utility term over an unknown variable");
        }
        if (term.table.size() != row_count(*signature, term.scope)) {
            throw ModelError("utility term table is not total over its scope");
        }
    }
    UtilityFunction u;
    u.signature_ = std::move(signature);
    u.terms_ = std::move(terms);
    u.baseline_ = std::move(baseline);
    return u;
}

UtilityFunction UtilityFunction::extensional(std::shared_ptr<const Signature> signature,
                                             std::map<std::vector<ValueIndex>, Rational> table) {
    if (!signature) throw ModelError("utility without a signature");
    std::size_t expected = 1;
    for (const auto& var : signature->variables()) expected *= var.domain.size();
    for (const auto& [key, value] : table) {
        if (key.size() != signature->size()) throw ModelError("utility entry is not a full assignment");
        for (VarId v = 0; v < key.size(); ++v) {
            if (key[v] >= signature->domain_size(v)) throw ModelError("utility entry out of domain");
        }
    }
    if (table.size() != expected) throw ModelError("utility table is not total over all assignments");
    UtilityFunction u;
    u.signature_ = std::move(signature);
    u.table_ = std::move(table);
    return u;
}

Rational UtilityFunction::operator()(const World& world) const {
    if (!table_.empty()) return table_.at(world.values);
    Rational total = baseline_;
    for (const auto& term : terms_) total += term.table[row_index(*signature_, term.scope, world.values)];
    return total;
}

EpistemicState::EpistemicState(std::vector<WeightedSetting> settings, UtilityFunction utility)
    : settings_(std::move(settings)), utility_(std::move(utility)) {
    if (settings_.empty()) throw ModelError("epistemic state without settings");
    Rational total = 0;
    for (std::size_t i = 0; i < settings_.size(); ++i) {
        const auto& ws = settings_[i];
        if (!ws.setting.model) throw ModelError("setting without a model");
        if (!(ws.setting.model->signature() == utility_.signature())) {
            throw ModelError("settings and utility must share one signature");
        }
        if (ws.probability < 0) throw ModelError("negative setting probability");
        total += ws.probability;
        for (std::size_t j = 0; j < i; ++j) {
            if (settings_[j].setting == ws.setting) throw ModelError("repeated causal setting");
        }
    }
    if (total != 1) throw ModelError("setting probabilities sum to " + to_string(total) + ", not 1");
}

std::optional<std::size_t> EpistemicState::find(const CausalSetting& setting) const {
    for (std::size_t i = 0; i < settings_.size(); ++i) {
        if (settings_[i].setting == setting) return i;
    }
    return std::nullopt;
}

EpistemicState product_state(std::shared_ptr<const CausalModel> model,
                             const std::map<VarId, std::vector<Rational>>& distributions, UtilityFunction utility) {
    const auto& sig = model->signature();
    const auto exogenous = sig.of_kind(VarKind::exogenous);
    for (VarId u : exogenous) {
        auto it = distributions.find(u);
        if (it == distributions.end()) throw ModelError("no distribution for '" + sig[u].name + "'");
        if (it->second.size() != sig.domain_size(u)) {
            throw ModelError("distribution of '" + sig[u].name + "' does not match its domain");
        }
        Rational total = 0;
        for (const auto& p : it->second) {
            if (p < 0 || p > 1) throw ModelError("probability out of range for '" + sig[u].name + "'");
            total += p;
        }
        if (total != 1) throw ModelError("distribution of '" + sig[u].name + "' does not sum to 1");
    }
    for (const auto& [var, dist] : distributions) {
        if (var >= sig.size() || sig[var].kind != VarKind::exogenous) {
            throw ModelError("distribution given for a non-exogenous variable");
        }
    }

    std::vector<WeightedSetting> settings;
    std::vector<ValueIndex> digits(exogenous.size(), 0);
    while (true) {
        Context ctx;
        Rational weight = 1;
        for (std::size_t i = 0; i < exogenous.size(); ++i) {
            ctx.values[exogenous[i]] = digits[i];
            weight *= distributions.at(exogenous[i])[digits[i]];
        }
        settings.push_back({{model, std::move(ctx)}, std::move(weight)});

        std::size_t pos = exogenous.size();
        while (pos > 0) {
            --pos;
            if (++digits[pos] < sig.domain_size(exogenous[pos])) break;
            digits[pos] = 0;
            if (pos == 0) return EpistemicState(std::move(settings), std::move(utility));
        }
        if (exogenous.empty()) return EpistemicState(std::move(settings), std::move(utility));
    }
}

EpistemicState product_state_bernoulli(std::shared_ptr<const CausalModel> model,
                                       const std::map<VarId, Rational>& params, UtilityFunction utility) {
    const auto& sig = model->signature();
    std::map<VarId, std::vector<Rational>> distributions;
    for (const auto& [var, p] : params) {
        if (var >= sig.size()) throw ModelError("parameter for an unknown variable");
        if (sig.domain_size(var) != 2) throw ModelError("'" + sig[var].name + "' is not binary");
        if (p < 0 || p > 1) throw ModelError("parameter out of range for '" + sig[var].name + "'");
        distributions[var] = {1 - p, p};
    }
    return product_state(std::move(model), distributions, std::move(utility));
}

World world_of(const CounterfactualWorldSpec& spec) {
    const auto& model = *spec.setting.model;
    const auto& sig = model.signature();
    for (const auto& [var, value] : spec.holds.targets) {
        if (var >= sig.size() || sig[var].kind != VarKind::endogenous) {
            throw ModelError("held variables must be endogenous and not decisions");
        }
    }
    if (spec.holds.targets.empty()) return solve(model, spec.setting.context, spec.action);
    return solve(intervene(model, spec.holds), spec.setting.context, spec.action);
}

Rational expected_utility(const EpistemicState& state, const ActionChoice& action, const HoldsBuilder& holds) {
    Rational total = 0;
    for (const auto& ws : state.settings()) {
        if (ws.probability == 0) continue;
        Intervention iv = holds ? holds(ws.setting) : Intervention{};
        total += ws.probability * state.utility()(world_of({ws.setting, action, std::move(iv)}));
    }
    return total;
}

}  // namespace oblique
