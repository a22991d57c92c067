#include "oblique/intent_scm.hpp"

#include <algorithm>

namespace oblique {

Confidence::Confidence(Rational value) : value_(std::move(value)) {
    if (value_ <= 0 || value_ >= 1) throw ModelError("confidence must lie strictly between 0 and 1");
}

CausalFormula OutcomeSpec::formula() const {
    CausalFormula phi;
    for (std::size_t i = 0; i < variables.size(); ++i) phi.literals.push_back({variables[i], values[i], false});
    return phi;
}

Intervention OutcomeSpec::intervention() const {
    Intervention iv;
    for (std::size_t i = 0; i < variables.size(); ++i) iv.targets[variables[i]] = values[i];
    return iv;
}

void check_outcome(const Signature& signature, const OutcomeSpec& spec) {
    if (spec.variables.size() != spec.values.size()) throw ModelError("outcome variables and values differ in length");
    for (std::size_t i = 0; i < spec.variables.size(); ++i) {
        VarId v = spec.variables[i];
        if (v >= signature.size() || signature[v].kind != VarKind::endogenous) {
            throw ModelError("outcome variables must be endogenous and not decisions");
        }
        if (spec.values[i] >= signature.domain_size(v)) {
            throw ModelError("outcome value out of the domain of '" + signature[v].name + "'");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (spec.variables[j] == v) throw ModelError("outcome repeats '" + signature[v].name + "'");
        }
    }
}

Rational ObliqueResult::achieved() const {
    if (clause == ObliqueClause::unconditional) return unconditional;
    if (clause == ObliqueClause::conditional) return *conditional;
    if (conditional && *conditional > unconditional) return *conditional;
    return unconditional;
}

namespace {

// Worlds of every setting under the action, computed once per query.
class ActionWorlds {
public:
    ActionWorlds(const EpistemicState& state, const ActionChoice& action) : state_(state) {
        worlds_.reserve(state.settings().size());
        for (const auto& ws : state.settings()) worlds_.push_back(world_of({ws.setting, action, {}}));
    }

    const World& operator[](std::size_t i) const { return worlds_[i]; }

    Rational expected_utility() const {
        Rational total = 0;
        for (std::size_t i = 0; i < worlds_.size(); ++i) {
            const auto& p = state_.settings()[i].probability;
            if (p != 0) total += p * state_.utility()(worlds_[i]);
        }
        return total;
    }

    /// Sum of P over settings whose action world satisfies phi.
    Rational probability(const CausalFormula& phi) const {
        Rational total = 0;
        for (std::size_t i = 0; i < worlds_.size(); ++i) {
            if (phi.holds_in(worlds_[i])) total += state_.settings()[i].probability;
        }
        return total;
    }

    /// O' <- O'_{A<-a} for the i-th setting.
    Intervention freeze(std::size_t i, const VarSet& vars) const {
        Intervention iv;
        for (VarId v : vars) iv.targets[v] = worlds_[i][v];
        return iv;
    }

private:
    const EpistemicState& state_;
    std::vector<World> worlds_;
};

bool inequality_holds(const EpistemicState& state, const ActionWorlds& worlds, const Rational& lhs,
                      const ReferenceSet& ref, const VarSet& frozen) {
    if (ref.alternatives.empty()) throw ModelError("reference set must not be empty");
    for (const auto& alt : ref.alternatives) {
        Rational rhs = 0;
        const auto& settings = state.settings();
        for (std::size_t i = 0; i < settings.size(); ++i) {
            if (settings[i].probability == 0) continue;
            rhs += settings[i].probability *
                   state.utility()(world_of({settings[i].setting, alt, worlds.freeze(i, frozen)}));
        }
        if (lhs <= rhs) return true;
    }
    return false;
}

void check_action(const EpistemicState& state, const ActionChoice& action) {
    const auto& sig = state.signature();
    for (const auto& [var, value] : action.values) {
        if (var >= sig.size() || sig[var].kind != VarKind::decision) throw ModelError("action on a non-decision");
        if (value >= sig.domain_size(var)) {
            throw ModelError("unknown action value for '" + sig[var].name + "'");
        }
    }
}

VarSet normalized(VarSet vars) {
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    return vars;
}

}  // namespace

bool affect_inequality_holds(const EpistemicState& state, const ActionChoice& action, const ReferenceSet& ref,
                             const VarSet& frozen) {
    check_action(state, action);
    ActionWorlds worlds(state, action);
    return inequality_holds(state, worlds, worlds.expected_utility(), ref, normalized(frozen));
}

AffectResult intends_to_affect(const EpistemicState& state, const ActionChoice& action, const ReferenceSet& ref,
                               const VarSet& outcome_vars) {
    check_action(state, action);
    const auto& sig = state.signature();
    const VarSet base = normalized(outcome_vars);
    for (VarId v : base) {
        if (v >= sig.size() || sig[v].kind != VarKind::endogenous) {
            throw ModelError("intent-to-affect is defined on endogenous non-decision variables");
        }
    }

    ActionWorlds worlds(state, action);
    const Rational lhs = worlds.expected_utility();

    VarSet extra;
    for (VarId v : sig.of_kind(VarKind::endogenous)) {
        if (!std::binary_search(base.begin(), base.end(), v)) extra.push_back(v);
    }

    AffectResult result;
    // Supersets by cardinality, then lexicographically. A superset is
    // minimal iff it contains no smaller witness found earlier.
    for (std::size_t k = 0; k <= extra.size(); ++k) {
        std::vector<std::size_t> pick(k);
        for (std::size_t i = 0; i < k; ++i) pick[i] = i;
        while (true) {
            VarSet candidate = base;
            for (std::size_t i : pick) candidate.push_back(extra[i]);
            candidate = normalized(std::move(candidate));

            bool covers_witness = std::any_of(result.minimal_supersets.begin(), result.minimal_supersets.end(),
                                              [&](const VarSet& w) {
                                                  return std::includes(candidate.begin(), candidate.end(),
                                                                       w.begin(), w.end());
                                              });
            if (!covers_witness && inequality_holds(state, worlds, lhs, ref, candidate)) {
                result.minimal_supersets.push_back(std::move(candidate));
            }

            // next k-combination of extra
            std::size_t i = k;
            while (i > 0 && pick[i - 1] == extra.size() - k + i - 1) --i;
            if (i == 0) break;
            ++pick[i - 1];
            for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
        }
        if (k == 0 && !result.minimal_supersets.empty()) break;
    }
    result.intends = result.minimal_supersets.size() == 1 && result.minimal_supersets.front() == base;
    return result;
}

bool is_possible(const EpistemicState& state, const CausalSetting& setting) {
    auto index = state.find(setting);
    if (!index) throw ModelError("setting is not part of the epistemic state");
    return state.settings()[*index].probability > 0;
}

bool is_feasible(const CausalSetting& setting, const ActionChoice& action, const OutcomeSpec& spec) {
    return satisfies(*setting.model, setting.context, action, {}, spec.formula());
}

IntentVerdict hkw_intends(const EpistemicState& state, const ActionChoice& action, const ReferenceSet& ref,
                          const OutcomeSpec& spec) {
    const auto& sig = state.signature();
    check_outcome(sig, spec);
    check_action(state, action);
    if (ref.alternatives.empty()) throw ModelError("reference set must not be empty");

    IntentVerdict verdict;
    verdict.outcome = spec;
    verdict.action = action;
    verdict.default_decisions = ref.alternatives.front();

    auto affect = intends_to_affect(state, action, ref, spec.variables);
    verdict.intended_affect_sets = affect.minimal_supersets;
    if (!affect.intends) verdict.failed_conditions.push_back(HkwCondition::affect);

    ActionWorlds worlds(state, action);
    const auto& settings = state.settings();
    auto feasible_somewhere = [&](const std::vector<ValueIndex>& values) {
        CausalFormula phi = OutcomeSpec{spec.variables, values}.formula();
        for (std::size_t i = 0; i < settings.size(); ++i) {
            if (settings[i].probability > 0 && phi.holds_in(worlds[i])) return true;
        }
        return false;
    };

    if (!feasible_somewhere(spec.values)) verdict.failed_conditions.push_back(HkwCondition::can_cause);

    auto intervened_utility = [&](const std::vector<ValueIndex>& values) {
        Rational total = 0;
        Intervention iv = OutcomeSpec{spec.variables, values}.intervention();
        for (const auto& ws : settings) {
            if (ws.probability == 0) continue;
            total += ws.probability * state.utility()(world_of({ws.setting, verdict.default_decisions, iv}));
        }
        return total;
    };

    const Rational best = intervened_utility(spec.values);
    std::vector<ValueIndex> other(spec.variables.size(), 0);
    bool best_outcome = true;
    while (best_outcome) {
        if (other != spec.values && feasible_somewhere(other) && intervened_utility(other) > best) {
            best_outcome = false;
            break;
        }
        std::size_t pos = other.size();
        bool done = true;
        while (pos > 0) {
            --pos;
            if (++other[pos] < sig.domain_size(spec.variables[pos])) {
                done = false;
                break;
            }
            other[pos] = 0;
        }
        if (done) break;
    }
    if (!best_outcome) verdict.failed_conditions.push_back(HkwCondition::best_outcome);

    if (!verdict.failed_conditions.empty()) verdict.failed = verdict.failed_conditions.front();
    verdict.direct = verdict.failed_conditions.empty();
    return verdict;
}

ObliqueResult scm_oblique_intends(const EpistemicState& state, const ActionChoice& action, const OutcomeSpec& direct,
                                  const OutcomeSpec& side, const Confidence& confidence) {
    const auto& sig = state.signature();
    check_outcome(sig, direct);
    check_outcome(sig, side);
    check_action(state, action);
    for (VarId v : side.variables) {
        if (std::find(direct.variables.begin(), direct.variables.end(), v) != direct.variables.end()) {
            throw ModelError("side effect shares variable '" + sig[v].name + "' with the direct outcome");
        }
    }

    ActionWorlds worlds(state, action);
    CausalFormula side_phi = side.formula();
    CausalFormula direct_phi = direct.formula();
    CausalFormula joint_phi = side_phi;
    joint_phi.literals.insert(joint_phi.literals.end(), direct_phi.literals.begin(), direct_phi.literals.end());

    ObliqueResult result;
    result.unconditional = worlds.probability(side_phi);
    if (Rational denominator = worlds.probability(direct_phi); denominator > 0) {
        result.conditional = worlds.probability(joint_phi) / denominator;
    }
    if (result.unconditional > confidence.value()) {
        result.clause = ObliqueClause::unconditional;
    } else if (result.conditional && *result.conditional > confidence.value()) {
        result.clause = ObliqueClause::conditional;
    }
    result.holds = result.clause.has_value();
    return result;
}

void collect_oblique(const EpistemicState& state, IntentVerdict& verdict, const Confidence& confidence) {
    const auto& sig = state.signature();
    ActionWorlds worlds(state, verdict.action);
    const auto& settings = state.settings();
    verdict.oblique.clear();
    for (VarId v : sig.of_kind(VarKind::endogenous)) {
        const auto& dvars = verdict.outcome.variables;
        if (std::find(dvars.begin(), dvars.end(), v) != dvars.end()) continue;
        for (ValueIndex value = 0; value < sig.domain_size(v); ++value) {
            bool realised = false;
            for (std::size_t i = 0; i < settings.size() && !realised; ++i) {
                realised = settings[i].probability > 0 && worlds[i][v] == value;
            }
            if (!realised) continue;
            OutcomeSpec side{{v}, {value}};
            auto result = scm_oblique_intends(state, verdict.action, verdict.outcome, side, confidence);
            if (result.holds) verdict.oblique.push_back({std::move(side), std::move(result)});
        }
    }
}

}  // namespace oblique
