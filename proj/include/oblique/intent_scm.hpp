#pragma once

#include <optional>
#include <vector>

#include "oblique/epistemics.hpp"

namespace oblique {

/// Sorted, duplicate-free set of variable ids.
using VarSet = std::vector<VarId>;

/// Confidence threshold for oblique intent, strictly between 0 and 1.
class Confidence {
public:
    explicit Confidence(Rational value);

    const Rational& value() const { return value_; }

private:
    Rational value_;
};

/// REF(a): the alternatives an action is compared against. The first
/// alternative doubles as the default decision where a world fixes none.
struct ReferenceSet {
    std::vector<ActionChoice> alternatives;
};

/// O = o
struct OutcomeSpec {
    std::vector<VarId> variables;
    std::vector<ValueIndex> values;

    CausalFormula formula() const;
    Intervention intervention() const;
    bool operator==(const OutcomeSpec&) const = default;
};

/// Checks OutcomeSpec invariants against a signature: matching lengths,
/// distinct non-decision endogenous variables, in-domain values.
void check_outcome(const Signature& signature, const OutcomeSpec& spec);

/// EU(a) <= max over a' in REF(a) of EU(a') with `frozen` held, per
/// setting, at the values it takes under a.
bool affect_inequality_holds(const EpistemicState& state, const ActionChoice& action, const ReferenceSet& ref,
                             const VarSet& frozen);

struct AffectResult {
    /// O itself satisfies the inequality, i.e. O is its own minimal superset.
    bool intends = false;
    /// Minimal supersets of O satisfying the inequality (minimal among the
    /// supersets that contain O), by cardinality then variable order.
    std::vector<VarSet> minimal_supersets;
};

AffectResult intends_to_affect(const EpistemicState& state, const ActionChoice& action, const ReferenceSet& ref,
                               const VarSet& outcome_vars);

/// P(M, u) > 0. Throws if the setting is not part of the state.
bool is_possible(const EpistemicState& state, const CausalSetting& setting);

/// (M, u) |= (A <- a)(O = o)
bool is_feasible(const CausalSetting& setting, const ActionChoice& action, const OutcomeSpec& spec);

enum class HkwCondition { affect, can_cause, best_outcome };

enum class ObliqueClause { unconditional, conditional };

struct ObliqueResult {
    bool holds = false;
    std::optional<ObliqueClause> clause;
    /// Clause (a): probability of the side effect under the action.
    Rational unconditional = 0;
    /// Clause (b): probability of the side effect given the direct outcome;
    /// empty when the direct outcome has probability zero.
    std::optional<Rational> conditional;

    /// Value of the clause that fired, or the larger of the two otherwise.
    Rational achieved() const;
};

struct ObliqueFinding {
    OutcomeSpec side;
    ObliqueResult result;
};

struct IntentVerdict {
    OutcomeSpec outcome;
    ActionChoice action;
    std::vector<VarSet> intended_affect_sets;
    bool direct = false;
    /// First failing condition, and every failing condition in order.
    std::optional<HkwCondition> failed;
    std::vector<HkwCondition> failed_conditions;
    /// Decision values used for the O-intervened worlds of condition (c).
    ActionChoice default_decisions;
    std::vector<ObliqueFinding> oblique;
};

/// Direct intent: conditions (a) affect, (b) can cause, (c) best outcome.
IntentVerdict hkw_intends(const EpistemicState& state, const ActionChoice& action, const ReferenceSet& ref,
                          const OutcomeSpec& spec);

/// Throws ModelError when the side and direct variable sets overlap.
ObliqueResult scm_oblique_intends(const EpistemicState& state, const ActionChoice& action, const OutcomeSpec& direct,
                                  const OutcomeSpec& side, const Confidence& confidence);

/// Every single-variable side effect realised with positive probability
/// under the action, disjoint from the direct outcome, that is obliquely
/// intended. Stores the findings on the verdict.
void collect_oblique(const EpistemicState& state, IntentVerdict& verdict, const Confidence& confidence);

}  // namespace oblique
