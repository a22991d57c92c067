#include "oblique/dsl/lower.hpp"

#include <algorithm>
#include <set>

namespace oblique::dsl {

namespace {

class Lowerer {
public:
    Lowerer(const ModelDocument& doc, const ParameterOverrides& overrides) : doc_(doc), overrides_(overrides) {}

    ScmLowering run() {
        ScmLowering out;
        resolve_parameters();
        build_signature();
        if (!signature_) {
            out.diagnostics = std::move(diagnostics_);
            return out;
        }
        auto equations = build_equations();
        auto model = std::make_shared<const CausalModel>(signature_, std::move(equations));
        check_model(*model);
        auto distributions = build_distributions();
        auto utility = build_utility();
        auto reference = build_reference();
        auto queries = build_queries();
        if (!diagnostics_.empty() || !utility) {
            out.diagnostics = std::move(diagnostics_);
            return out;
        }
        try {
            EpistemicState state = product_state(model, distributions, std::move(*utility));
            out.program.emplace(ScmProgram{model, std::move(state), std::move(distributions), parameters_,
                                           std::move(reference), std::move(queries)});
        } catch (const ModelError& e) {
            error({1, 1}, e.what(), "");
        }
        out.diagnostics = std::move(diagnostics_);
        return out;
    }

private:
    void error(const SourcePos& at, std::string message, std::string token) {
        diagnostics_.push_back({Severity::error, at.line, at.column, std::move(message), std::move(token)});
    }

    void resolve_parameters() {
        for (const auto& p : doc_.parameters) {
            auto it = overrides_.find(p.name);
            parameters_.emplace_back(p.name, it == overrides_.end() ? p.value : it->second);
        }
        for (const auto& [name, value] : overrides_) {
            if (std::none_of(parameters_.begin(), parameters_.end(), [&](const auto& p) { return p.first == name; })) {
                error({1, 1}, "override of unknown parameter '" + name + "'", name);
            }
        }
    }

    std::optional<Rational> amount(const Amount& a, const SourcePos& at) {
        if (a.parameter.empty()) return a.literal;
        for (const auto& [name, value] : parameters_) {
            if (name == a.parameter) return a.negated ? Rational(-value) : value;
        }
        error(at, "unknown parameter '" + a.parameter + "'", a.parameter);
        return std::nullopt;
    }

    void build_signature() {
        if (doc_.variables.empty()) {
            error({1, 1}, "no variables declared", "");
            return;
        }
        std::vector<Variable> vars;
        for (const auto& v : doc_.variables) vars.push_back({v.name, v.kind, v.domain});
        try {
            signature_ = std::make_shared<const Signature>(std::move(vars));
        } catch (const ModelError& e) {
            error(doc_.variables.front().pos, e.what(), doc_.variables.front().name);
        }
    }

    std::optional<VarId> var(const std::string& name, const SourcePos& at) {
        auto id = signature_->find(name);
        if (!id) error(at, "unknown variable '" + name + "'", name);
        return id;
    }

    std::optional<ValueIndex> value(VarId id, const std::string& text, const SourcePos& at) {
        auto v = signature_->find_value(id, text);
        if (!v) error(at, "'" + text + "' is not a value of '" + (*signature_)[id].name + "'", text);
        return v;
    }

    void collect_names(const Expr& e, std::set<VarId>& out) {
        if (!e.name.empty()) {
            if (auto id = var(e.name, e.pos)) out.insert(*id);
        }
        for (const auto& arg : e.args) collect_names(arg, out);
    }

    bool eval(const Expr& e, const std::map<VarId, ValueIndex>& row) {
        switch (e.op) {
            case Expr::Op::constant: return e.truth;
            case Expr::Op::variable: {
                VarId id = *signature_->find(e.name);
                return (*signature_)[id].domain[row.at(id)] == "1";
            }
            case Expr::Op::equals:
            case Expr::Op::not_equals: {
                VarId id = *signature_->find(e.name);
                bool eq = (*signature_)[id].domain[row.at(id)] == e.value;
                return e.op == Expr::Op::equals ? eq : !eq;
            }
            case Expr::Op::negate: return !eval(e.args.at(0), row);
            case Expr::Op::conjunction:
                return std::all_of(e.args.begin(), e.args.end(), [&](const Expr& a) { return eval(a, row); });
            case Expr::Op::disjunction:
                return std::any_of(e.args.begin(), e.args.end(), [&](const Expr& a) { return eval(a, row); });
        }
        return false;
    }

    static std::vector<ValueIndex> unrank(const Signature& sig, const std::vector<VarId>& parents, std::size_t row) {
        std::vector<ValueIndex> values(parents.size());
        for (std::size_t i = parents.size(); i-- > 0;) {
            values[i] = row % sig.domain_size(parents[i]);
            row /= sig.domain_size(parents[i]);
        }
        return values;
    }

    std::optional<StructuralEquation> from_expr(VarId target, const Expr& expr) {
        std::size_t before = diagnostics_.size();
        std::set<VarId> names;
        collect_names(expr, names);
        if (diagnostics_.size() != before) return std::nullopt;
        const auto& target_var = (*signature_)[target];
        auto zero = signature_->find_value(target, "0");
        auto one = signature_->find_value(target, "1");
        if (!zero || !one || target_var.domain.size() != 2) return std::nullopt;  // reported by the parser

        StructuralEquation eq{target, std::vector<VarId>(names.begin(), names.end()), {}};
        std::size_t rows = row_count(*signature_, eq.parents);
        for (std::size_t r = 0; r < rows; ++r) {
            auto values = unrank(*signature_, eq.parents, r);
            std::map<VarId, ValueIndex> row;
            for (std::size_t i = 0; i < eq.parents.size(); ++i) row[eq.parents[i]] = values[i];
            eq.table.push_back(eval(expr, row) ? *one : *zero);
        }
        return eq;
    }

    std::optional<StructuralEquation> from_table(VarId target, const EquationDecl& decl, const TableDef& def) {
        StructuralEquation eq{target, {}, {}};
        bool ok = true;
        for (const auto& p : def.parents) {
            if (auto id = var(p, decl.pos)) {
                if (std::find(eq.parents.begin(), eq.parents.end(), *id) != eq.parents.end()) {
                    error(decl.pos, "parent '" + p + "' listed twice", p);
                    ok = false;
                }
                eq.parents.push_back(*id);
            } else {
                ok = false;
            }
        }
        if (!ok) return std::nullopt;
        std::size_t rows = row_count(*signature_, eq.parents);
        std::vector<std::optional<ValueIndex>> table(rows);
        for (const auto& row : def.rows) {
            if (row.inputs.size() != eq.parents.size()) return std::nullopt;  // reported by the parser
            std::vector<ValueIndex> inputs;
            for (std::size_t i = 0; i < row.inputs.size(); ++i) {
                auto v = value(eq.parents[i], row.inputs[i], row.pos);
                if (!v) return std::nullopt;
                inputs.push_back(*v);
            }
            auto out = value(target, row.output, row.pos);
            if (!out) return std::nullopt;
            std::size_t index = 0;
            for (std::size_t i = 0; i < inputs.size(); ++i) index = index * signature_->domain_size(eq.parents[i]) + inputs[i];
            auto& cell = table[index];
            if (cell) {
                error(row.pos, "duplicate row in the table of '" + decl.target + "'", decl.target);
                return std::nullopt;
            }
            cell = *out;
        }
        for (std::size_t r = 0; r < rows; ++r) {
            if (table[r]) {
                eq.table.push_back(*table[r]);
                continue;
            }
            auto missing = unrank(*signature_, eq.parents, r);
            std::string combo;
            for (std::size_t i = 0; i < missing.size(); ++i) {
                combo += (i ? " " : "") + (*signature_)[eq.parents[i]].domain[missing[i]];
            }
            error(decl.pos, "table of '" + decl.target + "' is not total: no row for (" + combo + ")", decl.target);
            return std::nullopt;
        }
        return eq;
    }

    std::vector<StructuralEquation> build_equations() {
        std::vector<StructuralEquation> out;
        for (const auto& decl : doc_.equations) {
            auto target = var(decl.target, decl.pos);
            if (!target) continue;
            if ((*signature_)[*target].kind != VarKind::endogenous) {
                error(decl.pos, "'" + decl.target + "' takes no equation", decl.target);
                continue;
            }
            std::optional<StructuralEquation> eq;
            if (const auto* expr = std::get_if<Expr>(&decl.body)) {
                eq = from_expr(*target, *expr);
            } else {
                eq = from_table(*target, decl, std::get<TableDef>(decl.body));
            }
            if (eq) {
                equation_pos_[*target] = decl.pos;
                out.push_back(std::move(*eq));
            }
        }
        return out;
    }

    SourcePos pos_of(const std::string& name) {
        if (auto id = signature_->find(name); id && equation_pos_.contains(*id)) return equation_pos_[*id];
        if (const auto* v = doc_.variable(name)) return v->pos;
        return {1, 1};
    }

    void check_model(const CausalModel& model) {
        for (const auto& d : validate_model(model)) {
            // Equations dropped above were already reported.
            if (d.kind == ModelDiagnostic::Kind::missing_equation) {
                const auto& name = d.variables.front();
                bool declared = std::any_of(doc_.equations.begin(), doc_.equations.end(),
                                            [&](const auto& e) { return e.target == name; });
                if (declared) continue;
            }
            std::string first = d.variables.empty() ? "" : d.variables.front();
            error(pos_of(first), d.message, first);
        }
    }

    std::map<VarId, std::vector<Rational>> build_distributions() {
        std::map<VarId, std::vector<Rational>> out;
        for (const auto& d : doc_.distribution) {
            auto id = var(d.name, d.pos);
            if (!id) continue;
            const auto& v = (*signature_)[*id];
            if (v.kind != VarKind::exogenous) {
                error(d.pos, "'" + d.name + "' is not exogenous", d.name);
                continue;
            }
            std::vector<Rational> weights;
            if (d.full) {
                weights = d.weights;
            } else if (v.domain.size() == 2 && d.weights.size() == 1) {
                weights = {1 - d.weights[0], d.weights[0]};
            }
            if (weights.size() != v.domain.size()) {
                error(d.pos, "distribution of '" + d.name + "' does not match its domain", d.name);
                continue;
            }
            Rational total = 0;
            bool in_range = true;
            for (const auto& w : weights) {
                in_range = in_range && w >= 0 && w <= 1;
                total += w;
            }
            if (!in_range) {
                error(d.pos, "probability for '" + d.name + "' outside [0, 1]", d.name);
                continue;
            }
            if (total != 1) {
                error(d.pos, "distribution of '" + d.name + "' sums to " + to_literal(total) + ", not 1", d.name);
                continue;
            }
            out[*id] = std::move(weights);
        }
        for (VarId u : signature_->of_kind(VarKind::exogenous)) {
            if (!out.contains(u) &&
                std::none_of(doc_.distribution.begin(), doc_.distribution.end(),
                             [&](const auto& d) { return d.name == (*signature_)[u].name; })) {
                const auto& decl = *doc_.variable((*signature_)[u].name);
                error(decl.pos, "no distribution for exogenous '" + decl.name + "'", decl.name);
            }
        }
        return out;
    }

    std::optional<UtilityFunction> build_utility() {
        if (!doc_.utility) {
            error({1, 1}, "no utility section", "");
            return std::nullopt;
        }
        const auto& decl = *doc_.utility;
        std::vector<UtilityFunction::LocalTerm> terms;
        bool ok = true;
        for (const auto& term : decl.terms) {
            std::vector<Literal> lits;
            std::set<VarId> scope;
            for (const auto& lit : term.condition) {
                auto id = var(lit.name, lit.pos);
                if (!id) {
                    ok = false;
                    continue;
                }
                auto v = value(*id, lit.value, lit.pos);
                if (!v) {
                    ok = false;
                    continue;
                }
                lits.push_back({*id, *v, lit.negated});
                scope.insert(*id);
            }
            auto value = amount(term.amount, term.pos);
            if (!value || !ok) {
                ok = false;
                continue;
            }
            UtilityFunction::LocalTerm local{std::vector<VarId>(scope.begin(), scope.end()), {}};
            std::size_t rows = row_count(*signature_, local.scope);
            for (std::size_t r = 0; r < rows; ++r) {
                auto values = unrank(*signature_, local.scope, r);
                bool holds = std::all_of(lits.begin(), lits.end(), [&](const Literal& l) {
                    auto at = std::find(local.scope.begin(), local.scope.end(), l.var) - local.scope.begin();
                    return (values[at] == l.value) != l.negated;
                });
                local.table.push_back(holds ? *value : Rational(0));
            }
            terms.push_back(std::move(local));
        }
        if (!decl.default_value) {
            error(decl.pos, "utility has no default; add 'default = <value>'", "");
            return std::nullopt;
        }
        auto baseline = amount(*decl.default_value, decl.pos);
        if (!baseline || !ok) return std::nullopt;
        return UtilityFunction::factored(signature_, std::move(terms), *baseline);
    }

    std::map<VarId, std::vector<ValueIndex>> build_reference() {
        std::map<VarId, std::vector<ValueIndex>> out;
        for (const auto& r : doc_.reference) {
            auto id = var(r.decision, r.pos);
            if (!id) continue;
            if ((*signature_)[*id].kind != VarKind::decision) {
                error(r.pos, "'" + r.decision + "' is not a decision", r.decision);
                continue;
            }
            std::vector<ValueIndex> values;
            for (const auto& text : r.values) {
                if (auto v = value(*id, text, r.pos)) values.push_back(*v);
            }
            out[*id] = std::move(values);
        }
        return out;
    }

    std::optional<OutcomeSpec> outcome(const std::vector<LiteralDecl>& lits) {
        OutcomeSpec spec;
        for (const auto& lit : lits) {
            auto id = var(lit.name, lit.pos);
            if (!id) return std::nullopt;
            auto v = value(*id, lit.value, lit.pos);
            if (!v) return std::nullopt;
            if ((*signature_)[*id].kind != VarKind::endogenous) {
                error(lit.pos, "'" + lit.name + "' cannot be used as an outcome", lit.name);
                return std::nullopt;
            }
            if (std::find(spec.variables.begin(), spec.variables.end(), *id) != spec.variables.end()) {
                error(lit.pos, "'" + lit.name + "' appears twice in one outcome", lit.name);
                return std::nullopt;
            }
            spec.variables.push_back(*id);
            spec.values.push_back(*v);
        }
        return spec;
    }

    std::optional<ActionChoice> action(const QueryDecl& q) {
        ActionChoice choice;
        for (const auto& lit : q.action) {
            auto id = var(lit.name, lit.pos);
            if (!id) return std::nullopt;
            auto v = value(*id, lit.value, lit.pos);
            if (!v) return std::nullopt;
            if ((*signature_)[*id].kind != VarKind::decision) {
                error(lit.pos, "'" + lit.name + "' is not a decision", lit.name);
                return std::nullopt;
            }
            choice.values[*id] = *v;
        }
        for (VarId d : signature_->of_kind(VarKind::decision)) {
            if (!choice.values.contains(d)) {
                error(q.pos, "query does not fix decision '" + (*signature_)[d].name + "'", (*signature_)[d].name);
                return std::nullopt;
            }
        }
        return choice;
    }

    std::vector<ResolvedQuery> build_queries() {
        std::vector<ResolvedQuery> out;
        for (const auto& q : doc_.queries) {
            ResolvedQuery r{q, {}, {}, {}, {}};
            if (q.kind == QueryKind::kglt || q.kind == QueryKind::kglt_oblique) {
                // Resolved against the diagram at audit time.
                out.push_back(std::move(r));
                continue;
            }
            auto a = action(q);
            if (!a) continue;
            r.action = std::move(*a);
            if (q.kind == QueryKind::affect) {
                std::set<VarId> vars;
                bool ok = true;
                for (const auto& name : q.variables) {
                    auto id = var(name, q.pos);
                    if (!id) {
                        ok = false;
                        break;
                    }
                    if ((*signature_)[*id].kind != VarKind::endogenous) {
                        error(q.pos, "'" + name + "' cannot be used as an outcome", name);
                        ok = false;
                        break;
                    }
                    vars.insert(*id);
                }
                if (!ok) continue;
                r.variables.assign(vars.begin(), vars.end());
                out.push_back(std::move(r));
                continue;
            }
            auto o = outcome(q.outcome);
            if (!o) continue;
            r.outcome = std::move(*o);
            if (q.kind == QueryKind::oblique) {
                auto g = outcome(q.given);
                if (!g) continue;
                for (VarId v : r.outcome.variables) {
                    if (std::find(g->variables.begin(), g->variables.end(), v) != g->variables.end()) {
                        error(q.pos, "side effect and direct outcome share '" + (*signature_)[v].name + "'",
                              (*signature_)[v].name);
                        o.reset();
                        break;
                    }
                }
                if (!o) continue;
                r.given = std::move(*g);
            }
            out.push_back(std::move(r));
        }
        return out;
    }

    const ModelDocument& doc_;
    const ParameterOverrides& overrides_;
    std::vector<std::pair<std::string, Rational>> parameters_;
    std::shared_ptr<const Signature> signature_;
    std::map<VarId, SourcePos> equation_pos_;
    std::vector<ParseDiagnostic> diagnostics_;
};

std::string fresh_name(const ModelDocument& doc, std::string name) {
    while (doc.variable(name)) name += "_";
    return name;
}

}  // namespace

ReferenceSet ScmProgram::reference_for(const ActionChoice& action) const {
    const auto& sig = signature();
    std::vector<VarId> decisions;
    std::vector<std::vector<ValueIndex>> ranges;
    for (const auto& [d, chosen] : action.values) {
        decisions.push_back(d);
        std::vector<ValueIndex> range;
        if (auto it = reference.find(d); it != reference.end()) {
            range = it->second;
        } else if (reference.empty()) {
            for (ValueIndex v = 0; v < sig.domain_size(d); ++v) {
                if (v != chosen) range.push_back(v);
            }
        }
        if (range.empty()) range.push_back(chosen);
        ranges.push_back(std::move(range));
    }

    ReferenceSet ref;
    std::vector<std::size_t> digits(decisions.size(), 0);
    while (true) {
        ActionChoice alt;
        for (std::size_t i = 0; i < decisions.size(); ++i) alt.values[decisions[i]] = ranges[i][digits[i]];
        ref.alternatives.push_back(std::move(alt));
        std::size_t pos = decisions.size();
        while (pos > 0 && ++digits[pos - 1] == ranges[pos - 1].size()) digits[--pos] = 0;
        if (pos == 0) return ref;
    }
}

ScmLowering lower_to_scm(const ModelDocument& doc, const ParameterOverrides& overrides) {
    return Lowerer(doc, overrides).run();
}

InfluenceDiagram diagram_of(const ModelDocument& doc, const ScmProgram& program) {
    const auto& sig = program.signature();
    const auto& model = *program.model;
    std::vector<Node> nodes;
    for (VarId v = 0; v < sig.size(); ++v) {
        const auto& var = sig[v];
        Node node{var.name, NodeKind::chance, var.domain, {}, {}, {}, {}};
        switch (var.kind) {
            case VarKind::exogenous: node.distribution = {program.distributions.at(v)}; break;
            case VarKind::decision:
                node.kind = NodeKind::decision;
                for (const auto& name : doc.variable(var.name)->observes) node.parents.push_back(sig.id(name));
                break;
            case VarKind::endogenous: {
                const auto* eq = model.equation_for(v);
                node.parents = eq->parents;
                for (ValueIndex out : eq->table) {
                    std::vector<Rational> row(var.domain.size(), 0);
                    row[out] = 1;
                    node.distribution.push_back(std::move(row));
                }
                break;
            }
        }
        nodes.push_back(std::move(node));
    }

    const auto& utility = program.state.utility();
    if (utility.baseline() != 0) {
        nodes.push_back({fresh_name(doc, "U0"), NodeKind::utility, {}, {}, {}, {utility.baseline()}, {}});
    }
    std::size_t index = 1;
    for (const auto& term : utility.terms()) {
        nodes.push_back({fresh_name(doc, "U" + std::to_string(index++)), NodeKind::utility, {}, term.scope, {},
                         term.table, {}});
    }
    return to_howard_canonical_form(InfluenceDiagram(std::move(nodes)));
}

IdLowering lower_to_id(const ModelDocument& doc, const ParameterOverrides& overrides) {
    IdLowering out;
    auto scm = lower_to_scm(doc, overrides);
    out.diagnostics = std::move(scm.diagnostics);
    if (!scm.program) return out;
    try {
        out.diagram.emplace(diagram_of(doc, *scm.program));
    } catch (const ModelError& e) {
        out.diagnostics.push_back({Severity::error, 1, 1, e.what(), ""});
    }
    return out;
}

}  // namespace oblique::dsl
