#include "oblique/audit.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <set>

namespace oblique {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string outcome_text(const Signature& sig, const OutcomeSpec& spec) {
    std::vector<std::string> parts;
    for (std::size_t i = 0; i < spec.variables.size(); ++i) parts.push_back(describe(sig, spec.variables[i], spec.values[i]));
    return join(parts, " & ");
}

std::string action_text(const Signature& sig, const ActionChoice& action) {
    std::vector<std::string> parts;
    for (const auto& [var, value] : action.values) parts.push_back(describe(sig, var, value));
    return join(parts, ", ");
}

std::string set_text(const Signature& sig, const VarSet& vars) {
    std::vector<std::string> names;
    for (VarId v : vars) names.push_back(sig[v].name);
    return "{" + join(names, ",") + "}";
}

const char* letter(HkwCondition c) {
    switch (c) {
        case HkwCondition::affect: return "a";
        case HkwCondition::can_cause: return "b";
        case HkwCondition::best_outcome: return "c";
    }
    return "";
}

json verdict_json(const Signature& sig, const IntentVerdict& v) {
    json sets = json::array();
    for (const auto& s : v.intended_affect_sets) sets.push_back(set_text(sig, s));
    std::string name = outcome_text(sig, v.outcome);
    json out;
    out["outcome"] = name;
    out["action"] = action_text(sig, v.action);
    out["direct"] = v.direct;
    out["failed_condition"] = v.failed ? json(letter(*v.failed)) : json(nullptr);
    std::vector<std::string> failed;
    for (auto c : v.failed_conditions) failed.push_back(letter(c));
    out["failed_conditions"] = failed;
    out["intended_affect_sets"] = std::move(sets);
    out["default_decisions"] = action_text(sig, v.default_decisions);
    out["summary"] = v.direct ? name + ": directly intends"
                              : name + ": not direct (fails condition" + (failed.size() > 1 ? "s " : " ") +
                                    join(failed, ", ") + ")";
    return out;
}

json oblique_json(const Signature& sig, const OutcomeSpec& side, const OutcomeSpec& given, const ObliqueResult& r) {
    std::string name = outcome_text(sig, side);
    json out;
    out["outcome"] = name;
    out["given"] = outcome_text(sig, given);
    out["holds"] = r.holds;
    out["clause"] = r.clause ? json(*r.clause == ObliqueClause::unconditional ? "a" : "b") : json(nullptr);
    out["achieved"] = to_string(r.achieved());
    out["clause_a"] = to_string(r.unconditional);
    out["clause_b"] = r.conditional ? json(to_string(*r.conditional)) : json(nullptr);
    std::string b = r.conditional ? to_string(*r.conditional) : "n/a";
    if (!r.holds) {
        out["summary"] = name + ": not oblique (clause a " + to_string(r.unconditional) + ", clause b " + b + ")";
    } else if (*r.clause == ObliqueClause::unconditional) {
        out["summary"] = name + ": oblique (clause a, " + to_string(r.unconditional) + ")";
    } else {
        out["summary"] = name + ": oblique (clause b, " + b + "); clause a achieved " + to_string(r.unconditional);
    }
    return out;
}

bool positive_somewhere(const EpistemicState& state, const ActionChoice& action, VarId var, ValueIndex value) {
    for (const auto& ws : state.settings()) {
        if (ws.probability > 0 && solve(*ws.setting.model, ws.setting.context, action)[var] == value) return true;
    }
    return false;
}

std::vector<ActionChoice> all_actions(const Signature& sig) {
    auto decisions = sig.of_kind(VarKind::decision);
    std::vector<ActionChoice> out;
    std::vector<ValueIndex> digits(decisions.size(), 0);
    while (true) {
        ActionChoice a;
        for (std::size_t i = 0; i < decisions.size(); ++i) a.values[decisions[i]] = digits[i];
        out.push_back(std::move(a));
        std::size_t pos = decisions.size();
        while (pos > 0 && ++digits[pos - 1] == sig.domain_size(decisions[pos - 1])) digits[--pos] = 0;
        if (pos == 0) return out;
    }
}

json scan(const dsl::ScmProgram& program, const ActionChoice& action, const Confidence& confidence) {
    const auto& sig = program.signature();
    const auto& state = program.state;
    ReferenceSet ref = program.reference_for(action);

    json alternatives = json::array();
    for (const auto& alt : ref.alternatives) alternatives.push_back(action_text(sig, alt));

    std::vector<OutcomeSpec> direct;
    std::set<VarId> direct_vars;
    json verdicts = json::array();
    for (VarId v : sig.of_kind(VarKind::endogenous)) {
        for (ValueIndex x = 0; x < sig.domain_size(v); ++x) {
            if (!positive_somewhere(state, action, v, x)) continue;
            OutcomeSpec spec{{v}, {x}};
            auto verdict = hkw_intends(state, action, ref, spec);
            if (verdict.direct) {
                direct.push_back(spec);
                direct_vars.insert(v);
            }
            verdicts.push_back(verdict_json(sig, verdict));
        }
    }

    json oblique = json::array();
    for (VarId v : sig.of_kind(VarKind::endogenous)) {
        if (direct.empty() || direct_vars.contains(v)) continue;
        for (ValueIndex y = 0; y < sig.domain_size(v); ++y) {
            if (!positive_somewhere(state, action, v, y)) continue;
            OutcomeSpec side{{v}, {y}};
            std::optional<std::pair<OutcomeSpec, ObliqueResult>> best;
            for (const auto& d : direct) {
                auto r = scm_oblique_intends(state, action, d, side, confidence);
                auto rank = [](const ObliqueResult& x) {
                    return std::make_pair(x.clause == ObliqueClause::unconditional ? 2 : x.holds ? 1 : 0,
                                          x.conditional.value_or(-1));
                };
                if (!best || rank(r) > rank(best->second)) best.emplace(d, std::move(r));
            }
            oblique.push_back(oblique_json(sig, side, best->first, best->second));
        }
    }

    json out;
    out["action"] = action_text(sig, action);
    out["reference"] = std::move(alternatives);
    out["direct"] = std::move(verdicts);
    out["oblique"] = std::move(oblique);
    return out;
}

json hkw_query(const dsl::ScmProgram& program, const dsl::ResolvedQuery& q, const Confidence& fallback) {
    const auto& sig = program.signature();
    const auto& state = program.state;
    ReferenceSet ref = program.reference_for(q.action);
    json out;
    out["query"] = dsl::render_query(q.decl);
    switch (q.decl.kind) {
        case dsl::QueryKind::intent: {
            auto verdict = hkw_intends(state, q.action, ref, q.outcome);
            Confidence c = q.decl.confidence ? Confidence(*q.decl.confidence) : fallback;
            if (verdict.direct) collect_oblique(state, verdict, c);
            json result = verdict_json(sig, verdict);
            json oblique = json::array();
            for (const auto& f : verdict.oblique) oblique.push_back(oblique_json(sig, f.side, q.outcome, f.result));
            result["oblique"] = std::move(oblique);
            out["result"] = std::move(result);
            break;
        }
        case dsl::QueryKind::affect: {
            auto affect = intends_to_affect(state, q.action, ref, q.variables);
            json sets = json::array();
            for (const auto& s : affect.minimal_supersets) sets.push_back(set_text(sig, s));
            std::string name = set_text(sig, q.variables);
            json result;
            result["variables"] = name;
            result["action"] = action_text(sig, q.action);
            result["intends"] = affect.intends;
            result["minimal_supersets"] = std::move(sets);
            result["summary"] = name + (affect.intends ? ": intends to affect" : ": does not intend to affect");
            out["result"] = std::move(result);
            break;
        }
        case dsl::QueryKind::oblique: {
            Confidence c = q.decl.confidence ? Confidence(*q.decl.confidence) : fallback;
            auto r = scm_oblique_intends(state, q.action, q.given, q.outcome, c);
            json result = oblique_json(sig, q.outcome, q.given, r);
            result["confidence"] = to_string(c.value());
            out["result"] = std::move(result);
            break;
        }
        default: break;
    }
    return out;
}

std::string node_value(const InfluenceDiagram& id, NodeId node, ValueIndex value) {
    return id.node(node).name + "=" + id.node(node).domain.at(value);
}

json policy_json(const InfluenceDiagram& id, const Policy& policy) {
    json out = json::array();
    for (const auto& [decision, rows] : policy.rules) {
        const auto& node = id.node(decision);
        json rules = json::array();
        for (std::size_t r = 0; r < rows.size(); ++r) {
            json given = json::object();
            std::size_t rest = r;
            std::vector<std::pair<std::string, std::string>> parents;
            for (std::size_t i = node.parents.size(); i-- > 0;) {
                const auto& parent = id.node(node.parents[i]);
                parents.emplace_back(parent.name, parent.domain[rest % parent.domain.size()]);
                rest /= parent.domain.size();
            }
            std::reverse(parents.begin(), parents.end());
            for (const auto& [name, value] : parents) given[name] = value;
            json dist = json::object();
            std::optional<ValueIndex> chosen;
            for (ValueIndex v = 0; v < rows[r].size(); ++v) {
                if (rows[r][v] == 1) chosen = v;
                if (rows[r][v] != 0) dist[node.domain[v]] = to_string(rows[r][v]);
            }
            json rule;
            rule["given"] = std::move(given);
            if (chosen) {
                rule["choose"] = node.domain[*chosen];
            } else {
                rule["distribution"] = std::move(dist);
            }
            rules.push_back(std::move(rule));
        }
        json entry;
        entry["decision"] = node.name;
        entry["rules"] = std::move(rules);
        out.push_back(std::move(entry));
    }
    return out;
}

json kglt_oblique_query(const InfluenceDiagram& id, const KgltResult& kglt, const dsl::ResolvedQuery& q,
                        const Confidence& fallback, const EnumerationLimits& limits) {
    auto resolve = [&](const dsl::LiteralDecl& lit) -> NodeValue {
        auto node = id.find(lit.name);
        if (!node || id.node(*node).kind == NodeKind::utility) {
            throw AuditError("kglt_oblique: unknown node '" + lit.name + "'");
        }
        const auto& domain = id.node(*node).domain;
        auto it = std::find(domain.begin(), domain.end(), lit.value);
        if (it == domain.end()) throw AuditError("kglt_oblique: '" + lit.value + "' is not a value of '" + lit.name + "'");
        return {*node, static_cast<ValueIndex>(it - domain.begin())};
    };

    NodeValue target = resolve(q.decl.outcome.at(0));
    Policy policy = kglt.policy;
    std::string policy_name = "optimal";
    if (!q.decl.action.empty()) {
        std::map<NodeId, ValueIndex> choice;
        for (const auto& lit : q.decl.action) {
            auto nv = resolve(lit);
            if (id.node(nv.node).kind != NodeKind::decision) throw AuditError("'" + lit.name + "' is not a decision");
            choice[nv.node] = nv.value;
        }
        for (NodeId d : id.decisions()) {
            if (!choice.contains(d)) throw AuditError("kglt_oblique: decision '" + id.node(d).name + "' is not fixed");
        }
        policy = Policy::constant(id, choice);
        std::vector<std::string> parts;
        for (const auto& [node, value] : choice) parts.push_back(node_value(id, node, value));
        policy_name = join(parts, ", ");
    }
    std::vector<NodeValue> intended = kglt.intended;
    if (!q.decl.given.empty()) intended = {resolve(q.decl.given.at(0))};

    Confidence c = q.decl.confidence ? Confidence(*q.decl.confidence) : fallback;
    std::string name = node_value(id, target.node, target.value);
    json set = json::array();
    for (const auto& nv : intended) set.push_back(node_value(id, nv.node, nv.value));

    json result;
    result["outcome"] = name;
    result["policy"] = policy_name;
    result["intended_set"] = std::move(set);
    result["confidence"] = to_string(c.value());
    if (std::find(intended.begin(), intended.end(), target) != intended.end()) {
        result["holds"] = false;
        result["clause"] = nullptr;
        result["summary"] = name + ": intended, not a side effect";
        json out;
        out["query"] = dsl::render_query(q.decl);
        out["result"] = std::move(result);
        return out;
    }
    auto r = id_oblique_intent(id, policy, target.node, target.value, c, intended, limits);
    result["holds"] = r.holds;
    result["clause"] = r.clause ? json(*r.clause == IdObliqueClause::marginal ? "1" : "2") : json(nullptr);
    result["achieved"] = to_string(r.achieved());
    result["marginal"] = to_string(r.marginal);
    result["conditional"] = r.conditional ? json(to_string(*r.conditional)) : json(nullptr);
    result["condition"] = r.condition ? json(node_value(id, r.condition->node, r.condition->value)) : json(nullptr);
    std::string cond = r.conditional ? to_string(*r.conditional) : "n/a";
    if (!r.holds) {
        result["summary"] = name + ": not oblique (clause 1 " + to_string(r.marginal) + ", clause 2 " + cond + ")";
    } else if (*r.clause == IdObliqueClause::marginal) {
        result["summary"] = name + ": oblique (clause 1, " + to_string(r.marginal) + ")";
    } else {
        result["summary"] = name + ": oblique (clause 2, " + cond + " given " +
                            node_value(id, r.condition->node, r.condition->value) + "); clause 1 achieved " +
                            to_string(r.marginal);
    }
    json out;
    out["query"] = dsl::render_query(q.decl);
    out["result"] = std::move(result);
    return out;
}

json kglt_block(const dsl::ModelDocument& doc, const dsl::ScmProgram& program, const AuditOptions& options) {
    InfluenceDiagram id = dsl::diagram_of(doc, program);
    auto result = kglt_intent(id, options.kglt);
    const auto& hcf = result.diagram;

    json foreseen_values = json::object();
    for (NodeId n : hcf.topological_order()) {
        if (hcf.node(n).kind != NodeKind::utility) foreseen_values[hcf.node(n).name] = hcf.node(n).domain[result.foreseen.outcome[n]];
    }
    json foreseen;
    foreseen["outcome"] = std::move(foreseen_values);
    foreseen["probability"] = to_string(result.foreseen.probability);
    foreseen["utility"] = to_string(result.foreseen.utility);
    foreseen["score"] = to_string(result.foreseen.score);

    json intended = json::array();
    for (const auto& nv : result.intended) intended.push_back(node_value(hcf, nv.node, nv.value));

    json trace = json::array();
    for (const auto& t : result.trace) {
        std::string name = node_value(hcf, t.node, t.foreseen);
        json entry;
        entry["node"] = hcf.node(t.node).name;
        entry["kind"] = hcf.node(t.node).kind == NodeKind::decision ? "decision" : "chance";
        entry["foreseen"] = hcf.node(t.node).domain[t.foreseen];
        entry["skipped"] = t.skipped;
        entry["intended"] = t.intended;
        if (!t.skipped) {
            entry["restricted_optimum"] = to_string(t.restricted_optimum);
            if (hcf.node(t.node).kind != NodeKind::decision) {
                entry["policy_in_restricted"] = to_string(t.policy_in_restricted);
            }
        }
        entry["summary"] = t.skipped ? name + ": skipped (single value)"
                                     : name + (t.intended ? ": intended" : ": not intended");
        trace.push_back(std::move(entry));
    }

    Confidence fallback(options.confidence);
    json queries = json::array();
    for (const auto& q : program.queries) {
        if (q.decl.kind == dsl::QueryKind::kglt) {
            json entry;
            entry["query"] = "kglt";
            json r;
            r["intended"] = intended;
            r["summary"] = "intended: " + (intended.empty() ? std::string("none") : [&] {
                std::vector<std::string> parts;
                for (const auto& s : intended) parts.push_back(s.get<std::string>());
                return join(parts, ", ");
            }());
            entry["result"] = std::move(r);
            queries.push_back(std::move(entry));
        } else if (q.decl.kind == dsl::QueryKind::kglt_oblique) {
            queries.push_back(kglt_oblique_query(hcf, result, q, fallback, options.kglt.limits));
        }
    }

    json out;
    out["nodes"] = hcf.size();
    out["policy"] = policy_json(hcf, result.policy);
    out["expected_utility"] = to_string(result.expected_utility);
    out["foreseen"] = std::move(foreseen);
    out["intended"] = std::move(intended);
    out["trace"] = std::move(trace);
    out["queries"] = std::move(queries);
    return out;
}

void apply_reference(dsl::ScmProgram& program, const std::map<std::string, std::vector<std::string>>& overrides) {
    const auto& sig = program.signature();
    for (const auto& [name, values] : overrides) {
        auto var = sig.find(name);
        if (!var || sig[*var].kind != VarKind::decision) throw AuditError("--ref: '" + name + "' is not a decision");
        std::vector<ValueIndex> ids;
        for (const auto& v : values) {
            auto id = sig.find_value(*var, v);
            if (!id) throw AuditError("--ref: '" + v + "' is not a value of '" + name + "'");
            ids.push_back(*id);
        }
        if (ids.empty()) throw AuditError("--ref: no values given for '" + name + "'");
        program.reference[*var] = std::move(ids);
    }
}

double millis(Clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); }

}  // namespace

std::string model_hash(const dsl::ModelDocument& doc) {
    std::string text = dsl::serialize(doc);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

json run_audit(const dsl::ModelDocument& doc, const AuditOptions& options) {
    auto lowered = dsl::lower_to_scm(doc, options.parameters);
    if (!lowered.program) throw AuditError("model does not lower", lowered.diagnostics);
    dsl::ScmProgram program = std::move(*lowered.program);
    apply_reference(program, options.reference);
    if (options.confidence <= 0 || options.confidence >= 1) throw AuditError("confidence must lie in (0, 1)");
    Confidence confidence(options.confidence);
    const auto& sig = program.signature();

    const bool hkw = options.framework != Framework::kglt;
    const bool kglt = options.framework != Framework::hkw;

    json report;
    report["format"] = "oblique-audit/1";
    report["source"] = options.source;
    report["model_sha256"] = model_hash(doc);
    json frameworks = json::array();
    if (hkw) frameworks.push_back("hkw");
    if (kglt) frameworks.push_back("kglt");
    report["frameworks"] = std::move(frameworks);

    json params;
    params["confidence"] = to_string(options.confidence);
    json reference = json::object();
    for (const auto& [var, values] : program.reference) {
        json list = json::array();
        for (ValueIndex v : values) list.push_back(sig[var].domain[v]);
        reference[sig[var].name] = std::move(list);
    }
    params["reference"] = std::move(reference);
    json values = json::object();
    for (const auto& [name, value] : program.parameters) values[name] = to_string(value);
    params["values"] = std::move(values);
    params["strict_policy_match"] = options.kglt.strict_policy_match;
    report["parameters"] = std::move(params);

    json timing;
    if (hkw) {
        auto start = Clock::now();
        std::vector<ActionChoice> actions;
        for (const auto& q : program.queries) {
            bool scm_query = q.decl.kind == dsl::QueryKind::intent || q.decl.kind == dsl::QueryKind::affect ||
                             q.decl.kind == dsl::QueryKind::oblique;
            if (scm_query && std::find(actions.begin(), actions.end(), q.action) == actions.end()) {
                actions.push_back(q.action);
            }
        }
        if (actions.empty()) actions = all_actions(sig);

        json scans = json::array();
        for (const auto& a : actions) scans.push_back(scan(program, a, confidence));
        json queries = json::array();
        for (const auto& q : program.queries) {
            if (q.decl.kind == dsl::QueryKind::kglt || q.decl.kind == dsl::QueryKind::kglt_oblique) continue;
            queries.push_back(hkw_query(program, q, confidence));
        }
        json block;
        block["scans"] = std::move(scans);
        block["queries"] = std::move(queries);
        report["hkw"] = std::move(block);
        timing["hkw_ms"] = millis(Clock::now() - start);
    }
    if (kglt) {
        auto start = Clock::now();
        try {
            report["kglt"] = kglt_block(doc, program, options);
        } catch (const ModelError& e) {
            throw AuditError(e.what());
        }
        timing["kglt_ms"] = millis(Clock::now() - start);
    }
    if (options.timing) report["timing"] = std::move(timing);
    return report;
}

std::string render_text(const json& report) {
    std::string out;
    auto line = [&](const std::string& text, int indent = 0) { out += std::string(indent * 2, ' ') + text + "\n"; };

    line("audit of " + report["source"].get<std::string>());
    line("model sha256: " + report["model_sha256"].get<std::string>());
    const auto& params = report["parameters"];
    line("confidence: " + params["confidence"].get<std::string>());
    std::vector<std::string> values;
    for (const auto& [name, value] : params["values"].items()) values.push_back(name + "=" + value.get<std::string>());
    if (!values.empty()) line("parameters: " + join(values, ", "));

    if (report.contains("hkw")) {
        const auto& hkw = report["hkw"];
        for (const auto& s : hkw["scans"]) {
            std::vector<std::string> ref;
            for (const auto& r : s["reference"]) ref.push_back(r.get<std::string>());
            line("");
            line("[hkw] under " + s["action"].get<std::string>() + " (reference " + join(ref, "; ") + ")");
            for (const auto& v : s["direct"]) line(v["summary"].get<std::string>(), 1);
            for (const auto& v : s["oblique"]) line(v["summary"].get<std::string>(), 1);
        }
        if (!hkw["queries"].empty()) {
            line("");
            line("[hkw] queries");
            for (const auto& q : hkw["queries"]) {
                line(q["query"].get<std::string>(), 1);
                const auto& r = q["result"];
                line(r["summary"].get<std::string>(), 2);
                if (r.contains("minimal_supersets") && !r["minimal_supersets"].empty()) {
                    std::vector<std::string> sets;
                    for (const auto& m : r["minimal_supersets"]) sets.push_back(m.get<std::string>());
                    line("minimal supersets: " + join(sets, " "), 2);
                }
                if (r.contains("intended_affect_sets") && !r["intended_affect_sets"].empty()) {
                    std::vector<std::string> sets;
                    for (const auto& m : r["intended_affect_sets"]) sets.push_back(m.get<std::string>());
                    line("minimal supersets: " + join(sets, " "), 2);
                }
                if (r.contains("oblique")) {
                    for (const auto& o : r["oblique"]) line(o["summary"].get<std::string>(), 2);
                }
            }
        }
    }

    if (report.contains("kglt")) {
        const auto& k = report["kglt"];
        line("");
        line("[kglt]");
        std::vector<std::string> rules;
        for (const auto& d : k["policy"]) {
            for (const auto& r : d["rules"]) {
                std::string rule = d["decision"].get<std::string>() + "=";
                rule += r.contains("choose") ? r["choose"].get<std::string>() : r["distribution"].dump();
                std::vector<std::string> given;
                for (const auto& [name, value] : r["given"].items()) given.push_back(name + "=" + value.get<std::string>());
                if (!given.empty()) rule += " if " + join(given, ", ");
                rules.push_back(rule);
            }
        }
        line("optimal policy: " + join(rules, "; "), 1);
        line("expected utility: " + k["expected_utility"].get<std::string>(), 1);
        std::vector<std::string> outcome;
        for (const auto& [name, value] : k["foreseen"]["outcome"].items()) outcome.push_back(name + "=" + value.get<std::string>());
        line("foreseen outcome: " + join(outcome, " ") + " (score " + k["foreseen"]["score"].get<std::string>() + ")",
             1);
        for (const auto& t : k["trace"]) line(t["summary"].get<std::string>(), 1);
        for (const auto& q : k["queries"]) {
            line(q["query"].get<std::string>(), 1);
            line(q["result"]["summary"].get<std::string>(), 2);
        }
    }

    if (report.contains("timing")) {
        line("");
        for (const auto& [name, value] : report["timing"].items()) line("timing " + name + ": " + value.dump());
    }
    return out;
}

}  // namespace oblique
