// Acceptance report: one PASS/FAIL line per criterion. Exits 0 when the only
// failures are the ones listed in kKnownFailures.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "oblique/audit.hpp"
#include "oblique/dsl/lower.hpp"
#include "oblique/kglt.hpp"
#include "support/oracle.hpp"
#include "support/random_models.hpp"

using namespace oblique;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = OBLIQUE_SOURCE_DIR;

/// Claims that the chosen semantics cannot meet; see README.
const std::set<std::string> kKnownFailures = {"AC1.2", "AC1.3"};

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;
int unexpected = 0;

void report(const std::string& id, const std::string& claim, const Outcome& outcome, double seconds) {
    std::ostringstream line;
    line << (outcome.pass ? "PASS " : "FAIL ") << id << " " << claim;
    if (!outcome.detail.empty()) line << ": " << outcome.detail;
    line << " (" << std::fixed;
    line.precision(3);
    line << seconds << " s)";
    if (!outcome.pass) {
        ++failures;
        if (kKnownFailures.contains(id)) {
            line << " [known]";
        } else {
            ++unexpected;
        }
    } else if (kKnownFailures.contains(id)) {
        line << " [known failure now passes]";
        ++unexpected;
    }
    std::cout << line.str() << std::endl;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// Runs `body` and reports it; an exception counts as a failure.
double check(const std::string& id, const std::string& claim, const std::function<Outcome()>& body) {
    auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
        outcome = body();
    } catch (const std::exception& e) {
        outcome = {false, std::string("exception: ") + e.what()};
    }
    double elapsed = seconds_since(start);
    report(id, claim, outcome, elapsed);
    return elapsed;
}

void timing(const std::string& id, const std::string& claim, double elapsed, double limit) {
    std::ostringstream detail;
    detail << "took " << std::fixed;
    detail.precision(3);
    detail << elapsed << " s";
    report(id, claim, {elapsed < limit, detail.str()}, elapsed);
}

std::string read(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

dsl::ModelDocument scenario(const std::string& name) {
    auto r = dsl::parse(read(kRoot / "scenarios" / (name + ".im")));
    if (!r.ok()) throw std::runtime_error(name + ".im does not parse");
    return r.document;
}

dsl::ScmProgram program(const std::string& name) {
    auto r = dsl::lower_to_scm(scenario(name));
    if (!r.ok()) throw std::runtime_error(name + ".im does not lower");
    return std::move(*r.program);
}

std::string set_text(const Signature& sig, const VarSet& vars) {
    std::string out = "{";
    for (std::size_t i = 0; i < vars.size(); ++i) out += (i ? "," : "") + sig[vars[i]].name;
    return out + "}";
}

std::string sets_text(const Signature& sig, const std::vector<VarSet>& sets) {
    std::string out;
    for (const auto& s : sets) out += (out.empty() ? "" : " ") + set_text(sig, s);
    return out.empty() ? "none" : out;
}

VarSet vars(const Signature& sig, std::initializer_list<const char*> names) {
    VarSet out;
    for (const char* n : names) out.push_back(*sig.find(n));
    std::sort(out.begin(), out.end());
    return out;
}

void ac1() {
    double total = 0;
    auto p = program("plane");
    const auto& sig = p.signature();
    ActionChoice bomb{{{*sig.find("B"), 1}}};
    auto ref = p.reference_for(bomb);
    auto witness = vars(sig, {"I", "E", "P", "D"});

    total += check("AC1.1", "{I,E,P,D} satisfies the affect inequality for O={I}", [&]() -> Outcome {
        bool lib = affect_inequality_holds(p.state, bomb, ref, witness);
        bool brute = oracle::affect_inequality(p.state, bomb, ref, witness);
        return {lib && brute, ""};
    });
    total += check("AC1.2", "minimal intended-affect witness for O={I} is {I,E,P,D}", [&]() -> Outcome {
        auto r = intends_to_affect(p.state, bomb, ref, vars(sig, {"I"}));
        bool found = std::find(r.minimal_supersets.begin(), r.minimal_supersets.end(), witness) !=
                     r.minimal_supersets.end();
        return {found, "minimal supersets are " + sets_text(sig, r.minimal_supersets)};
    });
    total += check("AC1.3", "direct intent is exactly I=1", [&]() -> Outcome {
        std::vector<std::string> direct;
        for (VarId v : sig.of_kind(VarKind::endogenous)) {
            for (ValueIndex x = 0; x < sig.domain_size(v); ++x) {
                if (hkw_intends(p.state, bomb, ref, {{v}, {x}}).direct) direct.push_back(describe(sig, v, x));
            }
        }
        std::string text;
        for (const auto& d : direct) text += (text.empty() ? "" : ", ") + d;
        return {direct == std::vector<std::string>{"I=1"}, "direct outcomes are " + text};
    });
    total += check("AC1.4", "I=1 directly intended, D=1 not directly intended", [&]() -> Outcome {
        VarId i = *sig.find("I"), d = *sig.find("D");
        bool i_direct = hkw_intends(p.state, bomb, ref, {{i}, {1}}).direct;
        auto dv = hkw_intends(p.state, bomb, ref, {{d}, {1}});
        std::string failed;
        for (auto c : dv.failed_conditions) {
            failed += std::string(failed.empty() ? "" : ", ") +
                      (c == HkwCondition::affect ? "a" : c == HkwCondition::can_cause ? "b" : "c");
        }
        return {i_direct && !dv.direct,
                "D=1 fails condition" + std::string(dv.failed_conditions.size() > 1 ? "s " : " ") + failed};
    });
    timing("AC1.5", "runtime < 1 s", total, 1.0);
}

void ac2() {
    double total = 0;
    auto p = program("unreliable");
    const auto& sig = p.signature();
    ActionChoice bomb{{{*sig.find("B"), 1}}};
    OutcomeSpec direct{{*sig.find("I")}, {1}};
    OutcomeSpec side{{*sig.find("D")}, {1}};
    std::vector<Rational> grid;
    for (int n : {1, 2, 3, 10, 100, 500, 900, 950, 990, 999}) grid.push_back(Rational(n, 1000));
    grid.push_back(Rational(1, 1000000));
    grid.push_back(Rational(999999, 1000000));

    total += check("AC2.1", "clause (a) achieves exactly 3/200", [&]() -> Outcome {
        auto r = scm_oblique_intends(p.state, bomb, direct, side, Confidence(Rational(19, 20)));
        auto o = oracle::oblique_clauses(p.state, bomb, direct, side);
        return {r.unconditional == Rational(3, 200) && o.unconditional == Rational(3, 200),
                "achieved " + to_string(r.unconditional)};
    });
    total += check("AC2.2", "clause (b) holds with achieved exactly 1 for every C on a grid in (0,1)", [&]() -> Outcome {
        for (const auto& c : grid) {
            auto r = scm_oblique_intends(p.state, bomb, direct, side, Confidence(c));
            if (!r.holds || !r.conditional || *r.conditional != 1 || !(*r.conditional > c)) {
                return {false, "fails at C=" + to_string(c)};
            }
        }
        auto o = oracle::oblique_clauses(p.state, bomb, direct, side);
        return {o.conditional == Rational(1), std::to_string(grid.size()) + " thresholds"};
    });
    total += check("AC2.3", "at C=19/20 clause (a) fails and the verdict is clause (b)", [&]() -> Outcome {
        auto r = scm_oblique_intends(p.state, bomb, direct, side, Confidence(Rational(19, 20)));
        return {r.holds && r.clause == ObliqueClause::conditional && !(r.unconditional > Rational(19, 20)), ""};
    });
    timing("AC2.4", "runtime < 1 s", total, 1.0);
}

void ac3() {
    double total = 0;
    auto doc = scenario("plane");
    for (int k : {-1, -10, -50, -90}) {
        total += check("AC3." + std::to_string(k), "KGLT intended set is {B=1,P=1,E=1,I=1} at k=" + std::to_string(k),
                       [&]() -> Outcome {
                           auto id = dsl::lower_to_id(doc, {{"k", k}});
                           if (!id.ok()) return {false, "lowering failed"};
                           auto r = kglt_intent(*id.diagram);
                           std::vector<std::string> names;
                           for (const auto& nv : r.intended) {
                               names.push_back(r.diagram.node(nv.node).name + "=" +
                                               r.diagram.node(nv.node).domain[nv.value]);
                           }
                           std::string text;
                           for (const auto& n : names) text += (text.empty() ? "" : ", ") + n;
                           bool death = std::find(names.begin(), names.end(), "D=1") != names.end();
                           return {names == std::vector<std::string>{"B=1", "P=1", "E=1", "I=1"} && !death, text};
                       });
    }
    timing("AC3.time", "runtime < 5 s", total, 5.0);
}

void ac4() {
    double total = 0;
    auto p = program("two_policies");
    const auto& sig = p.signature();
    ActionChoice bomb{{{*sig.find("B"), 1}}};
    auto ref = p.reference_for(bomb);
    VarId i1 = *sig.find("I1"), i2 = *sig.find("I2");

    total += check("AC4.1", "neither single payout is HKW-intended", [&]() -> Outcome {
        bool a = hkw_intends(p.state, bomb, ref, {{i1}, {1}}).direct;
        bool b = hkw_intends(p.state, bomb, ref, {{i2}, {1}}).direct;
        bool oa = oracle::affect_inequality(p.state, bomb, ref, {i1});
        bool ob = oracle::affect_inequality(p.state, bomb, ref, {i2});
        return {!a && !b && !oa && !ob, ""};
    });
    total += check("AC4.2", "the pair {I1,I2} is intended-to-affect", [&]() -> Outcome {
        VarSet pair{std::min(i1, i2), std::max(i1, i2)};
        auto r = intends_to_affect(p.state, bomb, ref, pair);
        return {r.intends && oracle::affect_inequality(p.state, bomb, ref, pair), ""};
    });
    total += check("AC4.3", "minimal supersets agree with brute-force subset enumeration", [&]() -> Outcome {
        for (const VarSet& target : {VarSet{i1}, VarSet{i2}, VarSet{std::min(i1, i2), std::max(i1, i2)}}) {
            auto expected = oracle::minimal_supersets(p.state, bomb, ref, target);
            auto actual = intends_to_affect(p.state, bomb, ref, target).minimal_supersets;
            std::sort(expected.begin(), expected.end());
            std::sort(actual.begin(), actual.end());
            if (expected != actual) return {false, "differs for " + set_text(sig, target)};
        }
        return {true, ""};
    });
    timing("AC4.4", "runtime < 5 s", total, 5.0);
}

void ac5() {
    double total = 0;
    std::mt19937 rng(20240611);

    total += check("AC5.1", "intervention fixpoint, idempotence and composition on 200 random models", [&]() -> Outcome {
        for (int n = 0; n < 200; ++n) {
            auto m = gen::scm(rng);
            const auto& sig = m.model->signature();
            if (m.endogenous.size() > 6 || m.exogenous.size() > 4) return {false, "generator out of range"};
            Intervention left, right;
            for (VarId v : m.endogenous) {
                int side = std::uniform_int_distribution<int>(0, 2)(rng);
                ValueIndex x = std::uniform_int_distribution<int>(0, 1)(rng);
                if (side == 1) left.targets[v] = x;
                if (side == 2) right.targets[v] = x;
            }
            auto once = intervene(*m.model, left);
            auto twice = intervene(once, left);
            auto lr = intervene(once, right);
            auto rl = intervene(intervene(*m.model, right), left);
            for (const auto& ctx : oracle::all_contexts(sig)) {
                for (const auto& a : oracle::all_actions(sig)) {
                    auto w = solve(once, ctx, a);
                    for (const auto& [v, x] : left.targets) {
                        if (w[v] != x) return {false, "fixpoint fails on model " + std::to_string(n)};
                    }
                    if (w != solve(twice, ctx, a)) return {false, "idempotence fails on model " + std::to_string(n)};
                    if (solve(lr, ctx, a) != solve(rl, ctx, a)) {
                        return {false, "composition fails on model " + std::to_string(n)};
                    }
                    if (w != oracle::brute_solve(*m.model, ctx, a, left)) {
                        return {false, "oracle disagrees on model " + std::to_string(n)};
                    }
                }
            }
        }
        return {true, ""};
    });

    total += check("AC5.2", "HCF preserves EU and marginals for every deterministic policy on 100 random diagrams",
                   [&]() -> Outcome {
                       EnumerationLimits wide{20, std::size_t{1} << 24};
                       std::size_t policies = 0;
                       for (int n = 0; n < 100; ++n) {
                           auto id = gen::diagram(rng);
                           auto hcf = to_howard_canonical_form(id);
                           for (const auto& policy : oracle::all_policies(id)) {
                               ++policies;
                               Policy mapped;
                               for (const auto& [d, rows] : policy.rules) mapped.rules[hcf.id(id.node(d).name)] = rows;
                               if (expected_utility(hcf, mapped, wide) != expected_utility(id, policy)) {
                                   return {false, "EU differs on diagram " + std::to_string(n)};
                               }
                               for (NodeId v = 0; v < id.size(); ++v) {
                                   if (id.node(v).kind == NodeKind::utility) continue;
                                   NodeId w = hcf.id(id.node(v).name);
                                   for (ValueIndex x = 0; x < id.node(v).domain.size(); ++x) {
                                       if (marginal(hcf, mapped, w, x, wide) != marginal(id, policy, v, x)) {
                                           return {false, "marginal differs on diagram " + std::to_string(n)};
                                       }
                                   }
                               }
                           }
                       }
                       return {true, std::to_string(policies) + " policies"};
                   });

    total += check("AC5.3", "oblique verdicts are monotone in C (both frameworks)", [&]() -> Outcome {
        std::vector<Rational> grid;
        for (int c = 1; c < 20; ++c) grid.push_back(Rational(c, 20));
        for (int n = 0; n < 100; ++n) {
            auto m = gen::scm(rng);
            if (m.endogenous.size() < 2) continue;
            auto state = gen::state(rng, m);
            ActionChoice a;
            for (VarId d : m.decisions) a.values[d] = 1;
            OutcomeSpec direct{{m.endogenous[0]}, {1}};
            OutcomeSpec side{{m.endogenous[1]}, {ValueIndex(rng() % 2)}};
            bool seen_false = false;
            for (const auto& c : grid) {
                bool holds = scm_oblique_intends(state, a, direct, side, Confidence(c)).holds;
                if (holds && seen_false) return {false, "SCM verdict not monotone on model " + std::to_string(n)};
                seen_false |= !holds;
            }
        }
        for (int n = 0; n < 100; ++n) {
            auto id = gen::diagram(rng);
            auto policy = optimal_policy(id);
            const auto& order = id.topological_order();
            auto last = *std::find_if(order.rbegin(), order.rend(),
                                      [&](NodeId v) { return id.node(v).kind == NodeKind::chance; });
            bool seen_false = false;
            for (const auto& c : grid) {
                bool holds = id_oblique_intent(id, policy, last, 0, Confidence(c), {}).holds;
                if (holds && seen_false) return {false, "ID verdict not monotone on diagram " + std::to_string(n)};
                seen_false |= !holds;
            }
        }
        return {true, ""};
    });

    total += check("AC5.4", "probability computations match full-joint enumeration", [&]() -> Outcome {
        for (int n = 0; n < 100; ++n) {
            auto id = gen::diagram(rng);
            for (const auto& policy : oracle::all_policies(id)) {
                if (expected_utility(id, policy) != oracle::expected_utility(id, policy)) {
                    return {false, "EU differs on diagram " + std::to_string(n)};
                }
                for (NodeId v = 0; v < id.size(); ++v) {
                    if (id.node(v).kind == NodeKind::utility) continue;
                    for (ValueIndex x = 0; x < id.node(v).domain.size(); ++x) {
                        if (marginal(id, policy, v, x) != oracle::marginal(id, policy, v, x)) {
                            return {false, "marginal differs on diagram " + std::to_string(n)};
                        }
                    }
                }
            }
        }
        for (int n = 0; n < 100; ++n) {
            auto m = gen::scm(rng);
            if (m.endogenous.size() < 2) continue;
            auto state = gen::state(rng, m);
            ActionChoice a;
            for (VarId d : m.decisions) a.values[d] = 1;
            OutcomeSpec direct{{m.endogenous[0]}, {1}};
            OutcomeSpec side{{m.endogenous[1]}, {1}};
            auto r = scm_oblique_intends(state, a, direct, side, Confidence(Rational(1, 2)));
            auto o = oracle::oblique_clauses(state, a, direct, side);
            if (r.unconditional != o.unconditional || r.conditional != o.conditional) {
                return {false, "oblique clauses differ on model " + std::to_string(n)};
            }
        }
        return {true, ""};
    });
    timing("AC5.5", "property suites < 120 s", total, 120.0);
}

std::string diagnostics_of(const std::string& text) {
    auto parsed = dsl::parse(text);
    auto diags = parsed.diagnostics;
    if (parsed.ok()) diags = dsl::lower_to_id(parsed.document).diagnostics;
    if (diags.empty()) return "ok\n";
    std::string out;
    for (const auto& d : diags) out += dsl::format(d) + "\n";
    return out;
}

void ac6() {
    std::vector<fs::path> corpus;
    for (const auto& e : fs::directory_iterator(kRoot / "tests" / "corpus")) {
        if (e.path().extension() == ".im") corpus.push_back(e.path());
    }
    std::sort(corpus.begin(), corpus.end());

    check("AC6.1", "25+ corpus files, valid and invalid, match their golden diagnostics", [&]() -> Outcome {
        std::size_t valid = 0, invalid = 0;
        for (const auto& path : corpus) {
            auto golden = path;
            golden.replace_extension(".diag");
            std::string actual = diagnostics_of(read(path));
            if (actual != read(golden)) return {false, path.filename().string() + " differs from its golden"};
            (actual == "ok\n" ? valid : invalid)++;
        }
        return {corpus.size() >= 25 && valid > 0 && invalid > 0,
                std::to_string(valid) + " valid, " + std::to_string(invalid) + " invalid"};
    });
    check("AC6.2", "parse after serialize is the identity", [&]() -> Outcome {
        std::vector<fs::path> models;
        for (const auto& path : corpus) {
            if (path.filename().string().starts_with("valid_")) models.push_back(path);
        }
        for (const auto& e : fs::directory_iterator(kRoot / "scenarios")) models.push_back(e.path());
        for (const auto& path : models) {
            auto doc = dsl::parse(read(path)).document;
            auto again = dsl::parse(dsl::serialize(doc));
            if (!again.ok() || !(again.document == doc) || dsl::serialize(again.document) != dsl::serialize(doc)) {
                return {false, path.filename().string()};
            }
        }
        return {true, std::to_string(models.size()) + " models"};
    });
    check("AC6.3", "audit reports are byte-identical across two consecutive runs", [&]() -> Outcome {
        std::size_t n = 0;
        for (const auto& e : fs::directory_iterator(kRoot / "scenarios")) {
            auto doc = dsl::parse(read(e.path())).document;
            AuditOptions opts;
            opts.source = e.path().filename().string();
            if (run_audit(doc, opts).dump(2) != run_audit(doc, opts).dump(2)) return {false, opts.source};
            auto golden = kRoot / "tests" / "golden" / (e.path().stem().string() + ".json");
            if (run_audit(doc, opts).dump(2) + "\n" != read(golden)) return {false, opts.source + " differs from golden"};
            ++n;
        }
        return {true, std::to_string(n) + " scenarios"};
    });
}

}  // namespace

int main() {
    ac1();
    ac2();
    ac3();
    ac4();
    ac5();
    ac6();
    std::cout << failures << " failed, " << unexpected << " unexpected" << std::endl;
    return unexpected == 0 ? 0 : 1;
}
