#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "oblique/audit.hpp"
#include "oblique/dsl/lower.hpp"

namespace {

using namespace oblique;

enum Exit { ok = 0, semantic = 1, usage = 2, guard = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in || std::filesystem::is_directory(path)) throw UsageError("cannot read '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

void print(const std::string& path, const std::vector<dsl::ParseDiagnostic>& diagnostics) {
    for (const auto& d : diagnostics) std::cerr << path << ":" << dsl::format(d) << "\n";
}

/// Parses the file; prints diagnostics and returns nullopt on errors.
std::optional<dsl::ModelDocument> load(const std::string& path) {
    auto parsed = dsl::parse(read_file(path));
    print(path, parsed.diagnostics);
    if (!parsed.ok()) return std::nullopt;
    return std::move(parsed.document);
}

std::pair<std::string, std::string> split_pair(const std::string& text, const char* flag) {
    auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError(std::string(flag) + ": expected NAME=VALUE, got '" + text + "'");
    return {text.substr(0, eq), text.substr(eq + 1)};
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    for (std::string item; std::getline(in, item, ',');) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

Rational rational_arg(const std::string& text, const char* flag) {
    auto value = parse_rational(text);
    if (!value) throw UsageError(std::string(flag) + ": '" + text + "' is not a rational");
    return *value;
}

Assignment assignment(const Signature& sig, const std::vector<std::string>& items, const char* flag) {
    Assignment out;
    for (const auto& item : items) {
        for (const auto& part : split_list(item)) {
            auto [name, text] = split_pair(part, flag);
            auto var = sig.find(name);
            if (!var) throw UsageError(std::string(flag) + ": unknown variable '" + name + "'");
            auto value = sig.find_value(*var, text);
            if (!value) throw UsageError(std::string(flag) + ": '" + text + "' is not a value of '" + name + "'");
            out[*var] = *value;
        }
    }
    return out;
}

int cmd_check(const std::string& path) {
    auto doc = load(path);
    if (!doc) return semantic;
    auto lowered = dsl::lower_to_id(*doc);
    print(path, lowered.diagnostics);
    if (!lowered.ok()) return semantic;
    std::cout << path << ": ok\n";
    return ok;
}

int cmd_solve(const std::string& path, const std::vector<std::string>& context, const std::vector<std::string>& action,
              const std::vector<std::string>& interventions) {
    auto doc = load(path);
    if (!doc) return semantic;
    auto lowered = dsl::lower_to_scm(*doc);
    print(path, lowered.diagnostics);
    if (!lowered.ok()) return semantic;
    const auto& program = *lowered.program;
    const auto& sig = program.signature();

    Assignment ctx = assignment(sig, context, "--context");
    for (const auto& [var, value] : ctx) {
        if (sig[var].kind != VarKind::exogenous) throw UsageError("--context: '" + sig[var].name + "' is not exogenous");
    }
    ActionChoice choice{assignment(sig, action, "--action")};
    for (VarId d : sig.of_kind(VarKind::decision)) {
        if (!choice.values.contains(d)) throw UsageError("--action: no value for decision '" + sig[d].name + "'");
    }
    for (const auto& [var, value] : choice.values) {
        if (sig[var].kind != VarKind::decision) throw UsageError("--action: '" + sig[var].name + "' is not a decision");
    }
    Intervention iv{assignment(sig, interventions, "--do")};
    auto model = intervene(*program.model, iv);

    // A full context is solved as given; otherwise every possible setting
    // that agrees with the given values is listed.
    const bool full = ctx.size() == sig.of_kind(VarKind::exogenous).size();
    bool any = false;
    for (const auto& ws : program.state.settings()) {
        const auto& c = ws.setting.context.values;
        bool matches = std::all_of(ctx.begin(), ctx.end(), [&](const auto& kv) { return c.at(kv.first) == kv.second; });
        if (!matches || (!full && ws.probability == 0)) continue;
        World world = solve(model, ws.setting.context, choice);
        if (!sig.of_kind(VarKind::exogenous).empty()) {
            std::string head = "context";
            for (const auto& [var, value] : c) head += " " + describe(sig, var, value);
            std::cout << head << " (probability " << to_string(ws.probability) << ")\n";
        }
        std::string line;
        for (VarId v = 0; v < sig.size(); ++v) {
            if (sig[v].kind == VarKind::exogenous) continue;
            if (!line.empty()) line += " ";
            line += describe(sig, v, world[v]);
        }
        std::cout << line << "\n";
        any = true;
    }
    if (!any) std::cout << "no possible setting matches the given context\n";
    return ok;
}

struct AuditArgs {
    std::string path;
    std::string framework = "both";
    std::string confidence;
    std::vector<std::string> refs;
    std::vector<std::string> params;
    bool json = false;
    bool text = false;
    bool timing = false;
    bool strict = false;
};

int cmd_audit(const AuditArgs& args) {
    auto doc = load(args.path);
    if (!doc) return semantic;
    AuditOptions options;
    options.framework = args.framework == "hkw" ? Framework::hkw : args.framework == "kglt" ? Framework::kglt : Framework::both;
    if (!args.confidence.empty()) options.confidence = rational_arg(args.confidence, "--confidence");
    if (options.confidence <= 0 || options.confidence >= 1) throw UsageError("--confidence must lie strictly between 0 and 1");
    for (const auto& r : args.refs) {
        auto [name, values] = split_pair(r, "--ref");
        const auto* var = doc->variable(name);
        if (!var || var->kind != VarKind::decision) throw UsageError("--ref: '" + name + "' is not a decision");
        for (const auto& v : split_list(values)) {
            if (std::find(var->domain.begin(), var->domain.end(), v) == var->domain.end()) {
                throw UsageError("--ref: '" + v + "' is not a value of '" + name + "'");
            }
        }
        options.reference[name] = split_list(values);
    }
    for (const auto& p : args.params) {
        auto [name, value] = split_pair(p, "--param");
        options.parameters[name] = rational_arg(value, "--param");
    }
    options.source = std::filesystem::path(args.path).filename().string();
    options.timing = args.timing;
    options.kglt.strict_policy_match = args.strict;
    options.kglt.limits = EnumerationLimits::from_environment();

    try {
        auto report = run_audit(*doc, options);
        if (args.text) {
            std::cout << render_text(report);
        } else {
            std::cout << report.dump(2) << "\n";
        }
    } catch (const AuditError& e) {
        print(args.path, e.diagnostics());
        std::cerr << args.path << ": error: " << e.what() << "\n";
        return semantic;
    }
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Direct and oblique intent audits for discrete causal models"};
    app.require_subcommand(1);

    std::string check_path;
    auto* check = app.add_subcommand("check", "Parse and validate a model");
    check->add_option("model", check_path, "Model file (.im)")->required();

    std::string solve_path;
    std::vector<std::string> context, action, interventions;
    auto* solve_cmd = app.add_subcommand("solve", "Solve the model under a context and action");
    solve_cmd->add_option("model", solve_path, "Model file (.im)")->required();
    solve_cmd->add_option("--context", context, "Exogenous values, e.g. u_E=1,u_I=1");
    solve_cmd->add_option("--action", action, "Decision values, e.g. B=1")->required();
    solve_cmd->add_option("--do", interventions, "Interventions on endogenous variables, e.g. E=1");

    AuditArgs audit_args;
    auto* audit = app.add_subcommand("audit", "Run the intent audit");
    audit->add_option("model", audit_args.path, "Model file (.im)")->required();
    audit->add_option("--framework", audit_args.framework, "hkw, kglt or both")
        ->check(CLI::IsMember({"hkw", "kglt", "both"}));
    audit->add_option("--confidence", audit_args.confidence, "Oblique-intent threshold C as p/q (default 19/20)");
    audit->add_option("--ref", audit_args.refs, "Reference values of a decision, e.g. B=0 or B=0,2");
    audit->add_option("--param", audit_args.params, "Parameter override, e.g. k=-10");
    auto* json_flag = audit->add_flag("--json", audit_args.json, "JSON report (default)");
    audit->add_flag("--text", audit_args.text, "Text report")->excludes(json_flag);
    audit->add_flag("--timing", audit_args.timing, "Include wall-clock timings");
    audit->add_flag("--strict-policy-match", audit_args.strict,
                    "KGLT chance nodes: compare canonical optimal policies instead of expected utilities");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (*check) return cmd_check(check_path);
        if (*solve_cmd) return cmd_solve(solve_path, context, action, interventions);
        if (*audit) return cmd_audit(audit_args);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const ResourceLimitExceeded& e) {
        std::cerr << "error: size guard exceeded: " << e.what()
                  << " (raise OBLIQUE_MAX_POLICIES / OBLIQUE_MAX_REALIZATIONS)\n";
        return guard;
    } catch (const ModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return semantic;
    }
    return usage;
}
