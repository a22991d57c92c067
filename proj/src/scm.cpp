#include "oblique/scm.hpp"

#include <algorithm>
#include <set>

namespace oblique {

Signature::Signature(std::vector<Variable> variables) : variables_(std::move(variables)) {
    for (VarId id = 0; id < variables_.size(); ++id) {
        const auto& var = variables_[id];
        if (var.name.empty()) throw ModelError("variable with empty name");
        if (var.domain.empty()) throw ModelError("variable '" + var.name + "' has an empty domain");
        std::set<std::string> seen(var.domain.begin(), var.domain.end());
        if (seen.size() != var.domain.size()) {
            throw ModelError("variable '" + var.name + "' has a repeated domain value");
        }
        if (!index_.emplace(var.name, id).second) throw ModelError("duplicate variable '" + var.name + "'");
    }
}

std::optional<VarId> Signature::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

VarId Signature::id(std::string_view name) const {
    if (auto found = find(name)) return *found;
    throw ModelError("unknown variable '" + std::string(name) + "'");
}

std::optional<ValueIndex> Signature::find_value(VarId var, std::string_view value) const {
    const auto& domain = variables_.at(var).domain;
    auto it = std::find(domain.begin(), domain.end(), value);
    if (it == domain.end()) return std::nullopt;
    return static_cast<ValueIndex>(it - domain.begin());
}

ValueIndex Signature::value(VarId var, std::string_view value) const {
    if (auto found = find_value(var, value)) return *found;
    throw ModelError("value '" + std::string(value) + "' is not in the domain of '" + variables_.at(var).name + "'");
}

std::vector<VarId> Signature::of_kind(VarKind kind) const {
    std::vector<VarId> out;
    for (VarId id = 0; id < variables_.size(); ++id) {
        if (variables_[id].kind == kind) out.push_back(id);
    }
    return out;
}

bool CausalFormula::holds_in(const World& world) const {
    return std::all_of(literals.begin(), literals.end(), [&](const Literal& lit) { return lit.holds_in(world); });
}

std::size_t row_index(const Signature& signature, std::span<const VarId> parents, std::span<const ValueIndex> values) {
    std::size_t index = 0;
    for (VarId parent : parents) index = index * signature.domain_size(parent) + values[parent];
    return index;
}

std::size_t row_count(const Signature& signature, std::span<const VarId> parents) {
    std::size_t count = 1;
    for (VarId parent : parents) count *= signature.domain_size(parent);
    return count;
}

CausalModel::CausalModel(std::shared_ptr<const Signature> signature, std::vector<StructuralEquation> equations)
    : signature_(std::move(signature)), equations_(std::move(equations)) {
    if (!signature_) throw ModelError("causal model without a signature");
    const auto n = signature_->size();
    by_target_.assign(n, std::nullopt);
    for (std::size_t i = 0; i < equations_.size(); ++i) {
        auto target = equations_[i].target;
        if (target < n && !by_target_[target]) by_target_[target] = i;
    }

    // Kahn's algorithm, always taking the smallest ready variable.
    std::vector<std::size_t> pending(n, 0);
    std::vector<std::vector<VarId>> children(n);
    for (VarId v = 0; v < n; ++v) {
        if (!by_target_[v]) continue;
        for (VarId p : equations_[*by_target_[v]].parents) {
            if (p >= n) continue;
            ++pending[v];
            children[p].push_back(v);
        }
    }
    std::set<VarId> ready;
    for (VarId v = 0; v < n; ++v) {
        if (pending[v] == 0) ready.insert(v);
    }
    while (!ready.empty()) {
        VarId v = *ready.begin();
        ready.erase(ready.begin());
        order_.push_back(v);
        for (VarId c : children[v]) {
            if (--pending[c] == 0) ready.insert(c);
        }
    }
    acyclic_ = order_.size() == n;
    if (!acyclic_) order_.clear();
}

const StructuralEquation* CausalModel::equation_for(VarId var) const {
    if (var >= by_target_.size() || !by_target_[var]) return nullptr;
    return &equations_[*by_target_[var]];
}

std::vector<VarId> CausalModel::actions() const {
    std::vector<VarId> out;
    for (VarId v : signature_->of_kind(VarKind::decision)) {
        if (!equation_for(v)) out.push_back(v);
    }
    return out;
}

bool CausalModel::operator==(const CausalModel& other) const {
    if (!(*signature_ == *other.signature_)) return false;
    for (VarId v = 0; v < signature_->size(); ++v) {
        const auto* a = equation_for(v);
        const auto* b = other.equation_for(v);
        if ((a == nullptr) != (b == nullptr)) return false;
        if (a && !(*a == *b)) return false;
    }
    return equations_.size() == other.equations_.size();
}

namespace {

// Variables on some cycle: those left over by Kahn's algorithm that can
// reach themselves.
std::vector<VarId> cyclic_variables(const CausalModel& model) {
    const auto& sig = model.signature();
    const auto n = sig.size();
    std::vector<std::vector<VarId>> children(n);
    for (VarId v = 0; v < n; ++v) {
        if (const auto* eq = model.equation_for(v)) {
            for (VarId p : eq->parents) {
                if (p < n) children[p].push_back(v);
            }
        }
    }
    std::vector<VarId> out;
    for (VarId start = 0; start < n; ++start) {
        std::vector<bool> seen(n, false);
        std::vector<VarId> stack(children[start].begin(), children[start].end());
        bool found = false;
        while (!stack.empty() && !found) {
            VarId v = stack.back();
            stack.pop_back();
            if (v == start) found = true;
            if (seen[v]) continue;
            seen[v] = true;
            stack.insert(stack.end(), children[v].begin(), children[v].end());
        }
        if (found) out.push_back(start);
    }
    return out;
}

}  // namespace

std::vector<ModelDiagnostic> validate_model(const CausalModel& model) {
    using Kind = ModelDiagnostic::Kind;
    std::vector<ModelDiagnostic> out;
    const auto& sig = model.signature();
    const auto n = sig.size();

    std::vector<int> equation_count(n, 0);
    for (const auto& eq : model.equations()) {
        if (eq.target >= n) {
            out.push_back({Kind::bad_target, {}, "equation for an unknown variable"});
            continue;
        }
        const auto& name = sig[eq.target].name;
        if (sig[eq.target].kind == VarKind::exogenous) {
            out.push_back({Kind::bad_target, {name}, "exogenous variable '" + name + "' cannot have an equation"});
            continue;
        }
        if (++equation_count[eq.target] == 2) {
            out.push_back({Kind::duplicate_equation, {name}, "more than one equation for '" + name + "'"});
        }
        bool parents_ok = true;
        for (VarId p : eq.parents) {
            if (p >= n) {
                out.push_back({Kind::bad_parent, {name}, "equation for '" + name + "' has an unknown parent"});
                parents_ok = false;
            }
        }
        if (!parents_ok) continue;
        if (eq.table.size() != row_count(sig, eq.parents)) {
            out.push_back({Kind::bad_table, {name}, "table for '" + name + "' is not total over its parents"});
            continue;
        }
        for (ValueIndex v : eq.table) {
            if (v >= sig.domain_size(eq.target)) {
                out.push_back({Kind::bad_table, {name}, "table for '" + name + "' has an out-of-domain entry"});
                break;
            }
        }
    }
    for (VarId v = 0; v < n; ++v) {
        if (sig[v].kind == VarKind::endogenous && equation_count[v] == 0) {
            out.push_back({Kind::missing_equation, {sig[v].name}, "no equation for '" + sig[v].name + "'"});
        }
    }
    if (!model.acyclic()) {
        ModelDiagnostic diag{Kind::cycle, {}, "cyclic equations among "};
        for (VarId v : cyclic_variables(model)) diag.variables.push_back(sig[v].name);
        for (std::size_t i = 0; i < diag.variables.size(); ++i) {
            diag.message += (i ? ", " : "") + diag.variables[i];
        }
        out.push_back(std::move(diag));
    }
    return out;
}

CausalModel intervene(const CausalModel& model, const Intervention& iv) {
    const auto& sig = model.signature();
    for (const auto& [var, value] : iv.targets) {
        if (var >= sig.size()) throw ModelError("intervention on an unknown variable");
        if (sig[var].kind == VarKind::exogenous) {
            throw ModelError("cannot intervene on exogenous variable '" + sig[var].name + "'");
        }
        if (value >= sig.domain_size(var)) {
            throw ModelError("intervention value out of the domain of '" + sig[var].name + "'");
        }
    }
    std::vector<StructuralEquation> equations;
    equations.reserve(model.equations().size() + iv.targets.size());
    for (const auto& eq : model.equations()) {
        if (!iv.targets.contains(eq.target)) equations.push_back(eq);
    }
    for (const auto& [var, value] : iv.targets) equations.push_back(StructuralEquation::constant(var, value));
    return CausalModel(model.signature_ptr(), std::move(equations));
}

World solve(const CausalModel& model, const Context& ctx, const ActionChoice& action) {
    const auto& sig = model.signature();
    if (!model.acyclic()) throw ModelError("cannot solve a cyclic model");

    World world{std::vector<ValueIndex>(sig.size(), 0)};
    for (VarId u : sig.of_kind(VarKind::exogenous)) {
        auto it = ctx.values.find(u);
        if (it == ctx.values.end()) throw ModelError("context does not assign '" + sig[u].name + "'");
        if (it->second >= sig.domain_size(u)) throw ModelError("context value out of domain for '" + sig[u].name + "'");
        world.values[u] = it->second;
    }
    for (const auto& [var, value] : ctx.values) {
        if (var >= sig.size() || sig[var].kind != VarKind::exogenous) {
            throw ModelError("context assigns a non-exogenous variable");
        }
    }
    for (const auto& [var, value] : action.values) {
        if (var >= sig.size() || sig[var].kind != VarKind::decision) {
            throw ModelError("action choice assigns a non-decision variable");
        }
    }

    for (VarId v : model.evaluation_order()) {
        if (sig[v].kind == VarKind::exogenous) continue;
        if (const auto* eq = model.equation_for(v)) {
            world.values[v] = eq->evaluate(sig, world.values);
            continue;
        }
        if (sig[v].kind != VarKind::decision) throw ModelError("no equation for '" + sig[v].name + "'");
        auto it = action.values.find(v);
        if (it == action.values.end()) throw ModelError("no action chosen for decision '" + sig[v].name + "'");
        if (it->second >= sig.domain_size(v)) throw ModelError("action value out of domain for '" + sig[v].name + "'");
        world.values[v] = it->second;
    }
    return world;
}

bool satisfies(const CausalModel& model, const Context& ctx, const ActionChoice& action, const Intervention& iv,
               const CausalFormula& phi) {
    if (iv.targets.empty()) return phi.holds_in(solve(model, ctx, action));
    return phi.holds_in(solve(intervene(model, iv), ctx, action));
}

std::string describe(const Signature& signature, VarId var, ValueIndex value) {
    return signature[var].name + "=" + signature[var].domain.at(value);
}

}  // namespace oblique
