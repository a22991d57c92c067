#include <gtest/gtest.h>

#include <random>

#include "oblique/scm.hpp"
#include "support/oracle.hpp"
#include "support/plane.hpp"
#include "support/random_models.hpp"

using namespace oblique;

namespace {

using oracle::all_actions;
using oracle::all_contexts;

bool has_diagnostic(const std::vector<ModelDiagnostic>& ds, ModelDiagnostic::Kind kind) {
    return std::any_of(ds.begin(), ds.end(), [&](const auto& d) { return d.kind == kind; });
}

}  // namespace

TEST(ValidateModel, PlaneIsWellFormed) { EXPECT_TRUE(validate_model(*plane::model()).empty()); }

TEST(ValidateModel, TwoCycleNamesBothVariables) {
    auto sig = std::make_shared<const Signature>(
        std::vector<Variable>{{"X", VarKind::endogenous, {"0", "1"}}, {"Y", VarKind::endogenous, {"0", "1"}}});
    CausalModel m(sig, {{0, {1}, {0, 1}}, {1, {0}, {0, 1}}});
    auto ds = validate_model(m);
    ASSERT_EQ(ds.size(), 1u);
    EXPECT_EQ(ds[0].kind, ModelDiagnostic::Kind::cycle);
    std::vector<std::string> names = ds[0].variables;
    std::sort(names.begin(), names.end());
    EXPECT_EQ(names, (std::vector<std::string>{"X", "Y"}));
    EXPECT_FALSE(m.acyclic());
}

TEST(ValidateModel, MissingEquationForS) {
    auto eqs = plane::equations();
    eqs.pop_back();
    CausalModel m(plane::signature(), eqs);
    auto ds = validate_model(m);
    ASSERT_EQ(ds.size(), 1u);
    EXPECT_EQ(ds[0].kind, ModelDiagnostic::Kind::missing_equation);
    EXPECT_EQ(ds[0].variables, std::vector<std::string>{"S"});
}

TEST(ValidateModel, OutOfDomainTableEntry) {
    auto eqs = plane::equations();
    eqs[0].table[1] = 2;
    auto ds = validate_model(CausalModel(plane::signature(), eqs));
    EXPECT_TRUE(has_diagnostic(ds, ModelDiagnostic::Kind::bad_table));
}

TEST(ValidateModel, ShortTableAndDuplicate) {
    auto eqs = plane::equations();
    eqs[1].table.pop_back();
    eqs.push_back(eqs[0]);
    auto ds = validate_model(CausalModel(plane::signature(), eqs));
    EXPECT_TRUE(has_diagnostic(ds, ModelDiagnostic::Kind::bad_table));
    EXPECT_TRUE(has_diagnostic(ds, ModelDiagnostic::Kind::duplicate_equation));
}

TEST(Intervene, ConstantReplacesEquation) {
    auto m = plane::model();
    auto out = intervene(*m, Intervention{{{plane::E, 0}}});
    ASSERT_NE(out.equation_for(plane::E), nullptr);
    EXPECT_EQ(*out.equation_for(plane::E), StructuralEquation::constant(plane::E, 0));
    EXPECT_EQ(*out.equation_for(plane::I), *m->equation_for(plane::I));
    EXPECT_EQ(*out.equation_for(plane::D), *m->equation_for(plane::D));
}

TEST(Intervene, EmptyIsIdentity) {
    auto m = plane::model();
    EXPECT_TRUE(intervene(*m, {}) == *m);
}

TEST(Intervene, PAndEForcedGiveIWhenInsurerPays) {
    auto m = intervene(*plane::model(), Intervention{{{plane::P, 1}, {plane::E, 1}}});
    for (const auto& ctx : all_contexts(m.signature())) {
        if (ctx.values.at(plane::uI) != 1) continue;
        for (ValueIndex b : {0, 1}) EXPECT_EQ(solve(m, ctx, plane::bomb(b))[plane::I], 1u);
    }
}

TEST(Intervene, RejectsExogenousAndUnknownTargets) {
    auto m = plane::model();
    EXPECT_THROW(intervene(*m, Intervention{{{plane::uE, 0}}}), ModelError);
    EXPECT_THROW(intervene(*m, Intervention{{{42, 0}}}), ModelError);
    EXPECT_THROW(intervene(*m, Intervention{{{plane::E, 2}}}), ModelError);
}

TEST(Intervene, DecisionBecomesConstant) {
    auto m = intervene(*plane::model(), Intervention{{{plane::B, 1}}});
    EXPECT_TRUE(m.actions().empty());
    EXPECT_EQ(solve(m, plane::context(1, 1, 1), {})[plane::D], 1u);
}

TEST(Solve, ExampleWorlds) {
    auto m = plane::model();
    auto w = solve(*m, plane::context(1, 1, 1), plane::bomb(1));
    EXPECT_EQ(w.values, (std::vector<ValueIndex>{1, 1, 1, 1, 1, 1, 1, 1, 0}));
    w = solve(*m, plane::context(1, 1, 1), plane::bomb(0));
    EXPECT_EQ(w.values, (std::vector<ValueIndex>{1, 1, 1, 0, 0, 0, 0, 0, 1}));
    w = solve(*m, plane::context(0, 1, 1), plane::bomb(1));
    EXPECT_EQ(w[plane::E], 0u);
    EXPECT_EQ(w[plane::I], 0u);
    EXPECT_EQ(w[plane::D], 0u);
}

TEST(Solve, RejectsPartialInputs) {
    auto m = plane::model();
    EXPECT_THROW(solve(*m, plane::context(1, 1, 1), {}), ModelError);
    EXPECT_THROW(solve(*m, Context{{{plane::uE, 1}}}, plane::bomb(1)), ModelError);
    CausalModel broken(plane::signature(), {});
    EXPECT_THROW(solve(broken, plane::context(1, 1, 1), plane::bomb(1)), ModelError);
}

TEST(Solve, DeterministicOnRepeat) {
    auto m = plane::model();
    for (const auto& ctx : all_contexts(m->signature())) {
        for (ValueIndex b : {0, 1}) EXPECT_EQ(solve(*m, ctx, plane::bomb(b)), solve(*m, ctx, plane::bomb(b)));
    }
}

TEST(Satisfies, Examples) {
    auto m = plane::model();
    CausalFormula id{{{plane::I, 1}, {plane::D, 1}}};
    EXPECT_TRUE(satisfies(*m, plane::context(1, 1, 1), plane::bomb(1), {}, id));
    EXPECT_FALSE(satisfies(*m, plane::context(1, 1, 1), plane::bomb(1), {}, CausalFormula{{{plane::S, 1}}}));
    EXPECT_TRUE(satisfies(*m, plane::context(0, 1, 1), plane::bomb(1), Intervention{{{plane::E, 1}}},
                          CausalFormula{{{plane::D, 1}}}));
    EXPECT_TRUE(satisfies(*m, plane::context(1, 1, 1), plane::bomb(1), {}, CausalFormula{{{plane::S, 1, true}}}));
    EXPECT_TRUE(satisfies(*m, plane::context(1, 1, 1), plane::bomb(1), {}, CausalFormula{}));
}

TEST(PlaneProperty, DeathExactlyWhenBombExplodesAndKills) {
    auto m = plane::model();
    for (const auto& ctx : all_contexts(m->signature())) {
        for (ValueIndex b : {0, 1}) {
            bool expected = b == 1 && ctx.values.at(plane::uE) == 1 && ctx.values.at(plane::uD) == 1;
            EXPECT_EQ(solve(*m, ctx, plane::bomb(b))[plane::D] == 1, expected);
        }
    }
}

class RandomScmProperties : public ::testing::Test {
protected:
    std::mt19937 rng{20240611};
    static constexpr int kModels = 200;

    Intervention random_intervention(const gen::RandomScm& m, double density) {
        Intervention iv;
        std::bernoulli_distribution coin(density);
        for (VarId v : m.endogenous) {
            if (coin(rng)) iv.targets[v] = std::uniform_int_distribution<int>(0, 1)(rng);
        }
        return iv;
    }
};

TEST_F(RandomScmProperties, SolveMatchesRecursiveOracle) {
    for (int n = 0; n < kModels; ++n) {
        auto m = gen::scm(rng);
        ASSERT_TRUE(validate_model(*m.model).empty());
        auto iv = random_intervention(m, 0.3);
        auto intervened = intervene(*m.model, iv);
        for (const auto& ctx : all_contexts(m.model->signature())) {
            for (const auto& a : all_actions(m.model->signature())) {
                EXPECT_EQ(solve(*m.model, ctx, a), oracle::brute_solve(*m.model, ctx, a));
                EXPECT_EQ(solve(intervened, ctx, a), oracle::brute_solve(*m.model, ctx, a, iv));
            }
        }
    }
}

TEST_F(RandomScmProperties, InterventionFixpoint) {
    for (int n = 0; n < kModels; ++n) {
        auto m = gen::scm(rng);
        auto iv = random_intervention(m, 0.5);
        auto intervened = intervene(*m.model, iv);
        for (const auto& ctx : all_contexts(m.model->signature())) {
            for (const auto& a : all_actions(m.model->signature())) {
                auto w = solve(intervened, ctx, a);
                for (const auto& [v, x] : iv.targets) EXPECT_EQ(w[v], x);
            }
        }
    }
}

TEST_F(RandomScmProperties, TotalInterventionIgnoresContext) {
    for (int n = 0; n < kModels; ++n) {
        auto m = gen::scm(rng);
        auto iv = random_intervention(m, 1.0);
        auto intervened = intervene(*m.model, iv);
        const auto& sig = m.model->signature();
        for (const auto& a : all_actions(sig)) {
            std::optional<std::vector<ValueIndex>> first;
            for (const auto& ctx : all_contexts(sig)) {
                auto w = solve(intervened, ctx, a);
                std::vector<ValueIndex> endo;
                for (VarId v = 0; v < sig.size(); ++v) {
                    if (is_endogenous(sig[v].kind)) endo.push_back(w[v]);
                }
                if (!first) first = endo;
                EXPECT_EQ(endo, *first);
            }
        }
    }
}

TEST_F(RandomScmProperties, InterventionIsIdempotent) {
    for (int n = 0; n < kModels; ++n) {
        auto m = gen::scm(rng);
        auto iv = random_intervention(m, 0.4);
        auto once = intervene(*m.model, iv);
        auto twice = intervene(once, iv);
        for (const auto& ctx : all_contexts(m.model->signature())) {
            for (const auto& a : all_actions(m.model->signature())) EXPECT_EQ(solve(once, ctx, a), solve(twice, ctx, a));
        }
    }
}

TEST_F(RandomScmProperties, DisjointInterventionsCompose) {
    for (int n = 0; n < kModels; ++n) {
        auto m = gen::scm(rng);
        Intervention left, right;
        for (VarId v : m.endogenous) {
            int side = std::uniform_int_distribution<int>(0, 2)(rng);
            ValueIndex x = std::uniform_int_distribution<int>(0, 1)(rng);
            if (side == 1) left.targets[v] = x;
            if (side == 2) right.targets[v] = x;
        }
        auto lr = intervene(intervene(*m.model, left), right);
        auto rl = intervene(intervene(*m.model, right), left);
        for (const auto& ctx : all_contexts(m.model->signature())) {
            for (const auto& a : all_actions(m.model->signature())) EXPECT_EQ(solve(lr, ctx, a), solve(rl, ctx, a));
        }
    }
}

TEST(Describe, UsesNamesAndValues) {
    auto sig = plane::signature();
    EXPECT_EQ(describe(*sig, plane::D, 1), "D=1");
}
