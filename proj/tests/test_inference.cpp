#include <gtest/gtest.h>

#include "prefcone/inference.hpp"
#include "prefcone/random_instances.hpp"
#include "support/counterexample.hpp"
#include "support/fixtures.hpp"
#include "support/sampling.hpp"

using namespace prefcone;
using namespace prefcone::testing;

namespace {

PreferenceCone worked_cone(bool with_cp = true) {
    if (with_cp) return PreferenceCone(compile(worked_problem(), {worked_cp()}));
    return PreferenceCone(compile(worked_problem(), {}));
}

const Prospect& alt(const DecisionProblem& p, const std::string& name) { return p.find_alternative(name)->prospect; }

void expect_witness(const PreferenceCone& cone, const ScalingVector& k, const Vector& v, double sign) {
    EXPECT_TRUE(admissibility(cone.constraints(), k).ok());
    EXPECT_GT(sign * dot(k.coords(), v), 1e-9);
}

}  // namespace

TEST(InducedDominance, WorkedQuery) {
    const auto problem = worked_problem();
    const auto cone = worked_cone();
    const auto r = induced_dominance(problem, alt(problem, "lottery"), alt(problem, "x101"), cone);
    EXPECT_EQ(r.verdict, Verdict::Preceq);
    EXPECT_EQ(r.code(), 1);
    EXPECT_EQ(r.method, Method::LP);
    EXPECT_TRUE(r.strict);
    EXPECT_EQ(induced_dominance(problem, alt(problem, "x101"), alt(problem, "lottery"), cone).code(), -1);

    const PreferenceCone with_generators(cone.constraints(), GeneratorOptions{});
    const auto g = induced_dominance(problem, alt(problem, "lottery"), alt(problem, "x101"), with_generators);
    EXPECT_EQ(g.verdict, Verdict::Preceq);
    EXPECT_EQ(g.method, Method::Generator);
}

TEST(InducedDominance, WorkedQueryWithoutStatementIsIncomparable) {
    const auto problem = worked_problem();
    const auto cone = worked_cone(false);
    const auto& p = alt(problem, "lottery");
    const auto& q = alt(problem, "x101");
    const auto r = induced_dominance(problem, p, q, cone);
    ASSERT_EQ(r.verdict, Verdict::Incomparable);
    EXPECT_EQ(r.code(), 0);
    const auto v = difference(prospect_moments(problem, p), prospect_moments(problem, q));
    expect_witness(cone, *r.first_preferred, v, +1);
    expect_witness(cone, *r.second_preferred, v, -1);
    EXPECT_GT(r.margin, 1e-9);
}

TEST(InducedDominance, IdenticalProspectsAreEquivalent) {
    const auto problem = worked_problem();
    const auto r = induced_dominance(problem, worked_lottery(), worked_lottery(), worked_cone());
    EXPECT_EQ(r.verdict, Verdict::Equivalent);
    EXPECT_FALSE(r.code());
}

TEST(InducedDominance, SingleAttributeOutcomesAreIncomparableUnderIndependenceAlone) {
    const auto problem = three_binary();
    const PreferenceCone cone(compile(problem, {}));
    const Prospect x100 = Prospect::degenerate(bits({1, 0, 0})), x010 = Prospect::degenerate(bits({0, 1, 0}));
    const auto r = induced_dominance(problem, x100, x010, cone);
    ASSERT_EQ(r.verdict, Verdict::Incomparable);
    // Utilities are k_1 and k_2, so the witnesses must order those two coefficients.
    EXPECT_GT((*r.first_preferred)[0], (*r.first_preferred)[1]);
    EXPECT_LT((*r.second_preferred)[0], (*r.second_preferred)[1]);
}

TEST(InducedDominance, EightAttributesStayDecidable) {
    std::vector<Attribute> attrs;
    for (int i = 0; i < 8; ++i) attrs.push_back(Attribute::binary("X" + std::to_string(i + 1)));
    const DecisionProblem problem(attrs, {});
    const PreferenceCone cone(compile(problem, {}));
    ASSERT_EQ(cone.constraints().size(), 1024u);
    ASSERT_TRUE(cone.consistent());
    std::vector<std::size_t> low(8, 0), high(8, 0);
    high[3] = 1;
    const auto r = induced_dominance(problem, Prospect::degenerate(Outcome{low}), Prospect::degenerate(Outcome{high}), cone);
    EXPECT_EQ(r.verdict, Verdict::Preceq);
    EXPECT_TRUE(r.strict);
    random::Engine rng(48);
    const auto p = random::prospect(rng, attrs, 4), q = random::prospect(rng, attrs, 4);
    EXPECT_NE(induced_dominance(problem, p, q, cone).verdict, Verdict::Indeterminate);
}

TEST(InducedDominance, InconsistentStoreIsAnError) {
    const auto problem = worked_problem();
    const PreferenceCone cone(compile(problem, {{"a", Comparison{alt(problem, "x101"), alt(problem, "lottery"), true}},
                                                {"b", Comparison{alt(problem, "lottery"), alt(problem, "x101"), true}}}));
    EXPECT_FALSE(cone.consistent());
    EXPECT_THROW(induced_dominance(problem, worked_lottery(), worked_lottery(), cone), InconsistentPreferences);
}

TEST(InducedDominance, WeakStatementDominanceIsNotStrict) {
    const auto problem = worked_problem();
    const PreferenceCone cone(
        compile(problem, {{"w", Comparison{alt(problem, "x101"), alt(problem, "lottery"), false}}}));
    const auto r = induced_dominance(problem, alt(problem, "x101"), alt(problem, "lottery"), cone);
    EXPECT_EQ(r.verdict, Verdict::Preceq);
    EXPECT_FALSE(r.strict);
}

TEST(DisplayNormalization, SumsToOneWhenPositive) {
    const auto k = display_normalized(ScalingVector(Vector{2, 1, 0, 1, 0, 0, 0}));
    EXPECT_DOUBLE_EQ(k[0], 0.5);
    EXPECT_DOUBLE_EQ(k[1], 0.25);
    const ScalingVector neg(Vector{-1, 0, 0});
    EXPECT_EQ(display_normalized(neg), neg);
}

TEST(IsProduct, Examples) {
    EXPECT_TRUE(is_product(Prospect::degenerate(bits({1, 0}))));
    EXPECT_FALSE(is_product(Prospect::make({{0.5, bits({0, 0})}, {0.5, bits({1, 1})}})));
    // (.3, .7) x (.4, .6)
    EXPECT_TRUE(is_product(Prospect::make({{.12, bits({0, 0})},
                                           {.18, bits({0, 1})},
                                           {.28, bits({1, 0})},
                                           {.42, bits({1, 1})}})));
    EXPECT_FALSE(is_product(Prospect::make({{.12, bits({0, 0})},
                                            {.18, bits({0, 1})},
                                            {.29, bits({1, 0})},
                                            {.41, bits({1, 1})}})));
}

TEST(LocalScreen, AdditiveMode) {
    const auto problem = three_binary();
    const auto w = compile(problem, {}, {.additive = true});
    const auto p = Prospect::make({{0.5, bits({0, 1, 0})}, {0.5, bits({1, 0, 0})}});
    const auto q = Prospect::make({{0.5, bits({1, 1, 0})}, {0.5, bits({0, 0, 1})}});
    EXPECT_EQ(local_dominance_screen(problem, p, q, ScreenMode::Additive, w), Verdict::Preceq);
    EXPECT_EQ(local_dominance_screen(problem, q, p, ScreenMode::Additive, w), Verdict::Succeq);
    const auto r = Prospect::degenerate(bits({1, 0, 0}));
    EXPECT_EQ(local_dominance_screen(problem, r, Prospect::degenerate(bits({0, 1, 0})), ScreenMode::Additive, w),
              std::nullopt);
    EXPECT_THROW(local_dominance_screen(problem, p, q, ScreenMode::Additive, compile(problem, {})), ContractViolation);
}

TEST(LocalScreen, ProductMode) {
    const auto problem = three_binary();
    const auto w = compile(problem, {});
    const auto p = Prospect::make({{0.25, bits({0, 0, 1})}, {0.25, bits({0, 1, 1})},
                                   {0.25, bits({1, 0, 1})}, {0.25, bits({1, 1, 1})}});
    const auto q = Prospect::make({{0.5, bits({0, 1, 1})}, {0.5, bits({1, 1, 1})}});
    EXPECT_EQ(local_dominance_screen(problem, p, q, ScreenMode::ProductDistributions, w), Verdict::Preceq);
    const auto equal = Prospect::make({{0.5, bits({0, 0, 1})}, {0.5, bits({0, 1, 1})}});
    const auto shuffled = Prospect::make({{0.5, bits({0, 1, 1})}, {0.5, bits({0, 0, 1})}});
    EXPECT_EQ(local_dominance_screen(problem, equal, shuffled, ScreenMode::ProductDistributions, w),
              Verdict::Equivalent);
    const auto correlated = Prospect::make({{0.5, bits({0, 0, 0})}, {0.5, bits({1, 1, 0})}});
    EXPECT_THROW(local_dominance_screen(problem, correlated, q, ScreenMode::ProductDistributions, w),
                 ContractViolation);
}

TEST(LocalScreen, MultiplicativeCounterexampleIsPinned) {
    const auto found = search_multiplicative_counterexample(1, 100000);
    ASSERT_TRUE(found);
    EXPECT_EQ(found->sample, 403u);
    EXPECT_DOUBLE_EQ(found->k1, 1.0);
    EXPECT_DOUBLE_EQ(found->k2, 1.5);

    // p = {.625:(0,0), .125:(0,1), .25:(1,1)}, q = {.5:(0,0), .25:(0,1), .125:(1,0), .125:(1,1)}
    const auto p = Prospect::make({{.625, bits({0, 0})}, {.125, bits({0, 1})}, {.25, bits({1, 1})}});
    const auto q = Prospect::make({{.5, bits({0, 0})}, {.25, bits({0, 1})}, {.125, bits({1, 0})}, {.125, bits({1, 1})}});
    EXPECT_EQ(found->p, p);
    EXPECT_EQ(found->q, q);

    const DecisionProblem problem({Attribute::binary("X1"), Attribute::binary("X2")}, {});
    const auto ep = marginal_expectations(problem, p), eq = marginal_expectations(problem, q);
    EXPECT_EQ(ep, eq);
    EXPECT_DOUBLE_EQ(expected_multiplicative(1.0, 1.5, p), 2.1875);
    EXPECT_DOUBLE_EQ(expected_multiplicative(1.0, 1.5, q), 2.0);

    // The product screen refuses the pair, and the cone does not equate them.
    EXPECT_FALSE(is_product(p));
    const PreferenceCone cone(compile(problem, {}));
    EXPECT_EQ(induced_dominance(problem, p, q, cone).verdict, Verdict::Incomparable);
}

TEST(PotentialOptimality, SingleAlternative) {
    const auto problem = three_binary({{"only", worked_lottery()}});
    const PreferenceCone cone(compile(problem, {}));
    const auto po = potential_optimality({prospect_moments(problem, worked_lottery())}, 0, cone);
    EXPECT_TRUE(po.weakly);
    EXPECT_TRUE(po.strictly);
    ASSERT_TRUE(po.witness);
    EXPECT_EQ(*po.witness, *cone.feasibility().witness);
}

TEST(PotentialOptimality, WorkedAlternativesWithBestOutcome) {
    auto problem = three_binary({{"x101", Prospect::degenerate(bits({1, 0, 1}))},
                                 {"lottery", worked_lottery()},
                                 {"x111", Prospect::degenerate(bits({1, 1, 1}))}});
    const PreferenceCone cone(compile(problem, {worked_cp()}));
    const auto report = nondominated_set(problem, cone);
    const auto& x111 = report.alternatives[2];
    EXPECT_TRUE(x111.optimality.strictly);
    EXPECT_TRUE(x111.dominated_by.empty());
    const auto& lottery = report.alternatives[1];
    EXPECT_FALSE(lottery.potentially_optimal());
    EXPECT_FALSE(lottery.optimality.strictly);
    EXPECT_NE(std::find(lottery.strictly_dominated_by.begin(), lottery.strictly_dominated_by.end(), "x101"),
              lottery.strictly_dominated_by.end());
}

TEST(NondominatedSet, WorkedProblem) {
    const auto problem = worked_problem();
    const auto report = nondominated_set(problem, worked_cone());
    EXPECT_TRUE(report.alternatives[0].dominated_by.empty());
    EXPECT_EQ(report.alternatives[1].dominated_by, std::vector<std::string>{"x101"});
    EXPECT_TRUE(report.alternatives[0].potentially_optimal());
    EXPECT_FALSE(report.alternatives[1].potentially_optimal());
    ASSERT_EQ(report.pairs.size(), 1u);
    EXPECT_EQ(report.pairs[0].result.verdict, Verdict::Succeq);
}

TEST(NondominatedSet, IdenticalAlternatives) {
    const auto problem = three_binary({{"a", worked_lottery()}, {"b", worked_lottery()}, {"c", worked_lottery()}});
    const auto report = nondominated_set(problem, PreferenceCone(compile(problem, {})));
    for (const auto& a : report.alternatives) {
        EXPECT_TRUE(a.dominated_by.empty());
        EXPECT_EQ(a.equivalent_to.size(), 2u);
        EXPECT_TRUE(a.potentially_optimal());
        EXPECT_FALSE(a.optimality.strictly);
    }
}

TEST(SuggestQuery, NoneWhenEverythingIsResolved) {
    const auto problem = worked_problem();
    // With the ceteris paribus statement the only pair is resolved; tradeoff queries
    // cannot change it either.
    EXPECT_FALSE(suggest_query(problem, worked_cone()));
}

TEST(SuggestQuery, UniqueResolvingCandidate) {
    const DecisionProblem problem({Attribute::binary("X1"), Attribute::binary("X2")},
                                  {{"a", Prospect::make({{0.5, bits({1, 1})}, {0.5, bits({0, 0})}})},
                                   {"b", Prospect::degenerate(bits({1, 0}))}});
    const PreferenceCone cone(compile(problem, {}));
    const auto q = suggest_query(problem, cone);
    ASSERT_TRUE(q);
    EXPECT_EQ(q->encoding, "comparison:a:b");
    EXPECT_EQ(q->score, 1u);
}

TEST(SuggestQuery, WorkedProblemMatchesExhaustiveScoring) {
    const auto problem = worked_problem();
    const auto q = suggest_query(problem, worked_cone(false));
    ASSERT_TRUE(q);
    EXPECT_GE(q->score, 1u);

    // Oracle: recompile the log with each answer to every tradeoff candidate and to the
    // direct comparison, and take the best worst-case count.
    const auto& attrs = problem.attributes();
    const auto tp = prospect_moments(problem, alt(problem, "x101"));
    const auto tq = prospect_moments(problem, alt(problem, "lottery"));
    auto changes = [&](const Statement& s) -> std::optional<std::size_t> {
        const PreferenceCone c(compile(problem, {{"answer", s}}));
        if (!c.consistent()) return std::nullopt;
        return induced_dominance(tp, tq, c, {false}).verdict != Verdict::Incomparable ? 1 : 0;
    };
    std::size_t best = 0;
    std::vector<Statement> candidates{Comparison{alt(problem, "x101"), alt(problem, "lottery"), true}};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j)
            candidates.push_back(CeterisParibus{{i, j},
                                                {attrs[i].best_value(), attrs[j].worst_value()},
                                                {attrs[i].worst_value(), attrs[j].best_value()},
                                                true});
    for (const auto& s : candidates) {
        auto reversed = s;
        std::visit([](auto& x) { std::swap(x.worse, x.better); }, reversed);
        const auto a = changes(s), b = changes(reversed);
        if (!a && !b) continue;
        best = std::max(best, std::min(a.value_or(SIZE_MAX), b.value_or(SIZE_MAX)));
    }
    EXPECT_EQ(q->score, best);
}

namespace {

struct RandomCase {
    DecisionProblem problem;
    std::vector<IdentifiedStatement> log;
};

RandomCase random_case(random::Engine& rng, std::size_t n, std::size_t statements) {
    auto problem = random::problem(rng, {n, 3, 4, 3});
    const auto truth = random::admissible_scaling(rng, problem);
    return {problem, random::statements_for(rng, problem, truth, statements)};
}

}  // namespace

TEST(InferenceProperties, SoundCompleteAndAsymmetric) {
    random::Engine rng(41);
    std::mt19937_64 sampler(42);
    for (int trial = 0; trial < 25; ++trial) {
        const auto c = random_case(rng, 2 + trial % 2, random::index(rng, 0, 5));
        const PreferenceCone cone(compile(c.problem, c.log));
        ASSERT_TRUE(cone.consistent());
        const auto samples = sample_admissible(cone.constraints(), 200, sampler);
        const auto& alts = c.problem.alternatives();
        for (std::size_t i = 0; i < alts.size(); ++i)
            for (std::size_t j = 0; j < alts.size(); ++j) {
                if (i == j) continue;
                const auto tp = prospect_moments(c.problem, alts[i].prospect);
                const auto tq = prospect_moments(c.problem, alts[j].prospect);
                const auto v = difference(tp, tq);
                const auto r = induced_dominance(tp, tq, cone);
                const auto back = induced_dominance(tq, tp, cone);
                EXPECT_EQ(back.verdict, reversed(r.verdict));
                switch (r.verdict) {
                    case Verdict::Preceq:
                        for (const auto& k : samples) EXPECT_LE(dot(k.coords(), v), 1e-9);
                        break;
                    case Verdict::Succeq:
                        for (const auto& k : samples) EXPECT_GE(dot(k.coords(), v), -1e-9);
                        break;
                    case Verdict::Equivalent:
                        for (const auto& k : samples) EXPECT_NEAR(dot(k.coords(), v), 0.0, 1e-9);
                        break;
                    case Verdict::Incomparable:
                        expect_witness(cone, *r.first_preferred, v, +1);
                        expect_witness(cone, *r.second_preferred, v, -1);
                        break;
                    case Verdict::Indeterminate: ADD_FAILURE() << "indeterminate verdict"; break;
                }
            }
    }
}

TEST(InferenceProperties, GeneratorPathMatchesLpPath) {
    random::Engine rng(43);
    for (int trial = 0; trial < 20; ++trial) {
        const auto c = random_case(rng, 2 + trial % 3, random::index(rng, 0, 6));
        const auto store = compile(c.problem, c.log);
        const PreferenceCone lp(store), gen(store, GeneratorOptions{});
        const auto& alts = c.problem.alternatives();
        for (std::size_t i = 0; i < alts.size(); ++i)
            for (std::size_t j = i + 1; j < alts.size(); ++j)
                EXPECT_EQ(induced_dominance(c.problem, alts[i].prospect, alts[j].prospect, lp, {false}).verdict,
                          induced_dominance(c.problem, alts[i].prospect, alts[j].prospect, gen, {false}).verdict);
    }
}

TEST(InferenceProperties, AddingStatementsKeepsResolvedVerdicts) {
    random::Engine rng(44);
    for (int trial = 0; trial < 15; ++trial) {
        const auto c = random_case(rng, 3, 6);
        const auto& alts = c.problem.alternatives();
        std::vector<Verdict> previous;
        for (std::size_t len = 0; len <= c.log.size(); ++len) {
            const PreferenceCone cone(
                compile(c.problem, std::span<const IdentifiedStatement>(c.log.data(), len)));
            std::vector<Verdict> now;
            for (std::size_t i = 0; i < alts.size(); ++i)
                for (std::size_t j = i + 1; j < alts.size(); ++j)
                    now.push_back(
                        induced_dominance(c.problem, alts[i].prospect, alts[j].prospect, cone, {false}).verdict);
            for (std::size_t k = 0; k < previous.size(); ++k)
                if (previous[k] != Verdict::Incomparable) EXPECT_EQ(now[k], previous[k]) << "trial " << trial;
            previous = std::move(now);
        }
    }
}

TEST(InferenceProperties, FastPathsAgreeWithCone) {
    random::Engine rng(45);
    int additive_hits = 0, product_hits = 0;
    for (int trial = 0; trial < 150; ++trial) {
        const std::size_t n = 2 + trial % 2;
        auto problem = random::problem(rng, {n, 3, 0, 0});
        const auto& attrs = problem.attributes();
        const auto w = compile(problem, {}, {.additive = true});
        const PreferenceCone additive(w), general(compile(problem, {}));
        const auto p = random::prospect(rng, attrs, 3), q = random::prospect(rng, attrs, 3);
        if (auto s = local_dominance_screen(problem, p, q, ScreenMode::Additive, w)) {
            ++additive_hits;
            EXPECT_EQ(*s, induced_dominance(problem, p, q, additive, {false}).verdict);
        }
        // Product prospects from random marginals.
        auto product = [&] {
            std::vector<Branch> branches{{1.0, Outcome{}}};
            for (const auto& a : attrs) {
                const double mass = random::uniform(rng, 0.1, 0.9);
                const std::size_t lo = random::index(rng, 0, a.size() - 1);
                const std::size_t hi = (lo + 1) % a.size();
                std::vector<Branch> next;
                for (const auto& b : branches)
                    for (auto [v, pr] : {std::pair{lo, mass}, std::pair{hi, 1 - mass}}) {
                        auto x = b.outcome;
                        x.values.push_back(v);
                        next.push_back({b.probability * pr, x});
                    }
                branches = std::move(next);
            }
            return Prospect::make(branches);
        };
        const auto pp = product(), pq = product();
        ASSERT_TRUE(is_product(pp));
        if (auto s = local_dominance_screen(problem, pp, pq, ScreenMode::ProductDistributions, general.constraints())) {
            ++product_hits;
            const auto v = induced_dominance(problem, pp, pq, general, {false}).verdict;
            if (*s == Verdict::Preceq) EXPECT_NE(v, Verdict::Succeq);
            if (*s == Verdict::Succeq) EXPECT_NE(v, Verdict::Preceq);
        }
    }
    EXPECT_GT(additive_hits, 20);
    EXPECT_GT(product_hits, 20);
}

TEST(InferenceProperties, OptimalityInvariantsAndSampledOracle) {
    random::Engine rng(46);
    std::mt19937_64 sampler(47);
    for (int trial = 0; trial < 20; ++trial) {
        const auto c = random_case(rng, 3, random::index(rng, 0, 6));
        const PreferenceCone cone(compile(c.problem, c.log));
        const auto report = nondominated_set(c.problem, cone);
        const auto samples = sample_admissible(cone.constraints(), 200, sampler);
        std::vector<MomentVector> t;
        for (const auto& a : c.problem.alternatives()) t.push_back(prospect_moments(c.problem, a.prospect));
        for (std::size_t r = 0; r < report.alternatives.size(); ++r) {
            const auto& a = report.alternatives[r];
            if (!a.dominated_by.empty()) EXPECT_FALSE(a.optimality.strictly);
            if (!a.strictly_dominated_by.empty()) EXPECT_FALSE(a.optimality.weakly);
            if (a.optimality.strictly) EXPECT_TRUE(a.optimality.pairwise_screen);
            EXPECT_NE(a.optimality.cone_intersection, Intersection::Indeterminate);
            for (const auto& k : samples) {
                double worst_gap = -1e300;
                for (std::size_t s = 0; s < t.size(); ++s)
                    if (s != r) worst_gap = std::max(worst_gap, dot(k, t[s]) - dot(k, t[r]));
                if (worst_gap < -1e-9) EXPECT_TRUE(a.optimality.strictly) << "trial " << trial;
                if (worst_gap <= 0.0) EXPECT_TRUE(a.optimality.weakly) << "trial " << trial;
            }
        }
    }
}
