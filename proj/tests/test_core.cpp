#include <gtest/gtest.h>

#include <numeric>

#include "ffast2d.hpp"

using namespace ffast2d;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an ffast2d::Error";
    return ErrorCode::InvalidArgument;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> periods(const FfastPlan& p) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
    for (const auto& s : p.stages) out.emplace_back(s.sub_x, s.sub_y);
    return out;
}

}  // namespace

TEST(Dims, ProductAndValidation) {
    const Dims d(280, 280);
    EXPECT_EQ(d.n(), 78400u);
    EXPECT_EQ(code_of([] { Dims(0, 3); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { Dims(UINT64_MAX, 2); }), ErrorCode::Overflow);
}

TEST(SparseSpectrum, ZeroAmplitudesAreNeverStored) {
    SparseSpectrum s(Dims(4, 4));
    s.set({1, 2}, {3.0, 0.0});
    s.set({0, 0}, 0.0);
    EXPECT_EQ(s.size(), 1u);
    s.add({1, 2}, {-3.0, 0.0});
    EXPECT_TRUE(s.empty());
    EXPECT_THROW(s.set({4, 0}, 1.0), Error);
}

TEST(SparseSpectrum, PruneDropsSmallEntries) {
    SparseSpectrum s(Dims(4, 4));
    s.set({0, 1}, 1e-12);
    s.set({2, 2}, 0.5);
    s.prune(1e-9);
    EXPECT_EQ(s.size(), 1u);
    EXPECT_TRUE(s.contains({2, 2}));
}

TEST(UnitPhase, ExactAtQuarterTurns) {
    EXPECT_NEAR(std::abs(unit_phase(1, 4) - Complex(0, 1)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(unit_phase(6, 4) - Complex(-1, 0)), 0.0, 1e-15);
}

TEST(BuildPlan, SixBySixTwoStagesLessSparse) {
    const FfastPlan p = build_plan(Dims(6, 6), {4, 9}, Regime::LessSparse);
    ASSERT_EQ(p.stages.size(), 2u);
    auto got = periods(p);
    std::sort(got.begin(), got.end());
    EXPECT_EQ(got, (std::vector<std::pair<std::uint64_t, std::uint64_t>>{{2, 2}, {3, 3}}));
    for (const auto& s : p.stages) {
        EXPECT_EQ(s.shifts, (std::vector<Shift>{{0, 0}, {1, 0}, {0, 1}}));
        EXPECT_EQ(s.bins_x * s.sub_x, 6u);
    }
}

TEST(BuildPlan, VerySparseFourNineGivesFigureOrder) {
    const FfastPlan p = build_plan(Dims(6, 6), {4, 9}, Regime::VerySparse);
    EXPECT_EQ(periods(p), (std::vector<std::pair<std::uint64_t, std::uint64_t>>{{3, 3}, {2, 2}}));
    EXPECT_EQ(p.stages[0].bins_x, 2u);
    EXPECT_EQ(p.stages[1].bins_x, 3u);
}

TEST(BuildPlan, TwoEightyLessSparse) {
    const FfastPlan p = build_plan(Dims(280, 280), {25, 64, 49}, Regime::LessSparse);
    EXPECT_EQ(periods(p), (std::vector<std::pair<std::uint64_t, std::uint64_t>>{{5, 5}, {8, 8}, {7, 7}}));
    EXPECT_EQ(p.stages[0].bins_x, 56u);
    EXPECT_EQ(p.stages[1].bins_x, 35u);
    EXPECT_EQ(p.stages[2].bins_x, 40u);
    EXPECT_EQ(plan_sample_budget(p), 17883u);
}

TEST(BuildPlan, TwentyFiveTwentyVerySparseBudget) {
    const FfastPlan p = build_plan(Dims(2520, 2520), {81, 25, 49, 64}, Regime::VerySparse);
    std::vector<std::uint64_t> bins;
    for (const auto& s : p.stages) {
        EXPECT_EQ(s.bins_x, s.bins_y);
        bins.push_back(s.bins_x);
    }
    EXPECT_EQ(bins, (std::vector<std::uint64_t>{9, 5, 7, 8}));
    EXPECT_EQ(plan_sample_budget(p), 657u);
}

TEST(BuildPlan, Errors) {
    EXPECT_EQ(code_of([] { build_plan(Dims(6, 6), {6, 6}, Regime::LessSparse); }), ErrorCode::NotCoprime);
    EXPECT_EQ(code_of([] { build_plan(Dims(6, 6), {4, 3}, Regime::LessSparse); }), ErrorCode::ProductMismatch);
    EXPECT_EQ(code_of([] { build_plan(Dims(6, 6), {36, 1}, Regime::LessSparse); }), ErrorCode::NoValidSplit);
    EXPECT_EQ(code_of([] { build_plan(Dims(6, 6), {36}, Regime::LessSparse); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { build_plan(Dims(6, 6), {4, 9}, Regime::LessSparse, Mode::Robust); }), ErrorCode::InvalidArgument);
}

TEST(BuildPlan, FourByFiveIsAccepted) {
    // Needed by the general-path comparison on co-prime shapes.
    const FfastPlan p = build_plan(Dims(4, 5), {4, 5}, Regime::LessSparse);
    EXPECT_EQ(p.stages[0].bin_count() * p.stages[1].bin_count(), 20u);
    EXPECT_EQ(validate_plan(p).regime, Regime::LessSparse);
}

TEST(SplitFactors, ForcedForCoprimeFactors) {
    const auto s = split_factors(Dims(60, 60), {16, 9, 25});
    EXPECT_EQ(s[0].rows, 4u);
    EXPECT_EQ(s[0].cols, 4u);
    EXPECT_EQ(s[1].rows, 3u);
    EXPECT_EQ(s[2].rows, 5u);
    const auto t = split_factors(Dims(1, 30), {2, 3, 5});
    for (const auto& f : t) EXPECT_EQ(f.rows, 1u);
}

TEST(PlanBudget, SingleBinStage) {
    FfastPlan p;
    p.dims = Dims(3, 3);
    p.stages.emplace_back(p.dims, 3, 3, noiseless_shifts(p.dims));
    EXPECT_EQ(plan_sample_budget(p), 3u);
}

TEST(ValidatePlan, AcceptsPaperConfigurations) {
    EXPECT_EQ(validate_plan(build_plan(Dims(280, 280), {25, 64, 49}, Regime::LessSparse)).regime, Regime::LessSparse);
    const auto vs = validate_plan(build_plan(Dims(2520, 2520), {81, 25, 49, 64}, Regime::VerySparse));
    EXPECT_EQ(vs.regime, Regime::VerySparse);
    EXPECT_EQ(vs.factors, (std::vector<std::uint64_t>{81, 25, 49, 64}));
}

TEST(ValidatePlan, LessSparseBinsAreProductsOfAllButOneFactor) {
    const std::vector<std::uint64_t> factors{16, 9, 25};
    const FfastPlan p = build_plan(Dims(60, 60), factors, Regime::LessSparse);
    const std::uint64_t n = 3600;
    for (std::size_t i = 0; i < factors.size(); ++i) EXPECT_EQ(p.stages[i].bin_count(), n / factors[i]);
    EXPECT_EQ(validate_plan(p).factors, factors);
}

TEST(ValidatePlan, RejectsBrokenPlans) {
    FfastPlan p = build_plan(Dims(6, 6), {4, 9}, Regime::LessSparse);
    FfastPlan bad = p;
    bad.stages[0].sub_x = 4;
    EXPECT_EQ(code_of([&] { validate_plan(bad); }), ErrorCode::InvalidPlan);
    bad = p;
    bad.stages[1].shifts = {{0, 0}, {0, 1}, {1, 0}};
    EXPECT_EQ(code_of([&] { validate_plan(bad); }), ErrorCode::WrongShiftLayout);
    bad = p;
    bad.stages[1].shifts = {{0, 0}, {1, 0}, {1, 0}};
    EXPECT_EQ(code_of([&] { validate_plan(bad); }), ErrorCode::InvalidPlan);
    bad = p;
    bad.stages.pop_back();
    EXPECT_EQ(code_of([&] { validate_plan(bad); }), ErrorCode::InvalidPlan);
    bad = p;
    bad.stages[1] = bad.stages[0];
    EXPECT_EQ(code_of([&] { validate_plan(bad); }), ErrorCode::InvalidPlan);
    EXPECT_EQ(code_of([] { StageConfig(Dims(6, 6), 4, 3, {}); }), ErrorCode::InvalidPlan);
}

TEST(BalancedFactors, BenchFamily) {
    EXPECT_EQ(balanced_factors(Dims(315, 315), 3), (std::vector<std::uint64_t>{81, 49, 25}));
    EXPECT_EQ(balanced_factors(Dims(630, 315), 3), (std::vector<std::uint64_t>{81, 49, 50}));
    EXPECT_EQ(balanced_factors(Dims(1260, 315), 3), (std::vector<std::uint64_t>{81, 49, 100}));
    for (std::uint64_t nx : {315u, 630u, 1260u, 2520u}) {
        const Dims d(nx, 315);
        const auto f = balanced_factors(d, 3);
        EXPECT_EQ(std::accumulate(f.begin(), f.end(), std::uint64_t{1}, std::multiplies<>()), d.n());
        EXPECT_NO_THROW(build_plan(d, f, Regime::VerySparse));
    }
    EXPECT_THROW(balanced_factors(Dims(8, 8), 2), Error);
}

TEST(Plan, EtaUsesAverageBinsPerStage) {
    const FfastPlan p = build_plan(Dims(2520, 2520), {81, 25, 49, 64}, Regime::VerySparse);
    EXPECT_NEAR(p.average_bins() / 100.0, 0.5475, 1e-12);
}
