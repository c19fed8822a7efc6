#include <gtest/gtest.h>

#include <set>

#include "ffast2d.hpp"
#include "support.hpp"

using namespace ffast2d;
using namespace testing_support;

TEST(DenseDft, DeltaIsFlat) {
    Grid x(5, 6);
    x(0, 0) = 1.0;
    const Grid X = dense_dft_2d(x);
    for (const Complex& c : X.data) EXPECT_NEAR(std::abs(c - Complex(1.0 / 30)), 0, 1e-15);
}

TEST(DenseDft, InvertsSynthesis) {
    SparseSpectrum s(Dims(6, 6));
    s.set({2, 3}, 5.0);
    const Grid X = dense_dft_2d(synthesize(s));
    for (std::size_t u = 0; u < 6; ++u)
        for (std::size_t v = 0; v < 6; ++v) EXPECT_NEAR(std::abs(X(u, v) - s.at({u, v})), 0, 1e-12);
}

TEST(DenseDft, InversePairUpToThirtyTwo) {
    for (auto [nx, ny] : {std::pair{8u, 8u}, {17u, 32u}, {32u, 32u}, {1u, 9u}}) {
        const Instance inst = gen_instance(Dims(nx, ny), 6, ValueModel::complex_gaussian(), nx + ny);
        const Grid X = dense_dft_2d(synthesize(inst.truth));
        for (std::size_t u = 0; u < nx; ++u)
            for (std::size_t v = 0; v < ny; ++v) ASSERT_NEAR(std::abs(X(u, v) - inst.truth.at({u, v})), 0, 1e-10);
    }
}

TEST(DenseDft, AgreesWithFastPathAndNaive) {
    const Grid x = random_grid(8, 8, 4);
    const Grid a = dense_dft_2d(x);
    const Grid b = fast_dft_2d(x);
    const Grid c = naive_dft(x);
    EXPECT_LE(max_abs_diff(a, b), 1e-9 * max_abs(a));
    EXPECT_LE(max_abs_diff(a, c), 1e-12);
}

TEST(AliasSumOracle, WorkedExample) {
    const FfastPlan plan = build_plan(Dims(6, 6), {4, 9}, Regime::VerySparse);
    const Grid g = alias_sum_oracle(worked_spectrum(), plan.stages[0], {0, 0});
    EXPECT_NEAR(std::abs(g(0, 0) - Complex(4)), 0, 1e-12);
    EXPECT_NEAR(std::abs(g(0, 1) - Complex(5)), 0, 1e-12);
    EXPECT_NEAR(std::abs(g(1, 0)), 0, 1e-12);
    EXPECT_NEAR(std::abs(g(1, 1) - Complex(7)), 0, 1e-12);
    for (const Complex& c : alias_sum_oracle(SparseSpectrum(Dims(6, 6)), plan.stages[1], {1, 0}).data) EXPECT_EQ(c, Complex(0));
}

TEST(AliasSumOracle, MatchesDensePathAllStagesAllShifts) {
    const Dims d(24, 20);
    for (Regime regime : {Regime::LessSparse, Regime::VerySparse}) {
        FfastPlan plan = build_plan(d, {32, 3, 5}, regime);
        for (auto& s : plan.stages) s.shifts = {{0, 0}, {1, 0}, {0, 1}, {5, 7}, {23, 19}};
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const Instance inst = gen_instance(d, 12, ValueModel::complex_gaussian(), seed);
            for (const auto& stage : plan.stages) {
                const auto spectra = stage_spectra(inst.source, stage);
                for (std::size_t c = 0; c < stage.shifts.size(); ++c) {
                    EXPECT_LE(max_abs_diff(spectra[c], alias_sum_oracle(inst.truth, stage, stage.shifts[c])), 1e-9);
                }
            }
        }
    }
}

TEST(Instance, SamplesMatchCompensatedReference) {
    for (const Dims d : {Dims(60, 60), Dims(2520, 2520), Dims(13, 14)}) {
        const Instance inst = gen_instance(d, 50, ValueModel::complex_gaussian(), 3);
        std::mt19937_64 gen(1);
        for (int t = 0; t < 200; ++t) {
            const std::uint64_t a = gen() % d.nx, b = gen() % d.ny;
            EXPECT_LE(std::abs(inst.source.sample(a, b) - compensated_sample(inst.truth, a, b)), 1e-12);
        }
    }
}

TEST(GenInstance, ZeroKIsZeroSource) {
    const Instance inst = gen_instance(Dims(10, 10), 0, ValueModel::unit_circle(), 1);
    EXPECT_TRUE(inst.truth.empty());
    EXPECT_EQ(inst.source.sample(3, 4), Complex(0));
}

TEST(GenInstance, Deterministic) {
    for (const ValueModel& m : {ValueModel::unit_circle(), ValueModel::complex_gaussian(), ValueModel::constellation(20, 2, 8)}) {
        const Instance a = gen_instance(Dims(280, 280), 40, m, 12345);
        const Instance b = gen_instance(Dims(280, 280), 40, m, 12345);
        EXPECT_EQ(a.truth.entries(), b.truth.entries());
        EXPECT_NE(a.truth.entries(), gen_instance(Dims(280, 280), 40, m, 12346).truth.entries());
    }
}

TEST(GenInstance, ConstellationValues) {
    const double rho = db_to_linear(13.0);
    const Instance inst = gen_instance(Dims(100, 100), 500, ValueModel::constellation(rho, 2, 8), 9);
    std::set<long> mags, phases;
    for (const auto& [c, v] : inst.truth) {
        const double level = (std::abs(v) - std::sqrt(rho) / 2) / (std::sqrt(rho) / 2);
        EXPECT_NEAR(level, std::round(level), 1e-12);
        mags.insert(std::lround(level));
        double ph = std::arg(v) / (2 * M_PI) * 8;
        EXPECT_NEAR(ph, std::round(ph), 1e-9);
        phases.insert((std::lround(ph) + 8) % 8);
    }
    EXPECT_EQ(mags, (std::set<long>{0, 1, 2}));
    EXPECT_EQ(phases.size(), 8u);
}

TEST(GenInstance, SupportIsUniform) {
    // Row marginal of 4000 draws over 10 rows: chi-square with 9 dof.
    std::vector<int> rows(10);
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        for (const auto& [c, v] : gen_instance(Dims(10, 10), 10, ValueModel::unit_circle(), seed).truth) ++rows[c.u];
    }
    double chi2 = 0;
    for (int r : rows) chi2 += (r - 400.0) * (r - 400.0) / 400.0;
    EXPECT_LT(chi2, 27.9);  // p = 0.001
}

TEST(GenInstance, Errors) {
    try {
        gen_instance(Dims(3, 3), 10, ValueModel::unit_circle(), 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::KTooLarge);
    }
    EXPECT_EQ(gen_instance(Dims(3, 3), 9, ValueModel::unit_circle(), 0).truth.size(), 9u);
}

TEST(GenInstance, ExplicitWorkedSignal) {
    const Instance inst = make_instance(worked_spectrum());
    const Grid x = materialize(inst.source);
    EXPECT_LE(max_abs_diff(dense_dft_2d(x), dense_dft_2d(reference_signal(worked_spectrum()))), 1e-12);
    EXPECT_NEAR(std::abs(dense_dft_2d(x)(1, 3) - Complex(7)), 0, 1e-12);
}

TEST(AddNoise, ZeroVarianceIsIdentity) {
    const Instance inst = gen_instance(Dims(20, 20), 5, ValueModel::unit_circle(), 1);
    const SignalSource noisy = add_noise(inst.source, 0.0, 3);
    for (std::uint64_t a = 0; a < 20; ++a) EXPECT_EQ(noisy.sample(a, 3), inst.source.sample(a, 3));
    EXPECT_THROW(add_noise(inst.source, -1.0, 0), Error);
}

TEST(AddNoise, MomentsAndDeterminism) {
    const SignalSource noisy = add_noise(zero_source(Dims(1000, 100)), 2.5, 42);
    double power = 0;
    Complex mean{};
    for (std::uint64_t a = 0; a < 1000; ++a) {
        for (std::uint64_t b = 0; b < 100; ++b) {
            const Complex z = noisy.sample(a, b);
            power += std::norm(z);
            mean += z;
        }
    }
    EXPECT_NEAR(power / 1e5 / 2.5, 1.0, 0.03);
    EXPECT_LT(std::abs(mean / 1e5), 0.02);
    EXPECT_EQ(noisy.sample(7, 9), noisy.sample(7, 9));
    EXPECT_NE(add_noise(zero_source(Dims(4, 4)), 1.0, 1).sample(0, 0), add_noise(zero_source(Dims(4, 4)), 1.0, 2).sample(0, 0));
}

TEST(AddNoise, SnrDefinitionOnConstellation) {
    const double rho = db_to_linear(13.0);
    const Instance inst = gen_instance(Dims(280, 280), 200, ValueModel::constellation(rho, 2, 8), 5);
    const double sigma2 = noise_var_for_snr(inst.truth, rho);
    const SignalSource noise = add_noise(zero_source(inst.dims), sigma2, 8);
    double npow = 0;
    for (std::uint64_t a = 0; a < 280; ++a)
        for (std::uint64_t b = 0; b < 280; ++b) npow += std::norm(noise.sample(a, b));
    npow /= 78400.0;
    EXPECT_NEAR(mean_power(inst.truth) / npow / rho, 1.0, 0.05);
}
