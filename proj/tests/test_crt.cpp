#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "ffast2d.hpp"
#include "support.hpp"

using namespace ffast2d;
using namespace testing_support;

namespace {

std::uint64_t brute_crt(const std::vector<std::uint64_t>& moduli, const std::vector<std::uint64_t>& residues) {
    std::uint64_t n = 1;
    for (auto m : moduli) n *= m;
    for (std::uint64_t a = 0; a < n; ++a) {
        bool ok = true;
        for (std::size_t i = 0; i < moduli.size(); ++i) ok = ok && a % moduli[i] == residues[i];
        if (ok) return a;
    }
    return n;
}

}  // namespace

TEST(Crt, SmallExamples) {
    const CrtBasis b({3, 4});
    EXPECT_EQ(crt_reconstruct(b, {0, 0}), 0u);
    EXPECT_EQ(crt_reconstruct(b, {1, 3}), brute_crt({3, 4}, {1, 3}));
    EXPECT_EQ(crt_reconstruct(b, {1, 3}), 7u);
}

TEST(Crt, RoundTripExhaustive) {
    const std::vector<std::uint64_t> moduli{4, 5, 7};
    const CrtBasis b(moduli);
    for (std::uint64_t a = 0; a < 140; ++a) {
        EXPECT_EQ(crt_reconstruct(b, {a % 4, a % 5, a % 7}), a);
    }
    const CrtBasis big({16, 9, 25, 7});
    for (std::uint64_t a = 0; a < 16 * 9 * 25 * 7; ++a) {
        ASSERT_EQ(crt_reconstruct(big, {a % 16, a % 9, a % 25, a % 7}), a);
    }
}

TEST(Crt, Errors) {
    EXPECT_THROW(CrtBasis({4, 6}), Error);
    const CrtBasis b({3, 4});
    try {
        crt_reconstruct(b, {3, 0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ResidueOutOfRange);
    }
    EXPECT_THROW(crt_reconstruct(b, {1}), Error);
    try {
        CrtBasis({(1ull << 32) - 1, (1ull << 32) + 1, 7});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Overflow);
    }
}

TEST(GoodThomas, ForwardIndexExamples) {
    const Dims d(4, 5);
    Grid x(4, 5);
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 5; ++b) x(a, b) = Complex(static_cast<double>(10 * a + b), 0);
    const auto v = good_thomas_forward(x, d);
    EXPECT_EQ(v[0], x(0, 0));
    EXPECT_EQ(v[1], x(1, 1));
    EXPECT_EQ(v[7], x(3, 2));

    Grid delta(4, 5);
    delta(2, 3) = 1.0;
    const auto dv = good_thomas_forward(delta, d);
    for (std::size_t t = 0; t < 20; ++t) EXPECT_EQ(dv[t], t == 18 ? Complex(1.0) : Complex(0.0));
    EXPECT_EQ(crt_reconstruct(CrtBasis({4, 5}), {2, 3}), 18u);
}

TEST(GoodThomas, DegenerateRow) {
    const Grid x = random_grid(1, 7, 3);
    const auto v = good_thomas_forward(x, Dims(1, 7));
    for (std::size_t t = 0; t < 7; ++t) EXPECT_EQ(v[t], x(0, t));
}

TEST(GoodThomas, ForwardIsBijection) {
    for (auto [nx, ny] : {std::pair{4u, 5u}, {13u, 14u}, {9u, 16u}, {1u, 11u}}) {
        const Dims d(nx, ny);
        std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
        for (std::uint64_t t = 0; t < d.n(); ++t) {
            const Coord c = good_thomas_spatial(d, t);
            seen.insert({c.u, c.v});
        }
        EXPECT_EQ(seen.size(), d.n());
        const GoodThomasMap map(d);
        for (std::uint64_t k = 0; k < d.n(); ++k) EXPECT_EQ(map.frequency_index(map.frequency_coord(k)), k);
    }
}

TEST(GoodThomas, ReverseDcAndRowHarmonic) {
    const Dims d(4, 5);
    Grid ones(4, 5);
    for (auto& c : ones.data) c = 1.0;
    const Grid dc = good_thomas_reverse(Fft1d(20).forward(good_thomas_forward(ones, d)), d);
    for (std::size_t u = 0; u < 4; ++u)
        for (std::size_t v = 0; v < 5; ++v) EXPECT_NEAR(std::abs(dc(u, v) - (u == 0 && v == 0 ? Complex(20) : Complex(0))), 0, 1e-12);

    Grid h(4, 5);
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 5; ++b) h(a, b) = std::polar(1.0, 2 * M_PI * a / 4.0);
    const Grid hs = good_thomas_reverse(Fft1d(20).forward(good_thomas_forward(h, d)), d);
    for (std::size_t u = 0; u < 4; ++u)
        for (std::size_t v = 0; v < 5; ++v) EXPECT_NEAR(std::abs(hs(u, v)), u == 1 && v == 0 ? 20.0 : 0.0, 1e-12);
}

TEST(GoodThomas, ComposesToDenseDft) {
    for (auto [nx, ny] : {std::pair{3u, 4u}, {4u, 5u}, {7u, 9u}, {13u, 14u}, {5u, 32u}}) {
        const Dims d(nx, ny);
        const Grid x = random_grid(nx, ny, nx * 100 + ny);
        Grid via = good_thomas_reverse(Fft1d(d.n()).forward(good_thomas_forward(x, d)), d);
        for (auto& c : via.data) c /= static_cast<double>(d.n());
        const Grid ref = naive_dft(x);
        EXPECT_LE(max_abs_diff(via, ref), 1e-9 * max_abs(ref)) << nx << "x" << ny;
    }
}

TEST(GoodThomas, RejectsSharedFactors) {
    try {
        good_thomas_forward(Grid(4, 6), Dims(4, 6));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DimsNotCoprime);
    }
    EXPECT_THROW(GoodThomasMap(Dims(6, 9)), Error);
}

TEST(Fft1d, MatchesNaiveAcrossSizes) {
    for (std::size_t n : {1u, 2u, 3u, 5u, 8u, 12u, 30u, 49u, 64u, 67u, 97u, 210u, 256u, 331u, 1000u}) {
        std::vector<Complex> x(n);
        std::mt19937_64 gen(n);
        std::normal_distribution<double> nd;
        for (auto& c : x) c = Complex(nd(gen), nd(gen));
        const auto got = Fft1d(n).forward(x);
        const auto want = naive_dft_1d(x);
        double err = 0, scale = 0;
        for (std::size_t k = 0; k < n; ++k) {
            err = std::max(err, std::abs(got[k] - want[k]));
            scale = std::max(scale, std::abs(want[k]));
        }
        EXPECT_LE(err, 1e-10 * (1 + scale)) << "n=" << n;
    }
}

TEST(Fft2d, MatchesNaive) {
    const Grid x = random_grid(12, 35, 9);
    Grid got = Fft2d(12, 35).forward(x);
    for (auto& c : got.data) c /= 420.0;
    EXPECT_LE(max_abs_diff(got, naive_dft(x)), 1e-12);
}

TEST(CoprimeSparseDft, OneSparse) {
    const Dims d(4, 5);
    SparseSpectrum s(d);
    s.set({2, 3}, Complex(1.5, -0.5));
    const FfastPlan plan = build_coprime_plan(d, {4, 5}, Regime::LessSparse);
    const SparseSpectrum got = coprime_sparse_dft(make_instance(s).source, d, plan);
    const SparseSpectrum oracle = sparsify(naive_dft(reference_signal(s)), 1e-9);
    ASSERT_EQ(got.size(), 1u);
    EXPECT_TRUE(got.contains({2, 3}));
    EXPECT_NEAR(std::abs(got.at({2, 3}) - oracle.at({2, 3})), 0, 1e-9);
}

TEST(CoprimeSparseDft, ZeroSignal) {
    const Dims d(4, 5);
    const FfastPlan plan = build_coprime_plan(d, {4, 5}, Regime::LessSparse);
    EXPECT_TRUE(coprime_sparse_dft(zero_source(d), d, plan).empty());
}

TEST(CoprimeSparseDft, ThreeSparseMatchesOracle) {
    const Dims d(4, 5);
    const Instance inst = gen_instance(d, 3, ValueModel::unit_circle(), 11);
    const FfastPlan plan = build_coprime_plan(d, {4, 5}, Regime::LessSparse);
    const DecodeReport r = coprime_decode(inst.source, d, plan);
    ASSERT_TRUE(r.success());
    const SparseSpectrum oracle = sparsify(naive_dft(reference_signal(inst.truth)), 1e-9);
    ASSERT_EQ(r.spectrum.size(), oracle.size());
    for (const auto& [c, v] : oracle) EXPECT_NEAR(std::abs(r.spectrum.at(c) - v), 0, 1e-9);
}

TEST(CoprimeSparseDft, RejectsMismatchedPlans) {
    const Dims d(4, 5);
    EXPECT_THROW(coprime_sparse_dft(zero_source(d), d, build_plan(d, {4, 5}, Regime::LessSparse)), Error);
    EXPECT_THROW(build_coprime_plan(Dims(4, 6), {8, 3}, Regime::LessSparse), Error);
}
