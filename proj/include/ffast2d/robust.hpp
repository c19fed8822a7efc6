#pragma once

// Noise-robust singleton estimation over the separable random-offset pair
// layout produced by design_shifts().
//
// For a singleton at (u, v), a row pair (r, r + 2^j) observes
//   y(r + 2^j) conj(y(r)) ~ |X|^2 e^{i 2 pi 2^j u / nx},
// so level j pins 2^j u / nx mod 1. Levels are consumed coarse to fine: each
// finer level resolves its 2^j-fold ambiguity against the running estimate,
// and the pairs of a level vote through their magnitude-weighted phasor sum.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "ffast2d/frontend.hpp"
#include "ffast2d/peeler.hpp"
#include "ffast2d/plan.hpp"
#include "ffast2d/shifts.hpp"
#include "ffast2d/source.hpp"

namespace ffast2d {

/// Classification thresholds for one bin observation.
struct RobustThresholds {
    double noise_var = 0.0;       ///< variance of each observation entry
    double gamma_zero = 1.0;
    double gamma_single = 1.0;
    double zero_threshold = 1e-9; ///< numeric floor, used when noise_var is 0
    double tol_residual = 1e-6;   ///< numeric floor relative to |value|
};

namespace detail {

struct PairIndex {
    std::size_t first = 0;
    std::size_t second = 0;
};

// Pair indices for one dimension, grouped by level.
inline std::vector<std::vector<PairIndex>> robust_pairs(std::size_t start, std::uint32_t levels, const RobustParams& p) {
    std::vector<std::vector<PairIndex>> by_level(levels);
    std::size_t idx = start;
    for (std::uint32_t set = 0; set < p.chains_per_dim; ++set) {
        for (std::uint32_t j = 0; j < levels; ++j) {
            for (std::uint32_t r = 0; r < p.reps; ++r) {
                by_level[j].push_back({idx, idx + 1});
                idx += 2;
            }
        }
    }
    return by_level;
}

inline double wrap_unit(double x) {
    x -= std::floor(x);
    return x >= 1.0 ? 0.0 : x;
}

inline std::uint64_t estimate_coordinate(const std::vector<Complex>& y, const std::vector<std::vector<PairIndex>>& levels,
                                         std::uint64_t size) {
    if (size <= 1 || levels.empty()) return 0;
    double alpha = 0.0;
    for (std::size_t j = 0; j < levels.size(); ++j) {
        const double mult = std::ldexp(1.0, static_cast<int>(j));
        Complex vote{};
        for (const PairIndex& pair : levels[j]) {
            const Complex product = y[pair.second] * std::conj(y[pair.first]);
            const double psi = wrap_unit(std::arg(product) / kTwoPi);
            double candidate = psi;
            if (j > 0) {
                const double lift = std::round(mult * alpha - psi);
                candidate = (psi + lift) / mult;
            }
            vote += std::abs(product) * std::polar(1.0, kTwoPi * candidate);
        }
        if (vote == Complex{}) return 0;
        alpha = wrap_unit(std::arg(vote) / kTwoPi);
    }
    return static_cast<std::uint64_t>(std::llround(alpha * static_cast<double>(size))) % size;
}

// Chains whose shifts agree modulo the sampling periods read the same sample
// coset, so their noise is identical up to a known phase. Returns the
// effective number of independent complex entries, (sum m)^2 / sum m^2 over
// coset multiplicities m.
inline double effective_chain_dof(const StageConfig& stage) {
    std::map<std::pair<std::uint64_t, std::uint64_t>, double> mult;
    for (const Shift& s : stage.shifts) mult[{s.s1 % stage.sub_x, s.s2 % stage.sub_y}] += 1.0;
    double sum = 0.0, sq = 0.0;
    for (const auto& [key, m] : mult) {
        sum += m;
        sq += m * m;
    }
    return sq > 0.0 ? sum * sum / sq : 0.0;
}

// Smallest t >= 1 with exp(-dof (t - 1 - ln t)) <= exp(-log_budget): a
// Chernoff bound on Gamma(dof)/dof exceeding t.
inline double gamma_tail_multiplier(double dof, double log_budget) {
    if (dof <= 0.0) return 1.0;
    const double target = log_budget / dof;
    double lo = 1.0, hi = 2.0;
    while (hi - 1.0 - std::log(hi) < target) hi *= 2.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mid - 1.0 - std::log(mid) < target ? lo : hi) = mid;
    }
    return hi;
}

}  // namespace detail

/// Verifies a stage carries the design_shifts() layout for these params.
inline void check_robust_layout(const StageConfig& stage, const Dims& dims, const RobustParams& params) {
    if (stage.shifts.size() != robust_shift_count(dims, params) || stage.shifts.empty() || stage.shifts[0] != Shift{0, 0}) {
        throw Error(ErrorCode::WrongShiftLayout, "stage shifts do not follow the robust pair layout");
    }
    const std::uint32_t lx = refinement_levels(dims.nx);
    const std::uint32_t ly = refinement_levels(dims.ny);
    auto check_dim = [&](std::size_t start, std::uint32_t levels, std::uint64_t size, bool rows) {
        const auto by_level = detail::robust_pairs(start, levels, params);
        for (std::uint32_t j = 0; j < levels; ++j) {
            const std::uint64_t step = (std::uint64_t{1} << j) % size;
            for (const auto& pair : by_level[j]) {
                const Shift a = stage.shifts[pair.first];
                const Shift b = stage.shifts[pair.second];
                const bool ok = rows ? (a.s2 == 0 && b.s2 == 0 && (a.s1 + step) % size == b.s1)
                                     : (a.s1 == 0 && b.s1 == 0 && (a.s2 + step) % size == b.s2);
                if (!ok) throw Error(ErrorCode::WrongShiftLayout, "robust pair does not differ by 2^j in one dimension");
            }
        }
    };
    check_dim(1, lx, dims.nx, true);
    check_dim(1 + 2 * std::size_t{params.chains_per_dim} * params.reps * lx, ly, dims.ny, false);
}

/// Robust bin classification.
///   zero-ton:  ||y||^2 <= (1 + gamma_zero) |y| sigma^2
///   singleton: location by pairwise phase refinement, value by least squares
///              over all chains, ||y - value w||^2 <= (1 + gamma_single) |y| sigma^2
///   otherwise multi-ton.
/// sigma^2 here is the per-entry variance of the observation.
inline BinClass robust_classify(const BinObservation& obs, const StageConfig& stage, const Dims& dims,
                                const RobustParams& params, const RobustThresholds& thr) {
    const std::size_t count = obs.values.size();
    if (count != stage.shifts.size() || count != robust_shift_count(dims, params)) {
        throw Error(ErrorCode::WrongShiftLayout, "observation length does not match the robust layout");
    }
    double energy = 0.0;
    for (const Complex& y : obs.values) energy += std::norm(y);
    const double dof = static_cast<double>(count);
    const double floor_energy = dof * thr.zero_threshold * thr.zero_threshold;
    if (energy <= (1.0 + thr.gamma_zero) * dof * thr.noise_var + floor_energy) return ZeroTon{};

    const std::uint32_t lx = refinement_levels(dims.nx);
    const std::uint32_t ly = refinement_levels(dims.ny);
    const auto row_levels = detail::robust_pairs(1, lx, params);
    const auto col_levels = detail::robust_pairs(1 + 2 * std::size_t{params.chains_per_dim} * params.reps * lx, ly, params);
    const Coord loc{detail::estimate_coordinate(obs.values, row_levels, dims.nx),
                    detail::estimate_coordinate(obs.values, col_levels, dims.ny)};
    if (loc.u % stage.bins_x != obs.i || loc.v % stage.bins_y != obs.j) return MultiTon{};

    const std::vector<Complex> w = chain_weights(dims, loc, stage.shifts);
    Complex num{};
    for (std::size_t c = 0; c < count; ++c) num += std::conj(w[c]) * obs.values[c];
    const Complex value = num / dof;  // |w_c| == 1
    if (std::abs(value) <= thr.zero_threshold) return MultiTon{};

    double residual = 0.0;
    for (std::size_t c = 0; c < count; ++c) residual += std::norm(obs.values[c] - value * w[c]);
    const double numeric = thr.tol_residual * std::abs(value) + thr.zero_threshold;
    if (residual <= (1.0 + thr.gamma_single) * dof * thr.noise_var + dof * numeric * numeric) {
        return Singleton{loc, value};
    }
    return MultiTon{};
}

/// Per-sample noise variance from a bootstrap pass: a median-based first guess,
/// then the mean per-entry energy of bins classified zero-ton, rescaled by each
/// stage's bin count (a small DFT with 1/B scaling divides variance by B).
inline double estimate_noise_var(const FrontendOutput& bins, const FfastPlan& plan) {
    if (!plan.robust) throw Error(ErrorCode::InvalidArgument, "noise estimation needs a robust plan");
    double weighted = 0.0;
    double weight = 0.0;
    for (std::size_t s = 0; s < bins.stages.size(); ++s) {
        const auto& stage_bins = bins.stages[s];
        if (stage_bins.empty()) continue;
        std::vector<double> per_entry;
        per_entry.reserve(stage_bins.size());
        for (const auto& obs : stage_bins) {
            double e = 0.0;
            for (const Complex& y : obs.values) e += std::norm(y);
            per_entry.push_back(e / static_cast<double>(obs.values.size()));
        }
        std::vector<double> sorted = per_entry;
        std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
        const double guess = sorted[sorted.size() / 2] / std::log(2.0);
        RobustThresholds thr;
        thr.noise_var = guess;
        thr.gamma_zero = plan.robust->gamma_zero;
        thr.gamma_single = plan.robust->gamma_single;
        double sum = 0.0;
        std::size_t zeros = 0;
        for (std::size_t b = 0; b < stage_bins.size(); ++b) {
            if (is_zeroton(robust_classify(stage_bins[b], plan.stages[s], plan.dims, *plan.robust, thr))) {
                sum += per_entry[b];
                ++zeros;
            }
        }
        if (zeros == 0) continue;
        const double bins_in_stage = static_cast<double>(plan.stages[s].bin_count());
        weighted += (sum / static_cast<double>(zeros)) * bins_in_stage * static_cast<double>(zeros);
        weight += static_cast<double>(zeros);
    }
    return weight > 0.0 ? weighted / weight : 0.0;
}

struct RobustDecodeOptions {
    std::optional<double> rho;      ///< constellation SNR; keeps |value| > sqrt(rho)/4
    bool estimate_noise = false;    ///< replace params.noise_var by estimate_noise_var()
    std::size_t max_rounds = 0;
    double tol_residual = 1e-6;
};

/// Front-end plus peeling with robust_classify; thresholds use the per-stage
/// bin variance noise_var / B_i and stay fixed across rounds. Each stage's
/// gammas are raised to a Chernoff tail multiplier for its effective chain
/// count so that pure-noise bins across the whole plan stay below threshold
/// with probability about 1 - 1e-3.
inline DecodeReport robust_decode(const SignalSource& source, const FfastPlan& plan, const RobustDecodeOptions& opts = {}) {
    if (plan.mode != Mode::Robust || !plan.robust) throw Error(ErrorCode::InvalidArgument, "robust_decode needs a robust plan");
    for (const auto& stage : plan.stages) check_robust_layout(stage, plan.dims, *plan.robust);
    const RobustParams& params = *plan.robust;

    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t before = source.access_count();
    FrontendOutput bins = run_frontend(source, plan);
    const std::uint64_t touched = source.access_count() - before;

    const double sigma2 = opts.estimate_noise ? estimate_noise_var(bins, plan) : params.noise_var;
    const double zero_threshold = default_zero_threshold(bins);
    const double log_budget = std::log(1e3 * static_cast<double>(std::max<std::uint64_t>(plan.total_bins(), 1)));
    std::vector<RobustThresholds> per_stage(plan.stages.size());
    for (std::size_t s = 0; s < plan.stages.size(); ++s) {
        const double dof = detail::effective_chain_dof(plan.stages[s]);
        const double zero_mult = detail::gamma_tail_multiplier(dof, log_budget);
        const double single_mult = detail::gamma_tail_multiplier(std::max(dof - 1.0, 1.0), log_budget);
        per_stage[s].noise_var = sigma2 / static_cast<double>(plan.stages[s].bin_count());
        per_stage[s].gamma_zero = std::max(params.gamma_zero, zero_mult - 1.0);
        per_stage[s].gamma_single = std::max(params.gamma_single, single_mult - 1.0);
        per_stage[s].zero_threshold = zero_threshold;
        per_stage[s].tol_residual = opts.tol_residual;
    }
    auto classify = [&](const BinObservation& obs, const StageConfig& stage) {
        return robust_classify(obs, stage, plan.dims, params, per_stage[obs.stage]);
    };
    const double prune = opts.rho ? std::sqrt(*opts.rho) / 4.0 : zero_threshold;
    DecodeReport report = peel_with(std::move(bins), plan, classify, opts.max_rounds, prune);
    report.samples_touched = touched;
    report.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace ffast2d
