#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <utility>
#include <variant>
#include <vector>

#include "ffast2d/frontend.hpp"
#include "ffast2d/plan.hpp"
#include "ffast2d/source.hpp"
#include "ffast2d/types.hpp"

namespace ffast2d {

struct ZeroTon {
    friend bool operator==(const ZeroTon&, const ZeroTon&) = default;
};
struct Singleton {
    Coord location;
    Complex value;
    friend bool operator==(const Singleton&, const Singleton&) = default;
};
struct MultiTon {
    friend bool operator==(const MultiTon&, const MultiTon&) = default;
};

using BinClass = std::variant<ZeroTon, Singleton, MultiTon>;

inline bool is_zeroton(const BinClass& c) { return std::holds_alternative<ZeroTon>(c); }
inline bool is_singleton(const BinClass& c) { return std::holds_alternative<Singleton>(c); }
inline bool is_multiton(const BinClass& c) { return std::holds_alternative<MultiTon>(c); }

struct RatioTestOptions {
    double tol_angle = 0.05;      ///< distance to the nearest integer, in index units
    double tol_residual = 1e-6;   ///< per-chain residual relative to |value|
    double zero_threshold = 1e-9; ///< absolute sup-norm below which a bin is empty
};

/// Raw location estimates (nx/2pi) arg(y1 conj y0) and (ny/2pi) arg(y2 conj y0),
/// each wrapped into [0, n_dim). A dimension of size 1 estimates 0.
struct RatioEstimate {
    double row = 0.0;
    double col = 0.0;
};

namespace detail {

inline double wrapped_estimate(Complex shifted, Complex anchor, std::uint64_t size) {
    double est = static_cast<double>(size) / kTwoPi * std::arg(shifted * std::conj(anchor));
    if (est < 0.0) est += static_cast<double>(size);
    return est;
}

inline bool all_within(const std::vector<Complex>& values, double threshold) {
    const double t2 = threshold * threshold;
    for (const Complex& v : values) {
        if (std::norm(v) > t2) return false;
    }
    return true;
}

}  // namespace detail

inline RatioEstimate ratio_estimates(const BinObservation& obs, const Dims& dims) {
    if (obs.values.size() != noiseless_shift_count(dims)) throw Error(ErrorCode::WrongShiftLayout, "observation is not a noiseless triple");
    RatioEstimate est;
    std::size_t next = 1;
    if (dims.nx > 1) est.row = detail::wrapped_estimate(obs.values[next++], obs.values[0], dims.nx);
    if (dims.ny > 1) est.col = detail::wrapped_estimate(obs.values[next++], obs.values[0], dims.ny);
    return est;
}

/// Classifies a noiseless bin: zero-ton by sup-norm, singleton when both ratio
/// estimates snap to integers and every chain matches value * weight, else
/// multi-ton.
inline BinClass ratio_test(const BinObservation& obs, const StageConfig& stage, const Dims& dims,
                           const RatioTestOptions& opts = {}) {
    if (!is_noiseless_layout(stage.shifts, dims)) {
        throw Error(ErrorCode::WrongShiftLayout, "ratio test needs the (0,0),(1,0),(0,1) layout");
    }
    if (detail::all_within(obs.values, opts.zero_threshold)) return ZeroTon{};

    const RatioEstimate est = ratio_estimates(obs, dims);
    const double row_round = std::round(est.row);
    const double col_round = std::round(est.col);
    if (std::abs(est.row - row_round) > opts.tol_angle || std::abs(est.col - col_round) > opts.tol_angle) {
        return MultiTon{};
    }
    const Coord loc{static_cast<std::uint64_t>(row_round) % dims.nx, static_cast<std::uint64_t>(col_round) % dims.ny};
    if (loc.u % stage.bins_x != obs.i || loc.v % stage.bins_y != obs.j) return MultiTon{};

    const Complex value = obs.values[0];
    if (std::abs(value) <= opts.zero_threshold) return MultiTon{};
    const double bound = opts.tol_residual * std::abs(value) + opts.zero_threshold;
    for (std::size_t c = 0; c < stage.shifts.size(); ++c) {
        if (std::abs(obs.values[c] - value * chain_weight(dims, loc, stage.shifts[c])) > bound) return MultiTon{};
    }
    return Singleton{loc, value};
}

enum class DecodeStatus { Success, ResidualLeft, NotASingletonLoop };

inline const char* to_string(DecodeStatus s) {
    switch (s) {
        case DecodeStatus::Success: return "Success";
        case DecodeStatus::ResidualLeft: return "ResidualLeft";
        case DecodeStatus::NotASingletonLoop: return "NotASingletonLoop";
    }
    return "Unknown";
}

struct BinStats {
    std::uint64_t zero = 0;
    std::uint64_t single = 0;
    std::uint64_t multi = 0;
};

struct DecodeReport {
    SparseSpectrum spectrum;
    std::uint64_t samples_touched = 0;
    std::uint64_t plan_budget = 0;
    std::size_t peel_iterations = 0;
    DecodeStatus status = DecodeStatus::ResidualLeft;
    std::vector<BinStats> bin_stats;  ///< per stage, first pass
    std::vector<Coord> recovery_order;
    std::vector<std::size_t> nonzero_bins;  ///< non-zero-ton bin count at the start of each round
    double wall_time_ms = 0.0;

    bool success() const noexcept { return status == DecodeStatus::Success; }

    /// Oversampling ratio m / k of the recovered spectrum; 0 when k == 0.
    double oversampling_ratio() const noexcept {
        return spectrum.empty() ? 0.0 : static_cast<double>(samples_touched) / static_cast<double>(spectrum.size());
    }
};

struct PeelOptions {
    RatioTestOptions ratio;
    std::size_t max_rounds = 0;    ///< 0 selects total_bins + d
    bool check_invariants = false; ///< recompute bin conservation after every round
};

/// Zero threshold 1e-9 * (1 + largest anchor magnitude over all bins).
inline double default_zero_threshold(const FrontendOutput& bins) {
    double scale = 0.0;
    for (const auto& stage : bins.stages) {
        for (const auto& obs : stage) {
            if (!obs.values.empty()) scale = std::max(scale, std::norm(obs.values[0]));
        }
    }
    return 1e-9 * (1.0 + std::sqrt(scale));
}

namespace detail {

// Bins touched since their last classification, kept as flags plus a list so
// a round visits only those bins.
class DirtyBins {
public:
    explicit DirtyBins(const FrontendOutput& bins) : flags_(bins.stages.size()) {
        for (std::size_t s = 0; s < bins.stages.size(); ++s) {
            flags_[s].assign(bins.stages[s].size(), 0);
            for (std::size_t b = 0; b < bins.stages[s].size(); ++b) mark(s, b);
        }
    }

    void mark(std::size_t stage, std::size_t bin) {
        if (flags_[stage][bin]) return;
        flags_[stage][bin] = 1;
        list_.emplace_back(stage, bin);
    }

    /// Marked bins in scan order (stage, then label); clears the marks.
    std::vector<std::pair<std::size_t, std::size_t>> take() {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        out.swap(list_);
        std::sort(out.begin(), out.end());
        for (const auto& [s, b] : out) flags_[s][b] = 0;
        return out;
    }

private:
    std::vector<std::vector<char>> flags_;
    std::vector<std::pair<std::size_t, std::size_t>> list_;
};

inline void subtract_contribution(FrontendOutput& bins, const FfastPlan& plan, Coord loc, Complex value, DirtyBins* dirty) {
    for (std::size_t s = 0; s < plan.stages.size(); ++s) {
        const StageConfig& stage = plan.stages[s];
        const std::uint64_t label = stage.bin_label(loc.u % stage.bins_x, loc.v % stage.bins_y);
        auto& values = bins.stages[s][label].values;
        for (std::size_t c = 0; c < stage.shifts.size(); ++c) {
            values[c] -= value * chain_weight(plan.dims, loc, stage.shifts[c]);
        }
        if (dirty) dirty->mark(s, label);
    }
}

inline void check_conservation(const FrontendOutput& original, const FrontendOutput& current, const FfastPlan& plan,
                               const SparseSpectrum& peeled, double tolerance) {
    FrontendOutput expected = original;
    for (const auto& [loc, value] : peeled) subtract_contribution(expected, plan, loc, value, nullptr);
    for (std::size_t s = 0; s < expected.stages.size(); ++s) {
        for (std::size_t b = 0; b < expected.stages[s].size(); ++b) {
            const auto& want = expected.stages[s][b].values;
            const auto& have = current.stages[s][b].values;
            for (std::size_t c = 0; c < want.size(); ++c) {
                if (std::abs(want[c] - have[c]) > tolerance) {
                    throw std::logic_error("peeling conservation violated");
                }
            }
        }
    }
}

}  // namespace detail

/// Iterative peeling over all bins with a caller-supplied classifier
/// BinClass(const BinObservation&, const StageConfig&).
///
/// Each round classifies every bin touched since it was last classified,
/// collects the distinct singleton locations in scan order and subtracts their
/// contributions from every stage. A location recovered again in a later round
/// accumulates. Stops when a round finds no singleton, when the count of
/// non-zero bins fails to shrink (NotASingletonLoop) or after max_rounds.
template <class Classifier>
DecodeReport peel_with(FrontendOutput bins, const FfastPlan& plan, Classifier&& classify, std::size_t max_rounds,
                       double prune_threshold, bool check_invariants = false, double invariant_tolerance = 1e-9) {
    DecodeReport report;
    report.spectrum = SparseSpectrum(plan.dims);
    report.plan_budget = plan_sample_budget(plan);
    report.bin_stats.resize(plan.stages.size());
    if (max_rounds == 0) max_rounds = plan.total_bins() + plan.stages.size();

    const FrontendOutput original = check_invariants ? bins : FrontendOutput{};
    std::vector<std::vector<BinClass>> classes(bins.stages.size());
    for (std::size_t s = 0; s < bins.stages.size(); ++s) classes[s].assign(bins.stages[s].size(), ZeroTon{});
    detail::DirtyBins dirty(bins);

    // Bins are only ever singletons right after classification: peeling a
    // singleton marks its own bin dirty. So a round needs only the dirty bins.
    std::size_t nonzero = 0;
    auto reclassify = [&](std::size_t s, std::size_t b) -> const BinClass& {
        BinClass& slot = classes[s][b];
        nonzero -= is_zeroton(slot) ? 0 : 1;
        slot = classify(bins.stages[s][b], plan.stages[s]);
        nonzero += is_zeroton(slot) ? 0 : 1;
        return slot;
    };

    std::size_t previous_nonzero = std::numeric_limits<std::size_t>::max();
    bool stalled = false;
    while (report.peel_iterations < max_rounds) {
        ++report.peel_iterations;
        std::vector<Singleton> found;
        std::set<Coord> seen;
        for (const auto& [s, b] : dirty.take()) {
            const BinClass& cls = reclassify(s, b);
            if (report.peel_iterations == 1) {
                auto& st = report.bin_stats[s];
                if (is_zeroton(cls)) {
                    ++st.zero;
                } else if (is_singleton(cls)) {
                    ++st.single;
                } else {
                    ++st.multi;
                }
            }
            if (const auto* single = std::get_if<Singleton>(&cls)) {
                if (seen.insert(single->location).second) found.push_back(*single);
            }
        }
        report.nonzero_bins.push_back(nonzero);
        if (nonzero >= previous_nonzero) {
            stalled = true;
            break;
        }
        previous_nonzero = nonzero;
        if (found.empty()) break;
        for (const Singleton& single : found) {
            report.spectrum.add(single.location, single.value);
            report.recovery_order.push_back(single.location);
            detail::subtract_contribution(bins, plan, single.location, single.value, &dirty);
        }
        if (check_invariants) detail::check_conservation(original, bins, plan, report.spectrum, invariant_tolerance);
    }

    // Classify whatever is still dirty so the final verdict sees every bin.
    for (const auto& [s, b] : dirty.take()) reclassify(s, b);
    report.spectrum.prune(prune_threshold);
    const std::set<Coord> peeled(report.recovery_order.begin(), report.recovery_order.end());
    if (nonzero == 0 && peeled.size() == report.spectrum.size()) {
        report.status = DecodeStatus::Success;
    } else {
        report.status = stalled ? DecodeStatus::NotASingletonLoop : DecodeStatus::ResidualLeft;
    }
    return report;
}

/// Noiseless peeling with the ratio test. Zero threshold defaults to
/// default_zero_threshold(bins) unless opts.ratio.zero_threshold is overridden
/// away from its default.
inline DecodeReport peel(FrontendOutput bins, const FfastPlan& plan, const PeelOptions& opts = {}) {
    RatioTestOptions ratio = opts.ratio;
    if (ratio.zero_threshold == RatioTestOptions{}.zero_threshold) ratio.zero_threshold = default_zero_threshold(bins);
    const Dims dims = plan.dims;
    auto classify = [&](const BinObservation& obs, const StageConfig& stage) { return ratio_test(obs, stage, dims, ratio); };
    return peel_with(std::move(bins), plan, classify, opts.max_rounds, ratio.zero_threshold, opts.check_invariants,
                     std::max(1e-9, 10 * ratio.zero_threshold));
}

/// Front-end followed by noiseless peeling.
inline DecodeReport decode(const SignalSource& source, const FfastPlan& plan, const PeelOptions& opts = {}) {
    if (plan.mode != Mode::Noiseless) throw Error(ErrorCode::InvalidArgument, "decode() needs a noiseless plan");
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t before = source.access_count();
    FrontendOutput bins = run_frontend(source, plan);
    const std::uint64_t touched = source.access_count() - before;
    DecodeReport report = peel(std::move(bins), plan, opts);
    report.samples_touched = touched;
    report.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return report;
}

}  // namespace ffast2d
