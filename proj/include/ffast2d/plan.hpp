#pragma once

// CRT-guided measurement design: which subsampling period each stage uses and
// which delay chains feed it.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ffast2d/crt.hpp"
#include "ffast2d/shifts.hpp"
#include "ffast2d/types.hpp"

namespace ffast2d {

enum class Regime { VerySparse, LessSparse };
enum class Mode { Noiseless, Robust };

inline const char* to_string(Mode m) { return m == Mode::Noiseless ? "noiseless" : "robust"; }
inline const char* to_string(Regime r) { return r == Regime::VerySparse ? "very-sparse" : "less-sparse"; }

/// One subsampling stage: period (sub_x, sub_y), a bins_x x bins_y grid of
/// bins, and the delay chains that feed it.
struct StageConfig {
    std::uint64_t sub_x = 1;
    std::uint64_t sub_y = 1;
    std::uint64_t bins_x = 1;
    std::uint64_t bins_y = 1;
    std::vector<Shift> shifts;

    StageConfig() = default;
    StageConfig(const Dims& dims, std::uint64_t period_x, std::uint64_t period_y, std::vector<Shift> chain_shifts)
        : sub_x(period_x), sub_y(period_y), shifts(std::move(chain_shifts)) {
        if (sub_x == 0 || sub_y == 0 || dims.nx % sub_x != 0 || dims.ny % sub_y != 0) {
            throw Error(ErrorCode::InvalidPlan, "stage period must divide the signal dimension");
        }
        bins_x = dims.nx / sub_x;
        bins_y = dims.ny / sub_y;
    }

    std::uint64_t bin_count() const noexcept { return bins_x * bins_y; }

    /// Row-major bin label.
    std::uint64_t bin_label(std::uint64_t i, std::uint64_t j) const noexcept { return bins_y * i + j; }

    friend bool operator==(const StageConfig&, const StageConfig&) = default;
};

struct FfastPlan {
    Dims dims;
    std::vector<StageConfig> stages;
    Mode mode = Mode::Noiseless;
    std::optional<RobustParams> robust;

    std::size_t stage_count() const noexcept { return stages.size(); }

    /// Sum over stages of bins per stage, i.e. the number of check nodes.
    std::uint64_t total_bins() const noexcept {
        std::uint64_t total = 0;
        for (const auto& s : stages) total += s.bin_count();
        return total;
    }

    /// Average bins per stage; eta = average_bins() / k.
    double average_bins() const noexcept {
        return stages.empty() ? 0.0 : static_cast<double>(total_bins()) / static_cast<double>(stages.size());
    }

    friend bool operator==(const FfastPlan&, const FfastPlan&) = default;
};

/// m = sum_i |shifts_i| * bins_x,i * bins_y,i. Samples shared by several stages
/// are counted once per stage.
inline std::uint64_t plan_sample_budget(const FfastPlan& plan) {
    std::uint64_t total = 0;
    for (const auto& s : plan.stages) total += s.shifts.size() * s.bin_count();
    return total;
}

/// Row/column split of one CRT factor: rows * cols == factor.
struct FactorSplit {
    std::uint64_t rows = 1;
    std::uint64_t cols = 1;
};

namespace detail {

inline void require_pairwise_coprime(const std::vector<std::uint64_t>& factors) {
    for (std::size_t i = 0; i < factors.size(); ++i) {
        for (std::size_t j = i + 1; j < factors.size(); ++j) {
            if (std::gcd(factors[i], factors[j]) != 1) {
                throw Error(ErrorCode::NotCoprime, "factors " + std::to_string(factors[i]) + " and " +
                                                       std::to_string(factors[j]) + " share a divisor");
            }
        }
    }
}

inline std::vector<std::uint64_t> divisors(std::uint64_t value) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t d = 1; d * d <= value; ++d) {
        if (value % d == 0) {
            out.push_back(d);
            if (d * d != value) out.push_back(value / d);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Depth-first over divisor splits, smallest row part first.
inline bool search_splits(const std::vector<std::uint64_t>& factors, std::size_t index, std::uint64_t rows_left,
                          std::uint64_t cols_left, std::vector<FactorSplit>& out) {
    if (index == factors.size()) return rows_left == 1 && cols_left == 1;
    for (std::uint64_t r : divisors(factors[index])) {
        const std::uint64_t c = factors[index] / r;
        if (rows_left % r != 0 || cols_left % c != 0) continue;
        out[index] = {r, c};
        if (search_splits(factors, index + 1, rows_left / r, cols_left / c, out)) return true;
    }
    return false;
}

}  // namespace detail

/// First valid (lexicographic) apportioning of each factor to rows and columns
/// such that the row parts multiply to nx and the column parts to ny.
inline std::vector<FactorSplit> split_factors(const Dims& dims, const std::vector<std::uint64_t>& factors) {
    std::vector<FactorSplit> out(factors.size());
    if (!detail::search_splits(factors, 0, dims.nx, dims.ny, out)) {
        throw Error(ErrorCode::NoValidSplit, "factors cannot be apportioned to the row and column dimensions");
    }
    return out;
}

/// Builds the CRT-guided plan for pairwise co-prime factors with product n.
///
/// LessSparse: stage i is subsampled by the split of factor i, so its bin count
/// is the product of every other factor. VerySparse: stage i keeps exactly
/// factor i as bins and is subsampled by the split of n / factor_i.
/// For d == 2 the two regimes produce the same stages in swapped order.
inline FfastPlan build_plan(const Dims& dims, const std::vector<std::uint64_t>& factors, Regime regime,
                            Mode mode = Mode::Noiseless, std::optional<RobustParams> robust = std::nullopt) {
    if (factors.size() < 2) throw Error(ErrorCode::InvalidArgument, "a plan needs at least two factors");
    for (std::uint64_t f : factors) {
        if (f == 0) throw Error(ErrorCode::InvalidArgument, "factors must be positive");
    }
    detail::require_pairwise_coprime(factors);
    std::uint64_t product = 1;
    for (std::uint64_t f : factors) product = detail::checked_mul(product, f);
    if (product != dims.n()) {
        throw Error(ErrorCode::ProductMismatch,
                    "factor product " + std::to_string(product) + " != nx*ny = " + std::to_string(dims.n()));
    }
    if (std::find(factors.begin(), factors.end(), std::uint64_t{1}) != factors.end()) {
        throw Error(ErrorCode::NoValidSplit, "a factor of 1 yields a full-sampling or single-bin stage");
    }
    const auto splits = split_factors(dims, factors);

    std::vector<Shift> shifts;
    if (mode == Mode::Noiseless) {
        shifts = noiseless_shifts(dims);
    } else {
        if (!robust) throw Error(ErrorCode::InvalidArgument, "robust mode requires RobustParams");
        shifts = design_shifts(dims, *robust);
    }

    FfastPlan plan;
    plan.dims = dims;
    plan.mode = mode;
    if (mode == Mode::Robust) plan.robust = robust;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        const FactorSplit s = splits[i];
        if (regime == Regime::LessSparse) {
            plan.stages.emplace_back(dims, s.rows, s.cols, shifts);
        } else {
            plan.stages.emplace_back(dims, dims.nx / s.rows, dims.ny / s.cols, shifts);
        }
    }
    return plan;
}

/// Pairwise co-prime factors of nx*ny for a d-stage plan: prime powers of n,
/// largest first, each assigned to the currently smallest factor.
inline std::vector<std::uint64_t> balanced_factors(const Dims& dims, std::size_t d) {
    if (d < 2) throw Error(ErrorCode::InvalidArgument, "a plan needs at least two factors");
    std::vector<std::uint64_t> powers;
    std::uint64_t rest = dims.n();
    for (std::uint64_t p = 2; p * p <= rest; ++p) {
        if (rest % p != 0) continue;
        std::uint64_t q = 1;
        while (rest % p == 0) {
            rest /= p;
            q *= p;
        }
        powers.push_back(q);
    }
    if (rest > 1) powers.push_back(rest);
    if (powers.size() < d) throw Error(ErrorCode::NoValidSplit, "nx*ny has fewer distinct primes than stages");
    std::sort(powers.rbegin(), powers.rend());
    std::vector<std::uint64_t> factors(d, 1);
    for (std::uint64_t q : powers) *std::min_element(factors.begin(), factors.end()) *= q;
    return factors;
}

/// Which CRT pattern a validated plan follows, with the recovered factors.
struct PlanStructure {
    Regime regime = Regime::LessSparse;
    std::vector<std::uint64_t> factors;
};

namespace detail {

inline bool coprime_with_product(const std::vector<std::uint64_t>& factors, std::uint64_t n) {
    std::uint64_t product = 1;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (factors[i] <= 1) return false;
        for (std::size_t j = 0; j < i; ++j) {
            if (std::gcd(factors[i], factors[j]) != 1) return false;
        }
        if (__builtin_mul_overflow(product, factors[i], &product)) return false;
    }
    return product == n;
}

inline void validate_shift_layout(const FfastPlan& plan, const StageConfig& stage) {
    if (stage.shifts.empty() || stage.shifts.front() != Shift{0, 0}) {
        throw Error(ErrorCode::InvalidPlan, "first shift of every stage must be (0,0)");
    }
    for (const Shift& s : stage.shifts) {
        if (s.s1 >= plan.dims.nx || s.s2 >= plan.dims.ny) throw Error(ErrorCode::InvalidPlan, "shift not reduced mod dims");
    }
    if (plan.mode == Mode::Noiseless) {
        std::set<Shift> seen(stage.shifts.begin(), stage.shifts.end());
        if (seen.size() != stage.shifts.size()) throw Error(ErrorCode::InvalidPlan, "shifts must be distinct");
        if (stage.shifts != noiseless_shifts(plan.dims)) {
            throw Error(ErrorCode::WrongShiftLayout, "noiseless stages use the (0,0),(1,0),(0,1) layout");
        }
    } else {
        if (!plan.robust) throw Error(ErrorCode::InvalidPlan, "robust plan without RobustParams");
        if (stage.shifts.size() != robust_shift_count(plan.dims, *plan.robust)) {
            throw Error(ErrorCode::WrongShiftLayout, "robust shift count does not match RobustParams");
        }
    }
}

}  // namespace detail

/// Checks every plan invariant and reports the CRT pattern it follows. Factors
/// are inferred from bin counts: VerySparse when the bin counts themselves are
/// pairwise co-prime with product n, LessSparse when n / bins are.
inline PlanStructure validate_plan(const FfastPlan& plan) {
    if (plan.stages.size() < 2) throw Error(ErrorCode::InvalidPlan, "a plan needs at least two stages");
    const std::uint64_t n = plan.dims.n();
    for (const auto& stage : plan.stages) {
        if (stage.sub_x == 0 || stage.sub_y == 0 || plan.dims.nx % stage.sub_x != 0 || plan.dims.ny % stage.sub_y != 0) {
            throw Error(ErrorCode::InvalidPlan, "stage period must divide the signal dimension");
        }
        if (stage.bins_x != plan.dims.nx / stage.sub_x || stage.bins_y != plan.dims.ny / stage.sub_y) {
            throw Error(ErrorCode::InvalidPlan, "stage bin grid inconsistent with its period");
        }
        detail::validate_shift_layout(plan, stage);
    }
    if (plan.mode == Mode::Robust) plan.robust->validate();

    std::vector<std::uint64_t> bins, complements;
    for (const auto& stage : plan.stages) {
        bins.push_back(stage.bin_count());
        complements.push_back(n / stage.bin_count());
    }
    if (detail::coprime_with_product(complements, n)) return {Regime::LessSparse, complements};
    if (detail::coprime_with_product(bins, n)) return {Regime::VerySparse, bins};
    throw Error(ErrorCode::InvalidPlan, "stage bin counts do not follow a co-prime CRT pattern");
}

}  // namespace ffast2d
