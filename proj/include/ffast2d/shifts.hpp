#pragma once

// Delay-chain layouts: the noiseless anchor/row/column triple and the
// separable random-offset pair design used by the noise-robust decoder.

#include <bit>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "ffast2d/types.hpp"

namespace ffast2d {

/// Parameters of the noise-robust front-end and singleton estimator.
struct RobustParams {
    std::uint32_t chains_per_dim = 1;  ///< independent pair sets per dimension
    std::uint32_t reps = 1;            ///< pairs per refinement level within a set
    double noise_var = 0.0;            ///< per-sample noise variance sigma^2
    double gamma_zero = 1.0;
    double gamma_single = 1.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (chains_per_dim == 0) throw Error(ErrorCode::InvalidArgument, "chains_per_dim must be >= 1");
        if (reps == 0) throw Error(ErrorCode::InvalidArgument, "reps must be >= 1");
        if (!(noise_var >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise_var must be >= 0");
        if (!(gamma_zero > 0.0) || !(gamma_single > 0.0)) throw Error(ErrorCode::InvalidArgument, "thresholds must be positive");
    }

    friend bool operator==(const RobustParams&, const RobustParams&) = default;
};

/// Number of refinement levels for one dimension: ceil(log2(n)).
inline std::uint32_t refinement_levels(std::uint64_t n) {
    return n <= 1 ? 0 : static_cast<std::uint32_t>(std::bit_width(n - 1));
}

/// [(0,0), (1,0), (0,1)], dropping the chain of any dimension of size 1.
inline std::size_t noiseless_shift_count(const Dims& dims) { return 1 + (dims.nx > 1 ? 1 : 0) + (dims.ny > 1 ? 1 : 0); }

/// True when shifts equal noiseless_shifts(dims).
inline bool is_noiseless_layout(const std::vector<Shift>& shifts, const Dims& dims) {
    if (shifts.size() != noiseless_shift_count(dims) || shifts[0] != Shift{0, 0}) return false;
    std::size_t next = 1;
    if (dims.nx > 1 && shifts[next++] != Shift{1, 0}) return false;
    if (dims.ny > 1 && shifts[next] != Shift{0, 1}) return false;
    return true;
}

inline std::vector<Shift> noiseless_shifts(const Dims& dims) {
    std::vector<Shift> out{{0, 0}};
    if (dims.nx > 1) out.push_back({1, 0});
    if (dims.ny > 1) out.push_back({0, 1});
    return out;
}

/// Shift count of a robust layout.
inline std::size_t robust_shift_count(const Dims& dims, const RobustParams& params) {
    const std::size_t levels = refinement_levels(dims.nx) + refinement_levels(dims.ny);
    return 1 + 2 * static_cast<std::size_t>(params.chains_per_dim) * params.reps * levels;
}

/// Anchor (0,0), then for the row dimension and then the column dimension:
/// for each pair set, each level j < ceil(log2 n_dim) and each repetition, the
/// pair (r, r + 2^j) with a fresh random offset r, placed in that dimension only.
///
/// Offsets are redrawn a bounded number of times to keep all shifts distinct;
/// when the dimension is too small for that, a duplicate is accepted.
inline std::vector<Shift> design_shifts(const Dims& dims, const RobustParams& params) {
    params.validate();
    std::mt19937_64 rng(params.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<Shift> out{{0, 0}};
    std::set<Shift> used{{0, 0}};

    auto emit_dimension = [&](std::uint64_t size, bool rows) {
        const std::uint32_t levels = refinement_levels(size);
        auto make = [&](std::uint64_t s) { return rows ? Shift{s % size, 0} : Shift{0, s % size}; };
        for (std::uint32_t set = 0; set < params.chains_per_dim; ++set) {
            for (std::uint32_t j = 0; j < levels; ++j) {
                const std::uint64_t step = std::uint64_t{1} << j;
                for (std::uint32_t r = 0; r < params.reps; ++r) {
                    Shift first{}, second{};
                    for (int attempt = 0; attempt < 64; ++attempt) {
                        const std::uint64_t offset = rng() % size;
                        first = make(offset);
                        second = make(offset + step);
                        if (!used.count(first) && !used.count(second)) break;
                    }
                    used.insert(first);
                    used.insert(second);
                    out.push_back(first);
                    out.push_back(second);
                }
            }
        }
    };
    emit_dimension(dims.nx, true);
    emit_dimension(dims.ny, false);
    return out;
}

}  // namespace ffast2d
