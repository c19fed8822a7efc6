#pragma once

// Sampling front-end. For every stage and delay chain, fetch the shifted,
// subsampled grid, take its small 2D DFT and regroup the outputs into bins.
//
// Normalization: big transform X = (1/N) sum x e^{-i...}, small transform
// X_s = (1/B) sum x_s e^{-i...}. With x synthesized as sum_t X_t e^{+i...},
// each small-DFT output is the plain sum of the coefficients aliased into it.

#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "ffast2d/fft.hpp"
#include "ffast2d/plan.hpp"
#include "ffast2d/source.hpp"
#include "ffast2d/types.hpp"

namespace ffast2d {

/// Check-node payload: one value per delay chain of the owning stage.
struct BinObservation {
    std::size_t stage = 0;
    std::uint64_t i = 0;
    std::uint64_t j = 0;
    std::vector<Complex> values;
};

/// out[a][b] = x[(a*sub_x + s1) mod nx][(b*sub_y + s2) mod ny].
inline Grid subsample_shifted(const SignalSource& source, const StageConfig& stage, Shift shift) {
    const Dims& dims = source.dims();
    Grid out(stage.bins_x, stage.bins_y);
    for (std::uint64_t a = 0; a < stage.bins_x; ++a) {
        const std::uint64_t row = (a * stage.sub_x + shift.s1) % dims.nx;
        for (std::uint64_t b = 0; b < stage.bins_y; ++b) {
            out(a, b) = source.sample(row, (b * stage.sub_y + shift.s2) % dims.ny);
        }
    }
    return out;
}

namespace detail {

// Open-addressing map from sample key to value; keys are inserted once.
class SampleTable {
public:
    explicit SampleTable(std::size_t expected) {
        std::size_t cap = 16;
        while (cap < 2 * expected) cap <<= 1;
        keys_.assign(cap, kEmpty);
        values_.resize(cap);
        mask_ = cap - 1;
    }

    // Returns the value slot for key, inserting an empty one if absent.
    Complex* slot(std::uint64_t key, bool& inserted) {
        std::size_t i = hash(key);
        while (keys_[i] != kEmpty && keys_[i] != key) i = (i + 1) & mask_;
        inserted = keys_[i] == kEmpty;
        keys_[i] = key;
        return &values_[i];
    }

    const Complex* find(std::uint64_t key) const {
        for (std::size_t i = hash(key);; i = (i + 1) & mask_) {
            if (keys_[i] == key) return &values_[i];
            if (keys_[i] == kEmpty) return nullptr;
        }
    }

private:
    static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};
    std::size_t hash(std::uint64_t key) const { return static_cast<std::size_t>((key * 0x9E3779B97F4A7C15ull) >> 32) & mask_; }

    std::vector<std::uint64_t> keys_;
    std::vector<Complex> values_;
    std::size_t mask_ = 0;
};

}  // namespace detail

/// Evaluates every sample the plan reads once and serves them from a table,
/// so later decodes pay O(1) per sample. Other coordinates fall through to
/// the original source. The returned source has its own access counter.
inline SignalSource prefetched_source(const SignalSource& source, const FfastPlan& plan) {
    const Dims dims = source.dims();
    auto table = std::make_shared<detail::SampleTable>(plan_sample_budget(plan));
    for (const StageConfig& stage : plan.stages) {
        for (const Shift& shift : stage.shifts) {
            for (std::uint64_t a = 0; a < stage.bins_x; ++a) {
                const std::uint64_t row = (a * stage.sub_x + shift.s1) % dims.nx;
                for (std::uint64_t b = 0; b < stage.bins_y; ++b) {
                    const std::uint64_t col = (b * stage.sub_y + shift.s2) % dims.ny;
                    bool inserted = false;
                    Complex* value = table->slot(row * dims.ny + col, inserted);
                    if (inserted) *value = source.sample(row, col);
                }
            }
        }
    }
    return SignalSource(dims, [table, source, dims](std::uint64_t a, std::uint64_t b) {
        const Complex* value = table->find(a * dims.ny + b);
        return value ? *value : source.sample(a, b);
    });
}

namespace detail {

// Per-thread transform plans, reused across decodes of the same stage shape.
inline const Fft2d& cached_fft2d(std::size_t rows, std::size_t cols) {
    thread_local std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<Fft2d>> cache;
    auto& slot = cache[{rows, cols}];
    if (!slot) slot = std::make_unique<Fft2d>(rows, cols);
    return *slot;
}

}  // namespace detail

/// Normalized small spectra of one stage, one per delay chain.
inline std::vector<Grid> stage_spectra(const SignalSource& source, const StageConfig& stage) {
    const Fft2d& fft = detail::cached_fft2d(stage.bins_x, stage.bins_y);
    const double scale = 1.0 / static_cast<double>(stage.bin_count());
    std::vector<Grid> out;
    out.reserve(stage.shifts.size());
    for (const Shift& shift : stage.shifts) {
        Grid spectrum = fft.forward(subsample_shifted(source, stage, shift));
        for (Complex& c : spectrum.data) c *= scale;
        out.push_back(std::move(spectrum));
    }
    return out;
}

/// Regroups per-chain spectra into bins ordered by row-major label bins_y*i + j.
inline std::vector<BinObservation> assemble_bins(std::size_t stage_index, const std::vector<Grid>& spectra) {
    if (spectra.empty()) return {};
    const std::size_t rows = spectra.front().rows;
    const std::size_t cols = spectra.front().cols;
    for (const Grid& g : spectra) {
        if (g.rows != rows || g.cols != cols) throw Error(ErrorCode::ShapeMismatch, "chain spectra differ in shape");
    }
    std::vector<BinObservation> out(rows * cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            BinObservation& obs = out[i * cols + j];
            obs.stage = stage_index;
            obs.i = i;
            obs.j = j;
            obs.values.reserve(spectra.size());
            for (const Grid& g : spectra) obs.values.push_back(g(i, j));
        }
    }
    return out;
}

/// Factor multiplying X[u][v] in the chain with this shift:
/// e^{i 2 pi (u s1 / nx + v s2 / ny)}.
inline Complex chain_weight(const Dims& dims, Coord c, Shift s) {
    const std::uint64_t n = dims.n();
    const std::uint64_t num = (mul_mod(mul_mod(c.u, s.s1, dims.nx), dims.ny, n) +
                               mul_mod(mul_mod(c.v, s.s2, dims.ny), dims.nx, n)) % n;
    return unit_phase(num, n);
}

inline std::vector<Complex> chain_weights(const Dims& dims, Coord c, const std::vector<Shift>& shifts) {
    std::vector<Complex> out;
    out.reserve(shifts.size());
    for (const Shift& s : shifts) out.push_back(chain_weight(dims, c, s));
    return out;
}

/// Edge of the sparse graph: the bin a coefficient aliases into and its
/// per-chain weights.
struct AliasEdge {
    std::uint64_t i = 0;
    std::uint64_t j = 0;
    std::uint64_t label = 0;
    std::vector<Complex> weights;
};

inline AliasEdge alias_support_map(const Dims& dims, const StageConfig& stage, Coord c) {
    if (c.u >= dims.nx || c.v >= dims.ny) throw Error(ErrorCode::InvalidArgument, "location out of range");
    AliasEdge edge;
    edge.i = c.u % stage.bins_x;
    edge.j = c.v % stage.bins_y;
    edge.label = stage.bin_label(edge.i, edge.j);
    edge.weights = chain_weights(dims, c, stage.shifts);
    return edge;
}

/// All bins of all stages.
struct FrontendOutput {
    std::vector<std::vector<BinObservation>> stages;

    std::size_t bin_count() const noexcept {
        std::size_t total = 0;
        for (const auto& s : stages) total += s.size();
        return total;
    }
};

/// Runs every stage of the plan; touches exactly plan_sample_budget(plan) samples.
inline FrontendOutput run_frontend(const SignalSource& source, const FfastPlan& plan) {
    if (!(source.dims() == plan.dims)) throw Error(ErrorCode::ShapeMismatch, "source and plan dimensions differ");
    FrontendOutput out;
    out.stages.reserve(plan.stages.size());
    for (std::size_t s = 0; s < plan.stages.size(); ++s) {
        out.stages.push_back(assemble_bins(s, stage_spectra(source, plan.stages[s])));
    }
    return out;
}

}  // namespace ffast2d
