#pragma once

// Sparse 2D DFT for co-prime dimensions through a 1 x n view: the diagonal
// readout turns the 2D transform into a 1D transform of length n with no
// twiddles, which the general pipeline decodes on a single-row grid.

#include <optional>
#include <vector>

#include "ffast2d/crt.hpp"
#include "ffast2d/peeler.hpp"
#include "ffast2d/plan.hpp"
#include "ffast2d/robust.hpp"
#include "ffast2d/source.hpp"

namespace ffast2d {

/// Plan over the 1 x (nx*ny) view. The factor rules are those of build_plan.
inline FfastPlan build_coprime_plan(const Dims& dims, const std::vector<std::uint64_t>& factors, Regime regime,
                                    Mode mode = Mode::Noiseless, std::optional<RobustParams> robust = std::nullopt) {
    detail::require_coprime(dims);
    return build_plan(Dims(1, dims.n()), factors, regime, mode, std::move(robust));
}

/// view.sample(0, t) = source.sample(t mod nx, t mod ny).
inline SignalSource good_thomas_view(const SignalSource& source) {
    const Dims dims = source.dims();
    detail::require_coprime(dims);
    return SignalSource(Dims(1, dims.n()), [source, dims](std::uint64_t, std::uint64_t t) {
        return source.sample(t % dims.nx, t % dims.ny);
    });
}

/// Decodes through the 1D view and maps recovered locations back to (u, v).
/// The 1D transform of the view carries the same 1/N scaling as the 2D one, so
/// values pass through unchanged.
inline DecodeReport coprime_decode(const SignalSource& source, const Dims& dims, const FfastPlan& plan1d,
                                   const PeelOptions& opts = {}) {
    if (!(source.dims() == dims)) throw Error(ErrorCode::ShapeMismatch, "source and dims differ");
    const GoodThomasMap map(dims);
    if (!(plan1d.dims == Dims(1, dims.n()))) throw Error(ErrorCode::InvalidPlan, "plan1d must cover a 1 x nx*ny view");

    const SignalSource view = good_thomas_view(source);
    DecodeReport report = plan1d.mode == Mode::Robust ? robust_decode(view, plan1d) : decode(view, plan1d, opts);

    SparseSpectrum mapped(dims);
    for (const auto& [c, value] : report.spectrum) mapped.set(map.frequency_coord(c.v), value);
    report.spectrum = std::move(mapped);
    for (Coord& c : report.recovery_order) c = map.frequency_coord(c.v);
    return report;
}

inline SparseSpectrum coprime_sparse_dft(const SignalSource& source, const Dims& dims, const FfastPlan& plan1d) {
    return coprime_decode(source, dims, plan1d).spectrum;
}

}  // namespace ffast2d
