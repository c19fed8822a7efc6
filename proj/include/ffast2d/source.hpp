#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <utility>

#include "ffast2d/types.hpp"

namespace ffast2d {

/// Lazy spatial-sample accessor. Every sample() call increments a shared,
/// atomically updated access counter; copies share the counter.
class SignalSource {
public:
    using Sampler = std::function<Complex(std::uint64_t, std::uint64_t)>;

    SignalSource() = default;
    SignalSource(Dims dims, Sampler sampler)
        : dims_(dims), sampler_(std::move(sampler)), count_(std::make_shared<std::atomic<std::uint64_t>>(0)) {}

    const Dims& dims() const noexcept { return dims_; }

    Complex sample(std::uint64_t a, std::uint64_t b) const {
        count_->fetch_add(1, std::memory_order_relaxed);
        return sampler_(a, b);
    }

    std::uint64_t access_count() const noexcept { return count_ ? count_->load(std::memory_order_relaxed) : 0; }

private:
    Dims dims_;
    Sampler sampler_;
    std::shared_ptr<std::atomic<std::uint64_t>> count_;
};

/// Source that reads a dense grid.
inline SignalSource grid_source(Grid grid) {
    const Dims dims(grid.rows, grid.cols);
    auto shared = std::make_shared<const Grid>(std::move(grid));
    return SignalSource(dims, [shared](std::uint64_t a, std::uint64_t b) { return (*shared)(a, b); });
}

/// Source that is identically zero.
inline SignalSource zero_source(Dims dims) {
    return SignalSource(dims, [](std::uint64_t, std::uint64_t) { return Complex{}; });
}

/// Materializes a source into a dense grid (nx*ny accesses).
inline Grid materialize(const SignalSource& source) {
    Grid out(source.dims().nx, source.dims().ny);
    for (std::uint64_t a = 0; a < out.rows; ++a) {
        for (std::uint64_t b = 0; b < out.cols; ++b) out(a, b) = source.sample(a, b);
    }
    return out;
}

}  // namespace ffast2d
