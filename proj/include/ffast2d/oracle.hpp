#pragma once

// Reference transforms and seeded instance generation.

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <set>
#include <vector>

#include "ffast2d/fft.hpp"
#include "ffast2d/plan.hpp"
#include "ffast2d/source.hpp"
#include "ffast2d/types.hpp"

namespace ffast2d {

/// Literal O(N^2) analysis X[u][v] = (1/N) sum x[a][b] e^{-i 2 pi (au/nx + bv/ny)}.
/// Phases come from exact integer residues, so large indices lose no accuracy.
inline Grid dense_dft_2d(const Grid& signal) {
    const Dims dims(signal.rows, signal.cols);
    const std::uint64_t n = dims.n();
    std::vector<Complex> table(n);
    for (std::uint64_t t = 0; t < n; ++t) table[t] = std::conj(unit_phase(t, n));
    Grid out(dims.nx, dims.ny);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::uint64_t u = 0; u < dims.nx; ++u) {
        for (std::uint64_t v = 0; v < dims.ny; ++v) {
            Complex acc{};
            for (std::uint64_t a = 0; a < dims.nx; ++a) {
                const std::uint64_t row = ((a * u) % dims.nx) * dims.ny;
                for (std::uint64_t b = 0; b < dims.ny; ++b) {
                    acc += signal(a, b) * table[(row + ((b * v) % dims.ny) * dims.nx) % n];
                }
            }
            out(u, v) = acc * scale;
        }
    }
    return out;
}

/// Same normalization as dense_dft_2d through the row-column FFT.
inline Grid fast_dft_2d(const Grid& signal) {
    Grid out = Fft2d(signal.rows, signal.cols).forward(signal);
    const double scale = 1.0 / static_cast<double>(signal.rows * signal.cols);
    for (Complex& c : out.data) c *= scale;
    return out;
}

/// Eq. (1) synthesis x[a][b] = sum X[u][v] e^{+i 2 pi (au/nx + bv/ny)} on the dense grid.
inline Grid synthesize(const SparseSpectrum& spectrum) {
    const Dims& dims = spectrum.dims();
    Grid out(dims.nx, dims.ny);
    for (std::uint64_t a = 0; a < dims.nx; ++a) {
        for (std::uint64_t b = 0; b < dims.ny; ++b) {
            Complex acc{};
            for (const auto& [c, value] : spectrum) {
                const std::uint64_t num = ((a * c.u) % dims.nx) * dims.ny + ((b * c.v) % dims.ny) * dims.nx;
                acc += value * unit_phase(num, dims.n());
            }
            out(a, b) = acc;
        }
    }
    return out;
}

/// X_s[i][j] = sum over u = i mod bins_x, v = j mod bins_y of X[u][v] e^{i 2 pi (u s1/nx + v s2/ny)}.
inline Grid alias_sum_oracle(const SparseSpectrum& spectrum, const StageConfig& stage, Shift shift) {
    const Dims& dims = spectrum.dims();
    if (dims.nx % stage.bins_x != 0 || dims.ny % stage.bins_y != 0) {
        throw Error(ErrorCode::InvalidPlan, "stage does not fit the spectrum dimensions");
    }
    Grid out(stage.bins_x, stage.bins_y);
    for (const auto& [c, value] : spectrum) {
        const std::uint64_t num = mul_mod(mul_mod(c.u, shift.s1, dims.nx), dims.ny, dims.n()) +
                                  mul_mod(mul_mod(c.v, shift.s2, dims.ny), dims.nx, dims.n());
        out(c.u % stage.bins_x, c.v % stage.bins_y) += value * unit_phase(num % dims.n(), dims.n());
    }
    return out;
}

/// Lazy Eq. (1) source, O(k) per sample through per-dimension twiddle tables.
inline SignalSource spectrum_source(const SparseSpectrum& spectrum) {
    struct Tables {
        std::vector<Complex> row;
        std::vector<Complex> col;
        std::vector<std::pair<Coord, Complex>> entries;
    };
    const Dims dims = spectrum.dims();
    auto t = std::make_shared<Tables>();
    t->row.resize(dims.nx);
    t->col.resize(dims.ny);
    for (std::uint64_t i = 0; i < dims.nx; ++i) t->row[i] = unit_phase(i, dims.nx);
    for (std::uint64_t i = 0; i < dims.ny; ++i) t->col[i] = unit_phase(i, dims.ny);
    t->entries.assign(spectrum.begin(), spectrum.end());
    return SignalSource(dims, [t, dims](std::uint64_t a, std::uint64_t b) {
        Complex acc{};
        for (const auto& [c, value] : t->entries) {
            acc += value * t->row[mul_mod(a, c.u, dims.nx)] * t->col[mul_mod(b, c.v, dims.ny)];
        }
        return acc;
    });
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform in [0, 1) with 53 random bits; identical on every platform.
inline double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

// Circular complex Gaussian with E|z|^2 = var, from two uniforms.
inline Complex circular_gaussian(double u1, double u2, double var) {
    const double radius = std::sqrt(-var * std::log(1.0 - u1));
    return std::polar(radius, kTwoPi * u2);
}

}  // namespace detail

struct ValueModel {
    enum class Kind { Constellation, UnitCircle, ComplexGaussian };

    Kind kind = Kind::UnitCircle;
    double rho = 20.0;      ///< constellation SNR (linear)
    std::uint32_t m1 = 2;   ///< magnitudes sqrt(rho)/2 + k sqrt(rho)/m1, k = 0..m1
    std::uint32_t m2 = 8;   ///< phases 2 pi k / m2, k = 0..m2-1

    static ValueModel constellation(double rho, std::uint32_t m1, std::uint32_t m2) {
        return {Kind::Constellation, rho, m1, m2};
    }
    static ValueModel unit_circle() { return {Kind::UnitCircle}; }
    static ValueModel complex_gaussian() { return {Kind::ComplexGaussian}; }
};

inline const char* to_string(ValueModel::Kind k) {
    switch (k) {
        case ValueModel::Kind::Constellation: return "constellation";
        case ValueModel::Kind::UnitCircle: return "unit-circle";
        case ValueModel::Kind::ComplexGaussian: return "gaussian";
    }
    return "unknown";
}

struct Instance {
    Dims dims;
    SparseSpectrum truth;
    SignalSource source;
    std::uint64_t seed = 0;
};

/// Instance with an explicit spectrum.
inline Instance make_instance(const SparseSpectrum& truth, std::uint64_t seed = 0) {
    return {truth.dims(), truth, spectrum_source(truth), seed};
}

/// k distinct locations drawn uniformly (Floyd's algorithm) and values from the
/// model, all from one mt19937_64 stream seeded with seed.
inline Instance gen_instance(const Dims& dims, std::uint64_t k, const ValueModel& model, std::uint64_t seed) {
    const std::uint64_t n = dims.n();
    if (k > n) throw Error(ErrorCode::KTooLarge, "k exceeds nx*ny");
    if (model.kind == ValueModel::Kind::Constellation && (model.m1 == 0 || model.m2 == 0 || !(model.rho > 0.0))) {
        throw Error(ErrorCode::InvalidArgument, "constellation needs rho > 0, m1 >= 1, m2 >= 1");
    }
    std::mt19937_64 gen(seed);
    auto below = [&gen](std::uint64_t bound) {
        return static_cast<std::uint64_t>(detail::to_unit(gen()) * static_cast<double>(bound)) % bound;
    };
    std::set<std::uint64_t> support;
    for (std::uint64_t j = n - k; j < n; ++j) {
        const std::uint64_t t = below(j + 1);
        if (!support.insert(t).second) support.insert(j);
    }
    SparseSpectrum truth(dims);
    for (std::uint64_t idx : support) {
        Complex value;
        switch (model.kind) {
            case ValueModel::Kind::Constellation: {
                const double root = std::sqrt(model.rho);
                const double mag = root / 2.0 + static_cast<double>(below(model.m1 + 1)) * root / model.m1;
                value = std::polar(mag, kTwoPi * static_cast<double>(below(model.m2)) / model.m2);
                break;
            }
            case ValueModel::Kind::UnitCircle: value = std::polar(1.0, kTwoPi * detail::to_unit(gen())); break;
            case ValueModel::Kind::ComplexGaussian: {
                const double u1 = detail::to_unit(gen());
                value = detail::circular_gaussian(u1, detail::to_unit(gen()), 1.0);
                break;
            }
        }
        truth.set({idx / dims.ny, idx % dims.ny}, value);
    }
    return make_instance(truth, seed);
}

/// Adds i.i.d. circular complex Gaussian noise of variance sigma2 keyed on
/// (seed, a, b): re-reading a coordinate returns the same noisy value.
inline SignalSource add_noise(const SignalSource& source, double sigma2, std::uint64_t seed) {
    if (!(sigma2 >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma2 must be non-negative");
    if (sigma2 == 0.0) return SignalSource(source.dims(), [source](std::uint64_t a, std::uint64_t b) { return source.sample(a, b); });
    return SignalSource(source.dims(), [source, sigma2, seed](std::uint64_t a, std::uint64_t b) {
        const std::uint64_t key = detail::splitmix64(detail::splitmix64(detail::splitmix64(seed) ^ a) ^ b);
        const double u1 = detail::to_unit(key);
        const double u2 = detail::to_unit(detail::splitmix64(key));
        return source.sample(a, b) + detail::circular_gaussian(u1, u2, sigma2);
    });
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Mean |X|^2 over the non-zero coefficients.
inline double mean_power(const SparseSpectrum& spectrum) {
    if (spectrum.empty()) return 0.0;
    double total = 0.0;
    for (const auto& [c, value] : spectrum) total += std::norm(value);
    return total / static_cast<double>(spectrum.size());
}

/// Per-sample noise variance giving rho = mean |X|^2 / sigma^2.
inline double noise_var_for_snr(const SparseSpectrum& truth, double rho) {
    if (!(rho > 0.0)) throw Error(ErrorCode::InvalidArgument, "rho must be positive");
    return mean_power(truth) / rho;
}

}  // namespace ffast2d
