#pragma once

// Reference computations that share no code with the library.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "ffast2d.hpp"

namespace testing_support {

using ffast2d::Complex;
using ffast2d::Grid;

inline constexpr long double kPiL = 3.141592653589793238462643383279502884L;

// Direct DFT with long double angles: X[u][v] = (1/N) sum x e^{-i 2 pi (au/nx + bv/ny)}.
inline Grid naive_dft(const Grid& x) {
    const std::size_t nx = x.rows, ny = x.cols;
    Grid out(nx, ny);
    for (std::size_t u = 0; u < nx; ++u) {
        for (std::size_t v = 0; v < ny; ++v) {
            long double re = 0, im = 0;
            for (std::size_t a = 0; a < nx; ++a) {
                for (std::size_t b = 0; b < ny; ++b) {
                    const long double ang = -2 * kPiL *
                        (static_cast<long double>((a * u) % nx) / nx + static_cast<long double>((b * v) % ny) / ny);
                    const long double c = std::cos(ang), s = std::sin(ang);
                    re += x(a, b).real() * c - x(a, b).imag() * s;
                    im += x(a, b).real() * s + x(a, b).imag() * c;
                }
            }
            out(u, v) = Complex(static_cast<double>(re / (nx * ny)), static_cast<double>(im / (nx * ny)));
        }
    }
    return out;
}

// Direct 1D DFT, unnormalized, long double angles.
inline std::vector<Complex> naive_dft_1d(const std::vector<Complex>& x) {
    const std::size_t n = x.size();
    std::vector<Complex> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        long double re = 0, im = 0;
        for (std::size_t t = 0; t < n; ++t) {
            const long double ang = -2 * kPiL * static_cast<long double>((t * k) % n) / n;
            re += x[t].real() * std::cos(ang) - x[t].imag() * std::sin(ang);
            im += x[t].real() * std::sin(ang) + x[t].imag() * std::cos(ang);
        }
        out[k] = Complex(static_cast<double>(re), static_cast<double>(im));
    }
    return out;
}

// Neumaier-compensated evaluation of sum_t X_t e^{+i 2 pi (a u_t/nx + b v_t/ny)}.
inline Complex compensated_sample(const ffast2d::SparseSpectrum& s, std::uint64_t a, std::uint64_t b) {
    const auto& d = s.dims();
    double sr = 0, cr = 0, si = 0, ci = 0;
    auto add = [](double& sum, double& comp, double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) comp += (sum - t) + x; else comp += (x - t) + sum;
        sum = t;
    };
    for (const auto& [c, value] : s) {
        const long double ang = 2 * kPiL *
            (static_cast<long double>((a * c.u) % d.nx) / d.nx + static_cast<long double>((b * c.v) % d.ny) / d.ny);
        const std::complex<long double> term =
            std::complex<long double>(value.real(), value.imag()) * std::complex<long double>(std::cos(ang), std::sin(ang));
        add(sr, cr, static_cast<double>(term.real()));
        add(si, ci, static_cast<double>(term.imag()));
    }
    return {sr + cr, si + ci};
}

// Dense synthesis through compensated_sample.
inline Grid reference_signal(const ffast2d::SparseSpectrum& s) {
    Grid g(s.dims().nx, s.dims().ny);
    for (std::size_t a = 0; a < g.rows; ++a)
        for (std::size_t b = 0; b < g.cols; ++b) g(a, b) = compensated_sample(s, a, b);
    return g;
}

inline Grid random_grid(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    Grid g(rows, cols);
    for (auto& c : g.data) c = Complex(nd(gen), nd(gen));
    return g;
}

inline double max_abs_diff(const Grid& a, const Grid& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

inline double max_abs(const Grid& a) {
    double m = 0;
    for (const auto& c : a.data) m = std::max(m, std::abs(c));
    return m;
}

// Sparse spectrum read off a dense grid, dropping entries at or below tol.
inline ffast2d::SparseSpectrum sparsify(const Grid& g, double tol) {
    ffast2d::SparseSpectrum s(ffast2d::Dims(g.rows, g.cols));
    for (std::size_t u = 0; u < g.rows; ++u)
        for (std::size_t v = 0; v < g.cols; ++v)
            if (std::abs(g(u, v)) > tol) s.set({u, v}, g(u, v));
    return s;
}

// The 6x6 four-coefficient example.
inline ffast2d::SparseSpectrum worked_spectrum() {
    ffast2d::SparseSpectrum s(ffast2d::Dims(6, 6));
    s.set({1, 3}, 7.0);
    s.set({2, 0}, 3.0);
    s.set({2, 3}, 5.0);
    s.set({4, 0}, 1.0);
    return s;
}

}  // namespace testing_support
