#pragma once

// Dense forward DFT engine for the small per-stage transforms.
//
//   out[k] = sum_t in[t] * exp(-2*pi*i*t*k/n)      (unnormalized)
//
// Lengths whose prime factors are all <= kMaxDirectRadix use a recursive
// mixed-radix Cooley-Tukey; anything else goes through Bluestein's chirp-z
// with a power-of-two convolution.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "ffast2d/types.hpp"

namespace ffast2d {

class Fft1d {
public:
    static constexpr std::uint64_t kMaxDirectRadix = 64;

    explicit Fft1d(std::size_t n) : n_(n) {
        if (n_ == 0) throw Error(ErrorCode::InvalidArgument, "FFT length must be positive");
        std::size_t rest = n_;
        for (std::size_t p = 2; p * p <= rest; ++p) {
            while (rest % p == 0) {
                factors_.push_back(p);
                rest /= p;
            }
        }
        if (rest > 1) factors_.push_back(rest);
        // Larger radices first keeps the recursion shallow at the leaves.
        std::sort(factors_.begin(), factors_.end(), std::greater<>());

        const bool direct = factors_.empty() || factors_.front() <= kMaxDirectRadix;
        if (direct) {
            twiddles_.resize(n_);
            for (std::size_t k = 0; k < n_; ++k) twiddles_[k] = std::conj(unit_phase(k, n_));
        } else {
            init_bluestein();
        }
    }

    std::size_t size() const noexcept { return n_; }

    /// Out-of-place transform; in and out must not alias.
    void forward(std::span<const Complex> in, std::span<Complex> out) const {
        if (in.size() != n_ || out.size() != n_) throw Error(ErrorCode::ShapeMismatch, "FFT buffer length mismatch");
        if (n_ == 1) {
            out[0] = in[0];
            return;
        }
        if (bluestein_) {
            run_bluestein(in, out);
            return;
        }
        thread_local std::vector<Complex> scratch(kMaxDirectRadix);
        recurse(in.data(), 1, out.data(), n_, 0, scratch);
    }

    std::vector<Complex> forward(std::span<const Complex> in) const {
        std::vector<Complex> out(n_);
        forward(in, out);
        return out;
    }

private:
    // Plain product without the NaN recovery path of operator*.
    static Complex mul(Complex a, Complex b) {
        return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
    }

    struct Bluestein {
        std::size_t m = 0;
        std::vector<Complex> chirp;         // exp(-i*pi*t^2/n), t < n
        std::vector<Complex> kernel_fft;    // FFT_m of conj(chirp) wrapped to length m
        std::unique_ptr<Fft1d> inner;
    };

    void recurse(const Complex* in, std::size_t stride, Complex* out, std::size_t len, std::size_t level,
                 std::vector<Complex>& scratch) const {
        const std::size_t radix = factors_[level];
        const std::size_t m = len / radix;
        const std::size_t tw_step = n_ / len;
        const std::size_t root_step = n_ / radix;
        if (m == 1) {
            for (std::size_t t = 0; t < radix; ++t) scratch[t] = in[t * stride];
            small_dft(scratch.data(), radix, root_step, out, 1);
            return;
        }
        for (std::size_t q = 0; q < radix; ++q) recurse(in + q * stride, stride * radix, out + q * m, m, level + 1, scratch);
        // Butterfly: out[k + r*m] = sum_q W_len^{q(k + r m)} sub_q[k].
        for (std::size_t k = 0; k < m; ++k) {
            for (std::size_t q = 0; q < radix; ++q) scratch[q] = mul(out[q * m + k], twiddles_[(q * k) * tw_step]);
            small_dft(scratch.data(), radix, root_step, out + k, m);
        }
    }

    // out[r*out_stride] = sum_q x[q] W_radix^{qr}. Outputs r and radix-r share
    // conjugate twiddles, so each pair costs one pass over x.
    void small_dft(const Complex* x, std::size_t radix, std::size_t root_step, Complex* out, std::size_t out_stride) const {
        Complex sum = x[0];
        for (std::size_t q = 1; q < radix; ++q) sum += x[q];
        out[0] = sum;
        for (std::size_t r = 1; 2 * r <= radix; ++r) {
            double ac = x[0].real(), bs = 0.0, as = 0.0, bc = x[0].imag();
            std::size_t e = r;
            for (std::size_t q = 1; q < radix; ++q) {
                const Complex w = twiddles_[e * root_step];
                ac += x[q].real() * w.real();
                bs += x[q].imag() * w.imag();
                as += x[q].real() * w.imag();
                bc += x[q].imag() * w.real();
                e += r;
                if (e >= radix) e -= radix;
            }
            out[r * out_stride] = Complex(ac - bs, as + bc);
            if (2 * r < radix) out[(radix - r) * out_stride] = Complex(ac + bs, bc - as);
        }
    }

    void init_bluestein() {
        auto b = std::make_unique<Bluestein>();
        std::size_t m = 1;
        while (m < 2 * n_ - 1) m <<= 1;
        b->m = m;
        b->chirp.resize(n_);
        const std::uint64_t two_n = 2 * static_cast<std::uint64_t>(n_);
        for (std::size_t t = 0; t < n_; ++t) {
            const std::uint64_t sq = mul_mod(t, t, two_n);
            b->chirp[t] = std::conj(unit_phase(sq, two_n));
        }
        std::vector<Complex> kernel(m);
        kernel[0] = std::conj(b->chirp[0]);
        for (std::size_t t = 1; t < n_; ++t) {
            kernel[t] = std::conj(b->chirp[t]);
            kernel[m - t] = std::conj(b->chirp[t]);
        }
        b->inner = std::make_unique<Fft1d>(m);
        b->kernel_fft = b->inner->forward(kernel);
        bluestein_ = std::move(b);
    }

    void run_bluestein(std::span<const Complex> in, std::span<Complex> out) const {
        const auto& b = *bluestein_;
        std::vector<Complex> a(b.m);
        for (std::size_t t = 0; t < n_; ++t) a[t] = in[t] * b.chirp[t];
        std::vector<Complex> fa = b.inner->forward(a);
        for (std::size_t i = 0; i < b.m; ++i) fa[i] = std::conj(fa[i] * b.kernel_fft[i]);
        // Inverse via conj(FFT(conj(x)))/m.
        std::vector<Complex> conv = b.inner->forward(fa);
        const double scale = 1.0 / static_cast<double>(b.m);
        for (std::size_t k = 0; k < n_; ++k) out[k] = std::conj(conv[k]) * scale * b.chirp[k];
    }

    std::size_t n_;
    std::vector<std::size_t> factors_;
    std::vector<Complex> twiddles_;
    std::unique_ptr<Bluestein> bluestein_;
};

/// Row-column 2D transform of a rows x cols grid, unnormalized forward sign.
class Fft2d {
public:
    Fft2d(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), row_fft_(cols), col_fft_(rows) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    Grid forward(const Grid& in) const {
        if (in.rows != rows_ || in.cols != cols_) throw Error(ErrorCode::ShapeMismatch, "grid shape does not match FFT plan");
        Grid out(rows_, cols_);
        for (std::size_t i = 0; i < rows_; ++i) {
            row_fft_.forward(std::span<const Complex>(&in.data[i * cols_], cols_), std::span<Complex>(&out.data[i * cols_], cols_));
        }
        if (rows_ > 1) {
            std::vector<Complex> column(rows_), transformed(rows_);
            for (std::size_t j = 0; j < cols_; ++j) {
                for (std::size_t i = 0; i < rows_; ++i) column[i] = out(i, j);
                col_fft_.forward(column, transformed);
                for (std::size_t i = 0; i < rows_; ++i) out(i, j) = transformed[i];
            }
        }
        return out;
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    Fft1d row_fft_;
    Fft1d col_fft_;
};

}  // namespace ffast2d
