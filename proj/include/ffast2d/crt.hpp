#pragma once

// Chinese-remainder reconstruction and the Good-Thomas index maps that turn a
// co-prime-dimension 2D DFT into a 1D DFT of length nx*ny.

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <utility>
#include <span>
#include <vector>

#include "ffast2d/types.hpp"

namespace ffast2d {

namespace detail {

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t out = 0;
    if (__builtin_mul_overflow(a, b, &out)) throw Error(ErrorCode::Overflow, "integer product overflows 64 bits");
    return out;
}

// Inverse of a modulo m, gcd(a, m) == 1 required.
inline std::uint64_t mod_inverse(std::uint64_t a, std::uint64_t m) {
    if (m == 1) return 0;
    __int128 t = 0, new_t = 1;
    __int128 r = m, new_r = a % m;
    while (new_r != 0) {
        const __int128 q = r / new_r;
        t -= q * new_t;
        std::swap(t, new_t);
        r -= q * new_r;
        std::swap(r, new_r);
    }
    if (r != 1) throw Error(ErrorCode::NotCoprime, "value has no inverse modulo m");
    if (t < 0) t += m;
    return static_cast<std::uint64_t>(t);
}

}  // namespace detail

/// Pairwise co-prime moduli with precomputed Gauss reconstruction weights:
/// weight_i = 1 mod moduli_i and 0 mod every other modulus.
class CrtBasis {
public:
    explicit CrtBasis(std::vector<std::uint64_t> moduli) : moduli_(std::move(moduli)) {
        if (moduli_.empty()) throw Error(ErrorCode::InvalidArgument, "CRT basis needs at least one modulus");
        n_ = 1;
        for (std::size_t i = 0; i < moduli_.size(); ++i) {
            if (moduli_[i] == 0) throw Error(ErrorCode::InvalidArgument, "CRT modulus must be positive");
            for (std::size_t j = 0; j < i; ++j) {
                if (std::gcd(moduli_[i], moduli_[j]) != 1) {
                    throw Error(ErrorCode::NotCoprime, "CRT moduli must be pairwise co-prime");
                }
            }
            n_ = detail::checked_mul(n_, moduli_[i]);
        }
        if (n_ > (std::uint64_t{1} << 62)) throw Error(ErrorCode::Overflow, "CRT product exceeds 2^62");
        weights_.reserve(moduli_.size());
        for (std::uint64_t m : moduli_) {
            const std::uint64_t rest = n_ / m;
            weights_.push_back(mul_mod(rest, detail::mod_inverse(rest % m, m), n_));
        }
    }

    const std::vector<std::uint64_t>& moduli() const noexcept { return moduli_; }
    const std::vector<std::uint64_t>& weights() const noexcept { return weights_; }
    std::uint64_t n() const noexcept { return n_; }

private:
    std::vector<std::uint64_t> moduli_;
    std::vector<std::uint64_t> weights_;
    std::uint64_t n_ = 1;
};

/// The unique a in [0, n) with a == residues[i] (mod moduli[i]) for all i.
inline std::uint64_t crt_reconstruct(const CrtBasis& basis, std::span<const std::uint64_t> residues) {
    const auto& moduli = basis.moduli();
    if (residues.size() != moduli.size()) {
        throw Error(ErrorCode::InvalidArgument, "residue count does not match the basis");
    }
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < moduli.size(); ++i) {
        if (residues[i] >= moduli[i]) throw Error(ErrorCode::ResidueOutOfRange, "residue not reduced");
        acc = (acc + mul_mod(residues[i], basis.weights()[i], basis.n())) % basis.n();
    }
    return acc;
}

inline std::uint64_t crt_reconstruct(const CrtBasis& basis, std::initializer_list<std::uint64_t> residues) {
    return crt_reconstruct(basis, std::span<const std::uint64_t>(residues.begin(), residues.size()));
}

namespace detail {
inline void require_coprime(const Dims& dims) {
    if (std::gcd(dims.nx, dims.ny) != 1) throw Error(ErrorCode::DimsNotCoprime, "nx and ny must be co-prime");
}
}  // namespace detail

/// Spatial position of 1D index t under the diagonal readout.
inline Coord good_thomas_spatial(const Dims& dims, std::uint64_t t) { return {t % dims.nx, t % dims.ny}; }

/// 1D frequency index holding the 2D coefficient (u, v): (u*ny + v*nx) mod n.
inline std::uint64_t good_thomas_frequency_index(const Dims& dims, Coord c) {
    const std::uint64_t n = dims.n();
    return (mul_mod(c.u, dims.ny, n) + mul_mod(c.v, dims.nx, n)) % n;
}

/// Inverse of good_thomas_frequency_index: u = k*ny^{-1} mod nx, v = k*nx^{-1} mod ny.
class GoodThomasMap {
public:
    explicit GoodThomasMap(Dims dims) : dims_(dims) {
        detail::require_coprime(dims_);
        inv_ny_mod_nx_ = detail::mod_inverse(dims_.ny % dims_.nx, dims_.nx);
        inv_nx_mod_ny_ = detail::mod_inverse(dims_.nx % dims_.ny, dims_.ny);
    }

    const Dims& dims() const noexcept { return dims_; }

    Coord frequency_coord(std::uint64_t k) const {
        return {mul_mod(k % dims_.nx, inv_ny_mod_nx_, dims_.nx), mul_mod(k % dims_.ny, inv_nx_mod_ny_, dims_.ny)};
    }

    std::uint64_t frequency_index(Coord c) const { return good_thomas_frequency_index(dims_, c); }

private:
    Dims dims_;
    std::uint64_t inv_ny_mod_nx_ = 0;
    std::uint64_t inv_nx_mod_ny_ = 0;
};

/// vec[t] = signal[t mod nx][t mod ny].
inline std::vector<Complex> good_thomas_forward(const Grid& signal, const Dims& dims) {
    detail::require_coprime(dims);
    if (signal.rows != dims.nx || signal.cols != dims.ny) throw Error(ErrorCode::ShapeMismatch, "grid does not match dims");
    std::vector<Complex> out(dims.n());
    for (std::uint64_t t = 0; t < dims.n(); ++t) out[t] = signal(t % dims.nx, t % dims.ny);
    return out;
}

/// out[u][v] = spectrum1d[(u*ny + v*nx) mod n]; undoes the index permutation of
/// the prime-factor algorithm so reverse(DFT1D(forward(x))) == DFT2D(x).
inline Grid good_thomas_reverse(std::span<const Complex> spectrum1d, const Dims& dims) {
    detail::require_coprime(dims);
    if (spectrum1d.size() != dims.n()) throw Error(ErrorCode::ShapeMismatch, "1D spectrum length must equal nx*ny");
    Grid out(dims.nx, dims.ny);
    for (std::uint64_t u = 0; u < dims.nx; ++u) {
        for (std::uint64_t v = 0; v < dims.ny; ++v) {
            out(u, v) = spectrum1d[good_thomas_frequency_index(dims, {u, v})];
        }
    }
    return out;
}

}  // namespace ffast2d
