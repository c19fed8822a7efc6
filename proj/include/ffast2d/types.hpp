#pragma once

#include <complex>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ffast2d {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

enum class ErrorCode {
    InvalidArgument,
    NotCoprime,
    NoValidSplit,
    ProductMismatch,
    InvalidPlan,
    ResidueOutOfRange,
    DimsNotCoprime,
    Overflow,
    ShapeMismatch,
    WrongShiftLayout,
    KTooLarge,
    TooLargeToMaterialize,
    Io,
    Parse,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NotCoprime: return "NotCoprime";
        case ErrorCode::NoValidSplit: return "NoValidSplit";
        case ErrorCode::ProductMismatch: return "ProductMismatch";
        case ErrorCode::InvalidPlan: return "InvalidPlan";
        case ErrorCode::ResidueOutOfRange: return "ResidueOutOfRange";
        case ErrorCode::DimsNotCoprime: return "DimsNotCoprime";
        case ErrorCode::Overflow: return "Overflow";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::WrongShiftLayout: return "WrongShiftLayout";
        case ErrorCode::KTooLarge: return "KTooLarge";
        case ErrorCode::TooLargeToMaterialize: return "TooLargeToMaterialize";
        case ErrorCode::Io: return "Io";
        case ErrorCode::Parse: return "Parse";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Signal shape: nx rows by ny columns.
struct Dims {
    std::uint64_t nx = 1;
    std::uint64_t ny = 1;

    Dims() = default;
    Dims(std::uint64_t rows, std::uint64_t cols) : nx(rows), ny(cols) {
        if (nx == 0 || ny == 0) throw Error(ErrorCode::InvalidArgument, "dimensions must be positive");
        if (ny > UINT64_MAX / nx) throw Error(ErrorCode::Overflow, "nx*ny overflows");
    }

    std::uint64_t n() const noexcept { return nx * ny; }

    friend bool operator==(const Dims&, const Dims&) = default;
};

/// A 2D frequency (or spatial) coordinate.
struct Coord {
    std::uint64_t u = 0;
    std::uint64_t v = 0;

    friend auto operator<=>(const Coord&, const Coord&) = default;
};

/// Shift (delay) of a chain, already reduced mod (nx, ny).
struct Shift {
    std::uint64_t s1 = 0;
    std::uint64_t s2 = 0;

    friend auto operator<=>(const Shift&, const Shift&) = default;
};

/// Dense row-major complex grid.
struct Grid {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Complex> data;

    Grid() = default;
    Grid(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

    Complex& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

/// Sparse 2D spectrum; zero amplitudes are never stored.
class SparseSpectrum {
public:
    using Map = std::map<Coord, Complex>;

    SparseSpectrum() = default;
    explicit SparseSpectrum(Dims dims) : dims_(dims) {}

    const Dims& dims() const noexcept { return dims_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    const Map& entries() const noexcept { return entries_; }

    /// Sets X[u][v]; a zero value erases the entry.
    void set(Coord c, Complex value) {
        check(c);
        if (value == Complex{}) {
            entries_.erase(c);
        } else {
            entries_[c] = value;
        }
    }

    /// Adds to X[u][v]; an exact cancellation erases the entry.
    void add(Coord c, Complex value) {
        check(c);
        auto [it, inserted] = entries_.try_emplace(c, Complex{});
        it->second += value;
        if (it->second == Complex{}) entries_.erase(it);
    }

    Complex at(Coord c) const {
        auto it = entries_.find(c);
        return it == entries_.end() ? Complex{} : it->second;
    }

    bool contains(Coord c) const { return entries_.count(c) != 0; }

    /// Drops entries with magnitude at or below threshold.
    void prune(double threshold) {
        for (auto it = entries_.begin(); it != entries_.end();) {
            if (std::abs(it->second) <= threshold) {
                it = entries_.erase(it);
            } else {
                ++it;
            }
        }
    }

    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

private:
    void check(Coord c) const {
        if (c.u >= dims_.nx || c.v >= dims_.ny) {
            throw Error(ErrorCode::InvalidArgument, "spectrum coordinate out of range");
        }
    }

    Dims dims_;
    Map entries_;
};

/// e^{i 2 pi num / den} with num reduced mod den before the division.
inline Complex unit_phase(std::uint64_t num, std::uint64_t den) {
    const double frac = static_cast<double>(num % den) / static_cast<double>(den);
    return std::polar(1.0, kTwoPi * frac);
}

/// (a*b) mod m without overflow.
inline std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    if ((a | b) >> 32 == 0) return (a * b) % m;
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

}  // namespace ffast2d
