#pragma once

// On-disk formats: plan JSON, sparse spectrum CSV, dense FF2D binary and the
// decode report JSON.

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ffast2d/peeler.hpp"
#include "ffast2d/plan.hpp"
#include "ffast2d/types.hpp"

namespace ffast2d {

using Json = nlohmann::ordered_json;

inline constexpr std::uint64_t kMaxMaterializedSamples = 1000000;

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    out << content;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

// ---- plan JSON -------------------------------------------------------------

inline Json robust_to_json(const RobustParams& p) {
    return Json{{"chains_per_dim", p.chains_per_dim}, {"reps", p.reps},          {"noise_var", p.noise_var},
                {"gamma_zero", p.gamma_zero},         {"gamma_single", p.gamma_single}, {"seed", p.seed}};
}

inline RobustParams robust_from_json(const Json& j) {
    RobustParams p;
    p.chains_per_dim = j.value("chains_per_dim", p.chains_per_dim);
    p.reps = j.value("reps", p.reps);
    p.noise_var = j.value("noise_var", p.noise_var);
    p.gamma_zero = j.value("gamma_zero", p.gamma_zero);
    p.gamma_single = j.value("gamma_single", p.gamma_single);
    p.seed = j.value("seed", p.seed);
    p.validate();
    return p;
}

inline Json plan_to_json(const FfastPlan& plan) {
    Json stages = Json::array();
    for (const auto& s : plan.stages) {
        Json shifts = Json::array();
        for (const Shift& sh : s.shifts) shifts.push_back(Json::array({sh.s1, sh.s2}));
        stages.push_back(Json{{"sub_x", s.sub_x}, {"sub_y", s.sub_y}, {"shifts", std::move(shifts)}});
    }
    Json j{{"nx", plan.dims.nx}, {"ny", plan.dims.ny}, {"mode", to_string(plan.mode)}, {"stages", std::move(stages)}};
    if (plan.robust) j["robust"] = robust_to_json(*plan.robust);
    return j;
}

inline Mode parse_mode(const std::string& s) {
    if (s == "noiseless") return Mode::Noiseless;
    if (s == "robust") return Mode::Robust;
    throw Error(ErrorCode::Parse, "unknown mode '" + s + "'");
}

inline Regime parse_regime(const std::string& s) {
    if (s == "less-sparse" || s == "less_sparse" || s == "LessSparse") return Regime::LessSparse;
    if (s == "very-sparse" || s == "very_sparse" || s == "VerySparse") return Regime::VerySparse;
    throw Error(ErrorCode::Parse, "unknown regime '" + s + "'");
}

/// Accepts either explicit stages or the compact {factors, regime} form; the
/// result is always validated.
inline FfastPlan plan_from_json(const Json& j) {
    try {
        const Dims dims(j.at("nx").get<std::uint64_t>(), j.at("ny").get<std::uint64_t>());
        const Mode mode = parse_mode(j.value("mode", std::string("noiseless")));
        std::optional<RobustParams> robust;
        if (j.contains("robust")) robust = robust_from_json(j.at("robust"));
        if (mode == Mode::Robust && !robust) robust = RobustParams{};
        if (mode == Mode::Noiseless) robust.reset();

        FfastPlan plan;
        if (j.contains("factors")) {
            plan = build_plan(dims, j.at("factors").get<std::vector<std::uint64_t>>(),
                              parse_regime(j.value("regime", std::string("less-sparse"))), mode, robust);
        } else {
            plan.dims = dims;
            plan.mode = mode;
            plan.robust = robust;
            for (const Json& s : j.at("stages")) {
                std::vector<Shift> shifts;
                for (const Json& sh : s.at("shifts")) shifts.push_back({sh.at(0).get<std::uint64_t>(), sh.at(1).get<std::uint64_t>()});
                plan.stages.emplace_back(dims, s.at("sub_x").get<std::uint64_t>(), s.at("sub_y").get<std::uint64_t>(),
                                         std::move(shifts));
            }
        }
        validate_plan(plan);
        return plan;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("plan JSON: ") + e.what());
    }
}

inline FfastPlan load_plan(const std::string& path) {
    Json j;
    try {
        j = Json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, path + ": " + e.what());
    }
    return plan_from_json(j);
}

// ---- sparse spectrum CSV ---------------------------------------------------

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// "u,v,re,im" header then one row per entry, sorted by (u, v). Dimensions are
/// not part of the format; the reader takes them from the caller.
inline std::string spectrum_to_csv(const SparseSpectrum& s) {
    std::string out = "u,v,re,im\n";
    for (const auto& [c, value] : s) {
        out += std::to_string(c.u) + ',' + std::to_string(c.v) + ',' + format_double(value.real()) + ',' +
               format_double(value.imag()) + '\n';
    }
    return out;
}

inline SparseSpectrum spectrum_from_csv(const std::string& text, const Dims& dims) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("u,v,re,im", 0) != 0) {
        throw Error(ErrorCode::Parse, "spectrum CSV must start with the header u,v,re,im");
    }
    SparseSpectrum s(dims);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        unsigned long long u = 0, v = 0;
        double re = 0, im = 0;
        int consumed = 0;
        if (std::sscanf(line.c_str(), "%llu,%llu,%lf,%lf%n", &u, &v, &re, &im, &consumed) != 4 ||
            static_cast<std::size_t>(consumed) != line.size()) {
            throw Error(ErrorCode::Parse, "spectrum CSV line " + std::to_string(line_no) + " is malformed");
        }
        if (u >= dims.nx || v >= dims.ny) {
            throw Error(ErrorCode::Parse, "spectrum CSV line " + std::to_string(line_no) + " is out of range");
        }
        s.add({u, v}, {re, im});
    }
    return s;
}

// ---- dense FF2D binary -----------------------------------------------------

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint32_t get_u32(const std::string& in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
    return v;
}

inline void put_f64(std::string& out, double x) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &x, sizeof bits);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline double get_f64(const std::string& in, std::size_t at) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
    double x = 0;
    std::memcpy(&x, &bits, sizeof x);
    return x;
}

}  // namespace detail

/// 16-byte header ("FF2D", u32 nx, u32 ny, u32 reserved) then interleaved
/// little-endian f64 re/im in row-major order.
inline std::string dense_to_bytes(const Grid& g) {
    if (static_cast<std::uint64_t>(g.rows) * g.cols > kMaxMaterializedSamples) {
        throw Error(ErrorCode::TooLargeToMaterialize, "dense output is limited to 10^6 samples");
    }
    std::string out = "FF2D";
    detail::put_u32(out, static_cast<std::uint32_t>(g.rows));
    detail::put_u32(out, static_cast<std::uint32_t>(g.cols));
    detail::put_u32(out, 0);
    out.reserve(16 + g.data.size() * 16);
    for (const Complex& c : g.data) {
        detail::put_f64(out, c.real());
        detail::put_f64(out, c.imag());
    }
    return out;
}

inline Grid dense_from_bytes(const std::string& bytes) {
    if (bytes.size() < 16 || bytes.compare(0, 4, "FF2D") != 0) throw Error(ErrorCode::Parse, "missing FF2D header");
    const std::uint32_t nx = detail::get_u32(bytes, 4);
    const std::uint32_t ny = detail::get_u32(bytes, 8);
    if (nx == 0 || ny == 0) throw Error(ErrorCode::Parse, "FF2D dimensions must be positive");
    const std::uint64_t count = static_cast<std::uint64_t>(nx) * ny;
    if (bytes.size() != 16 + count * 16) throw Error(ErrorCode::Parse, "FF2D payload size does not match its header");
    Grid g(nx, ny);
    for (std::uint64_t t = 0; t < count; ++t) {
        g.data[t] = {detail::get_f64(bytes, 16 + 16 * t), detail::get_f64(bytes, 24 + 16 * t)};
    }
    return g;
}

// ---- decode report ---------------------------------------------------------

inline Json report_to_json(const DecodeReport& r, bool with_timing = true) {
    Json entries = Json::array();
    for (const auto& [c, value] : r.spectrum) entries.push_back(Json::array({c.u, c.v, value.real(), value.imag()}));
    Json stats = Json::array();
    for (const BinStats& s : r.bin_stats) stats.push_back(Json{{"zero", s.zero}, {"single", s.single}, {"multi", s.multi}});
    Json order = Json::array();
    for (const Coord& c : r.recovery_order) order.push_back(Json::array({c.u, c.v}));
    return Json{{"status", to_string(r.status)},
                {"nx", r.spectrum.dims().nx},
                {"ny", r.spectrum.dims().ny},
                {"k", r.spectrum.size()},
                {"entries", std::move(entries)},
                {"samples_touched", r.samples_touched},
                {"plan_budget", r.plan_budget},
                {"r", r.oversampling_ratio()},
                {"peel_iterations", r.peel_iterations},
                {"bin_stats", std::move(stats)},
                {"recovery_order", std::move(order)},
                {"wall_time_ms", with_timing ? r.wall_time_ms : 0.0}};
}

/// Recovered spectrum from a report written by report_to_json.
inline SparseSpectrum spectrum_from_report(const Json& j) {
    try {
        SparseSpectrum s(Dims(j.at("nx").get<std::uint64_t>(), j.at("ny").get<std::uint64_t>()));
        for (const Json& e : j.at("entries")) {
            s.add({e.at(0).get<std::uint64_t>(), e.at(1).get<std::uint64_t>()}, {e.at(2).get<double>(), e.at(3).get<double>()});
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("report JSON: ") + e.what());
    }
}

}  // namespace ffast2d
