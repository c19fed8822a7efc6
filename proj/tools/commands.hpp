#pragma once

// Command implementations behind the ffast2d CLI. Kept free of argument
// parsing so tests and the acceptance runner can call them directly.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ffast2d.hpp"

namespace ffast2d::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitResidual = 2;

/// True when got and truth have the same support and every value agrees within tol.
inline bool matches_truth(const SparseSpectrum& got, const SparseSpectrum& truth, double tol) {
    if (got.size() != truth.size()) return false;
    for (const auto& [c, value] : truth) {
        if (!got.contains(c) || std::abs(got.at(c) - value) > tol) return false;
    }
    return true;
}

inline bool same_support(const SparseSpectrum& got, const SparseSpectrum& truth) {
    if (got.size() != truth.size()) return false;
    for (const auto& [c, value] : truth) {
        if (!got.contains(c)) return false;
    }
    return true;
}

/// One synthetic trial: instance, optional noise, decode. Returns the report
/// and whether the truth was recovered (exactly for noiseless plans, by
/// support for robust ones).
struct TrialOutcome {
    DecodeReport report;
    bool recovered = false;
    double nmse = 0.0;
};

inline TrialOutcome run_trial(const FfastPlan& plan, std::uint64_t k, const ValueModel& model, std::optional<double> snr_db,
                              std::uint64_t seed) {
    const Instance inst = gen_instance(plan.dims, k, model, seed);
    TrialOutcome out;
    if (plan.mode == Mode::Robust) {
        FfastPlan noisy = plan;
        RobustDecodeOptions opts;
        SignalSource source = inst.source;
        if (snr_db) {
            const double rho = db_to_linear(*snr_db);
            const double sigma2 = noise_var_for_snr(inst.truth, rho);
            noisy.robust->noise_var = sigma2;
            source = add_noise(inst.source, sigma2, seed ^ 0x5bd1e995ULL);
            if (model.kind == ValueModel::Kind::Constellation) opts.rho = model.rho;
        }
        out.report = robust_decode(source, noisy, opts);
        out.recovered = out.report.success() && same_support(out.report.spectrum, inst.truth);
    } else {
        out.report = decode(inst.source, plan);
        out.recovered = out.report.success() && matches_truth(out.report.spectrum, inst.truth, 1e-6);
    }
    double err = 0.0, power = 0.0;
    for (const auto& [c, value] : inst.truth) {
        err += std::norm(out.report.spectrum.at(c) - value);
        power += std::norm(value);
    }
    for (const auto& [c, value] : out.report.spectrum) {
        if (!inst.truth.contains(c)) err += std::norm(value);
    }
    out.nmse = power > 0.0 ? err / power : 0.0;
    return out;
}

/// Runs fn(trial) for trial in [0, trials) on up to `threads` workers.
template <class Fn>
void parallel_trials(std::size_t trials, unsigned threads, Fn&& fn) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(trials, 1))));
    if (threads == 1) {
        for (std::size_t t = 0; t < trials; ++t) fn(t);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t t = next++; t < trials; t = next++) fn(t);
        });
    }
    for (auto& th : pool) th.join();
}

// ---- sweep -----------------------------------------------------------------

struct SweepConfig {
    FfastPlan plan;
    std::vector<std::uint64_t> k_list;
    std::size_t trials = 100;
    std::uint64_t seed = 0;
    ValueModel model;
    std::optional<double> snr_db;
    unsigned threads = 1;
};

struct SweepRow {
    std::uint64_t k = 0;
    double eta = 0.0;
    std::size_t trials = 0;
    std::size_t successes = 0;
    double success_rate = 0.0;
    double mean_samples = 0.0;
    double mean_time_ms = 0.0;
    double mean_nmse = 0.0;
};

/// Trial t of every k point uses seed + t.
inline std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
    std::vector<SweepRow> rows;
    for (std::uint64_t k : cfg.k_list) {
        std::vector<TrialOutcome> outcomes(cfg.trials);
        parallel_trials(cfg.trials, cfg.threads,
                        [&](std::size_t t) { outcomes[t] = run_trial(cfg.plan, k, cfg.model, cfg.snr_db, cfg.seed + t); });
        SweepRow row;
        row.k = k;
        row.eta = k == 0 ? 0.0 : cfg.plan.average_bins() / static_cast<double>(k);
        row.trials = cfg.trials;
        for (const auto& o : outcomes) {
            row.successes += o.recovered ? 1 : 0;
            row.mean_samples += static_cast<double>(o.report.samples_touched);
            row.mean_time_ms += o.report.wall_time_ms;
            row.mean_nmse += o.nmse;
        }
        if (cfg.trials > 0) {
            const double n = static_cast<double>(cfg.trials);
            row.success_rate = static_cast<double>(row.successes) / n;
            row.mean_samples /= n;
            row.mean_time_ms /= n;
            row.mean_nmse /= n;
        }
        rows.push_back(row);
    }
    return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows, bool timing = true) {
    std::string out = "k,eta,trials,successes,success_rate,mean_samples,mean_time_ms\n";
    for (const auto& r : rows) {
        out += std::to_string(r.k) + ',' + format_double(r.eta) + ',' + std::to_string(r.trials) + ',' +
               std::to_string(r.successes) + ',' + format_double(r.success_rate) + ',' + format_double(r.mean_samples) +
               ',' + format_double(timing ? r.mean_time_ms : 0.0) + '\n';
    }
    return out;
}

// ---- bench -----------------------------------------------------------------

/// Plan family: d-stage very-sparse plans over balanced_factors(dims, d).
struct BenchConfig {
    std::vector<std::uint64_t> k_list;
    std::vector<std::uint64_t> nx_list;
    std::uint64_t ny = 315;
    std::size_t stages = 3;
    Regime regime = Regime::VerySparse;
    std::size_t trials = 20;
    std::uint64_t seed = 0;
    ValueModel model;
};

struct BenchRow {
    std::uint64_t k = 0;
    std::uint64_t nx = 0;
    std::uint64_t ny = 0;
    std::vector<std::uint64_t> factors;
    std::size_t trials = 0;
    std::size_t successes = 0;
    double mean_time_ms = 0.0;
    double mean_samples = 0.0;
};

inline FfastPlan bench_plan(const Dims& dims, std::size_t stages, Regime regime) {
    return build_plan(dims, balanced_factors(dims, stages), regime);
}

/// Mean decode wall time per (k, nx). Instance construction, including the
/// evaluation of the samples the plan reads, is not timed: decodes read from a
/// prefetched table as they would from memory. One untimed warm-up decode
/// precedes each point.
inline std::vector<BenchRow> run_bench(const BenchConfig& cfg) {
    std::vector<BenchRow> rows;
    for (std::uint64_t k : cfg.k_list) {
        for (std::uint64_t nx : cfg.nx_list) {
            const Dims dims(nx, cfg.ny);
            const FfastPlan plan = bench_plan(dims, cfg.stages, cfg.regime);
            BenchRow row;
            row.k = k;
            row.nx = nx;
            row.ny = cfg.ny;
            row.factors = balanced_factors(dims, cfg.stages);
            row.trials = cfg.trials;
            if (cfg.trials > 0) decode(prefetched_source(gen_instance(dims, k, cfg.model, cfg.seed).source, plan), plan);
            for (std::size_t t = 0; t < cfg.trials; ++t) {
                const Instance inst = gen_instance(dims, k, cfg.model, cfg.seed + t);
                const DecodeReport r = decode(prefetched_source(inst.source, plan), plan);
                row.successes += r.success() && matches_truth(r.spectrum, inst.truth, 1e-6) ? 1 : 0;
                row.mean_time_ms += r.wall_time_ms;
                row.mean_samples += static_cast<double>(r.samples_touched);
            }
            if (cfg.trials > 0) {
                row.mean_time_ms /= static_cast<double>(cfg.trials);
                row.mean_samples /= static_cast<double>(cfg.trials);
            }
            rows.push_back(row);
        }
    }
    return rows;
}

inline std::string bench_csv(const std::vector<BenchRow>& rows, bool timing = true) {
    std::string out = "k,nx,ny,factors,trials,successes,mean_time_ms,mean_samples\n";
    for (const auto& r : rows) {
        std::string factors;
        for (std::size_t i = 0; i < r.factors.size(); ++i) factors += (i ? "x" : "") + std::to_string(r.factors[i]);
        out += std::to_string(r.k) + ',' + std::to_string(r.nx) + ',' + std::to_string(r.ny) + ',' + factors + ',' +
               std::to_string(r.trials) + ',' + std::to_string(r.successes) + ',' +
               format_double(timing ? r.mean_time_ms : 0.0) + ',' + format_double(r.mean_samples) + '\n';
    }
    return out;
}

// ---- gen -------------------------------------------------------------------

/// "u:v:re:im" items separated by ';' or whitespace.
inline SparseSpectrum parse_entries(const std::string& text, const Dims& dims) {
    SparseSpectrum s(dims);
    std::string item;
    std::string normalized = text;
    std::replace(normalized.begin(), normalized.end(), ';', ' ');
    std::istringstream in(normalized);
    while (in >> item) {
        unsigned long long u = 0, v = 0;
        double re = 0, im = 0;
        int consumed = 0;
        const int got = std::sscanf(item.c_str(), "%llu:%llu:%lf:%lf%n", &u, &v, &re, &im, &consumed);
        if (got < 3) throw Error(ErrorCode::Parse, "entry '" + item + "' is not u:v:re[:im]");
        if (got == 3) im = 0.0;
        if (u >= dims.nx || v >= dims.ny) throw Error(ErrorCode::Parse, "entry '" + item + "' is out of range");
        s.add({u, v}, {re, im});
    }
    return s;
}

struct GenOptions {
    Dims dims;
    std::uint64_t k = 0;
    ValueModel model;
    std::uint64_t seed = 0;
    std::optional<std::string> entries;  ///< explicit spectrum instead of a random draw
    std::string out_prefix;
    bool dense = true;                  ///< also write the dense signal file
    std::optional<double> noise_snr_db; ///< add noise to the dense signal
};

struct GenResult {
    std::string spectrum_path;
    std::optional<std::string> signal_path;
};

/// Writes <prefix>.spectrum.csv and, when requested, <prefix>.signal.ff2d.
inline GenResult cmd_gen(const GenOptions& opt) {
    const Instance inst = opt.entries ? make_instance(parse_entries(*opt.entries, opt.dims), opt.seed)
                                      : gen_instance(opt.dims, opt.k, opt.model, opt.seed);
    GenResult res;
    if (opt.dense && opt.dims.n() > kMaxMaterializedSamples) {
        throw Error(ErrorCode::TooLargeToMaterialize, "dense signal files are limited to 10^6 samples");
    }
    res.spectrum_path = opt.out_prefix + ".spectrum.csv";
    write_file(res.spectrum_path, spectrum_to_csv(inst.truth));
    if (opt.dense) {
        SignalSource source = inst.source;
        if (opt.noise_snr_db) {
            source = add_noise(source, noise_var_for_snr(inst.truth, db_to_linear(*opt.noise_snr_db)), opt.seed ^ 0x5bd1e995ULL);
        }
        res.signal_path = opt.out_prefix + ".signal.ff2d";
        write_file(*res.signal_path, dense_to_bytes(materialize(source)));
    }
    return res;
}

// ---- decode ----------------------------------------------------------------

struct DecodeOptions {
    std::string plan_path;
    std::optional<std::string> mode;          ///< overrides the plan's mode (compact plans only)
    std::optional<std::string> signal_path;   ///< dense FF2D input
    std::optional<std::string> spectrum_path; ///< sparse CSV input, sampled lazily
    std::uint64_t k = 0;                      ///< synthetic instance when no file is given
    ValueModel model;
    std::uint64_t seed = 0;
    std::optional<double> snr_db;             ///< noise added to synthetic or CSV inputs
    std::optional<double> noise_var;          ///< robust threshold variance override
    bool timing = true;
};

struct DecodeOutcome {
    DecodeReport report;
    int exit_code = kExitOk;
    std::string json;
};

inline DecodeOutcome cmd_decode(const DecodeOptions& opt) {
    Json plan_json;
    try {
        plan_json = Json::parse(read_file(opt.plan_path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, opt.plan_path + ": " + e.what());
    }
    if (opt.mode) plan_json["mode"] = *opt.mode;
    FfastPlan plan = plan_from_json(plan_json);

    SignalSource source;
    SparseSpectrum truth(plan.dims);
    if (opt.signal_path) {
        source = grid_source(dense_from_bytes(read_file(*opt.signal_path)));
        if (!(source.dims() == plan.dims)) throw Error(ErrorCode::ShapeMismatch, "signal file does not match the plan dims");
    } else {
        const Instance inst = opt.spectrum_path ? make_instance(spectrum_from_csv(read_file(*opt.spectrum_path), plan.dims))
                                                : gen_instance(plan.dims, opt.k, opt.model, opt.seed);
        truth = inst.truth;
        source = inst.source;
    }

    DecodeOutcome out;
    if (plan.mode == Mode::Robust) {
        RobustDecodeOptions ropts;
        if (opt.snr_db && !opt.signal_path) {
            const double sigma2 = noise_var_for_snr(truth, db_to_linear(*opt.snr_db));
            source = add_noise(source, sigma2, opt.seed ^ 0x5bd1e995ULL);
            plan.robust->noise_var = sigma2;
            if (opt.model.kind == ValueModel::Kind::Constellation && !opt.spectrum_path) ropts.rho = opt.model.rho;
        }
        if (opt.noise_var) plan.robust->noise_var = *opt.noise_var;
        out.report = robust_decode(source, plan, ropts);
    } else {
        out.report = decode(source, plan);
    }
    out.exit_code = out.report.success() ? kExitOk : kExitResidual;
    out.json = report_to_json(out.report, opt.timing).dump(2) + "\n";
    return out;
}

}  // namespace ffast2d::cli
