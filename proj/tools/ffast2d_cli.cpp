#include <cstdio>
#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "commands.hpp"

namespace {

using namespace ffast2d;
using namespace ffast2d::cli;

struct ModelFlags {
    std::string model = "unit";
    double rho_db = 13.0;
    std::uint32_t m1 = 2;
    std::uint32_t m2 = 8;

    void add(CLI::App* app) {
        app->add_option("--model", model, "Value model: unit, gaussian or constellation")
            ->check(CLI::IsMember({"unit", "gaussian", "constellation"}));
        app->add_option("--rho-db", rho_db, "Constellation SNR rho in dB (defaults to --snr-db when given)");
        app->add_option("--m1", m1, "Constellation magnitude levels minus one");
        app->add_option("--m2", m2, "Constellation phase count");
    }

    ValueModel resolve(const CLI::App* app, std::optional<double> snr_db) const {
        if (model == "gaussian") return ValueModel::complex_gaussian();
        if (model == "constellation") {
            const double db = (app->count("--rho-db") == 0 && snr_db) ? *snr_db : rho_db;
            return ValueModel::constellation(db_to_linear(db), m1, m2);
        }
        return ValueModel::unit_circle();
    }
};

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty() || out_path == "-") {
        std::cout << text;
    } else {
        write_file(out_path, text);
    }
}

std::vector<std::uint64_t> k_range(std::uint64_t lo, std::uint64_t hi, std::uint64_t step) {
    std::vector<std::uint64_t> out;
    if (step == 0) step = 1;
    for (std::uint64_t k = lo; k <= hi; k += step) out.push_back(k);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ffast2d: sparse 2D DFT via CRT-guided subsampling and peeling"};
    app.require_subcommand(1);

    // decode
    DecodeOptions dopt;
    ModelFlags dmodel;
    std::string dout;
    std::optional<double> d_snr;
    bool d_no_timing = false;
    auto* decode_cmd = app.add_subcommand("decode", "Decode a signal file, a spectrum file or a synthetic instance");
    decode_cmd->add_option("--plan", dopt.plan_path, "Plan JSON")->required();
    decode_cmd->add_option("--signal", dopt.signal_path, "Dense FF2D signal file");
    decode_cmd->add_option("--spectrum", dopt.spectrum_path, "Sparse spectrum CSV; the signal is synthesized lazily");
    decode_cmd->add_option("--k", dopt.k, "Sparsity of a synthetic instance");
    decode_cmd->add_option("--seed", dopt.seed, "Instance and noise seed");
    decode_cmd->add_option("--mode", dopt.mode, "noiseless or robust")->check(CLI::IsMember({"noiseless", "robust"}));
    decode_cmd->add_option("--snr-db", d_snr, "Add noise at this SNR (robust mode)");
    decode_cmd->add_option("--noise-var", dopt.noise_var, "Per-sample noise variance used by robust thresholds");
    decode_cmd->add_option("--out", dout, "Report JSON path (default stdout)");
    decode_cmd->add_flag("--no-timing", d_no_timing, "Write 0 for wall time so output is byte-reproducible");
    dmodel.add(decode_cmd);

    // sweep
    std::string sweep_plan, sweep_out, sweep_mode;
    std::vector<std::uint64_t> sweep_k;
    std::uint64_t k_min = 0, k_max = 0, k_step = 1;
    std::size_t sweep_trials = 100;
    std::uint64_t sweep_seed = 0;
    std::optional<double> sweep_snr;
    unsigned sweep_threads = std::max(1u, std::thread::hardware_concurrency());
    bool sweep_no_timing = false;
    ModelFlags smodel;
    auto* sweep_cmd = app.add_subcommand("sweep", "Monte Carlo success rate as a function of k");
    sweep_cmd->add_option("--plan", sweep_plan, "Plan JSON")->required();
    sweep_cmd->add_option("--k", sweep_k, "Sparsities to test")->delimiter(',');
    sweep_cmd->add_option("--k-min", k_min, "Range start");
    sweep_cmd->add_option("--k-max", k_max, "Range end (inclusive)");
    sweep_cmd->add_option("--k-step", k_step, "Range step");
    sweep_cmd->add_option("--trials", sweep_trials, "Trials per k");
    sweep_cmd->add_option("--seed", sweep_seed, "Base seed; trial t uses seed + t");
    sweep_cmd->add_option("--mode", sweep_mode, "noiseless or robust")->check(CLI::IsMember({"noiseless", "robust"}));
    sweep_cmd->add_option("--snr-db", sweep_snr, "Noise level for robust sweeps");
    sweep_cmd->add_option("--threads", sweep_threads, "Worker threads");
    sweep_cmd->add_option("--out", sweep_out, "CSV path (default stdout)");
    sweep_cmd->add_flag("--no-timing", sweep_no_timing, "Write 0 for timing columns");
    smodel.add(sweep_cmd);

    // bench
    BenchConfig bcfg;
    bcfg.k_list = {100, 200, 300};
    bcfg.nx_list = {315, 630, 1260};
    std::string bench_out;
    std::string bench_regime = "very-sparse";
    bool bench_no_timing = false;
    ModelFlags bmodel;
    auto* bench_cmd = app.add_subcommand("bench", "Mean decode time per (k, nx) with ny fixed");
    bench_cmd->add_option("--k", bcfg.k_list, "Sparsities")->delimiter(',');
    bench_cmd->add_option("--nx", bcfg.nx_list, "Row dimensions")->delimiter(',');
    bench_cmd->add_option("--ny", bcfg.ny, "Column dimension");
    bench_cmd->add_option("--stages", bcfg.stages, "Stages per plan");
    bench_cmd->add_option("--regime", bench_regime, "very-sparse or less-sparse");
    bench_cmd->add_option("--trials", bcfg.trials, "Trials per point");
    bench_cmd->add_option("--seed", bcfg.seed, "Base seed");
    bench_cmd->add_option("--out", bench_out, "CSV path (default stdout)");
    bench_cmd->add_flag("--no-timing", bench_no_timing, "Write 0 for timing columns");
    bmodel.add(bench_cmd);

    // gen
    GenOptions gopt;
    std::uint64_t gnx = 0, gny = 0;
    bool g_no_dense = false;
    ModelFlags gmodel;
    auto* gen_cmd = app.add_subcommand("gen", "Write a spectrum CSV and a dense signal file");
    gen_cmd->add_option("--nx", gnx, "Rows")->required();
    gen_cmd->add_option("--ny", gny, "Columns")->required();
    gen_cmd->add_option("--k", gopt.k, "Sparsity");
    gen_cmd->add_option("--seed", gopt.seed, "Seed");
    gen_cmd->add_option("--entries", gopt.entries, "Explicit entries u:v:re[:im] separated by ';'");
    gen_cmd->add_option("--snr-db", gopt.noise_snr_db, "Add noise to the dense signal at this SNR");
    gen_cmd->add_option("--out", gopt.out_prefix, "Output path prefix")->required();
    gen_cmd->add_flag("--no-dense", g_no_dense, "Skip the dense signal file");
    gmodel.add(gen_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*decode_cmd) {
            dopt.snr_db = d_snr;
            dopt.model = dmodel.resolve(decode_cmd, d_snr);
            dopt.timing = !d_no_timing;
            const DecodeOutcome res = cmd_decode(dopt);
            emit(res.json, dout);
            return res.exit_code;
        }
        if (*sweep_cmd) {
            SweepConfig cfg;
            Json plan_json = Json::parse(read_file(sweep_plan));
            if (!sweep_mode.empty()) plan_json["mode"] = sweep_mode;
            cfg.plan = plan_from_json(plan_json);
            cfg.k_list = sweep_k;
            if (cfg.k_list.empty() && k_max >= k_min && k_max > 0) cfg.k_list = k_range(k_min, k_max, k_step);
            cfg.trials = sweep_trials;
            cfg.seed = sweep_seed;
            cfg.snr_db = sweep_snr;
            cfg.model = smodel.resolve(sweep_cmd, sweep_snr);
            cfg.threads = sweep_threads;
            emit(sweep_csv(run_sweep(cfg), !sweep_no_timing), sweep_out);
            return kExitOk;
        }
        if (*bench_cmd) {
            bcfg.regime = parse_regime(bench_regime);
            bcfg.model = bmodel.resolve(bench_cmd, std::nullopt);
            emit(bench_csv(run_bench(bcfg), !bench_no_timing), bench_out);
            return kExitOk;
        }
        if (*gen_cmd) {
            gopt.dims = Dims(gnx, gny);
            gopt.model = gmodel.resolve(gen_cmd, gopt.noise_snr_db);
            gopt.dense = !g_no_dense;
            const GenResult res = cmd_gen(gopt);
            std::cout << res.spectrum_path << '\n';
            if (res.signal_path) std::cout << *res.signal_path << '\n';
            return kExitOk;
        }
    } catch (const Error& e) {
        std::cerr << "ffast2d: " << to_string(e.code()) << ": " << e.what() << '\n';
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "ffast2d: Parse: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "ffast2d: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
