#include "arrayhd/config.hpp"
#include "arrayhd/experiments.hpp"
#include "arrayhd/verify.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

// Exit codes: 0 success, 1 verification/run failure, 2 usage or config error.
constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct CommonFlags {
    std::optional<std::string> config_path;
    std::optional<std::string> preset;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> samples;
    std::optional<std::string> out_dir;
    std::optional<int> bins;
    std::optional<double> range;
    std::optional<int> threads;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "TOML config file");
    cmd->add_option("--preset", flags.preset, "named preset (fig1, fig2, fig3)")
        ->check(CLI::IsMember({"fig1", "fig2", "fig3"}));
    cmd->add_option("--seed", flags.seed, "sampling seed");
    cmd->add_option("--samples", flags.samples, "sample count");
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_option("--bins", flags.bins, "histogram bins per axis");
    cmd->add_option("--range", flags.range, "histogram/grid half-range");
    cmd->add_option("--threads", flags.threads, "worker count (also capped by ARRAYHD_THREADS)");
}

arrayhd::RunConfig resolve_config(const CommonFlags& flags) {
    arrayhd::RunConfig cfg;
    if (flags.preset) {
        arrayhd::apply_config_file(cfg, arrayhd::find_preset(*flags.preset));
    }
    if (flags.config_path) {
        arrayhd::apply_config_file(cfg, *flags.config_path);
    }
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.samples) cfg.samples = *flags.samples;
    if (flags.out_dir) cfg.out_dir = *flags.out_dir;
    if (flags.bins) cfg.bins = *flags.bins;
    if (flags.range) cfg.range = *flags.range;
    if (flags.threads) cfg.threads = *flags.threads;
    arrayhd::validate(cfg);
    return cfg;
}

int cmd_verify(const CommonFlags& flags) {
    arrayhd::RunConfig cfg = resolve_config(flags);
    arrayhd::VerifyOptions opts;
    opts.n_max = cfg.n_max;
    opts.grid_n = cfg.grid_n;
    opts.beta = cfg.beta;
    opts.nu1 = cfg.nu1;
    opts.nu2 = cfg.nu2;
    opts.selection_seed = cfg.selection_seed;
    opts.selection_restarts = cfg.restarts;
    opts.threads = cfg.threads;

    arrayhd::VerifyReport report = arrayhd::run_identity_suite(opts);
    for (const auto& check : report.checks) {
        std::cout << (check.pass ? "[PASS] " : "[FAIL] ") << check.name
                  << "  (max deviation " << check.max_deviation << ", tolerance "
                  << check.tolerance << ")\n";
    }
    std::cout << (report.all_pass ? "verification passed" : "verification FAILED") << " in "
              << report.elapsed_seconds << " s\n";

    std::filesystem::create_directories(cfg.out_dir);
    const std::string path = cfg.out_dir + "/verify_report.json";
    std::ofstream out(path);
    out << arrayhd::verify_report_json(report) << "\n";
    std::cout << "report: " << path << "\n";
    return report.all_pass ? kExitOk : kExitFailure;
}

int cmd_simulate(const CommonFlags& flags) {
    arrayhd::RunConfig cfg = resolve_config(flags);
    arrayhd::SimulateResult result = arrayhd::run_simulate(cfg);
    std::cout << "samples:   " << result.samples_path << "\n"
              << "analytic:  " << result.analytic_path << "\n"
              << "histogram: " << result.histogram_path << "\n"
              << "report:    " << result.report_path << "\n"
              << "acceptance rate " << result.acceptance_rate << ", chi-square p-value "
              << result.stats.p_value << "\n";
    return kExitOk;
}

int cmd_single_detector(const CommonFlags& flags) {
    arrayhd::RunConfig cfg = resolve_config(flags);
    arrayhd::SingleDetectorResult result = arrayhd::run_single_detector(cfg);
    std::cout << result.report_json << "\n";
    std::cout << "report: " << result.report_path << "\n";
    return result.ok ? kExitOk : kExitFailure;
}

int cmd_densities(const CommonFlags& flags) {
    arrayhd::RunConfig cfg = resolve_config(flags);
    arrayhd::DensitiesResult result = arrayhd::run_densities(cfg);
    std::cout << "analytic: " << result.analytic_path << "\n"
              << "oracle:   " << result.oracle_path << "\n"
              << "delta:    " << result.delta_path << "\n"
              << "max |analytic - oracle| = " << result.max_abs_delta << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"array-detector homodyne laboratory"};
    app.require_subcommand(1);

    CommonFlags verify_flags, simulate_flags, single_flags, densities_flags;
    CLI::App* verify = app.add_subcommand("verify", "run the operator-identity suite");
    add_common_flags(verify, verify_flags);
    CLI::App* simulate = app.add_subcommand("simulate", "sample and reconstruct a joint density");
    add_common_flags(simulate, simulate_flags);
    CLI::App* single =
        app.add_subcommand("single-detector", "one-port nine-pixel recovery end to end");
    add_common_flags(single, single_flags);
    CLI::App* densities =
        app.add_subcommand("densities", "analytic vs oracle density grids");
    add_common_flags(densities, densities_flags);

    try {
        app.parse(argc, argv);
        if (verify->parsed()) {
            return cmd_verify(verify_flags);
        }
        if (simulate->parsed()) {
            return cmd_simulate(simulate_flags);
        }
        if (single->parsed()) {
            return cmd_single_detector(single_flags);
        }
        if (densities->parsed()) {
            return cmd_densities(densities_flags);
        }
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints usage/message
        return kExitUsage;
    } catch (const arrayhd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
