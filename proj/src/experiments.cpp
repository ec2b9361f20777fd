#include "arrayhd/experiments.hpp"

#include "arrayhd/densities.hpp"
#include "arrayhd/fock_space.hpp"
#include "arrayhd/homodyne.hpp"
#include "arrayhd/pixel_grid.hpp"
#include "arrayhd/sampling.hpp"
#include "arrayhd/single_port.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

namespace arrayhd {

namespace {

namespace fs = std::filesystem;

std::string timestamp_utc() {
    char stamp[64];
    std::time_t now = std::time(nullptr);
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return stamp;
}

std::string out_path(const RunConfig& cfg, const std::string& stem, const std::string& ext) {
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / (stem + "_" + cfg.file_tag() + ext)).string();
}

struct DensityBundle {
    Density2D density;
    std::function<double(double)> marginal_cdf;
    ProposalConfig proposal;
};

DensityBundle density_bundle(const RunConfig& cfg) {
    if (cfg.family == "perelomov") {
        auto p = PerelomovDensityParams::make(cfg.r, cfg.gamma, cfg.phi1, cfg.phi2);
        return DensityBundle{make_density(p),
                             [p](double x) { return perelomov_marginal_cdf(p, x); },
                             perelomov_proposal(p)};
    }
    if (cfg.family == "truncated") {
        auto p = TruncatedDensityParams::make(cfg.c1, cfg.c2, cfg.delta, cfg.phi1, cfg.phi2);
        return DensityBundle{make_density(p),
                             [p](double x) { return truncated_marginal_cdf(p, x); },
                             truncated_proposal(p)};
    }
    throw ConfigError("unknown state family '" + cfg.family + "'");
}

void write_density_at_bin_centers(const std::string& path, const Density2D& density,
                                  int bins, double range) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path);
    }
    out << "x1,x2,value\n";
    const double w = 2.0 * range / bins;
    char buf[96];
    for (int i = 0; i < bins; ++i) {
        const double x1 = -range + (i + 0.5) * w;
        for (int k = 0; k < bins; ++k) {
            const double x2 = -range + (k + 0.5) * w;
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", x1, x2, density(x1, x2));
            out << buf;
        }
    }
}

/// Cutoff that makes the Fock oracle an effectively exact reference for the
/// squeezed-state density (amplitude tail below ~1e-9).
int oracle_cutoff(double r) {
    const double t = std::tanh(std::max(r, 1e-6));
    int n = 12;
    while (std::pow(t, 2.0 * (n + 1)) > 1e-18 && n < 160) {
        ++n;
    }
    return n;
}

StateVector oracle_state(const RunConfig& cfg) {
    if (cfg.family == "perelomov") {
        FockSpace space(oracle_cutoff(cfg.r));
        return perelomov_state(space, cfg.r, cfg.gamma, 1e-10).state;
    }
    FockSpace space(2);
    return truncated_perelomov_state(space, cfg.c1, cfg.c2, cfg.delta);
}

}  // namespace

SimulateResult run_simulate(const RunConfig& cfg) {
    validate(cfg);
    DensityBundle bundle = density_bundle(cfg);

    SampleBatch batch =
        rejection_sample(bundle.density, bundle.proposal, cfg.seed, cfg.samples, cfg.threads);
    Histogram2D hist = histogram(batch, cfg.bins, cfg.range);
    GofStats stats = goodness_of_fit(hist, bundle.density, bundle.marginal_cdf, bundle.marginal_cdf);

    SimulateResult result;
    result.acceptance_rate = batch.acceptance_rate;
    result.stats = stats;
    result.samples_path = out_path(cfg, "samples", ".csv");
    result.analytic_path = out_path(cfg, "density_analytic", ".csv");
    result.histogram_path = out_path(cfg, "histogram", ".csv");
    result.report_path = out_path(cfg, "report", ".json");

    write_samples_csv(result.samples_path, batch);
    write_density_at_bin_centers(result.analytic_path, bundle.density, cfg.bins, cfg.range);
    write_histogram_csv(result.histogram_path, hist);

    nlohmann::json j;
    j["timestamp"] = timestamp_utc();
    j["family"] = cfg.family;
    j["seed"] = cfg.seed;
    j["samples"] = cfg.samples;
    j["bins"] = cfg.bins;
    j["range"] = cfg.range;
    j["phi1"] = cfg.phi1;
    j["phi2"] = cfg.phi2;
    if (cfg.family == "perelomov") {
        j["r"] = cfg.r;
        j["gamma"] = cfg.gamma;
    } else {
        j["c1"] = cfg.c1;
        j["c2"] = cfg.c2;
        j["delta"] = cfg.delta;
    }
    j["acceptance_rate"] = batch.acceptance_rate;
    j["envelope"] = bundle.proposal.envelope;
    j["chi_square"] = stats.chi_square;
    j["dof"] = stats.dof;
    j["p_value"] = stats.p_value;
    j["ks_x1"] = stats.ks_x1;
    j["ks_x2"] = stats.ks_x2;
    j["cells"] = stats.cells;
    j["in_range"] = stats.n_in;
    j["overflow"] = stats.n_overflow;
    j["mean_abs_bin_error"] = mean_abs_bin_error(hist, bundle.density);
    j["max_abs_bin_error"] = max_abs_bin_error(hist, bundle.density);
    std::ofstream report(result.report_path);
    report << j.dump(2) << "\n";
    return result;
}

DensitiesResult run_densities(const RunConfig& cfg) {
    validate(cfg);
    DensityBundle bundle = density_bundle(cfg);
    StateVector state = oracle_state(cfg);

    const int points = 41;
    const double range = cfg.range;
    const double h = 2.0 * range / (points - 1);
    std::vector<std::pair<double, double>> grid_points;
    grid_points.reserve(points * points);
    for (int i = 0; i < points; ++i) {
        for (int k = 0; k < points; ++k) {
            grid_points.emplace_back(-range + i * h, -range + k * h);
        }
    }
    std::vector<double> oracle = quadrature_density_oracle(state, cfg.phi1, cfg.phi2, grid_points);

    DensitiesResult result;
    result.analytic_path = out_path(cfg, "density_analytic_grid", ".csv");
    result.oracle_path = out_path(cfg, "density_oracle_grid", ".csv");
    result.delta_path = out_path(cfg, "density_delta_grid", ".csv");

    std::ofstream fa(result.analytic_path), fo(result.oracle_path), fd(result.delta_path);
    if (!fa || !fo || !fd) {
        throw std::runtime_error("run_densities: cannot open output files under " + cfg.out_dir);
    }
    fa << "x1,x2,value\n";
    fo << "x1,x2,value\n";
    fd << "x1,x2,value\n";
    char buf[96];
    for (std::size_t idx = 0; idx < grid_points.size(); ++idx) {
        const auto [x1, x2] = grid_points[idx];
        const double analytic = bundle.density(x1, x2);
        const double delta = analytic - oracle[idx];
        result.max_abs_delta = std::max(result.max_abs_delta, std::abs(delta));
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", x1, x2, analytic);
        fa << buf;
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", x1, x2, oracle[idx]);
        fo << buf;
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", x1, x2, delta);
        fd << buf;
    }
    return result;
}

SingleDetectorResult run_single_detector(const RunConfig& cfg) {
    validate(cfg);
    const PixelGrid grid(cfg.grid_n, cfg.grid_n, 1.0 / cfg.grid_n, 1.0 / cfg.grid_n);
    ModeParams mp;
    mp.waist = 0.25 * grid.width();

    ModeBasis basis = [&]() {
        if (cfg.basis == "hermite-gauss") {
            return gram_schmidt(
                {sample_hermite_gauss(grid, 0, 0, mp), sample_hermite_gauss(grid, 1, 0, mp)}, grid);
        }
        if (cfg.basis == "vortex") {
            return gram_schmidt({sample_vortex(grid, 1, mp), sample_vortex(grid, 2, mp)}, grid);
        }
        // "constant": uniform mode paired with a unit-magnitude checkerboard
        // so that a second orthonormal constant-magnitude mode exists.
        Vector checker(grid.pixel_count());
        for (int j = 0; j < grid.nx(); ++j) {
            for (int jp = 0; jp < grid.ny(); ++jp) {
                checker(grid.index(j, jp)) = ((j + jp) % 2 == 0) ? 1.0 : -1.0;
            }
        }
        return gram_schmidt({sample_constant(grid), checker}, grid);
    }();

    const FockSpace space(cfg.n_max);
    const ModeOperators ops = mixed_mode_operators(space, MixerConfig{cfg.theta, cfg.nu});
    const LOConfig lo{cfg.beta, cfg.phi};

    nlohmann::json j;
    j["timestamp"] = timestamp_utc();
    j["basis"] = cfg.basis;
    j["grid_n"] = cfg.grid_n;
    j["n_max"] = cfg.n_max;
    j["theta"] = cfg.theta;
    j["nu"] = cfg.nu;
    j["phi"] = cfg.phi;
    j["beta"] = cfg.beta;

    SingleDetectorResult result;
    result.report_path = out_path(cfg, "single_detector_report", ".json");

    SelectionOptions sopts;
    sopts.strategy = selection_strategy_from_name(cfg.strategy);
    sopts.seed = cfg.selection_seed;
    sopts.restarts = cfg.restarts;
    sopts.threads = cfg.threads;

    try {
        SelectionResult sel = select_pixels(basis, grid, lo, sopts);
        j["selection"] = nlohmann::json::parse(selection_report_json(sel));

        DifferenceMatrix m = build_difference_matrix(basis, sel.selection, lo);
        std::vector<OperatorMatrix> nd_ops = pixel_difference_operators(basis, ops, lo, sel.selection);
        MomentVector recovered = recover_moments(nd_ops, m, grid);
        MomentVector exact = exact_moments(ops, lo);

        nlohmann::json moment_devs = nlohmann::json::array();
        for (std::size_t i = 0; i < 8; ++i) {
            moment_devs.push_back(max_abs_diff(recovered.entries[i], exact.entries[i]));
        }
        j["moment_deviations"] = moment_devs;

        auto [x1_one_port, x2_one_port] = quadratures_from_moments(recovered);
        PixelOperatorField nd = difference_field(basis, ops, lo);
        PixelOperatorField nd_plus =
            difference_field(basis, ops, LOConfig{lo.beta, lo.phi + M_PI / 2.0});
        PixelOperatorField r = creation_projection_field(nd, nd_plus, lo);
        const double dev1 = max_abs_diff(x1_one_port, mixed_quadrature(r, 1, basis));
        const double dev2 = max_abs_diff(x2_one_port, mixed_quadrature(r, 2, basis));
        j["quadrature_deviation_x1"] = dev1;
        j["quadrature_deviation_x2"] = dev2;
        j["tolerance"] = 1e-9 * sel.condition_number;
        result.ok = std::max(dev1, dev2) <= 1e-9 * sel.condition_number;
        j["pass"] = result.ok;

        // Difference-count expectation map for the configured state.
        StateVector psi = (cfg.family == "perelomov")
                              ? perelomov_state(space, cfg.r, cfg.gamma, 1e-2).state
                              : truncated_perelomov_state(space, cfg.c1, cfg.c2, cfg.delta);
        const std::string map_path = out_path(cfg, "difference_count_map", ".csv");
        write_expectation_map_csv(map_path, grid, expectation_map(nd, psi));
        j["difference_count_map"] = map_path;
    } catch (const std::runtime_error& err) {
        j["error"] = err.what();
        j["pass"] = false;
        result.ok = false;
    }

    result.report_json = j.dump(2);
    std::ofstream report(result.report_path);
    report << result.report_json << "\n";
    return result;
}

}  // namespace arrayhd
