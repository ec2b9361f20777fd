#pragma once

#include "arrayhd/config.hpp"
#include "arrayhd/histogram.hpp"

#include <string>

namespace arrayhd {

struct SimulateResult {
    std::string samples_path;
    std::string analytic_path;
    std::string histogram_path;
    std::string report_path;
    GofStats stats;
    double acceptance_rate = 0.0;
};

/// Samples the configured analytic density, histograms it, and emits the
/// plot-ready artifact set (sample CSV, analytic grid, histogram grid,
/// goodness-of-fit JSON). Deterministic for fixed config + seed.
SimulateResult run_simulate(const RunConfig& cfg);

struct DensitiesResult {
    std::string analytic_path;
    std::string oracle_path;
    std::string delta_path;
    double max_abs_delta = 0.0;
};

/// Evaluates the reconciled analytic density and the Fock-space oracle
/// density on a 41x41 grid of [-range, range]^2 and writes both plus their
/// pointwise difference.
DensitiesResult run_densities(const RunConfig& cfg);

struct SingleDetectorResult {
    bool ok = false;
    std::string report_path;
    std::string report_json;
};

/// End-to-end one-port run: pixel selection, moment recovery, and the
/// deviation table against the two-port pipeline. A basis without an
/// invertible selection produces ok = false with the diagnosis in the
/// report instead of an exception.
SingleDetectorResult run_single_detector(const RunConfig& cfg);

}  // namespace arrayhd
