#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace arrayhd {

struct IdentityCheck {
    int criterion;        // acceptance criterion this check belongs to (0 = supplementary)
    std::string name;
    double max_deviation;
    double tolerance;
    bool pass;
};

struct VerifyOptions {
    int n_max = 12;
    int grid_n = 16;
    double beta = 1e3;
    double nu1 = M_PI / 6.0;
    double nu2 = M_PI / 3.0;
    std::uint64_t selection_seed = 1;
    int selection_restarts = 500;
    int threads = 0;
};

struct VerifyReport {
    std::vector<IdentityCheck> checks;
    std::string inversion_convention;
    double selection_condition = 0.0;  // condition number used by criterion-3 checks
    double elapsed_seconds = 0.0;
    bool all_pass = false;
};

/// Runs every operator-level identity of the measurement pipeline on a
/// grid_n x grid_n detector with Fock cutoff n_max: the real-mode recovery,
/// the creation-projection sum rule, the mixed-quadrature decomposition, the
/// complex-mode recovery, the nine-pixel consistency and inversion checks,
/// the two-angle mixing inversion, and the mode-matching independence of the
/// recovered operators.
VerifyReport run_identity_suite(const VerifyOptions& opts = {});

std::string verify_report_json(const VerifyReport& report);

}  // namespace arrayhd
