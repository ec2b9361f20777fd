#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace arrayhd {

/// Configuration or usage problem; the CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Full parameter record of one reproducible run. Defaults describe the
/// standard bench: 16x16 unit detector, n_max = 12, strong LO.
struct RunConfig {
    // state
    std::string family = "perelomov";  // or "truncated"
    double r = 1.0;
    double gamma = M_PI / 4.0;
    double c1 = 1.0 / std::sqrt(2.0);
    double c2 = 1.0 / std::sqrt(2.0);
    double delta = M_PI / 8.0;

    // quadrature phases of the joint density
    double phi1 = M_PI / 4.0;
    double phi2 = M_PI / 2.0;

    // measurement geometry and settings
    int grid_n = 16;
    int n_max = 12;
    double beta = 1e3;
    double phi = M_PI / 4.0;
    double theta = M_PI / 2.0;
    double nu = M_PI / 4.0;
    double nu1 = M_PI / 6.0;
    double nu2 = M_PI / 3.0;

    // signal basis; the one-port scheme needs complex modes (with real modes
    // the pixel-difference matrix has three identical column pairs and no
    // invertible 9-pixel selection exists), so the default is the vortex pair
    double waist = 0.25;
    std::string basis = "vortex";  // or "hermite-gauss" | "constant"

    // pixel selection search
    std::string strategy = "greedy-condition";
    int restarts = 500;
    std::uint64_t selection_seed = 1;

    // sampling and histogramming
    std::uint64_t seed = 20260811;
    std::uint64_t samples = 160000;
    int bins = 50;
    double range = 4.0;

    // execution
    std::string out_dir = ".";
    int threads = 0;

    /// Short deterministic tag embedded in output filenames.
    std::string file_tag() const;
};

/// Parses the supported TOML subset ([section] headers; key = value with
/// string/integer/float/boolean values; # comments) and overlays it on cfg.
/// Unknown keys are errors.
void apply_config_file(RunConfig& cfg, const std::string& path);

/// Parses TOML-subset text (used by tests and by apply_config_file).
void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin);

/// Locates <name>.toml among the preset search paths: $ARRAYHD_PRESET_DIR,
/// ./presets, and presets/ next to or above the executable.
std::string find_preset(const std::string& name);

/// Validates cross-field consistency (family names, positive counts, ...).
void validate(const RunConfig& cfg);

}  // namespace arrayhd
