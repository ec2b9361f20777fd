#pragma once

#include "arrayhd/fock_space.hpp"
#include "arrayhd/pixel_grid.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace arrayhd {

/// Linear two-mode mixer: interaction phase theta, mixing angle nu.
struct MixerConfig {
    double theta = 0.0;  // in [0, 2*pi)
    double nu = 0.0;     // in [0, pi/2]
};

/// Local oscillator |beta e^{i phi}> with beta real and positive.
struct LOConfig {
    double beta = 1e3;
    double phi = 0.0;
};

void validate(const MixerConfig& mix);
void validate(const LOConfig& lo);

/// Mode operators after the mixer:
///   a1' = cos(nu) a1 - i sin(nu) e^{-i theta} a2
///   a2' = cos(nu) a2 - i sin(nu) e^{+i theta} a1
struct ModeOperators {
    OperatorMatrix a1;
    OperatorMatrix a2;
    MixerConfig mix;

    const OperatorMatrix& mode(int k) const;
};

ModeOperators unmixed_mode_operators(const FockSpace& space);
ModeOperators mixed_mode_operators(const FockSpace& space, const MixerConfig& mix);

/// Provenance of a measured pixel-operator field; fields built under
/// different settings must not be combined.
struct MeasurementSettings {
    double phi = 0.0;
    double theta = 0.0;
    double nu = 0.0;
    double beta = 0.0;
    std::uint64_t grid_hash = 0;
};

bool same_signal_settings(const MeasurementSettings& a, const MeasurementSettings& b);

/// One operator per pixel, all on a shared Fock space, tagged with the
/// settings the field was built under.
class PixelOperatorField {
public:
    PixelOperatorField(PixelGrid grid, std::vector<OperatorMatrix> ops,
                       MeasurementSettings settings);

    const PixelGrid& grid() const { return grid_; }
    const MeasurementSettings& settings() const { return settings_; }
    const OperatorMatrix& at(int j, int jprime) const { return ops_[grid_.index(j, jprime)]; }
    const OperatorMatrix& at_index(int linear) const { return ops_.at(linear); }
    const FockSpace& space() const { return ops_.front().space(); }

private:
    PixelGrid grid_;
    std::vector<OperatorMatrix> ops_;
    MeasurementSettings settings_;
};

/// Photocount operator of one pixel at the requested output port (1 or 2):
///   (dxdy/2) [ beta^2/(DxDy)
///            + sum_{n,m} a_n'^dag a_m' U_n^* U_m
///            +- (beta/sqrt(DxDy)) sum_m (e^{-i phi} U_m a_m' + h.c.) ].
OperatorMatrix pixel_count_operator(const ModeBasis& basis, const ModeOperators& ops,
                                    const LOConfig& lo, int port, int j, int jprime);

PixelOperatorField pixel_counts(const ModeBasis& basis, const ModeOperators& ops,
                                const LOConfig& lo, int port);

/// Count operators for a subset of pixels (linear indices), sharing the
/// per-field fixed matrices across pixels.
std::vector<OperatorMatrix> pixel_count_operators_at(const ModeBasis& basis,
                                                     const ModeOperators& ops, const LOConfig& lo,
                                                     int port, const std::vector<int>& linear);

/// Difference count N1 - N2 in closed form:
///   N_d(j,j') = (dxdy * beta / sqrt(DxDy)) (e^{-i phi} sum_m U_m a_m' + h.c.).
PixelOperatorField difference_field(const ModeBasis& basis, const ModeOperators& ops,
                                    const LOConfig& lo);

/// Single-mode variant of the difference field (one signal mode, mode
/// function u), used for the complex-mode recovery route.
PixelOperatorField single_mode_difference_field(const OperatorMatrix& a, const ModeFunction& u,
                                                const LOConfig& lo);

/// Combines difference fields at LO phases phi and phi + pi/2 into the field
/// that isolates the creation-operator component:
///   R(j,j') = (1/(2 beta)) sqrt(DxDy/2) (N_d(phi) - i N_d(phi + pi/2))
///           = (dxdy/sqrt(2)) e^{i phi} sum_m a_m'^dag U_m^*.
/// Throws if the two fields were not taken under matched signal settings.
PixelOperatorField creation_projection_field(const PixelOperatorField& nd_phi,
                                             const PixelOperatorField& nd_phi_plus_half,
                                             const LOConfig& lo);

/// X_k'(phi) = sum_{j,j'} [R U_k + (R U_k)^dag].
OperatorMatrix mixed_quadrature(const PixelOperatorField& r, int mode, const ModeBasis& basis);

/// Signal quadratures recovered from mixed quadratures measured at two
/// mixing angles. Output angles refer to the LO phase phi and mixer phase
/// theta the inputs were built with.
struct RecoveredQuadratures {
    OperatorMatrix x1_phi;          // X_1(phi)
    OperatorMatrix x2_phi;          // X_2(phi)
    OperatorMatrix x1_phi_shifted;  // X_1(phi - theta + pi/2)
    OperatorMatrix x2_phi_shifted;  // X_2(phi + theta + pi/2)
};

RecoveredQuadratures invert_mixing_pair(const std::array<OperatorMatrix, 2>& xp_at_nu1,
                                        const std::array<OperatorMatrix, 2>& xp_at_nu2,
                                        double nu1, double nu2);

/// Human-readable statement of the inversion actually implemented, for
/// verification reports.
std::string mixing_inversion_convention();

/// Complex-mode single-detector-pair recovery:
///   X(phi) = (sqrt(DxDy)/(2 sqrt(2) beta))
///            sum [N_d(phi)(U + U^*) + i N_d(phi+pi/2)(U^* - U)].
OperatorMatrix single_mode_quadrature(const PixelOperatorField& nd_phi,
                                      const PixelOperatorField& nd_phi_plus_half,
                                      const ModeFunction& u, const LOConfig& lo);

/// Expectation map <N(j,j')> over the grid, for CSV export / plotting.
std::vector<double> expectation_map(const PixelOperatorField& field, const StateVector& state);

void write_expectation_map_csv(const std::string& path, const PixelGrid& grid,
                               const std::vector<double>& values);

}  // namespace arrayhd
