#pragma once

#include "arrayhd/fock_space.hpp"

#include <functional>

namespace arrayhd {

using Density2D = std::function<double(double, double)>;

/// Joint quadrature density parameters of the two-mode squeezed (Perelomov)
/// state. var_sum and var_diff are the variances of x1 + x2 and x1 - x2:
///   var_sum  = |1 + tanh(r) e^{-i(phi1+phi2+gamma)}|^2 / (1 - tanh^2 r)
///   var_diff = |1 - tanh(r) e^{-i(phi1+phi2+gamma)}|^2 / (1 - tanh^2 r)
struct PerelomovDensityParams {
    double r;
    double gamma;
    double phi1;
    double phi2;
    double var_sum;   // A
    double var_diff;  // B

    static PerelomovDensityParams make(double r, double gamma, double phi1, double phi2);
};

/// Normalization constant of the joint density, 1/(pi sqrt(A B)). The
/// published prefactor 2/(pi A B) only normalizes when A B = 1, and the
/// published exponent is tied to a vacuum quadrature variance of 1/4; the
/// constants here are fixed against the Fock-space density oracle, which
/// uses the vacuum variance 1/2 convention throughout.
double perelomov_density_prefactor(const PerelomovDensityParams& p);

/// p(x1, x2) = exp[-(x1+x2)^2/(2A) - (x1-x2)^2/(2B)] / (pi sqrt(A B)).
double perelomov_density(const PerelomovDensityParams& p, double x1, double x2);

/// Marginal CDF of x1 (and of x2: the marginals coincide), a centered
/// Gaussian with variance (A + B)/4.
double perelomov_marginal_cdf(const PerelomovDensityParams& p, double x);
double perelomov_marginal_variance(const PerelomovDensityParams& p);

/// Parameters of the |0,0>/|1,1> superposition density.
struct TruncatedDensityParams {
    double c1;
    double c2;
    double delta;
    double phi1;
    double phi2;

    static TruncatedDensityParams make(double c1, double c2, double delta, double phi1,
                                       double phi2);
};

/// p = (e^{-x1^2 - x2^2}/pi) [c1^2 + 4 c2^2 x1^2 x2^2
///                            + 4 x1 x2 c1 c2 cos(phi1 + phi2 + delta)].
/// Nonnegative: the bracket is bounded below by (c1 - 2 c2 |x1 x2|)^2.
double truncated_density(const TruncatedDensityParams& p, double x1, double x2);

double truncated_marginal_cdf(const TruncatedDensityParams& p, double x);
double truncated_marginal_variance(const TruncatedDensityParams& p);

Density2D make_density(const PerelomovDensityParams& p);
Density2D make_density(const TruncatedDensityParams& p);

/// Midpoint-free quadrature of a smooth, rapidly decaying density over
/// [-range, range]^2 (trapezoid rule; geometric convergence for
/// Gaussian-type integrands).
double integrate_density(const Density2D& density, double range, int points_per_axis = 241);

}  // namespace arrayhd
