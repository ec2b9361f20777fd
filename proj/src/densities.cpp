#include "arrayhd/densities.hpp"

#include <cmath>
#include <stdexcept>

namespace arrayhd {

namespace {

double gaussian_cdf(double x, double variance) {
    return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0 * variance)));
}

}  // namespace

PerelomovDensityParams PerelomovDensityParams::make(double r, double gamma, double phi1,
                                                    double phi2) {
    if (r < 0.0) {
        throw std::invalid_argument("PerelomovDensityParams: r must be >= 0");
    }
    const double t = std::tanh(r);
    const Complex lambda = std::polar(t, -(phi1 + phi2 + gamma));
    const double denom = 1.0 - t * t;
    const double a = std::norm(1.0 + lambda) / denom;
    const double b = std::norm(1.0 - lambda) / denom;
    return PerelomovDensityParams{r, gamma, phi1, phi2, a, b};
}

double perelomov_density_prefactor(const PerelomovDensityParams& p) {
    return 1.0 / (M_PI * std::sqrt(p.var_sum * p.var_diff));
}

double perelomov_density(const PerelomovDensityParams& p, double x1, double x2) {
    const double u = x1 + x2;
    const double v = x1 - x2;
    return perelomov_density_prefactor(p) *
           std::exp(-u * u / (2.0 * p.var_sum) - v * v / (2.0 * p.var_diff));
}

double perelomov_marginal_variance(const PerelomovDensityParams& p) {
    return 0.25 * (p.var_sum + p.var_diff);
}

double perelomov_marginal_cdf(const PerelomovDensityParams& p, double x) {
    return gaussian_cdf(x, perelomov_marginal_variance(p));
}

TruncatedDensityParams TruncatedDensityParams::make(double c1, double c2, double delta,
                                                    double phi1, double phi2) {
    if (std::abs(c1 * c1 + c2 * c2 - 1.0) > 1e-12) {
        throw std::invalid_argument("TruncatedDensityParams: c1^2 + c2^2 must equal 1");
    }
    return TruncatedDensityParams{c1, c2, delta, phi1, phi2};
}

double truncated_density(const TruncatedDensityParams& p, double x1, double x2) {
    const double cross = std::cos(p.phi1 + p.phi2 + p.delta);
    const double bracket = p.c1 * p.c1 + 4.0 * p.c2 * p.c2 * x1 * x1 * x2 * x2 +
                           4.0 * x1 * x2 * p.c1 * p.c2 * cross;
    return std::exp(-x1 * x1 - x2 * x2) / M_PI * bracket;
}

double truncated_marginal_variance(const TruncatedDensityParams& p) {
    // marginal pdf: e^{-x^2}/sqrt(pi) (c1^2 + 2 c2^2 x^2)
    return 0.5 * p.c1 * p.c1 + 1.5 * p.c2 * p.c2;
}

double truncated_marginal_cdf(const TruncatedDensityParams& p, double x) {
    const double phi = 0.5 * (1.0 + std::erf(x));
    const double second = 0.25 * (1.0 + std::erf(x)) - x * std::exp(-x * x) / (2.0 * std::sqrt(M_PI));
    return p.c1 * p.c1 * phi + 2.0 * p.c2 * p.c2 * second;
}

Density2D make_density(const PerelomovDensityParams& p) {
    return [p](double x1, double x2) { return perelomov_density(p, x1, x2); };
}

Density2D make_density(const TruncatedDensityParams& p) {
    return [p](double x1, double x2) { return truncated_density(p, x1, x2); };
}

double integrate_density(const Density2D& density, double range, int points_per_axis) {
    if (points_per_axis < 2) {
        throw std::invalid_argument("integrate_density: need at least 2 points per axis");
    }
    const int n = points_per_axis;
    const double h = 2.0 * range / (n - 1);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x1 = -range + i * h;
        const double wx = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        for (int k = 0; k < n; ++k) {
            const double x2 = -range + k * h;
            const double wy = (k == 0 || k == n - 1) ? 0.5 : 1.0;
            total += wx * wy * density(x1, x2);
        }
    }
    return total * h * h;
}

}  // namespace arrayhd
