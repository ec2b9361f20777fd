#include "arrayhd/histogram.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace arrayhd {

namespace {

// 4-point Gauss-Legendre rule on [-1, 1].
constexpr double kGlNode[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                               0.8611363115940526};
constexpr double kGlWeight[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                 0.3478548451374538};

double bin_mass(const Density2D& density, double x0, double x1, double y0, double y1) {
    const double hx = 0.5 * (x1 - x0), cx = 0.5 * (x1 + x0);
    const double hy = 0.5 * (y1 - y0), cy = 0.5 * (y1 + y0);
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int k = 0; k < 4; ++k) {
            acc += kGlWeight[i] * kGlWeight[k] * density(cx + hx * kGlNode[i], cy + hy * kGlNode[k]);
        }
    }
    return acc * hx * hy;
}

std::vector<double> window_bin_masses(const Histogram2D& h, const Density2D& density,
                                      double* window_total) {
    std::vector<double> mass(static_cast<std::size_t>(h.bins_x()) * h.bins_y());
    double total = 0.0;
    for (int ix = 0; ix < h.bins_x(); ++ix) {
        const double x0 = h.x_min() + ix * h.bin_width_x();
        const double x1 = x0 + h.bin_width_x();
        for (int iy = 0; iy < h.bins_y(); ++iy) {
            const double y0 = h.y_min() + iy * h.bin_width_y();
            const double y1 = y0 + h.bin_width_y();
            const double m = bin_mass(density, x0, x1, y0, y1);
            mass[static_cast<std::size_t>(ix) * h.bins_y() + iy] = m;
            total += m;
        }
    }
    if (window_total != nullptr) {
        *window_total = total;
    }
    return mass;
}

double binned_ks(const std::vector<std::uint64_t>& counts, double edge0, double width,
                 std::uint64_t n, const std::function<double(double)>& cdf) {
    const double f0 = cdf(edge0);
    const double f1 = cdf(edge0 + width * static_cast<double>(counts.size()));
    const double span = f1 - f0;
    double ks = 0.0;
    std::uint64_t cum = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        cum += counts[i];
        const double emp = static_cast<double>(cum) / static_cast<double>(n);
        const double model = (cdf(edge0 + width * static_cast<double>(i + 1)) - f0) / span;
        ks = std::max(ks, std::abs(emp - model));
    }
    return ks;
}

}  // namespace

Histogram2D::Histogram2D(const SampleBatch& batch, int bins_x, double x_min, double x_max,
                         int bins_y, double y_min, double y_max)
    : bins_x_(bins_x), bins_y_(bins_y), x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max),
      counts_(static_cast<std::size_t>(bins_x) * static_cast<std::size_t>(bins_y), 0) {
    if (batch.samples.empty()) {
        throw std::invalid_argument("Histogram2D: empty sample batch");
    }
    if (bins_x < 1 || bins_y < 1 || !(x_max > x_min) || !(y_max > y_min)) {
        throw std::invalid_argument("Histogram2D: invalid binning");
    }
    const double wx = bin_width_x();
    const double wy = bin_width_y();
    for (const auto& [x, y] : batch.samples) {
        if (x < x_min_ || x >= x_max_ || y < y_min_ || y >= y_max_) {
            ++overflow_;
            continue;
        }
        int ix = static_cast<int>((x - x_min_) / wx);
        int iy = static_cast<int>((y - y_min_) / wy);
        ix = std::min(ix, bins_x_ - 1);
        iy = std::min(iy, bins_y_ - 1);
        ++counts_[index(ix, iy)];
        ++in_range_;
    }
    if (in_range_ == 0) {
        throw std::invalid_argument("Histogram2D: no samples fall inside the requested range");
    }
}

double Histogram2D::density_estimate(int ix, int iy) const {
    return static_cast<double>(counts_[index(ix, iy)]) /
           (static_cast<double>(in_range_) * bin_area());
}

Histogram2D histogram(const SampleBatch& batch, int bins, double range) {
    return Histogram2D(batch, bins, -range, range, bins, -range, range);
}

GofStats goodness_of_fit(const Histogram2D& h, const Density2D& density,
                         const std::function<double(double)>& marginal_cdf_x1,
                         const std::function<double(double)>& marginal_cdf_x2) {
    const std::uint64_t n = h.in_range();
    if (n < 25) {
        throw std::invalid_argument("goodness_of_fit: too few in-range samples");
    }

    double window_total = 0.0;
    std::vector<double> mass = window_bin_masses(h, density, &window_total);
    if (!(window_total > 0.0)) {
        throw std::invalid_argument("goodness_of_fit: density has no mass inside the window");
    }

    // Pearson cells: every bin with expected count >= 5 stands alone, the
    // remainder is pooled into one cell.
    double chi = 0.0;
    std::size_t cells = 0;
    double pooled_expected = 0.0;
    double pooled_observed = 0.0;
    for (int ix = 0; ix < h.bins_x(); ++ix) {
        for (int iy = 0; iy < h.bins_y(); ++iy) {
            const double expected =
                static_cast<double>(n) * mass[static_cast<std::size_t>(ix) * h.bins_y() + iy] /
                window_total;
            const double observed = static_cast<double>(h.count(ix, iy));
            if (expected >= 5.0) {
                chi += (observed - expected) * (observed - expected) / expected;
                ++cells;
            } else {
                pooled_expected += expected;
                pooled_observed += observed;
            }
        }
    }
    if (pooled_expected > 0.0) {
        chi += (pooled_observed - pooled_expected) * (pooled_observed - pooled_expected) /
               pooled_expected;
        ++cells;
    }
    if (cells < 2) {
        throw std::invalid_argument("goodness_of_fit: not enough populated cells for a chi-square test");
    }

    GofStats stats;
    stats.chi_square = chi;
    stats.cells = cells;
    stats.dof = static_cast<int>(cells) - 1;
    boost::math::chi_squared dist(static_cast<double>(stats.dof));
    stats.p_value = boost::math::cdf(boost::math::complement(dist, chi));
    stats.n_in = n;
    stats.n_overflow = h.overflow();

    // Marginal KS statistics from the binned counts.
    std::vector<std::uint64_t> mx(static_cast<std::size_t>(h.bins_x()), 0);
    std::vector<std::uint64_t> my(static_cast<std::size_t>(h.bins_y()), 0);
    for (int ix = 0; ix < h.bins_x(); ++ix) {
        for (int iy = 0; iy < h.bins_y(); ++iy) {
            mx[static_cast<std::size_t>(ix)] += h.count(ix, iy);
            my[static_cast<std::size_t>(iy)] += h.count(ix, iy);
        }
    }
    stats.ks_x1 = binned_ks(mx, h.x_min(), h.bin_width_x(), n, marginal_cdf_x1);
    stats.ks_x2 = binned_ks(my, h.y_min(), h.bin_width_y(), n, marginal_cdf_x2);
    return stats;
}

double mean_abs_bin_error(const Histogram2D& h, const Density2D& density) {
    double window_total = 0.0;
    std::vector<double> mass = window_bin_masses(h, density, &window_total);
    double acc = 0.0;
    for (int ix = 0; ix < h.bins_x(); ++ix) {
        for (int iy = 0; iy < h.bins_y(); ++iy) {
            const double analytic =
                mass[static_cast<std::size_t>(ix) * h.bins_y() + iy] / (window_total * h.bin_area());
            acc += std::abs(h.density_estimate(ix, iy) - analytic);
        }
    }
    return acc / (static_cast<double>(h.bins_x()) * static_cast<double>(h.bins_y()));
}

double max_abs_bin_error(const Histogram2D& h, const Density2D& density) {
    double window_total = 0.0;
    std::vector<double> mass = window_bin_masses(h, density, &window_total);
    double worst = 0.0;
    for (int ix = 0; ix < h.bins_x(); ++ix) {
        for (int iy = 0; iy < h.bins_y(); ++iy) {
            const double analytic =
                mass[static_cast<std::size_t>(ix) * h.bins_y() + iy] / (window_total * h.bin_area());
            worst = std::max(worst, std::abs(h.density_estimate(ix, iy) - analytic));
        }
    }
    return worst;
}

void write_histogram_csv(const std::string& path, const Histogram2D& h) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("write_histogram_csv: cannot open " + path);
    }
    out << "x1,x2,value\n";
    char buf[96];
    for (int ix = 0; ix < h.bins_x(); ++ix) {
        for (int iy = 0; iy < h.bins_y(); ++iy) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", h.x_center(ix), h.y_center(iy),
                          h.density_estimate(ix, iy));
            out << buf;
        }
    }
}

void write_density_grid_csv(const std::string& path, const Density2D& density, int points,
                            double range) {
    if (points < 2) {
        throw std::invalid_argument("write_density_grid_csv: need at least 2 points per axis");
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("write_density_grid_csv: cannot open " + path);
    }
    out << "x1,x2,value\n";
    const double h = 2.0 * range / (points - 1);
    char buf[96];
    for (int i = 0; i < points; ++i) {
        const double x1 = -range + i * h;
        for (int k = 0; k < points; ++k) {
            const double x2 = -range + k * h;
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", x1, x2, density(x1, x2));
            out << buf;
        }
    }
}

}  // namespace arrayhd
