#pragma once

#include "arrayhd/densities.hpp"
#include "arrayhd/sampling.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace arrayhd {

/// Binned 2-D density estimate. Samples outside the range are tallied in
/// `overflow` and excluded from the bins, so the normalized estimate always
/// integrates to exactly 1 over the histogram window.
class Histogram2D {
public:
    Histogram2D(const SampleBatch& batch, int bins_x, double x_min, double x_max, int bins_y,
                double y_min, double y_max);

    int bins_x() const { return bins_x_; }
    int bins_y() const { return bins_y_; }
    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    double y_min() const { return y_min_; }
    double y_max() const { return y_max_; }
    double bin_width_x() const { return (x_max_ - x_min_) / bins_x_; }
    double bin_width_y() const { return (y_max_ - y_min_) / bins_y_; }
    double bin_area() const { return bin_width_x() * bin_width_y(); }

    std::uint64_t count(int ix, int iy) const { return counts_[index(ix, iy)]; }
    std::uint64_t in_range() const { return in_range_; }
    std::uint64_t overflow() const { return overflow_; }
    std::uint64_t total() const { return in_range_ + overflow_; }

    /// count / (in_range * bin_area); sums to 1 over the window by construction.
    double density_estimate(int ix, int iy) const;

    double x_center(int ix) const { return x_min_ + (ix + 0.5) * bin_width_x(); }
    double y_center(int iy) const { return y_min_ + (iy + 0.5) * bin_width_y(); }

private:
    std::size_t index(int ix, int iy) const {
        return static_cast<std::size_t>(ix) * bins_y_ + iy;
    }

    int bins_x_, bins_y_;
    double x_min_, x_max_, y_min_, y_max_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t in_range_ = 0;
    std::uint64_t overflow_ = 0;
};

/// Square histogram on [-range, range]^2.
Histogram2D histogram(const SampleBatch& batch, int bins, double range);

struct GofStats {
    double chi_square = 0.0;
    int dof = 0;
    double p_value = 0.0;
    double ks_x1 = 0.0;
    double ks_x2 = 0.0;
    std::size_t cells = 0;       // chi-square cells after merging
    std::uint64_t n_in = 0;      // in-range sample count
    std::uint64_t n_overflow = 0;
};

/// Pearson chi-square of the histogram against the analytic density
/// (conditioned on the histogram window; bins with expected count < 5 are
/// pooled) plus binned KS statistics of both marginals against the given
/// CDFs. Throws when there are too few samples for a meaningful test.
GofStats goodness_of_fit(const Histogram2D& h, const Density2D& density,
                         const std::function<double(double)>& marginal_cdf_x1,
                         const std::function<double(double)>& marginal_cdf_x2);

/// Mean absolute deviation between the normalized histogram estimate and the
/// window-conditioned analytic density, averaged over all bins.
double mean_abs_bin_error(const Histogram2D& h, const Density2D& density);

/// Largest such deviation over all bins.
double max_abs_bin_error(const Histogram2D& h, const Density2D& density);

void write_histogram_csv(const std::string& path, const Histogram2D& h);
void write_density_grid_csv(const std::string& path, const Density2D& density, int points,
                            double range);

}  // namespace arrayhd
