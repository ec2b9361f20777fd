#pragma once

#include "arrayhd/fock_space.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace arrayhd {

/// Pixelated detector geometry. Pixels are labeled (j, jprime) with j along x
/// and jprime along y; pixel centers are symmetric about the detector center.
class PixelGrid {
public:
    PixelGrid(int nx, int ny, double dx, double dy);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double dx() const { return dx_; }
    double dy() const { return dy_; }
    double width() const { return nx_ * dx_; }    // D_x
    double height() const { return ny_ * dy_; }   // D_y
    double pixel_area() const { return dx_ * dy_; }
    int pixel_count() const { return nx_ * ny_; }

    int index(int j, int jprime) const { return j * ny_ + jprime; }
    double x_center(int j) const { return (j + 0.5) * dx_ - 0.5 * width(); }
    double y_center(int jprime) const { return (jprime + 0.5) * dy_ - 0.5 * height(); }

    std::uint64_t hash() const;
    bool operator==(const PixelGrid&) const = default;

private:
    int nx_, ny_;
    double dx_, dy_;
};

/// Complex mode amplitude per pixel, normalized so that
/// dx*dy * sum |U(j,jprime)|^2 = 1.
class ModeFunction {
public:
    ModeFunction(PixelGrid grid, Vector values);

    const PixelGrid& grid() const { return grid_; }
    const Vector& values() const { return values_; }
    Complex value(int j, int jprime) const { return values_(grid_.index(j, jprime)); }

private:
    PixelGrid grid_;
    Vector values_;
};

/// Ordered family of pairwise-orthonormal modes on a shared grid.
class ModeBasis {
public:
    explicit ModeBasis(std::vector<ModeFunction> modes);

    const PixelGrid& grid() const { return modes_.front().grid(); }
    const ModeFunction& mode(std::size_t i) const { return modes_.at(i); }
    std::size_t size() const { return modes_.size(); }

private:
    std::vector<ModeFunction> modes_;
};

/// Discrete L2 inner product dx*dy * sum conj(U) V.
Complex overlap(const ModeFunction& u, const ModeFunction& v);

/// Constant LO mode 1/sqrt(Dx*Dy).
ModeFunction uniform_lo_mode(const PixelGrid& grid);

/// Orthonormalizes raw pixel fields (order preserved). Throws with the index
/// of the first field that is numerically in the span of its predecessors.
ModeBasis gram_schmidt(const std::vector<Vector>& raw, const PixelGrid& grid);

struct ModeParams {
    int m = 0;        // hermite-gauss x order
    int n = 0;        // hermite-gauss y order
    int ell = 1;      // vortex topological charge
    double waist = 0.25;
    double center_x = 0.0;
    double center_y = 0.0;
};

// Un-normalized sample fields; feed through gram_schmidt.
Vector sample_hermite_gauss(const PixelGrid& grid, int m, int n, const ModeParams& p = {});
Vector sample_vortex(const PixelGrid& grid, int ell, const ModeParams& p = {});
Vector sample_constant(const PixelGrid& grid);

/// Dispatch by family name: "hermite-gauss", "vortex", "constant".
Vector sample_mode(const PixelGrid& grid, const std::string& family, const ModeParams& p = {});

void write_mode_csv(const std::string& path, const PixelGrid& grid, const Vector& values);
Vector read_mode_csv(const std::string& path, const PixelGrid& grid);

}  // namespace arrayhd
