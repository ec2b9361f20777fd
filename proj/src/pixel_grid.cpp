#include "arrayhd/pixel_grid.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace arrayhd {

namespace {

constexpr double kOrthoTol = 1e-10;
constexpr double kRankTol = 1e-8;  // squared-residual / Gram-eigenvalue threshold

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

std::uint64_t double_bits(double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, sizeof(u));
    return u;
}

Complex discrete_inner(const PixelGrid& grid, const Vector& u, const Vector& v) {
    return grid.pixel_area() * u.dot(v);
}

}  // namespace

PixelGrid::PixelGrid(int nx, int ny, double dx, double dy)
    : nx_(nx), ny_(ny), dx_(dx), dy_(dy) {
    if (nx < 1 || ny < 1) {
        throw std::invalid_argument("PixelGrid: pixel counts must be >= 1");
    }
    if (!(dx > 0.0) || !(dy > 0.0)) {
        throw std::invalid_argument("PixelGrid: pixel dimensions must be > 0");
    }
}

std::uint64_t PixelGrid::hash() const {
    std::uint64_t h = mix64(static_cast<std::uint64_t>(nx_) << 32 | static_cast<std::uint64_t>(ny_));
    h = mix64(h ^ double_bits(dx_));
    h = mix64(h ^ double_bits(dy_));
    return h;
}

ModeFunction::ModeFunction(PixelGrid grid, Vector values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.pixel_count()) {
        throw std::invalid_argument("ModeFunction: value count does not match grid");
    }
    double norm2 = grid_.pixel_area() * values_.squaredNorm();
    if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
        throw std::invalid_argument("ModeFunction: field has zero or non-finite norm");
    }
    values_ /= std::sqrt(norm2);
}

ModeBasis::ModeBasis(std::vector<ModeFunction> modes) : modes_(std::move(modes)) {
    if (modes_.empty()) {
        throw std::invalid_argument("ModeBasis: needs at least one mode");
    }
    for (std::size_t i = 1; i < modes_.size(); ++i) {
        if (!(modes_[i].grid() == modes_.front().grid())) {
            throw std::invalid_argument("ModeBasis: modes live on different grids");
        }
    }
    for (std::size_t i = 0; i < modes_.size(); ++i) {
        for (std::size_t k = 0; k < i; ++k) {
            if (std::abs(overlap(modes_[k], modes_[i])) > kOrthoTol) {
                throw std::invalid_argument("ModeBasis: modes are not pairwise orthonormal");
            }
        }
    }
}

Complex overlap(const ModeFunction& u, const ModeFunction& v) {
    if (!(u.grid() == v.grid())) {
        throw std::invalid_argument("overlap: modes live on different grids");
    }
    return discrete_inner(u.grid(), u.values(), v.values());
}

ModeFunction uniform_lo_mode(const PixelGrid& grid) {
    Vector v = Vector::Constant(grid.pixel_count(), 1.0 / std::sqrt(grid.width() * grid.height()));
    return ModeFunction(grid, std::move(v));
}

ModeBasis gram_schmidt(const std::vector<Vector>& raw, const PixelGrid& grid) {
    if (raw.empty()) {
        throw std::invalid_argument("gram_schmidt: no input fields");
    }
    std::vector<Vector> ortho;
    ortho.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i].size() != grid.pixel_count()) {
            throw std::invalid_argument("gram_schmidt: field size does not match grid");
        }
        double in_norm2 = std::real(discrete_inner(grid, raw[i], raw[i]));
        if (!(in_norm2 > 0.0)) {
            throw std::invalid_argument("gram_schmidt: rank deficiency at index " + std::to_string(i) +
                                        " (zero field)");
        }
        Vector v = raw[i] / std::sqrt(in_norm2);
        // Two projection passes keep the output orthonormal to ~1e-15.
        for (int pass = 0; pass < 2; ++pass) {
            for (const Vector& u : ortho) {
                v -= discrete_inner(grid, u, v) * u;
            }
        }
        double res2 = std::real(discrete_inner(grid, v, v));
        if (res2 <= kRankTol) {
            throw std::invalid_argument("gram_schmidt: rank deficiency at index " + std::to_string(i));
        }
        ortho.push_back(v / std::sqrt(res2));
    }
    std::vector<ModeFunction> modes;
    modes.reserve(ortho.size());
    for (auto& v : ortho) {
        modes.emplace_back(grid, std::move(v));
    }
    return ModeBasis(std::move(modes));
}

Vector sample_hermite_gauss(const PixelGrid& grid, int m, int n, const ModeParams& p) {
    if (m < 0 || n < 0) {
        throw std::invalid_argument("sample_hermite_gauss: orders must be >= 0");
    }
    const double w = p.waist;
    Vector field(grid.pixel_count());
    for (int j = 0; j < grid.nx(); ++j) {
        const double x = (grid.x_center(j) - p.center_x) * std::sqrt(2.0) / w;
        for (int jp = 0; jp < grid.ny(); ++jp) {
            const double y = (grid.y_center(jp) - p.center_y) * std::sqrt(2.0) / w;
            auto hx = hermite_functions(m, x);
            auto hy = hermite_functions(n, y);
            field(grid.index(j, jp)) = hx[m] * hy[n];
        }
    }
    return field;
}

Vector sample_vortex(const PixelGrid& grid, int ell, const ModeParams& p) {
    const double w = p.waist;
    const int aell = std::abs(ell);
    Vector field(grid.pixel_count());
    for (int j = 0; j < grid.nx(); ++j) {
        const double x = grid.x_center(j) - p.center_x;
        for (int jp = 0; jp < grid.ny(); ++jp) {
            const double y = grid.y_center(jp) - p.center_y;
            const double r = std::hypot(x, y);
            const double theta = std::atan2(y, x);
            field(grid.index(j, jp)) =
                std::pow(r / w, aell) * std::exp(-r * r / (w * w)) * std::polar(1.0, ell * theta);
        }
    }
    return field;
}

Vector sample_constant(const PixelGrid& grid) {
    return Vector::Constant(grid.pixel_count(), 1.0);
}

Vector sample_mode(const PixelGrid& grid, const std::string& family, const ModeParams& p) {
    if (family == "hermite-gauss") {
        return sample_hermite_gauss(grid, p.m, p.n, p);
    }
    if (family == "vortex") {
        return sample_vortex(grid, p.ell, p);
    }
    if (family == "constant") {
        return sample_constant(grid);
    }
    throw std::invalid_argument("sample_mode: unknown mode family '" + family + "'");
}

void write_mode_csv(const std::string& path, const PixelGrid& grid, const Vector& values) {
    if (values.size() != grid.pixel_count()) {
        throw std::invalid_argument("write_mode_csv: value count does not match grid");
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("write_mode_csv: cannot open " + path);
    }
    out << "j,jprime,re,im\n";
    char buf[96];
    for (int j = 0; j < grid.nx(); ++j) {
        for (int jp = 0; jp < grid.ny(); ++jp) {
            const Complex v = values(grid.index(j, jp));
            std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g\n", j, jp, v.real(), v.imag());
            out << buf;
        }
    }
}

Vector read_mode_csv(const std::string& path, const PixelGrid& grid) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("read_mode_csv: cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line) || line.rfind("j,jprime,re,im", 0) != 0) {
        throw std::runtime_error("read_mode_csv: missing header in " + path);
    }
    Vector values = Vector::Zero(grid.pixel_count());
    std::vector<bool> seen(static_cast<std::size_t>(grid.pixel_count()), false);
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream ss(line);
        int j, jp;
        double re, im;
        char comma;
        if (!(ss >> j >> comma >> jp >> comma >> re >> comma >> im)) {
            throw std::runtime_error("read_mode_csv: malformed row '" + line + "'");
        }
        if (j < 0 || j >= grid.nx() || jp < 0 || jp >= grid.ny()) {
            throw std::runtime_error("read_mode_csv: pixel index out of range in '" + line + "'");
        }
        values(grid.index(j, jp)) = Complex(re, im);
        seen[static_cast<std::size_t>(grid.index(j, jp))] = true;
    }
    for (bool s : seen) {
        if (!s) {
            throw std::runtime_error("read_mode_csv: incomplete pixel coverage in " + path);
        }
    }
    return values;
}

}  // namespace arrayhd
