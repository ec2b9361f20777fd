#include "arrayhd/homodyne.hpp"

#include "arrayhd/parallel.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>

namespace arrayhd {

namespace {

constexpr double kSettingsTol = 1e-12;
constexpr double kDegenerateMixingTol = 1e-6;
constexpr double kHalfPi = M_PI / 2.0;

MeasurementSettings settings_for(const LOConfig& lo, const MixerConfig& mix,
                                 const PixelGrid& grid) {
    return MeasurementSettings{lo.phi, mix.theta, mix.nu, lo.beta, grid.hash()};
}

// Evaluates one operator per pixel in parallel; the merged order is fixed by
// the pixel index, so results are independent of the worker count.
template <typename Fn>
std::vector<OperatorMatrix> build_pixel_ops(const PixelGrid& grid, Fn&& make) {
    const int count = grid.pixel_count();
    std::vector<std::optional<OperatorMatrix>> slots(static_cast<std::size_t>(count));
    std::atomic<int> cursor{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        for (;;) {
            const int i = cursor.fetch_add(1);
            if (i >= count) {
                return;
            }
            try {
                slots[static_cast<std::size_t>(i)].emplace(make(i));
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                cursor.store(count);
                return;
            }
        }
    };
    const int threads = resolve_threads(0);
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    std::vector<OperatorMatrix> out;
    out.reserve(static_cast<std::size_t>(count));
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

}  // namespace

void validate(const MixerConfig& mix) {
    if (mix.nu < 0.0 || mix.nu > kHalfPi) {
        throw std::invalid_argument("MixerConfig: nu must lie in [0, pi/2]");
    }
    if (mix.theta < 0.0 || mix.theta >= 2.0 * M_PI) {
        throw std::invalid_argument("MixerConfig: theta must lie in [0, 2*pi)");
    }
}

void validate(const LOConfig& lo) {
    if (!(lo.beta > 0.0)) {
        throw std::invalid_argument("LOConfig: beta must be > 0");
    }
}

const OperatorMatrix& ModeOperators::mode(int k) const {
    if (k == 1) {
        return a1;
    }
    if (k == 2) {
        return a2;
    }
    throw std::invalid_argument("ModeOperators: mode index must be 1 or 2");
}

ModeOperators unmixed_mode_operators(const FockSpace& space) {
    return ModeOperators{annihilation(space, 1), annihilation(space, 2), MixerConfig{}};
}

ModeOperators mixed_mode_operators(const FockSpace& space, const MixerConfig& mix) {
    validate(mix);
    OperatorMatrix a1 = annihilation(space, 1);
    OperatorMatrix a2 = annihilation(space, 2);
    const Complex i(0.0, 1.0);
    const double c = std::cos(mix.nu);
    const double s = std::sin(mix.nu);
    OperatorMatrix a1p = Complex(c) * a1 - i * s * std::polar(1.0, -mix.theta) * a2;
    OperatorMatrix a2p = Complex(c) * a2 - i * s * std::polar(1.0, mix.theta) * a1;
    return ModeOperators{std::move(a1p), std::move(a2p), mix};
}

bool same_signal_settings(const MeasurementSettings& a, const MeasurementSettings& b) {
    return std::abs(a.theta - b.theta) < kSettingsTol && std::abs(a.nu - b.nu) < kSettingsTol &&
           std::abs(a.beta - b.beta) < kSettingsTol && a.grid_hash == b.grid_hash;
}

PixelOperatorField::PixelOperatorField(PixelGrid grid, std::vector<OperatorMatrix> ops,
                                       MeasurementSettings settings)
    : grid_(grid), ops_(std::move(ops)), settings_(settings) {
    if (ops_.size() != static_cast<std::size_t>(grid_.pixel_count())) {
        throw std::invalid_argument("PixelOperatorField: operator count does not match grid");
    }
    for (const auto& op : ops_) {
        if (!(op.space() == ops_.front().space())) {
            throw std::invalid_argument("PixelOperatorField: operators on mixed Fock spaces");
        }
    }
}

namespace {

// Fixed matrices shared by every pixel of a count field.
struct CountKernels {
    FockSpace space;
    Matrix identity;        // beta^2/(DxDy) * I
    Matrix quad[2][2];      // a_n'^dag a_k'
    Matrix linear[2];       // (beta/sqrt(DxDy)) e^{-i phi} a_k'
    Matrix linear_dag[2];
};

CountKernels make_count_kernels(const ModeOperators& ops, const LOConfig& lo,
                                const PixelGrid& grid) {
    const FockSpace& space = ops.a1.space();
    const double det_area = grid.width() * grid.height();
    const Complex lo_factor = (lo.beta / std::sqrt(det_area)) * std::polar(1.0, -lo.phi);
    CountKernels k{space, {}, {}, {}, {}};
    k.identity = (lo.beta * lo.beta / det_area) *
                 Matrix::Identity(space.dim(), space.dim());
    for (int n = 0; n < 2; ++n) {
        for (int m = 0; m < 2; ++m) {
            k.quad[n][m] = ops.mode(n + 1).entries().adjoint() * ops.mode(m + 1).entries();
        }
        k.linear[n] = lo_factor * ops.mode(n + 1).entries();
        k.linear_dag[n] = k.linear[n].adjoint();
    }
    return k;
}

OperatorMatrix count_operator_from_kernels(const CountKernels& k, const ModeBasis& basis,
                                           int port, int j, int jprime) {
    const double sign = (port == 1) ? 1.0 : -1.0;
    const Complex u[2] = {basis.mode(0).value(j, jprime), basis.mode(1).value(j, jprime)};

    Matrix m = k.identity;
    for (int n = 0; n < 2; ++n) {
        for (int c = 0; c < 2; ++c) {
            m += (std::conj(u[n]) * u[c]) * k.quad[n][c];
        }
        m += (sign * u[n]) * k.linear[n];
        m += (sign * std::conj(u[n])) * k.linear_dag[n];
    }
    m *= 0.5 * basis.grid().pixel_area();
    return OperatorMatrix(k.space, std::move(m), true);
}

}  // namespace

OperatorMatrix pixel_count_operator(const ModeBasis& basis, const ModeOperators& ops,
                                    const LOConfig& lo, int port, int j, int jprime) {
    if (basis.size() != 2) {
        throw std::invalid_argument("pixel_count_operator: basis must have exactly 2 modes");
    }
    if (port != 1 && port != 2) {
        throw std::invalid_argument("pixel_count_operator: port must be 1 or 2");
    }
    validate(lo);
    CountKernels kernels = make_count_kernels(ops, lo, basis.grid());
    return count_operator_from_kernels(kernels, basis, port, j, jprime);
}

PixelOperatorField pixel_counts(const ModeBasis& basis, const ModeOperators& ops,
                                const LOConfig& lo, int port) {
    if (basis.size() != 2) {
        throw std::invalid_argument("pixel_counts: basis must have exactly 2 modes");
    }
    if (port != 1 && port != 2) {
        throw std::invalid_argument("pixel_counts: port must be 1 or 2");
    }
    validate(lo);
    const PixelGrid& grid = basis.grid();
    CountKernels kernels = make_count_kernels(ops, lo, grid);
    std::vector<OperatorMatrix> fields = build_pixel_ops(grid, [&](int idx) {
        return count_operator_from_kernels(kernels, basis, port, idx / grid.ny(), idx % grid.ny());
    });
    return PixelOperatorField(grid, std::move(fields), settings_for(lo, ops.mix, grid));
}

std::vector<OperatorMatrix> pixel_count_operators_at(const ModeBasis& basis,
                                                     const ModeOperators& ops, const LOConfig& lo,
                                                     int port, const std::vector<int>& linear) {
    if (basis.size() != 2) {
        throw std::invalid_argument("pixel_count_operators_at: basis must have exactly 2 modes");
    }
    if (port != 1 && port != 2) {
        throw std::invalid_argument("pixel_count_operators_at: port must be 1 or 2");
    }
    validate(lo);
    const PixelGrid& grid = basis.grid();
    CountKernels kernels = make_count_kernels(ops, lo, grid);
    std::vector<OperatorMatrix> result;
    result.reserve(linear.size());
    for (int idx : linear) {
        if (idx < 0 || idx >= grid.pixel_count()) {
            throw std::invalid_argument("pixel_count_operators_at: pixel index outside the grid");
        }
        result.push_back(count_operator_from_kernels(kernels, basis, port, idx / grid.ny(),
                                                     idx % grid.ny()));
    }
    return result;
}

PixelOperatorField difference_field(const ModeBasis& basis, const ModeOperators& ops,
                                    const LOConfig& lo) {
    if (basis.size() != 2) {
        throw std::invalid_argument("difference_field: basis must have exactly 2 modes");
    }
    validate(lo);
    const PixelGrid& grid = basis.grid();
    const FockSpace& space = ops.a1.space();
    const double k_factor = grid.pixel_area() * lo.beta / std::sqrt(grid.width() * grid.height());
    const Complex lo_phase = std::polar(1.0, -lo.phi);

    // Fixed matrices scaled per pixel.
    const Matrix b1 = lo_phase * ops.a1.entries();
    const Matrix b2 = lo_phase * ops.a2.entries();
    const Matrix b1d = b1.adjoint();
    const Matrix b2d = b2.adjoint();

    std::vector<OperatorMatrix> fields = build_pixel_ops(grid, [&](int idx) {
        const Complex u1 = basis.mode(0).values()(idx);
        const Complex u2 = basis.mode(1).values()(idx);
        Matrix m = u1 * b1 + u2 * b2 + std::conj(u1) * b1d + std::conj(u2) * b2d;
        m *= k_factor;
        return OperatorMatrix(space, std::move(m), true);
    });
    return PixelOperatorField(grid, std::move(fields), settings_for(lo, ops.mix, grid));
}

PixelOperatorField single_mode_difference_field(const OperatorMatrix& a, const ModeFunction& u,
                                                const LOConfig& lo) {
    validate(lo);
    const PixelGrid& grid = u.grid();
    const double k_factor = grid.pixel_area() * lo.beta / std::sqrt(grid.width() * grid.height());
    const Matrix b = std::polar(1.0, -lo.phi) * a.entries();
    const Matrix bd = b.adjoint();

    std::vector<OperatorMatrix> fields = build_pixel_ops(grid, [&](int idx) {
        const Complex uv = u.values()(idx);
        Matrix m = uv * b + std::conj(uv) * bd;
        m *= k_factor;
        return OperatorMatrix(a.space(), std::move(m), true);
    });
    return PixelOperatorField(grid, std::move(fields),
                              settings_for(lo, MixerConfig{}, grid));
}

PixelOperatorField creation_projection_field(const PixelOperatorField& nd_phi,
                                             const PixelOperatorField& nd_phi_plus_half,
                                             const LOConfig& lo) {
    const MeasurementSettings& s0 = nd_phi.settings();
    const MeasurementSettings& s1 = nd_phi_plus_half.settings();
    if (!same_signal_settings(s0, s1)) {
        throw std::invalid_argument(
            "creation_projection_field: fields were built under different signal settings");
    }
    if (std::abs(s1.phi - (s0.phi + kHalfPi)) > kSettingsTol) {
        throw std::invalid_argument(
            "creation_projection_field: second field must be at LO phase phi + pi/2");
    }
    const PixelGrid& grid = nd_phi.grid();
    const double pref = std::sqrt(grid.width() * grid.height() / 2.0) / (2.0 * lo.beta);
    const Complex i(0.0, 1.0);

    std::vector<OperatorMatrix> fields = build_pixel_ops(grid, [&](int idx) {
        Matrix m =
            pref * (nd_phi.at_index(idx).entries() - i * nd_phi_plus_half.at_index(idx).entries());
        return OperatorMatrix(nd_phi.space(), std::move(m));
    });
    return PixelOperatorField(grid, std::move(fields), s0);
}

OperatorMatrix mixed_quadrature(const PixelOperatorField& r, int mode, const ModeBasis& basis) {
    if (mode != 1 && mode != 2) {
        throw std::invalid_argument("mixed_quadrature: mode index must be 1 or 2");
    }
    if (!(basis.grid() == r.grid())) {
        throw std::invalid_argument("mixed_quadrature: basis grid does not match field grid");
    }
    const ModeFunction& u = basis.mode(static_cast<std::size_t>(mode - 1));
    const FockSpace& space = r.space();
    Matrix acc = Matrix::Zero(space.dim(), space.dim());
    for (int idx = 0; idx < r.grid().pixel_count(); ++idx) {
        acc += u.values()(idx) * r.at_index(idx).entries();
    }
    Matrix x = acc + acc.adjoint().eval();
    return OperatorMatrix(space, std::move(x), true);
}

RecoveredQuadratures invert_mixing_pair(const std::array<OperatorMatrix, 2>& xp_at_nu1,
                                        const std::array<OperatorMatrix, 2>& xp_at_nu2,
                                        double nu1, double nu2) {
    const double det = std::sin(nu2 - nu1);
    if (std::abs(det) <= kDegenerateMixingTol) {
        throw std::invalid_argument("invert_mixing_pair: degenerate mixing angles (nu2 - nu1 = 0 mod pi)");
    }
    const double s1 = std::sin(nu1), c1 = std::cos(nu1);
    const double s2 = std::sin(nu2), c2 = std::cos(nu2);
    const Complex inv_det(1.0 / det);

    // X_k'(nu) = cos(nu) X_k(phi) + sin(nu) X_other(shifted); solve each 2x2 system.
    auto solve = [&](const OperatorMatrix& at1, const OperatorMatrix& at2) {
        OperatorMatrix direct = inv_det * (Complex(s2) * at1 - Complex(s1) * at2);
        OperatorMatrix shifted = inv_det * (Complex(c1) * at2 - Complex(c2) * at1);
        return std::pair<OperatorMatrix, OperatorMatrix>(std::move(direct), std::move(shifted));
    };
    auto [x1_phi, x2_shift] = solve(xp_at_nu1[0], xp_at_nu2[0]);
    auto [x2_phi, x1_shift] = solve(xp_at_nu1[1], xp_at_nu2[1]);
    return RecoveredQuadratures{x1_phi.as_hermitian(), x2_phi.as_hermitian(),
                                x1_shift.as_hermitian(), x2_shift.as_hermitian()};
}

std::string mixing_inversion_convention() {
    return "With D = sin(nu2 - nu1): "
           "X1(phi) = [sin(nu2) X1'(nu1) - sin(nu1) X1'(nu2)]/D; "
           "X2(phi + theta + pi/2) = [cos(nu1) X1'(nu2) - cos(nu2) X1'(nu1)]/D; "
           "X2(phi) = [sin(nu2) X2'(nu1) - sin(nu1) X2'(nu2)]/D; "
           "X1(phi - theta + pi/2) = [cos(nu1) X2'(nu2) - cos(nu2) X2'(nu1)]/D. "
           "Equivalent to the published expressions with the two denominators "
           "sin(nu2 - nu1) and sin(nu1 - nu2) interchanged; validated against the "
           "direct quadrature definitions.";
}

OperatorMatrix single_mode_quadrature(const PixelOperatorField& nd_phi,
                                      const PixelOperatorField& nd_phi_plus_half,
                                      const ModeFunction& u, const LOConfig& lo) {
    const MeasurementSettings& s0 = nd_phi.settings();
    const MeasurementSettings& s1 = nd_phi_plus_half.settings();
    if (!same_signal_settings(s0, s1) || std::abs(s1.phi - (s0.phi + kHalfPi)) > kSettingsTol) {
        throw std::invalid_argument("single_mode_quadrature: fields must differ only by the pi/2 LO shift");
    }
    const PixelGrid& grid = nd_phi.grid();
    if (!(u.grid() == grid)) {
        throw std::invalid_argument("single_mode_quadrature: mode grid does not match field grid");
    }
    const FockSpace& space = nd_phi.space();
    const double pref = std::sqrt(grid.width() * grid.height()) / (2.0 * std::sqrt(2.0) * lo.beta);

    Matrix acc = Matrix::Zero(space.dim(), space.dim());
    for (int idx = 0; idx < grid.pixel_count(); ++idx) {
        const Complex uv = u.values()(idx);
        const double re2 = 2.0 * uv.real();  // U + U^*
        const double im2 = 2.0 * uv.imag();  // i (U^* - U)
        acc += re2 * nd_phi.at_index(idx).entries() + im2 * nd_phi_plus_half.at_index(idx).entries();
    }
    acc *= pref;
    return OperatorMatrix(space, std::move(acc), true);
}

std::vector<double> expectation_map(const PixelOperatorField& field, const StateVector& state) {
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(field.grid().pixel_count()));
    for (int idx = 0; idx < field.grid().pixel_count(); ++idx) {
        values.push_back(std::real(expectation(state, field.at_index(idx))));
    }
    return values;
}

void write_expectation_map_csv(const std::string& path, const PixelGrid& grid,
                               const std::vector<double>& values) {
    if (values.size() != static_cast<std::size_t>(grid.pixel_count())) {
        throw std::invalid_argument("write_expectation_map_csv: value count does not match grid");
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("write_expectation_map_csv: cannot open " + path);
    }
    out << "j,jprime,value\n";
    char buf[64];
    for (int j = 0; j < grid.nx(); ++j) {
        for (int jp = 0; jp < grid.ny(); ++jp) {
            std::snprintf(buf, sizeof(buf), "%d,%d,%.17g\n", j, jp,
                          values[static_cast<std::size_t>(grid.index(j, jp))]);
            out << buf;
        }
    }
}

}  // namespace arrayhd
