#include "arrayhd/fock_space.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <stdexcept>
#include <string>

namespace arrayhd {

namespace {

constexpr double kHermitianTol = 1e-12;

void require_same_space(const FockSpace& a, const FockSpace& b, const char* what) {
    if (!(a == b)) {
        throw std::invalid_argument(std::string(what) + ": operands live on different Fock spaces");
    }
}

// Single-mode lowering matrix on levels = n_max + 1 states.
Matrix lowering_matrix(int levels) {
    Matrix a = Matrix::Zero(levels, levels);
    for (int n = 1; n < levels; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    return a;
}

}  // namespace

FockSpace::FockSpace(int n_max) : n_max_(n_max) {
    if (n_max < 1) {
        throw std::invalid_argument("FockSpace: n_max must be >= 1");
    }
}

OperatorMatrix::OperatorMatrix(FockSpace space, Matrix entries, bool hermitian)
    : space_(space), entries_(std::move(entries)), hermitian_(hermitian) {
    if (entries_.rows() != space_.dim() || entries_.cols() != space_.dim()) {
        throw std::invalid_argument("OperatorMatrix: shape does not match space dimension");
    }
    if (hermitian_) {
        double dev = 0.0;
        for (Eigen::Index col = 0; col < entries_.cols(); ++col) {
            for (Eigen::Index row = 0; row <= col; ++row) {
                dev = std::max(dev, std::abs(entries_(row, col) - std::conj(entries_(col, row))));
            }
        }
        if (dev >= kHermitianTol) {
            throw std::invalid_argument("OperatorMatrix: hermitian flag set but max|M - M^dag| = " +
                                        std::to_string(dev));
        }
    }
}

OperatorMatrix OperatorMatrix::adjoint() const {
    return OperatorMatrix(space_, entries_.adjoint(), hermitian_);
}

OperatorMatrix OperatorMatrix::as_hermitian() const {
    return OperatorMatrix(space_, entries_, true);
}

OperatorMatrix& OperatorMatrix::operator+=(const OperatorMatrix& other) {
    require_same_space(space_, other.space_, "operator+");
    entries_ += other.entries_;
    hermitian_ = false;
    return *this;
}

OperatorMatrix& OperatorMatrix::operator-=(const OperatorMatrix& other) {
    require_same_space(space_, other.space_, "operator-");
    entries_ -= other.entries_;
    hermitian_ = false;
    return *this;
}

OperatorMatrix& OperatorMatrix::operator*=(Complex z) {
    entries_ *= z;
    hermitian_ = false;
    return *this;
}

OperatorMatrix operator+(OperatorMatrix lhs, const OperatorMatrix& rhs) {
    lhs += rhs;
    return lhs;
}

OperatorMatrix operator-(OperatorMatrix lhs, const OperatorMatrix& rhs) {
    lhs -= rhs;
    return lhs;
}

OperatorMatrix operator*(Complex z, OperatorMatrix op) {
    op *= z;
    return op;
}

OperatorMatrix operator*(const OperatorMatrix& lhs, const OperatorMatrix& rhs) {
    require_same_space(lhs.space(), rhs.space(), "operator*");
    return OperatorMatrix(lhs.space(), lhs.entries() * rhs.entries());
}

double max_abs_diff(const OperatorMatrix& lhs, const OperatorMatrix& rhs) {
    require_same_space(lhs.space(), rhs.space(), "max_abs_diff");
    return (lhs.entries() - rhs.entries()).cwiseAbs().maxCoeff();
}

double max_abs(const OperatorMatrix& op) {
    return op.entries().cwiseAbs().maxCoeff();
}

StateVector::StateVector(FockSpace space, Vector amplitudes)
    : space_(space), amps_(std::move(amplitudes)) {
    if (amps_.size() != space_.dim()) {
        throw std::invalid_argument("StateVector: length does not match space dimension");
    }
    double norm = amps_.norm();
    if (norm <= 0.0 || !std::isfinite(norm)) {
        throw std::invalid_argument("StateVector: amplitudes have zero or non-finite norm");
    }
    amps_ /= norm;
}

OperatorMatrix identity_operator(const FockSpace& space) {
    return OperatorMatrix(space, Matrix::Identity(space.dim(), space.dim()), true);
}

OperatorMatrix annihilation(const FockSpace& space, int mode) {
    if (mode != 1 && mode != 2) {
        throw std::invalid_argument("annihilation: mode must be 1 or 2");
    }
    const int levels = space.levels();
    Matrix a = lowering_matrix(levels);
    Matrix eye = Matrix::Identity(levels, levels);
    Matrix full = (mode == 1) ? Eigen::kroneckerProduct(a, eye).eval()
                              : Eigen::kroneckerProduct(eye, a).eval();
    return OperatorMatrix(space, std::move(full));
}

OperatorMatrix quadrature(const OperatorMatrix& a, double phi) {
    const Complex phase = std::polar(1.0, -phi) / std::sqrt(2.0);
    Matrix x = phase * a.entries() + std::conj(phase) * a.entries().adjoint();
    return OperatorMatrix(a.space(), std::move(x), true);
}

OperatorMatrix subcutoff_projector(const FockSpace& space, int margin) {
    Matrix p = Matrix::Zero(space.dim(), space.dim());
    const int keep = space.n_max() - margin;
    for (int n1 = 0; n1 <= keep; ++n1) {
        for (int n2 = 0; n2 <= keep; ++n2) {
            int i = space.index(n1, n2);
            p(i, i) = 1.0;
        }
    }
    return OperatorMatrix(space, std::move(p), true);
}

StateVector vacuum_state(const FockSpace& space) {
    return basis_state(space, 0, 0);
}

StateVector basis_state(const FockSpace& space, int n1, int n2) {
    if (n1 < 0 || n2 < 0 || n1 > space.n_max() || n2 > space.n_max()) {
        throw std::invalid_argument("basis_state: occupation outside the cutoff");
    }
    Vector v = Vector::Zero(space.dim());
    v(space.index(n1, n2)) = 1.0;
    return StateVector(space, std::move(v));
}

SqueezedState perelomov_state(const FockSpace& space, double r, double gamma,
                              double max_truncation_weight) {
    if (r < 0.0) {
        throw std::invalid_argument("perelomov_state: r must be >= 0");
    }
    const double t = std::tanh(r);
    // Weight beyond the cutoff: sum_{n > n_max} tanh^{2n} / cosh^2 = tanh^{2(n_max+1)}.
    const double truncation_weight = std::pow(t, 2.0 * (space.n_max() + 1));
    if (truncation_weight > max_truncation_weight) {
        throw std::invalid_argument(
            "perelomov_state: cutoff n_max = " + std::to_string(space.n_max()) +
            " too small for r = " + std::to_string(r) + " (truncation weight " +
            std::to_string(truncation_weight) + ")");
    }
    Vector v = Vector::Zero(space.dim());
    const Complex ratio = std::polar(t, -gamma);
    Complex c = 1.0 / std::cosh(r);
    for (int n = 0; n <= space.n_max(); ++n) {
        v(space.index(n, n)) = c;
        c *= ratio;
    }
    return SqueezedState{StateVector(space, std::move(v)), truncation_weight};
}

StateVector truncated_perelomov_state(const FockSpace& space, double c1, double c2,
                                      double delta) {
    if (std::abs(c1 * c1 + c2 * c2 - 1.0) > 1e-12) {
        throw std::invalid_argument("truncated_perelomov_state: c1^2 + c2^2 must equal 1");
    }
    Vector v = Vector::Zero(space.dim());
    v(space.index(0, 0)) = c1;
    v(space.index(1, 1)) = c2 * std::polar(1.0, -delta);
    return StateVector(space, std::move(v));
}

Complex expectation(const StateVector& state, const OperatorMatrix& op) {
    require_same_space(state.space(), op.space(), "expectation");
    return state.amplitudes().dot(op.entries() * state.amplitudes());
}

std::vector<double> hermite_functions(int n_max, double x) {
    std::vector<double> psi(static_cast<std::size_t>(n_max) + 1);
    psi[0] = std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x);
    if (n_max >= 1) {
        psi[1] = std::sqrt(2.0) * x * psi[0];
    }
    for (int n = 2; n <= n_max; ++n) {
        psi[n] = std::sqrt(2.0 / n) * x * psi[n - 1] - std::sqrt((n - 1.0) / n) * psi[n - 2];
    }
    return psi;
}

std::vector<double> quadrature_density_oracle(const StateVector& state, double phi1,
                                              double phi2,
                                              const std::vector<std::pair<double, double>>& points) {
    const FockSpace& space = state.space();
    const int levels = space.levels();

    // Phase-dressed coefficient matrix C(n1, n2) = c_{n1 n2} e^{-i(n1 phi1 + n2 phi2)}.
    Matrix coeff(levels, levels);
    for (int n1 = 0; n1 < levels; ++n1) {
        const Complex p1 = std::polar(1.0, -phi1 * n1);
        for (int n2 = 0; n2 < levels; ++n2) {
            coeff(n1, n2) = state.amplitude(n1, n2) * p1 * std::polar(1.0, -phi2 * n2);
        }
    }

    std::vector<double> values;
    values.reserve(points.size());
    Eigen::VectorXd psi1(levels), psi2(levels);
    for (const auto& [x1, x2] : points) {
        auto h1 = hermite_functions(space.n_max(), x1);
        auto h2 = hermite_functions(space.n_max(), x2);
        for (int n = 0; n < levels; ++n) {
            psi1(n) = h1[n];
            psi2(n) = h2[n];
        }
        Complex amp = psi1.transpose().cast<Complex>() * coeff * psi2.cast<Complex>();
        values.push_back(std::norm(amp));
    }
    return values;
}

double quadrature_density_at(const StateVector& state, double phi1, double phi2,
                             double x1, double x2) {
    return quadrature_density_oracle(state, phi1, phi2, {{x1, x2}}).front();
}

}  // namespace arrayhd
