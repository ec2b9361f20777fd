#pragma once

#include <Eigen/Dense>

#include <complex>
#include <utility>
#include <vector>

namespace arrayhd {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Two-mode bosonic Fock space truncated at n_max quanta per mode.
/// Basis ordering is row-major: index(n1, n2) = n1 * (n_max + 1) + n2.
class FockSpace {
public:
    explicit FockSpace(int n_max);

    int n_max() const { return n_max_; }
    int levels() const { return n_max_ + 1; }
    int dim() const { return levels() * levels(); }
    int index(int n1, int n2) const { return n1 * levels() + n2; }

    bool operator==(const FockSpace&) const = default;

private:
    int n_max_;
};

/// Dense complex matrix acting on a FockSpace. The hermitian flag is a
/// checked promise: setting it asserts max|M - adjoint(M)| < 1e-12.
class OperatorMatrix {
public:
    OperatorMatrix(FockSpace space, Matrix entries, bool hermitian = false);

    const FockSpace& space() const { return space_; }
    const Matrix& entries() const { return entries_; }
    bool hermitian() const { return hermitian_; }

    OperatorMatrix adjoint() const;
    OperatorMatrix as_hermitian() const;  // re-tags with validation

    OperatorMatrix& operator+=(const OperatorMatrix& other);
    OperatorMatrix& operator-=(const OperatorMatrix& other);
    OperatorMatrix& operator*=(Complex z);

private:
    FockSpace space_;
    Matrix entries_;
    bool hermitian_ = false;
};

OperatorMatrix operator+(OperatorMatrix lhs, const OperatorMatrix& rhs);
OperatorMatrix operator-(OperatorMatrix lhs, const OperatorMatrix& rhs);
OperatorMatrix operator*(Complex z, OperatorMatrix op);
OperatorMatrix operator*(const OperatorMatrix& lhs, const OperatorMatrix& rhs);

/// Largest entry-wise |lhs - rhs|; the workhorse of every identity check.
double max_abs_diff(const OperatorMatrix& lhs, const OperatorMatrix& rhs);
double max_abs(const OperatorMatrix& op);

/// Normalized pure state on a FockSpace.
class StateVector {
public:
    StateVector(FockSpace space, Vector amplitudes);

    const FockSpace& space() const { return space_; }
    const Vector& amplitudes() const { return amps_; }
    Complex amplitude(int n1, int n2) const { return amps_(space_.index(n1, n2)); }

private:
    FockSpace space_;
    Vector amps_;
};

OperatorMatrix identity_operator(const FockSpace& space);

/// Annihilation operator for the requested mode (1 or 2), identity on the
/// other tensor factor. <n-1|a|n> = sqrt(n).
OperatorMatrix annihilation(const FockSpace& space, int mode);

/// Rotated quadrature X(phi) = (a e^{-i phi} + a^dag e^{i phi}) / sqrt(2).
OperatorMatrix quadrature(const OperatorMatrix& a, double phi);

/// Projector onto the subspace with n1, n2 <= n_max - margin. Truncation
/// artifacts of commutator identities live outside it.
OperatorMatrix subcutoff_projector(const FockSpace& space, int margin = 1);

StateVector vacuum_state(const FockSpace& space);
StateVector basis_state(const FockSpace& space, int n1, int n2);

struct SqueezedState {
    StateVector state;
    double truncation_weight;  // probability lost to the cutoff, pre-renormalization
};

/// Two-mode squeezed vacuum with amplitudes (e^{-i gamma} tanh r)^n / cosh r
/// on |n,n>, renormalized after truncation. Rejects cutoffs whose truncation
/// weight exceeds max_truncation_weight.
SqueezedState perelomov_state(const FockSpace& space, double r, double gamma,
                              double max_truncation_weight = 1e-2);

/// c1 |0,0> + c2 e^{-i delta} |1,1>; requires c1^2 + c2^2 = 1.
StateVector truncated_perelomov_state(const FockSpace& space, double c1, double c2,
                                      double delta);

Complex expectation(const StateVector& state, const OperatorMatrix& op);

/// Harmonic-oscillator eigenfunctions psi_0..psi_n at x, in the convention
/// psi_0(x) = pi^{-1/4} exp(-x^2/2) (vacuum quadrature variance 1/2).
std::vector<double> hermite_functions(int n_max, double x);

/// Joint quadrature density p(x1, phi1, x2, phi2)
///   = |sum_{n1,n2} c_{n1 n2} e^{-i(n1 phi1 + n2 phi2)} psi_{n1}(x1) psi_{n2}(x2)|^2
/// evaluated at each requested point.
std::vector<double> quadrature_density_oracle(const StateVector& state, double phi1,
                                              double phi2,
                                              const std::vector<std::pair<double, double>>& points);

/// Single-point convenience wrapper around the density oracle.
double quadrature_density_at(const StateVector& state, double phi1, double phi2,
                             double x1, double x2);

}  // namespace arrayhd
