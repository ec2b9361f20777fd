#include "arrayhd/fock_space.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>

using namespace arrayhd;

namespace {

const Complex kI(0.0, 1.0);

// Independent series route for the truncated, renormalized squeezed state:
// <n> = sum_{n<=N} n t^n / sum_{n<=N} t^n with t = tanh^2 r.
double mean_photons_series(int n_max, double r) {
    const double t = std::tanh(r) * std::tanh(r);
    double num = 0.0, den = 0.0, power = 1.0;
    for (int n = 0; n <= n_max; ++n) {
        num += n * power;
        den += power;
        power *= t;
    }
    return num / den;
}

// <X(phi)^2> on the same state: (teach the series about the cutoff)
// (<a^dag a> + <a a^dag>)/2 with a^dag |n_max> = 0, so the top level drops
// out of <a a^dag>; the <a^2> terms vanish on the diagonal state.
double quadrature_second_moment_series(int n_max, double r) {
    const double t = std::tanh(r) * std::tanh(r);
    double den = 0.0, power = 1.0;
    std::vector<double> p(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) {
        p[static_cast<std::size_t>(n)] = power;
        den += power;
        power *= t;
    }
    double n_mean = 0.0, lower_mean = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        n_mean += n * p[static_cast<std::size_t>(n)] / den;
        if (n < n_max) {
            lower_mean += (n + 1) * p[static_cast<std::size_t>(n)] / den;
        }
    }
    return 0.5 * (n_mean + lower_mean);
}

double commutator_deviation(const OperatorMatrix& a, const OperatorMatrix& b,
                            const Matrix& expected) {
    Matrix comm = a.entries() * b.entries() - b.entries() * a.entries();
    return (comm - expected).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("fock space shape and indexing") {
    FockSpace space(12);
    CHECK(space.dim() == 169);
    CHECK(space.index(0, 0) == 0);
    CHECK(space.index(1, 0) == 13);
    CHECK(space.index(0, 1) == 1);
    CHECK(space.index(12, 12) == 168);
    CHECK_THROWS_AS(FockSpace(0), std::invalid_argument);
}

TEST_CASE("annihilation operators act as lowering maps") {
    FockSpace space(4);
    OperatorMatrix a1 = annihilation(space, 1);
    OperatorMatrix a2 = annihilation(space, 2);

    SUBCASE("vacuum is annihilated") {
        Vector out = a1.entries() * vacuum_state(space).amplitudes();
        CHECK(out.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("one quantum lowers to vacuum with unit weight") {
        Vector out = a1.entries() * basis_state(space, 1, 0).amplitudes();
        CHECK((out - vacuum_state(space).amplitudes()).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("number operator eigenvalue") {
        StateVector two = basis_state(space, 2, 0);
        OperatorMatrix n1 = a1.adjoint() * a1;
        CHECK(std::real(expectation(two, n1)) == doctest::Approx(2.0).epsilon(1e-14));
    }
    SUBCASE("mode 2 acts on the inner factor") {
        Vector out = a2.entries() * basis_state(space, 3, 2).amplitudes();
        CHECK((out - std::sqrt(2.0) * basis_state(space, 3, 1).amplitudes()).cwiseAbs().maxCoeff() <
              1e-15);
    }
    SUBCASE("invalid mode index") {
        CHECK_THROWS_AS(annihilation(space, 3), std::invalid_argument);
    }
}

TEST_CASE("cross-mode operators commute exactly") {
    FockSpace space(6);
    OperatorMatrix a1 = annihilation(space, 1);
    OperatorMatrix a2 = annihilation(space, 2);
    const Matrix zero = Matrix::Zero(space.dim(), space.dim());
    CHECK(commutator_deviation(a1, a2, zero) == 0.0);
    CHECK(commutator_deviation(a1, a2.adjoint(), zero) == 0.0);
}

TEST_CASE("same-mode commutator is the identity below the cutoff") {
    FockSpace space(8);
    OperatorMatrix a1 = annihilation(space, 1);
    OperatorMatrix p = subcutoff_projector(space, 1);
    Matrix comm = a1.entries() * a1.entries().adjoint() - a1.entries().adjoint() * a1.entries();
    Matrix projected = p.entries() * (comm - Matrix::Identity(space.dim(), space.dim())) * p.entries();
    CHECK(projected.cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("quadrature operators") {
    FockSpace space(10);
    OperatorMatrix a1 = annihilation(space, 1);

    SUBCASE("phi = 0 reduces to (a + a^dag)/sqrt(2)") {
        OperatorMatrix x0 = quadrature(a1, 0.0);
        Matrix direct = (a1.entries() + a1.entries().adjoint()) / std::sqrt(2.0);
        CHECK((x0.entries() - direct).cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("vacuum variance is 1/2 for every phase") {
        StateVector vac = vacuum_state(space);
        for (double phi : {0.0, 0.37, M_PI / 2.0, 2.2, 5.9}) {
            OperatorMatrix x = quadrature(a1, phi);
            CHECK(std::real(expectation(vac, x * x)) == doctest::Approx(0.5).epsilon(1e-13));
        }
    }
    SUBCASE("hermitian for arbitrary phase") {
        OperatorMatrix x = quadrature(a1, 1.234);
        CHECK((x.entries() - x.entries().adjoint().eval()).cwiseAbs().maxCoeff() < 1e-14);
        CHECK(x.hermitian());
    }
    SUBCASE("2*pi periodicity to machine precision") {
        OperatorMatrix x = quadrature(a1, 0.81);
        OperatorMatrix y = quadrature(a1, 0.81 + 2.0 * M_PI);
        CHECK(max_abs_diff(x, y) < 1e-13);
    }
    SUBCASE("conjugate pair commutator equals i below the cutoff") {
        OperatorMatrix x = quadrature(a1, 0.0);
        OperatorMatrix q = quadrature(a1, M_PI / 2.0);
        OperatorMatrix p = subcutoff_projector(space, 2);
        Matrix comm = x.entries() * q.entries() - q.entries() * x.entries();
        Matrix projected =
            p.entries() * (comm - kI * Matrix::Identity(space.dim(), space.dim())) * p.entries();
        CHECK(projected.cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("squeezed two-mode state") {
    FockSpace space(12);

    SUBCASE("r = 0 is the vacuum") {
        SqueezedState s = perelomov_state(space, 0.0, 1.3);
        CHECK((s.state.amplitudes() - vacuum_state(space).amplitudes()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(s.truncation_weight == 0.0);
    }
    SUBCASE("mean photon number matches the series oracle") {
        SqueezedState s = perelomov_state(space, 1.0, M_PI / 4.0);
        OperatorMatrix a1 = annihilation(space, 1);
        const double n_series = mean_photons_series(12, 1.0);
        CHECK(std::real(expectation(s.state, a1.adjoint() * a1)) ==
              doctest::Approx(n_series).epsilon(1e-12));
        // sanity: close to the untruncated value sinh^2(1) ~ 1.38109
        CHECK(std::abs(n_series - std::sinh(1.0) * std::sinh(1.0)) < 0.02);
    }
    SUBCASE("amplitude ratio and geometric decay") {
        SqueezedState s = perelomov_state(space, 1.0, M_PI / 4.0);
        const Complex expected = std::polar(std::tanh(1.0), -M_PI / 4.0);
        Complex ratio = s.state.amplitude(1, 1) / s.state.amplitude(0, 0);
        CHECK(std::abs(ratio - expected) < 1e-14);
        for (int n = 1; n <= 12; ++n) {
            Complex step = s.state.amplitude(n, n) / s.state.amplitude(n - 1, n - 1);
            CHECK(std::abs(std::abs(step) - std::tanh(1.0)) < 1e-13);
        }
        for (int n1 = 0; n1 <= 2; ++n1) {  // off-diagonal amplitudes vanish
            for (int n2 = 0; n2 <= 2; ++n2) {
                if (n1 != n2) {
                    CHECK(std::abs(s.state.amplitude(n1, n2)) == 0.0);
                }
            }
        }
    }
    SUBCASE("reported truncation weight") {
        SqueezedState s = perelomov_state(space, 1.0, 0.0);
        const double t = std::tanh(1.0);
        // analytic tail weight
        CHECK(s.truncation_weight == doctest::Approx(std::pow(t, 26.0)).epsilon(1e-12));
        // cross-check: 1 - sum of untruncated |c_n|^2 over retained n
        double kept = 0.0;
        for (int n = 0; n <= 12; ++n) {
            kept += std::pow(t, 2.0 * n) / (std::cosh(1.0) * std::cosh(1.0));
        }
        CHECK(s.truncation_weight == doctest::Approx(1.0 - kept).epsilon(1e-10));
    }
    SUBCASE("cutoff too small is rejected") {
        FockSpace tiny(4);
        CHECK_THROWS_AS(perelomov_state(tiny, 2.0, 0.0), std::invalid_argument);
    }
    SUBCASE("tight truncation threshold rejects the bench cutoff") {
        CHECK_THROWS_AS(perelomov_state(space, 1.0, 0.0, 1e-10), std::invalid_argument);
        FockSpace big(80);
        CHECK_NOTHROW(perelomov_state(big, 1.0, 0.0, 1e-10));
    }
}

TEST_CASE("two-level superposition state") {
    FockSpace space(4);

    SUBCASE("c1 = 1 is the vacuum") {
        StateVector s = truncated_perelomov_state(space, 1.0, 0.0, 0.7);
        CHECK((s.amplitudes() - vacuum_state(space).amplitudes()).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("photon number equals the excited weight") {
        const double c = 1.0 / std::sqrt(2.0);
        StateVector s = truncated_perelomov_state(space, c, c, M_PI / 8.0);
        OperatorMatrix a1 = annihilation(space, 1);
        CHECK(std::real(expectation(s, a1.adjoint() * a1)) == doctest::Approx(0.5).epsilon(1e-13));
        CHECK(s.amplitude(0, 0) == Complex(c, 0.0));
        CHECK(std::abs(s.amplitude(1, 1) - c * std::polar(1.0, -M_PI / 8.0)) < 1e-15);
    }
    SUBCASE("non-normalized coefficients are rejected") {
        CHECK_THROWS_AS(truncated_perelomov_state(space, 0.9, 0.6, 0.0), std::invalid_argument);
    }
}

TEST_CASE("expectation values") {
    FockSpace space(12);
    StateVector vac = vacuum_state(space);
    OperatorMatrix a1 = annihilation(space, 1);

    SUBCASE("vacuum quadrature second moment") {
        OperatorMatrix x = quadrature(a1, 0.9);
        CHECK(std::real(expectation(vac, x * x)) == doctest::Approx(0.5).epsilon(1e-13));
    }
    SUBCASE("identity expectation is 1") {
        CHECK(std::real(expectation(vac, identity_operator(space))) ==
              doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("squeezed quadrature variance against the series oracle") {
        SqueezedState s = perelomov_state(space, 1.0, M_PI / 4.0);
        const double expected = quadrature_second_moment_series(12, 1.0);
        for (double phi : {0.0, M_PI / 4.0, 1.1}) {
            OperatorMatrix x = quadrature(a1, phi);
            CHECK(std::real(expectation(s.state, x * x)) ==
                  doctest::Approx(expected).epsilon(1e-12));
        }
        CHECK(std::abs(expected - std::cosh(2.0) / 2.0) < 0.02);
    }
    SUBCASE("hermitian operators give real expectations") {
        SqueezedState s = perelomov_state(space, 0.8, 0.3);
        OperatorMatrix x = quadrature(a1, 0.4);
        CHECK(std::abs(std::imag(expectation(s.state, x))) < 1e-12);
    }
    SUBCASE("space mismatch is an error") {
        FockSpace other(5);
        CHECK_THROWS_AS(expectation(vacuum_state(other), a1), std::invalid_argument);
    }
}

TEST_CASE("hermite functions are orthonormal on a fine grid") {
    const int n = 10;
    const int points = 401;
    const double h = 16.0 / (points - 1);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n + 1, n + 1);
    for (int i = 0; i < points; ++i) {
        const double x = -8.0 + i * h;
        const double w = (i == 0 || i == points - 1) ? 0.5 : 1.0;
        auto psi = hermite_functions(n, x);
        for (int a = 0; a <= n; ++a) {
            for (int b = 0; b <= n; ++b) {
                gram(a, b) += w * h * psi[a] * psi[b];
            }
        }
    }
    CHECK((gram - Eigen::MatrixXd::Identity(n + 1, n + 1)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("joint quadrature density oracle") {
    SUBCASE("vacuum density is the ground-state Gaussian") {
        FockSpace space(6);
        StateVector vac = vacuum_state(space);
        for (double x1 : {0.0, 0.5, -1.3}) {
            for (double x2 : {0.2, -0.8}) {
                const double expected = std::exp(-x1 * x1 - x2 * x2) / M_PI;
                CHECK(quadrature_density_at(vac, 0.3, 1.1, x1, x2) ==
                      doctest::Approx(expected).epsilon(1e-12));
            }
        }
    }
    SUBCASE("two-level state matches the closed form with the cosine cross term") {
        FockSpace space(6);
        const double c = 1.0 / std::sqrt(2.0);
        const double delta = M_PI / 8.0;
        const double phi1 = M_PI / 4.0, phi2 = M_PI / 4.0;
        StateVector s = truncated_perelomov_state(space, c, c, delta);
        for (double x1 : {0.0, 0.4, -1.1, 2.3}) {
            for (double x2 : {0.3, -0.9, 1.7}) {
                const double bracket = c * c + 4.0 * c * c * x1 * x1 * x2 * x2 +
                                       4.0 * x1 * x2 * c * c * std::cos(phi1 + phi2 + delta);
                const double expected = std::exp(-x1 * x1 - x2 * x2) / M_PI * bracket;
                CHECK(quadrature_density_at(s, phi1, phi2, x1, x2) ==
                      doctest::Approx(expected).epsilon(1e-10).scale(1.0));
            }
        }
    }
    SUBCASE("densities are nonnegative everywhere") {
        FockSpace space(12);
        SqueezedState s = perelomov_state(space, 1.0, M_PI / 4.0);
        for (double x1 = -4.0; x1 <= 4.0; x1 += 0.5) {
            for (double x2 = -4.0; x2 <= 4.0; x2 += 0.5) {
                CHECK(quadrature_density_at(s.state, 0.7, -0.4, x1, x2) >= 0.0);
            }
        }
    }
    SUBCASE("density integrates to 1") {
        FockSpace space(12);
        SqueezedState s = perelomov_state(space, 1.0, M_PI / 4.0);
        const int points = 241;
        const double h = 12.0 / (points - 1);
        std::vector<std::pair<double, double>> grid;
        grid.reserve(points * points);
        std::vector<double> weights;
        weights.reserve(points * points);
        for (int i = 0; i < points; ++i) {
            const double wx = (i == 0 || i == points - 1) ? 0.5 : 1.0;
            for (int k = 0; k < points; ++k) {
                const double wy = (k == 0 || k == points - 1) ? 0.5 : 1.0;
                grid.emplace_back(-6.0 + i * h, -6.0 + k * h);
                weights.push_back(wx * wy * h * h);
            }
        }
        std::vector<double> values = quadrature_density_oracle(s.state, M_PI / 4.0, M_PI / 2.0, grid);
        double total = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            total += weights[i] * values[i];
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("operator matrix plumbing") {
    FockSpace space(3);
    OperatorMatrix a = annihilation(space, 1);

    SUBCASE("hermitian flag validation") {
        CHECK_THROWS_AS(OperatorMatrix(space, a.entries(), true), std::invalid_argument);
        CHECK_NOTHROW(quadrature(a, 0.1).as_hermitian());
    }
    SUBCASE("mismatched shapes are rejected") {
        CHECK_THROWS_AS(OperatorMatrix(space, Matrix::Zero(3, 3)), std::invalid_argument);
    }
    SUBCASE("state normalization") {
        Vector v = Vector::Zero(space.dim());
        v(0) = 3.0;
        StateVector s(space, v);
        CHECK(s.amplitudes().norm() == doctest::Approx(1.0).epsilon(1e-15));
        CHECK_THROWS_AS(StateVector(space, Vector::Zero(space.dim())), std::invalid_argument);
    }
}
