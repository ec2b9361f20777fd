#include "arrayhd/verify.hpp"

#include "arrayhd/fock_space.hpp"
#include "arrayhd/homodyne.hpp"
#include "arrayhd/pixel_grid.hpp"
#include "arrayhd/single_port.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>

namespace arrayhd {

namespace {

constexpr double kIdentityTol = 1e-10;
constexpr double kExactTol = 1e-12;

struct Setting {
    double phi;
    double theta;
    double nu;
    std::string label;
};

struct NamedBasis {
    ModeBasis basis;
    std::string label;
    bool real_modes;
};

struct SuiteContext {
    VerifyOptions opts;
    std::vector<IdentityCheck>* checks;

    void record(int criterion, const std::string& name, double deviation, double tolerance) {
        checks->push_back(IdentityCheck{criterion, name, deviation, tolerance,
                                        deviation <= tolerance});
    }

    void record_expected_failure(int criterion, const std::string& name, bool threw) {
        checks->push_back(IdentityCheck{criterion, name, threw ? 0.0 : 1.0, 0.5, threw});
    }
};

std::vector<NamedBasis> make_bases(const PixelGrid& grid) {
    ModeParams p;
    p.waist = 0.25 * grid.width();
    std::vector<NamedBasis> bases;
    bases.push_back(NamedBasis{
        gram_schmidt({sample_hermite_gauss(grid, 0, 0, p), sample_hermite_gauss(grid, 1, 0, p)},
                     grid),
        "hermite-gauss", true});
    bases.push_back(NamedBasis{
        gram_schmidt({sample_vortex(grid, 1, p), sample_vortex(grid, 2, p)}, grid), "vortex",
        false});
    return bases;
}

std::vector<StateVector> make_states(const FockSpace& space) {
    std::vector<StateVector> states;
    states.push_back(vacuum_state(space));
    states.push_back(perelomov_state(space, 1.0, M_PI / 4.0).state);
    states.push_back(truncated_perelomov_state(space, 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0),
                                               M_PI / 8.0));
    return states;
}

// Spread 9-pixel set for inversion-free consistency identities.
PixelSelection fixed_selection(const PixelGrid& grid) {
    PixelSelection sel{};
    const int count = grid.pixel_count();
    for (int i = 0; i < 9; ++i) {
        sel.pixels[static_cast<std::size_t>(i)] = (i * (count / 9)) % count;
    }
    return sel;
}

void check_pipeline_identities(SuiteContext& ctx, const FockSpace& space, const PixelGrid& grid,
                               const NamedBasis& named, const Setting& s,
                               const std::vector<StateVector>& states) {
    const std::string tag = " [" + s.label + ", " + named.label + "]";
    const ModeBasis& basis = named.basis;
    const MixerConfig mix{s.theta, s.nu};
    const ModeOperators ops = mixed_mode_operators(space, mix);
    const LOConfig lo{ctx.opts.beta, s.phi};
    const LOConfig lo_plus{ctx.opts.beta, s.phi + M_PI / 2.0};
    const double root_det_area = std::sqrt(grid.width() * grid.height());

    PixelOperatorField nd = difference_field(basis, ops, lo);
    PixelOperatorField nd_plus = difference_field(basis, ops, lo_plus);
    PixelOperatorField r = creation_projection_field(nd, nd_plus, lo);

    // Real-mode recovery: sum_pixels N_d U_l = (beta/sqrt(DxDy)) (a_l' e^{-i phi} + h.c.).
    if (named.real_modes) {
        double dev = 0.0;
        for (int l = 1; l <= 2; ++l) {
            Matrix acc = Matrix::Zero(space.dim(), space.dim());
            for (int idx = 0; idx < grid.pixel_count(); ++idx) {
                acc += basis.mode(l - 1).values()(idx) * nd.at_index(idx).entries();
            }
            const Complex ph = std::polar(1.0, -s.phi);
            Matrix expect = (lo.beta / root_det_area) *
                            (ph * ops.mode(l).entries() + std::conj(ph) * ops.mode(l).entries().adjoint());
            dev = std::max(dev, (acc - expect).cwiseAbs().maxCoeff());
        }
        ctx.record(1, "real-mode-recovery" + tag, dev, kIdentityTol);
    }

    // Per-pixel closed form of the creation projection:
    // R = (dxdy/sqrt(2)) e^{i phi} (a1'^dag U1^* + a2'^dag U2^*).
    {
        const Complex pref = std::polar(grid.pixel_area() / std::sqrt(2.0), s.phi);
        double dev = 0.0;
        for (int idx = 0; idx < grid.pixel_count(); ++idx) {
            Matrix expect = pref * (std::conj(basis.mode(0).values()(idx)) * ops.a1.entries().adjoint() +
                                    std::conj(basis.mode(1).values()(idx)) * ops.a2.entries().adjoint());
            dev = std::max(dev, (r.at_index(idx).entries() - expect).cwiseAbs().maxCoeff());
        }
        ctx.record(1, "creation-projection-closed-form" + tag, dev, kIdentityTol);
    }

    // Sum rule: sum_pixels R U_k = (1/sqrt(2)) e^{i phi} a_k'^dag.
    {
        double dev = 0.0;
        for (int k = 1; k <= 2; ++k) {
            Matrix acc = Matrix::Zero(space.dim(), space.dim());
            for (int idx = 0; idx < grid.pixel_count(); ++idx) {
                acc += basis.mode(k - 1).values()(idx) * r.at_index(idx).entries();
            }
            Matrix expect = std::polar(1.0 / std::sqrt(2.0), s.phi) * ops.mode(k).entries().adjoint();
            dev = std::max(dev, (acc - expect).cwiseAbs().maxCoeff());
        }
        ctx.record(1, "creation-projection-sum" + tag, dev, kIdentityTol);
    }

    // Mixed-quadrature decomposition:
    // X1' = cos(nu) X1(phi) + sin(nu) X2(phi + theta + pi/2), and mode 2 alike.
    OperatorMatrix xp1 = mixed_quadrature(r, 1, basis);
    OperatorMatrix xp2 = mixed_quadrature(r, 2, basis);
    {
        const ModeOperators bare = unmixed_mode_operators(space);
        const double c = std::cos(s.nu), sn = std::sin(s.nu);
        OperatorMatrix d1 = Complex(c) * quadrature(bare.a1, s.phi) +
                            Complex(sn) * quadrature(bare.a2, s.phi + s.theta + M_PI / 2.0);
        OperatorMatrix d2 = Complex(c) * quadrature(bare.a2, s.phi) +
                            Complex(sn) * quadrature(bare.a1, s.phi - s.theta + M_PI / 2.0);
        const double dev = std::max(max_abs_diff(xp1, d1), max_abs_diff(xp2, d2));
        ctx.record(1, "mixed-quadrature-decomposition" + tag, dev, kIdentityTol);

        const double herm = std::max(
            (xp1.entries() - xp1.entries().adjoint().eval()).cwiseAbs().maxCoeff(),
            (xp2.entries() - xp2.entries().adjoint().eval()).cwiseAbs().maxCoeff());
        ctx.record(0, "recovered-quadratures-hermitian" + tag, herm, kExactTol);
    }

    // Complex-mode single-signal recovery; the second term vanishes for real modes.
    {
        const OperatorMatrix a1 = annihilation(space, 1);
        const ModeFunction& u = named.real_modes ? basis.mode(0) : basis.mode(1);
        PixelOperatorField snd = single_mode_difference_field(a1, u, lo);
        PixelOperatorField snd_plus = single_mode_difference_field(a1, u, lo_plus);
        OperatorMatrix x = single_mode_quadrature(snd, snd_plus, u, lo);
        const double dev = max_abs_diff(x, quadrature(a1, s.phi));
        ctx.record(1, "single-mode-recovery" + tag, dev, kIdentityTol);
    }

    // Nine-pixel consistency: n_d(k) = (dxdy/2) sum_j M[k][j] V[j].
    {
        PixelSelection sel = fixed_selection(grid);
        DifferenceMatrix m = build_difference_matrix(basis, sel, lo);
        std::vector<OperatorMatrix> nd_ops = pixel_difference_operators(basis, ops, lo, sel);
        MomentVector v = exact_moments(ops, lo);
        double dev = 0.0;
        for (int k = 0; k < 8; ++k) {
            Matrix rhs = Matrix::Zero(space.dim(), space.dim());
            for (int col = 0; col < 8; ++col) {
                rhs += m.entries(k, col) * v.entries[static_cast<std::size_t>(col)].entries();
            }
            rhs *= 0.5 * grid.pixel_area();
            dev = std::max(dev, (nd_ops[static_cast<std::size_t>(k)].entries() - rhs).cwiseAbs().maxCoeff());
        }
        ctx.record(1, "nine-pixel-consistency" + tag, dev, kIdentityTol);
    }

    // State-level agreement of the recovered mixed quadratures with the
    // direct definitions: first and second moments on every test state.
    {
        OperatorMatrix d1 = quadrature(ops.a1, s.phi);
        OperatorMatrix d2 = quadrature(ops.a2, s.phi);
        OperatorMatrix xp1_sq = xp1 * xp1, xp2_sq = xp2 * xp2;
        OperatorMatrix d1_sq = d1 * d1, d2_sq = d2 * d2;
        double dev = 0.0;
        int state_index = 0;
        for (const StateVector& psi : states) {
            dev = std::max(dev, std::abs(expectation(psi, xp1) - expectation(psi, d1)));
            dev = std::max(dev, std::abs(expectation(psi, xp2) - expectation(psi, d2)));
            dev = std::max(dev, std::abs(expectation(psi, xp1_sq) - expectation(psi, d1_sq)));
            dev = std::max(dev, std::abs(expectation(psi, xp2_sq) - expectation(psi, d2_sq)));
            ++state_index;
        }
        ctx.record(1, "recovered-moments-on-states" + tag + " (" +
                          std::to_string(state_index) + " states)",
                   dev, kIdentityTol);
    }
}

void check_two_port_difference(SuiteContext& ctx, const FockSpace& space, const NamedBasis& named,
                               const Setting& s) {
    const ModeBasis& basis = named.basis;
    const ModeOperators ops = mixed_mode_operators(space, MixerConfig{s.theta, s.nu});
    const LOConfig lo{ctx.opts.beta, s.phi};
    PixelOperatorField n1 = pixel_counts(basis, ops, lo, 1);
    PixelOperatorField n2 = pixel_counts(basis, ops, lo, 2);
    PixelOperatorField nd = difference_field(basis, ops, lo);
    double dev = 0.0;
    for (int idx = 0; idx < basis.grid().pixel_count(); ++idx) {
        dev = std::max(dev, (n1.at_index(idx).entries() - n2.at_index(idx).entries() -
                             nd.at_index(idx).entries())
                                .cwiseAbs()
                                .maxCoeff());
    }
    ctx.record(0, "difference-equals-port-subtraction [" + s.label + ", " + named.label + "]", dev,
               kExactTol);
}

void check_mixing_inversion(SuiteContext& ctx, const FockSpace& space) {
    const double nu1 = ctx.opts.nu1;
    const double nu2 = ctx.opts.nu2;
    const ModeOperators bare = unmixed_mode_operators(space);
    for (double theta : {0.0, M_PI / 2.0, M_PI}) {
        for (double phi : {0.0, M_PI / 4.0, M_PI / 2.0}) {
            const ModeOperators at1 = mixed_mode_operators(space, MixerConfig{theta, nu1});
            const ModeOperators at2 = mixed_mode_operators(space, MixerConfig{theta, nu2});
            RecoveredQuadratures rec = invert_mixing_pair(
                {quadrature(at1.a1, phi), quadrature(at1.a2, phi)},
                {quadrature(at2.a1, phi), quadrature(at2.a2, phi)}, nu1, nu2);
            double dev = 0.0;
            dev = std::max(dev, max_abs_diff(rec.x1_phi, quadrature(bare.a1, phi)));
            dev = std::max(dev, max_abs_diff(rec.x2_phi, quadrature(bare.a2, phi)));
            dev = std::max(dev, max_abs_diff(rec.x1_phi_shifted,
                                             quadrature(bare.a1, phi - theta + M_PI / 2.0)));
            dev = std::max(dev, max_abs_diff(rec.x2_phi_shifted,
                                             quadrature(bare.a2, phi + theta + M_PI / 2.0)));
            char label[96];
            std::snprintf(label, sizeof(label), "two-angle-inversion [theta=%.4f, phi=%.4f]", theta,
                          phi);
            ctx.record(2, label, dev, kIdentityTol);
        }
    }
    // Degenerate pair must be rejected, not silently inverted.
    bool threw = false;
    try {
        const ModeOperators at1 = mixed_mode_operators(space, MixerConfig{0.0, nu1});
        (void)invert_mixing_pair({quadrature(at1.a1, 0.0), quadrature(at1.a2, 0.0)},
                                 {quadrature(at1.a1, 0.0), quadrature(at1.a2, 0.0)}, nu1, nu1);
    } catch (const std::invalid_argument&) {
        threw = true;
    }
    ctx.record_expected_failure(2, "degenerate-mixing-pair-rejected", threw);

    // nu1 = 0 passthrough: the inversion must return X'(nu=0) unchanged.
    {
        const double theta = M_PI / 2.0, phi = M_PI / 4.0;
        const ModeOperators at0 = mixed_mode_operators(space, MixerConfig{theta, 0.0});
        const ModeOperators at2 = mixed_mode_operators(space, MixerConfig{theta, nu2});
        RecoveredQuadratures rec =
            invert_mixing_pair({quadrature(at0.a1, phi), quadrature(at0.a2, phi)},
                               {quadrature(at2.a1, phi), quadrature(at2.a2, phi)}, 0.0, nu2);
        const double dev = std::max(max_abs_diff(rec.x1_phi, quadrature(at0.a1, phi)),
                                    max_abs_diff(rec.x2_phi, quadrature(at0.a2, phi)));
        ctx.record(2, "zero-angle-passthrough", dev, kIdentityTol);
    }
}

// The one-port recovery needs U and U^* linearly independent on the pixel
// set: for real modes the difference-matrix columns (3,4), (5,6), (7,8)
// coincide and M has rank <= 5 for every selection. The equivalence check
// therefore runs on the complex basis; real-mode bases belong to the
// rejected-as-singular class below.
void check_single_port_equivalence(SuiteContext& ctx, const FockSpace& space,
                                   const PixelGrid& grid, const NamedBasis& named,
                                   VerifyReport& report) {
    const Setting s{M_PI / 4.0, M_PI / 2.0, M_PI / 4.0, "standard"};
    const ModeBasis& basis = named.basis;
    const ModeOperators ops = mixed_mode_operators(space, MixerConfig{s.theta, s.nu});
    const LOConfig lo{ctx.opts.beta, s.phi};

    SelectionOptions sopts;
    sopts.seed = ctx.opts.selection_seed;
    sopts.restarts = ctx.opts.selection_restarts;
    sopts.threads = ctx.opts.threads;
    SelectionResult sel = select_pixels(basis, grid, lo, sopts);
    report.selection_condition = sel.condition_number;
    const double tol = 1e-9 * sel.condition_number;

    DifferenceMatrix m = build_difference_matrix(basis, sel.selection, lo);
    std::vector<OperatorMatrix> nd_ops = pixel_difference_operators(basis, ops, lo, sel.selection);
    MomentVector recovered = recover_moments(nd_ops, m, grid);
    MomentVector exact = exact_moments(ops, lo);
    double moment_dev = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
        moment_dev = std::max(moment_dev, max_abs_diff(recovered.entries[i], exact.entries[i]));
    }
    ctx.record(3, "one-port-moment-recovery [" + named.label + "]", moment_dev, tol);

    auto [x1_single, x2_single] = quadratures_from_moments(recovered);
    PixelOperatorField nd = difference_field(basis, ops, lo);
    PixelOperatorField nd_plus = difference_field(basis, ops, LOConfig{lo.beta, s.phi + M_PI / 2.0});
    PixelOperatorField r = creation_projection_field(nd, nd_plus, lo);
    const double dev = std::max(max_abs_diff(x1_single, mixed_quadrature(r, 1, basis)),
                                max_abs_diff(x2_single, mixed_quadrature(r, 2, basis)));
    ctx.record(3, "one-port-vs-two-port-quadratures [" + named.label + "]", dev, tol);
}

void check_constant_mode_rejection(SuiteContext& ctx, const PixelGrid& grid) {
    // Constant-magnitude pair: the uniform mode plus a unit-magnitude
    // checkerboard. Half the difference-matrix columns vanish identically,
    // so no 9-pixel selection can be invertible.
    Vector checker(grid.pixel_count());
    for (int j = 0; j < grid.nx(); ++j) {
        for (int jp = 0; jp < grid.ny(); ++jp) {
            checker(grid.index(j, jp)) = ((j + jp) % 2 == 0) ? 1.0 : -1.0;
        }
    }
    ModeBasis basis = gram_schmidt({sample_constant(grid), checker}, grid);
    bool threw = false;
    try {
        SelectionOptions sopts;
        sopts.restarts = 64;
        (void)select_pixels(basis, grid, LOConfig{ctx.opts.beta, 0.0}, sopts);
    } catch (const std::runtime_error&) {
        threw = true;
    }
    ctx.record_expected_failure(3, "constant-modes-rejected-as-singular", threw);
}

void check_real_mode_rejection(SuiteContext& ctx, const PixelGrid& grid,
                               const NamedBasis& real_basis) {
    bool threw = false;
    try {
        SelectionOptions sopts;
        sopts.restarts = 32;
        (void)select_pixels(real_basis.basis, grid, LOConfig{1e3, 0.0}, sopts);
    } catch (const std::runtime_error&) {
        threw = true;
    }
    ctx.record_expected_failure(3, "real-mode-basis-rejected-as-singular", threw);
}

void check_mode_matching_independence(SuiteContext& ctx, const FockSpace& space,
                                      const PixelGrid& grid) {
    const Setting s{M_PI / 4.0, M_PI / 2.0, M_PI / 4.0, "standard"};
    const ModeOperators ops = mixed_mode_operators(space, MixerConfig{s.theta, s.nu});
    const LOConfig lo{ctx.opts.beta, s.phi};
    const ModeFunction lo_mode = uniform_lo_mode(grid);
    ModeParams p;
    p.waist = 0.25 * grid.width();

    struct BasisCase {
        ModeBasis basis;
        std::string label;
    };
    std::vector<BasisCase> cases;
    cases.push_back({gram_schmidt({sample_constant(grid), sample_hermite_gauss(grid, 1, 0, p)}, grid),
                     "lo-matched"});
    cases.push_back({gram_schmidt({sample_hermite_gauss(grid, 0, 0, p),
                                   sample_hermite_gauss(grid, 1, 0, p)},
                                  grid),
                     "partial-overlap"});
    cases.push_back({gram_schmidt({sample_vortex(grid, 1, p), sample_vortex(grid, 2, p)}, grid),
                     "orthogonal-to-lo"});

    OperatorMatrix direct1 = quadrature(ops.a1, s.phi);
    OperatorMatrix direct2 = quadrature(ops.a2, s.phi);
    for (const BasisCase& bc : cases) {
        PixelOperatorField nd = difference_field(bc.basis, ops, lo);
        PixelOperatorField nd_plus =
            difference_field(bc.basis, ops, LOConfig{lo.beta, s.phi + M_PI / 2.0});
        PixelOperatorField r = creation_projection_field(nd, nd_plus, lo);
        const double dev = std::max(max_abs_diff(mixed_quadrature(r, 1, bc.basis), direct1),
                                    max_abs_diff(mixed_quadrature(r, 2, bc.basis), direct2));
        const double lo_overlap = std::abs(overlap(bc.basis.mode(0), lo_mode));
        char label[128];
        std::snprintf(label, sizeof(label), "mode-matching-independence [%s, |<U1,LO>| = %.3f]",
                      bc.label.c_str(), lo_overlap);
        ctx.record(7, label, dev, kIdentityTol);
    }
}

void check_lo_phase_periodicity(SuiteContext& ctx, const FockSpace& space, const PixelGrid& grid,
                                const NamedBasis& named) {
    const ModeOperators ops = mixed_mode_operators(space, MixerConfig{M_PI / 2.0, M_PI / 4.0});
    const double phi = 0.7;
    PixelOperatorField a = difference_field(named.basis, ops, LOConfig{ctx.opts.beta, phi});
    PixelOperatorField b =
        difference_field(named.basis, ops, LOConfig{ctx.opts.beta, phi + 2.0 * M_PI});
    double dev = 0.0;
    for (int idx = 0; idx < grid.pixel_count(); ++idx) {
        dev = std::max(dev,
                       (a.at_index(idx).entries() - b.at_index(idx).entries()).cwiseAbs().maxCoeff());
    }
    // Relative to the LO cross-term scale so the check is beta-independent.
    const double scale = ctx.opts.beta * grid.pixel_area();
    ctx.record(0, "lo-phase-periodicity [" + named.label + "]", dev / scale, kExactTol);
}

void check_settings_mismatch_rejection(SuiteContext& ctx, const FockSpace& space,
                                       const NamedBasis& named) {
    const LOConfig lo{ctx.opts.beta, 0.3};
    const ModeOperators ops_a = mixed_mode_operators(space, MixerConfig{0.0, 0.2});
    const ModeOperators ops_b = mixed_mode_operators(space, MixerConfig{0.0, 0.3});
    PixelOperatorField nd = difference_field(named.basis, ops_a, lo);
    PixelOperatorField nd_other =
        difference_field(named.basis, ops_b, LOConfig{lo.beta, lo.phi + M_PI / 2.0});
    bool threw = false;
    try {
        (void)creation_projection_field(nd, nd_other, lo);
    } catch (const std::invalid_argument&) {
        threw = true;
    }
    ctx.record_expected_failure(0, "mismatched-settings-rejected", threw);
}

}  // namespace

VerifyReport run_identity_suite(const VerifyOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    VerifyReport report;
    SuiteContext ctx{opts, &report.checks};

    const FockSpace space(opts.n_max);
    const PixelGrid grid(opts.grid_n, opts.grid_n, 1.0 / opts.grid_n, 1.0 / opts.grid_n);
    const std::vector<NamedBasis> bases = make_bases(grid);
    const std::vector<StateVector> states = make_states(space);
    const std::vector<Setting> settings = {
        {0.0, 0.0, 0.0, "no-mixing"},
        {M_PI / 4.0, M_PI / 2.0, M_PI / 4.0, "balanced"},
        {M_PI / 2.0, M_PI, M_PI / 3.0, "skewed"},
    };

    for (const Setting& s : settings) {
        for (const NamedBasis& b : bases) {
            check_pipeline_identities(ctx, space, grid, b, s, states);
        }
    }
    check_two_port_difference(ctx, space, bases.front(), settings[1]);
    check_mixing_inversion(ctx, space);
    check_single_port_equivalence(ctx, space, grid, bases[1], report);
    check_constant_mode_rejection(ctx, grid);
    check_real_mode_rejection(ctx, grid, bases.front());
    check_mode_matching_independence(ctx, space, grid);
    check_lo_phase_periodicity(ctx, space, grid, bases.front());
    check_settings_mismatch_rejection(ctx, space, bases.front());

    report.inversion_convention = mixing_inversion_convention();
    report.all_pass = true;
    for (const IdentityCheck& c : report.checks) {
        report.all_pass = report.all_pass && c.pass;
    }
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::string verify_report_json(const VerifyReport& report) {
    nlohmann::json j;
    j["all_pass"] = report.all_pass;
    j["elapsed_seconds"] = report.elapsed_seconds;
    j["inversion_convention"] = report.inversion_convention;
    j["selection_condition_number"] = report.selection_condition;
    char stamp[64];
    std::time_t now = std::time(nullptr);
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    j["timestamp"] = stamp;
    nlohmann::json checks = nlohmann::json::array();
    for (const IdentityCheck& c : report.checks) {
        checks.push_back({{"criterion", c.criterion},
                          {"name", c.name},
                          {"max_deviation", c.max_deviation},
                          {"tolerance", c.tolerance},
                          {"pass", c.pass}});
    }
    j["checks"] = checks;
    return j.dump(2);
}

}  // namespace arrayhd
