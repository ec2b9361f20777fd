#include "arrayhd/single_port.hpp"

#include "arrayhd/parallel.hpp"
#include "arrayhd/rng.hpp"

#include <Eigen/SVD>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <thread>

namespace arrayhd {

namespace {

using Matrix8 = Eigen::Matrix<Complex, 8, 8>;
using RowVector8 = Eigen::Matrix<Complex, 1, 8>;

constexpr double kSingularCondition = 1e8;

RowVector8 difference_row(const ModeBasis& basis, double s_factor, int ref, int pixel) {
    const Complex u1r = basis.mode(0).values()(ref);
    const Complex u2r = basis.mode(1).values()(ref);
    const Complex u1k = basis.mode(0).values()(pixel);
    const Complex u2k = basis.mode(1).values()(pixel);
    RowVector8 row;
    row(0) = std::norm(u1r) - std::norm(u1k);
    row(1) = std::norm(u2r) - std::norm(u2k);
    row(2) = std::conj(u1r) * u2r - std::conj(u1k) * u2k;
    row(3) = u1r * std::conj(u2r) - u1k * std::conj(u2k);
    row(4) = s_factor * (u1r - u1k);
    row(5) = s_factor * (std::conj(u1r) - std::conj(u1k));
    row(6) = s_factor * (u2r - u2k);
    row(7) = s_factor * (std::conj(u2r) - std::conj(u2k));
    return row;
}

Matrix8 difference_entries(const ModeBasis& basis, const PixelSelection& sel, double s_factor) {
    Matrix8 m;
    for (int k = 1; k < 9; ++k) {
        m.row(k - 1) = difference_row(basis, s_factor, sel.reference(), sel.pixels[k]);
    }
    return m;
}

double condition_of(const Matrix8& m) {
    Eigen::JacobiSVD<Matrix8> svd(m);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(7);
    if (!(smin > 0.0)) {
        return std::numeric_limits<double>::infinity();
    }
    return smax / smin;
}

struct Candidate {
    PixelSelection selection;
    double condition;
    int restart;
};

bool better(const Candidate& a, const Candidate& b) {
    if (a.condition != b.condition) {
        return a.condition < b.condition;
    }
    return a.restart < b.restart;
}

// Column scales used to balance the quadratic (|U|^2-sized) and linear
// (S|U|-sized) blocks during the greedy row search.
Eigen::Matrix<double, 8, 1> column_scales(const ModeBasis& basis, double s_factor) {
    Eigen::Matrix<double, 8, 1> scales;
    scales.setZero();
    const int count = basis.grid().pixel_count();
    for (int p = 0; p < count; ++p) {
        const double a1 = std::abs(basis.mode(0).values()(p));
        const double a2 = std::abs(basis.mode(1).values()(p));
        scales(0) = std::max(scales(0), a1 * a1);
        scales(1) = std::max(scales(1), a2 * a2);
        scales(2) = std::max(scales(2), a1 * a2);
        scales(3) = scales(2);
        scales(4) = std::max(scales(4), s_factor * a1);
        scales(5) = scales(4);
        scales(6) = std::max(scales(6), s_factor * a2);
        scales(7) = scales(6);
    }
    for (int c = 0; c < 8; ++c) {
        if (!(scales(c) > 0.0)) {
            scales(c) = 1.0;
        }
    }
    return scales;
}

// Greedy max-volume growth: keep an orthonormal basis of the chosen
// (column-rescaled) rows and add the pixel with the largest residual.
PixelSelection greedy_selection(const ModeBasis& basis, const PixelGrid& grid, double s_factor,
                                const Eigen::Matrix<double, 8, 1>& scales, SplitMix64& rng) {
    const int count = grid.pixel_count();
    PixelSelection sel{};
    sel.pixels[0] = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(count)));
    std::set<int> used{sel.pixels[0]};

    Eigen::Matrix<Complex, 8, 8> ortho;  // rows: orthonormal basis built so far
    int rank = 0;
    for (int slot = 1; slot < 9; ++slot) {
        int best_pixel = -1;
        double best_residual = -1.0;
        for (int p = 0; p < count; ++p) {
            if (used.count(p)) {
                continue;
            }
            RowVector8 row = difference_row(basis, s_factor, sel.pixels[0], p);
            for (int c = 0; c < 8; ++c) {
                row(c) /= scales(c);
            }
            for (int k = 0; k < rank; ++k) {
                row -= ortho.row(k).dot(row) * ortho.row(k);
            }
            const double res = row.norm();
            if (res > best_residual) {
                best_residual = res;
                best_pixel = p;
            }
        }
        sel.pixels[slot] = best_pixel;
        used.insert(best_pixel);
        RowVector8 row = difference_row(basis, s_factor, sel.pixels[0], best_pixel);
        for (int c = 0; c < 8; ++c) {
            row(c) /= scales(c);
        }
        for (int k = 0; k < rank; ++k) {
            row -= ortho.row(k).dot(row) * ortho.row(k);
        }
        const double n = row.norm();
        if (n > 1e-300) {
            ortho.row(rank++) = row / n;
        }
    }
    return sel;
}

PixelSelection random_selection(const PixelGrid& grid, SplitMix64& rng) {
    const int count = grid.pixel_count();
    PixelSelection sel{};
    std::set<int> used;
    for (int slot = 0; slot < 9; ++slot) {
        int p;
        do {
            p = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(count)));
        } while (used.count(p));
        used.insert(p);
        sel.pixels[slot] = p;
    }
    return sel;
}

// Local descent on the true condition number: try swapping each selected
// pixel for every unused one, accept the best strict improvement, repeat.
Candidate polish(Candidate cand, const ModeBasis& basis, const PixelGrid& grid, double s_factor) {
    const int count = grid.pixel_count();
    for (int round = 0; round < 8; ++round) {
        Candidate best = cand;
        for (int slot = 0; slot < 9; ++slot) {
            for (int p = 0; p < count; ++p) {
                if (std::find(cand.selection.pixels.begin(), cand.selection.pixels.end(), p) !=
                    cand.selection.pixels.end()) {
                    continue;
                }
                Candidate trial = cand;
                trial.selection.pixels[slot] = p;
                trial.condition = condition_of(difference_entries(basis, trial.selection, s_factor));
                if (trial.condition < best.condition) {
                    best = trial;
                }
            }
        }
        if (best.condition >= cand.condition) {
            break;
        }
        cand = best;
    }
    return cand;
}

}  // namespace

void validate(const PixelSelection& sel, const PixelGrid& grid) {
    std::set<int> seen;
    for (int p : sel.pixels) {
        if (p < 0 || p >= grid.pixel_count()) {
            throw std::invalid_argument("PixelSelection: pixel index outside the grid");
        }
        if (!seen.insert(p).second) {
            throw std::invalid_argument("PixelSelection: pixels must be distinct");
        }
    }
}

DifferenceMatrix build_difference_matrix(const ModeBasis& basis, const PixelSelection& sel,
                                         const LOConfig& lo) {
    if (basis.size() != 2) {
        throw std::invalid_argument("build_difference_matrix: basis must have exactly 2 modes");
    }
    validate(lo);
    validate(sel, basis.grid());
    const double s_factor = lo.beta / std::sqrt(basis.grid().width() * basis.grid().height());
    Matrix8 entries = difference_entries(basis, sel, s_factor);
    DifferenceMatrix m{entries, s_factor, condition_of(entries), std::abs(entries.determinant())};
    return m;
}

SelectionStrategy selection_strategy_from_name(const std::string& name) {
    if (name == "greedy-condition") {
        return SelectionStrategy::GreedyCondition;
    }
    if (name == "random-restart") {
        return SelectionStrategy::RandomRestart;
    }
    throw std::invalid_argument("unknown selection strategy '" + name + "'");
}

std::string to_string(SelectionStrategy s) {
    return s == SelectionStrategy::GreedyCondition ? "greedy-condition" : "random-restart";
}

SelectionResult select_pixels(const ModeBasis& basis, const PixelGrid& grid, const LOConfig& lo,
                              const SelectionOptions& opts) {
    if (basis.size() != 2) {
        throw std::invalid_argument("select_pixels: basis must have exactly 2 modes");
    }
    if (grid.pixel_count() < 9) {
        throw std::invalid_argument("select_pixels: grid has fewer than 9 pixels");
    }
    validate(lo);
    const double s_factor = lo.beta / std::sqrt(grid.width() * grid.height());
    const auto scales = column_scales(basis, s_factor);
    const int restarts = std::max(1, opts.restarts);
    const int threads = resolve_threads(opts.threads);

    std::vector<Candidate> results(static_cast<std::size_t>(restarts));
    std::atomic<int> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const int i = cursor.fetch_add(1);
            if (i >= restarts) {
                return;
            }
            SplitMix64 rng(derive_seed(opts.seed, static_cast<std::uint64_t>(i)));
            PixelSelection sel = (opts.strategy == SelectionStrategy::GreedyCondition)
                                     ? greedy_selection(basis, grid, s_factor, scales, rng)
                                     : random_selection(grid, rng);
            const double cond = condition_of(difference_entries(basis, sel, s_factor));
            results[static_cast<std::size_t>(i)] = Candidate{sel, cond, i};
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }

    Candidate best = results.front();
    for (const Candidate& c : results) {
        if (better(c, best)) {
            best = c;
        }
    }
    // Structurally singular searches (real or constant modes) skip the polish.
    if (opts.strategy == SelectionStrategy::GreedyCondition && best.condition < 1e10) {
        best = polish(best, basis, grid, s_factor);
    }
    if (!(best.condition < opts.max_condition)) {
        throw std::runtime_error(
            "select_pixels: no invertible 9-pixel selection found (best condition number " +
            std::to_string(best.condition) + "); the mode functions may not vary enough across pixels");
    }
    return SelectionResult{best.selection, best.condition, opts.strategy, opts.seed};
}

std::string selection_report_json(const SelectionResult& result) {
    nlohmann::json j;
    j["pixels"] = result.selection.pixels;
    j["condition_number"] = result.condition_number;
    j["strategy"] = to_string(result.strategy);
    j["seed"] = result.seed;
    return j.dump(2);
}

MomentVector exact_moments(const ModeOperators& ops, const LOConfig& lo) {
    const Complex lo_phase = std::polar(1.0, -lo.phi);
    const Matrix& a1 = ops.a1.entries();
    const Matrix& a2 = ops.a2.entries();
    const FockSpace& space = ops.a1.space();
    auto op = [&](Matrix m) { return OperatorMatrix(space, std::move(m)); };
    // Entry 4 is the normal-ordered a2'^dag a1' (the exact adjoint of entry
    // 3). The count operators contain this ordering; in the truncated space
    // it differs from a1' a2'^dag at the cutoff boundary.
    return MomentVector{{op(a1.adjoint() * a1), op(a2.adjoint() * a2), op(a1.adjoint() * a2),
                         op(a2.adjoint() * a1), op(lo_phase * a1), op(std::conj(lo_phase) * a1.adjoint()),
                         op(lo_phase * a2), op(std::conj(lo_phase) * a2.adjoint())}};
}

std::vector<OperatorMatrix> pixel_difference_operators(const ModeBasis& basis,
                                                       const ModeOperators& ops,
                                                       const LOConfig& lo,
                                                       const PixelSelection& sel) {
    validate(sel, basis.grid());
    std::vector<int> linear(sel.pixels.begin(), sel.pixels.end());
    std::vector<OperatorMatrix> counts = pixel_count_operators_at(basis, ops, lo, 1, linear);
    std::vector<OperatorMatrix> nd;
    nd.reserve(8);
    for (int k = 1; k < 9; ++k) {
        nd.push_back(counts.front() - counts[static_cast<std::size_t>(k)]);
    }
    return nd;
}

MomentVector recover_moments(const std::vector<OperatorMatrix>& nd, const DifferenceMatrix& m,
                             const PixelGrid& grid) {
    if (nd.size() != 8) {
        throw std::invalid_argument("recover_moments: expected 8 difference-count operators");
    }
    if (!(m.condition_number < kSingularCondition)) {
        throw std::runtime_error("recover_moments: difference matrix is singular (condition number " +
                                 std::to_string(m.condition_number) + ")");
    }
    const Matrix8 inv = m.entries.inverse();
    const double scale = 2.0 / grid.pixel_area();
    const FockSpace& space = nd.front().space();

    std::array<Matrix, 8> recovered;
    for (int jcol = 0; jcol < 8; ++jcol) {
        Matrix acc = Matrix::Zero(space.dim(), space.dim());
        for (int k = 0; k < 8; ++k) {
            acc += inv(jcol, k) * nd[static_cast<std::size_t>(k)].entries();
        }
        recovered[static_cast<std::size_t>(jcol)] = scale * acc;
    }
    auto op = [&](int i) { return OperatorMatrix(space, std::move(recovered[static_cast<std::size_t>(i)])); };
    return MomentVector{{op(0), op(1), op(2), op(3), op(4), op(5), op(6), op(7)}};
}

std::pair<OperatorMatrix, OperatorMatrix> quadratures_from_moments(const MomentVector& v) {
    const Complex inv_sqrt2(1.0 / std::sqrt(2.0));
    OperatorMatrix x1 = inv_sqrt2 * (v.entries[4] + v.entries[5]);
    OperatorMatrix x2 = inv_sqrt2 * (v.entries[6] + v.entries[7]);
    return {std::move(x1), std::move(x2)};
}

}  // namespace arrayhd
