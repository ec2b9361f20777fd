#pragma once

#include "arrayhd/fock_space.hpp"
#include "arrayhd/homodyne.hpp"
#include "arrayhd/pixel_grid.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace arrayhd {

/// Nine distinct pixels (linear indices); the first entry is the reference
/// pixel that every difference count is taken against.
struct PixelSelection {
    std::array<int, 9> pixels;

    int reference() const { return pixels[0]; }
};

void validate(const PixelSelection& sel, const PixelGrid& grid);

/// 8x8 matrix relating the moment vector to the eight one-port pixel
/// differences: n_d(k) = (dxdy/2) sum_j M[k-2][j] V[j].
struct DifferenceMatrix {
    Eigen::Matrix<Complex, 8, 8> entries;
    double s_factor;          // beta / sqrt(Dx*Dy)
    double condition_number;  // sigma_max / sigma_min (inf when singular)
    double determinant_magnitude;
};

DifferenceMatrix build_difference_matrix(const ModeBasis& basis, const PixelSelection& sel,
                                         const LOConfig& lo);

enum class SelectionStrategy { GreedyCondition, RandomRestart };

SelectionStrategy selection_strategy_from_name(const std::string& name);
std::string to_string(SelectionStrategy s);

struct SelectionOptions {
    SelectionStrategy strategy = SelectionStrategy::GreedyCondition;
    std::uint64_t seed = 0;
    int restarts = 500;
    double max_condition = 1e8;
    int threads = 0;  // 0 = automatic, capped by ARRAYHD_THREADS
};

struct SelectionResult {
    PixelSelection selection;
    double condition_number;
    SelectionStrategy strategy;
    std::uint64_t seed;
};

/// Searches for a pixel set whose difference matrix is well conditioned.
/// Deterministic: the winner is the candidate with the lexicographically
/// smallest (condition number, restart index). Throws if nothing beats
/// max_condition.
SelectionResult select_pixels(const ModeBasis& basis, const PixelGrid& grid, const LOConfig& lo,
                              const SelectionOptions& opts);

std::string selection_report_json(const SelectionResult& result);

/// The eight operator moments recovered by the one-port scheme, in the order
/// {a1'^dag a1', a2'^dag a2', a1'^dag a2', a1' a2'^dag,
///  e^{-i phi} a1', e^{i phi} a1'^dag, e^{-i phi} a2', e^{i phi} a2'^dag}.
struct MomentVector {
    std::array<OperatorMatrix, 8> entries;
};

/// Moments built directly from the mode operators (the ground truth the
/// recovery is checked against).
MomentVector exact_moments(const ModeOperators& ops, const LOConfig& lo);

/// Difference counts n_d(k) = N_1(ref) - N_1(pixel k), k = 2..9, from the
/// port-1 counts alone.
std::vector<OperatorMatrix> pixel_difference_operators(const ModeBasis& basis,
                                                       const ModeOperators& ops,
                                                       const LOConfig& lo,
                                                       const PixelSelection& sel);

/// Solves n_d = (dxdy/2) M V for the moment vector:
/// V_j = (2/dxdy) sum_k (M^{-1})_{jk} n_d(k).
MomentVector recover_moments(const std::vector<OperatorMatrix>& nd, const DifferenceMatrix& m,
                             const PixelGrid& grid);

/// Mixed quadratures from the moment vector:
/// X1' = (V5 + V6)/sqrt(2), X2' = (V7 + V8)/sqrt(2).
std::pair<OperatorMatrix, OperatorMatrix> quadratures_from_moments(const MomentVector& v);

}  // namespace arrayhd
