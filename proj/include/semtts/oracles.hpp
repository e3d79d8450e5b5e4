#pragma once

// Independent reference computations used by selfcheck and the test suites.
// None of these share code paths with the routines they check.

#include "semtts/fusion.hpp"
#include "semtts/matrix.hpp"

#include <cstddef>
#include <vector>

namespace semtts::oracle {

/// Central finite differences of sum(grad_out * fuse_sequential(q, kv).matrix).
FusionGrads finite_difference_grads(const Matrix& q, const Matrix& kv, const FusionConfig& cfg, const MaskPair& masks,
                                    const Matrix& grad_out, double eps = 1e-6);

/// max |a - b| / max(max |a|, max |b|) over both gradient blocks.
double gradient_relative_error(const FusionGrads& analytic, const FusionGrads& numeric);

struct DenseEigen {
    std::vector<double> top_vector; ///< unit norm, arbitrary sign
    double top_value = 0.0;
    double second_value = 0.0;      ///< -inf when d == 1
};

/// Top eigenpair of the sample covariance H_c^T H_c / (n - 1), dense solver.
DenseEigen covariance_top_eigen(const Matrix& h);

/// All token lists over `alphabet` symbols with length <= max_len, in
/// shortlex order, encoded as small integers.
std::vector<std::vector<int>> enumerate_lists(int alphabet, std::size_t max_len);

/// Shortest-path edit distances between every pair of lists from
/// enumerate_lists, computed by breadth-first search over single
/// insert/delete/substitute moves. Row-major |lists| x |lists|.
std::vector<int> edit_distance_table(const std::vector<std::vector<int>>& lists, int alphabet);

} // namespace semtts::oracle
