#pragma once

#include "semtts/matrix.hpp"

#include <vector>

namespace semtts {

struct SymmetricEigen {
    std::vector<double> values; ///< descending
    Matrix vectors;             ///< column k pairs with values[k], unit norm
};

/// Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.
SymmetricEigen symmetric_eigen(const Matrix& sym);

/// y = W x for every row x of `x`; result is rows(x) x rows(W).
Matrix multiply_rows(const Matrix& w, const Matrix& x);

} // namespace semtts
