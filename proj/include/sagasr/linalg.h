#pragma once

#include <vector>

#include "sagasr/matrix.h"

namespace sagasr::linalg {

struct SymmetricEigen {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column i pairs with values[i]
};

// Cyclic Jacobi rotations until the largest off-diagonal magnitude falls
// below tol (relative to the Frobenius norm). Input must be square; only the
// symmetric part is used.
SymmetricEigen eigh(const Matrix& a, double tol = 1e-10);

// V f(diag) V^T with negative eigenvalues clamped to zero before sqrt.
Matrix sqrtm_psd(const Matrix& a);

// Symmetric positive-definite inverse via eigendecomposition.
Matrix inverse_spd(const Matrix& a);

double trace(const Matrix& a);

}  // namespace sagasr::linalg
