#pragma once

// Thin wrappers over LAPACK drivers for the dense eigenproblems used
// throughout. Inputs are taken by value because LAPACK destroys them.

#include <Eigen/Dense>

#include "cda/types.hpp"

namespace cda::linalg {

struct GeneralEigen {
  CVector values;
  CMatrix vectors;  // right eigenvectors as columns (LAPACK 2-norm scaling)
};

struct HermitianEigen {
  Eigen::VectorXd values;  // ascending
  CMatrix vectors;         // orthonormal columns
};

/// zgeev with right eigenvectors.
GeneralEigen eig(CMatrix a);

/// zgeev, eigenvalues only.
CVector eigvals(CMatrix a);

/// zhseqr eigenvalues of a matrix already in upper Hessenberg form.
CVector hessenberg_eigvals(CMatrix h);

/// H^dag H, through a sparse product when H is mostly zeros.
CMatrix gram(const CMatrix& h);

/// zheevd (divide and conquer); only the lower triangle of `a` is read.
HermitianEigen eigh(CMatrix a);

/// dstev for a real symmetric tridiagonal matrix.
struct TridiagonalEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};
TridiagonalEigen eig_tridiagonal(Eigen::VectorXd diag, Eigen::VectorXd offdiag);

}  // namespace cda::linalg
