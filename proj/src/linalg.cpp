#include "cda/linalg.hpp"

#include <lapacke.h>

#include <Eigen/SparseCore>

#include <string>

namespace cda::linalg {
namespace {

lapack_complex_double* as_lapack(cplx* p) {
  return reinterpret_cast<lapack_complex_double*>(p);
}

void check(lapack_int info, const char* routine) {
  if (info < 0) {
    throw std::logic_error(std::string(routine) + ": illegal argument " +
                           std::to_string(-info));
  }
  if (info > 0) {
    throw NumericalError(std::string(routine) + " failed to converge (info=" +
                         std::to_string(info) + ")");
  }
}

}  // namespace

GeneralEigen eig(CMatrix a) {
  const auto n = static_cast<lapack_int>(a.rows());
  GeneralEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  if (n == 0) return out;
  cplx dummy{};
  const lapack_int info = LAPACKE_zgeev(
      LAPACK_COL_MAJOR, 'N', 'V', n, as_lapack(a.data()), n,
      as_lapack(out.values.data()), as_lapack(&dummy), 1,
      as_lapack(out.vectors.data()), n);
  check(info, "zgeev");
  return out;
}

CVector eigvals(CMatrix a) {
  const auto n = static_cast<lapack_int>(a.rows());
  CVector values(n);
  if (n == 0) return values;
  cplx dummy{};
  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, as_lapack(a.data()), n,
                    as_lapack(values.data()), as_lapack(&dummy), 1,
                    as_lapack(&dummy), 1);
  check(info, "zgeev");
  return values;
}

CVector hessenberg_eigvals(CMatrix h) {
  const auto n = static_cast<lapack_int>(h.rows());
  CVector values(n);
  if (n == 0) return values;
  cplx dummy{};
  const lapack_int info =
      LAPACKE_zhseqr(LAPACK_COL_MAJOR, 'E', 'N', n, 1, n, as_lapack(h.data()), n,
                     as_lapack(values.data()), as_lapack(&dummy), 1);
  check(info, "zhseqr");
  return values;
}

CMatrix gram(const CMatrix& h) {
  const Eigen::Index nnz = (h.array() != cplx{}).count();
  if (static_cast<double>(nnz) > 0.05 * static_cast<double>(h.size())) return h.adjoint() * h;
  const Eigen::SparseMatrix<cplx> sparse = h.sparseView();
  const Eigen::SparseMatrix<cplx> product = sparse.adjoint() * sparse;
  return CMatrix(product);
}

HermitianEigen eigh(CMatrix a) {
  const auto n = static_cast<lapack_int>(a.rows());
  HermitianEigen out;
  out.values.resize(n);
  if (n == 0) return out;
  const lapack_int info =
      LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n, as_lapack(a.data()), n,
                     out.values.data());
  check(info, "zheevd");
  out.vectors = std::move(a);
  return out;
}

TridiagonalEigen eig_tridiagonal(Eigen::VectorXd diag, Eigen::VectorXd offdiag) {
  const auto n = static_cast<lapack_int>(diag.size());
  TridiagonalEigen out;
  out.vectors.resize(n, n);
  if (n == 0) return out;
  if (offdiag.size() < n) offdiag.conservativeResize(n);  // dstev wants n-1
  const lapack_int info = LAPACKE_dstev(LAPACK_COL_MAJOR, 'V', n, diag.data(),
                                        offdiag.data(), out.vectors.data(), n);
  check(info, "dstev");
  out.values = std::move(diag);
  return out;
}

}  // namespace cda::linalg
