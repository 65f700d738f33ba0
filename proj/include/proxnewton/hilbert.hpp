#pragma once

#include <Eigen/SparseCholesky>

#include "proxnewton/types.hpp"

namespace proxnewton {

/// Sparse SPD realization of the X-inner product. Owns the matrix of the
/// Riesz map R (defined by Rx = <x,.>_X) together with a cached symmetric
/// factorization, so that dual norms and R^{-1} applications are a single
/// triangular solve.
///
/// Immutable after construction; safe to share across threads.
class GramOperator {
 public:
  /// Factorizes on construction. Throws SolverError if the matrix is not
  /// symmetric positive definite.
  explicit GramOperator(SparseMatrix matrix);

  Eigen::Index size() const { return matrix_.rows(); }
  const SparseMatrix& matrix() const { return matrix_; }

  /// R v, i.e. the functional <v,.>_X.
  DualFunctional apply(const PrimalVector& v) const;

  /// R^{-1} l via the cached factorization.
  PrimalVector solve(const DualFunctional& l) const;

  /// <v,w>_X = v^T R w.
  double inner(const PrimalVector& v, const PrimalVector& w) const;

  /// ||v||_X = sqrt(v^T R v).
  double primal_norm(const PrimalVector& v) const;

  /// ||l||_{X*} = sqrt(l^T R^{-1} l).
  double dual_norm(const DualFunctional& l) const;

 private:
  SparseMatrix matrix_;
  Eigen::SimplicialLDLT<SparseMatrix> factorization_;
};

inline DualFunctional apply_gram(const GramOperator& R, const PrimalVector& v) {
  return R.apply(v);
}

inline PrimalVector riesz_inverse(const GramOperator& R, const DualFunctional& l) {
  return R.solve(l);
}

inline double primal_norm(const GramOperator& R, const PrimalVector& v) {
  return R.primal_norm(v);
}

inline double dual_norm(const GramOperator& R, const DualFunctional& l) {
  return R.dual_norm(l);
}

inline double inner(const GramOperator& R, const PrimalVector& v, const PrimalVector& w) {
  return R.inner(v, w);
}

}  // namespace proxnewton
