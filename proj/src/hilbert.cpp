#include "proxnewton/hilbert.hpp"

#include <cmath>

namespace proxnewton {

namespace {

// Small negative radicands are factorization round-off; beyond this the
// operator is not SPD.
constexpr double kRadicandTolerance = 1e-14;

double checked_sqrt(double radicand, const char* what) {
  if (radicand < -kRadicandTolerance) {
    throw SolverError(std::string(what) + ": negative radicand, operator not SPD");
  }
  return std::sqrt(radicand < 0.0 ? 0.0 : radicand);
}

}  // namespace

GramOperator::GramOperator(SparseMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols()) {
    throw ContractViolation("GramOperator: matrix must be square");
  }
  SparseMatrix transposed = SparseMatrix(matrix_.transpose());
  if (!matrix_.isApprox(transposed, 0.0)) {
    throw ContractViolation("GramOperator: matrix must be symmetric");
  }
  factorization_.compute(matrix_);
  if (factorization_.info() != Eigen::Success) {
    throw SolverError("GramOperator: factorization failed");
  }
  // LDLT succeeds on some indefinite matrices; D must stay positive.
  if (factorization_.vectorD().minCoeff() <= 0.0) {
    throw SolverError("GramOperator: matrix not positive definite");
  }
}

DualFunctional GramOperator::apply(const PrimalVector& v) const {
  if (v.size() != size()) {
    throw ContractViolation("apply_gram: dimension mismatch");
  }
  return DualFunctional(matrix_ * v.coeffs);
}

PrimalVector GramOperator::solve(const DualFunctional& l) const {
  if (l.size() != size()) {
    throw ContractViolation("riesz_inverse: dimension mismatch");
  }
  return PrimalVector(factorization_.solve(l.coeffs));
}

double GramOperator::inner(const PrimalVector& v, const PrimalVector& w) const {
  if (v.size() != size() || w.size() != size()) {
    throw ContractViolation("inner: dimension mismatch");
  }
  return v.coeffs.dot(matrix_ * w.coeffs);
}

double GramOperator::primal_norm(const PrimalVector& v) const {
  if (v.size() != size()) {
    throw ContractViolation("primal_norm: dimension mismatch");
  }
  return checked_sqrt(v.coeffs.dot(matrix_ * v.coeffs), "primal_norm");
}

double GramOperator::dual_norm(const DualFunctional& l) const {
  if (l.size() != size()) {
    throw ContractViolation("dual_norm: dimension mismatch");
  }
  return checked_sqrt(l.coeffs.dot(factorization_.solve(l.coeffs)), "dual_norm");
}

}  // namespace proxnewton
