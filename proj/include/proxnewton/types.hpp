#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <stdexcept>
#include <string>
#include <utility>

namespace proxnewton {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Symmetric bilinear form on the discretized space, stored as a sparse
/// matrix in the nodal basis.
using BilinearForm = SparseMatrix;

/// Coefficient vector of a discretized field in X (node-major, 3 scalar
/// components per grid node).
struct PrimalVector {
  Vector coeffs;

  PrimalVector() = default;
  explicit PrimalVector(Vector c) : coeffs(std::move(c)) {}

  static PrimalVector zero(Eigen::Index n) { return PrimalVector(Vector::Zero(n)); }

  Eigen::Index size() const { return coeffs.size(); }
  double& operator[](Eigen::Index i) { return coeffs[i]; }
  double operator[](Eigen::Index i) const { return coeffs[i]; }
};

/// Coefficient vector of an element of the dual space X*; entry j is the
/// functional applied to the j-th basis vector.
struct DualFunctional {
  Vector coeffs;

  DualFunctional() = default;
  explicit DualFunctional(Vector c) : coeffs(std::move(c)) {}

  static DualFunctional zero(Eigen::Index n) { return DualFunctional(Vector::Zero(n)); }

  Eigen::Index size() const { return coeffs.size(); }
  double& operator[](Eigen::Index i) { return coeffs[i]; }
  double operator[](Eigen::Index i) const { return coeffs[i]; }

  /// Apply the functional to a primal vector.
  double operator()(const PrimalVector& v) const { return coeffs.dot(v.coeffs); }
};

/// Split objective value F = f + g.
struct ObjectiveEvaluation {
  double f_value = 0.0;
  double g_value = 0.0;
  double F_value = 0.0;
};

/// Violated precondition (dimension mismatch, invalid parameter).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Linear-algebra failure: factorization of a non-SPD matrix, negative
/// norm radicand beyond round-off.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite value encountered during objective evaluation.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, long element)
      : std::runtime_error(what + " (element " + std::to_string(element) + ")"),
        element_index(element) {}
  long element_index;
};

/// Nonpositive curvature met inside the subproblem solver; the caller is
/// expected to raise the regularization parameter.
class NonconvexCurvature : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace proxnewton
