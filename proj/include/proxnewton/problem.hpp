#pragma once

#include <memory>
#include <vector>

#include "proxnewton/hilbert.hpp"
#include "proxnewton/types.hpp"

namespace proxnewton {

enum class NormChoice { H1, H1Semi };

/// Parameters of the model problem on the uniform grid over [0,1]^d.
struct ProblemConfig {
  int dimension = 2;
  int nodes_per_axis = 5;
  double alpha = 40.0;
  double beta = 40.0;
  double c = 80.0;
  double rho = -100.0;  // load factor; the force field is rho * (1,1,1)
  NormChoice norm = NormChoice::H1;
  // Scales the 1/2 ||grad u||_F^2 term. Unit tests switch it off to probe
  // the remaining terms in isolation.
  double quadratic_term_weight = 1.0;
};

/// Optional convexity metadata (kappa_1 for the quadratic model, kappa_2
/// for g). Unknown entries are NaN; nothing in the solver consumes them.
struct ConvexityEstimates {
  double kappa1 = std::numeric_limits<double>::quiet_NaN();
  double kappa2 = std::numeric_limits<double>::quiet_NaN();
};

/// Composite objective F = f + g with smooth f and a separable weighted-L1
/// nonsmooth part g(u) = sum_p w_p |u_p|. The weights (and the Dirichlet
/// mask) fully determine g, so its operations live on the base class.
class CompositeObjective {
 public:
  virtual ~CompositeObjective() = default;

  virtual const GramOperator& gram() const = 0;
  /// Per-coefficient L1 weights of g; c * lumped_mass for the model problem.
  virtual const Vector& l1_weights() const = 0;
  /// true = coefficient constrained to zero (Dirichlet).
  virtual const std::vector<char>& boundary_mask() const = 0;

  virtual double eval_f(const PrimalVector& u) const = 0;
  virtual DualFunctional eval_grad_f(const PrimalVector& u) const = 0;
  virtual BilinearForm eval_hessian(const PrimalVector& u) const = 0;

  double eval_g(const PrimalVector& u) const;

  /// Element of the subdifferential of g at u minimizing |grad_f + mu|
  /// componentwise: the sign pattern where u is nonzero, the clamp of
  /// -grad_f onto [-w, w] where it is zero.
  DualFunctional min_norm_subgradient(const PrimalVector& u, const DualFunctional& grad_f) const;

  ObjectiveEvaluation eval_F(const PrimalVector& u) const;
};

/// Discretized model problem
///   F(u) = int_Omega 1/2 |grad u|_F^2 + alpha max(|grad u|_F - 1, 0)^2
///          + beta u1^3 u2^2 u3 / (1 + |u|^2) + rho . u  domega
///          + int_Omega c |u|_1 domega
/// on multilinear Q1 elements over the uniform grid, homogeneous Dirichlet
/// boundary. Gradient-dependent terms use tensor 2-point Gauss quadrature
/// per element; the pointwise rational term and g use the lumped nodal rule
/// (which keeps g separable per coefficient).
class CompositeProblem final : public CompositeObjective {
 public:
  static CompositeProblem assemble(const ProblemConfig& config);

  const ProblemConfig& config() const { return config_; }
  int dimension() const { return config_.dimension; }
  Eigen::Index num_nodes() const { return num_nodes_; }
  Eigen::Index num_dofs() const { return 3 * num_nodes_; }

  const GramOperator& gram() const override { return *gram_; }
  const Vector& lumped_mass() const { return lumped_mass_; }
  const Vector& l1_weights() const override { return l1_weights_; }
  const std::vector<char>& boundary_mask() const override { return boundary_mask_; }

  double eval_f(const PrimalVector& u) const override;
  DualFunctional eval_grad_f(const PrimalVector& u) const override;
  BilinearForm eval_hessian(const PrimalVector& u) const override;

 private:
  CompositeProblem() = default;

  void check_mask_respected(const PrimalVector& u) const;

  ProblemConfig config_;
  Eigen::Index num_nodes_ = 0;
  Eigen::Index nodes_per_axis_ = 0;
  double mesh_width_ = 0.0;
  std::shared_ptr<GramOperator> gram_;
  Vector lumped_mass_;
  Vector l1_weights_;
  std::vector<char> boundary_mask_;

  struct Quadrature;
  std::shared_ptr<const Quadrature> quadrature_;
};

}  // namespace proxnewton
