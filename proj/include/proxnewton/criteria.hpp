#pragma once

#include <optional>
#include <vector>

#include "proxnewton/hilbert.hpp"
#include "proxnewton/types.hpp"

namespace proxnewton {

/// Outcome of the inexactness checks at one inner iterate.
struct CriteriaReport {
  std::optional<double> E_est;        // relative-error estimate, undefined early
  double eta = 0.0;                   // forcing term (0 in exact/tight modes)
  std::optional<double> omega_tilde;  // undefined while the model value is >= 0
  double omega_tilde_max = 0.0;
  double dual_norm_sq = 0.0;  // ||f'(x) + mu||_{X*}^2
  bool relative_ok = false;
  bool subgradient_ok = false;
};

/// Multigrid-rate relative-error estimate
///   E = (theta/(1-theta) |delta|) / (|step| - theta/(1-theta) |delta|).
/// Undefined while theta is unavailable or the denominator is nonpositive;
/// an undefined estimate leaves the criterion unsatisfied.
std::optional<double> relative_error_estimate(double delta_norm, double step_norm,
                                              std::optional<double> theta);

struct SubgradientCheck {
  std::optional<double> omega_tilde;
  bool satisfied = false;
};

/// Subgradient inexactness criterion: omega_tilde = -dual_norm_sq / (2 lambda)
/// must stay strictly below omega_tilde_max; requires descent (lambda < 0).
SubgradientCheck subgradient_criterion(double dual_norm_sq, double model_value,
                                       double omega_tilde_max);

/// ||grad_f + mu||_{X*}, evaluated through the unit subgradient step: solve
/// the linearized problem for dx = -R^{-1}(grad_f + mu) and take
/// sqrt(-(grad_f + mu)(dx)).
double dual_norm_of_residual(const GramOperator& gram, const DualFunctional& grad_f,
                             const DualFunctional& mu);

/// Acceptance test F(x + step) - F(x) <= gamma * lambda.
bool sufficient_decrease(double F_new, double F_old, double model_value, double gamma);

enum class StopMode { Inexact, Exact, Tight };

/// Per-iteration stopping decision for the subproblem solver. Inexact mode
/// requires both inexactness criteria; exact and tight modes run the solver
/// down to a correction-norm tolerance. Every evaluated iterate leaves a
/// CriteriaReport in the sink.
class StoppingPolicy {
 public:
  enum class Verdict { Continue, CriteriaSatisfied, ExactTolerance };

  static StoppingPolicy make_inexact(double eta, double omega_tilde_max, double dual_norm_sq,
                                     std::vector<CriteriaReport>* sink = nullptr);
  static StoppingPolicy make_exact(std::vector<CriteriaReport>* sink = nullptr,
                                   std::optional<double> dual_norm_sq = std::nullopt);
  static StoppingPolicy make_tight(double tol, std::vector<CriteriaReport>* sink = nullptr);

  Verdict evaluate(double delta_norm, double step_norm, std::optional<double> theta,
                   double model_value);

  StopMode mode() const { return mode_; }
  double forcing_term() const { return eta_; }
  const CriteriaReport& last_report() const { return last_report_; }

 private:
  StoppingPolicy() = default;

  StopMode mode_ = StopMode::Exact;
  double eta_ = 0.0;
  double omega_tilde_max_ = 0.0;
  double dual_norm_sq_ = 0.0;
  bool have_dual_norm_ = false;
  double tight_tol_ = 0.0;
  std::vector<CriteriaReport>* sink_ = nullptr;
  CriteriaReport last_report_;
};

}  // namespace proxnewton
