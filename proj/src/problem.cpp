#include "proxnewton/problem.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace proxnewton {

// ---------------------------------------------------------------------------
// CompositeObjective: the separable weighted-L1 part.

double CompositeObjective::eval_g(const PrimalVector& u) const {
  const Vector& w = l1_weights();
  if (u.size() != w.size()) {
    throw ContractViolation("eval_g: dimension mismatch");
  }
  return w.dot(u.coeffs.cwiseAbs());
}

DualFunctional CompositeObjective::min_norm_subgradient(const PrimalVector& u,
                                                        const DualFunctional& grad_f) const {
  const Vector& w = l1_weights();
  if (u.size() != w.size() || grad_f.size() != w.size()) {
    throw ContractViolation("min_norm_subgradient: dimension mismatch");
  }
  DualFunctional mu = DualFunctional::zero(w.size());
  for (Eigen::Index p = 0; p < w.size(); ++p) {
    if (u[p] > 0.0) {
      mu[p] = w[p];
    } else if (u[p] < 0.0) {
      mu[p] = -w[p];
    } else {
      mu[p] = std::clamp(-grad_f[p], -w[p], w[p]);
    }
  }
  return mu;
}

ObjectiveEvaluation CompositeObjective::eval_F(const PrimalVector& u) const {
  ObjectiveEvaluation out;
  out.f_value = eval_f(u);
  out.g_value = eval_g(u);
  out.F_value = out.f_value + out.g_value;
  return out;
}

// ---------------------------------------------------------------------------
// Uniform tensor grid with multilinear Q1 elements.

struct CompositeProblem::Quadrature {
  int dim = 0;
  Eigen::Index nodes_per_axis = 0;
  double h = 0.0;
  int corners = 0;  // 2^dim
  int num_qp = 0;   // 2^dim (tensor 2-point Gauss)
  double qp_weight = 0.0;
  Eigen::Index num_elements = 0;
  std::array<Eigen::Index, 3> node_stride{};
  std::vector<Eigen::Index> corner_offset;            // [corner]
  std::vector<std::vector<double>> value;             // [qp][corner]
  std::vector<std::vector<std::array<double, 3>>> grad;  // [qp][corner][axis]

  static Quadrature build(int dim, Eigen::Index n) {
    Quadrature q;
    q.dim = dim;
    q.nodes_per_axis = n;
    q.h = 1.0 / double(n - 1);
    q.corners = 1 << dim;
    q.num_qp = 1 << dim;
    q.qp_weight = std::pow(0.5 * q.h, dim);
    q.num_elements = 1;
    for (int k = 0; k < dim; ++k) q.num_elements *= (n - 1);
    q.node_stride = {1, n, n * n};

    q.corner_offset.resize(q.corners);
    for (int a = 0; a < q.corners; ++a) {
      Eigen::Index off = 0;
      for (int k = 0; k < dim; ++k)
        if (a & (1 << k)) off += q.node_stride[k];
      q.corner_offset[a] = off;
    }

    // 2-point Gauss on [0,1]; exact for the bilinear-form integrands.
    const double g[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
    q.value.assign(q.num_qp, std::vector<double>(q.corners, 0.0));
    q.grad.assign(q.num_qp, std::vector<std::array<double, 3>>(q.corners, {0.0, 0.0, 0.0}));
    for (int qi = 0; qi < q.num_qp; ++qi) {
      std::array<double, 3> xi{};
      for (int k = 0; k < dim; ++k) xi[k] = g[(qi >> k) & 1];
      for (int a = 0; a < q.corners; ++a) {
        double val = 1.0;
        for (int k = 0; k < dim; ++k) {
          const double t = xi[k];
          val *= (a & (1 << k)) ? t : (1.0 - t);
        }
        q.value[qi][a] = val;
        for (int k = 0; k < dim; ++k) {
          double dv = (a & (1 << k)) ? 1.0 : -1.0;
          for (int j = 0; j < dim; ++j) {
            if (j == k) continue;
            const double t = xi[j];
            dv *= (a & (1 << j)) ? t : (1.0 - t);
          }
          q.grad[qi][a][k] = dv / q.h;
        }
      }
    }
    return q;
  }

  Eigen::Index element_base_node(Eigen::Index e) const {
    Eigen::Index base = 0;
    const Eigen::Index m = nodes_per_axis - 1;
    for (int k = 0; k < dim; ++k) {
      base += (e % m) * node_stride[k];
      e /= m;
    }
    return base;
  }
};

namespace {

// Pointwise rational term phi(v) = v1^3 v2^2 v3 / (1 + |v|^2) and its
// derivatives.
double phi_value(const Eigen::Vector3d& v) {
  const double p = v[0] * v[0] * v[0] * v[1] * v[1] * v[2];
  const double q = 1.0 + v.squaredNorm();
  return p / q;
}

Eigen::Vector3d phi_gradient(const Eigen::Vector3d& v) {
  const double p = v[0] * v[0] * v[0] * v[1] * v[1] * v[2];
  const double q = 1.0 + v.squaredNorm();
  Eigen::Vector3d dp(3.0 * v[0] * v[0] * v[1] * v[1] * v[2],
                     2.0 * v[0] * v[0] * v[0] * v[1] * v[2],
                     v[0] * v[0] * v[0] * v[1] * v[1]);
  return dp / q - (2.0 * p / (q * q)) * v;
}

Eigen::Matrix3d phi_hessian(const Eigen::Vector3d& v) {
  const double p = v[0] * v[0] * v[0] * v[1] * v[1] * v[2];
  const double q = 1.0 + v.squaredNorm();
  Eigen::Vector3d dp(3.0 * v[0] * v[0] * v[1] * v[1] * v[2],
                     2.0 * v[0] * v[0] * v[0] * v[1] * v[2],
                     v[0] * v[0] * v[0] * v[1] * v[1]);
  Eigen::Matrix3d hp;
  hp << 6.0 * v[0] * v[1] * v[1] * v[2], 6.0 * v[0] * v[0] * v[1] * v[2],
      3.0 * v[0] * v[0] * v[1] * v[1],                                      //
      6.0 * v[0] * v[0] * v[1] * v[2], 2.0 * v[0] * v[0] * v[0] * v[2],
      2.0 * v[0] * v[0] * v[0] * v[1],                                      //
      3.0 * v[0] * v[0] * v[1] * v[1], 2.0 * v[0] * v[0] * v[0] * v[1], 0.0;
  const Eigen::Vector3d dq = 2.0 * v;
  const double q2 = q * q;
  Eigen::Matrix3d out = hp / q;
  out -= (dp * dq.transpose() + dq * dp.transpose()) / q2;
  out -= (2.0 * p / q2) * Eigen::Matrix3d::Identity();
  out += (2.0 * p / (q2 * q)) * (dq * dq.transpose());
  return out;
}

}  // namespace

CompositeProblem CompositeProblem::assemble(const ProblemConfig& config) {
  if (config.dimension < 1 || config.dimension > 3) {
    throw ContractViolation("assemble: dimension must be 1, 2 or 3");
  }
  if (config.nodes_per_axis < 3) {
    throw ContractViolation("assemble: need at least 3 nodes per axis");
  }
  if (!(config.c > 0.0)) {
    throw ContractViolation("assemble: L1 weight c must be positive");
  }

  CompositeProblem p;
  p.config_ = config;
  const int d = config.dimension;
  const Eigen::Index n = config.nodes_per_axis;
  p.nodes_per_axis_ = n;
  p.mesh_width_ = 1.0 / double(n - 1);
  Eigen::Index num_nodes = 1;
  for (int k = 0; k < d; ++k) num_nodes *= n;
  p.num_nodes_ = num_nodes;

  auto quad = std::make_shared<Quadrature>(Quadrature::build(d, n));
  p.quadrature_ = quad;

  // Boundary mask and trapezoidal (lumped) weights per node.
  std::vector<char> node_masked(num_nodes, 0);
  p.lumped_mass_ = Vector::Zero(num_nodes);
  for (Eigen::Index i = 0; i < num_nodes; ++i) {
    Eigen::Index rest = i;
    double weight = 1.0;
    bool boundary = false;
    for (int k = 0; k < d; ++k) {
      const Eigen::Index coord = rest % n;
      rest /= n;
      const bool end = (coord == 0 || coord == n - 1);
      boundary = boundary || end;
      weight *= p.mesh_width_ * (end ? 0.5 : 1.0);
    }
    node_masked[i] = boundary ? 1 : 0;
    p.lumped_mass_[i] = weight;
  }
  if (std::abs(p.lumped_mass_.sum() - 1.0) > 1e-12) {
    throw SolverError("assemble: lumped mass does not sum to the domain volume");
  }

  p.boundary_mask_.assign(3 * num_nodes, 0);
  p.l1_weights_ = Vector::Zero(3 * num_nodes);
  for (Eigen::Index i = 0; i < num_nodes; ++i) {
    for (int c = 0; c < 3; ++c) {
      p.boundary_mask_[3 * i + c] = node_masked[i];
      p.l1_weights_[3 * i + c] = config.c * p.lumped_mass_[i];
    }
  }

  // Scalar stiffness (+ mass for the full H1 norm), then the vector-valued
  // Gram matrix: one copy per component, Dirichlet rows/columns replaced by
  // the identity.
  const bool with_mass = (config.norm == NormChoice::H1);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<size_t>(quad->num_elements) * quad->corners * quad->corners * 3 +
                   static_cast<size_t>(3 * num_nodes));
  for (Eigen::Index e = 0; e < quad->num_elements; ++e) {
    const Eigen::Index base = quad->element_base_node(e);
    for (int q = 0; q < quad->num_qp; ++q) {
      for (int a = 0; a < quad->corners; ++a) {
        const Eigen::Index ia = base + quad->corner_offset[a];
        if (node_masked[ia]) continue;
        for (int b = 0; b < quad->corners; ++b) {
          const Eigen::Index ib = base + quad->corner_offset[b];
          if (node_masked[ib]) continue;
          double entry = 0.0;
          for (int k = 0; k < d; ++k) entry += quad->grad[q][a][k] * quad->grad[q][b][k];
          if (with_mass) entry += quad->value[q][a] * quad->value[q][b];
          entry *= quad->qp_weight;
          for (int c = 0; c < 3; ++c) {
            triplets.emplace_back(3 * ia + c, 3 * ib + c, entry);
          }
        }
      }
    }
  }
  for (Eigen::Index i = 0; i < num_nodes; ++i) {
    if (node_masked[i]) {
      for (int c = 0; c < 3; ++c) triplets.emplace_back(3 * i + c, 3 * i + c, 1.0);
    }
  }
  SparseMatrix gram(3 * num_nodes, 3 * num_nodes);
  gram.setFromTriplets(triplets.begin(), triplets.end());
  p.gram_ = std::make_shared<GramOperator>(std::move(gram));
  return p;
}

void CompositeProblem::check_mask_respected(const PrimalVector& u) const {
  if (u.size() != num_dofs()) {
    throw ContractViolation("model problem: dimension mismatch");
  }
  for (Eigen::Index p = 0; p < u.size(); ++p) {
    if (boundary_mask_[p] && u[p] != 0.0) {
      throw ContractViolation("model problem: masked coefficient must be zero");
    }
  }
}

double CompositeProblem::eval_f(const PrimalVector& u) const {
  check_mask_respected(u);
  const Quadrature& quad = *quadrature_;
  const int d = config_.dimension;
  const double alpha = config_.alpha;
  const double qscale = config_.quadratic_term_weight;
  const Eigen::Vector3d rho = config_.rho * Eigen::Vector3d::Ones();

  double total = 0.0;
  for (Eigen::Index e = 0; e < quad.num_elements; ++e) {
    const Eigen::Index base = quad.element_base_node(e);
    double contrib = 0.0;
    for (int q = 0; q < quad.num_qp; ++q) {
      Eigen::Vector3d uq = Eigen::Vector3d::Zero();
      Eigen::Matrix<double, 3, 3> jac = Eigen::Matrix<double, 3, 3>::Zero();  // 3 x dim used
      for (int a = 0; a < quad.corners; ++a) {
        const Eigen::Index node = base + quad.corner_offset[a];
        for (int c = 0; c < 3; ++c) {
          const double coeff = u[3 * node + c];
          uq[c] += quad.value[q][a] * coeff;
          for (int k = 0; k < d; ++k) jac(c, k) += quad.grad[q][a][k] * coeff;
        }
      }
      const double s2 = jac.squaredNorm();
      const double s = std::sqrt(s2);
      double integrand = 0.5 * qscale * s2 + rho.dot(uq);
      if (s > 1.0) integrand += alpha * (s - 1.0) * (s - 1.0);
      contrib += quad.qp_weight * integrand;
    }
    if (!std::isfinite(contrib)) {
      throw EvaluationError("eval_f: non-finite element contribution", e);
    }
    total += contrib;
  }

  // Rational term on the lumped nodal rule.
  const double beta = config_.beta;
  if (beta != 0.0) {
    for (Eigen::Index i = 0; i < num_nodes_; ++i) {
      const Eigen::Vector3d ui(u[3 * i], u[3 * i + 1], u[3 * i + 2]);
      const double val = beta * lumped_mass_[i] * phi_value(ui);
      if (!std::isfinite(val)) {
        throw EvaluationError("eval_f: non-finite nodal contribution", i);
      }
      total += val;
    }
  }
  return total;
}

DualFunctional CompositeProblem::eval_grad_f(const PrimalVector& u) const {
  check_mask_respected(u);
  const Quadrature& quad = *quadrature_;
  const int d = config_.dimension;
  const double alpha = config_.alpha;
  const double qscale = config_.quadratic_term_weight;
  const Eigen::Vector3d rho = config_.rho * Eigen::Vector3d::Ones();

  DualFunctional grad = DualFunctional::zero(num_dofs());
  for (Eigen::Index e = 0; e < quad.num_elements; ++e) {
    const Eigen::Index base = quad.element_base_node(e);
    for (int q = 0; q < quad.num_qp; ++q) {
      Eigen::Vector3d uq = Eigen::Vector3d::Zero();
      Eigen::Matrix<double, 3, 3> jac = Eigen::Matrix<double, 3, 3>::Zero();
      for (int a = 0; a < quad.corners; ++a) {
        const Eigen::Index node = base + quad.corner_offset[a];
        for (int c = 0; c < 3; ++c) {
          const double coeff = u[3 * node + c];
          uq[c] += quad.value[q][a] * coeff;
          for (int k = 0; k < d; ++k) jac(c, k) += quad.grad[q][a][k] * coeff;
        }
      }
      const double s = jac.norm();
      // Both the quadratic and the max term differentiate to a multiple of
      // the Jacobian: d/dJ [1/2 |J|^2] = J, d/dJ [alpha (s-1)_+^2] =
      // 2 alpha (s-1)_+ J / s.
      double jac_factor = qscale;
      if (s > 1.0) jac_factor += 2.0 * alpha * (s - 1.0) / s;
      for (int a = 0; a < quad.corners; ++a) {
        const Eigen::Index node = base + quad.corner_offset[a];
        for (int c = 0; c < 3; ++c) {
          double entry = rho[c] * quad.value[q][a];
          for (int k = 0; k < d; ++k) entry += jac_factor * jac(c, k) * quad.grad[q][a][k];
          grad[3 * node + c] += quad.qp_weight * entry;
        }
      }
    }
  }

  const double beta = config_.beta;
  if (beta != 0.0) {
    for (Eigen::Index i = 0; i < num_nodes_; ++i) {
      const Eigen::Vector3d ui(u[3 * i], u[3 * i + 1], u[3 * i + 2]);
      const Eigen::Vector3d dphi = phi_gradient(ui);
      for (int c = 0; c < 3; ++c) grad[3 * i + c] += beta * lumped_mass_[i] * dphi[c];
    }
  }

  for (Eigen::Index p = 0; p < grad.size(); ++p) {
    if (boundary_mask_[p]) grad[p] = 0.0;
    if (!std::isfinite(grad[p])) {
      throw EvaluationError("eval_grad_f: non-finite entry", p / 3);
    }
  }
  return grad;
}

BilinearForm CompositeProblem::eval_hessian(const PrimalVector& u) const {
  check_mask_respected(u);
  const Quadrature& quad = *quadrature_;
  const int d = config_.dimension;
  const double alpha = config_.alpha;
  const double qscale = config_.quadratic_term_weight;

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<size_t>(quad.num_elements) * quad.num_qp * quad.corners *
                       quad.corners * 4 +
                   static_cast<size_t>(num_nodes_) * 9);

  std::vector<std::array<double, 3>> jac_dot_grad(quad.corners);  // (J grad N_a)_c
  for (Eigen::Index e = 0; e < quad.num_elements; ++e) {
    const Eigen::Index base = quad.element_base_node(e);
    for (int q = 0; q < quad.num_qp; ++q) {
      Eigen::Matrix<double, 3, 3> jac = Eigen::Matrix<double, 3, 3>::Zero();
      for (int a = 0; a < quad.corners; ++a) {
        const Eigen::Index node = base + quad.corner_offset[a];
        for (int c = 0; c < 3; ++c) {
          const double coeff = u[3 * node + c];
          for (int k = 0; k < d; ++k) jac(c, k) += quad.grad[q][a][k] * coeff;
        }
      }
      const double s = jac.norm();

      // Newton derivative of the max term: zero branch for s <= 1, the
      // analytic second derivative 2 alpha [(1 - 1/s)(B:C) + (J:B)(J:C)/s^3]
      // beyond the kink.
      double laplace_factor = qscale;
      double rank_factor = 0.0;
      if (s > 1.0) {
        laplace_factor += 2.0 * alpha * (1.0 - 1.0 / s);
        rank_factor = 2.0 * alpha / (s * s * s);
      }

      if (rank_factor != 0.0) {
        for (int a = 0; a < quad.corners; ++a) {
          for (int c = 0; c < 3; ++c) {
            double acc = 0.0;
            for (int k = 0; k < d; ++k) acc += jac(c, k) * quad.grad[q][a][k];
            jac_dot_grad[a][c] = acc;
          }
        }
      }

      for (int a = 0; a < quad.corners; ++a) {
        const Eigen::Index ia = base + quad.corner_offset[a];
        if (boundary_mask_[3 * ia]) continue;
        for (int b = 0; b < quad.corners; ++b) {
          const Eigen::Index ib = base + quad.corner_offset[b];
          if (boundary_mask_[3 * ib]) continue;
          double gg = 0.0;
          for (int k = 0; k < d; ++k) gg += quad.grad[q][a][k] * quad.grad[q][b][k];
          const double diag_entry = quad.qp_weight * laplace_factor * gg;
          for (int c = 0; c < 3; ++c) {
            triplets.emplace_back(3 * ia + c, 3 * ib + c, diag_entry);
          }
          if (rank_factor != 0.0) {
            for (int c = 0; c < 3; ++c) {
              for (int cc = 0; cc < 3; ++cc) {
                triplets.emplace_back(
                    3 * ia + c, 3 * ib + cc,
                    quad.qp_weight * rank_factor * jac_dot_grad[a][c] * jac_dot_grad[b][cc]);
              }
            }
          }
        }
      }
    }
  }

  const double beta = config_.beta;
  if (beta != 0.0) {
    for (Eigen::Index i = 0; i < num_nodes_; ++i) {
      if (boundary_mask_[3 * i]) continue;
      const Eigen::Vector3d ui(u[3 * i], u[3 * i + 1], u[3 * i + 2]);
      const Eigen::Matrix3d block = beta * lumped_mass_[i] * phi_hessian(ui);
      for (int c = 0; c < 3; ++c) {
        for (int cc = 0; cc < 3; ++cc) {
          if (block(c, cc) != 0.0) triplets.emplace_back(3 * i + c, 3 * i + cc, block(c, cc));
        }
      }
    }
  }

  BilinearForm hess(num_dofs(), num_dofs());
  hess.setFromTriplets(triplets.begin(), triplets.end());
  for (Eigen::Index k = 0; k < hess.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(hess, k); it; ++it) {
      if (!std::isfinite(it.value())) {
        throw EvaluationError("eval_hessian: non-finite entry", it.row() / 3);
      }
    }
  }
  return hess;
}

}  // namespace proxnewton
