#pragma once

#include "sparseplq/penalty.hpp"
#include "sparseplq/problem.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace sparseplq {

/// One strongly convex inner problem
///   min f(z) + h(x) + (γ₁/2)‖x − x_ref‖² + (γ₂/2)‖z − z_ref‖²  s.t.  Ax − z = b
/// with h(x) = ‖ω∘x‖₁ + (μ/2)‖x‖². The instance is held by reference and must
/// outlive the spec.
struct SubproblemSpec {
  const ProblemInstance* inst = nullptr;
  Vector x_ref;
  Vector z_ref;
  Vector omega;
  double mu = 0.0;
  double gamma1 = 1.0;
  double gamma2 = 1.0;

  void validate() const {
    if (inst == nullptr) throw std::invalid_argument("subproblem has no instance");
    if (x_ref.size() != inst->p() || omega.size() != inst->p()) throw DimensionError("x_ref/omega must have length p");
    if (z_ref.size() != inst->n()) throw DimensionError("z_ref must have length n");
    if (!(gamma1 > 0.0) || !(gamma2 > 0.0)) throw std::invalid_argument("proximal moduli must be positive");
    if (!(mu >= 0.0)) throw std::invalid_argument("mu must be nonnegative");
    if ((omega.array() < 0.0).any()) throw std::invalid_argument("weights omega must be nonnegative");
  }
};

struct SNCGConfig {
  double tau_bar = 0.1;
  double eta_bar = 0.1;
  double delta = 0.5;
  double armijo_c = 1e-4;
  int j_max = 50;
  double eps_sncg = 1e-5;
  int cg_max = 300;
  /// Newton systems with n at most this size are solved by dense Cholesky;
  /// larger ones by Jacobi-preconditioned CG.
  Eigen::Index direct_max = 2000;
  int backtrack_max = 30;

  void validate() const {
    auto in01 = [](double v) { return v > 0.0 && v < 1.0; };
    if (!in01(tau_bar) || !in01(eta_bar) || !in01(delta)) throw std::invalid_argument("tau_bar, eta_bar, delta must lie in (0,1)");
    if (!(armijo_c > 0.0 && armijo_c < 0.5)) throw std::invalid_argument("armijo_c must lie in (0, 1/2)");
    if (j_max < 0 || cg_max < 1 || backtrack_max < 0) throw std::invalid_argument("iteration limits must be nonnegative");
    if (!(eps_sncg > 0.0)) throw std::invalid_argument("eps_sncg must be positive");
  }
};

/// Everything the dual evaluation at one u produces.
struct DualEval {
  Vector u;
  Vector Atu;    // Aᵀu
  Vector x;      // P_{γ₁⁻¹}h(x_ref − Aᵀu/γ₁)
  Vector z;      // P_{γ₂⁻¹}f(z_ref + u/γ₂)
  Vector grad;   // Φ(u) = z − Ax + b
  double value = 0.0;
  double magnitude = 0.0;  // sum of |terms| of value, for rounding slack
};

namespace detail {

inline double h_value(const Vector& x, const Vector& omega, double mu) {
  return omega.cwiseProduct(x.cwiseAbs()).sum() + 0.5 * mu * x.squaredNorm();
}

/// A x_ref − z_ref − b: the linear term of the dual. Zero for MM subproblems
/// (z_ref = A x_ref − b), −b for the starting-point problem.
inline Vector dual_offset(const SubproblemSpec& s) { return s.inst->A() * s.x_ref - s.z_ref - s.inst->b(); }

inline DualEval evaluate_dual(const Vector& u, const SubproblemSpec& s, const Vector& offset) {
  const ProblemInstance& inst = *s.inst;
  DualEval e;
  e.u = u;
  e.Atu.noalias() = inst.A().transpose() * u;
  const Vector vz = s.z_ref + u / s.gamma2;
  const Vector vx = s.x_ref - e.Atu / s.gamma1;
  e.z = prox_l1_scaled(vz, inst.n(), s.gamma2);
  e.x = prox_weighted_l1_ridge(vx, s.omega, s.mu, s.gamma1);
  e.grad = e.z + inst.b();
  e.grad.noalias() -= inst.A() * e.x;

  const double env_f = l1_loss(e.z) + 0.5 * s.gamma2 * (e.z - vz).squaredNorm();
  const double env_h = h_value(e.x, s.omega, s.mu) + 0.5 * s.gamma1 * (e.x - vx).squaredNorm();
  const double q_u = u.squaredNorm() / (2.0 * s.gamma2);
  const double q_atu = e.Atu.squaredNorm() / (2.0 * s.gamma1);
  const double lin = u.dot(offset);
  e.value = q_u + q_atu - env_f - env_h - lin;
  e.magnitude = q_u + q_atu + std::abs(env_f) + std::abs(env_h) + std::abs(lin);
  return e;
}

}  // namespace detail

/// Dual objective Ψ(u), including the linear term ⟨u, A x_ref − z_ref − b⟩
/// so that its gradient is exactly dual_gradient.
inline double dual_value(const Vector& u, const SubproblemSpec& spec) {
  return detail::evaluate_dual(u, spec, detail::dual_offset(spec)).value;
}

/// Φ(u) = P_{γ₂⁻¹}f(z_ref + u/γ₂) − A P_{γ₁⁻¹}h(x_ref − Aᵀu/γ₁) + b
inline Vector dual_gradient(const Vector& u, const SubproblemSpec& spec) {
  const ProblemInstance& inst = *spec.inst;
  const Vector Atu = inst.A().transpose() * u;
  const Vector z = prox_l1_scaled(spec.z_ref + u / spec.gamma2, inst.n(), spec.gamma2);
  const Vector x = prox_weighted_l1_ridge(spec.x_ref - Atu / spec.gamma1, spec.omega, spec.mu, spec.gamma1);
  Vector g = z + inst.b();
  g.noalias() -= inst.A() * x;
  return g;
}

/// Diagonals of the selected Clarke Jacobian elements U and V. At kinks the
/// 0 endpoint is chosen.
struct JacobianDiagonals {
  Vector udiag;  // length n, entries in {0, 1}
  Vector vdiag;  // length p, entries in {0, γ₁/(γ₁+μ)}
};

inline JacobianDiagonals jacobian_diagonals(const Vector& u, const Vector& Atu, const SubproblemSpec& spec) {
  const ProblemInstance& inst = *spec.inst;
  JacobianDiagonals d;
  const double thr = 1.0 / (static_cast<double>(inst.n()) * spec.gamma2);
  d.udiag.resize(inst.n());
  for (Eigen::Index i = 0; i < inst.n(); ++i) {
    d.udiag[i] = std::abs(spec.z_ref[i] + u[i] / spec.gamma2) > thr ? 1.0 : 0.0;
  }
  const double vval = spec.gamma1 / (spec.gamma1 + spec.mu);
  d.vdiag.resize(inst.p());
  for (Eigen::Index j = 0; j < inst.p(); ++j) {
    d.vdiag[j] = std::abs(spec.gamma1 * spec.x_ref[j] - Atu[j]) > spec.omega[j] ? vval : 0.0;
  }
  return d;
}

inline JacobianDiagonals jacobian_diagonals(const Vector& u, const SubproblemSpec& spec) {
  return jacobian_diagonals(u, spec.inst->A().transpose() * u, spec);
}

/// W d = γ₂⁻¹(U d) + γ₁⁻¹ A V Aᵀ d, using the full matrix.
inline Vector apply_W(const Vector& d, const JacobianDiagonals& diags, const SubproblemSpec& spec) {
  const Matrix& A = spec.inst->A();
  const Vector t = diags.vdiag.cwiseProduct(A.transpose() * d);
  Vector out = diags.udiag.cwiseProduct(d) / spec.gamma2;
  out.noalias() += (A * t) / spec.gamma1;
  return out;
}

/// W restricted to the columns where V is nonzero; the Newton systems are
/// solved with this operator since the active set is typically small.
class NewtonOperator {
 public:
  NewtonOperator(const JacobianDiagonals& diags, const SubproblemSpec& spec, double tau)
      : udiag_(diags.udiag / spec.gamma2), tau_(tau) {
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < diags.vdiag.size(); ++j) {
      if (diags.vdiag[j] != 0.0) active.push_back(j);
    }
    const Matrix& A = spec.inst->A();
    AJ_.resize(A.rows(), static_cast<Eigen::Index>(active.size()));
    vJ_.resize(static_cast<Eigen::Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      AJ_.col(kk) = A.col(active[k]);
      vJ_[kk] = diags.vdiag[active[k]] / spec.gamma1;
    }
  }

  /// (W + τI) d
  Vector apply(const Vector& d) const {
    Vector out = udiag_.cwiseProduct(d) + tau_ * d;
    if (AJ_.cols() > 0) {
      const Vector t = vJ_.cwiseProduct(AJ_.transpose() * d);
      out.noalias() += AJ_ * t;
    }
    return out;
  }

  Eigen::Index active_count() const noexcept { return AJ_.cols(); }

  /// Diagonal of W + τI, used as the Jacobi preconditioner.
  Vector diagonal() const {
    Vector out = udiag_.array() + tau_;
    if (AJ_.cols() > 0) out.noalias() += AJ_.cwiseAbs2() * vJ_;
    return out;
  }

  /// W + τI as a dense matrix (lower triangle filled).
  Matrix dense() const {
    const Eigen::Index n = udiag_.size();
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
    if (AJ_.cols() > 0) {
      const Eigen::MatrixXd B = AJ_ * vJ_.cwiseSqrt().asDiagonal();
      W.selfadjointView<Eigen::Lower>().rankUpdate(B);
    }
    W.diagonal() += udiag_ + Vector::Constant(n, tau_);
    return W;
  }

 private:
  Vector udiag_;
  double tau_;
  Eigen::MatrixXd AJ_;
  Vector vJ_;
};

struct CGResult {
  Vector d;
  int iterations = 0;
  double residual = 0.0;
  bool hit_max = false;
};

/// Preconditioned conjugate gradients for op·d = rhs from d = 0 with the
/// diagonal preconditioner diag(inv_diag)⁻¹, stopping at ‖rhs − op·d‖ ≤ tol.
template <class Op>
CGResult pcg_solve(const Op& op, const Vector& inv_diag, const Vector& rhs, double tol, int cg_max) {
  CGResult res;
  res.d = Vector::Zero(rhs.size());
  Vector r = rhs;
  res.residual = r.norm();
  if (res.residual <= tol) return res;
  Vector zr = inv_diag.cwiseProduct(r);
  double rz = r.dot(zr);
  Vector p = zr;
  for (int it = 0; it < cg_max; ++it) {
    const Vector Ap = op(p);
    const double pAp = p.dot(Ap);
    if (!(pAp > 0.0)) break;
    const double alpha = rz / pAp;
    res.d.noalias() += alpha * p;
    r.noalias() -= alpha * Ap;
    res.iterations = it + 1;
    res.residual = r.norm();
    if (res.residual <= tol) return res;
    zr = inv_diag.cwiseProduct(r);
    const double rz_new = r.dot(zr);
    p = zr + (rz_new / rz) * p;
    rz = rz_new;
  }
  res.hit_max = res.residual > tol;
  return res;
}

/// Conjugate gradients for op·d = rhs from d = 0, stopping at ‖rhs − op·d‖ ≤ tol.
template <class Op>
CGResult cg_solve(const Op& op, const Vector& rhs, double tol, int cg_max) {
  return pcg_solve(op, Vector::Ones(rhs.size()), rhs, tol, cg_max);
}

/// Solves (W + τI)d = rhs with the CG residual target of the Newton step.
inline CGResult cg_solve(const JacobianDiagonals& diags, double tau, const Vector& rhs, const SubproblemSpec& spec,
                         double tol, int cg_max) {
  const NewtonOperator op(diags, spec, tau);
  return cg_solve([&](const Vector& v) { return op.apply(v); }, rhs, tol, cg_max);
}

/// Newton direction (W + τI)d = rhs: dense Cholesky when n ≤ direct_max,
/// otherwise Jacobi-preconditioned CG with the residual target tol. The
/// diagonal term 1/γ₂ on U makes W badly scaled once γ₂ is small, which
/// plain CG cannot handle within cg_max steps.
inline CGResult newton_direction(const JacobianDiagonals& diags, double tau, const Vector& rhs, const SubproblemSpec& spec,
                                 double tol, const SNCGConfig& cfg) {
  const NewtonOperator op(diags, spec, tau);
  auto apply = [&](const Vector& v) { return op.apply(v); };
  if (rhs.size() <= cfg.direct_max) {
    const Eigen::LLT<Eigen::MatrixXd> llt(op.dense());
    if (llt.info() == Eigen::Success) {
      CGResult res;
      res.d = llt.solve(rhs);
      res.residual = (rhs - op.apply(res.d)).norm();
      if (res.residual <= tol) return res;
      // refine with CG from the direct solution if rounding left it short
      CGResult fix = pcg_solve(apply, op.diagonal().cwiseInverse(), rhs - op.apply(res.d), tol, cfg.cg_max);
      fix.d += res.d;
      return fix;
    }
  }
  return pcg_solve(apply, op.diagonal().cwiseInverse(), rhs, tol, cfg.cg_max);
}

enum class SubproblemStatus { converged, max_iters, stalled };

inline const char* to_string(SubproblemStatus s) {
  switch (s) {
    case SubproblemStatus::converged: return "converged";
    case SubproblemStatus::max_iters: return "max_iters";
    case SubproblemStatus::stalled: return "stalled";
  }
  return "unknown";
}

struct SubproblemResult {
  Vector x;
  Vector z;
  Vector u;
  double gap = 0.0;           // primal value at (x, z) minus dual value −Ψ(u)
  double grad_norm = 0.0;     // ‖Φ(u)‖/(1+‖b‖)
  double dual_value = 0.0;    // Ψ(u)
  int iterations = 0;         // Newton steps taken
  int cg_iterations = 0;
  int cg_max_hits = 0;
  SubproblemStatus status = SubproblemStatus::max_iters;
  std::vector<double> dual_trace;  // Ψ(u^j), j = 0..iterations
};

/// Primal objective of the subproblem at (x, z), ignoring feasibility.
inline double subproblem_primal_value(const Vector& x, const Vector& z, const SubproblemSpec& s) {
  return l1_loss(z) + detail::h_value(x, s.omega, s.mu) + 0.5 * s.gamma1 * (x - s.x_ref).squaredNorm() +
         0.5 * s.gamma2 * (z - s.z_ref).squaredNorm();
}

/// Dual semismooth Newton-CG. Stops when both the normalized dual gradient
/// and the normalized duality gap ⟨u, Φ(u)⟩ drop to eps_sncg, after j_max
/// Newton steps, or when the line search fails.
inline SubproblemResult solve_subproblem(const SubproblemSpec& spec, const SNCGConfig& cfg, const Vector& u_init) {
  spec.validate();
  cfg.validate();
  if (u_init.size() != spec.inst->n()) throw DimensionError("u_init must have length n");

  const double scale = 1.0 + spec.inst->norm_b();
  const Vector offset = detail::dual_offset(spec);
  constexpr double kRound = 16.0 * std::numeric_limits<double>::epsilon();

  SubproblemResult out;
  DualEval cur = detail::evaluate_dual(u_init, spec, offset);
  out.dual_trace.push_back(cur.value);

  for (int j = 0;; ++j) {
    const double gnorm = cur.grad.norm();
    const double gap = cur.u.dot(cur.grad);
    out.grad_norm = gnorm / scale;
    out.gap = gap;
    if (out.grad_norm <= cfg.eps_sncg && std::abs(gap) / scale <= cfg.eps_sncg) {
      out.status = SubproblemStatus::converged;
      break;
    }
    if (j >= cfg.j_max) {
      out.status = SubproblemStatus::max_iters;
      break;
    }

    const JacobianDiagonals diags = jacobian_diagonals(cur.u, cur.Atu, spec);
    const double tau = std::min(cfg.tau_bar, gnorm / scale) / spec.gamma2;
    const double cg_tol = std::min(cfg.eta_bar, std::pow(gnorm, 1.1));
    const CGResult cg = newton_direction(diags, tau, -cur.grad, spec, cg_tol, cfg);
    out.cg_iterations += cg.iterations;
    out.cg_max_hits += cg.hit_max ? 1 : 0;

    const double slope = cur.grad.dot(cg.d);
    bool accepted = false;
    double alpha = 1.0;
    if (slope < 0.0) {
      for (int m = 0; m <= cfg.backtrack_max; ++m) {
        DualEval trial = detail::evaluate_dual(cur.u + alpha * cg.d, spec, offset);
        const double slack = kRound * std::max(cur.magnitude, trial.magnitude);
        if (trial.value <= cur.value + cfg.armijo_c * alpha * slope + slack) {
          cur = std::move(trial);
          accepted = true;
          break;
        }
        alpha *= cfg.delta;
      }
    }
    if (!accepted) {
      out.status = SubproblemStatus::stalled;
      break;
    }
    ++out.iterations;
    out.dual_trace.push_back(cur.value);
  }

  out.x = std::move(cur.x);
  out.z = std::move(cur.z);
  out.u = std::move(cur.u);
  out.dual_value = cur.value;
  return out;
}

}  // namespace sparseplq
