#pragma once

#include "sparseplq/metrics.hpp"
#include "sparseplq/penalty.hpp"
#include "sparseplq/pmm.hpp"
#include "sparseplq/problem.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace sparseplq {

struct ADMMConfig {
  double eps_smooth = 1.0;          // ε of the Moreau envelope
  std::optional<double> sigma;      // defaults to 4.5/ε
  int k_max = 20000;
  double eps_admm = 1e-5;

  double sigma_value() const { return sigma ? *sigma : 4.5 / eps_smooth; }

  void validate() const {
    if (!(eps_smooth > 0.0)) throw std::invalid_argument("eps_smooth must be positive");
    const double s = sigma_value();
    if (!(s > 2.0 * std::sqrt(2.0) / eps_smooth)) {
      throw std::invalid_argument("sigma must exceed 2*sqrt(2)/eps for the augmented Lagrangian to descend");
    }
    if (k_max < 0) throw std::invalid_argument("k_max must be nonnegative");
  }
};

/// γ = σ‖A‖²/2 + λ(a+1)ρ/(2(a−1)) − μ
inline double admm_gamma(const ProblemInstance& inst, const PenaltyParams& pp, double sigma) {
  return 0.5 * sigma * inst.spec_norm_sq() + pp.concavity() - inst.mu();
}

struct ADMMState {
  Vector x;
  Vector z;
  Vector y;
};

struct ADMMReport : SolveReport {
  double sigma = 0.0;
  double gamma = 0.0;
  double eps_smooth = 0.0;
  std::vector<double> pinf_trace;
  std::vector<double> dinf_trace;
  /// L(k) − L(k+1) − [(σ/2 − 4/(σε²))‖Δz‖² + ((λ(a+1)ρ − 2(a−1)μ)/(4(a−1)))‖Δx‖²]
  std::vector<double> descent_gaps;
  ADMMState final_state;
};

/// L_σ(x, z; y) = e_ε f(z) + (μ/2)‖x‖² + ϑ(x) + ⟨y, Ax − b − z⟩ + (σ/2)‖Ax − b − z‖²
inline double aug_lagrangian(const Vector& x, const Vector& z, const Vector& y, const ProblemInstance& inst,
                             const PenaltyParams& pp, const ADMMConfig& cfg) {
  const Vector r = residual(inst, x) - z;
  return moreau_l1(z, cfg.eps_smooth, inst.n()) + 0.5 * inst.mu() * x.squaredNorm() + surrogate_penalty_sum(x, pp) +
         y.dot(r) + 0.5 * cfg.sigma_value() * r.squaredNorm();
}

/// x-update: ξ = [γx + σAᵀ(z + b − Ax − y/σ)]/(μ+γ), then the scalar prox of ϑ.
inline Vector x_update(const Vector& x, const Vector& z, const Vector& y, const ProblemInstance& inst,
                       const PenaltyParams& pp, const ADMMConfig& cfg) {
  const double sigma = cfg.sigma_value();
  const double gamma = admm_gamma(inst, pp, sigma);
  const double c = inst.mu() + gamma;
  const Vector t = z + inst.b() - inst.A() * x - y / sigma;
  const Vector xi = (gamma * x + sigma * (inst.A().transpose() * t)) / c;
  Vector out(xi.size());
  for (Eigen::Index i = 0; i < xi.size(); ++i) out[i] = prox_vartheta(xi[i], pp, c);
  return out;
}

/// z-update: prox of e_ε f at η = Ax − b + y/σ.
inline Vector z_update(const Vector& x_next, const Vector& y, const ProblemInstance& inst, const ADMMConfig& cfg) {
  const double sigma = cfg.sigma_value();
  const Vector eta = residual(inst, x_next) + y / sigma;
  return prox_moreau_l1(eta, cfg.eps_smooth, sigma, inst.n());
}

/// Indefinite-proximal ADMM on the Moreau-smoothed surrogate.
///
/// Without a start the iterate begins at x⁰ = init_x0, z⁰ = Ax⁰ − b, y⁰ = 0,
/// and ρ is replaced by choose_rho(x⁰).
inline ADMMReport admm_solve(const ProblemInstance& inst, const PenaltyParams& params_in, const ADMMConfig& cfg,
                             const std::optional<ADMMState>& start = std::nullopt,
                             const PMMConfig& x0_cfg = PMMConfig{}) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  PenaltyParams pp = params_in;
  ADMMState s;
  if (start) {
    if (start->x.size() != inst.p() || start->z.size() != inst.n() || start->y.size() != inst.n()) {
      throw DimensionError("ADMM start has wrong dimensions");
    }
    s = *start;
  } else {
    s.x = init_x0(inst, params_in.lambda(), x0_cfg);
    pp = params_in.with_rho(choose_rho(s.x, inst.n(), inst.p()));
    s.z = residual(inst, s.x);
    s.y = Vector::Zero(inst.n());
  }

  const double sigma = cfg.sigma_value();
  const double gamma = admm_gamma(inst, pp, sigma);
  const double c = inst.mu() + gamma;
  if (!(c > pp.concavity())) {
    throw std::invalid_argument("x-update is not strongly convex: sigma*||A||^2/2 must be positive");
  }
  const double eps = cfg.eps_smooth;
  const double cz = 0.5 * sigma - 4.0 / (sigma * eps * eps);
  const double cx = (pp.lambda() * (pp.a() + 1.0) * pp.rho() - 2.0 * (pp.a() - 1.0) * inst.mu()) / (4.0 * (pp.a() - 1.0));
  const double scale = 1.0 + inst.norm_b();
  const Matrix& A = inst.A();
  const Vector& b = inst.b();

  ADMMReport rep;
  rep.sigma = sigma;
  rep.gamma = gamma;
  rep.eps_smooth = eps;
  rep.rho = pp.rho();
  rep.lambda = pp.lambda();

  Vector Ax = A * s.x;
  Vector r = Ax - s.z - b;  // Ax − z − b at the current iterate
  double L = moreau_l1(s.z, eps, inst.n()) + 0.5 * inst.mu() * s.x.squaredNorm() + surrogate_penalty_sum(s.x, pp) +
             s.y.dot(r) + 0.5 * sigma * r.squaredNorm();
  rep.objective_trace.push_back(L);
  rep.nz_trace.push_back(nnz_approx(s.x));
  if (x0_cfg.keep_history) rep.history.push_back(s.x);

  int k = 0;
  while (true) {
    if (k >= cfg.k_max) {
      rep.termination = Termination::max_iters;
      break;
    }
    const Vector At = A.transpose() * (r + s.y / sigma);
    Vector x_new(inst.p());
    for (Eigen::Index i = 0; i < inst.p(); ++i) x_new[i] = prox_vartheta((gamma * s.x[i] - sigma * At[i]) / c, pp, c);

    Vector Ax_new = A * x_new;
    const Vector eta = Ax_new - b + s.y / sigma;
    Vector z_new = prox_moreau_l1(eta, eps, sigma, inst.n());
    Vector r_new = Ax_new - z_new - b;
    Vector y_new = s.y + sigma * r_new;

    const Vector dy = y_new - s.y;
    const double pinf = dy.norm() / (sigma * scale);
    const Vector dual_vec = A.transpose() * (dy - sigma * r) - gamma * (x_new - s.x);
    const double dinf = dual_vec.norm() / scale;

    const double L_new = moreau_l1(z_new, eps, inst.n()) + 0.5 * inst.mu() * x_new.squaredNorm() +
                         surrogate_penalty_sum(x_new, pp) + y_new.dot(r_new) + 0.5 * sigma * r_new.squaredNorm();
    rep.descent_gaps.push_back(L - L_new - (cz * (z_new - s.z).squaredNorm() + cx * (x_new - s.x).squaredNorm()));

    s.x = std::move(x_new);
    s.z = std::move(z_new);
    s.y = std::move(y_new);
    Ax = std::move(Ax_new);
    r = std::move(r_new);
    L = L_new;
    ++k;

    rep.objective_trace.push_back(L);
    rep.nz_trace.push_back(nnz_approx(s.x));
    rep.pinf_trace.push_back(pinf);
    rep.dinf_trace.push_back(dinf);
    rep.err_trace.push_back(std::max(pinf, dinf));
    if (x0_cfg.keep_history) rep.history.push_back(s.x);

    if (std::max(pinf, dinf) <= cfg.eps_admm) {
      rep.termination = Termination::residual_tol;
      break;
    }
  }

  rep.iterations = k;
  rep.x_out = s.x;
  rep.final_state = std::move(s);
  rep.local_opt_flag = check_local_opt_condition(rep.x_out, pp).holds;
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace sparseplq
