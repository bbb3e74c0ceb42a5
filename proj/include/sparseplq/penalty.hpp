#pragma once

#include "sparseplq/problem.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sparseplq {

/// Constants of the DC surrogate: shape a of φ, λ, ρ, and ν = λ/ρ.
class PenaltyParams {
 public:
  PenaltyParams(double a, double lambda, double rho) : a_(a), lambda_(lambda), rho_(rho) {
    if (!(a > 1.0) || !std::isfinite(a)) throw std::invalid_argument("penalty shape a must exceed 1");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be positive");
    if (!(rho >= 1.0) || !std::isfinite(rho)) throw std::invalid_argument("rho must be at least 1");
    nu_ = lambda / rho;
  }

  double a() const noexcept { return a_; }
  double lambda() const noexcept { return lambda_; }
  double rho() const noexcept { return rho_; }
  double nu() const noexcept { return nu_; }

  /// |t| ≤ t_lo: weight 0, penalty λ|t|.
  double t_lo() const noexcept { return 2.0 / (rho_ * (a_ + 1.0)); }
  /// |t| ≥ t_hi: weight 1, penalty ν.
  double t_hi() const noexcept { return 2.0 * a_ / (rho_ * (a_ + 1.0)); }

  /// Concavity modulus of the penalty in the middle band, λ(a+1)ρ/(2(a−1)).
  double concavity() const noexcept { return lambda_ * (a_ + 1.0) * rho_ / (2.0 * (a_ - 1.0)); }

  PenaltyParams with_rho(double rho) const { return PenaltyParams(a_, lambda_, rho); }

 private:
  double a_;
  double lambda_;
  double rho_;
  double nu_ = 0.0;
};

inline double sign(double t) noexcept { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); }

// ---------------------------------------------------------------------------
// Scalar pieces
// ---------------------------------------------------------------------------

inline double phi(double t, double a) noexcept { return ((a - 1.0) * t * t + 2.0 * t) / (a + 1.0); }

/// Conjugate-type function ψ* of φ, convex and C¹ on ℝ.
inline double psi_star(double s, double a) noexcept {
  if (s <= 2.0 / (a + 1.0)) return 0.0;
  if (s <= 2.0 * a / (a + 1.0)) {
    const double r = (a + 1.0) * s - 2.0;
    return r * r / (4.0 * (a * a - 1.0));
  }
  return s - 1.0;
}

inline double psi_star_prime(double s, double a) noexcept {
  return std::min(1.0, std::max(0.0, ((a + 1.0) * s - 2.0) / (2.0 * (a - 1.0))));
}

/// Weight vector (ψ*)'(ρ|x_i|) of the MM majorizer.
inline Vector w_rho(const Vector& x, const PenaltyParams& pp) {
  Vector w(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) w[i] = psi_star_prime(pp.rho() * std::abs(x[i]), pp.a());
  return w;
}

namespace detail {

// Branch-wise slope of t ↦ ρ⁻¹ψ*(ρ|t|) on t ≥ 0 (Eq. (A.1) divided by ρ).
// The branch is chosen from the same numerator (a+1)ρ|t| − 2 that Eq. (3.7)
// clamps, so the result is bitwise identical to (ψ*)'(ρ|t|).
inline double surrogate_slope(double abs_t, const PenaltyParams& pp) noexcept {
  const double a = pp.a();
  const double num = (a + 1.0) * (pp.rho() * abs_t) - 2.0;
  const double den = 2.0 * (a - 1.0);
  if (num <= 0.0) return 0.0;
  if (num >= den) return 1.0;
  return num / den;
}

}  // namespace detail

/// Derivative of φ_ρ(t) = ψ*(ρ|t|).
inline double varphi_rho_prime(double t, const PenaltyParams& pp) noexcept {
  return pp.rho() * detail::surrogate_slope(std::abs(t), pp) * sign(t);
}

/// g_ρ(x) = ρ⁻¹ Σ ψ*(ρ|x_i|)
inline double g_rho(const Vector& x, const PenaltyParams& pp) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += psi_star(pp.rho() * std::abs(x[i]), pp.a());
  return s / pp.rho();
}

/// ∇g_ρ(x), evaluated coordinatewise from the derivative of φ_ρ.
inline Vector grad_g_rho(const Vector& x, const PenaltyParams& pp) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) g[i] = detail::surrogate_slope(std::abs(x[i]), pp) * sign(x[i]);
  return g;
}

/// Per-coordinate penalty λ|t| − λρ⁻¹ψ*(ρ|t|), valued in [0, ν].
inline double surrogate_penalty(double t, const PenaltyParams& pp) noexcept {
  const double at = std::abs(t);
  if (at >= pp.t_hi()) return pp.nu();
  if (at <= pp.t_lo()) return pp.lambda() * at;
  const double a = pp.a();
  const double d = (a + 1.0) * pp.rho() * at - 2.0 * a;
  return pp.nu() * (1.0 - d * d / (4.0 * (a * a - 1.0)));
}

inline double surrogate_penalty_sum(const Vector& x, const PenaltyParams& pp) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += surrogate_penalty(x[i], pp);
  return s;
}

/// F_μ(x) = f(Ax − b) + (μ/2)‖x‖²
inline double loss_ridge(const Vector& x, const ProblemInstance& inst) {
  return l1_loss(residual(inst, x)) + 0.5 * inst.mu() * x.squaredNorm();
}

/// Surrogate objective Θ_{λ,ρ}.
inline double theta_objective(const Vector& x, const ProblemInstance& inst, const PenaltyParams& pp) {
  return loss_ridge(x, inst) + surrogate_penalty_sum(x, pp);
}

inline Eigen::Index count_nonzero(const Vector& x) {
  Eigen::Index c = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) c += (x[i] != 0.0);
  return c;
}

/// F_μ(x) + ν‖x‖₀
inline double zero_norm_objective(const Vector& x, const ProblemInstance& inst, double nu) {
  return loss_ridge(x, inst) + nu * static_cast<double>(count_nonzero(x));
}

// ---------------------------------------------------------------------------
// Proximal maps
// ---------------------------------------------------------------------------

/// Prox of h(x) = ‖ω∘x‖₁ + (μ/2)‖x‖² with step 1/γ.
inline Vector prox_weighted_l1_ridge(const Vector& z, const Vector& omega, double mu, double gamma) {
  const double scale = gamma / (gamma + mu);
  Vector out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    out[i] = scale * sign(z[i]) * std::max(std::abs(z[i]) - omega[i] / gamma, 0.0);
  }
  return out;
}

/// Prox of the averaged ℓ1 loss (1/n)‖·‖₁ with step 1/γ₂: soft threshold at 1/(nγ₂).
inline Vector prox_l1_scaled(const Vector& v, Eigen::Index n, double gamma2) {
  const double thr = 1.0 / (static_cast<double>(n) * gamma2);
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = sign(v[i]) * std::max(std::abs(v[i]) - thr, 0.0);
  return out;
}

/// Scalar Huber piece e_ε(n⁻¹|·|)(t).
inline double moreau_l1_scalar(double t, double eps, Eigen::Index n) noexcept {
  const double nd = static_cast<double>(n);
  const double at = std::abs(t);
  if (at > eps / nd) return at / nd - eps / (2.0 * nd * nd);
  return t * t / (2.0 * eps);
}

/// Moreau envelope e_ε f of the averaged ℓ1 loss.
inline double moreau_l1(const Vector& z, double eps, Eigen::Index n) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) s += moreau_l1_scalar(z[i], eps, n);
  return s;
}

/// ∇e_ε f(z): sign(z_i)/n beyond ε/n, z_i/ε inside.
inline Vector moreau_l1_grad(const Vector& z, double eps, Eigen::Index n) {
  const double nd = static_cast<double>(n);
  Vector g(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) g[i] = std::abs(z[i]) > eps / nd ? sign(z[i]) / nd : z[i] / eps;
  return g;
}

/// Prox of e_ε f with step 1/σ.
inline Vector prox_moreau_l1(const Vector& eta, double eps, double sigma, Eigen::Index n) {
  const double nd = static_cast<double>(n);
  const double thr = (1.0 + sigma * eps) / (nd * sigma);
  const double shrink = sigma * eps / (1.0 + sigma * eps);
  Vector out(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double e = eta[i];
    out[i] = std::abs(e) > thr ? e - sign(e) / (nd * sigma) : shrink * e;
  }
  return out;
}

/// Global minimizer of surrogate_penalty(t) + (c/2)(t − s)².
///
/// Requires c > pp.concavity(); the caller validates that once. Stationary
/// points of the three branches are clipped into their branch and compared
/// with t = 0 and both breakpoints; ties go to the smaller magnitude.
inline double prox_vartheta(double s, const PenaltyParams& pp, double c) noexcept {
  const double r = std::abs(s);
  const double lo = pp.t_lo();
  const double hi = pp.t_hi();
  const double a = pp.a();
  const double lam = pp.lambda();

  const double in_lo = std::clamp(r - lam / c, 0.0, lo);
  const double mid_den = c - pp.concavity();
  const double in_mid = std::clamp((c * r - lam * a / (a - 1.0)) / mid_den, lo, hi);
  const double in_hi = std::max(r, hi);

  const std::array<double, 6> cands{0.0, lo, in_lo, in_mid, hi, in_hi};
  double best_t = 0.0;
  double best_v = std::numeric_limits<double>::infinity();
  for (double t : cands) {
    const double v = surrogate_penalty(t, pp) + 0.5 * c * (t - r) * (t - r);
    if (v < best_v || (v == best_v && t < best_t)) {
      best_v = v;
      best_t = t;
    }
  }
  return sign(s) * best_t;
}

/// Sufficient condition for a local minimum: every nonzero entry exceeds
/// 2a/(ρ(a+1)) in magnitude.
struct LocalOptCheck {
  bool holds = true;
  double min_nonzero = std::numeric_limits<double>::infinity();
  double threshold = 0.0;
};

inline LocalOptCheck check_local_opt_condition(const Vector& x, const PenaltyParams& pp) {
  LocalOptCheck out;
  out.threshold = pp.t_hi();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) out.min_nonzero = std::min(out.min_nonzero, std::abs(x[i]));
  }
  out.holds = !(out.min_nonzero <= out.threshold);
  return out;
}

}  // namespace sparseplq
