#pragma once

#include "sparseplq/problem.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sparseplq {

/// Seeded generator used for all synthetic data.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard distributions are implementation-defined, so the
/// transforms below are written out: uniforms take the top 53 bits, normals
/// use Box–Muller, integers use rejection sampling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Derived stream for a sub-task; splitmix64 of (seed, tag).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on (0, 1), never 0 or 1.
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound).
  std::uint64_t index(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::index with empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v = 0;
    do {
      v = engine_();
    } while (v >= limit);
    return v % bound;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(th);
    has_spare_ = true;
    return r * std::cos(th);
  }

  double laplace() {
    const double u = uniform() - 0.5;
    return u < 0.0 ? std::log(1.0 + 2.0 * u) : -std::log(1.0 - 2.0 * u);
  }

  double cauchy() { return std::tan(std::numbers::pi * (uniform() - 0.5)); }

  /// Student t with integer degrees of freedom: N / sqrt(χ²_dof / dof).
  double student_t(int dof) {
    const double num = normal();
    double chi2 = 0.0;
    for (int i = 0; i < dof; ++i) {
      const double g = normal();
      chi2 += g * g;
    }
    return num / std::sqrt(chi2 / dof);
  }

  /// k distinct indices from [0, n), sorted (partial Fisher–Yates).
  std::vector<Eigen::Index> sample_without_replacement(Eigen::Index n, Eigen::Index k) {
    if (k > n || k < 0) throw std::invalid_argument("cannot draw more indices than available");
    std::vector<Eigen::Index> pool(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (Eigen::Index i = 0; i < k; ++i) {
      const auto j = i + static_cast<Eigen::Index>(index(static_cast<std::uint64_t>(n - i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(k));
    std::sort(pool.begin(), pool.end());
    return pool;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// ---------------------------------------------------------------------------
// Specification of a synthetic problem
// ---------------------------------------------------------------------------

struct CovAR {
  double r = 0.8;  // Σ_ij = r^|i−j|
};
struct CovCS {
  double alpha = 0.6;  // Σ_ij = α + (1−α)𝕀{i=j}
};
using Covariance = std::variant<CovAR, CovCS>;

struct SignalFixed16 {};
struct SignalGaussian {
  Eigen::Index s_star = 5;
  double variance = 4.0;
};
using Signal = std::variant<SignalFixed16, SignalGaussian>;

enum class NoiseKind { gaussian, scaled_t, mixture_normal, laplace, cauchy, cauchy_scaled_to_signal };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::gaussian;
  double variance = 2.0;  // gaussian
  double scale = std::sqrt(2.0);  // scaled_t
  int dof = 4;            // scaled_t
};

struct SyntheticSpec {
  Eigen::Index n = 200;
  Eigen::Index p = 1000;
  Covariance cov = CovAR{0.8};
  Signal signal = SignalFixed16{};
  NoiseSpec noise{};
  Eigen::Index corrupt_count = 20;
  std::uint64_t seed = 1;
  double mu = 1e-8;
  /// Redraw the noise until ‖ϖ‖∞ is below this bound (heavy-tailed cells).
  std::optional<double> max_noise_inf;

  void validate() const {
    if (n < 1 || p < 1) throw std::invalid_argument("n and p must be positive");
    if (corrupt_count < 0 || corrupt_count > n) throw std::invalid_argument("corrupt_count must lie in [0, n]");
    if (std::holds_alternative<SignalFixed16>(signal) && p < 16) throw std::invalid_argument("fixed16 signal needs p >= 16");
    if (const auto* g = std::get_if<SignalGaussian>(&signal)) {
      if (g->s_star < 0 || g->s_star > p) throw std::invalid_argument("s_star must lie in [0, p]");
    }
    if (const auto* c = std::get_if<CovAR>(&cov); c && !(c->r > 0.0 && c->r < 1.0)) {
      throw std::invalid_argument("AR parameter must lie in (0,1)");
    }
    if (const auto* c = std::get_if<CovCS>(&cov); c && !(c->alpha > 0.0 && c->alpha < 1.0)) {
      throw std::invalid_argument("CS parameter must lie in (0,1)");
    }
  }
};

// ---------------------------------------------------------------------------
// Covariance factors
// ---------------------------------------------------------------------------

/// Lower-triangular Cholesky factor L of an AR or CS covariance, applied in
/// O(p) from its closed-form structure.
///
/// AR(r): L_i1 = r^{i−1}, L_ij = r^{i−j}√(1−r²) for j > 1, so y = Lg obeys
/// y_1 = g_1, y_i = r y_{i−1} + √(1−r²) g_i.
/// CS(α): column j is constant below the diagonal, L_ij = c_j (i > j),
/// L_jj = d_j, with S_j = Σ_{k<j} c_k², d_j = √(1 − S_j), c_j = (α − S_j)/d_j.
class CovarianceFactor {
 public:
  CovarianceFactor(const Covariance& cov, Eigen::Index p) : cov_(cov), p_(p) {
    if (p < 1) throw std::invalid_argument("covariance dimension must be positive");
    if (const auto* cs = std::get_if<CovCS>(&cov_)) {
      diag_.resize(p);
      below_.resize(p);
      double S = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) {
        const double d2 = 1.0 - S;
        if (!(d2 > 0.0)) throw std::runtime_error("compound-symmetric covariance is not positive definite");
        diag_[j] = std::sqrt(d2);
        below_[j] = (cs->alpha - S) / diag_[j];
        S += below_[j] * below_[j];
      }
    } else if (const auto* ar = std::get_if<CovAR>(&cov_)) {
      if (!(ar->r > -1.0 && ar->r < 1.0)) throw std::runtime_error("AR covariance is not positive definite");
    }
  }

  Eigen::Index dim() const noexcept { return p_; }

  /// y = L g
  void apply(const double* g, double* y) const {
    if (const auto* ar = std::get_if<CovAR>(&cov_)) {
      const double s = std::sqrt(1.0 - ar->r * ar->r);
      y[0] = g[0];
      for (Eigen::Index i = 1; i < p_; ++i) y[i] = ar->r * y[i - 1] + s * g[i];
    } else {
      double prefix = 0.0;
      for (Eigen::Index i = 0; i < p_; ++i) {
        y[i] = prefix + diag_[i] * g[i];
        prefix += below_[i] * g[i];
      }
    }
  }

  Matrix dense() const {
    Matrix L = Matrix::Zero(p_, p_);
    if (const auto* ar = std::get_if<CovAR>(&cov_)) {
      const double s = std::sqrt(1.0 - ar->r * ar->r);
      for (Eigen::Index i = 0; i < p_; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) L(i, j) = std::pow(ar->r, static_cast<double>(i - j)) * (j == 0 ? 1.0 : s);
      }
    } else {
      for (Eigen::Index j = 0; j < p_; ++j) {
        L(j, j) = diag_[j];
        for (Eigen::Index i = j + 1; i < p_; ++i) L(i, j) = below_[j];
      }
    }
    return L;
  }

 private:
  Covariance cov_;
  Eigen::Index p_;
  Vector diag_;
  Vector below_;
};

inline CovarianceFactor gen_covariance(const Covariance& cov, Eigen::Index p) { return CovarianceFactor(cov, p); }

/// Σ itself, for checks.
inline Matrix covariance_matrix(const Covariance& cov, Eigen::Index p) {
  Matrix S(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (const auto* ar = std::get_if<CovAR>(&cov)) {
        S(i, j) = std::pow(ar->r, static_cast<double>(std::abs(i - j)));
      } else {
        S(i, j) = i == j ? 1.0 : std::get<CovCS>(cov).alpha;
      }
    }
  }
  return S;
}

// ---------------------------------------------------------------------------
// Signal and noise
// ---------------------------------------------------------------------------

inline Vector gen_true_x(const Signal& signal, Eigen::Index p, std::uint64_t seed) {
  Vector x = Vector::Zero(p);
  if (std::holds_alternative<SignalFixed16>(signal)) {
    if (p < 16) throw std::invalid_argument("fixed16 signal needs p >= 16");
    static constexpr std::array<double, 16> prefix{2.0, 0.0, 1.5, 0.0, 0.8, 0.0, 0.0, 1.0,
                                                   0.0, 1.75, 0.0, 0.0, 0.75, 0.0, 0.0, 0.3};
    for (Eigen::Index i = 0; i < 16; ++i) x[i] = prefix[static_cast<std::size_t>(i)];
    return x;
  }
  const auto& g = std::get<SignalGaussian>(signal);
  Rng rng(seed);
  const auto support = rng.sample_without_replacement(p, g.s_star);
  const double sd = std::sqrt(g.variance);
  for (Eigen::Index i : support) {
    double v = 0.0;
    while (v == 0.0) v = sd * rng.normal();
    x[i] = v;
  }
  return x;
}

struct NoiseDraw {
  Vector noise;
  std::vector<Eigen::Index> corrupt_set;
};

/// Sparse noise: a uniformly chosen set of corrupt_count entries filled from
/// the requested distribution, zeros elsewhere.
inline NoiseDraw sample_noise(const NoiseSpec& spec, Eigen::Index corrupt_count, Eigen::Index n, const Vector& Ax_true,
                              std::uint64_t seed) {
  if (corrupt_count < 0 || corrupt_count > n) throw std::invalid_argument("corrupt_count must lie in [0, n]");
  Rng rng(seed);
  NoiseDraw out;
  out.noise = Vector::Zero(n);
  out.corrupt_set = rng.sample_without_replacement(n, corrupt_count);
  for (Eigen::Index i : out.corrupt_set) {
    double v = 0.0;
    switch (spec.kind) {
      case NoiseKind::gaussian: v = std::sqrt(spec.variance) * rng.normal(); break;
      case NoiseKind::scaled_t: v = spec.scale * rng.student_t(spec.dof); break;
      case NoiseKind::mixture_normal: {
        const double sd = rng.uniform(1.0, 5.0);
        v = sd * rng.normal();
        break;
      }
      case NoiseKind::laplace: v = rng.laplace(); break;
      case NoiseKind::cauchy:
      case NoiseKind::cauchy_scaled_to_signal: v = rng.cauchy(); break;
    }
    out.noise[i] = v;
  }
  if (spec.kind == NoiseKind::cauchy_scaled_to_signal && corrupt_count > 0) {
    const double xi = out.noise.norm();
    if (xi > 0.0) out.noise *= Ax_true.norm() / (3.0 * xi);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

struct SyntheticInstance {
  ProblemInstance inst;
  Vector x_true;
  std::vector<Eigen::Index> support;
  Vector noise;
  std::vector<Eigen::Index> corrupt_set;
};

inline std::vector<Eigen::Index> support_of(const Vector& x) {
  std::vector<Eigen::Index> s;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) s.push_back(i);
  }
  return s;
}

namespace detail {
enum StreamTag : std::uint64_t { kStreamDesign = 1, kStreamSignal = 2, kStreamNoise = 3 };
}

/// Observation model b = A x* + ϖ with rows of A drawn as L g, g ~ N(0, I).
inline SyntheticInstance make_instance(const SyntheticSpec& spec) {
  spec.validate();
  const CovarianceFactor L = gen_covariance(spec.cov, spec.p);
  Matrix A(spec.n, spec.p);
  {
    Rng rng(Rng::derive(spec.seed, detail::kStreamDesign));
    std::vector<double> g(static_cast<std::size_t>(spec.p));
    for (Eigen::Index i = 0; i < spec.n; ++i) {
      for (auto& v : g) v = rng.normal();
      L.apply(g.data(), A.row(i).data());
    }
  }
  Vector x_true = gen_true_x(spec.signal, spec.p, Rng::derive(spec.seed, detail::kStreamSignal));
  const Vector Ax = A * x_true;

  NoiseDraw nd;
  for (std::uint64_t attempt = 0;; ++attempt) {
    nd = sample_noise(spec.noise, spec.corrupt_count, spec.n, Ax, Rng::derive(spec.seed, detail::kStreamNoise + 16 * attempt));
    if (!spec.max_noise_inf || nd.noise.size() == 0 || nd.noise.cwiseAbs().maxCoeff() < *spec.max_noise_inf) break;
    if (attempt >= 10000) throw std::runtime_error("could not draw noise below the requested sup-norm bound");
  }
  Vector b = Ax + nd.noise;
  auto support = support_of(x_true);
  return SyntheticInstance{ProblemInstance(std::move(A), std::move(b), spec.mu), std::move(x_true), std::move(support),
                           std::move(nd.noise), std::move(nd.corrupt_set)};
}

/// Table-1 sizing: s* = ⌊√p/2⌋ and n = ⌊2 s* ln p⌋.
struct Table1Sizes {
  Eigen::Index s_star;
  Eigen::Index n;
};
inline Table1Sizes table1_sizes(Eigen::Index p) {
  const auto s = static_cast<Eigen::Index>(std::floor(std::sqrt(static_cast<double>(p)) / 2.0));
  const auto n = static_cast<Eigen::Index>(std::floor(2.0 * static_cast<double>(s) * std::log(static_cast<double>(p))));
  return {s, n};
}

/// Sampled upper bound on the restricted-eigenvalue constant over the cone
/// {‖x_{S^c}‖₁ ≤ 3‖x_S‖₁}, S ⊇ S*, |S| ≤ 1.5 s*. Diagnostic only.
inline double re_condition_estimate(const ProblemInstance& inst, const std::vector<Eigen::Index>& support, int samples,
                                    std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("samples must be positive");
  const Eigen::Index p = inst.p();
  const auto s_star = static_cast<Eigen::Index>(support.size());
  const Eigen::Index s_max = std::max<Eigen::Index>(std::max<Eigen::Index>(1, s_star), (3 * s_star) / 2);
  Rng rng(seed);
  double best = std::numeric_limits<double>::infinity();
  std::vector<char> in_support(static_cast<std::size_t>(p), 0);
  for (int t = 0; t < samples; ++t) {
    std::fill(in_support.begin(), in_support.end(), 0);
    for (Eigen::Index i : support) in_support[static_cast<std::size_t>(i)] = 1;
    Eigen::Index size = s_star;
    const Eigen::Index extra = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(s_max - s_star + 1)));
    while (size < s_star + extra && size < p) {
      const auto j = static_cast<std::size_t>(rng.index(static_cast<std::uint64_t>(p)));
      if (!in_support[j]) {
        in_support[j] = 1;
        ++size;
      }
    }
    Vector x = Vector::Zero(p);
    double l1_in = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (in_support[static_cast<std::size_t>(j)]) {
        x[j] = rng.normal();
        l1_in += std::abs(x[j]);
      }
    }
    if (l1_in == 0.0) continue;
    // Off-support mass on a random subset, scaled into the cone.
    double l1_out = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!in_support[static_cast<std::size_t>(j)] && rng.uniform() < 0.2) {
        x[j] = rng.normal();
        l1_out += std::abs(x[j]);
      }
    }
    if (l1_out > 0.0) {
      const double target = 3.0 * l1_in * rng.uniform();
      for (Eigen::Index j = 0; j < p; ++j) {
        if (!in_support[static_cast<std::size_t>(j)]) x[j] *= target / l1_out;
      }
    }
    const double ratio = (inst.A() * x).squaredNorm() / (2.0 * static_cast<double>(inst.n()) * x.squaredNorm());
    best = std::min(best, ratio);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------
//
// Binary layout, all little-endian:
//   magic "SPLQINST" (8 bytes) | version u32 = 1 | n u64 | p u64 | mu f64
//   A (n·p f64, row-major) | b (n f64) | x_true (p f64) | noise (n f64)
//   |I| u64 | I (|I| u64, sorted)
//
// Text variant (small cases): first line "sparseplq-instance 1", then
// "n p mu", then n rows of A, then lines "b ...", "x_true ...", "noise ...",
// "corrupt k i1 i2 ...", numbers printed with 17 significant digits.

inline constexpr char kInstanceMagic[8] = {'S', 'P', 'L', 'Q', 'I', 'N', 'S', 'T'};
inline constexpr std::uint32_t kInstanceVersion = 1;

namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}
inline void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 4);
}
inline void put_f64(std::ostream& out, double d) {
  std::uint64_t v = 0;
  std::memcpy(&v, &d, sizeof v);
  put_u64(out, v);
}
inline std::uint64_t get_u64(std::istream& in) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), 8)) throw std::runtime_error("truncated instance file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}
inline std::uint32_t get_u32(std::istream& in) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4)) throw std::runtime_error("truncated instance file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  return v;
}
inline double get_f64(std::istream& in) {
  const std::uint64_t v = get_u64(in);
  double d = 0.0;
  std::memcpy(&d, &v, sizeof d);
  return d;
}

}  // namespace detail

inline void write_instance_binary(std::ostream& out, const SyntheticInstance& s) {
  const auto& inst = s.inst;
  out.write(kInstanceMagic, 8);
  detail::put_u32(out, kInstanceVersion);
  detail::put_u64(out, static_cast<std::uint64_t>(inst.n()));
  detail::put_u64(out, static_cast<std::uint64_t>(inst.p()));
  detail::put_f64(out, inst.mu());
  for (Eigen::Index i = 0; i < inst.n(); ++i) {
    for (Eigen::Index j = 0; j < inst.p(); ++j) detail::put_f64(out, inst.A()(i, j));
  }
  for (Eigen::Index i = 0; i < inst.n(); ++i) detail::put_f64(out, inst.b()[i]);
  for (Eigen::Index j = 0; j < inst.p(); ++j) detail::put_f64(out, s.x_true[j]);
  for (Eigen::Index i = 0; i < inst.n(); ++i) detail::put_f64(out, s.noise[i]);
  detail::put_u64(out, s.corrupt_set.size());
  for (Eigen::Index i : s.corrupt_set) detail::put_u64(out, static_cast<std::uint64_t>(i));
}

inline SyntheticInstance read_instance_binary(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kInstanceMagic, 8) != 0) throw std::runtime_error("not a sparseplq instance file");
  const std::uint32_t version = detail::get_u32(in);
  if (version != kInstanceVersion) throw std::runtime_error("unsupported instance version " + std::to_string(version));
  const auto n = static_cast<Eigen::Index>(detail::get_u64(in));
  const auto p = static_cast<Eigen::Index>(detail::get_u64(in));
  if (n < 1 || p < 1 || n > (1LL << 32) || p > (1LL << 32)) throw std::runtime_error("bad instance dimensions");
  const double mu = detail::get_f64(in);
  Matrix A(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) A(i, j) = detail::get_f64(in);
  }
  Vector b(n), x(p), noise(n);
  for (Eigen::Index i = 0; i < n; ++i) b[i] = detail::get_f64(in);
  for (Eigen::Index j = 0; j < p; ++j) x[j] = detail::get_f64(in);
  for (Eigen::Index i = 0; i < n; ++i) noise[i] = detail::get_f64(in);
  const std::uint64_t k = detail::get_u64(in);
  if (k > static_cast<std::uint64_t>(n)) throw std::runtime_error("corrupt set larger than n");
  std::vector<Eigen::Index> corrupt(static_cast<std::size_t>(k));
  for (auto& i : corrupt) i = static_cast<Eigen::Index>(detail::get_u64(in));
  auto support = support_of(x);
  return SyntheticInstance{ProblemInstance(std::move(A), std::move(b), mu), std::move(x), std::move(support),
                           std::move(noise), std::move(corrupt)};
}

inline void write_instance_text(std::ostream& out, const SyntheticInstance& s) {
  const auto& inst = s.inst;
  out << "sparseplq-instance 1\n" << std::setprecision(17);
  out << inst.n() << ' ' << inst.p() << ' ' << inst.mu() << '\n';
  for (Eigen::Index i = 0; i < inst.n(); ++i) {
    for (Eigen::Index j = 0; j < inst.p(); ++j) out << (j ? " " : "") << inst.A()(i, j);
    out << '\n';
  }
  auto line = [&out](const char* tag, const Vector& v) {
    out << tag;
    for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << v[i];
    out << '\n';
  };
  line("b", inst.b());
  line("x_true", s.x_true);
  line("noise", s.noise);
  out << "corrupt " << s.corrupt_set.size();
  for (Eigen::Index i : s.corrupt_set) out << ' ' << i;
  out << '\n';
}

inline SyntheticInstance read_instance_text(std::istream& in) {
  std::string tag;
  int version = 0;
  if (!(in >> tag >> version) || tag != "sparseplq-instance" || version != 1) {
    throw std::runtime_error("not a sparseplq text instance");
  }
  Eigen::Index n = 0, p = 0;
  double mu = 0.0;
  if (!(in >> n >> p >> mu) || n < 1 || p < 1) throw std::runtime_error("bad text instance header");
  Matrix A(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (!(in >> A(i, j))) throw std::runtime_error("truncated text instance");
    }
  }
  auto read_vec = [&in](const char* expect, Eigen::Index len) {
    std::string t;
    if (!(in >> t) || t != expect) throw std::runtime_error(std::string("expected '") + expect + "'");
    Vector v(len);
    for (Eigen::Index i = 0; i < len; ++i) {
      if (!(in >> v[i])) throw std::runtime_error("truncated text instance");
    }
    return v;
  };
  Vector b = read_vec("b", n);
  Vector x = read_vec("x_true", p);
  Vector noise = read_vec("noise", n);
  std::size_t k = 0;
  if (!(in >> tag >> k) || tag != "corrupt" || k > static_cast<std::size_t>(n)) throw std::runtime_error("bad corrupt line");
  std::vector<Eigen::Index> corrupt(k);
  for (auto& i : corrupt) {
    if (!(in >> i)) throw std::runtime_error("truncated corrupt line");
  }
  auto support = support_of(x);
  return SyntheticInstance{ProblemInstance(std::move(A), std::move(b), mu), std::move(x), std::move(support),
                           std::move(noise), std::move(corrupt)};
}

inline void save_instance(const std::string& path, const SyntheticInstance& s, bool text = false) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (text) {
    write_instance_text(out, s);
  } else {
    write_instance_binary(out, s);
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

/// Reads either container variant, detected from the first bytes.
inline SyntheticInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char head[8] = {};
  in.read(head, 8);
  in.clear();
  in.seekg(0);
  if (std::memcmp(head, kInstanceMagic, 8) == 0) return read_instance_binary(in);
  return read_instance_text(in);
}

}  // namespace sparseplq
