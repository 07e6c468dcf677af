#pragma once

/// \file limit_bounds.hpp
/// Explicit bounds on |E h(g(W)) - E h(g(Z))| for W a vector of standardized sums of
/// independent summands whose first p moments match the standard normal.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "stein/errors.hpp"
#include "stein/special_functions.hpp"
#include "stein/types.hpp"

namespace stein {

/// E[Z^k] for Z ~ N(0, 1): 0 for odd k, (k-1)!! for even k.
inline double normal_signed_moment(int k) {
  if (k < 0) throw DomainError("normal_signed_moment: k must be >= 0");
  if (k % 2 == 1) return 0.0;
  double v = 1.0;
  for (int j = k - 1; j > 1; j -= 2) v *= j;
  return v;
}

/// Moments of one summand law. abs_moment(s) = E|X|^s (may be +inf), signed_moment(k) = E[X^k].
struct MomentOracle {
  using AbsFn = std::function<double(double)>;
  using SignedFn = std::function<double(int)>;
  using Sampler = std::function<double(std::mt19937_64&)>;

  std::string family;
  int matching_order = 2;
  AbsFn abs_moment;
  SignedFn signed_moment;
  Sampler sampler;  // empty when the family cannot be simulated

  bool has_sampler() const noexcept { return static_cast<bool>(sampler); }

  /// E|X|^s, rejecting infinite values with a message naming the order.
  double finite_abs_moment(double s, const std::string& clause) const {
    const double v = abs_moment(s);
    if (!std::isfinite(v)) {
      throw PreconditionError(clause + ": E|X|^" + format_order(s) + " is not finite for the " + family + " law");
    }
    return v;
  }

  /// Throws PreconditionError naming the first violated invariant.
  void validate() const {
    if (!abs_moment || !signed_moment) throw PreconditionError("MomentOracle: moment functions missing");
    if (matching_order < 2) throw PreconditionError("MomentOracle: matching order must be >= 2");
    constexpr double tol = 1e-12;
    if (std::fabs(signed_moment(1)) > tol) throw PreconditionError("MomentOracle: E[X] != 0 (standardization)");
    if (std::fabs(signed_moment(2) - 1.0) > tol) throw PreconditionError("MomentOracle: E[X^2] != 1 (standardization)");
    if (std::fabs(abs_moment(2.0) - 1.0) > tol) throw PreconditionError("MomentOracle: E|X|^2 != 1 (standardization)");
    for (int k = 3; k <= matching_order; ++k) {
      const double z = normal_signed_moment(k);
      if (std::fabs(signed_moment(k) - z) > 1e-10 * std::max(1.0, z)) {
        throw PreconditionError("MomentOracle: E[X^" + std::to_string(k) + "] does not match the normal moment");
      }
    }
    double previous = 1.0;
    for (double s = 2.0; s <= 10.0; s += 0.5) {
      const double v = abs_moment(s);
      if (!std::isfinite(v)) break;
      if (v < previous * (1.0 - tol)) {
        throw PreconditionError("MomentOracle: E|X|^s decreases in s near s = " + format_order(s) + " (Lyapunov)");
      }
      previous = v;
    }
    for (int k = 1; k <= 10; ++k) {
      const double a = abs_moment(k);
      if (!std::isfinite(a)) break;
      if (std::fabs(signed_moment(k)) > a * (1.0 + tol) + tol) {
        throw PreconditionError("MomentOracle: |E[X^" + std::to_string(k) + "]| exceeds E|X|^" + std::to_string(k));
      }
    }
  }

  static std::string format_order(double s) {
    if (s == std::floor(s)) return std::to_string(static_cast<long long>(s));
    std::string t = std::to_string(s);
    while (!t.empty() && t.back() == '0') t.pop_back();
    return t;
  }
};

/// X = (I - p1)/sqrt(p1 p2) with I ~ Bernoulli(p1).
inline MomentOracle bernoulli_standardized(double p1) {
  if (!(p1 > 0.0 && p1 < 1.0)) throw PreconditionError("bernoulli_standardized: p1 must lie in (0, 1)");
  const double p2 = 1.0 - p1;
  const double hi = std::sqrt(p2 / p1);   // taken with probability p1
  const double lo = -std::sqrt(p1 / p2);  // taken with probability p2
  MomentOracle o;
  o.family = "bernoulli_standardized";
  // E[X^3] = (p2 - p1)/sqrt(p1 p2) vanishes only at p1 = 1/2; E[X^4] != 3 always.
  o.matching_order = p1 == 0.5 ? 3 : 2;
  o.abs_moment = [p1, p2](double s) {
    return (p1 * std::pow(p2, s) + p2 * std::pow(p1, s)) / std::pow(p1 * p2, 0.5 * s);
  };
  o.signed_moment = [p1, p2, hi, lo](int k) {
    if (k == 1) return 0.0;
    if (k == 2) return 1.0;
    return p1 * std::pow(hi, k) + p2 * std::pow(lo, k);
  };
  o.sampler = [p1, hi, lo](std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p1 ? hi : lo;
  };
  return o;
}

inline MomentOracle rademacher() {
  MomentOracle o;
  o.family = "rademacher";
  o.matching_order = 3;
  o.abs_moment = [](double) { return 1.0; };
  o.signed_moment = [](int k) { return k % 2 == 0 ? 1.0 : 0.0; };
  o.sampler = [](std::mt19937_64& rng) { return (rng() >> 63) ? 1.0 : -1.0; };
  return o;
}

/// Uniform on [-sqrt 3, sqrt 3].
inline MomentOracle uniform_standardized() {
  MomentOracle o;
  o.family = "uniform_standardized";
  o.matching_order = 3;
  o.abs_moment = [](double s) { return std::pow(3.0, 0.5 * s) / (s + 1.0); };
  o.signed_moment = [](int k) { return k % 2 == 1 ? 0.0 : std::pow(3.0, 0.5 * k) / (k + 1.0); };
  o.sampler = [](std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(-std::sqrt(3.0), std::sqrt(3.0))(rng);
  };
  return o;
}

/// User-supplied moments at integer orders. Fractional absolute moments use log-linear
/// interpolation between the neighbouring integer orders; s -> log E|X|^s is convex, so the
/// chord is an upper bound. Orders beyond the table are reported as infinite.
inline MomentOracle moment_table(std::map<int, double> abs_moments, std::map<int, double> signed_moments,
                                 int matching_order) {
  for (const auto& [k, v] : abs_moments) {
    if (k < 0 || !(v >= 0.0)) throw PreconditionError("moment_table: absolute moments must be >= 0 at orders >= 0");
  }
  abs_moments[0] = 1.0;
  if (!abs_moments.count(2)) throw PreconditionError("moment_table: E|X|^2 must be supplied");
  auto abs_shared = std::make_shared<std::map<int, double>>(std::move(abs_moments));
  auto signed_shared = std::make_shared<std::map<int, double>>(std::move(signed_moments));
  MomentOracle o;
  o.family = "table";
  o.matching_order = matching_order;
  o.abs_moment = [abs_shared](double s) {
    if (!(s >= 0.0)) throw DomainError("moment_table: order must be >= 0");
    const auto& t = *abs_shared;
    const auto hi = t.lower_bound(static_cast<int>(std::ceil(s)));
    if (hi == t.end()) return std::numeric_limits<double>::infinity();
    if (hi->first == s) return hi->second;
    auto lo = hi;
    --lo;
    if (lo->second == 0.0 || hi->second == 0.0) return hi->second;
    const double u = (s - lo->first) / (hi->first - lo->first);
    return std::exp((1.0 - u) * std::log(lo->second) + u * std::log(hi->second));
  };
  o.signed_moment = [signed_shared](int k) {
    if (k == 0) return 1.0;
    const auto it = signed_shared->find(k);
    if (it == signed_shared->end()) {
      throw PreconditionError("moment_table: E[X^" + std::to_string(k) + "] was not supplied");
    }
    return it->second;
  };
  o.validate();
  return o;
}

/// W_j = n_j^{-1/2} sum_{i <= n_j} X_{ij}, summands i.i.d. within a component, components independent.
struct SumSpecification {
  std::vector<std::int64_t> sizes;
  std::vector<MomentOracle> oracles;

  SumSpecification() = default;
  SumSpecification(std::vector<std::int64_t> n, std::vector<MomentOracle> laws)
      : sizes(std::move(n)), oracles(std::move(laws)) {
    validate();
  }

  static SumSpecification iid(std::int64_t n, MomentOracle law) { return SumSpecification({n}, {std::move(law)}); }

  std::size_t dimension() const noexcept { return sizes.size(); }

  void validate() const {
    if (sizes.empty()) throw PreconditionError("SumSpecification: need at least one component");
    if (sizes.size() != oracles.size()) throw PreconditionError("SumSpecification: one moment oracle per component");
    for (auto n : sizes) {
      if (n < 1) throw PreconditionError("SumSpecification: every n_j must be >= 1");
    }
    for (const auto& o : oracles) o.validate();
  }

  std::int64_t min_size() const { return *std::min_element(sizes.begin(), sizes.end()); }
};

// ---------------------------------------------------------------------------------------------
// Moments of the sums
// ---------------------------------------------------------------------------------------------

enum class EWPolicy { holder_cap, even_moment_interpolation, monte_carlo_ci };

inline std::string to_string(EWPolicy p) {
  switch (p) {
    case EWPolicy::holder_cap: return "holder_cap";
    case EWPolicy::even_moment_interpolation: return "even_moment_interpolation";
    case EWPolicy::monte_carlo_ci: return "monte_carlo_ci";
  }
  return "unknown";
}

struct EWOptions {
  EWPolicy policy = EWPolicy::holder_cap;
  std::size_t mc_samples = 20000;
  std::uint64_t mc_seed = 0x5eed;
};

struct EWBound {
  double value = 1.0;
  bool certified = true;
  std::string method;
};

/// Exact E[W^k] of an i.i.d. standardized sum, through cumulants: kappa_j(W) = n^{1-j/2} kappa_j(X).
inline double sum_signed_moment(const MomentOracle& law, std::int64_t n, int k) {
  if (k < 0) throw DomainError("sum_signed_moment: k must be >= 0");
  if (n < 1) throw PreconditionError("sum_signed_moment: n must be >= 1");
  std::vector<double> m(static_cast<std::size_t>(k) + 1), kappa(static_cast<std::size_t>(k) + 1, 0.0);
  m[0] = 1.0;
  for (int j = 1; j <= k; ++j) m[static_cast<std::size_t>(j)] = law.signed_moment(j);
  auto binom = [](int a, int b) {
    double c = 1.0;
    for (int i = 1; i <= b; ++i) c = c * (a - b + i) / i;
    return c;
  };
  for (int j = 1; j <= k; ++j) {
    double s = m[static_cast<std::size_t>(j)];
    for (int i = 1; i < j; ++i) s -= binom(j - 1, i - 1) * kappa[static_cast<std::size_t>(i)] * m[static_cast<std::size_t>(j - i)];
    kappa[static_cast<std::size_t>(j)] = s;
  }
  const double nn = static_cast<double>(n);
  for (int j = 1; j <= k; ++j) kappa[static_cast<std::size_t>(j)] *= std::pow(nn, 1.0 - 0.5 * j);
  std::vector<double> w(static_cast<std::size_t>(k) + 1, 0.0);
  w[0] = 1.0;
  for (int j = 1; j <= k; ++j) {
    double s = 0.0;
    for (int i = 1; i <= j; ++i) s += binom(j - 1, i - 1) * kappa[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(j - i)];
    w[static_cast<std::size_t>(j)] = s;
  }
  return w[static_cast<std::size_t>(k)];
}

/// Upper bound on E|W_k|^r for component k under the chosen policy.
inline EWBound ew_moment_upper(const SumSpecification& spec, std::size_t k, double r, const EWOptions& opts = {}) {
  if (k >= spec.dimension()) throw PreconditionError("ew_moment_upper: component out of range");
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("ew_moment_upper: r must be finite and >= 0");
  if (r == 0.0) return {1.0, true, "trivial"};
  const auto& law = spec.oracles[k];
  const auto n = spec.sizes[k];
  switch (opts.policy) {
    case EWPolicy::holder_cap:
      if (r > 2.0) {
        throw UnsupportedError("ew_moment_upper: holder_cap only covers r <= 2 (E|W|^r <= (E W^2)^{r/2} = 1); use "
                               "even_moment_interpolation");
      }
      return {1.0, true, "holder_cap"};
    case EWPolicy::even_moment_interpolation: {
      if (r > 8.0) throw UnsupportedError("ew_moment_upper: even_moment_interpolation supports r <= 8");
      const int two_m = 2 * static_cast<int>(std::ceil(0.5 * r));
      if (two_m == 2) return {1.0, true, "even_moment_interpolation"};
      for (int j = 3; j <= two_m; ++j) law.finite_abs_moment(j, "ew_moment_upper");
      const double even = sum_signed_moment(law, n, two_m);
      return {std::pow(even, r / two_m), true, "even_moment_interpolation"};
    }
    case EWPolicy::monte_carlo_ci: {
      if (!law.has_sampler()) throw PreconditionError("ew_moment_upper: the " + law.family + " law has no sampler");
      if (opts.mc_samples < 2) throw PreconditionError("ew_moment_upper: need at least two Monte Carlo samples");
      std::mt19937_64 rng(opts.mc_seed);
      const double scale = 1.0 / std::sqrt(static_cast<double>(n));
      double mean = 0.0, m2 = 0.0;
      for (std::size_t s = 0; s < opts.mc_samples; ++s) {
        double w = 0.0;
        for (std::int64_t i = 0; i < n; ++i) w += law.sampler(rng);
        const double v = std::pow(std::fabs(w * scale), r);
        const double delta = v - mean;
        mean += delta / static_cast<double>(s + 1);
        m2 += delta * (v - mean);
      }
      const double se = std::sqrt(m2 / static_cast<double>(opts.mc_samples - 1) / static_cast<double>(opts.mc_samples));
      return {mean + 5.0 * se, false, "monte_carlo_ci"};
    }
  }
  throw UnsupportedError("ew_moment_upper: unknown policy");
}

// ---------------------------------------------------------------------------------------------
// Distance bounds
// ---------------------------------------------------------------------------------------------

enum class LimitPart { i, ii, iii, iv };

inline std::string to_string(LimitPart p) {
  switch (p) {
    case LimitPart::i: return "i";
    case LimitPart::ii: return "ii";
    case LimitPart::iii: return "iii";
    case LimitPart::iv: return "iv";
  }
  return "?";
}

/// n-free coefficients of the univariate i.i.d. bounds, excluding the test-function weight.
/// part ii: bound = h_{p-1} n^{-(p-1)/2} [a E|X|^{p+1} + b E|X|^{r+p+1} n^{-r/2}]
///   with a = lead_A + lead_W * E|W|^r + lead_gamma.
/// part iv: bound = h_p n^{-p/2} [a E|X|^{p+2} + b E|X|^{r+p+2} n^{-r/2}
///                               + |E X^{p+1}| (c E|X|^3 + e E|X|^{r+3} n^{-r/2})]
///   with a = lead_A + lead_W E|W|^r + lead_gamma and c = skew_A + skew_W E|W|^r + skew_gamma.
struct UnivariateCoefficients {
  double lead_A = 0.0;
  double lead_W = 0.0;
  double lead_gamma = 0.0;
  double lead_cross = 0.0;  // b
  double skew_A = 0.0;
  double skew_W = 0.0;
  double skew_gamma = 0.0;
  double skew_cross = 0.0;  // e

  double lead(double ew) const { return lead_A + lead_W * ew + lead_gamma; }
  double skew(double ew) const { return skew_A + skew_W * ew + skew_gamma; }
};

inline double factorial(int k) {
  double f = 1.0;
  for (int j = 2; j <= k; ++j) f *= j;
  return f;
}

inline UnivariateCoefficients univariate_coefficients(LimitPart part, double A, double B, double r, int p) {
  if (part != LimitPart::ii && part != LimitPart::iv) {
    throw PreconditionError("univariate_coefficients: only parts ii and iv have a univariate display");
  }
  if (p < 2) throw PreconditionError("univariate_coefficients: p must be >= 2");
  UnivariateCoefficients c;
  const auto plain = abc_coeffs(r, AbcVariant::plain);
  const double cr = c_const(r);
  const double two_r = std::pow(2.0, 0.5 * r);
  if (part == LimitPart::ii) {
    const double pre = (p + 1.0) / factorial(p);
    c.lead_A = pre * plain.alpha * A;
    c.lead_W = pre * two_r * B * cr * plain.beta;
    c.lead_gamma = pre * two_r * B * plain.gamma;
    c.lead_cross = c.lead_W;
    return c;
  }
  const auto tilde = abc_coeffs(r, AbcVariant::tilde);
  const double three_r = std::pow(3.0, 0.5 * r);
  const double pre = (2.0 * p + 3.0) / ((p + 1.0) * factorial(p));
  c.lead_A = pre * plain.alpha * A;
  c.lead_W = pre * two_r * B * cr * plain.beta;
  c.lead_gamma = pre * two_r * B * plain.gamma;
  c.lead_cross = c.lead_W;
  const double skew_pre = 1.5 / factorial(p);
  c.skew_A = skew_pre * tilde.alpha * A;
  c.skew_W = skew_pre * three_r * B * cr * tilde.beta;
  c.skew_gamma = skew_pre * three_r * B * tilde.gamma;
  c.skew_cross = c.skew_W;
  return c;
}

struct LimitBoundInputs {
  SumSpecification spec;
  DominatingPolynomial P;
  TestFunctionNorms norms;
  int p = 2;
  EWOptions ew;
  /// Caller's assertion that g is even (parts iii and iv); it cannot be checked from P.
  bool g_even = false;
};

namespace detail {

inline void require_matching(const SumSpecification& spec, int p, BoundReport& rep) {
  for (std::size_t j = 0; j < spec.dimension(); ++j) {
    if (spec.oracles[j].matching_order < p) {
      throw PreconditionError("moments of component " + std::to_string(j + 1) + " (" + spec.oracles[j].family +
                              ") match the normal only up to order " +
                              std::to_string(spec.oracles[j].matching_order) + " < p = " + std::to_string(p));
    }
  }
  rep.assume("E[X_ij^k] = E[Z^k] for k <= " + std::to_string(p), AssumptionStatus::checked);
}

/// E|X_ij^a X_ik^b|: one summand's own moment when j == k, a product of marginals otherwise.
inline double cross_moment(const SumSpecification& spec, std::size_t j, std::size_t k, double a, double b,
                           const std::string& clause) {
  if (j == k) return spec.oracles[j].finite_abs_moment(a + b, clause);
  return spec.oracles[j].finite_abs_moment(a, clause) * spec.oracles[k].finite_abs_moment(b, clause);
}

}  // namespace detail

/// The displayed bound of the requested part, with E|W_k|^{r_k} replaced by the policy's upper bound.
inline BoundReport limit_bound(LimitPart part, const LimitBoundInputs& in) {
  const auto& spec = in.spec;
  spec.validate();
  in.P.validate();
  const int p = in.p;
  const std::size_t d = spec.dimension();
  if (p < 2) throw PreconditionError("limit bound: the matching order p must be >= 2");
  if (in.P.dimension() != d) throw PreconditionError("limit bound: P has a different dimension than the sum");
  const bool univariate = part == LimitPart::ii || part == LimitPart::iv;
  if (univariate && d != 1) throw PreconditionError("limit bound part " + to_string(part) + " requires d = 1");
  const bool even_part = part == LimitPart::iii || part == LimitPart::iv;

  BoundReport rep;
  rep.metric = Metric::smooth;
  rep.provenance = "limit-bound/" + to_string(part);
  detail::require_matching(spec, p, rep);
  if (even_part) {
    if (p % 2 != 0) throw PreconditionError("limit bound part " + to_string(part) + " requires p to be even");
    if (!in.g_even) {
      throw PreconditionError("limit bound part " + to_string(part) + " requires g to be an even function");
    }
    rep.assume("g is even", AssumptionStatus::user_asserted);
  }
  const int class_order = part == LimitPart::i ? p : part == LimitPart::ii ? p - 1 : part == LimitPart::iii ? p + 2 : p;
  rep.assume("g in C_P^" + std::to_string(class_order), AssumptionStatus::user_asserted);
  const double h = in.norms.h(static_cast<std::size_t>(class_order));
  rep.assume("h has " + std::to_string(class_order) + " bounded derivatives", AssumptionStatus::checked);
  rep.details["h_weight"] = h;

  const double A = in.P.A, B = in.P.B;
  std::vector<double> ew(d);
  for (std::size_t k = 0; k < d; ++k) {
    const auto b = ew_moment_upper(spec, k, in.P.exponents[k], in.ew);
    ew[k] = b.value;
    rep.certified = rep.certified && b.certified;
    rep.details["E|W_" + std::to_string(k + 1) + "|^r"] = b.value;
  }
  rep.assume("E|W_k|^{r_k} bounded by " + to_string(in.ew.policy),
             in.ew.policy == EWPolicy::monte_carlo_ci ? AssumptionStatus::user_asserted : AssumptionStatus::checked);

  if (univariate) {
    const auto& law = spec.oracles[0];
    const double n = static_cast<double>(spec.sizes[0]);
    const double r = in.P.exponents[0];
    const auto c = univariate_coefficients(part, A, B, r, p);
    const std::string clause = "limit bound part " + to_string(part);
    if (part == LimitPart::ii) {
      const double scale = h * std::pow(n, -0.5 * (p - 1));
      const double m_lead = law.finite_abs_moment(p + 1, clause);
      const double m_cross = law.finite_abs_moment(r + p + 1, clause);
      rep.assume("E|X|^{r+p+1} finite", AssumptionStatus::checked);
      rep.add_term("A-term", scale * c.lead_A * m_lead);
      rep.add_term("E|W|^r term", scale * c.lead_W * ew[0] * m_lead);
      rep.add_term("summand cross term", scale * c.lead_cross * m_cross * std::pow(n, -0.5 * r));
      rep.add_term("normal moment term", scale * c.lead_gamma * m_lead);
      rep.details["coef:E|X|^{p+1}"] = c.lead(ew[0]);
      rep.details["coef:E|X|^{r+p+1}/n^{r/2}"] = c.lead_cross;
    } else {
      const double scale = h * std::pow(n, -0.5 * p);
      const double m_lead = law.finite_abs_moment(p + 2, clause);
      const double m_cross = law.finite_abs_moment(r + p + 2, clause);
      const double skew = std::fabs(law.signed_moment(p + 1));
      const double m3 = law.finite_abs_moment(3, clause);
      const double m_skew_cross = law.finite_abs_moment(r + 3, clause);
      rep.assume("E|X|^{r+p+2} finite", AssumptionStatus::checked);
      const double nr = std::pow(n, -0.5 * r);
      rep.add_term("A-term", scale * c.lead_A * m_lead);
      rep.add_term("E|W|^r term", scale * c.lead_W * ew[0] * m_lead);
      rep.add_term("summand cross term", scale * c.lead_cross * m_cross * nr);
      rep.add_term("normal moment term", scale * c.lead_gamma * m_lead);
      rep.add_term("skew A-term", scale * skew * c.skew_A * m3);
      rep.add_term("skew E|W|^r term", scale * skew * c.skew_W * ew[0] * m3);
      rep.add_term("skew cross term", scale * skew * c.skew_cross * m_skew_cross * nr);
      rep.add_term("skew normal moment term", scale * skew * c.skew_gamma * m3);
      rep.details["coef:E|X|^{p+2}"] = c.lead(ew[0]);
      rep.details["coef:E|X|^{r+p+2}/n^{r/2}"] = c.lead_cross;
      rep.details["coef:|EX^{p+1}|E|X|^3"] = c.skew(ew[0]);
      rep.details["coef:|EX^{p+1}|E|X|^{r+3}/n^{r/2}"] = c.skew_cross;
    }
    rep.value = rep.term_sum();
    return rep;
  }

  const std::string clause = "limit bound part " + to_string(part);
  double t_A = 0.0, t_W = 0.0, t_cross = 0.0, t_normal = 0.0;
  if (part == LimitPart::i) {
    const double pre = (p + 1.0) * std::sqrt(std::numbers::pi) * gamma_fn(0.5 * (p + 1)) /
                       (2.0 * factorial(p) * gamma_fn(0.5 * p + 1.0)) * h;
    for (std::size_t j = 0; j < d; ++j) {
      const double nj = static_cast<double>(spec.sizes[j]);
      const double w = pre * nj * std::pow(nj, -0.5 * (p + 1));
      const double m = spec.oracles[j].finite_abs_moment(p + 1, clause);
      t_A += w * A * m;
      for (std::size_t k = 0; k < d; ++k) {
        const double rk = in.P.exponents[k];
        const double nk = static_cast<double>(spec.sizes[k]);
        const double f = w * B * std::pow(2.0, 0.5 * rk);
        t_W += f * c_const(rk) * m * ew[k];
        t_cross += f * c_const(rk) * std::pow(nk, -0.5 * rk) * detail::cross_moment(spec, j, k, p + 1, rk, clause);
        t_normal += f * mu_abs_moment(rk + 1) * m;
      }
    }
    rep.assume("E|X_ij|^{r_l+p+1} finite", AssumptionStatus::checked);
    rep.add_term("A-term", t_A);
    rep.add_term("E|W|^r term", t_W);
    rep.add_term("summand cross term", t_cross);
    rep.add_term("normal moment term", t_normal);
    rep.value = rep.term_sum();
    return rep;
  }

  // part iii
  const double lead_pre = h / factorial(p) * (2.0 * p + 3.0) / ((p + 1.0) * (p + 2.0));
  for (std::size_t j = 0; j < d; ++j) {
    const double nj = static_cast<double>(spec.sizes[j]);
    const double w = lead_pre * nj * std::pow(nj, -(0.5 * p + 1.0));
    const double m = spec.oracles[j].finite_abs_moment(p + 2, clause);
    t_A += w * A * m;
    for (std::size_t k = 0; k < d; ++k) {
      const double rk = in.P.exponents[k];
      const double nk = static_cast<double>(spec.sizes[k]);
      const double f = w * B * std::pow(2.0, 0.5 * rk);
      t_W += f * c_const(rk) * m * ew[k];
      t_cross += f * c_const(rk) * std::pow(nk, -0.5 * rk) * detail::cross_moment(spec, j, k, p + 2, rk, clause);
      t_normal += f * mu_abs_moment(rk) * m;
    }
  }
  double skew_outer = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double nj = static_cast<double>(spec.sizes[j]);
    skew_outer += nj * std::fabs(spec.oracles[j].signed_moment(p + 1)) * std::pow(nj, -0.5 * (p + 1));
  }
  const double skew_pre = h / factorial(p) * 3.0 * std::numbers::pi * gamma_fn(0.5 * p + 2.0) /
                          (8.0 * std::numbers::sqrt2 * gamma_fn(0.5 * (p + 5))) * skew_outer;
  double s_A = 0.0, s_W = 0.0, s_cross = 0.0, s_normal = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double nk = static_cast<double>(spec.sizes[k]);
    const double w = skew_pre * nk * std::pow(nk, -1.5);
    const double m3 = spec.oracles[k].finite_abs_moment(3, clause);
    s_A += w * A * m3;
    for (std::size_t t = 0; t < d; ++t) {
      const double rt = in.P.exponents[t];
      const double nt = static_cast<double>(spec.sizes[t]);
      const double f = w * B * std::pow(3.0, 0.5 * rt);
      s_W += f * c_const(rt) * m3 * ew[t];
      s_cross += f * c_const(rt) * std::pow(nt, -0.5 * rt) * detail::cross_moment(spec, k, t, 3, rt, clause);
      s_normal += f * 2.0 * mu_abs_moment(rt + 1) * m3;
    }
  }
  rep.assume("E|X_ij|^{r_l+p+2} finite", AssumptionStatus::checked);
  rep.add_term("A-term", t_A);
  rep.add_term("E|W|^r term", t_W);
  rep.add_term("summand cross term", t_cross);
  rep.add_term("normal moment term", t_normal);
  rep.add_term("skew A-term", s_A);
  rep.add_term("skew E|W|^r term", s_W);
  rep.add_term("skew cross term", s_cross);
  rep.add_term("skew normal moment term", s_normal);
  rep.value = rep.term_sum();
  return rep;
}

/// Simplified bound with an unspecified constant C supplied by the caller; never certified.
inline BoundReport simplified_limit_bound(LimitPart part, const SumSpecification& spec, double r_star,
                                          const TestFunctionNorms& norms, int p, double C) {
  spec.validate();
  if (!(C > 0.0) || !std::isfinite(C)) throw PreconditionError("simplified limit bound: C must be positive");
  if (!(r_star >= 0.0)) throw PreconditionError("simplified limit bound: r_* must be >= 0");
  if (p < 2) throw PreconditionError("simplified limit bound: p must be >= 2");
  const std::size_t d = spec.dimension();
  const bool univariate = part == LimitPart::ii || part == LimitPart::iv;
  if (univariate && d != 1) throw PreconditionError("simplified limit bound part " + to_string(part) + " requires d = 1");
  if ((part == LimitPart::iii || part == LimitPart::iv) && p % 2 != 0) {
    throw PreconditionError("simplified limit bound part " + to_string(part) + " requires p to be even");
  }
  BoundReport rep;
  rep.metric = Metric::smooth;
  rep.provenance = "simplified-limit-bound/" + to_string(part);
  rep.certified = false;
  detail::require_matching(spec, p, rep);
  rep.assume("C supplied by the caller", AssumptionStatus::user_asserted);
  const std::string clause = "simplified limit bound";
  const double n_star = static_cast<double>(spec.min_size());
  const double dd = static_cast<double>(d);
  double value = 0.0;
  switch (part) {
    case LimitPart::i:
    case LimitPart::ii: {
      double sum = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        sum += static_cast<double>(spec.sizes[j]) * spec.oracles[j].finite_abs_moment(r_star + p + 1, clause);
      }
      const std::size_t order = part == LimitPart::i ? static_cast<std::size_t>(p) : static_cast<std::size_t>(p - 1);
      const double lead = part == LimitPart::i ? dd : 1.0;
      value = C * lead * norms.h_tilde(order) * std::pow(n_star, -0.5 * (p + 1)) * sum;
      break;
    }
    case LimitPart::iii:
    case LimitPart::iv: {
      double first = 0.0, skew = 0.0, third = 0.0, total_n = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double nj = static_cast<double>(spec.sizes[j]);
        first += nj * spec.oracles[j].finite_abs_moment(r_star + p + 2, clause);
        skew += nj * std::fabs(spec.oracles[j].signed_moment(p + 1));
        third += nj * spec.oracles[j].finite_abs_moment(r_star + 3, clause);
        total_n += nj;
      }
      // sum_{j,k} sum_{i,l} (a_ij + s_ij b_lk) = N a + S B with N = sum_k n_k.
      const double sum = total_n * first + skew * third;
      const std::size_t order = part == LimitPart::iii ? static_cast<std::size_t>(p + 2) : static_cast<std::size_t>(p);
      const double lead = part == LimitPart::iii ? dd : 1.0;
      value = C * lead * norms.h_tilde(order) * std::pow(n_star, -(0.5 * p + 2.0)) * sum;
      break;
    }
  }
  rep.add_term("C-scaled moment sum", value);
  rep.value = value;
  return rep;
}

}  // namespace stein
