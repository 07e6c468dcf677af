#pragma once

/// \file power_divergence.hpp
/// Pearson's statistic and the power divergence family for two-cell multinomial counts, and
/// explicit bounds on their distance to the chi-square(1) law.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>

#include "stein/errors.hpp"
#include "stein/limit_bounds.hpp"
#include "stein/special_functions.hpp"
#include "stein/types.hpp"

namespace stein {

struct MultinomialModel {
  std::int64_t n = 1;
  double p1 = 0.5;
  double p2 = 0.5;

  MultinomialModel() = default;
  MultinomialModel(std::int64_t trials, double prob1) : n(trials), p1(prob1), p2(1.0 - prob1) { validate(); }
  MultinomialModel(std::int64_t trials, double prob1, double prob2) : n(trials), p1(prob1), p2(prob2) { validate(); }

  void validate() const {
    if (n < 1) throw PreconditionError("MultinomialModel: n must be >= 1");
    if (!(p1 > 0.0 && p1 < 1.0) || !(p2 > 0.0 && p2 < 1.0)) {
      throw PreconditionError("MultinomialModel: cell probabilities must lie in (0, 1)");
    }
    if (std::fabs(p1 + p2 - 1.0) > 1e-12) throw PreconditionError("MultinomialModel: p1 + p2 must equal 1");
  }

  /// n p1 p2, the effective sample size of every bound.
  double q() const noexcept { return static_cast<double>(n) * p1 * p2; }
  double p_min() const noexcept { return std::min(p1, p2); }
};

struct CountVector {
  std::int64_t U1 = 0;
  std::int64_t U2 = 0;

  void validate(const MultinomialModel& m) const {
    if (U1 < 0 || U2 < 0) throw PreconditionError("CountVector: counts must be >= 0");
    if (U1 + U2 != m.n) throw PreconditionError("CountVector: U1 + U2 must equal n");
  }
};

inline double pearson_statistic(const CountVector& U, const MultinomialModel& m) {
  U.validate(m);
  const double e1 = m.n * m.p1, e2 = m.n * m.p2;
  const double d1 = U.U1 - e1, d2 = U.U2 - e2;
  return d1 * d1 / e1 + d2 * d2 / e2;
}

namespace detail {

/// (1+x)^a - 1 - a x without cancellation for small |x|.
inline double power_excess(double a, double x) {
  if (std::fabs(x) <= 0.25) {
    double c = 0.5 * a * (a - 1.0);
    double xk = x * x;
    double s = 0.0;
    for (int k = 2; k < 80 && c != 0.0; ++k) {
      const double term = c * xk;
      s += term;
      if (std::fabs(term) <= 1e-18 * std::fabs(s)) break;
      c *= (a - k) / (k + 1.0);
      xk *= x;
    }
    return s;
  }
  if (x == -1.0) return a - 1.0;
  return std::expm1(a * std::log1p(x)) - a * x;
}

/// (1+x) ln(1+x) - x without cancellation for small |x|.
inline double log_excess(double x) {
  if (std::fabs(x) <= 0.25) {
    double s = 0.0, xk = x * x;
    for (int k = 2; k < 80; ++k) {
      const double term = (k % 2 == 0 ? 1.0 : -1.0) * xk / (k * (k - 1.0));
      s += term;
      if (std::fabs(term) <= 1e-18 * std::fabs(s)) break;
      xk *= x;
    }
    return s;
  }
  if (x == -1.0) return 1.0;
  return (1.0 + x) * std::log1p(x) - x;
}

inline void require_lambda(double lambda) {
  if (!(lambda > -1.0) || !std::isfinite(lambda)) {
    throw DomainError("power divergence: lambda must exceed -1 (the family for lambda > -1 is the scope of the bounds)");
  }
}

}  // namespace detail

/// T_lambda = 2/(lambda(lambda+1)) sum_j U_j [(U_j/(n p_j))^lambda - 1]; lambda = 0 is the
/// log-likelihood ratio 2 sum U_j ln(U_j/(n p_j)). Cells with U_j = 0 contribute their limit.
/// Evaluated as 2/(lambda(lambda+1)) sum n p_j [(1+x_j)^{lambda+1} - 1 - (lambda+1) x_j] with
/// x_j = U_j/(n p_j) - 1, which uses sum n p_j x_j = 0 and keeps every summand nonnegative.
inline double power_divergence(const CountVector& U, const MultinomialModel& m, double lambda) {
  U.validate(m);
  detail::require_lambda(lambda);
  const double e[2] = {m.n * m.p1, m.n * m.p2};
  const double u[2] = {static_cast<double>(U.U1), static_cast<double>(U.U2)};
  double s = 0.0;
  for (int j = 0; j < 2; ++j) {
    const double x = (u[j] - e[j]) / e[j];
    s += e[j] * (lambda == 0.0 ? detail::log_excess(x) : detail::power_excess(lambda + 1.0, x));
  }
  const double t = lambda == 0.0 ? 2.0 * s : 2.0 / (lambda * (lambda + 1.0)) * s;
  return std::max(0.0, t);
}

struct SquareRootRepresentation {
  double W = 0.0;   // (U1 - n p1)/sqrt(n p1 p2)
  double S1 = 0.0;  // (U1 - n p1)/sqrt(n p1) = sqrt(p2) W
  double S2 = 0.0;  // (U2 - n p2)/sqrt(n p2) = sqrt(p1) W
};

inline SquareRootRepresentation square_root_representation(const CountVector& U, const MultinomialModel& m) {
  U.validate(m);
  SquareRootRepresentation r;
  r.W = (U.U1 - m.n * m.p1) / std::sqrt(m.q());
  r.S1 = std::sqrt(m.p2) * r.W;
  r.S2 = std::sqrt(m.p1) * r.W;
  return r;
}

/// Binomial(n, p1) probabilities, visited for every count with non-negligible mass.
template <class F>
void for_each_count(const MultinomialModel& m, const F& visit) {
  const double n = static_cast<double>(m.n);
  const double lp1 = std::log(m.p1), lp2 = std::log(m.p2), ln_fact_n = std::lgamma(n + 1.0);
  for (std::int64_t u = 0; u <= m.n; ++u) {
    const double lp = ln_fact_n - std::lgamma(u + 1.0) - std::lgamma(n - u + 1.0) + u * lp1 + (n - u) * lp2;
    if (lp < -745.0) continue;
    visit(CountVector{u, m.n - u}, std::exp(lp));
  }
}

/// Exact E[T_lambda] under the model.
inline double expected_power_divergence(const MultinomialModel& m, double lambda) {
  detail::require_lambda(lambda);
  double s = 0.0;
  for_each_count(m, [&](const CountVector& U, double prob) { s += prob * power_divergence(U, m, lambda); });
  return s;
}

// ---------------------------------------------------------------------------------------------
// Constants of the squared standardized sum
// ---------------------------------------------------------------------------------------------

/// Unrounded constants of d_W(W^2, chi2_1) <= n^{-1/2}[a E|X|^3 + b E X^4 / sqrt(n)].
struct SquaredSumWassersteinConstants {
  double a = 0.0;
  double b = 0.0;
};

inline SquaredSumWassersteinConstants squared_sum_wasserstein_constants() {
  // g(w) = w^2, |g'| <= 2|w|: P = 2|w| (A = 0, B = 2, r = 1), p = 2, E|W| <= 1.
  const auto c = univariate_coefficients(LimitPart::ii, 0.0, 2.0, 1.0, 2);
  return {c.lead(1.0), c.lead_cross};
}

/// Unrounded constants of |E h(W^2) - E h(Y)| <= (||h'|| + ||h''||)/n [c1 E X^4 + c2 E X^6/n
///   + |E X^3| (c3 E|X|^3 + c4 E|X|^5/n)].
struct SquaredSumSmoothConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;
};

inline SquaredSumSmoothConstants squared_sum_smooth_constants() {
  // (g')^2 = 4w^2 and g'' = 2: P = 2 + 4w^2 (A = 2, B = 4, r = 2), p = 2, E W^2 = 1.
  const auto c = univariate_coefficients(LimitPart::iv, 2.0, 4.0, 2.0, 2);
  return {c.lead(1.0), c.lead_cross, c.skew(1.0), c.skew_cross};
}

/// Constants of the E[W^3 h'(W^2)] estimate, from part ii with A = 3/2 ||h'||,
/// B = 2||h''|| + 3/2 ||h'||, r = 4, p = 2 and E W^4 <= 3 + 1/(n p1 p2).
struct CubicTermChain {
  double alpha_A = 0.0;     // alpha_4 * A per unit ||h'||
  double c_beta = 0.0;      // c_4 beta_4
  double gamma = 0.0;       // gamma_4
  double first_const = 0.0;   // ||h'|| coefficient of 1/sqrt(q)
  double first_q = 0.0;       // ||h'|| coefficient of q^{-3/2} (and of q^{-5/2})
  double second_const = 0.0;  // ||h''|| coefficient of 1/sqrt(q)
  double second_q = 0.0;      // ||h''|| coefficient of q^{-3/2} (and of q^{-5/2})
};

inline CubicTermChain cubic_term_chain() {
  const double r = 4.0;
  const auto abc = abc_coeffs(r, AbcVariant::plain);
  CubicTermChain ch;
  ch.alpha_A = abc.alpha * 1.5;
  ch.c_beta = c_const(r) * abc.beta;
  ch.gamma = abc.gamma;
  // With E|X|^3 <= (p1p2)^{-1/2} and E|X|^7 <= (p1p2)^{-5/2}:
  // bound = q^{-1/2} [lead_A + 3 lead_W + lead_gamma + lead_W / q + lead_cross / q^2].
  const auto first = univariate_coefficients(LimitPart::ii, 1.5, 1.5, r, 2);
  const auto second = univariate_coefficients(LimitPart::ii, 0.0, 2.0, r, 2);
  ch.first_const = first.lead(3.0);
  ch.first_q = first.lead_W;
  ch.second_const = second.lead(3.0);
  ch.second_q = second.lead_W;
  return ch;
}

// ---------------------------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------------------------

namespace detail {

inline void require_smooth_norms(const TestFunctionNorms& norms, const char* who) {
  if (norms.order() < 2) throw PreconditionError(std::string(who) + ": the smooth metric needs (||h'||, ||h''||)");
}

/// The exact part-ii Wasserstein route for the Bernoulli law of the model.
inline double pearson_wasserstein_exact(const MultinomialModel& m) {
  const auto c = squared_sum_wasserstein_constants();
  const auto law = bernoulli_standardized(m.p1);
  const double n = static_cast<double>(m.n);
  return (c.a * law.abs_moment(3) + c.b * law.abs_moment(4) / std::sqrt(n)) / std::sqrt(n);
}

/// The exact part-iv smooth route for the Bernoulli law of the model, per unit (||h'|| + ||h''||).
inline double pearson_smooth_exact(const MultinomialModel& m) {
  const auto c = squared_sum_smooth_constants();
  const auto law = bernoulli_standardized(m.p1);
  const double n = static_cast<double>(m.n);
  return (c.c1 * law.abs_moment(4) + c.c2 * law.abs_moment(6) / n +
          std::fabs(law.signed_moment(3)) * (c.c3 * law.abs_moment(3) + c.c4 * law.abs_moment(5) / n)) /
         n;
}

struct CubicTermEvaluation {
  double flat = 0.0;
  double chain = 0.0;
  double exact = 0.0;
  double trivial = 0.0;
  bool certified = false;
};

inline CubicTermEvaluation cubic_term(const MultinomialModel& m, double h1, double h2) {
  const double q = m.q();
  CubicTermEvaluation ev;
  ev.flat = 2976.0 * (h1 + h2) / std::sqrt(q);
  ev.chain = (2975.0 + 864.0 / q + 864.0 / (q * q)) * (h1 + h2) / std::sqrt(q);
  // Exact part-ii value with the law's own moments and the exact E W^4.
  const auto law = bernoulli_standardized(m.p1);
  const double n = static_cast<double>(m.n);
  const double ew4 = 3.0 * (n - 1.0) / n + law.abs_moment(4) / n;
  const auto c = univariate_coefficients(LimitPart::ii, 1.5 * h1, 2.0 * h2 + 1.5 * h1, 4.0, 2);
  ev.exact = (c.lead(ew4) * law.abs_moment(3) + c.lead_cross * law.abs_moment(7) / (n * n)) / std::sqrt(n);
  ev.trivial = h1 * std::pow(ew4, 0.75);  // |E W^3 h'(W^2)| <= ||h'|| (E W^4)^{3/4}
  ev.certified = ev.flat >= std::min(ev.exact, ev.trivial);
  return ev;
}

/// Conditions under which the T_lambda comparison inequalities were derived.
inline bool pd_conditions_hold(const MultinomialModel& m, double lambda) {
  const double np_min = static_cast<double>(m.n) * m.p_min();
  if (np_min < 1.0) return false;
  if (lambda >= 2.0 && np_min < 2.0 * (lambda - 2.0) * (lambda - 2.0)) return false;
  return true;
}

struct SmoothPdEvaluation {
  double value = 0.0;
  double pearson_part = 0.0;
  double cubic_part = 0.0;
  double curvature_part = 0.0;
  double drift_part = 0.0;
  bool certified = false;
};

/// (1/q){(892 + 496|l-1|)(h1 + h2) + 19/9 (l-1)^2 h2 + |(l-1)(l-2)(12l+13)|/(6(l+1)) h1}.
inline SmoothPdEvaluation smooth_pd(const MultinomialModel& m, double lambda, double h1, double h2,
                                    double expected_t = std::numeric_limits<double>::quiet_NaN()) {
  const double q = m.q();
  const double d = lambda - 1.0;
  SmoothPdEvaluation ev;
  ev.pearson_part = 892.0 * (h1 + h2) / q;
  ev.cubic_part = 496.0 * std::fabs(d) * (h1 + h2) / q;
  ev.curvature_part = 19.0 / 9.0 * d * d * h2 / q;
  ev.drift_part = std::fabs(d * (lambda - 2.0) * (12.0 * lambda + 13.0)) / (6.0 * (lambda + 1.0)) * h1 / q;
  ev.value = ev.pearson_part + ev.cubic_part + ev.curvature_part + ev.drift_part;
  const bool pearson_ok = ev.pearson_part >= std::min(pearson_smooth_exact(m) * (h1 + h2), 2.0 * h1);
  const bool cubic_ok = d == 0.0 || cubic_term(m, h1, h2).certified;
  const bool conditions = d == 0.0 || pd_conditions_hold(m, lambda);
  ev.certified = pearson_ok && cubic_ok && conditions;
  if (!ev.certified && std::isfinite(expected_t)) {
    // |E h(T) - E h(Y)| <= ||h'|| (E T + E Y).
    ev.certified = ev.value >= h1 * (expected_t + 1.0);
  }
  return ev;
}

}  // namespace detail

/// Bounds for Pearson's statistic in the Wasserstein, smooth (needs ||h'||, ||h''||) and
/// Kolmogorov metrics.
inline BoundReport bound_pearson(Metric metric, const MultinomialModel& m, const TestFunctionNorms& norms = {}) {
  m.validate();
  const double q = m.q();
  BoundReport rep;
  rep.metric = metric;
  rep.details["q"] = q;
  switch (metric) {
    case Metric::wasserstein: {
      rep.provenance = "pearson/wasserstein";
      const double simplified = 25.0 / std::sqrt(q);
      const double exact = detail::pearson_wasserstein_exact(m);
      rep.details["simplified"] = simplified;
      rep.details["unsimplified"] = (24.0 + 17.0 / std::sqrt(q)) / std::sqrt(q);
      rep.details["exact_constants"] = exact;
      rep.details["trivial"] = 2.0;
      rep.capped = simplified > 2.0;
      rep.value = std::min(simplified, 2.0);
      rep.add_term(rep.capped ? "trivial bound E chi^2 + E Y" : "25/sqrt(n p1 p2)", rep.value);
      rep.certified = rep.value >= std::min(exact, 2.0);
      rep.assume("sqrt(n p1 p2) large enough for the constant 25", rep.certified ? AssumptionStatus::checked
                                                                                   : AssumptionStatus::violated);
      return rep;
    }
    case Metric::smooth: {
      detail::require_smooth_norms(norms, "bound_pearson");
      rep.provenance = "pearson/smooth";
      const double h1 = norms.norm(1), h2 = norms.norm(2);
      const double exact = detail::pearson_smooth_exact(m) * (h1 + h2);
      rep.value = 892.0 * (h1 + h2) / q;
      rep.add_term("892 (||h'|| + ||h''||)/(n p1 p2)", rep.value);
      rep.details["exact_constants"] = exact;
      rep.details["trivial"] = 2.0 * h1;
      rep.certified = rep.value >= std::min(exact, 2.0 * h1);
      rep.assume("n p1 p2 large enough for the constant 892", rep.certified ? AssumptionStatus::checked
                                                                             : AssumptionStatus::violated);
      return rep;
    }
    case Metric::kolmogorov: {
      rep.provenance = "pearson/kolmogorov";
      const double be = 0.9496 / std::sqrt(q);
      rep.capped = be > 1.0;
      rep.value = std::min(be, 1.0);
      rep.add_term(rep.capped ? "trivial bound" : "2 x 0.4748 E|X|^3/sqrt(n)", rep.value);
      rep.assume("Berry-Esseen constant 0.4748", AssumptionStatus::checked);
      return rep;
    }
    case Metric::smooth_p: break;
  }
  throw UnsupportedError("bound_pearson: unsupported metric " + to_string(metric));
}

/// Bounds for T_lambda, lambda > -1, in the Wasserstein and smooth metrics. The Wasserstein
/// value is capped by the trivial bound 1 + E[T_lambda].
inline BoundReport bound_power_divergence(Metric metric, const MultinomialModel& m, double lambda,
                                          const TestFunctionNorms& norms = {}) {
  m.validate();
  detail::require_lambda(lambda);
  const double q = m.q();
  const double d = lambda - 1.0;
  BoundReport rep;
  rep.metric = metric;
  rep.details["q"] = q;
  rep.details["lambda"] = lambda;
  const bool conditions = d == 0.0 || detail::pd_conditions_hold(m, lambda);
  rep.assume("n p_min >= 1, and n p_min >= 2(lambda-2)^2 when lambda >= 2",
             conditions ? AssumptionStatus::checked : AssumptionStatus::violated);
  if (metric == Metric::wasserstein) {
    rep.provenance = "power-divergence/wasserstein";
    const double pearson = 25.0 / std::sqrt(q);
    const double shift = std::numbers::sqrt2 * std::fabs(d * (4.0 * lambda + 7.0)) / ((lambda + 1.0) * std::sqrt(q));
    const double raw = pearson + shift;
    const double trivial = d == 0.0 ? 2.0 : 1.0 + expected_power_divergence(m, lambda);
    rep.details["uncapped"] = raw;
    rep.details["trivial"] = trivial;
    rep.capped = raw > trivial;
    if (rep.capped) {
      rep.value = trivial;
      rep.add_term("trivial bound E T + E Y", trivial);
    } else {
      rep.add_term("25/sqrt(n p1 p2)", pearson);
      rep.add_term("sqrt2 |(l-1)(4l+7)|/((l+1) sqrt(n p1 p2))", shift);
      rep.value = rep.term_sum();
    }
    const bool pearson_ok = pearson >= std::min(detail::pearson_wasserstein_exact(m), 2.0);
    rep.certified = rep.capped || (conditions && pearson_ok);
    return rep;
  }
  if (metric == Metric::smooth) {
    detail::require_smooth_norms(norms, "bound_power_divergence");
    rep.provenance = "power-divergence/smooth";
    const double h1 = norms.norm(1), h2 = norms.norm(2);
    const double et = d == 0.0 ? 1.0 : expected_power_divergence(m, lambda);
    const auto ev = detail::smooth_pd(m, lambda, h1, h2, et);
    rep.add_term("892 (||h'|| + ||h''||)/q", ev.pearson_part);
    rep.add_term("496 |l-1| (||h'|| + ||h''||)/q", ev.cubic_part);
    rep.add_term("19/9 (l-1)^2 ||h''||/q", ev.curvature_part);
    rep.add_term("|(l-1)(l-2)(12l+13)|/(6(l+1)) ||h'||/q", ev.drift_part);
    rep.value = rep.term_sum();
    rep.details["trivial"] = h1 * (et + 1.0);
    rep.certified = ev.certified;
    return rep;
  }
  throw UnsupportedError("bound_power_divergence: unsupported metric " + to_string(metric));
}

/// How the smoothing parameter alpha of the Kolmogorov bound is chosen.
struct AlphaPolicy {
  enum class Kind { optimize, fixed, closed_form } kind = Kind::optimize;
  double alpha = 1.0;
  double C1 = 1.0, C2 = 1.0, C3 = 1.0;

  static AlphaPolicy optimize() { return {}; }
  static AlphaPolicy fixed(double a) {
    AlphaPolicy p;
    p.kind = Kind::fixed;
    p.alpha = a;
    return p;
  }
  static AlphaPolicy closed_form(double c1, double c2, double c3) {
    AlphaPolicy p;
    p.kind = Kind::closed_form;
    p.C1 = c1;
    p.C2 = c2;
    p.C3 = c3;
    return p;
  }
};

/// Smoothed Kolmogorov bound at alpha: the smooth bound at (2/alpha, 4/alpha^2) plus sqrt(2 alpha/pi).
inline double kolmogorov_smoothing_objective(const MultinomialModel& m, double lambda, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw PreconditionError("Kolmogorov bound: alpha must be positive");
  return detail::smooth_pd(m, lambda, 2.0 / alpha, 4.0 / (alpha * alpha)).value +
         std::sqrt(2.0 * alpha / std::numbers::pi);
}

/// Minimizes the smoothing objective over alpha. In x = ln alpha the objective is a sum of
/// exponentials e^{-x}, e^{-2x}, e^{x/2} with nonnegative weights, hence convex and unimodal.
inline double optimal_smoothing_alpha(const MultinomialModel& m, double lambda, double tol = 1e-10) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = std::log(1e-12), b = std::log(1e8);
  auto f = [&](double x) { return kolmogorov_smoothing_objective(m, lambda, std::exp(x)); };
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return std::exp(0.5 * (a + b));
}

inline BoundReport kolmogorov_bound_pd(const MultinomialModel& m, double lambda, const AlphaPolicy& policy = {}) {
  m.validate();
  detail::require_lambda(lambda);
  const double q = m.q();
  BoundReport rep;
  rep.metric = Metric::kolmogorov;
  rep.details["q"] = q;
  rep.details["lambda"] = lambda;
  double raw = 0.0;
  if (policy.kind == AlphaPolicy::Kind::closed_form) {
    rep.provenance = "power-divergence/kolmogorov/closed-form";
    const double d = lambda - 1.0;
    raw = std::pow(q, -0.2) * (policy.C1 + policy.C2 * d * d +
                               policy.C3 * std::fabs(d * (lambda - 2.0) * (12.0 * lambda + 13.0)) /
                                   ((lambda + 1.0) * std::pow(q, 0.4)));
    rep.certified = false;
    rep.assume("constants C1, C2, C3 supplied by the caller", AssumptionStatus::user_asserted);
  } else {
    const double alpha =
        policy.kind == AlphaPolicy::Kind::optimize ? optimal_smoothing_alpha(m, lambda) : policy.alpha;
    if (!(alpha > 0.0)) throw PreconditionError("Kolmogorov bound: alpha must be positive");
    rep.provenance = policy.kind == AlphaPolicy::Kind::optimize ? "power-divergence/kolmogorov/optimized"
                                                                 : "power-divergence/kolmogorov/fixed";
    const auto ev = detail::smooth_pd(m, lambda, 2.0 / alpha, 4.0 / (alpha * alpha));
    const double tail = std::sqrt(2.0 * alpha / std::numbers::pi);
    raw = ev.value + tail;
    rep.details["alpha"] = alpha;
    rep.details["smoothing"] = ev.value;
    rep.details["window"] = tail;
    rep.certified = ev.certified;
    rep.assume("smooth bound valid at (2/alpha, 4/alpha^2)",
               ev.certified ? AssumptionStatus::checked : AssumptionStatus::violated);
  }
  rep.details["uncapped"] = raw;
  rep.capped = raw > 1.0;
  rep.value = std::min(raw, 1.0);
  if (rep.capped) rep.certified = true;
  rep.add_term(rep.capped ? "trivial bound" : "smoothed bound", rep.value);
  return rep;
}

/// |E[W^3 h'(W^2)]| for the standardized Bernoulli sum of the model.
inline BoundReport w3h_prime_bound(const MultinomialModel& m, const TestFunctionNorms& norms) {
  m.validate();
  detail::require_smooth_norms(norms, "w3h_prime_bound");
  const double h1 = norms.norm(1), h2 = norms.norm(2);
  const auto ev = detail::cubic_term(m, h1, h2);
  const auto ch = cubic_term_chain();
  BoundReport rep;
  rep.metric = Metric::smooth;
  rep.provenance = "cubic-term";
  rep.value = ev.flat;
  rep.add_term("2976 (||h'|| + ||h''||)/sqrt(n p1 p2)", ev.flat);
  rep.details["chain"] = ev.chain;
  rep.details["exact_constants"] = ev.exact;
  rep.details["trivial"] = ev.trivial;
  rep.details["chain:alpha_A"] = ch.alpha_A;
  rep.details["chain:c_beta"] = ch.c_beta;
  rep.details["chain:gamma"] = ch.gamma;
  rep.details["chain:h1_const"] = ch.first_const;
  rep.details["chain:h1_q"] = ch.first_q;
  rep.details["chain:h2_const"] = ch.second_const;
  rep.details["chain:h2_q"] = ch.second_q;
  rep.certified = ev.certified;
  rep.assume("flat constant 2976 dominates the chain or the trivial bound",
             ev.certified ? AssumptionStatus::checked : AssumptionStatus::violated);
  return rep;
}

/// Rounded-constant bounds for W^2 with i.i.d. standardized summands of the given law.
inline BoundReport w2_generic_bounds(Metric metric, const MomentOracle& law, std::int64_t n,
                                     const TestFunctionNorms& norms = {}) {
  law.validate();
  if (n < 1) throw PreconditionError("w2_generic_bounds: n must be >= 1");
  const double nn = static_cast<double>(n);
  BoundReport rep;
  rep.metric = metric;
  if (metric == Metric::wasserstein) {
    rep.provenance = "squared-sum/wasserstein";
    const double m3 = law.finite_abs_moment(3, "w2_generic_bounds");
    const double m4 = law.finite_abs_moment(4, "w2_generic_bounds");
    rep.add_term("24 E|X|^3/sqrt(n)", 24.0 * m3 / std::sqrt(nn));
    rep.add_term("17 E X^4/n", 17.0 * m4 / nn);
    rep.value = rep.term_sum();
    const auto c = squared_sum_wasserstein_constants();
    const double exact = (c.a * m3 + c.b * m4 / std::sqrt(nn)) / std::sqrt(nn);
    rep.details["exact_constants"] = exact;
    rep.certified = rep.value >= exact;
    return rep;
  }
  if (metric == Metric::smooth) {
    detail::require_smooth_norms(norms, "w2_generic_bounds");
    rep.provenance = "squared-sum/smooth";
    const double h = norms.norm(1) + norms.norm(2);
    const double m3 = law.finite_abs_moment(3, "w2_generic_bounds");
    const double m4 = law.finite_abs_moment(4, "w2_generic_bounds");
    const double m5 = law.finite_abs_moment(5, "w2_generic_bounds");
    const double m6 = law.finite_abs_moment(6, "w2_generic_bounds");
    const double skew = std::fabs(law.signed_moment(3));
    rep.add_term("187 E X^4", h / nn * 187.0 * m4);
    rep.add_term("131 E X^6/n", h / nn * 131.0 * m6 / nn);
    rep.add_term("|E X^3| 704 E|X|^3", h / nn * skew * 704.0 * m3);
    rep.add_term("|E X^3| 468 E|X|^5/n", h / nn * skew * 468.0 * m5 / nn);
    rep.value = rep.term_sum();
    const auto c = squared_sum_smooth_constants();
    const double exact = h / nn * (c.c1 * m4 + c.c2 * m6 / nn + skew * (c.c3 * m3 + c.c4 * m5 / nn));
    rep.details["exact_constants"] = exact;
    rep.certified = rep.value >= exact;
    rep.assume("rounded constants 187 and 704 dominate the exact ones",
               rep.certified ? AssumptionStatus::checked : AssumptionStatus::violated);
    return rep;
  }
  throw UnsupportedError("w2_generic_bounds: unsupported metric " + to_string(metric));
}

}  // namespace stein
