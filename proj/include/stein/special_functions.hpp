#pragma once

/// \file special_functions.hpp
/// Scalar special functions and combinatorial constants consumed by the bound formulas:
/// Gamma and incomplete Gamma, absolute normal moments, Stirling and Bell numbers,
/// the Stirling-weighted test-function norm, and the solution-bound coefficient triples.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stein/errors.hpp"
#include "stein/quadrature.hpp"

namespace stein {

inline double gamma_fn(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("gamma_fn: x must be positive and finite");
  return std::tgamma(x);
}

namespace detail {

inline constexpr int kIncGammaMaxIter = 10000;
inline constexpr double kIncGammaEps = 1e-16;

// sum_{k>=0} x^k / (a (a+1) ... (a+k)); gamma(a, x) = e^{-x} x^a * series.
inline double lower_gamma_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int k = 1; k < kIncGammaMaxIter; ++k) {
    term *= x / (a + k);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kIncGammaEps) return sum;
  }
  throw QuadratureError("incomplete gamma series did not converge", sum, sum);
}

// Modified Lentz evaluation of the continued fraction with Gamma(a, x) = e^{-x} x^a * cf.
inline double upper_gamma_cf(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kIncGammaMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kIncGammaEps) return h;
  }
  throw QuadratureError("incomplete gamma continued fraction did not converge", h, h);
}

inline void check_incgamma_domain(double a, double x) {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("incomplete gamma: a must be positive");
  if (!(x >= 0.0) || std::isnan(x)) throw DomainError("incomplete gamma: x must be nonnegative");
}

}  // namespace detail

/// e^x * Gamma(a, x). Finite for large x where Gamma(a, x) itself underflows.
inline double upper_incomplete_gamma_scaled(double a, double x) {
  detail::check_incgamma_domain(a, x);
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) {
    const double lower = std::exp(a * std::log(x) - x) * detail::lower_gamma_series(a, x);
    return std::exp(x) * (std::tgamma(a) - lower);
  }
  return std::exp(a * std::log(x)) * detail::upper_gamma_cf(a, x);
}

/// Upper incomplete gamma Gamma(a, x) = int_x^inf u^{a-1} e^{-u} du.
inline double upper_incomplete_gamma(double a, double x) {
  detail::check_incgamma_domain(a, x);
  if (x == 0.0) return std::tgamma(a);
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) {
    const double lower = std::exp(a * std::log(x) - x) * detail::lower_gamma_series(a, x);
    return std::tgamma(a) - lower;
  }
  return std::exp(a * std::log(x) - x) * detail::upper_gamma_cf(a, x);
}

/// Regularized lower incomplete gamma P(a, x).
inline double regularized_lower_gamma(double a, double x) {
  detail::check_incgamma_domain(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) {
    return std::exp(a * std::log(x) - x - std::lgamma(a)) * detail::lower_gamma_series(a, x);
  }
  return 1.0 - std::exp(a * std::log(x) - x - std::lgamma(a)) * detail::upper_gamma_cf(a, x);
}

/// r-th absolute moment of N(0, 1): 2^{r/2} Gamma((r+1)/2) / sqrt(pi).
inline double mu_abs_moment(double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("mu_abs_moment: r must be nonnegative");
  return std::exp(0.5 * r * std::numbers::ln2 + std::lgamma(0.5 * (r + 1.0))) / std::sqrt(std::numbers::pi);
}

/// Stirling number of the second kind {n brace k}, exact.
inline std::uint64_t stirling2(int n, int k) {
  if (n < 1 || k < 1 || k > n) {
    throw DomainError("stirling2: need 1 <= k <= n, got n=" + std::to_string(n) + ", k=" + std::to_string(k));
  }
  // Row-by-row recurrence {n,k} = k{n-1,k} + {n-1,k-1}.
  std::vector<std::uint64_t> row(static_cast<std::size_t>(k) + 1, 0);
  row[0] = 1;  // {0,0}
  for (int i = 1; i <= n; ++i) {
    for (int j = std::min(i, k); j >= 1; --j) {
      std::uint64_t scaled = 0;
      std::uint64_t next = 0;
      if (__builtin_mul_overflow(static_cast<std::uint64_t>(j), row[static_cast<std::size_t>(j)], &scaled) ||
          __builtin_add_overflow(scaled, row[static_cast<std::size_t>(j) - 1], &next)) {
        throw DomainError("stirling2: result overflows 64 bits");
      }
      row[static_cast<std::size_t>(j)] = next;
    }
    row[0] = 0;
  }
  return row[static_cast<std::size_t>(k)];
}

/// Bell number B_p = sum_k {p brace k}.
inline std::uint64_t bell(int p) {
  if (p < 1) throw DomainError("bell: p must be >= 1");
  std::uint64_t total = 0;
  for (int k = 1; k <= p; ++k) {
    if (__builtin_add_overflow(total, stirling2(p, k), &total)) throw DomainError("bell: result overflows 64 bits");
  }
  return total;
}

/// h_n = sum_{k=1}^n {n brace k} ||h^{(k)}||, with n = norms.size().
inline double h_weight(std::span<const double> norms) {
  if (norms.empty()) throw DomainError("h_weight: need at least one norm");
  const int n = static_cast<int>(norms.size());
  double total = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double norm = norms[static_cast<std::size_t>(k) - 1];
    if (!(norm >= 0.0)) throw DomainError("h_weight: norms must be nonnegative");
    total += static_cast<double>(stirling2(n, k)) * norm;
  }
  return total;
}

/// c_r = max{1, 2^{r-1}}, the constant in |a+b|^r <= c_r (|a|^r + |b|^r).
inline double c_const(double r) { return std::max(1.0, std::pow(2.0, r - 1.0)); }

enum class AbcVariant { plain, tilde };

struct AbcCoefficients {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  AbcVariant variant = AbcVariant::plain;
};

/// Coefficient triple of the univariate third-derivative bounds.
/// plain: (4, 4, 2 mu_r) for r <= 1, (r+3, r+5, (r+1) mu_{r+1}) for r > 1.
/// tilde: (10, 10, 10 mu_{r+1}) for r <= 1, (r^2+r+8, r^2+2r+18, (2r^2+r+5) mu_{r+1}) for r > 1.
inline AbcCoefficients abc_coeffs(double r, AbcVariant variant) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("abc_coeffs: r must be nonnegative");
  if (variant == AbcVariant::plain) {
    if (r <= 1.0) return {4.0, 4.0, 2.0 * mu_abs_moment(r), variant};
    return {r + 3.0, r + 5.0, (r + 1.0) * mu_abs_moment(r + 1.0), variant};
  }
  if (r <= 1.0) return {10.0, 10.0, 10.0 * mu_abs_moment(r + 1.0), variant};
  return {r * r + r + 8.0, r * r + 2.0 * r + 18.0, (2.0 * r * r + r + 5.0) * mu_abs_moment(r + 1.0), variant};
}

/// T_r(w) = w e^{w^2/2} int_w^inf t^r e^{-t^2/2} dt, through the incomplete-gamma closed form.
inline double t_r(double r, double w) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("t_r: r must be nonnegative");
  if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("t_r: w must be positive");
  const double a = 0.5 * (r + 1.0);
  const double x = 0.5 * w * w;
  return std::pow(2.0, 0.5 * (r - 1.0)) * w * upper_incomplete_gamma_scaled(a, x);
}

enum class IJKind { I_nr, J_nr, I_mnr, J_mnr };

/// Sharpened constants replacing 2^{r/2} and 3^{r/2} in the solution bounds.
/// The arcsine substitution t = sin(theta) removes the 1/sqrt(1-t^2) endpoint singularity.
inline double ij_constants(IJKind kind, std::optional<int> m, int n, double r) {
  if (n < 1) throw DomainError("ij_constants: n must be >= 1");
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("ij_constants: r must be nonnegative");
  const bool two_dim = kind == IJKind::I_mnr || kind == IJKind::J_mnr;
  if (two_dim && (!m || *m < 1)) throw DomainError("ij_constants: two-index constants need m >= 1");
  if (!two_dim && m) throw DomainError("ij_constants: one-index constants take no m");

  constexpr double half_pi = 0.5 * std::numbers::pi;
  quad::AdaptiveOptions outer{1e-14, 1e-11, 4000, true};
  quad::AdaptiveOptions inner{1e-15, 1e-12, 4000, true};
  const double nd = n;

  switch (kind) {
    case IJKind::I_nr: {
      auto f = [&](double th) {
        const double s = std::sin(th), c = std::cos(th);
        return std::pow(s, nd - 1.0) * c * std::pow(s + c, r);
      };
      return nd * quad::integrate(f, 0.0, half_pi, outer).value;
    }
    case IJKind::J_nr: {
      auto f = [&](double th) {
        const double s = std::sin(th), c = std::cos(th);
        return std::pow(s, nd - 1.0) * std::pow(s + c, r);
      };
      const double pref = 2.0 * std::exp(std::lgamma(0.5 * (nd + 1.0)) - std::lgamma(0.5 * nd)) /
                          std::sqrt(std::numbers::pi);
      return pref * quad::integrate(f, 0.0, half_pi, outer).value;
    }
    case IJKind::I_mnr:
    case IJKind::J_mnr: {
      const double md = *m;
      const bool is_j = kind == IJKind::J_mnr;
      auto outer_f = [&](double th) {
        const double st = std::sin(th), ct = std::cos(th);
        auto inner_f = [&](double ph) {
          const double ss = std::sin(ph), cs = std::cos(ph);
          const double base = ss * st + st * cs + ct;
          double v = std::pow(ss, nd - 1.0) * std::pow(base, r);
          if (!is_j) v *= cs;  // ds = cos(phi) dphi
          return v;
        };
        double v = std::pow(st, md + nd - 1.0) * quad::integrate(inner_f, 0.0, half_pi, inner).value;
        if (!is_j) v *= ct;
        return v;
      };
      const double integral = quad::integrate(outer_f, 0.0, half_pi, outer).value;
      if (!is_j) return nd * (md + nd) * integral;
      const double pref = 4.0 *
                          std::exp(std::lgamma(0.5 * (nd + 1.0)) + std::lgamma(0.5 * (md + nd + 1.0)) -
                                   std::lgamma(0.5 * nd) - std::lgamma(0.5 * (md + nd))) /
                          std::numbers::pi;
      return pref * integral;
    }
  }
  throw DomainError("ij_constants: unknown kind");
}

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Standard normal density.
inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

/// CDF of the chi-square distribution with one degree of freedom. Returns 0 for x < 0.
inline double chi2_1_cdf(double x) {
  if (std::isnan(x)) throw DomainError("chi2_1_cdf: NaN argument");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return std::erf(std::sqrt(0.5 * x));
}

/// Survival function P(Y > x) of chi-square(1), accurate in the far tail.
inline double chi2_1_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return std::erfc(std::sqrt(0.5 * x));
}

/// Chi-square(1) density.
inline double chi2_1_pdf(double x) {
  if (x <= 0.0) return 0.0;
  return std::exp(-0.5 * x) / std::sqrt(2.0 * std::numbers::pi * x);
}

/// Partial first moment E[Y; Y <= x] for Y ~ chi-square(1). Equals the chi-square(3) CDF.
inline double chi2_1_partial_mean(double x) {
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double s = std::sqrt(x);
  return std::erf(s / std::numbers::sqrt2) - 2.0 * s * normal_pdf(s);
}

/// Partial second moment E[Y^2; Y <= x] for Y ~ chi-square(1). Equals 3 times the chi-square(5) CDF.
inline double chi2_1_partial_second_moment(double x) {
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 3.0;
  const double s = std::sqrt(x);
  return 3.0 * chi2_1_partial_mean(x) - 2.0 * x * s * normal_pdf(s);
}

}  // namespace stein
