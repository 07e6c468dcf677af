#pragma once

/// \file quadrature.hpp
/// Gauss rules and adaptive Gauss-Kronrod integration used throughout the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <vector>

#include "stein/errors.hpp"

namespace stein::quad {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n.
inline GaussRule gauss_legendre(std::size_t n) {
  if (n == 0) throw DomainError("gauss_legendre: need at least one node");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    long double z = std::cos(std::numbers::pi_v<long double> * (static_cast<long double>(i) + 0.75L) /
                             (static_cast<long double>(n) + 0.5L));
    long double dp = 0.0L;
    for (int iter = 0; iter < 100; ++iter) {
      long double p0 = 1.0L;
      long double p1 = 0.0L;
      for (std::size_t j = 1; j <= n; ++j) {
        const long double p2 = p1;
        p1 = p0;
        const auto jj = static_cast<long double>(j);
        p0 = ((2.0L * jj - 1.0L) * z * p1 - (jj - 1.0L) * p2) / jj;
      }
      dp = static_cast<long double>(n) * (z * p0 - p1) / (z * z - 1.0L);
      const long double step = p0 / dp;
      z -= step;
      if (std::fabs(step) < 1e-19L) break;
    }
    const long double w = 2.0L / ((1.0L - z * z) * dp * dp);
    rule.nodes[i] = -static_cast<double>(z);
    rule.nodes[n - 1 - i] = static_cast<double>(z);
    rule.weights[i] = static_cast<double>(w);
    rule.weights[n - 1 - i] = static_cast<double>(w);
  }
  return rule;
}

/// Gauss-Hermite rule for expectations under N(0,1): E f(Z) ~= sum w_i f(z_i).
inline GaussRule gauss_hermite_normal(std::size_t n) {
  if (n == 0) throw DomainError("gauss_hermite_normal: need at least one node");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const long double pim4 = 0.7511255444649424828587030047762276930510L;  // pi^{-1/4}
  const auto nn = static_cast<long double>(n);
  const std::size_t half = (n + 1) / 2;
  long double z = 0.0L;
  for (std::size_t i = 0; i < half; ++i) {
    // Initial guesses for the physicists' Hermite roots, largest first.
    if (i == 0) {
      z = std::sqrt(2.0L * nn + 1.0L) - 1.85575L * std::pow(2.0L * nn + 1.0L, -0.16667L);
    } else if (i == 1) {
      z -= 1.14L * std::pow(nn, 0.426L) / z;
    } else if (i == 2) {
      z = 1.86L * z - 0.86L * static_cast<long double>(rule.nodes[0]);
    } else if (i == 3) {
      z = 1.91L * z - 0.91L * static_cast<long double>(rule.nodes[1]);
    } else {
      z = 2.0L * z - static_cast<long double>(rule.nodes[i - 2]);
    }
    long double pp = 0.0L;
    for (int iter = 0; iter < 200; ++iter) {
      long double p1 = pim4;
      long double p2 = 0.0L;
      for (std::size_t j = 1; j <= n; ++j) {
        const long double p3 = p2;
        p2 = p1;
        const auto jj = static_cast<long double>(j);
        p1 = z * std::sqrt(2.0L / jj) * p2 - std::sqrt((jj - 1.0L) / jj) * p3;
      }
      pp = std::sqrt(2.0L * nn) * p2;
      const long double step = p1 / pp;
      z -= step;
      if (std::fabs(step) < 1e-18L * std::max(1.0L, std::fabs(z))) break;
    }
    // Temporarily keep physicists' nodes for the extrapolated guesses above.
    rule.nodes[i] = static_cast<double>(z);
    rule.nodes[n - 1 - i] = static_cast<double>(-z);
    const long double w = 2.0L / (pp * pp);
    rule.weights[i] = static_cast<double>(w);
    rule.weights[n - 1 - i] = static_cast<double>(w);
  }
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  for (std::size_t i = 0; i < n; ++i) {
    rule.nodes[i] *= -std::numbers::sqrt2;  // ascending order, probabilists' scale
    rule.weights[i] *= inv_sqrt_pi;
  }
  return rule;
}

/// Composite rule: `panels` equal sub-intervals of [a, b], each with `base` (on [-1, 1]).
template <class F>
double composite(const F& f, double a, double b, std::size_t panels, const GaussRule& base) {
  const double width = (b - a) / static_cast<double>(panels);
  double total = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + width * static_cast<double>(p);
    const double mid = lo + 0.5 * width;
    double panel = 0.0;
    for (std::size_t k = 0; k < base.size(); ++k) panel += base.weights[k] * f(mid + 0.5 * width * base.nodes[k]);
    total += 0.5 * width * panel;
  }
  return total;
}

struct AdaptiveOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  std::size_t max_intervals = 4000;
  bool throw_on_failure = true;
};

struct IntegrationResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t intervals = 0;
};

namespace detail {

// Kronrod 15-point abscissae/weights and the embedded 7-point Gauss weights (QUADPACK qk15).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  double abs_value;  // integral of |f|, the scale of rounding error
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <class F>
Segment kronrod15(const F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  double resabs = std::fabs(fc) * kWgk[7];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    resk += kWgk[j] * (f1 + f2);
    resabs += kWgk[j] * (std::fabs(f1) + std::fabs(f2));
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  const double value = resk * half;
  const double err = std::fabs((resk - resg) * half);
  return {a, b, value, err, std::fabs(resabs * half)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration on a finite interval.
template <class F>
IntegrationResult integrate(const F& f, double a, double b, const AdaptiveOptions& opts = {}) {
  if (a == b) return {};
  if (!(std::isfinite(a) && std::isfinite(b))) throw DomainError("integrate: finite limits required");
  std::priority_queue<detail::Segment> heap;
  auto first = detail::kronrod15(f, a, b);
  double total = first.value;
  double total_err = first.error;
  double total_abs = first.abs_value;
  heap.push(first);
  std::size_t count = 1;
  constexpr double kRoundoff = 50.0 * std::numeric_limits<double>::epsilon();
  while (total_err > std::max({opts.abs_tol, opts.rel_tol * std::fabs(total), kRoundoff * total_abs})) {
    if (count >= opts.max_intervals) {
      if (opts.throw_on_failure) {
        throw QuadratureError("adaptive integration did not converge", total + total_err, total);
      }
      break;
    }
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;  // interval cannot be split further in double precision
    }
    auto left = detail::kronrod15(f, worst.a, mid);
    auto right = detail::kronrod15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    total_abs += left.abs_value + right.abs_value - worst.abs_value;
    heap.push(left);
    heap.push(right);
    ++count;
  }
  // Re-sum to shed accumulated rounding from the running updates.
  double sum = 0.0;
  double err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return {sum, err, count};
}

/// Integral over [a, inf) through x = a + u / (1 - u).
template <class F>
IntegrationResult integrate_to_infinity(const F& f, double a, const AdaptiveOptions& opts = {}) {
  auto mapped = [&](double u) {
    const double one_minus = 1.0 - u;
    const double x = a + u / one_minus;
    const double jac = 1.0 / (one_minus * one_minus);
    const double v = f(x);
    return v == 0.0 ? 0.0 : v * jac;
  };
  return integrate(mapped, 0.0, 1.0, opts);
}

}  // namespace stein::quad
