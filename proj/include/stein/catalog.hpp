#pragma once

/// \file catalog.hpp
/// Named test functions h and transformations g used by the verification tools, with their
/// derivative norms and dominating polynomials.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "stein/errors.hpp"
#include "stein/smooth_function.hpp"
#include "stein/types.hpp"

namespace stein::catalog {

/// g(w) = w^q for integer q >= 1, with all derivatives supplied.
inline SmoothFunction monomial(int q) {
  if (q < 1) throw PreconditionError("monomial: q must be >= 1");
  std::vector<SmoothFunction::ScalarFn> derivs;
  for (int k = 0; k <= q + 6; ++k) {
    double c = 1.0;
    for (int j = 0; j < k; ++j) c *= (q - j);
    const int e = q - k;
    if (k > q) {
      derivs.emplace_back([](double) { return 0.0; });
    } else {
      derivs.emplace_back([c, e](double x) { return c * std::pow(x, e); });
    }
  }
  return SmoothFunction::univariate(std::move(derivs), q % 2 == 0 ? Parity::even : Parity::odd)
      .named(q == 1 ? "linear" : "w^" + std::to_string(q));
}

/// Dominating polynomial A + B|w|^r for g(w) = w^q in the class of order N.
/// star: only |g^{(N)}| <= P. Otherwise |g^{(k)}|^{N/k} <= P for k = 1..N.
inline DominatingPolynomial monomial_dominating(int q, int N, bool star) {
  if (N < 1) return DominatingPolynomial::univariate(0.0, 0.0, 0.0);
  auto coeff = [q](int k) {
    double c = 1.0;
    for (int j = 0; j < k; ++j) c *= (q - j);
    return c;
  };
  if (star) {
    if (N > q) return DominatingPolynomial::univariate(0.0, 0.0, 0.0);
    if (N == q) return DominatingPolynomial::univariate(coeff(N), 0.0, 0.0);
    return DominatingPolynomial::univariate(0.0, coeff(N), q - N);
  }
  // Terms c_k^{N/k} |w|^{e_k}, e_k = (q-k)N/k. With r = max e_k: c|w|^e <= c for |w| < 1 and
  // c|w|^e <= c|w|^r for |w| >= 1, so A collects every term with e < r and B every term with e > 0.
  double r = 0.0;
  for (int k = 1; k <= std::min(N, q); ++k) r = std::max(r, static_cast<double>(q - k) * N / k);
  double A = 0.0, B = 0.0;
  for (int k = 1; k <= std::min(N, q); ++k) {
    const double c = std::pow(coeff(k), static_cast<double>(N) / k);
    const double e = static_cast<double>(q - k) * N / k;
    if (e < r || r == 0.0) A = std::max(A, c);
    if (e > 0.0) B = std::max(B, c);
  }
  return DominatingPolynomial::univariate(A, B, r);
}

inline SmoothFunction sine() {
  return SmoothFunction::univariate({[](double x) { return std::sin(x); }, [](double x) { return std::cos(x); },
                                     [](double x) { return -std::sin(x); }, [](double x) { return -std::cos(x); },
                                     [](double x) { return std::sin(x); }, [](double x) { return std::cos(x); },
                                     [](double x) { return -std::sin(x); }},
                                    Parity::odd)
      .named("sin");
}

inline SmoothFunction cosine() {
  return SmoothFunction::univariate({[](double x) { return std::cos(x); }, [](double x) { return -std::sin(x); },
                                     [](double x) { return -std::cos(x); }, [](double x) { return std::sin(x); },
                                     [](double x) { return std::cos(x); }, [](double x) { return -std::sin(x); },
                                     [](double x) { return -std::cos(x); }},
                                    Parity::even)
      .named("cos");
}

/// e^{-x}; its derivative norms equal 1 on [0, inf), the range of nonnegative g.
inline SmoothFunction exp_neg() {
  std::vector<SmoothFunction::ScalarFn> d;
  for (int k = 0; k <= 6; ++k) {
    const double sign = k % 2 == 0 ? 1.0 : -1.0;
    d.emplace_back([sign](double x) { return sign * std::exp(-x); });
  }
  return SmoothFunction::univariate(std::move(d)).named("exp_neg");
}

/// g(w) = w_1^2 + ... + w_d^2.
inline SmoothFunction sum_of_squares(std::size_t d) {
  auto value = [](std::span<const double> w) {
    double s = 0.0;
    for (double v : w) s += v * v;
    return s;
  };
  auto partial = [](std::span<const double> w, std::span<const std::size_t> idx) {
    if (idx.size() == 1) return 2.0 * w[idx[0]];
    if (idx.size() == 2) return idx[0] == idx[1] ? 2.0 : 0.0;
    return 0.0;
  };
  return SmoothFunction(d, value, partial, 6, Parity::even).named("sum_of_squares");
}

struct TestFunctionEntry {
  SmoothFunction h;
  TestFunctionNorms norms;
};

inline TestFunctionEntry test_function(const std::string& name) {
  if (name == "identity") return {SmoothFunction::identity(), TestFunctionNorms::identity(8)};
  if (name == "sin") return {sine(), TestFunctionNorms::unit(6)};
  if (name == "cos") return {cosine(), TestFunctionNorms::unit(6)};
  if (name == "exp_neg") return {exp_neg(), TestFunctionNorms::unit(6)};
  throw PreconditionError("unknown test function '" + name + "' (known: identity, sin, cos, exp_neg)");
}

/// Univariate transformation by name: linear, quadratic, quartic, sextic.
inline int transformation_degree(const std::string& name) {
  static const std::map<std::string, int> table{{"linear", 1}, {"quadratic", 2}, {"quartic", 4}, {"sextic", 6}};
  const auto it = table.find(name);
  if (it == table.end()) {
    throw PreconditionError("unknown transformation '" + name + "' (known: linear, quadratic, quartic, sextic)");
  }
  return it->second;
}

inline SmoothFunction transformation(const std::string& name) { return monomial(transformation_degree(name)); }

}  // namespace stein::catalog
