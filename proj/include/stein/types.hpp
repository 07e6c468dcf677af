#pragma once

/// \file types.hpp
/// Domain types shared by the solution, limit-theorem and chi-square modules.

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "stein/errors.hpp"
#include "stein/special_functions.hpp"

namespace stein {

/// P(w) = A + B * sum_i |w_i|^{r_i}, the polynomial majorant of the derivatives of g.
struct DominatingPolynomial {
  double A = 0.0;
  double B = 0.0;
  std::vector<double> exponents;

  DominatingPolynomial() = default;
  DominatingPolynomial(double a, double b, std::vector<double> r) : A(a), B(b), exponents(std::move(r)) {
    validate();
  }

  /// Univariate form A + B |w|^r.
  static DominatingPolynomial univariate(double a, double b, double r) { return {a, b, {r}}; }

  std::size_t dimension() const noexcept { return exponents.size(); }

  void validate() const {
    if (!(A >= 0.0) || !(B >= 0.0)) throw PreconditionError("DominatingPolynomial: A and B must be nonnegative");
    if (exponents.empty()) throw PreconditionError("DominatingPolynomial: need at least one exponent");
    for (double r : exponents) {
      if (!(r >= 0.0) || !std::isfinite(r)) throw PreconditionError("DominatingPolynomial: exponents must be >= 0");
    }
  }

  double operator()(const std::vector<double>& w) const {
    if (w.size() != exponents.size()) throw PreconditionError("DominatingPolynomial: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += std::pow(std::fabs(w[i]), exponents[i]);
    return A + B * s;
  }
};

/// Supremum norms ||h^{(1)}||, ..., ||h^{(K)}|| of a test function. Derived weights are
/// computed on demand.
struct TestFunctionNorms {
  std::vector<double> norms;

  TestFunctionNorms() = default;
  explicit TestFunctionNorms(std::vector<double> values) : norms(std::move(values)) {
    for (double v : norms) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw PreconditionError("TestFunctionNorms: norms must be finite and >= 0");
    }
  }

  /// Norms of h(w) = w: ||h'|| = 1 and all higher derivatives vanish.
  static TestFunctionNorms identity(std::size_t order) {
    std::vector<double> v(order, 0.0);
    if (order > 0) v[0] = 1.0;
    return TestFunctionNorms(std::move(v));
  }

  /// All norms equal to one (the d_p ball).
  static TestFunctionNorms unit(std::size_t order) { return TestFunctionNorms(std::vector<double>(order, 1.0)); }

  std::size_t order() const noexcept { return norms.size(); }

  double norm(std::size_t k) const {
    require(k);
    return norms[k - 1];
  }

  /// Stirling-weighted h_n.
  double h(std::size_t n) const {
    require(n);
    return h_weight(std::span<const double>(norms.data(), n));
  }

  /// Plain sum h~_p = sum_{j<=p} ||h^{(j)}||.
  double h_tilde(std::size_t p) const {
    require(p);
    double s = 0.0;
    for (std::size_t j = 0; j < p; ++j) s += norms[j];
    return s;
  }

 private:
  void require(std::size_t n) const {
    if (n == 0) throw PreconditionError("TestFunctionNorms: order must be >= 1");
    if (n > norms.size()) {
      throw PreconditionError("TestFunctionNorms: need ||h^(" + std::to_string(n) + ")|| but only " +
                              std::to_string(norms.size()) + " norms were supplied");
    }
  }
};

enum class Metric { wasserstein, smooth, kolmogorov, smooth_p };

inline std::string to_string(Metric m) {
  switch (m) {
    case Metric::wasserstein: return "wasserstein";
    case Metric::smooth: return "smooth";
    case Metric::kolmogorov: return "kolmogorov";
    case Metric::smooth_p: return "smooth_p";
  }
  return "unknown";
}

enum class AssumptionStatus { checked, user_asserted, violated };

inline std::string to_string(AssumptionStatus s) {
  switch (s) {
    case AssumptionStatus::checked: return "checked";
    case AssumptionStatus::user_asserted: return "user_asserted";
    case AssumptionStatus::violated: return "violated";
  }
  return "unknown";
}

struct Assumption {
  std::string clause;
  AssumptionStatus status = AssumptionStatus::checked;
};

struct ReportTerm {
  std::string label;
  double value = 0.0;
};

/// A bound value together with its breakdown, checked assumptions and provenance.
struct BoundReport {
  double value = 0.0;
  std::vector<ReportTerm> terms;
  std::vector<Assumption> assumptions;
  Metric metric = Metric::smooth;
  std::string provenance;
  bool certified = true;
  bool capped = false;
  std::map<std::string, double> details;

  void add_term(std::string label, double v) { terms.push_back({std::move(label), v}); }
  void assume(std::string clause, AssumptionStatus status) { assumptions.push_back({std::move(clause), status}); }

  double term_sum() const {
    double s = 0.0;
    for (const auto& t : terms) s += t.value;
    return s;
  }
};

}  // namespace stein
