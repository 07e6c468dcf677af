#pragma once

/// \file stein_solution.hpp
/// Quadrature construction of the multivariate normal Stein solution f_h for test functions
/// h(g(.)), the second-level solution psi_m, the analytic bounds on their derivatives, and
/// numerical dominance checks.
///
/// Outer integrals over t in (0, 1) use t = sin(theta), theta in (0, pi/2), with composite
/// Gauss-Legendre panels doubled until two successive estimates agree.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stein/errors.hpp"
#include "stein/quadrature.hpp"
#include "stein/smooth_function.hpp"
#include "stein/special_functions.hpp"
#include "stein/types.hpp"

namespace stein {

// ---------------------------------------------------------------------------------------------
// Covariance
// ---------------------------------------------------------------------------------------------

/// Non-negative definite covariance matrix with a cached symmetric square root.
class CovarianceSpec {
 public:
  enum class Kind { identity, diagonal, general };

  CovarianceSpec() : CovarianceSpec(Kind::identity, Eigen::MatrixXd::Identity(1, 1)) {}

  static CovarianceSpec identity(std::size_t d) {
    if (d == 0) throw PreconditionError("CovarianceSpec: dimension must be >= 1");
    return {Kind::identity, Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))};
  }

  static CovarianceSpec diagonal(const std::vector<double>& variances) {
    if (variances.empty()) throw PreconditionError("CovarianceSpec: dimension must be >= 1");
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(variances.size()),
                                              static_cast<Eigen::Index>(variances.size()));
    for (std::size_t i = 0; i < variances.size(); ++i) {
      if (!(variances[i] >= 0.0) || !std::isfinite(variances[i])) {
        throw PreconditionError("CovarianceSpec: diagonal entries must be finite and >= 0");
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = variances[i];
    }
    return {Kind::diagonal, m};
  }

  static CovarianceSpec general(const std::vector<std::vector<double>>& rows) {
    const auto d = rows.size();
    if (d == 0) throw PreconditionError("CovarianceSpec: dimension must be >= 1");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
      if (rows[i].size() != d) throw PreconditionError("CovarianceSpec: matrix must be square");
      for (std::size_t j = 0; j < d; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    if (!m.allFinite()) throw PreconditionError("CovarianceSpec: entries must be finite");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw PreconditionError("CovarianceSpec: matrix must be symmetric");
    }
    return {Kind::general, 0.5 * (m + m.transpose())};
  }

  Kind kind() const noexcept { return kind_; }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return matrix_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  /// Symmetric square root Sigma^{1/2}.
  const Eigen::MatrixXd& root() const noexcept { return root_; }
  double min_eigenvalue() const noexcept { return min_eig_; }

  bool positive_definite() const noexcept { return min_eig_ > 1e-12 * std::max(1.0, max_eig_); }

  void require_positive_definite(const std::string& clause) const {
    if (!positive_definite()) throw PreconditionError(clause + ": covariance matrix must be positive definite");
  }

  bool is_standard() const {
    return kind_ == Kind::identity || matrix_.isApprox(Eigen::MatrixXd::Identity(matrix_.rows(), matrix_.cols()), 0.0);
  }

  Eigen::MatrixXd inverse() const {
    require_positive_definite("inverse");
    return solver_.operatorInverseSqrt() * solver_.operatorInverseSqrt();
  }

 private:
  CovarianceSpec(Kind kind, Eigen::MatrixXd m) : kind_(kind), matrix_(std::move(m)), solver_(matrix_) {
    const auto& ev = solver_.eigenvalues();
    min_eig_ = ev.minCoeff();
    max_eig_ = ev.maxCoeff();
    if (min_eig_ < -1e-12 * std::max(1.0, max_eig_)) {
      throw PreconditionError("CovarianceSpec: matrix must be non-negative definite");
    }
    const Eigen::VectorXd clipped = ev.cwiseMax(0.0).cwiseSqrt();
    root_ = solver_.eigenvectors() * clipped.asDiagonal() * solver_.eigenvectors().transpose();
  }

  Kind kind_;
  Eigen::MatrixXd matrix_;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver_;
  Eigen::MatrixXd root_;
  double min_eig_ = 0.0;
  double max_eig_ = 0.0;
};

// ---------------------------------------------------------------------------------------------
// Quadrature configuration and Gaussian expectations
// ---------------------------------------------------------------------------------------------

enum class InnerRule {
  gauss_hermite,  ///< fixed Gauss-Hermite rule (tensor product for d > 1)
  adaptive,       ///< adaptive Gauss-Kronrod on z in [-10, 10]; for oscillatory h o g, d = 1 only
};

struct QuadratureConfig {
  std::size_t gauss_hermite_nodes = 64;
  std::size_t t_panels = 200;  ///< upper limit on outer panels
  double tolerance = 1e-8;     ///< relative agreement of successive outer estimates
  InnerRule inner_rule = InnerRule::gauss_hermite;

  void validate() const {
    if (gauss_hermite_nodes < 8) throw PreconditionError("QuadratureConfig: gauss_hermite_nodes must be >= 8");
    if (t_panels < 8) throw PreconditionError("QuadratureConfig: t_panels must be >= 8");
    if (!(tolerance > 0.0)) throw PreconditionError("QuadratureConfig: tolerance must be > 0");
  }
};

namespace detail {

inline constexpr std::size_t kMaxDimension = 4;
inline constexpr std::size_t kPanelRuleNodes = 16;

/// E F(mean + scale * Sigma^{1/2} Z).
class GaussianExpectation {
 public:
  GaussianExpectation(const CovarianceSpec& sigma, const QuadratureConfig& cfg)
      : root_(sigma.root()), cfg_(cfg), dim_(sigma.dimension()) {
    if (dim_ > kMaxDimension) throw PreconditionError("Gaussian expectation: dimension must be <= 4");
    // 64^d nodes are affordable for d <= 2; fewer per axis keeps d = 3, 4 tractable.
    const std::size_t per_axis = dim_ <= 2 ? cfg.gauss_hermite_nodes : std::min<std::size_t>(cfg.gauss_hermite_nodes, 16);
    rule_ = quad::gauss_hermite_normal(per_axis);
    sigma11_ = std::sqrt(std::max(0.0, sigma(0, 0)));
  }

  std::size_t dimension() const noexcept { return dim_; }

  template <class F>
  double operator()(const F& f, std::span<const double> mean, double scale) const {
    if (dim_ == 1) {
      const double sd = scale * sigma11_;
      double x = 0.0;
      auto g1 = [&](double z) {
        x = mean[0] + sd * z;
        return f(std::span<const double>(&x, 1));
      };
      if (cfg_.inner_rule == InnerRule::adaptive) {
        auto weighted = [&](double z) { return g1(z) * normal_pdf(z); };
        return quad::integrate(weighted, -10.0, 10.0, {1e-14, 1e-11, 20000, true}).value;
      }
      double total = 0.0;
      for (std::size_t k = 0; k < rule_.size(); ++k) total += rule_.weights[k] * g1(rule_.nodes[k]);
      return total;
    }
    // Tensor product over Z, then x = mean + scale * Sigma^{1/2} z.
    const std::size_t n = rule_.size();
    std::vector<std::size_t> counter(dim_, 0);
    Eigen::VectorXd z(static_cast<Eigen::Index>(dim_));
    std::vector<double> x(dim_);
    double total = 0.0;
    while (true) {
      double weight = 1.0;
      for (std::size_t i = 0; i < dim_; ++i) {
        z(static_cast<Eigen::Index>(i)) = rule_.nodes[counter[i]];
        weight *= rule_.weights[counter[i]];
      }
      const Eigen::VectorXd y = root_ * z;
      for (std::size_t i = 0; i < dim_; ++i) x[i] = mean[i] + scale * y(static_cast<Eigen::Index>(i));
      total += weight * f(std::span<const double>(x));
      std::size_t axis = 0;
      while (axis < dim_ && ++counter[axis] == n) counter[axis++] = 0;
      if (axis == dim_) break;
    }
    return total;
  }

 private:
  Eigen::MatrixXd root_;
  QuadratureConfig cfg_;
  std::size_t dim_;
  quad::GaussRule rule_;
  double sigma11_ = 1.0;
};

/// Composite Gauss-Legendre over theta in (0, pi/2) with panel doubling.
template <class F>
double theta_integral(const F& integrand, const QuadratureConfig& cfg) {
  static const quad::GaussRule base = quad::gauss_legendre(kPanelRuleNodes);
  constexpr double half_pi = 0.5 * std::numbers::pi;
  std::size_t panels = 4;
  double previous = quad::composite(integrand, 0.0, half_pi, panels, base);
  while (true) {
    panels *= 2;
    if (panels > cfg.t_panels) {
      const double last = previous;
      throw QuadratureError("outer panel quadrature did not reach tolerance", last, last);
    }
    const double current = quad::composite(integrand, 0.0, half_pi, panels, base);
    if (std::fabs(current - previous) <= cfg.tolerance * std::max(1.0, std::fabs(current))) return current;
    if (panels * 2 > cfg.t_panels) {
      throw QuadratureError("outer panel quadrature did not reach tolerance", previous, current);
    }
    previous = current;
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------------------------
// Derivatives of the composition h o g
// ---------------------------------------------------------------------------------------------

/// Partial derivative of h(g(x)) along idx. Univariate g uses Faa di Bruno through partial Bell
/// polynomials; multivariate g supports orders <= 2, or any order when h is the identity.
inline double composite_partial(const SmoothFunction& h, const SmoothFunction& g, std::span<const double> x,
                                std::span<const std::size_t> idx) {
  if (h.dimension() != 1) throw PreconditionError("composite_partial: h must be univariate");
  const std::size_t n = idx.size();
  if (n == 0) return h(g(x));
  if (h.is_identity()) return g.partial(x, idx);
  if (g.dimension() == 1) {
    std::vector<double> dg(n + 1, 0.0);
    std::vector<std::size_t> order;
    for (std::size_t k = 1; k <= n; ++k) {
      order.assign(k, 0);
      dg[k] = g.partial(x, order);
    }
    // bell_row[j][k] = B_{j,k}(g', g'', ...).
    std::vector<std::vector<double>> bell_row(n + 1, std::vector<double>(n + 1, 0.0));
    bell_row[0][0] = 1.0;
    for (std::size_t j = 1; j <= n; ++j) {
      for (std::size_t k = 1; k <= j; ++k) {
        double s = 0.0;
        double binom = 1.0;  // C(j-1, i-1)
        for (std::size_t i = 1; i + k - 1 <= j; ++i) {
          s += binom * dg[i] * bell_row[j - i][k - 1];
          binom = binom * static_cast<double>(j - i) / static_cast<double>(i);
        }
        bell_row[j][k] = s;
      }
    }
    const double gx = g(x);
    double total = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      if (bell_row[n][k] != 0.0) total += h.derivative(static_cast<int>(k), gx) * bell_row[n][k];
    }
    return total;
  }
  const double gx = g(x);
  if (n == 1) return h.derivative(1, gx) * g.partial(x, idx);
  if (n == 2) {
    const double gi = g.partial(x, idx.first(1));
    const double gj = g.partial(x, idx.last(1));
    return h.derivative(2, gx) * gi * gj + h.derivative(1, gx) * g.partial(x, idx);
  }
  throw PreconditionError("composite_partial: multivariate g supports order <= 2 unless h is the identity");
}

// ---------------------------------------------------------------------------------------------
// Solutions
// ---------------------------------------------------------------------------------------------

namespace detail {

inline void check_inputs(const SmoothFunction& h, const SmoothFunction& g, const CovarianceSpec& sigma,
                         std::span<const double> w, const QuadratureConfig& cfg) {
  cfg.validate();
  if (h.dimension() != 1) throw PreconditionError("solution: h must be univariate");
  if (g.dimension() != sigma.dimension()) throw PreconditionError("solution: g and covariance dimensions differ");
  if (w.size() != g.dimension()) throw PreconditionError("solution: point has the wrong dimension");
  if (g.dimension() > kMaxDimension) throw PreconditionError("solution: dimension must be <= 4");
}

}  // namespace detail

/// E[h(g(Sigma^{1/2} Z))].
inline double gaussian_mean(const SmoothFunction& h, const SmoothFunction& g, const CovarianceSpec& sigma,
                            const QuadratureConfig& cfg = {}) {
  const detail::GaussianExpectation expect(sigma, cfg);
  const std::vector<double> zero(sigma.dimension(), 0.0);
  return expect([&](std::span<const double> x) { return h(g(x)); }, zero, 1.0);
}

/// f_h(w) = -int_0^1 t^{-1} { E h(g(t w + sqrt(1-t^2) Sigma^{1/2} Z)) - E h(g(Sigma^{1/2} Z)) } dt.
inline double solve_f(const SmoothFunction& h, const SmoothFunction& g, const CovarianceSpec& sigma,
                      std::span<const double> w, const QuadratureConfig& cfg = {}) {
  detail::check_inputs(h, g, sigma, w, cfg);
  const detail::GaussianExpectation expect(sigma, cfg);
  const std::size_t d = w.size();
  const std::vector<double> zero(d, 0.0);
  auto hg = [&](std::span<const double> x) { return h(g(x)); };
  const double centre = expect(hg, zero, 1.0);
  std::vector<double> mean(d);
  auto integrand = [&](double theta) {
    const double t = std::sin(theta), s = std::cos(theta);
    for (std::size_t i = 0; i < d; ++i) mean[i] = t * w[i];
    return -(s / t) * (expect(hg, mean, s) - centre);
  };
  return detail::theta_integral(integrand, cfg);
}

/// Partial derivative of f_h along idx:
/// -int_0^1 t^{n-1} E[ d^n (h o g)(t w + sqrt(1-t^2) Sigma^{1/2} Z) ] dt.
inline double f_derivative(const SmoothFunction& h, const SmoothFunction& g, const CovarianceSpec& sigma,
                           std::span<const double> w, std::span<const std::size_t> idx,
                           const QuadratureConfig& cfg = {}) {
  if (idx.empty()) return solve_f(h, g, sigma, w, cfg);
  detail::check_inputs(h, g, sigma, w, cfg);
  for (auto i : idx) {
    if (i >= w.size()) throw PreconditionError("f_derivative: index out of range");
  }
  const detail::GaussianExpectation expect(sigma, cfg);
  const std::size_t d = w.size();
  const double n = static_cast<double>(idx.size());
  auto kernel = [&](std::span<const double> x) { return composite_partial(h, g, x, idx); };
  std::vector<double> mean(d);
  auto integrand = [&](double theta) {
    const double t = std::sin(theta), s = std::cos(theta);
    for (std::size_t i = 0; i < d; ++i) mean[i] = t * w[i];
    return -std::pow(t, n - 1.0) * s * expect(kernel, mean, s);
  };
  return detail::theta_integral(integrand, cfg);
}

/// Univariate convenience overload with Sigma = 1.
inline double f_derivative(const SmoothFunction& h, const SmoothFunction& g, double w, int order,
                           const QuadratureConfig& cfg = {}) {
  if (order < 0) throw PreconditionError("f_derivative: negative order");
  const std::vector<std::size_t> idx(static_cast<std::size_t>(order), 0);
  return f_derivative(h, g, CovarianceSpec::identity(1), std::span<const double>(&w, 1), idx, cfg);
}

/// E[d^m f(Sigma^{1/2} Z)] along idx, equal to -E[d^m (h o g)(Sigma^{1/2} Z)] / m.
inline double f_derivative_mean(const SmoothFunction& h, const SmoothFunction& g, const CovarianceSpec& sigma,
                                std::span<const std::size_t> idx, const QuadratureConfig& cfg = {}) {
  if (idx.empty()) throw PreconditionError("f_derivative_mean: order must be >= 1");
  const detail::GaussianExpectation expect(sigma, cfg);
  const std::vector<double> zero(sigma.dimension(), 0.0);
  const double mean = expect([&](std::span<const double> x) { return composite_partial(h, g, x, idx); }, zero, 1.0);
  return -mean / static_cast<double>(idx.size());
}

/// n-th derivative of psi_m, the solution of psi'' - w psi' = f^{(m)} - E f^{(m)}(Z), for d = 1.
/// The nested (s, t) representation collapses under u = s t to
/// psi_m^{(n)}(w) = (1/m) int_0^1 u^{n-1} (1 - u^m) E[(h o g)^{(m+n)}(u w + sqrt(1-u^2) Z)] du.
inline double psi_derivative(const SmoothFunction& h, const SmoothFunction& g, int m, double w, int n,
                             const QuadratureConfig& cfg = {}) {
  if (m < 1) throw PreconditionError("psi_derivative: m must be >= 1");
  if (n < 1) throw PreconditionError("psi_derivative: n must be >= 1");
  if (g.dimension() != 1) throw PreconditionError("psi_derivative: g must be univariate");
  const auto sigma = CovarianceSpec::identity(1);
  detail::check_inputs(h, g, sigma, std::span<const double>(&w, 1), cfg);
  const detail::GaussianExpectation expect(sigma, cfg);
  const std::vector<std::size_t> idx(static_cast<std::size_t>(m + n), 0);
  auto kernel = [&](std::span<const double> x) { return composite_partial(h, g, x, idx); };
  const double md = m, nd = n;
  double mean = 0.0;
  auto integrand = [&](double theta) {
    const double u = std::sin(theta), s = std::cos(theta);
    mean = u * w;
    const double weight = std::pow(u, nd - 1.0) * (1.0 - std::pow(u, md)) * s / md;
    return weight * expect(kernel, std::span<const double>(&mean, 1), s);
  };
  return detail::theta_integral(integrand, cfg);
}

// ---------------------------------------------------------------------------------------------
// Residual checks
// ---------------------------------------------------------------------------------------------

struct ResidualReport {
  double max_residual = 0.0;
  std::vector<double> worst_point;
};

/// max over the grid of |grad' Sigma grad f - w' grad f - h(g(w)) + E h(g(Sigma^{1/2} Z))|.
inline ResidualReport stein_residual(const SmoothFunction& h, const SmoothFunction& g, const CovarianceSpec& sigma,
                                     const std::vector<std::vector<double>>& grid, const QuadratureConfig& cfg = {}) {
  const double centre = gaussian_mean(h, g, sigma, cfg);
  const std::size_t d = sigma.dimension();
  ResidualReport report;
  for (const auto& w : grid) {
    double second = 0.0;
    double first = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t gi[1] = {i};
      first += w[i] * f_derivative(h, g, sigma, w, gi, cfg);
      for (std::size_t j = 0; j < d; ++j) {
        if (sigma(i, j) == 0.0) continue;
        const std::size_t gij[2] = {i, j};
        second += sigma(i, j) * f_derivative(h, g, sigma, w, gij, cfg);
      }
    }
    const double r = std::fabs(second - first - h(g(w)) + centre);
    if (report.worst_point.empty() || r > report.max_residual) {
      report.max_residual = r;
      report.worst_point = w;
    }
  }
  return report;
}

struct PsiResidualReport {
  double max_residual = 0.0;
  double worst_point = 0.0;
  double centering = 0.0;  ///< E f^{(m)}(Z)
  bool centered = true;    ///< whether the uncentred right-hand side already has mean zero
};

/// max over the grid of |psi_m'' - w psi_m' - (f^{(m)} - E f^{(m)}(Z))| for d = 1.
inline PsiResidualReport psi_residual(const SmoothFunction& h, const SmoothFunction& g, int m,
                                      const std::vector<double>& grid, const QuadratureConfig& cfg = {}) {
  const auto sigma = CovarianceSpec::identity(1);
  const std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
  PsiResidualReport report;
  report.centering = f_derivative_mean(h, g, sigma, idx, cfg);
  report.centered = std::fabs(report.centering) <= 10.0 * cfg.tolerance;
  bool first = true;
  for (double w : grid) {
    const double lhs = psi_derivative(h, g, m, w, 2, cfg) - w * psi_derivative(h, g, m, w, 1, cfg);
    const double rhs = f_derivative(h, g, w, m, cfg) - report.centering;
    const double r = std::fabs(lhs - rhs);
    if (first || r > report.max_residual) {
      report.max_residual = r;
      report.worst_point = w;
      first = false;
    }
  }
  return report;
}

// ---------------------------------------------------------------------------------------------
// Analytic bounds
// ---------------------------------------------------------------------------------------------

enum class BoundVariant { i, ii, iii };

inline std::string to_string(BoundVariant v) {
  switch (v) {
    case BoundVariant::i: return "i";
    case BoundVariant::ii: return "ii";
    case BoundVariant::iii: return "iii";
  }
  return "?";
}

/// E|U V^r| for U = (Sigma^{-1/2} Z)_l, V = (Sigma^{1/2} Z)_i. Cov(U, V) = delta_{li}, so for
/// l != i the pair is independent; for l = i write V = sqrt(s) Z1, U = Z1 / sqrt(s) + b Z2.
inline double bivariate_abs_moment(const CovarianceSpec& sigma, std::size_t l, std::size_t i, double r) {
  sigma.require_positive_definite("bivariate_abs_moment");
  if (l >= sigma.dimension() || i >= sigma.dimension()) throw PreconditionError("bivariate_abs_moment: bad index");
  if (!(r >= 0.0)) throw PreconditionError("bivariate_abs_moment: r must be >= 0");
  const Eigen::MatrixXd inv = sigma.inverse();
  const double var_u = inv(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(l));
  const double var_v = sigma(i, i);
  if (l != i) return std::sqrt(2.0 * var_u / std::numbers::pi) * std::pow(var_v, 0.5 * r) * mu_abs_moment(r);
  const double b2 = std::max(0.0, var_u - 1.0 / var_v);
  const double sv = std::sqrt(var_v);
  if (b2 <= 1e-15 * var_u) return std::pow(var_v, 0.5 * (r - 1.0)) * mu_abs_moment(r + 1.0);
  const double b = std::sqrt(b2);
  // E|c + b Z2| for c = z / sqrt(s), folded-normal mean.
  auto folded = [b](double c) {
    return b * std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * c * c / (b * b)) +
           c * (1.0 - 2.0 * normal_cdf(-c / b));
  };
  auto integrand = [&](double z) { return 2.0 * std::pow(z, r) * normal_pdf(z) * folded(z / sv); };
  const double e = quad::integrate_to_infinity(integrand, 0.0, {1e-300, 1e-12, 4000, true}).value;
  return std::pow(var_v, 0.5 * r) * e;
}

namespace detail {

inline void check_bound_dims(const DominatingPolynomial& P, const CovarianceSpec& sigma,
                             std::span<const double> w) {
  P.validate();
  if (P.dimension() != sigma.dimension() || w.size() != sigma.dimension()) {
    throw PreconditionError("bound: dimensions of P, covariance and w must agree");
  }
}

inline void require_univariate_standard(const DominatingPolynomial& P, const CovarianceSpec& sigma,
                                        const std::string& clause) {
  if (P.dimension() != 1 || sigma.dimension() != 1) throw PreconditionError(clause + ": requires d = 1");
  if (!sigma.is_standard()) throw PreconditionError(clause + ": requires unit variance");
}

inline double abs_u_mean(const Eigen::MatrixXd& inv, std::size_t l) {
  return std::sqrt(2.0 * inv(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(l)) / std::numbers::pi);
}

}  // namespace detail

/// Right-hand side of the bounds on the n-th order partial derivatives of f_h.
/// (i) any non-negative definite Sigma, g in C_P^n; (ii) positive definite Sigma, g in C_P^{n-1};
/// (iii) d = 1, Sigma = 1, g in C_P^{n-2}.
inline BoundReport bound_f(BoundVariant variant, const DominatingPolynomial& P, const CovarianceSpec& sigma,
                           const TestFunctionNorms& norms, int n, std::span<const double> w) {
  detail::check_bound_dims(P, sigma, w);
  BoundReport rep;
  rep.metric = Metric::smooth;
  rep.provenance = "f-derivative/" + to_string(variant);
  const std::size_t d = sigma.dimension();
  switch (variant) {
    case BoundVariant::i: {
      if (n < 1) throw PreconditionError("bound_f(i): requires n >= 1");
      const double pre = norms.h(static_cast<std::size_t>(n)) / n;
      rep.add_term("A", pre * P.A);
      for (std::size_t i = 0; i < d; ++i) {
        const double r = P.exponents[i];
        const double c = pre * P.B * std::pow(2.0, 0.5 * r);
        rep.add_term("B|w_" + std::to_string(i) + "|^r", c * std::pow(std::fabs(w[i]), r));
        rep.add_term("B moment_" + std::to_string(i), c * std::pow(sigma(i, i), 0.5 * r) * mu_abs_moment(r));
      }
      rep.assume("g in C_P^n, h in C_b^n", AssumptionStatus::user_asserted);
      break;
    }
    case BoundVariant::ii: {
      if (n < 2) throw PreconditionError("bound_f(ii): requires n >= 2");
      sigma.require_positive_definite("bound_f(ii)");
      const double pre = std::sqrt(std::numbers::pi) * std::exp(std::lgamma(0.5 * n) - std::lgamma(0.5 * (n + 1))) /
                         2.0 * norms.h(static_cast<std::size_t>(n - 1));
      if (sigma.kind() == CovarianceSpec::Kind::identity) {
        rep.add_term("A", pre * P.A);
        for (std::size_t i = 0; i < d; ++i) {
          const double r = P.exponents[i];
          const double c = pre * P.B * std::pow(2.0, 0.5 * r);
          rep.add_term("B|w_" + std::to_string(i) + "|^r", c * std::pow(std::fabs(w[i]), r));
          rep.add_term("B moment_" + std::to_string(i), c * mu_abs_moment(r + 1.0));
        }
      } else {
        const Eigen::MatrixXd inv = sigma.inverse();
        std::size_t best = 0;
        std::vector<ReportTerm> best_terms;
        double best_sum = std::numeric_limits<double>::infinity();
        for (std::size_t l = 0; l < d; ++l) {
          const double eu = detail::abs_u_mean(inv, l);
          std::vector<ReportTerm> terms{{"A", pre * P.A * eu}};
          for (std::size_t i = 0; i < d; ++i) {
            const double r = P.exponents[i];
            const double c = pre * P.B * std::pow(2.0, 0.5 * r);
            terms.push_back({"B|w_" + std::to_string(i) + "|^r", c * std::pow(std::fabs(w[i]), r) * eu});
            terms.push_back({"B moment_" + std::to_string(i), c * bivariate_abs_moment(sigma, l, i, r)});
          }
          double s = 0.0;
          for (const auto& t : terms) s += t.value;
          if (s < best_sum) {
            best_sum = s;
            best = l;
            best_terms = std::move(terms);
          }
        }
        rep.terms = std::move(best_terms);
        rep.details["argmin_l"] = static_cast<double>(best);
      }
      rep.assume("covariance positive definite", AssumptionStatus::checked);
      rep.assume("g in C_P^{n-1}, h in C_b^{n-1}", AssumptionStatus::user_asserted);
      break;
    }
    case BoundVariant::iii: {
      if (n < 3) throw PreconditionError("bound_f(iii): requires n >= 3");
      detail::require_univariate_standard(P, sigma, "bound_f(iii)");
      const double r = P.exponents[0];
      const auto abc = abc_coeffs(r, AbcVariant::plain);
      const double hw = norms.h(static_cast<std::size_t>(n - 2));
      const double c = hw * std::pow(2.0, 0.5 * r) * P.B;
      rep.add_term("A", hw * abc.alpha * P.A);
      rep.add_term("B|w|^r", c * abc.beta * std::pow(std::fabs(w[0]), r));
      rep.add_term("B moment", c * abc.gamma);
      rep.assume("d = 1 and unit variance", AssumptionStatus::checked);
      rep.assume("g in C_P^{n-2}, h in C_b^{n-2}", AssumptionStatus::user_asserted);
      break;
    }
  }
  rep.value = rep.term_sum();
  return rep;
}

/// Right-hand side of the bounds on the n-th order partial derivatives of psi_m.
/// (i) g in C_P^{m+n}; (ii) positive definite Sigma, m + n >= 3, g in C_P^{m+n-2};
/// (iii) d = 1, Sigma = 1, m >= 2, n = 3, g in C_P^{m-1}.
inline BoundReport bound_psi(BoundVariant variant, const DominatingPolynomial& P, const CovarianceSpec& sigma,
                             const TestFunctionNorms& norms, int m, int n, std::span<const double> w) {
  detail::check_bound_dims(P, sigma, w);
  if (m < 1 || n < 1) throw PreconditionError("bound_psi: requires m, n >= 1");
  BoundReport rep;
  rep.metric = Metric::smooth;
  rep.provenance = "psi-derivative/" + to_string(variant);
  const std::size_t d = sigma.dimension();
  switch (variant) {
    case BoundVariant::i: {
      const double pre = norms.h(static_cast<std::size_t>(m + n)) / (static_cast<double>(n) * (m + n));
      rep.add_term("A", pre * P.A);
      for (std::size_t i = 0; i < d; ++i) {
        const double r = P.exponents[i];
        const double c = pre * P.B * std::pow(3.0, 0.5 * r);
        rep.add_term("B|w_" + std::to_string(i) + "|^r", c * std::pow(std::fabs(w[i]), r));
        rep.add_term("B moment_" + std::to_string(i), c * 2.0 * std::pow(sigma(i, i), 0.5 * r) * mu_abs_moment(r));
      }
      rep.assume("g in C_P^{m+n}, h in C_b^{m+n}", AssumptionStatus::user_asserted);
      break;
    }
    case BoundVariant::ii: {
      if (m + n < 3) throw PreconditionError("bound_psi(ii): requires m + n >= 3");
      sigma.require_positive_definite("bound_psi(ii)");
      const double ratio = std::exp(std::lgamma(0.5 * n) + std::lgamma(0.5 * (m + n)) - std::lgamma(0.5 * (n + 1)) -
                                    std::lgamma(0.5 * (m + n + 1)));
      const double hw = norms.h(static_cast<std::size_t>(m + n - 2));
      if (sigma.kind() == CovarianceSpec::Kind::identity) {
        const double pre = std::sqrt(2.0 * std::numbers::pi) * ratio / 4.0 * hw;
        rep.add_term("A", pre * P.A);
        for (std::size_t i = 0; i < d; ++i) {
          const double r = P.exponents[i];
          const double c = pre * P.B * std::pow(3.0, 0.5 * r);
          rep.add_term("B|w_" + std::to_string(i) + "|^r", c * std::pow(std::fabs(w[i]), r));
          rep.add_term("B moment_" + std::to_string(i), c * 2.0 * mu_abs_moment(r + 1.0));
        }
      } else {
        const double pre = std::numbers::pi * ratio / 4.0 * hw;
        const Eigen::MatrixXd inv = sigma.inverse();
        std::vector<ReportTerm> best_terms;
        double best_sum = std::numeric_limits<double>::infinity();
        std::size_t best_k = 0, best_l = 0;
        for (std::size_t k = 0; k < d; ++k) {
          for (std::size_t l = 0; l < d; ++l) {
            const double ek = detail::abs_u_mean(inv, k), el = detail::abs_u_mean(inv, l);
            std::vector<ReportTerm> terms{{"A", pre * P.A * ek * el}};
            for (std::size_t i = 0; i < d; ++i) {
              const double r = P.exponents[i];
              const double c = pre * P.B * std::pow(3.0, 0.5 * r);
              terms.push_back({"B|w_" + std::to_string(i) + "|^r", c * std::pow(std::fabs(w[i]), r) * ek * el});
              terms.push_back({"B moment_" + std::to_string(i), c * 2.0 * ek * bivariate_abs_moment(sigma, l, i, r)});
            }
            double s = 0.0;
            for (const auto& t : terms) s += t.value;
            if (s < best_sum) {
              best_sum = s;
              best_k = k;
              best_l = l;
              best_terms = std::move(terms);
            }
          }
        }
        rep.terms = std::move(best_terms);
        rep.details["argmin_k"] = static_cast<double>(best_k);
        rep.details["argmin_l"] = static_cast<double>(best_l);
      }
      rep.assume("covariance positive definite", AssumptionStatus::checked);
      rep.assume("g in C_P^{m+n-2}, h in C_b^{m+n-2}", AssumptionStatus::user_asserted);
      break;
    }
    case BoundVariant::iii: {
      if (m < 2) throw PreconditionError("bound_psi(iii): requires m >= 2");
      if (n != 3) throw PreconditionError("bound_psi(iii): bounds the third derivative only (n = 3)");
      detail::require_univariate_standard(P, sigma, "bound_psi(iii)");
      const double r = P.exponents[0];
      const auto abc = abc_coeffs(r, AbcVariant::tilde);
      const double hw = norms.h(static_cast<std::size_t>(m - 1));
      const double c = hw * std::pow(3.0, 0.5 * r) * P.B;
      rep.add_term("A", hw * abc.alpha * P.A);
      rep.add_term("B|w|^r", c * abc.beta * std::pow(std::fabs(w[0]), r));
      rep.add_term("B moment", c * abc.gamma);
      rep.assume("d = 1 and unit variance", AssumptionStatus::checked);
      rep.assume("g in C_P^{m-1}, h in C_b^{m-1}", AssumptionStatus::user_asserted);
      break;
    }
  }
  rep.value = rep.term_sum();
  return rep;
}

// ---------------------------------------------------------------------------------------------
// Dominance verification
// ---------------------------------------------------------------------------------------------

enum class DerivativeTarget { f, psi };

/// One claimed inequality |D^n target(w)| <= bound(variant, P, ...), checked on a grid.
struct DerivativeClaim {
  DerivativeTarget target = DerivativeTarget::f;
  BoundVariant variant = BoundVariant::i;
  int order = 1;  ///< n
  int m = 0;      ///< psi only
  DominatingPolynomial P;
  double bound_scale = 1.0;  ///< multiplies the bound; values < 1 give negative controls
};

/// Order N of the class C_P^N that a claim needs.
inline int class_order(const DerivativeClaim& c) {
  if (c.target == DerivativeTarget::f) {
    switch (c.variant) {
      case BoundVariant::i: return c.order;
      case BoundVariant::ii: return c.order - 1;
      case BoundVariant::iii: return c.order - 2;
    }
  }
  switch (c.variant) {
    case BoundVariant::i: return c.m + c.order;
    case BoundVariant::ii: return c.m + c.order - 2;
    case BoundVariant::iii: return c.m - 1;
  }
  return 0;
}

/// All nondecreasing index tuples of length k over {0..d-1}.
inline std::vector<std::vector<std::size_t>> index_tuples(std::size_t d, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur(k, 0);
  while (true) {
    out.push_back(cur);
    std::size_t pos = k;
    while (pos > 0 && cur[pos - 1] == d - 1) --pos;
    if (pos == 0) break;
    ++cur[pos - 1];
    for (std::size_t j = pos; j < k; ++j) cur[j] = cur[pos - 1];
  }
  return out;
}

/// Grid check of membership in C_P^N (all k <= N, |D^k g|^{N/k} <= P) or, when `star`, in
/// C_{P,*}^N (|D^N g| <= P). Throws PreconditionError naming the offending point.
inline void check_class_membership(const SmoothFunction& g, const DominatingPolynomial& P, int N, bool star,
                                   const std::vector<std::vector<double>>& grid, double slack = 1e-9) {
  if (N < 1) return;
  const std::size_t d = g.dimension();
  for (const auto& w : grid) {
    const double pw = P(w);
    for (int k = star ? N : 1; k <= N; ++k) {
      for (const auto& idx : index_tuples(d, static_cast<std::size_t>(k))) {
        const double v = std::pow(std::fabs(g.partial(w, idx)), static_cast<double>(N) / k);
        if (v > pw * (1.0 + slack) + 1e-300) {
          std::string where = "(";
          for (std::size_t i = 0; i < w.size(); ++i) where += (i ? ", " : "") + std::to_string(w[i]);
          throw PreconditionError("class check failed: |derivative of order " + std::to_string(k) + "|^(" +
                                  std::to_string(N) + "/" + std::to_string(k) + ") = " + std::to_string(v) +
                                  " exceeds P = " + std::to_string(pw) + " at " + where + ")");
        }
      }
    }
  }
}

struct ClaimResult {
  DerivativeClaim claim;
  double max_ratio = 0.0;
  std::vector<double> argmax;
  double value_at_argmax = 0.0;
  double bound_at_argmax = 0.0;
  bool passed = true;
};

struct VerificationReport {
  std::vector<ClaimResult> claims;
  double max_ratio = 0.0;
  std::vector<double> argmax;
  bool passed = true;
};

/// For each claim and grid point compares |derivative| with the bound. A claim passes iff
/// max ratio <= 1 + slack, with slack = max(1e-6, 100 * tolerance); zero bounds compare with an
/// absolute floor of 10 * tolerance.
inline VerificationReport verify_derivative_bounds(const SmoothFunction& h, const SmoothFunction& g,
                                                   const TestFunctionNorms& norms, const CovarianceSpec& sigma,
                                                   const std::vector<DerivativeClaim>& claims,
                                                   const std::vector<std::vector<double>>& grid,
                                                   const QuadratureConfig& cfg = {}) {
  const double slack = std::max(1e-6, 100.0 * cfg.tolerance);
  const double floor = 10.0 * cfg.tolerance;
  VerificationReport report;
  for (const auto& claim : claims) {
    check_class_membership(g, claim.P, class_order(claim), h.is_identity(), grid);
    ClaimResult res;
    res.claim = claim;
    bool first = true;
    for (const auto& w : grid) {
      double value = 0.0;
      double bound = 0.0;
      if (claim.target == DerivativeTarget::f) {
        const std::vector<std::size_t> idx(static_cast<std::size_t>(claim.order), 0);
        value = f_derivative(h, g, sigma, w, idx, cfg);
        bound = bound_f(claim.variant, claim.P, sigma, norms, claim.order, w).value;
      } else {
        if (w.size() != 1) throw PreconditionError("verify_derivative_bounds: psi claims need d = 1");
        value = psi_derivative(h, g, claim.m, w[0], claim.order, cfg);
        bound = bound_psi(claim.variant, claim.P, sigma, norms, claim.m, claim.order, w).value;
      }
      bound *= claim.bound_scale;
      double ratio = 0.0;
      if (bound > 0.0) {
        ratio = std::fabs(value) / bound;
      } else {
        ratio = std::fabs(value) <= floor ? 0.0 : std::numeric_limits<double>::infinity();
      }
      if (first || ratio > res.max_ratio) {
        res.max_ratio = ratio;
        res.argmax = w;
        res.value_at_argmax = value;
        res.bound_at_argmax = bound;
        first = false;
      }
    }
    res.passed = res.max_ratio <= 1.0 + slack;
    if (report.claims.empty() || res.max_ratio > report.max_ratio) {
      report.max_ratio = res.max_ratio;
      report.argmax = res.argmax;
    }
    report.passed = report.passed && res.passed;
    report.claims.push_back(std::move(res));
  }
  return report;
}

}  // namespace stein
