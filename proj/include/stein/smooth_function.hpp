#pragma once

/// \file smooth_function.hpp
/// Differentiable functions R^d -> R with analytic partial derivatives up to a supplied
/// order and a central-difference fallback beyond it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stein/errors.hpp"

namespace stein {

enum class Parity { even, odd, none };

class SmoothFunction {
 public:
  using ValueFn = std::function<double(std::span<const double>)>;
  /// Partial derivative d^k / dw_{i_1} ... dw_{i_k} for 1 <= k <= max_order.
  using PartialFn = std::function<double(std::span<const double>, std::span<const std::size_t>)>;
  using ScalarFn = std::function<double(double)>;

  SmoothFunction() = default;

  SmoothFunction(std::size_t dim, ValueFn value, PartialFn partial, int max_order, Parity parity = Parity::none)
      : dim_(dim), value_(std::move(value)), partial_(std::move(partial)), max_order_(max_order), parity_(parity) {
    if (dim_ == 0) throw PreconditionError("SmoothFunction: dimension must be >= 1");
    if (max_order_ < 0) throw PreconditionError("SmoothFunction: max_order must be >= 0");
    if (max_order_ > 0 && !partial_) throw PreconditionError("SmoothFunction: partial derivatives missing");
  }

  /// Univariate function from [f, f', f'', ...].
  static SmoothFunction univariate(std::vector<ScalarFn> derivatives, Parity parity = Parity::none) {
    if (derivatives.empty()) throw PreconditionError("SmoothFunction: need at least the value");
    auto shared = std::make_shared<std::vector<ScalarFn>>(std::move(derivatives));
    const int order = static_cast<int>(shared->size()) - 1;
    ValueFn value = [shared](std::span<const double> w) { return (*shared)[0](w[0]); };
    PartialFn partial = [shared](std::span<const double> w, std::span<const std::size_t> idx) {
      return (*shared)[idx.size()](w[0]);
    };
    return SmoothFunction(1, std::move(value), std::move(partial), order, parity);
  }

  /// h(w) = w. Compositions with the identity skip the chain rule.
  static SmoothFunction identity() {
    auto f = univariate({[](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; },
                         [](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; },
                         [](double) { return 0.0; }, [](double) { return 0.0; }},
                        Parity::odd);
    f.identity_ = true;
    f.name_ = "identity";
    return f;
  }

  std::size_t dimension() const noexcept { return dim_; }
  int max_order() const noexcept { return max_order_; }
  Parity parity() const noexcept { return parity_; }
  bool is_identity() const noexcept { return identity_; }
  const std::string& name() const noexcept { return name_; }
  SmoothFunction& named(std::string n) {
    name_ = std::move(n);
    return *this;
  }

  /// Relative step of the finite-difference fallback: h = fd_step * max(1, |w_j|).
  double fd_step = 1e-4;
  /// Orders beyond max_order reachable by the fallback.
  int fd_extra_orders = 1;

  double operator()(std::span<const double> w) const {
    check_dim(w.size());
    return value_(w);
  }
  double operator()(double x) const {
    check_dim(1);
    return value_(std::span<const double>(&x, 1));
  }

  /// Partial derivative along the index list (empty list = value).
  double partial(std::span<const double> w, std::span<const std::size_t> idx) const {
    check_dim(w.size());
    for (auto i : idx) {
      if (i >= dim_) throw PreconditionError("SmoothFunction: derivative index out of range");
    }
    if (idx.empty()) return value_(w);
    if (static_cast<int>(idx.size()) <= max_order_) return partial_(w, idx);
    if (static_cast<int>(idx.size()) > max_order_ + fd_extra_orders) {
      throw PreconditionError("SmoothFunction: derivative of order " + std::to_string(idx.size()) +
                              " exceeds the available derivatives (" + std::to_string(max_order_) + " supplied)");
    }
    // Central difference of the next-lower analytic (or recursively differenced) derivative.
    const std::size_t j = idx.back();
    const auto lower = idx.first(idx.size() - 1);
    std::vector<double> plus(w.begin(), w.end());
    std::vector<double> minus(w.begin(), w.end());
    const double h = fd_step * std::max(1.0, std::fabs(w[j]));
    plus[j] += h;
    minus[j] -= h;
    return (partial(plus, lower) - partial(minus, lower)) / (2.0 * h);
  }

  /// k-th derivative of a univariate function.
  double derivative(int k, double x) const {
    check_dim(1);
    if (k < 0) throw PreconditionError("SmoothFunction: negative derivative order");
    std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
    return partial(std::span<const double>(&x, 1), idx);
  }

  /// Checks analytic derivatives against central differences of the next-lower order and the
  /// declared parity on the probe points; throws PreconditionError naming the first failure.
  void validate(const std::vector<std::vector<double>>& probes, double rel_tol = 1e-4) const {
    for (const auto& w : probes) {
      check_dim(w.size());
      std::vector<double> neg(w.size());
      std::transform(w.begin(), w.end(), neg.begin(), [](double v) { return -v; });
      const double v = value_(w);
      const double vn = value_(neg);
      const double scale = std::max({1.0, std::fabs(v), std::fabs(vn)});
      if (parity_ == Parity::even && std::fabs(v - vn) > 1e-10 * scale) {
        throw PreconditionError("SmoothFunction: declared even but g(w) != g(-w) at " + describe(w));
      }
      if (parity_ == Parity::odd && std::fabs(v + vn) > 1e-10 * scale) {
        throw PreconditionError("SmoothFunction: declared odd but g(w) != -g(-w) at " + describe(w));
      }
      for (int k = 1; k <= max_order_; ++k) {
        for (std::size_t j = 0; j < dim_; ++j) {
          std::vector<std::size_t> idx(static_cast<std::size_t>(k), j);
          const auto lower = std::span<const std::size_t>(idx).first(idx.size() - 1);
          const double analytic = partial_(w, idx);
          const double h = fd_step * std::max(1.0, std::fabs(w[j]));
          std::vector<double> plus(w), minus(w);
          plus[j] += h;
          minus[j] -= h;
          const double numeric = (partial(plus, lower) - partial(minus, lower)) / (2.0 * h);
          const double tol = rel_tol * std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
          if (std::fabs(analytic - numeric) > tol) {
            throw PreconditionError("SmoothFunction: derivative of order " + std::to_string(k) +
                                    " disagrees with finite differences at " + describe(w));
          }
        }
      }
    }
  }

 private:
  void check_dim(std::size_t d) const {
    if (!value_) throw PreconditionError("SmoothFunction: empty function");
    if (d != dim_) throw PreconditionError("SmoothFunction: dimension mismatch");
  }

  static std::string describe(const std::vector<double>& w) {
    std::string s = "(";
    for (std::size_t i = 0; i < w.size(); ++i) s += (i ? ", " : "") + std::to_string(w[i]);
    return s + ")";
  }

  std::size_t dim_ = 0;
  ValueFn value_;
  PartialFn partial_;
  int max_order_ = 0;
  Parity parity_ = Parity::none;
  bool identity_ = false;
  std::string name_;
};

}  // namespace stein
