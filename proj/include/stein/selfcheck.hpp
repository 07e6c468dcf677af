#pragma once

/// \file selfcheck.hpp
/// Randomized inequality suites and constant reproductions, runnable without a test framework.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "stein/limit_bounds.hpp"
#include "stein/power_divergence.hpp"
#include "stein/special_functions.hpp"

namespace stein::selfcheck {

struct SuiteResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first_failure;

  bool passed() const noexcept { return failures == 0 && cases > 0; }
};

namespace detail {

class Recorder {
 public:
  explicit Recorder(std::string name) { res_.name = std::move(name); }

  void check(bool ok, const std::function<std::string()>& describe) {
    ++res_.cases;
    if (ok) return;
    if (res_.failures++ == 0) res_.first_failure = describe();
  }

  SuiteResult result() && { return std::move(res_); }

 private:
  SuiteResult res_;
};

inline std::string kv(std::initializer_list<std::pair<const char*, double>> items) {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [k, v] : items) {
    os << (first ? "" : " ") << k << "=" << v;
    first = false;
  }
  return os.str();
}

inline bool le(double lhs, double rhs, double rel = 1e-12) { return lhs <= rhs * (1.0 + rel) + 1e-300; }

}  // namespace detail

inline constexpr std::size_t kDefaultCases = 10000;

/// (ax + by)^r <= (a + b)^r (x^r + y^r) and the three-term analogue, a, b, c, x, y, z >= 0.
inline SuiteResult power_of_sum_lemma(std::uint64_t seed, std::size_t cases = kDefaultCases) {
  detail::Recorder rec("lemma-axby");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(0.0, 5.0), expo(0.0, 6.0);
  for (std::size_t i = 0; i < cases; ++i) {
    const double a = coef(rng), b = coef(rng), c = coef(rng), x = coef(rng), y = coef(rng), z = coef(rng);
    const double r = expo(rng);
    const bool two = detail::le(std::pow(a * x + b * y, r), std::pow(a + b, r) * (std::pow(x, r) + std::pow(y, r)));
    const bool three = detail::le(std::pow(a * x + b * y + c * z, r),
                                  std::pow(a + b + c, r) * (std::pow(x, r) + std::pow(y, r) + std::pow(z, r)));
    rec.check(two && three, [&] { return detail::kv({{"a", a}, {"b", b}, {"c", c}, {"x", x}, {"y", y}, {"r", r}}); });
  }
  return std::move(rec).result();
}

/// T_r(w) <= w^r for 0 <= r <= 1, and T_r(w) <= 2 w^r for r > 1, w > r - 1.
inline SuiteResult t_r_bounds(std::uint64_t seed, std::size_t cases = kDefaultCases) {
  detail::Recorder rec("t-r-bounds");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < cases; ++i) {
    const double r = u(rng), w = std::exp(-6.0 + 9.0 * u(rng));
    rec.check(detail::le(t_r(r, w), std::pow(w, r)), [&] { return detail::kv({{"r", r}, {"w", w}}); });
    const double r2 = 1.0 + 7.0 * u(rng), w2 = (r2 - 1.0) + std::exp(-8.0 + 11.0 * u(rng));
    rec.check(detail::le(t_r(r2, w2), 2.0 * std::pow(w2, r2)), [&] { return detail::kv({{"r", r2}, {"w", w2}}); });
  }
  return std::move(rec).result();
}

/// Gamma(a, x) <= x^{a-1} e^{-x} for 0 < a <= 1, and <= 2 x^{a-1} e^{-x} for a > 1, x > 2(a - 1).
inline SuiteResult incomplete_gamma_bounds(std::uint64_t seed, std::size_t cases = kDefaultCases) {
  detail::Recorder rec("incgamma");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < cases; ++i) {
    const double a = 1e-3 + (1.0 - 1e-3) * u(rng), x = std::exp(-6.0 + 10.0 * u(rng));
    rec.check(detail::le(upper_incomplete_gamma(a, x), std::pow(x, a - 1.0) * std::exp(-x)),
              [&] { return detail::kv({{"a", a}, {"x", x}}); });
    const double a2 = 1.0 + 7.0 * u(rng), x2 = 2.0 * (a2 - 1.0) + std::exp(-8.0 + 11.0 * u(rng));
    rec.check(detail::le(upper_incomplete_gamma(a2, x2), 2.0 * std::pow(x2, a2 - 1.0) * std::exp(-x2)),
              [&] { return detail::kv({{"a", a2}, {"x", x2}}); });
  }
  return std::move(rec).result();
}

/// I_{n,r}, J_{n,r} <= 2^{r/2} on random (n, r); I_{m,n,r}, J_{m,n,r} <= 3^{r/2} on a grid.
inline SuiteResult ij_caps(std::uint64_t seed, std::size_t cases = kDefaultCases) {
  detail::Recorder rec("ij-caps");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ur(0.0, 6.0);
  std::uniform_int_distribution<int> un(1, 8);
  for (std::size_t i = 0; i < cases / 2; ++i) {
    const int n = un(rng);
    const double r = ur(rng);
    const double cap = std::pow(2.0, 0.5 * r);
    for (IJKind k : {IJKind::I_nr, IJKind::J_nr}) {
      rec.check(detail::le(ij_constants(k, std::nullopt, n, r), cap, 1e-9),
                [&] { return detail::kv({{"n", n}, {"r", r}}); });
    }
  }
  for (int m = 1; m <= 5; m += 2) {
    for (int n = 1; n <= 5; n += 2) {
      for (double r = 0.0; r <= 6.0; r += 2.0) {
        const double cap = std::pow(3.0, 0.5 * r);
        for (IJKind k : {IJKind::I_mnr, IJKind::J_mnr}) {
          rec.check(detail::le(ij_constants(k, m, n, r), cap, 1e-9),
                    [&] { return detail::kv({{"m", m}, {"n", n}, {"r", r}}); });
        }
      }
    }
  }
  return std::move(rec).result();
}

/// sqrt(2/x) < Gamma(x/2)/Gamma((x+1)/2) < sqrt(2/(x - 1/2)) for x >= 1.
inline SuiteResult gamma_ratio_bounds(std::uint64_t seed, std::size_t cases = kDefaultCases) {
  detail::Recorder rec("gamma-ratio");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < cases; ++i) {
    const double x = i % 2 == 0 ? static_cast<double>(1 + i / 2 % 5000) : std::exp(8.0 * u(rng));
    const double ratio = std::exp(std::lgamma(0.5 * x) - std::lgamma(0.5 * (x + 1.0)));
    rec.check(std::sqrt(2.0 / x) < ratio && ratio < std::sqrt(2.0 / (x - 0.5)),
              [&] { return detail::kv({{"x", x}, {"ratio", ratio}}); });
  }
  return std::move(rec).result();
}

/// Wasserstein constants of the squared sum: (12 sqrt2 + 12/sqrt(pi), 12 sqrt2) with ceilings
/// (24, 17), and 24 + 17/17 = 25 at the threshold sqrt(n p1 p2) = 17.
inline SuiteResult constants_24_17() {
  detail::Recorder rec("constants-24-17");
  LimitBoundInputs in;
  in.spec = SumSpecification::iid(100, rademacher());
  in.P = DominatingPolynomial::univariate(0.0, 2.0, 1.0);
  in.norms = TestFunctionNorms({1.0});
  in.p = 2;
  const auto rep = limit_bound(LimitPart::ii, in);
  const double a = rep.details.at("coef:E|X|^{p+1}");
  const double b = rep.details.at("coef:E|X|^{r+p+1}/n^{r/2}");
  const double a_exact = 12.0 * std::numbers::sqrt2 + 12.0 / std::sqrt(std::numbers::pi);
  const double b_exact = 12.0 * std::numbers::sqrt2;
  rec.check(std::fabs(a - a_exact) <= 1e-9, [&] { return detail::kv({{"a", a}, {"expected", a_exact}}); });
  rec.check(std::fabs(b - b_exact) <= 1e-9, [&] { return detail::kv({{"b", b}, {"expected", b_exact}}); });
  rec.check(std::ceil(a) == 24.0 && std::ceil(b) == 17.0, [&] { return detail::kv({{"a", a}, {"b", b}}); });
  rec.check(24.0 + 17.0 / 17.0 == 25.0, [] { return std::string("24 + 17/17 != 25"); });
  return std::move(rec).result();
}

/// Smooth constants of the squared sum within 1 of (187, 131, 704, 468).
inline SuiteResult constants_187_131_704_468() {
  detail::Recorder rec("constants-187-131-704-468");
  LimitBoundInputs in;
  in.spec = SumSpecification::iid(50, bernoulli_standardized(0.3));
  in.P = DominatingPolynomial::univariate(2.0, 4.0, 2.0);
  in.norms = TestFunctionNorms({1.0, 1.0});
  in.p = 2;
  in.g_even = true;
  const auto rep = limit_bound(LimitPart::iv, in);
  const std::pair<const char*, double> expected[] = {{"coef:E|X|^{p+2}", 187.0},
                                                     {"coef:E|X|^{r+p+2}/n^{r/2}", 131.0},
                                                     {"coef:|EX^{p+1}|E|X|^3", 704.0},
                                                     {"coef:|EX^{p+1}|E|X|^{r+3}/n^{r/2}", 468.0}};
  for (const auto& [key, documented] : expected) {
    const double v = rep.details.at(key);
    rec.check(std::fabs(v - documented) <= 1.0, [&] { return std::string(key) + " = " + std::to_string(v); });
  }
  return std::move(rec).result();
}

/// Intermediate constants of the cubic-term estimate: 21/2, 72, 40 sqrt(2/pi), 2247, 648, 2975, 864.
inline SuiteResult chain_2976() {
  detail::Recorder rec("chain-2976");
  const auto ch = cubic_term_chain();
  const double g = 40.0 * std::sqrt(2.0 / std::numbers::pi);
  const std::pair<double, double> pairs[] = {{ch.alpha_A, 10.5},
                                             {ch.c_beta, 72.0},
                                             {ch.gamma, g},
                                             {ch.first_const, 1.5 * (10.5 + 6.0 * (216.0 + g))},
                                             {ch.first_q, 648.0},
                                             {ch.second_const, 12.0 * (216.0 + g)},
                                             {ch.second_q, 864.0}};
  for (const auto& [got, want] : pairs) {
    rec.check(std::fabs(got - want) <= 1e-9 * std::max(1.0, std::fabs(want)),
              [&] { return detail::kv({{"got", got}, {"expected", want}}); });
  }
  rec.check(std::ceil(ch.first_const) == 2247.0 && std::ceil(ch.second_const) == 2975.0,
            [&] { return detail::kv({{"first", ch.first_const}, {"second", ch.second_const}}); });
  return std::move(rec).result();
}

struct Suite {
  std::string name;
  std::function<SuiteResult()> run;
};

inline std::vector<Suite> registry(std::uint64_t seed = 20240611) {
  return {
      {"lemma-axby", [seed] { return power_of_sum_lemma(seed); }},
      {"t-r-bounds", [seed] { return t_r_bounds(seed + 1); }},
      {"incgamma", [seed] { return incomplete_gamma_bounds(seed + 2); }},
      {"ij-caps", [seed] { return ij_caps(seed + 3); }},
      {"gamma-ratio", [seed] { return gamma_ratio_bounds(seed + 4); }},
      {"constants-24-17", [] { return constants_24_17(); }},
      {"constants-187-131-704-468", [] { return constants_187_131_704_468(); }},
      {"chain-2976", [] { return chain_2976(); }},
  };
}

}  // namespace stein::selfcheck
