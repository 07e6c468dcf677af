#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "stein/limit_bounds.hpp"
#include "stein/quadrature.hpp"

namespace {

using namespace stein;

// Two-point enumeration: X = sqrt(p2/p1) w.p. p1, -sqrt(p1/p2) w.p. p2.
double two_point_signed(double p1, int k) {
  const double p2 = 1.0 - p1;
  return p1 * std::pow(std::sqrt(p2 / p1), k) + p2 * std::pow(-std::sqrt(p1 / p2), k);
}
double two_point_abs(double p1, double s) {
  const double p2 = 1.0 - p1;
  return p1 * std::pow(std::sqrt(p2 / p1), s) + p2 * std::pow(std::sqrt(p1 / p2), s);
}

// E[W^k] for W = (Bin(n, p1) - n p1)/sqrt(n p1 p2) by summing the binomial law.
double binomial_sum_moment(std::int64_t n, double p1, int k) {
  const double p2 = 1.0 - p1;
  const double sd = std::sqrt(n * p1 * p2);
  double total = 0.0;
  for (std::int64_t u = 0; u <= n; ++u) {
    const double logpmf = std::lgamma(n + 1.0) - std::lgamma(u + 1.0) - std::lgamma(n - u + 1.0) +
                          u * std::log(p1) + (n - u) * std::log(p2);
    total += std::exp(logpmf) * std::pow((u - n * p1) / sd, k);
  }
  return total;
}

LimitBoundInputs iid_inputs(std::int64_t n, MomentOracle law, DominatingPolynomial P, TestFunctionNorms norms, int p) {
  LimitBoundInputs in;
  in.spec = SumSpecification::iid(n, std::move(law));
  in.P = std::move(P);
  in.norms = std::move(norms);
  in.p = p;
  return in;
}

TEST(MomentOracle, BernoulliMatchesTwoPointEnumeration) {
  for (double p1 : {0.05, 0.3, 0.5, 0.77}) {
    const auto o = bernoulli_standardized(p1);
    for (int k = 1; k <= 8; ++k) {
      EXPECT_NEAR(o.signed_moment(k), two_point_signed(p1, k), 1e-14 * std::max(1.0, std::fabs(two_point_signed(p1, k))));
    }
    for (double s : {0.0, 0.5, 2.0, 3.0, 4.5, 7.0}) {
      EXPECT_NEAR(o.abs_moment(s), two_point_abs(p1, s), 1e-14 * std::max(1.0, two_point_abs(p1, s)));
    }
  }
  EXPECT_NEAR(bernoulli_standardized(0.3).signed_moment(3), 0.4 / std::sqrt(0.21), 1e-14);
  EXPECT_NEAR(bernoulli_standardized(0.3).signed_moment(3), 0.87287, 1e-5);
  EXPECT_EQ(bernoulli_standardized(0.5).signed_moment(3), 0.0);
  EXPECT_EQ(bernoulli_standardized(0.5).matching_order, 3);
  EXPECT_EQ(bernoulli_standardized(0.3).matching_order, 2);
  EXPECT_THROW(bernoulli_standardized(0.0), PreconditionError);
  EXPECT_THROW(bernoulli_standardized(1.0), PreconditionError);
}

TEST(MomentOracle, BernoulliMomentGrowthBound) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  for (int trial = 0; trial < 2000; ++trial) {
    const double p1 = u(rng);
    const auto o = bernoulli_standardized(p1);
    for (int m = 2; m <= 9; ++m) {
      EXPECT_LE(o.abs_moment(m), std::pow(p1 * (1 - p1), 1.0 - 0.5 * m) * (1 + 1e-12));
    }
  }
}

TEST(MomentOracle, ClosedFamiliesAgainstQuadrature) {
  const auto uni = uniform_standardized();
  const double a = std::sqrt(3.0);
  for (double s : {1.0, 2.5, 3.0, 6.0}) {
    const double q = quad::integrate([s](double x) { return std::pow(std::fabs(x), s); }, -a, a).value / (2 * a);
    EXPECT_NEAR(uni.abs_moment(s), q, 1e-10);
  }
  EXPECT_NEAR(uni.signed_moment(4), 9.0 / 5.0, 1e-14);
  const auto rad = rademacher();
  EXPECT_EQ(rad.abs_moment(7.3), 1.0);
  EXPECT_EQ(rad.signed_moment(5), 0.0);
  EXPECT_NO_THROW(uni.validate());
  EXPECT_NO_THROW(rad.validate());
}

TEST(MomentOracle, TableValidation) {
  const auto ok = moment_table({{2, 1.0}, {3, 1.5}, {4, 3.0}}, {{1, 0.0}, {2, 1.0}, {3, 0.2}, {4, 3.0}}, 2);
  EXPECT_DOUBLE_EQ(ok.abs_moment(3), 1.5);
  EXPECT_TRUE(std::isinf(ok.abs_moment(5)));
  EXPECT_THROW(ok.finite_abs_moment(5, "probe"), PreconditionError);
  EXPECT_FALSE(ok.has_sampler());
  // Standardization, matching, Lyapunov and |E X^k| <= E|X|^k violations.
  EXPECT_THROW(moment_table({{2, 2.0}}, {{1, 0.0}, {2, 2.0}}, 2), PreconditionError);
  EXPECT_THROW(moment_table({{2, 1.0}}, {{1, 0.1}, {2, 1.0}}, 2), PreconditionError);
  EXPECT_THROW(moment_table({{2, 1.0}, {3, 1.0}}, {{1, 0.0}, {2, 1.0}, {3, 0.5}}, 3), PreconditionError);
  EXPECT_THROW(moment_table({{2, 1.0}, {3, 0.5}}, {{1, 0.0}, {2, 1.0}, {3, 0.0}}, 2), PreconditionError);
  EXPECT_THROW(moment_table({{2, 1.0}, {3, 1.2}}, {{1, 0.0}, {2, 1.0}, {3, 1.5}}, 2), PreconditionError);
  // Moments of order >= 2 are at least one, so an all-zero table cannot be standardized.
  EXPECT_THROW(moment_table({{2, 0.0}, {3, 0.0}}, {{1, 0.0}, {2, 0.0}}, 2), PreconditionError);
}

TEST(MomentOracle, TableInterpolationIsAnUpperBound) {
  // log E|X|^s is convex in s, so the log-linear chord dominates the true fractional moment.
  for (double p1 : {0.1, 0.3, 0.5}) {
    const auto truth = bernoulli_standardized(p1);
    std::map<int, double> abs, sgn;
    for (int k = 1; k <= 8; ++k) {
      abs[k] = truth.abs_moment(k);
      sgn[k] = truth.signed_moment(k);
    }
    const auto table = moment_table(abs, sgn, 2);
    for (double s = 2.0; s <= 8.0; s += 0.125) {
      EXPECT_GE(table.abs_moment(s), truth.abs_moment(s) * (1 - 1e-12)) << p1 << " " << s;
    }
  }
}

TEST(SumMoments, CumulantRouteMatchesBinomialEnumeration) {
  for (double p1 : {0.3, 0.5}) {
    for (std::int64_t n : {1, 2, 7, 40}) {
      const auto o = bernoulli_standardized(p1);
      for (int k = 1; k <= 8; ++k) {
        const double exact = binomial_sum_moment(n, p1, k);
        EXPECT_NEAR(sum_signed_moment(o, n, k), exact, 1e-9 * std::max(1.0, std::fabs(exact))) << n << " " << k;
      }
    }
  }
}

TEST(EWMoment, Policies) {
  const auto spec = SumSpecification::iid(100, bernoulli_standardized(0.5));
  EXPECT_EQ(ew_moment_upper(spec, 0, 1.0).value, 1.0);
  EXPECT_EQ(ew_moment_upper(spec, 0, 0.0).value, 1.0);
  EXPECT_THROW(ew_moment_upper(spec, 0, 3.0), UnsupportedError);

  EWOptions interp{EWPolicy::even_moment_interpolation};
  // E[W^4] = 3(n-1)/n + E[X^4]/n with |X| = 1.
  EXPECT_NEAR(ew_moment_upper(spec, 0, 4.0, interp).value, 2.98, 1e-12);
  EXPECT_NEAR(ew_moment_upper(spec, 0, 3.0, interp).value, std::pow(2.98, 0.75), 1e-12);
  EXPECT_THROW(ew_moment_upper(spec, 0, 9.0, interp), UnsupportedError);
  for (double p1 : {0.1, 0.3}) {
    for (std::int64_t n : {1, 10, 1000}) {
      const auto s = SumSpecification::iid(n, bernoulli_standardized(p1));
      const double e4 = bernoulli_standardized(p1).abs_moment(4);
      EXPECT_LE(ew_moment_upper(s, 0, 4.0, interp).value, 3.0 + e4 / n + 1e-12);
    }
  }

  EWOptions mc{EWPolicy::monte_carlo_ci, 20000, 7};
  const auto small = SumSpecification::iid(20, bernoulli_standardized(0.3));
  const auto b = ew_moment_upper(small, 0, 4.0, mc);
  EXPECT_FALSE(b.certified);
  EXPECT_GE(b.value, ew_moment_upper(small, 0, 4.0, interp).value * 0.97);
  EXPECT_EQ(b.value, ew_moment_upper(small, 0, 4.0, mc).value);
}

TEST(LimitBound, WassersteinConstantsOfTheSquaredSum) {
  const auto in = iid_inputs(100, rademacher(), DominatingPolynomial::univariate(0, 2, 1), TestFunctionNorms({1.0}), 2);
  const auto rep = limit_bound(LimitPart::ii, in);
  const double a = 12 * std::numbers::sqrt2 + 12 / std::sqrt(std::numbers::pi);
  const double b = 12 * std::numbers::sqrt2;
  EXPECT_NEAR(rep.details.at("coef:E|X|^{p+1}"), a, 1e-9 * a);
  EXPECT_NEAR(rep.details.at("coef:E|X|^{r+p+1}/n^{r/2}"), b, 1e-9 * b);
  EXPECT_NEAR(a, 23.74084, 1e-5);
  EXPECT_EQ(std::ceil(a), 24.0);
  EXPECT_EQ(std::ceil(b), 17.0);
  EXPECT_NEAR(rep.value, (a + b / 10.0) / 10.0, 1e-12);
  EXPECT_DOUBLE_EQ(rep.value, rep.term_sum());
  EXPECT_TRUE(rep.certified);
}

TEST(LimitBound, SmoothConstantsOfTheSquaredSum) {
  const auto in = iid_inputs(50, bernoulli_standardized(0.3), DominatingPolynomial::univariate(2, 4, 2),
                             TestFunctionNorms({1.0, 1.0}), 2);
  auto even = in;
  even.g_even = true;
  const auto rep = limit_bound(LimitPart::iv, even);
  const double mu3 = 2 * std::sqrt(2 / std::numbers::pi);
  EXPECT_NEAR(rep.details.at("coef:E|X|^{p+2}"), 7.0 / 6.0 * (122 + 24 * mu3), 1e-9);
  EXPECT_NEAR(rep.details.at("coef:E|X|^{r+p+2}/n^{r/2}"), 392.0 / 3.0, 1e-9);
  EXPECT_NEAR(rep.details.at("coef:|EX^{p+1}|E|X|^3"), 0.75 * (652 + 180 * mu3), 1e-9);
  EXPECT_NEAR(rep.details.at("coef:|EX^{p+1}|E|X|^{r+3}/n^{r/2}"), 468.0, 1e-9);
  EXPECT_NEAR(rep.details.at("coef:E|X|^{p+2}"), 187.01, 0.01);
  EXPECT_NEAR(rep.details.at("coef:|EX^{p+1}|E|X|^3"), 704.43, 0.01);
  // Assembled value against the display with the law's moments.
  const auto o = bernoulli_standardized(0.3);
  const double n = 50;
  const double expected =
      2.0 / n *
      (rep.details.at("coef:E|X|^{p+2}") * o.abs_moment(4) + 392.0 / 3.0 * o.abs_moment(6) / n +
       std::fabs(o.signed_moment(3)) * (rep.details.at("coef:|EX^{p+1}|E|X|^3") * o.abs_moment(3) +
                                        468.0 * o.abs_moment(5) / n));
  EXPECT_NEAR(rep.value, expected, 1e-10 * expected);
  EXPECT_THROW(limit_bound(LimitPart::iv, in), PreconditionError);  // evenness not asserted
}

TEST(LimitBound, LipschitzOnlyDominatingConstant) {
  // B = 0, A = 1, p = 2: (3/2) n^{-1/2} alpha_r E|X|^3 with alpha_r = 4 for r <= 1.
  for (double r : {0.0, 0.5, 1.0}) {
    const auto in = iid_inputs(64, uniform_standardized(), DominatingPolynomial::univariate(1, 0, r),
                               TestFunctionNorms({1.0}), 2);
    EXPECT_NEAR(limit_bound(LimitPart::ii, in).value, 1.5 / 8.0 * 4.0 * uniform_standardized().abs_moment(3), 1e-14);
  }
}

TEST(LimitBound, PartThreeAtDimensionOneMatchesTypedFormula) {
  const double A = 1.5, B = 0.7, r = 1.5, n = 30;
  const int p = 2;
  const auto o = bernoulli_standardized(0.4);
  LimitBoundInputs in = iid_inputs(30, o, DominatingPolynomial::univariate(A, B, r), TestFunctionNorms({1, 0.5, 0.25, 2}), p);
  in.g_even = true;
  const double h4 = in.norms.h(4);
  const double c = std::max(1.0, std::pow(2.0, r - 1));
  const double lead = n * std::pow(n, -2.0) * 7.0 / 12.0 *
                      (A * o.abs_moment(4) + B * std::pow(2.0, r / 2) *
                                                 (c * o.abs_moment(4) + c * std::pow(n, -r / 2) * o.abs_moment(4 + r) +
                                                  mu_abs_moment(r) * o.abs_moment(4)));
  const double K = 3 * std::numbers::pi * std::tgamma(3.0) / (8 * std::numbers::sqrt2 * std::tgamma(3.5));
  const double skew = K * n * std::fabs(o.signed_moment(3)) * std::pow(n, -1.5) * n * std::pow(n, -1.5) *
                      (A * o.abs_moment(3) + B * std::pow(3.0, r / 2) *
                                                 (c * o.abs_moment(3) + c * std::pow(n, -r / 2) * o.abs_moment(3 + r) +
                                                  2 * mu_abs_moment(r + 1) * o.abs_moment(3)));
  const double expected = h4 / 2.0 * (lead + skew);
  EXPECT_NEAR(limit_bound(LimitPart::iii, in).value, expected, 1e-12 * expected);
}

TEST(LimitBound, IndependentComponentsUseProductMoments) {
  const auto ber = bernoulli_standardized(0.3);
  const auto uni = uniform_standardized();
  LimitBoundInputs in;
  in.spec = SumSpecification({20, 45}, {ber, uni});
  in.P = DominatingPolynomial(0.0, 1.0, {1.0, 2.0});
  in.norms = TestFunctionNorms({1, 1});
  in.p = 2;
  const auto rep = limit_bound(LimitPart::i, in);
  const double pre = 3 * std::sqrt(std::numbers::pi) * std::tgamma(1.5) / (2 * 2 * std::tgamma(2.0)) * in.norms.h(2);
  double cross = 0.0;
  const std::vector<double> n{20, 45}, r{1, 2};
  const std::vector<MomentOracle> law{ber, uni};
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) {
      const double m = j == k ? law[j].abs_moment(3 + r[k]) : law[j].abs_moment(3) * law[k].abs_moment(r[k]);
      cross += pre * n[j] * std::pow(n[j], -1.5) * std::pow(2.0, r[k] / 2) * std::max(1.0, std::pow(2.0, r[k] - 1)) *
               std::pow(n[k], -r[k] / 2) * m;
    }
  }
  double found = -1.0;
  for (const auto& t : rep.terms) {
    if (t.label == "summand cross term") found = t.value;
  }
  EXPECT_NEAR(found, cross, 1e-12 * cross);
}

TEST(LimitBound, ScalesLinearlyAndDecreasesInN) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double A = u(rng), B = u(rng), r = std::fmod(u(rng), 2.0), s = u(rng);
    const TestFunctionNorms norms({u(rng), u(rng)});
    const TestFunctionNorms scaled({s * norms.norms[0], s * norms.norms[1]});
    const auto law = bernoulli_standardized(0.2 + 0.1 * (trial % 6));
    for (LimitPart part : {LimitPart::i, LimitPart::ii, LimitPart::iv}) {
      auto make = [&](std::int64_t n, double a, double b, const TestFunctionNorms& h) {
        auto in = iid_inputs(n, law, DominatingPolynomial::univariate(a, b, r), h, 2);
        in.g_even = true;
        return limit_bound(part, in).value;
      };
      const double base = make(50, A, B, norms);
      EXPECT_NEAR(make(50, 2 * A, 2 * B, norms), 2 * base, 1e-12 * base);
      EXPECT_NEAR(make(50, A, 0, norms) + make(50, 0, B, norms), base, 1e-12 * base);
      EXPECT_NEAR(make(50, A, B, scaled), s * base, 1e-12 * s * base);
      EXPECT_LT(make(51, A, B, norms), base);
      EXPECT_LT(make(500, A, B, norms), make(51, A, B, norms));
    }
  }
}

TEST(LimitBound, Preconditions) {
  auto in = iid_inputs(10, bernoulli_standardized(0.3), DominatingPolynomial::univariate(0, 2, 1), TestFunctionNorms({1, 1, 1}), 3);
  EXPECT_THROW(limit_bound(LimitPart::ii, in), PreconditionError);  // only two matching moments
  in.p = 2;
  in.spec = SumSpecification({10, 10}, {rademacher(), rademacher()});
  EXPECT_THROW(limit_bound(LimitPart::ii, in), PreconditionError);  // P dimension / d = 1
  in.P = DominatingPolynomial(0, 1, {1, 1});
  EXPECT_THROW(limit_bound(LimitPart::ii, in), PreconditionError);
  EXPECT_NO_THROW(limit_bound(LimitPart::i, in));
  in.g_even = true;
  in.p = 3;
  EXPECT_THROW(limit_bound(LimitPart::iii, in), PreconditionError);  // p odd
  auto heavy = iid_inputs(10, moment_table({{2, 1.0}, {3, 2.0}}, {{1, 0.0}, {2, 1.0}, {3, 0.5}}, 2),
                          DominatingPolynomial::univariate(0, 2, 1), TestFunctionNorms({1.0}), 2);
  EXPECT_THROW(limit_bound(LimitPart::ii, heavy), PreconditionError);  // E|X|^4 not available
  auto short_norms = iid_inputs(10, rademacher(), DominatingPolynomial::univariate(0, 2, 1), TestFunctionNorms({1.0}), 2);
  EXPECT_THROW(limit_bound(LimitPart::i, short_norms), PreconditionError);  // needs ||h''||
}

TEST(SimplifiedLimitBound, CollapsedDoubleSums) {
  const std::int64_t n = 40;
  const double C = 2.5;
  const auto law = uniform_standardized();
  const int p = 3;
  const double rs = 1.0;
  const auto spec = SumSpecification({n, n, n}, {law, law, law});
  const TestFunctionNorms norms({1, 2, 3, 4, 5});
  const double M = law.abs_moment(rs + p + 1);
  const auto rep = simplified_limit_bound(LimitPart::i, spec, rs, norms, p, C);
  EXPECT_NEAR(rep.value, C * 9.0 * std::pow(n, -0.5 * (p - 1)) * M * norms.h_tilde(p), 1e-12 * rep.value);
  EXPECT_FALSE(rep.certified);
  const auto one = SumSpecification::iid(n, law);
  EXPECT_NEAR(simplified_limit_bound(LimitPart::ii, one, rs, norms, p, C).value,
              C * norms.h_tilde(p - 1) * std::pow(n, -0.5 * (p - 1)) * M, 1e-12);
  EXPECT_THROW(simplified_limit_bound(LimitPart::ii, one, rs, norms, p, 0.0), PreconditionError);
  EXPECT_THROW(simplified_limit_bound(LimitPart::ii, spec, rs, norms, p, 1.0), PreconditionError);
  // part iv with a symmetric law: the skew sum vanishes.
  EXPECT_NEAR(simplified_limit_bound(LimitPart::iv, one, rs, norms, 2, 1.0).value,
              norms.h_tilde(2) * std::pow(n, -3.0) * n * n * law.abs_moment(rs + 4), 1e-12);
}

}  // namespace
