#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "stein/monte_carlo.hpp"

namespace {

using namespace stein;
using namespace stein::mc;

double chi2_quantile_bisect(double p) {
  double lo = 0.0, hi = 100.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (chi2_1_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> quantile_grid(std::size_t N) {
  std::vector<double> out(N);
  for (std::size_t i = 0; i < N; ++i) out[i] = chi2_quantile_bisect((static_cast<double>(i) + 0.5) / static_cast<double>(N));
  return out;
}

std::vector<double> chi2_draws(std::size_t N, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<double> out(N);
  for (auto& v : out) {
    const double s = z(rng);
    v = s * s;
  }
  return out;
}

// Brute-force integral of |F_N - F| on a fine grid, for small samples.
double brute_w1(std::vector<double> s) {
  std::sort(s.begin(), s.end());
  const double top = std::max(s.back(), 60.0);
  const std::size_t steps = 2000000;
  const double dx = top / steps;
  double sum = 0.0;
  std::size_t idx = 0;
  for (std::size_t i = 0; i < steps; ++i) {
    const double x = (i + 0.5) * dx;
    while (idx < s.size() && s[idx] <= x) ++idx;
    sum += std::fabs(static_cast<double>(idx) / s.size() - chi2_1_cdf(x)) * dx;
  }
  return sum;
}

TEST(Seeding, ChildStreams) {
  const RngSeed a{42};
  EXPECT_EQ(a.child(3, 7), RngSeed{42}.child(3, 7));
  EXPECT_NE(a.child(3, 7), RngSeed{43}.child(3, 7));
  std::set<std::uint64_t> seen;
  for (std::uint64_t c = 0; c < 10000; ++c) seen.insert(a.child(1, c));
  EXPECT_EQ(seen.size(), 10000u);
}

TEST(Sampling, BinomialInversionMatchesPmf) {
  const std::int64_t n = 20;
  const double p = 0.3;
  const BinomialInverter draw(n, p);
  double cdf = 0.0;
  for (std::int64_t k = 0; k < n; ++k) {
    cdf += std::tgamma(n + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(n - k + 1.0)) * std::pow(p, k) *
           std::pow(1 - p, n - k);
    EXPECT_EQ(draw(cdf * (1 - 1e-12)), k);
    EXPECT_EQ(draw(std::min(cdf * (1 + 1e-12), 1.0 - 1e-17)), k + 1);
  }
  EXPECT_EQ(draw(0.0), 0);
  EXPECT_EQ(draw(std::nextafter(1.0, 0.0)), n);
}

TEST(Sampling, PearsonProperties) {
  const auto trivial = sample_statistic(StatisticRequest::pearson(MultinomialModel(1, 0.5)), 1000, 9);
  for (double v : trivial) EXPECT_DOUBLE_EQ(v, 1.0);

  const std::size_t N = 200000;
  const auto s = sample_statistic(StatisticRequest::pearson(MultinomialModel(500, 0.3)), N, 5);
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / N;
  double ss = 0.0;
  for (double v : s) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / (N - 1) / N);
  EXPECT_LE(std::fabs(mean - 1.0), 4 * se);
}

TEST(Sampling, ReproducibleAcrossThreadCounts) {
  const auto req = StatisticRequest::power_divergence(MultinomialModel(1000, 0.4), 2.0 / 3.0);
  const auto a = sample_statistic(req, 100000, 77, {1, 4096});
  const auto b = sample_statistic(req, 100000, 77, {3, 4096});
  const auto c = sample_statistic(req, 100000, 78, {3, 4096});
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  const auto law = StatisticRequest::w_sum(SumSpecification::iid(10, uniform_standardized()));
  EXPECT_EQ(sample_statistic(law, 5000, 1, {1, 512}), sample_statistic(law, 5000, 1, {4, 512}));
}

TEST(Sampling, Errors) {
  const auto table = moment_table({{2, 1.0}, {3, 1.5}, {4, 3.0}}, {{1, 0.0}, {2, 1.0}, {3, 0.5}, {4, 3.0}}, 2);
  EXPECT_THROW(sample_statistic(StatisticRequest::w_sum(SumSpecification::iid(5, table)), 10, 1), PreconditionError);
  EXPECT_THROW(sample_statistic(StatisticRequest::pearson(MultinomialModel(5, 0.5)), 0, 1), PreconditionError);
  EXPECT_THROW(StatisticRequest::power_divergence(MultinomialModel(5, 0.5), -1.0), DomainError);
}

TEST(Sampling, FourthMomentOfStandardizedSum) {
  const std::int64_t n = 200;
  const auto law = bernoulli_standardized(0.3);
  const std::size_t N = 200000;
  const auto w = sample_statistic(StatisticRequest::w_sum(SumSpecification::iid(n, law)), N, 11);
  std::vector<double> w4(N);
  for (std::size_t i = 0; i < N; ++i) w4[i] = std::pow(w[i], 4);
  const double mean = std::accumulate(w4.begin(), w4.end(), 0.0) / N;
  double ss = 0.0;
  for (double v : w4) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / (N - 1) / N);
  const double exact = 3.0 * (n - 1) / n + law.abs_moment(4) / n;
  EXPECT_LE(std::fabs(mean - exact), 5 * se);
}

TEST(Wasserstein, AgainstBruteForceIntegral) {
  for (std::uint64_t seed : {1u, 2u}) {
    auto s = chi2_draws(150, seed);
    for (std::size_t i = 0; i < s.size(); i += 5) s[i] = s[0];  // ties
    const double oracle = brute_w1(s);
    EXPECT_NEAR(empirical_wasserstein_chi2_1(s, {0}).estimate, oracle, 2e-5);
  }
}

TEST(Wasserstein, DocumentedCases) {
  // Discretization error of the midpoint quantile grid, from an independent scipy computation.
  EXPECT_NEAR(empirical_wasserstein_chi2_1(quantile_grid(10000), {0}).estimate, 5.093281274761e-4, 1e-11);
  const auto zeros = empirical_wasserstein_chi2_1(std::vector<double>(500, 0.0));
  EXPECT_NEAR(zeros.estimate, 1.0, 1e-14);
  EXPECT_EQ(zeros.se, 0.0);
  EXPECT_THROW(empirical_wasserstein_chi2_1(std::vector<double>(99, 1.0)), PreconditionError);
  auto neg = chi2_draws(200, 3);
  neg[0] = -0.1;
  EXPECT_THROW(empirical_wasserstein_chi2_1(neg), DomainError);
}

TEST(Wasserstein, RateOnSelfDistributedInput) {
  const double small = empirical_wasserstein_chi2_1(chi2_draws(10000, 21), {0}).estimate;
  const double large = empirical_wasserstein_chi2_1(chi2_draws(1000000, 22), {0}).estimate;
  EXPECT_GT(small / large, 10.0 / 3.0);
  EXPECT_LT(small / large, 30.0);
}

TEST(Kolmogorov, DocumentedCases) {
  EXPECT_NEAR(empirical_kolmogorov_chi2_1({chi2_quantile_bisect(0.5)}, {0}).estimate, 0.5, 1e-12);
  const std::size_t N = 10000;
  EXPECT_LE(empirical_kolmogorov_chi2_1(quantile_grid(N), {0}).estimate, 1.0 / N + 1e-9);
  EXPECT_EQ(empirical_kolmogorov_chi2_1(std::vector<double>(10, 1e6), {0}).estimate, 1.0);
  const double small = empirical_kolmogorov_chi2_1(chi2_draws(10000, 31), {0}).estimate;
  const double large = empirical_kolmogorov_chi2_1(chi2_draws(1000000, 32), {0}).estimate;
  EXPECT_GT(small / large, 10.0 / 3.0);
  EXPECT_LT(small / large, 30.0);
}

TEST(Kolmogorov, BootstrapErrorIsDeterministicAndSensible) {
  const auto s = chi2_draws(20000, 41);
  const auto a = empirical_kolmogorov_chi2_1(s, {200, 5, 1});
  const auto b = empirical_kolmogorov_chi2_1(s, {200, 5, 3});
  EXPECT_EQ(a.se, b.se);
  EXPECT_GT(a.se, 0.1 / std::sqrt(20000.0));
  EXPECT_LT(a.se, 2.0 / std::sqrt(20000.0));
  // Discrete input goes through the cell-wise resampler.
  const auto disc = WeightedSample::from(sample_statistic(StatisticRequest::pearson(MultinomialModel(100, 0.5)), 50000, 2));
  const auto w = empirical_wasserstein_chi2_1(disc, {200, 6, 1});
  EXPECT_GT(w.se, 0.0);
  EXPECT_LT(w.se, 0.05);
}

TEST(Smooth, Battery) {
  const auto s = WeightedSample::from(sample_statistic(StatisticRequest::pearson(MultinomialModel(2000, 0.3)), 100000, 4));
  const TestFunction constant{"const", [](double) { return 3.0; }, 0.0, 0.0, {}};
  EXPECT_LE(smooth_discrepancy(s, constant).estimate, 1e-12);
  const TestFunction ident{"x", [](double x) { return x; }, 1.0, 0.0, {}};
  const auto id = smooth_discrepancy(s, ident);
  EXPECT_LE(id.estimate, 4 * id.se);
  EXPECT_NEAR(chi2_1_expectation(exp_decay_test()), 1.0 / std::sqrt(3.0), 1e-12);
  const TestFunction explode{"exp(x)", [](double x) { return std::exp(x); }, 0.0, 0.0, {}};
  EXPECT_THROW(chi2_1_expectation(explode), DomainError);
}

TEST(Smooth, BumpClosedForm) {
  const double z = 1.0, a = 1.0;
  auto sq_mass = [](double c, double lo, double hi) {  // E[(Y - c)^2; lo < Y <= hi]
    auto g = [c](double x) {
      return chi2_1_partial_second_moment(x) - 2 * c * chi2_1_partial_mean(x) + c * c * chi2_1_cdf(x);
    };
    return g(hi) - g(lo);
  };
  const double closed = chi2_1_cdf(z + a / 2) - 2 / (a * a) * sq_mass(z, z, z + a / 2) +
                        2 / (a * a) * sq_mass(z + a, z + a / 2, z + a);
  const auto bump = smoothing_bump(z, a);
  EXPECT_NEAR(chi2_1_expectation(bump), closed, 1e-8);
  EXPECT_DOUBLE_EQ(bump.d1_norm, 2.0);
  EXPECT_DOUBLE_EQ(bump.d2_norm, 4.0);
}

AuditExperiment pearson_dw(std::int64_t n, std::size_t N) {
  AuditExperiment e;
  e.kind = StatisticKind::pearson;
  e.metric = Metric::wasserstein;
  e.n_values = {n};
  e.p1_values = {0.5};
  e.N = N;
  e.seed = 2024;
  e.bootstrap = 50;
  return e;
}

TEST(Audit, PearsonWasserstein) {
  auto e = pearson_dw(10000, 100000);
  e.parallel.threads = 1;
  const auto r1 = audit(e);
  ASSERT_EQ(r1.rows.size(), 1u);
  EXPECT_DOUBLE_EQ(r1.rows[0].bound, 0.5);
  EXPECT_TRUE(r1.all_pass());
  e.parallel.threads = 3;
  const auto r3 = audit(e);
  EXPECT_EQ(r1.rows[0].estimate, r3.rows[0].estimate);
  EXPECT_EQ(r1.rows[0].se, r3.rows[0].se);

  const auto tiny = audit(pearson_dw(4, 10000));
  EXPECT_EQ(tiny.rows[0].bound, 2.0);
  EXPECT_TRUE(tiny.all_pass());
}

TEST(Audit, StrictModeAndSizes) {
  // The rounded constant 187 sits below the exact 187.01 once n is moderate.
  AuditExperiment e;
  e.kind = StatisticKind::w_sum;
  e.metric = Metric::smooth;
  e.law = rademacher();
  e.n_values = {100};
  e.battery = {exp_decay_test()};
  e.N = 1000;
  EXPECT_THROW(audit(e), PreconditionError);
  e.strict = false;
  const auto r = audit(e);
  EXPECT_FALSE(r.rows[0].certified);
  EXPECT_TRUE(r.rows[0].pass);
  e.N = 99;
  EXPECT_THROW(audit(e), PreconditionError);
  auto k = pearson_dw(100, 1000);
  k.kind = StatisticKind::w_sum;
  k.law = rademacher();
  k.metric = Metric::kolmogorov;
  EXPECT_THROW(audit(k), UnsupportedError);
}

TEST(Audit, SmoothBatteryOnPowerDivergence) {
  AuditExperiment e;
  e.kind = StatisticKind::power_divergence;
  e.metric = Metric::smooth;
  e.n_values = {2000};
  e.p1_values = {0.3};
  e.lambdas = {0.0, 2.0};
  e.battery = default_battery();
  e.N = 50000;
  const auto r = audit(e);
  EXPECT_EQ(r.rows.size(), 2 * e.battery.size());
  EXPECT_TRUE(r.all_pass());
  for (const auto& row : r.rows) EXPECT_FALSE(row.test_function.empty());
}

}  // namespace
