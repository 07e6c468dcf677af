// Acceptance run: one PASS/FAIL line per criterion.
//
// Usage: acceptance [--expect-fail K[,K...]] [--only K[,K...]]
// Exit status is 0 iff every criterion outside the expect-fail list passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "stein/catalog.hpp"
#include "stein/limit_bounds.hpp"
#include "stein/monte_carlo.hpp"
#include "stein/power_divergence.hpp"
#include "stein/selfcheck.hpp"
#include "stein/stein_solution.hpp"

using namespace stein;
namespace cat = stein::catalog;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::set<int> parse_ids(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.insert(std::stoi(tok));
  return out;
}

std::vector<std::vector<double>> line_grid(double lo, double hi, double step) {
  std::vector<std::vector<double>> g;
  const int k = static_cast<int>(std::lround((hi - lo) / step));
  for (int i = 0; i <= k; ++i) g.push_back({lo + i * step});
  return g;
}

struct BatteryCase {
  std::string h_name;
  int q;  // g(w) = w^q
};

const std::vector<BatteryCase> kBattery{{"identity", 2}, {"sin", 1}, {"identity", 4}, {"cos", 2}};

QuadratureConfig config_for(const SmoothFunction& h) {
  QuadratureConfig cfg;
  if (!h.is_identity()) cfg.inner_rule = InnerRule::adaptive;
  return cfg;
}

// ---------------------------------------------------------------------------------------
// 1-3: constants

Outcome constants_24_17() {
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
  const bool ok = std::fabs(a - a_exact) <= 1e-9 && std::fabs(b - b_exact) <= 1e-9 && std::ceil(a) == 24.0 &&
                  std::ceil(b) == 17.0;
  return {ok, fmt("coefficients %.10f, %.10f -> ceilings %g, %g", a, b, std::ceil(a), std::ceil(b))};
}

Outcome constants_smooth_squared_sum() {
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
  bool ok = true;
  std::string detail = "exact";
  for (const auto& [key, documented] : expected) {
    const double v = rep.details.at(key);
    ok = ok && std::fabs(v - documented) <= 1.0;
    detail += fmt(" %.4f (vs %g)", v, documented);
  }
  return {ok, detail};
}

Outcome cubic_chain() {
  const auto ch = cubic_term_chain();
  const double g = 40.0 * std::sqrt(2.0 / std::numbers::pi);
  const std::pair<double, double> pairs[] = {{ch.alpha_A, 10.5}, {ch.c_beta, 72.0},   {ch.gamma, g},
                                             {ch.first_q, 648.0}, {ch.second_q, 864.0}};
  double worst = 0.0;
  for (const auto& [got, want] : pairs) worst = std::max(worst, std::fabs(got - want) / std::max(1.0, std::fabs(want)));
  const bool ceilings = std::ceil(ch.first_const) == 2247.0 && std::ceil(ch.second_const) == 2975.0;
  // Threshold sqrt(n p1 p2) >= 17: 24 + 17/17.
  const double q = 17.0 * 17.0;
  const MultinomialModel m(static_cast<std::int64_t>(4 * q), 0.5);
  const double constant = bound_pearson(Metric::wasserstein, m).value * std::sqrt(m.q());
  const bool ok = worst <= 1e-9 && ceilings && 24.0 + 17.0 / 17.0 == 25.0 && std::fabs(constant - 25.0) <= 1e-12;
  return {ok, fmt("max rel err %.2e; chain %.6f, %.6f; Wasserstein constant at q = 289: %.12g", worst,
                  ch.first_const, ch.second_const, constant)};
}

// ---------------------------------------------------------------------------------------
// 4-5: Stein solution

Outcome residuals() {
  double worst1 = 0.0;
  const auto grid = line_grid(-10.0, 10.0, 1.0);
  for (const auto& c : kBattery) {
    const auto entry = cat::test_function(c.h_name);
    const auto rep =
        stein_residual(entry.h, cat::monomial(c.q), CovarianceSpec::identity(1), grid, config_for(entry.h));
    worst1 = std::max(worst1, rep.max_residual);
  }
  std::vector<std::vector<double>> grid2;
  for (double x = -2.0; x <= 2.0; x += 1.0) {
    for (double y = -2.0; y <= 2.0; y += 1.0) grid2.push_back({x, y});
  }
  QuadratureConfig cfg2;
  cfg2.gauss_hermite_nodes = 32;  // tensor rule: 32^2 nodes per inner expectation
  double worst2 = 0.0;
  for (const auto& h : {SmoothFunction::identity(), cat::exp_neg()}) {
    worst2 = std::max(
        worst2, stein_residual(h, cat::sum_of_squares(2), CovarianceSpec::identity(2), grid2, cfg2).max_residual);
  }
  return {worst1 <= 1e-6 && worst2 <= 1e-5, fmt("d=1 max residual %.3e on [-10,10]; d=2 %.3e", worst1, worst2)};
}

std::vector<DerivativeClaim> claims_for(int q, bool identity_h, bool psi) {
  std::vector<DerivativeClaim> out;
  if (!psi) {
    for (int n = 1; n <= 3; ++n) {
      DerivativeClaim c;
      c.order = n;
      c.P = cat::monomial_dominating(q, n, identity_h);
      out.push_back(c);
    }
    return out;
  }
  for (int m = 1; m <= 3; ++m) {
    for (int k = 1; m + k <= 4; ++k) {
      DerivativeClaim c;
      c.target = DerivativeTarget::psi;
      c.m = m;
      c.order = k;
      c.P = cat::monomial_dominating(q, m + k, identity_h);
      out.push_back(c);
    }
  }
  return out;
}

Outcome derivative_dominance() {
  double worst = 0.0;
  std::string where;
  bool ok = true;
  for (const auto& c : kBattery) {
    const auto entry = cat::test_function(c.h_name);
    const auto g = cat::monomial(c.q);
    const auto cfg = config_for(entry.h);
    for (const bool psi : {false, true}) {
      const auto grid = line_grid(-10.0, 10.0, psi ? 1.0 : 0.5);
      const auto rep = verify_derivative_bounds(entry.h, g, entry.norms, CovarianceSpec::identity(1),
                                                claims_for(c.q, entry.h.is_identity(), psi), grid, cfg);
      for (const auto& r : rep.claims) {
        ok = ok && r.max_ratio <= 1.0 + 1e-6;
        if (r.max_ratio > worst) {
          worst = r.max_ratio;
          where = fmt("%s o w^%d %s m=%d n=%d", c.h_name.c_str(), c.q, psi ? "psi" : "f", r.claim.m, r.claim.order);
        }
      }
    }
  }
  return {ok, fmt("max ratio %.9f (%s)", worst, where.c_str())};
}

// ---------------------------------------------------------------------------------------
// 6: property suites

Outcome property_suites() {
  const std::set<std::string> wanted{"lemma-axby", "t-r-bounds", "incgamma", "ij-caps", "gamma-ratio"};
  bool ok = true;
  std::string detail;
  std::size_t found = 0;
  for (const auto& s : selfcheck::registry()) {
    if (!wanted.count(s.name)) continue;
    ++found;
    const auto r = s.run();
    ok = ok && r.passed() && r.cases >= 10000;
    detail += fmt("%s%s %zu/%zu", detail.empty() ? "" : "; ", r.name.c_str(), r.cases - r.failures, r.cases);
  }
  return {ok && found == wanted.size(), detail};
}

// ---------------------------------------------------------------------------------------
// 7-8: Monte Carlo audits

const std::vector<std::int64_t> kN{1000, 10000};
const std::vector<double> kP1{0.3, 0.5};

struct AuditTally {
  std::size_t rows = 0, failed = 0;
  double tightest = std::numeric_limits<double>::infinity();
  std::string tightest_at;

  void add(const mc::AuditResult& r) {
    for (const auto& row : r.rows) {
      ++rows;
      if (!row.pass) ++failed;
      const double rel = row.margin / row.bound;
      if (rel < tightest) {
        tightest = rel;
        tightest_at = row.statistic + " " + row.test_function;
        for (const auto& [k, v] : row.params) tightest_at += fmt(" %s=%g", k.c_str(), v);
      }
    }
  }
  Outcome outcome() const {
    return {rows > 0 && failed == 0,
            fmt("%zu rows, %zu failed; smallest relative margin %.4f at %s", rows, failed, tightest,
                tightest_at.c_str())};
  }
};

mc::AuditExperiment experiment(mc::StatisticKind kind, Metric metric, std::vector<double> lambdas) {
  mc::AuditExperiment e;
  e.kind = kind;
  e.metric = metric;
  e.n_values = kN;
  e.p1_values = kP1;
  e.lambdas = std::move(lambdas);
  e.N = 1000000;
  e.seed = 20240611;
  return e;
}

Outcome distance_audits() {
  AuditTally t;
  for (const Metric metric : {Metric::wasserstein, Metric::kolmogorov}) {
    t.add(mc::audit(experiment(mc::StatisticKind::pearson, metric, {1.0})));
    t.add(mc::audit(experiment(mc::StatisticKind::power_divergence, metric, {0.0, 2.0 / 3.0, 2.0})));
  }
  return t.outcome();
}

Outcome smooth_audits() {
  AuditTally t;
  for (const auto kind : {mc::StatisticKind::pearson, mc::StatisticKind::power_divergence}) {
    auto e = experiment(kind, Metric::smooth,
                        kind == mc::StatisticKind::pearson ? std::vector<double>{1.0}
                                                            : std::vector<double>{0.0, 2.0 / 3.0, 2.0});
    e.battery = mc::default_battery();
    t.add(mc::audit(e));
  }
  return t.outcome();
}

// ---------------------------------------------------------------------------------------
// 9-10: identities

Outcome statistic_identities() {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::int64_t> trials(1, 100000);
  std::uniform_real_distribution<double> prob(0.01, 0.99);
  double worst_rel = 0.0, worst_limit = 0.0, most_negative = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const MultinomialModel m(trials(rng), prob(rng));
    const std::int64_t u1 = std::uniform_int_distribution<std::int64_t>(0, m.n)(rng);
    const CountVector V{u1, m.n - u1};
    const double chi2 = pearson_statistic(V, m);
    const double t1 = power_divergence(V, m, 1.0);
    if (chi2 > 0.0) worst_rel = std::max(worst_rel, std::fabs(t1 - chi2) / chi2);
    const double t0 = power_divergence(V, m, 0.0);
    worst_limit = std::max(worst_limit, std::fabs(power_divergence(V, m, 1e-6) - t0) / std::max(1.0, t0));
    for (double lambda : {-0.5, 0.0, 2.0 / 3.0, 1.0, 2.0}) {
      most_negative = std::min(most_negative, power_divergence(V, m, lambda));
    }
  }
  const bool ok = worst_rel <= 1e-12 && worst_limit <= 1e-4 && most_negative >= 0.0;
  return {ok, fmt("|T1-chi2|/chi2 <= %.2e; |T(1e-6)-T0| <= %.2e (relative to max(1,T0)); min T = %g", worst_rel,
                  worst_limit, most_negative)};
}

Outcome moment_identities() {
  double worst = 0.0;
  for (double p1 : {0.05, 0.3, 0.5, 0.77}) {
    const auto law = bernoulli_standardized(p1);
    const double p2 = 1.0 - p1;
    const double hi = p2 / std::sqrt(p1 * p2), lo = -p1 / std::sqrt(p1 * p2);
    for (int k = 1; k <= 8; ++k) {
      const double signed_exact = p1 * std::pow(hi, k) + p2 * std::pow(lo, k);
      const double abs_exact = p1 * std::pow(std::fabs(hi), k) + p2 * std::pow(std::fabs(lo), k);
      worst = std::max(worst, std::fabs(law.signed_moment(k) - signed_exact) / std::max(1.0, std::fabs(signed_exact)));
      worst = std::max(worst, std::fabs(law.abs_moment(k) - abs_exact) / std::max(1.0, abs_exact));
    }
  }
  const std::int64_t n = 200;
  const auto law = bernoulli_standardized(0.3);
  const std::size_t N = 1000000;
  const auto w = mc::sample_statistic(mc::StatisticRequest::w_sum(SumSpecification::iid(n, law)), N, 10);
  double mean = 0.0;
  for (double v : w) mean += std::pow(v, 4);
  mean /= N;
  double ss = 0.0;
  for (double v : w) ss += (std::pow(v, 4) - mean) * (std::pow(v, 4) - mean);
  const double se = std::sqrt(ss / (N - 1) / N);
  const double exact = 3.0 * (n - 1) / n + law.abs_moment(4) / n;
  const bool ok = worst <= 1e-14 && std::fabs(mean - exact) <= 5.0 * se;
  return {ok, fmt("enumeration err %.1e; E[W^4] %.5f vs %.5f (%.2f SE)", worst, mean, exact,
                  std::fabs(mean - exact) / se)};
}

// ---------------------------------------------------------------------------------------
// 11: growth rate

Outcome growth_rate() {
  const double w = 40.0;
  const auto h = SmoothFunction::identity();
  const auto g = cat::monomial(6);
  const double ratio = std::fabs(f_derivative(h, g, w, 2)) / std::pow(w, 4);
  const double ratio_neg = std::fabs(f_derivative(h, g, -w, 2)) / std::pow(w, 4);
  const double target = 2.0 / 6.0;
  const bool ok = std::fabs(ratio - target) <= 0.25 * target && std::fabs(ratio_neg - target) <= 0.25 * target;
  return {ok, fmt("|f''(40)|/40^4 = %.6f, at -40: %.6f; target %.6f", ratio, ratio_neg, target)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expect_fail, only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--expect-fail" && i + 1 < argc) {
      expect_fail = parse_ids(argv[++i]);
    } else if (a == "--only" && i + 1 < argc) {
      only = parse_ids(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--expect-fail K,...] [--only K,...]\n";
      return 2;
    }
  }

  const std::vector<Criterion> criteria{
      {1, "constant reproduction 24/17", 1.0, constants_24_17},
      {2, "constant reproduction 187/131/704/468", 1.0, constants_smooth_squared_sum},
      {3, "cubic-term chain and Wasserstein constant 25", 1.0, cubic_chain},
      {4, "Stein equation residual", 30.0, residuals},
      {5, "derivative-bound dominance", 120.0, derivative_dominance},
      {6, "property suites", 30.0, property_suites},
      {7, "Monte Carlo Wasserstein/Kolmogorov audits", 300.0, distance_audits},
      {8, "Monte Carlo smooth-metric audit", 180.0, smooth_audits},
      {9, "statistic identities", 60.0, statistic_identities},
      {10, "moment identities", 60.0, moment_identities},
      {11, "growth-rate spot check", 60.0, growth_rate},
  };

  int unexpected = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.time_limit_s;
    const bool pass = o.pass && in_time;
    std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail
              << fmt(" (%.2f s, limit %g s)", secs, c.time_limit_s);
    if (!in_time) std::cout << " [over time limit]";
    if (!pass && expect_fail.count(c.id)) std::cout << " [expected failure]";
    std::cout << std::endl;
    if (!pass && !expect_fail.count(c.id)) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
