#pragma once

/// \file monte_carlo.hpp
/// Seeded simulation of multinomial statistics and standardized sums, empirical distances
/// to chi-square(1), and audits of analytic bounds against those estimates.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "stein/errors.hpp"
#include "stein/limit_bounds.hpp"
#include "stein/power_divergence.hpp"
#include "stein/quadrature.hpp"
#include "stein/special_functions.hpp"
#include "stein/types.hpp"

namespace stein::mc {

// ---------------------------------------------------------------------------------------
// Seeding and parallel chunking

/// SplitMix64 finalizer; a bijection on 64-bit words.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Master seed with stream derivation child(id, chunk) = mix(mix(master ^ mix(id)) + chunk).
/// For fixed (master, id) the map chunk -> child is injective.
struct RngSeed {
  std::uint64_t master = 0;

  constexpr std::uint64_t child(std::uint64_t experiment, std::uint64_t chunk) const noexcept {
    return splitmix64(splitmix64(master ^ splitmix64(experiment)) + chunk);
  }
};

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& rng) noexcept { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Worker count: explicit request, else STEIN_AUDIT_THREADS, else hardware concurrency.
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("STEIN_AUDIT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    throw PreconditionError(std::string("STEIN_AUDIT_THREADS must be a positive integer, got '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct ParallelOptions {
  unsigned threads = 0;  // 0: resolve_threads
  std::size_t chunk_size = 1 << 16;
};

/// Runs task(chunk) for chunk in [0, chunks) on a worker pool. Results must be written to
/// chunk-owned storage so the outcome is independent of scheduling.
template <class Task>
void for_each_chunk(std::size_t chunks, unsigned threads, const Task& task) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) task(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t c = next++; c < chunks; c = next++) {
      try {
        task(c);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = chunks;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------------------
// Sampling

/// Exact binomial(n, p) draws by inversion of the tabulated CDF.
class BinomialInverter {
 public:
  BinomialInverter(std::int64_t n, double p) : n_(n) {
    if (n < 0) throw PreconditionError("BinomialInverter: n must be >= 0");
    if (!(p > 0.0 && p < 1.0)) throw PreconditionError("BinomialInverter: p must lie in (0, 1)");
    cdf_.resize(static_cast<std::size_t>(n) + 1);
    const long double ln = std::lgamma(static_cast<long double>(n) + 1.0L);
    const long double lp = std::log(static_cast<long double>(p));
    const long double lq = std::log1p(-static_cast<long double>(p));
    long double acc = 0.0L;
    for (std::int64_t k = 0; k <= n; ++k) {
      const long double kk = static_cast<long double>(k);
      acc += std::exp(ln - std::lgamma(kk + 1.0L) - std::lgamma(static_cast<long double>(n - k) + 1.0L) + kk * lp +
                      (static_cast<long double>(n) - kk) * lq);
      cdf_[static_cast<std::size_t>(k)] = static_cast<double>(acc);
    }
  }

  std::int64_t operator()(double u) const noexcept {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return it == cdf_.end() ? n_ : static_cast<std::int64_t>(it - cdf_.begin());
  }

  std::int64_t operator()(std::mt19937_64& rng) const noexcept { return (*this)(uniform01(rng)); }

 private:
  std::int64_t n_;
  std::vector<double> cdf_;
};

enum class StatisticKind { pearson, power_divergence, w_sum };

inline std::string to_string(StatisticKind k) {
  switch (k) {
    case StatisticKind::pearson: return "pearson";
    case StatisticKind::power_divergence: return "power_divergence";
    case StatisticKind::w_sum: return "w_sum";
  }
  return "unknown";
}

/// What to simulate. w_sum draws W = n^{-1/2} sum X_i for a univariate i.i.d. specification.
struct StatisticRequest {
  StatisticKind kind = StatisticKind::pearson;
  MultinomialModel model;
  double lambda = 1.0;
  std::optional<SumSpecification> spec;

  static StatisticRequest pearson(const MultinomialModel& m) { return {StatisticKind::pearson, m, 1.0, {}}; }
  static StatisticRequest power_divergence(const MultinomialModel& m, double lambda) {
    stein::detail::require_lambda(lambda);
    return {StatisticKind::power_divergence, m, lambda, {}};
  }
  static StatisticRequest w_sum(SumSpecification s) { return {StatisticKind::w_sum, {}, 1.0, std::move(s)}; }
};

/// N i.i.d. draws of the requested statistic. Bitwise reproducible in (request, N, seed,
/// experiment, chunk_size) and independent of the worker count.
inline std::vector<double> sample_statistic(const StatisticRequest& req, std::size_t N, std::uint64_t seed,
                                            const ParallelOptions& par = {}, std::uint64_t experiment = 0) {
  if (N < 1) throw PreconditionError("sample_statistic: N must be >= 1");
  if (par.chunk_size < 1) throw PreconditionError("sample_statistic: chunk_size must be >= 1");
  const RngSeed rs{seed};
  std::vector<double> out(N);
  const std::size_t chunks = (N + par.chunk_size - 1) / par.chunk_size;
  const unsigned threads = resolve_threads(par.threads);

  if (req.kind == StatisticKind::w_sum) {
    if (!req.spec) throw PreconditionError("sample_statistic: w_sum needs a sum specification");
    const SumSpecification& spec = *req.spec;
    spec.validate();
    if (spec.dimension() != 1) throw UnsupportedError("sample_statistic: w_sum supports univariate sums only");
    const MomentOracle& law = spec.oracles[0];
    if (!law.has_sampler()) {
      throw PreconditionError("sample_statistic: the " + law.family + " law has no sampler");
    }
    const std::int64_t n = spec.sizes[0];
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for_each_chunk(chunks, threads, [&](std::size_t c) {
      std::mt19937_64 rng(rs.child(experiment, c));
      const std::size_t end = std::min(N, (c + 1) * par.chunk_size);
      for (std::size_t i = c * par.chunk_size; i < end; ++i) {
        double s = 0.0;
        for (std::int64_t j = 0; j < n; ++j) s += law.sampler(rng);
        out[i] = s * scale;
      }
    });
    return out;
  }

  const MultinomialModel& m = req.model;
  m.validate();
  const BinomialInverter draw(m.n, m.p1);
  std::vector<double> table(static_cast<std::size_t>(m.n) + 1);
  for (std::int64_t k = 0; k <= m.n; ++k) {
    const CountVector U{k, m.n - k};
    table[static_cast<std::size_t>(k)] =
        req.kind == StatisticKind::pearson ? pearson_statistic(U, m) : power_divergence(U, m, req.lambda);
  }
  for_each_chunk(chunks, threads, [&](std::size_t c) {
    std::mt19937_64 rng(rs.child(experiment, c));
    const std::size_t end = std::min(N, (c + 1) * par.chunk_size);
    for (std::size_t i = c * par.chunk_size; i < end; ++i) out[i] = table[static_cast<std::size_t>(draw(rng))];
  });
  return out;
}

// ---------------------------------------------------------------------------------------
// Empirical distances to chi-square(1)

struct DistanceEstimate {
  double estimate = 0.0;
  double se = 0.0;
  std::size_t N = 0;
  Metric metric = Metric::wasserstein;
  std::string label;
};

/// Sorted distinct values with multiplicities; all estimators run on this form.
struct WeightedSample {
  std::vector<double> values;
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;

  static WeightedSample from(std::vector<double> samples) {
    for (double v : samples) {
      if (!std::isfinite(v)) throw DomainError("WeightedSample: non-finite sample");
    }
    std::sort(samples.begin(), samples.end());
    WeightedSample w;
    for (double v : samples) {
      if (!w.values.empty() && w.values.back() == v) {
        ++w.counts.back();
      } else {
        w.values.push_back(v);
        w.counts.push_back(1);
      }
    }
    w.total = static_cast<std::int64_t>(samples.size());
    return w;
  }

  std::size_t distinct() const noexcept { return values.size(); }
};

namespace detail {

/// E[(Y - x)_+] for Y ~ chi-square(1): the integral of the survival function over [x, inf).
inline double chi2_1_excess(double x) {
  if (x <= 0.0) return 1.0 - x;
  const double s = std::sqrt(x);
  return (1.0 - x) * chi2_1_sf(x) + 2.0 * s * normal_pdf(s);
}

/// Integral of F - c over [a, b].
inline double cdf_minus_level(double a, double b, double c) {
  return (1.0 - c) * (b - a) - (chi2_1_excess(a) - chi2_1_excess(b));
}

/// Point in [a, b] where F = c, given F(a) < c < F(b). Newton in s = sqrt(x), where F is smooth.
inline double level_crossing(double a, double b, double fa, double fb, double c) {
  const double sa = std::sqrt(a), sb = std::sqrt(b);
  double s = sa + (sb - sa) * (c - fa) / (fb - fa);
  for (int it = 0; it < 3; ++it) {
    const double g = std::erf(s / std::numbers::sqrt2) - c;
    const double d = 2.0 * normal_pdf(s);
    if (d <= 0.0) break;
    s = std::clamp(s - g / d, sa, sb);
  }
  return s * s;
}

inline double wasserstein_weighted(const std::vector<double>& v, const std::vector<std::int64_t>& cnt,
                                   std::int64_t total) {
  const double inv = 1.0 / static_cast<double>(total);
  double sum = 0.0;
  double prev = 0.0;
  double f_prev = 0.0;
  double level = 0.0;
  std::int64_t cum = 0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (cnt[k] == 0) continue;
    const double x = v[k];
    const double fx = chi2_1_cdf(x);
    if (x > prev) {
      if (f_prev >= level) {
        sum += std::max(0.0, cdf_minus_level(prev, x, level));
      } else if (fx <= level) {
        sum += std::max(0.0, -cdf_minus_level(prev, x, level));
      } else {
        const double xs = level_crossing(prev, x, f_prev, fx, level);
        sum += std::max(0.0, -cdf_minus_level(prev, xs, level)) + std::max(0.0, cdf_minus_level(xs, x, level));
      }
    }
    cum += cnt[k];
    level = static_cast<double>(cum) * inv;
    prev = x;
    f_prev = fx;
  }
  // Beyond the largest order statistic the empirical CDF is 1.
  return sum + chi2_1_excess(prev);
}

inline double kolmogorov_weighted(const std::vector<double>& v, const std::vector<std::int64_t>& cnt,
                                  std::int64_t total) {
  const double inv = 1.0 / static_cast<double>(total);
  double d = 0.0;
  std::int64_t cum = 0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (cnt[k] == 0) continue;
    const double f = chi2_1_cdf(v[k]);
    const double below = static_cast<double>(cum) * inv;
    cum += cnt[k];
    const double above = static_cast<double>(cum) * inv;
    d = std::max({d, f - below, above - f});
  }
  return std::min(1.0, d);
}

inline void require_nonnegative(const WeightedSample& w, const char* who) {
  if (!w.values.empty() && w.values.front() < 0.0) {
    throw DomainError(std::string(who) + ": chi-square statistics must be nonnegative");
  }
}

}  // namespace detail

struct BootstrapOptions {
  std::size_t resamples = 200;  // 0 disables the standard error
  std::uint64_t seed = 0xb007;
  unsigned threads = 1;
};

/// Bootstrap standard error of stat(counts) over multinomial resamples of the distinct values.
template <class Stat>
double bootstrap_se(const WeightedSample& w, const Stat& stat, const BootstrapOptions& opts) {
  if (opts.resamples == 0) return 0.0;
  if (opts.resamples == 1) throw PreconditionError("bootstrap_se: need at least two resamples");
  const std::size_t K = w.distinct();
  const RngSeed rs{opts.seed};
  std::vector<double> reps(opts.resamples);
  // Few distinct values: draw the resampled multiplicities by sequential conditional binomials.
  const bool by_cells = K * 4 <= static_cast<std::size_t>(w.total);
  std::vector<double> cum_prob;
  if (!by_cells) {
    cum_prob.resize(K);
    std::int64_t acc = 0;
    for (std::size_t k = 0; k < K; ++k) {
      acc += w.counts[k];
      cum_prob[k] = static_cast<double>(acc) / static_cast<double>(w.total);
    }
  }
  for_each_chunk(opts.resamples, resolve_threads(opts.threads), [&](std::size_t b) {
    std::mt19937_64 rng(rs.child(0xb0075, b));
    std::vector<std::int64_t> c(K, 0);
    if (by_cells) {
      std::int64_t left = w.total;
      std::int64_t mass = w.total;
      for (std::size_t k = 0; k + 1 < K && left > 0; ++k) {
        const double p = std::min(1.0, static_cast<double>(w.counts[k]) / static_cast<double>(mass));
        c[k] = std::binomial_distribution<std::int64_t>(left, p)(rng);
        left -= c[k];
        mass -= w.counts[k];
      }
      c[K - 1] += left;
    } else {
      for (std::int64_t i = 0; i < w.total; ++i) {
        const double u = uniform01(rng);
        const auto it = std::upper_bound(cum_prob.begin(), cum_prob.end(), u);
        ++c[std::min<std::size_t>(K - 1, static_cast<std::size_t>(it - cum_prob.begin()))];
      }
    }
    reps[b] = stat(c);
  });
  double mean = 0.0;
  for (double r : reps) mean += r;
  mean /= static_cast<double>(reps.size());
  double ss = 0.0;
  for (double r : reps) ss += (r - mean) * (r - mean);
  return std::sqrt(ss / static_cast<double>(reps.size() - 1));
}

inline constexpr std::size_t kMinDistanceSamples = 100;

/// W1(empirical, chi-square(1)) computed exactly between order statistics, with the
/// analytic tail beyond the sample maximum.
inline DistanceEstimate empirical_wasserstein_chi2_1(const WeightedSample& w, const BootstrapOptions& boot = {}) {
  if (w.total < static_cast<std::int64_t>(kMinDistanceSamples)) {
    throw PreconditionError("empirical_wasserstein_chi2_1: need N >= " + std::to_string(kMinDistanceSamples));
  }
  detail::require_nonnegative(w, "empirical_wasserstein_chi2_1");
  auto stat = [&](const std::vector<std::int64_t>& c) { return detail::wasserstein_weighted(w.values, c, w.total); };
  return {stat(w.counts), bootstrap_se(w, stat, boot), static_cast<std::size_t>(w.total), Metric::wasserstein,
          "W1"};
}

inline DistanceEstimate empirical_wasserstein_chi2_1(std::vector<double> samples, const BootstrapOptions& boot = {}) {
  return empirical_wasserstein_chi2_1(WeightedSample::from(std::move(samples)), boot);
}

/// One-sample KS statistic sup |F_N - F| against chi-square(1).
inline DistanceEstimate empirical_kolmogorov_chi2_1(const WeightedSample& w, const BootstrapOptions& boot = {}) {
  if (w.total < 1) throw PreconditionError("empirical_kolmogorov_chi2_1: empty sample");
  auto stat = [&](const std::vector<std::int64_t>& c) { return detail::kolmogorov_weighted(w.values, c, w.total); };
  return {stat(w.counts), bootstrap_se(w, stat, boot), static_cast<std::size_t>(w.total), Metric::kolmogorov, "KS"};
}

inline DistanceEstimate empirical_kolmogorov_chi2_1(std::vector<double> samples, const BootstrapOptions& boot = {}) {
  return empirical_kolmogorov_chi2_1(WeightedSample::from(std::move(samples)), boot);
}

// ---------------------------------------------------------------------------------------
// Smooth test functions

/// A test function on [0, inf) with sup norms of its first two derivatives there.
/// Breakpoints mark kinks of higher derivatives and guide the quadrature.
struct TestFunction {
  std::string name;
  std::function<double(double)> h;
  double d1_norm = 0.0;
  double d2_norm = 0.0;
  std::vector<double> breakpoints;

  TestFunctionNorms norms() const { return TestFunctionNorms({d1_norm, d2_norm}); }
};

/// The smoothing bump: 1 up to z, quadratic descent over [z, z + alpha], 0 beyond.
inline TestFunction smoothing_bump(double z, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw PreconditionError("smoothing_bump: alpha must be > 0");
  if (!(z > 0.0)) throw PreconditionError("smoothing_bump: z must be > 0");
  auto h = [z, alpha](double x) {
    if (x <= z) return 1.0;
    if (x <= z + 0.5 * alpha) return 1.0 - 2.0 * (x - z) * (x - z) / (alpha * alpha);
    if (x <= z + alpha) return 2.0 * (x - z - alpha) * (x - z - alpha) / (alpha * alpha);
    return 0.0;
  };
  return {"bump(z=" + std::to_string(z) + ",alpha=" + std::to_string(alpha) + ")", h, 2.0 / alpha,
          4.0 / (alpha * alpha), {z, z + 0.5 * alpha, z + alpha}};
}

inline TestFunction sine_test(double a) {
  return {"sin(" + std::to_string(a) + "x)", [a](double x) { return std::sin(a * x); }, std::fabs(a), a * a, {}};
}

inline TestFunction exp_decay_test() {
  return {"exp(-x)", [](double x) { return std::exp(-x); }, 1.0, 1.0, {}};
}

inline TestFunction reciprocal_test() {
  return {"1/(1+x)", [](double x) { return 1.0 / (1.0 + x); }, 1.0, 2.0, {}};
}

/// Default audit battery.
inline std::vector<TestFunction> default_battery() {
  return {sine_test(1.0), sine_test(0.5), exp_decay_test(), reciprocal_test(), smoothing_bump(1.0, 1.0)};
}

/// E[h(Y)] for Y ~ chi-square(1) via Y = S^2, S half-normal.
inline double chi2_1_expectation(const TestFunction& t) {
  auto g = [&](double s) {
    const double v = t.h(s * s) * 2.0 * normal_pdf(s);
    if (!std::isfinite(v)) throw DomainError("chi2_1_expectation: " + t.name + " is not finite on the support");
    return v;
  };
  std::vector<double> cuts{0.0};
  for (double b : t.breakpoints) {
    if (b > 0.0) cuts.push_back(std::sqrt(b));
  }
  std::sort(cuts.begin(), cuts.end());
  quad::AdaptiveOptions opts;
  opts.abs_tol = 1e-13;
  double total = 0.0;
  try {
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += quad::integrate(g, cuts[i], cuts[i + 1], opts).value;
    total += quad::integrate_to_infinity(g, cuts.back(), opts).value;
  } catch (const QuadratureError&) {
    throw DomainError("chi2_1_expectation: " + t.name + " is not integrable against chi-square(1)");
  }
  if (!std::isfinite(total)) throw DomainError("chi2_1_expectation: " + t.name + " is not integrable");
  return total;
}

/// |mean h(samples) - E h(Y)| with the sample standard error of the mean.
inline DistanceEstimate smooth_discrepancy(const WeightedSample& w, const TestFunction& t,
                                           std::optional<double> expected = {}) {
  if (w.total < 2) throw PreconditionError("smooth_discrepancy: need at least two samples");
  if (!t.h) throw PreconditionError("smooth_discrepancy: empty test function");
  const double target = expected ? *expected : chi2_1_expectation(t);
  double mean = 0.0;
  double m2 = 0.0;
  std::int64_t seen = 0;
  for (std::size_t k = 0; k < w.distinct(); ++k) {
    const double v = t.h(w.values[k]);
    if (!std::isfinite(v)) throw DomainError("smooth_discrepancy: " + t.name + " is not finite at a sample");
    const std::int64_t c = w.counts[k];
    const double delta = v - mean;
    const std::int64_t after = seen + c;
    mean += delta * static_cast<double>(c) / static_cast<double>(after);
    m2 += delta * delta * static_cast<double>(seen) * static_cast<double>(c) / static_cast<double>(after);
    seen = after;
  }
  const double N = static_cast<double>(w.total);
  const double se = std::sqrt(m2 / (N - 1.0) / N);
  return {std::fabs(mean - target), se, static_cast<std::size_t>(w.total), Metric::smooth, t.name};
}

// ---------------------------------------------------------------------------------------
// Audits

/// Grid experiment. For pearson/power_divergence the grid is n_values x p1_values (x lambdas);
/// for w_sum it is n_values with `law`, and the audited statistic is W^2.
struct AuditExperiment {
  StatisticKind kind = StatisticKind::pearson;
  Metric metric = Metric::wasserstein;
  std::vector<std::int64_t> n_values;
  std::vector<double> p1_values;
  std::vector<double> lambdas{1.0};
  std::optional<MomentOracle> law;
  std::vector<TestFunction> battery;  // smooth metric only
  std::size_t N = 1000000;
  std::uint64_t seed = 1;
  bool strict = true;
  std::size_t bootstrap = 200;
  ParallelOptions parallel;
  double se_multiplier = 5.0;
};

struct AuditRow {
  std::vector<std::pair<std::string, double>> params;
  std::string statistic;
  std::string test_function;
  double bound = 0.0;
  bool certified = true;
  double estimate = 0.0;
  double se = 0.0;
  double margin = 0.0;
  bool pass = false;
};

struct AuditResult {
  std::vector<AuditRow> rows;
  bool all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const AuditRow& r) { return r.pass; });
  }
};

namespace detail {

struct GridPoint {
  std::int64_t n = 1;
  double p1 = 0.5;
  double lambda = 1.0;
};

inline std::vector<GridPoint> audit_grid(const AuditExperiment& e) {
  if (e.n_values.empty()) throw PreconditionError("audit: empty n grid");
  std::vector<GridPoint> g;
  if (e.kind == StatisticKind::w_sum) {
    for (auto n : e.n_values) g.push_back({n, 0.5, 1.0});
    return g;
  }
  if (e.p1_values.empty()) throw PreconditionError("audit: empty p1 grid");
  const std::vector<double> lambdas = e.kind == StatisticKind::pearson ? std::vector<double>{1.0} : e.lambdas;
  if (lambdas.empty()) throw PreconditionError("audit: empty lambda grid");
  for (auto n : e.n_values) {
    for (double p : e.p1_values) {
      for (double l : lambdas) g.push_back({n, p, l});
    }
  }
  return g;
}

inline BoundReport audit_bound(const AuditExperiment& e, const GridPoint& g, const TestFunctionNorms& norms) {
  if (e.kind == StatisticKind::w_sum) return w2_generic_bounds(e.metric, *e.law, g.n, norms);
  const MultinomialModel m(g.n, g.p1);
  if (e.metric == Metric::kolmogorov) {
    return e.kind == StatisticKind::pearson ? bound_pearson(Metric::kolmogorov, m) : kolmogorov_bound_pd(m, g.lambda);
  }
  return e.kind == StatisticKind::pearson ? bound_pearson(e.metric, m, norms)
                                          : bound_power_divergence(e.metric, m, g.lambda, norms);
}

}  // namespace detail

/// Runs the experiment. A row passes iff estimate + se_multiplier * SE <= bound. In strict
/// mode a non-certified bound is a configuration error.
inline AuditResult audit(const AuditExperiment& e) {
  if (e.N < kMinDistanceSamples) {
    throw PreconditionError("audit: N must be >= " + std::to_string(kMinDistanceSamples));
  }
  if (e.metric == Metric::smooth_p) throw UnsupportedError("audit: smooth_p is not audited");
  if (e.metric == Metric::smooth && e.battery.empty()) throw PreconditionError("audit: smooth metric needs a battery");
  if (e.kind == StatisticKind::w_sum) {
    if (!e.law) throw PreconditionError("audit: w_sum needs a summand law");
    if (e.metric == Metric::kolmogorov) throw UnsupportedError("audit: no Kolmogorov bound for squared sums");
  }
  for (double l : e.lambdas) stein::detail::require_lambda(l);
  const auto grid = detail::audit_grid(e);
  const unsigned threads = resolve_threads(e.parallel.threads);
  const RngSeed rs{e.seed};

  AuditResult result;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const auto& g = grid[gi];
    std::vector<std::pair<std::string, double>> params{{"n", static_cast<double>(g.n)}};
    if (e.kind != StatisticKind::w_sum) params.emplace_back("p1", g.p1);
    if (e.kind == StatisticKind::power_divergence) params.emplace_back("lambda", g.lambda);

    // Bounds first so strict mode fails before any sampling.
    std::vector<BoundReport> bounds;
    if (e.metric == Metric::smooth) {
      for (const auto& t : e.battery) bounds.push_back(detail::audit_bound(e, g, t.norms()));
    } else {
      bounds.push_back(detail::audit_bound(e, g, {}));
    }
    for (const auto& b : bounds) {
      if (e.strict && !b.certified) {
        throw PreconditionError("audit: bound " + b.provenance + " is not certified at this grid point (strict mode)");
      }
    }

    StatisticRequest req;
    if (e.kind == StatisticKind::w_sum) {
      req = StatisticRequest::w_sum(SumSpecification::iid(g.n, *e.law));
    } else if (e.kind == StatisticKind::pearson) {
      req = StatisticRequest::pearson(MultinomialModel(g.n, g.p1));
    } else {
      req = StatisticRequest::power_divergence(MultinomialModel(g.n, g.p1), g.lambda);
    }
    ParallelOptions par = e.parallel;
    par.threads = threads;
    auto samples = sample_statistic(req, e.N, rs.child(gi, 0), par, gi);
    if (e.kind == StatisticKind::w_sum) {
      for (double& v : samples) v *= v;
    }
    const auto w = WeightedSample::from(std::move(samples));
    const BootstrapOptions boot{e.bootstrap, rs.child(gi, 1), threads};

    std::vector<DistanceEstimate> est;
    std::vector<std::string> names;
    if (e.metric == Metric::wasserstein) {
      est.push_back(empirical_wasserstein_chi2_1(w, boot));
      names.emplace_back("");
    } else if (e.metric == Metric::kolmogorov) {
      est.push_back(empirical_kolmogorov_chi2_1(w, boot));
      names.emplace_back("");
    } else {
      for (const auto& t : e.battery) {
        est.push_back(smooth_discrepancy(w, t));
        names.push_back(t.name);
      }
    }
    for (std::size_t i = 0; i < est.size(); ++i) {
      AuditRow row;
      row.params = params;
      row.statistic = to_string(e.kind);
      row.test_function = names[i];
      row.bound = bounds[i].value;
      row.certified = bounds[i].certified;
      row.estimate = est[i].estimate;
      row.se = est[i].se;
      row.margin = row.bound - (row.estimate + e.se_multiplier * row.se);
      row.pass = row.margin >= 0.0;
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

}  // namespace stein::mc
