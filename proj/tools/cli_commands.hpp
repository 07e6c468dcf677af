#pragma once

// Command implementations for stein_audit. Kept in a header so tests can drive them in-process.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stein/catalog.hpp"
#include "stein/limit_bounds.hpp"
#include "stein/monte_carlo.hpp"
#include "stein/power_divergence.hpp"
#include "stein/selfcheck.hpp"
#include "stein/stein_solution.hpp"

namespace stein::cli {

using json = nlohmann::json;

enum ExitCode : int { kPass = 0, kFail = 1, kUsage = 2 };

/// Bad flags, bad config, or a request the library rejects up front. Maps to exit 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------------------
// Report tables

using Cell = std::variant<std::string, double, std::int64_t, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("Table: row width does not match the header");
    rows.push_back(std::move(row));
  }
};

inline std::string format_double(double v, int digits = 17) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

inline std::string cell_text(const Cell& c, int digits = 17) {
  return std::visit(
      [digits](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) return v;
        if constexpr (std::is_same_v<T, double>) return format_double(v, digits);
        if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(v);
        if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
      },
      c);
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string render_csv(const Table& t, const json& meta) {
  std::ostringstream os;
  if (meta.contains("generated")) os << "# generated: " << meta["generated"].get<std::string>() << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_field(t.columns[i]);
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(cell_text(row[i]));
    os << "\n";
  }
  return os.str();
}

inline json cell_json(const Cell& c) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) return format_double(v);
        }
        return v;
      },
      c);
}

inline std::string render_json(const Table& t, const json& meta) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = cell_json(row[i]);
    rows.push_back(std::move(obj));
  }
  json doc{{"meta", meta}, {"columns", t.columns}, {"rows", std::move(rows)}};
  return doc.dump(2) + "\n";
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct OutputOptions {
  std::string out;
  std::string format = "csv";
  bool deterministic = false;
  std::uint64_t seed = 20240611;
};

inline void write_report(const Table& t, json meta, const OutputOptions& o) {
  if (o.format != "csv" && o.format != "json") throw UsageError("--format must be csv or json, got '" + o.format + "'");
  if (o.out.empty()) return;
  if (!o.deterministic) meta["generated"] = utc_timestamp();
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw UsageError("cannot open output file '" + o.out + "'");
  f << (o.format == "csv" ? render_csv(t, meta) : render_json(t, meta));
}

/// Aligned, shortened rendering for stdout.
inline void print_summary(std::ostream& os, const Table& t) {
  std::vector<std::size_t> width(t.columns.size());
  for (std::size_t i = 0; i < t.columns.size(); ++i) width[i] = t.columns[i].size();
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], cell_text(row[i], 6).size());
  }
  auto line = [&](auto text_of) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      os << (i ? "  " : "") << std::left << std::setw(static_cast<int>(width[i])) << text_of(i);
    }
    os << "\n";
  };
  line([&](std::size_t i) { return t.columns[i]; });
  for (const auto& row : t.rows) line([&](std::size_t i) { return cell_text(row[i], 6); });
}

// ---------------------------------------------------------------------------------------
// Config and value parsing

inline json load_config(const std::string& path, const std::set<std::string>& allowed) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read config '" + path + "'");
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::parse_error& e) {
    throw UsageError("config '" + path + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw UsageError("config '" + path + "' must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (!allowed.count(key)) {
      std::string known;
      for (const auto& k : allowed) known += (known.empty() ? "" : ", ") + k;
      throw UsageError("config '" + path + "': unknown key '" + key + "' (allowed: " + known + ")");
    }
  }
  return doc;
}

inline Metric parse_metric(const std::string& s) {
  if (s == "wasserstein") return Metric::wasserstein;
  if (s == "smooth") return Metric::smooth;
  if (s == "kolmogorov") return Metric::kolmogorov;
  throw UsageError("unknown metric '" + s + "' (known: wasserstein, smooth, kolmogorov)");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

inline double parse_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError(what + ": '" + s + "' is not a number");
  }
}

/// "rademacher", "uniform", or "bernoulli:P".
inline MomentOracle parse_law(const std::string& s) {
  const auto parts = split(s, ':');
  if (s == "rademacher") return rademacher();
  if (s == "uniform") return uniform_standardized();
  if (parts.size() == 2 && parts[0] == "bernoulli") return bernoulli_standardized(parse_number(parts[1], "law"));
  throw UsageError("unknown law '" + s + "' (known: rademacher, uniform, bernoulli:P)");
}

/// "sin:A", "exp_neg", "reciprocal", "bump:Z:ALPHA".
inline mc::TestFunction parse_test_function(const std::string& s) {
  const auto parts = split(s, ':');
  if (s == "exp_neg") return mc::exp_decay_test();
  if (s == "reciprocal") return mc::reciprocal_test();
  if (parts.size() == 2 && parts[0] == "sin") return mc::sine_test(parse_number(parts[1], "battery"));
  if (parts.size() == 3 && parts[0] == "bump") {
    return mc::smoothing_bump(parse_number(parts[1], "battery"), parse_number(parts[2], "battery"));
  }
  throw UsageError("unknown test function '" + s + "' (known: sin:A, exp_neg, reciprocal, bump:Z:ALPHA)");
}

struct GridSpec {
  double lo = -10.0;
  double hi = 10.0;
  double step = 1.0;

  static GridSpec parse(const std::string& s) {
    const auto p = split(s, ':');
    if (p.size() != 3) throw UsageError("--grid expects LO:HI:STEP, got '" + s + "'");
    GridSpec g{parse_number(p[0], "grid"), parse_number(p[1], "grid"), parse_number(p[2], "grid")};
    if (!(g.step > 0.0) || !(g.hi >= g.lo)) throw UsageError("--grid needs LO <= HI and STEP > 0");
    return g;
  }

  std::vector<std::vector<double>> points() const {
    std::vector<std::vector<double>> out;
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    for (std::size_t i = 0; i <= count; ++i) out.push_back({lo + static_cast<double>(i) * step});
    return out;
  }
};

// ---------------------------------------------------------------------------------------
// bound

struct BoundArgs {
  std::string kind;  // pearson | pd | general
  std::int64_t n = 0;
  double p1 = 0.5;
  double lambda = 1.0;
  std::string metric = "wasserstein";
  std::vector<double> norms;
  std::string law;
  double alpha = 0.0;  // > 0 fixes the Kolmogorov smoothing parameter
};

inline const std::set<std::string> kBoundKeys{"kind", "n", "p1", "lambda", "metric", "norms", "law", "alpha",
                                              "output", "format"};

inline Table cmd_bound(const BoundArgs& a) {
  if (a.n < 1) throw UsageError("bound: --n must be >= 1");
  const Metric metric = parse_metric(a.metric);
  const TestFunctionNorms norms(a.norms);
  BoundReport rep;
  double p1 = a.p1;
  double lambda = a.lambda;
  if (a.kind == "pearson") {
    rep = bound_pearson(metric, MultinomialModel(a.n, a.p1), norms);
    lambda = 1.0;
  } else if (a.kind == "pd") {
    const MultinomialModel m(a.n, a.p1);
    if (metric == Metric::kolmogorov) {
      rep = kolmogorov_bound_pd(m, a.lambda, a.alpha > 0.0 ? AlphaPolicy::fixed(a.alpha) : AlphaPolicy::optimize());
    } else {
      rep = bound_power_divergence(metric, m, a.lambda, norms);
    }
  } else if (a.kind == "general") {
    if (a.law.empty()) throw UsageError("bound general: --law is required");
    rep = w2_generic_bounds(metric, parse_law(a.law), a.n, norms);
    p1 = std::numeric_limits<double>::quiet_NaN();
    lambda = std::numeric_limits<double>::quiet_NaN();
  } else {
    throw UsageError("bound: kind must be pearson, pd or general");
  }
  Table t{{"kind", "n", "p1", "lambda", "metric", "bound", "certified", "capped", "provenance"}, {}};
  t.add({a.kind, a.n, p1, lambda, to_string(metric), rep.value, rep.certified, rep.capped, rep.provenance});
  return t;
}

// ---------------------------------------------------------------------------------------
// verify-solution

struct VerifyArgs {
  std::string g = "quadratic";
  std::string h = "identity";
  std::vector<int> orders{1, 2, 3};
  bool psi = false;
  std::string grid = "-10:10:1";
  double bound_scale = 1.0;
  double residual_tol = 1e-6;
  double tolerance = 1e-8;
};

inline const std::set<std::string> kVerifyKeys{"g", "h", "orders", "psi", "grid", "bound_scale", "residual_tol",
                                               "tolerance", "output", "format"};

/// Claims checked for a monomial g = w^q: variant (i) with the class of matching order, in the
/// starred class when h is the identity. psi claims cover every (m, k) with m + k <= 4.
inline std::vector<DerivativeClaim> matched_claims(int q, bool identity_h, const std::vector<int>& orders, bool psi,
                                                   double bound_scale = 1.0) {
  std::vector<DerivativeClaim> out;
  for (int n : orders) {
    if (n < 1) throw UsageError("verify-solution: orders must be >= 1");
    DerivativeClaim c;
    c.order = n;
    c.P = catalog::monomial_dominating(q, n, identity_h);
    c.bound_scale = bound_scale;
    out.push_back(c);
  }
  if (psi) {
    for (int m = 1; m <= 3; ++m) {
      for (int k = 1; m + k <= 4; ++k) {
        DerivativeClaim c;
        c.target = DerivativeTarget::psi;
        c.m = m;
        c.order = k;
        c.P = catalog::monomial_dominating(q, m + k, identity_h);
        c.bound_scale = bound_scale;
        out.push_back(c);
      }
    }
  }
  return out;
}

struct VerifyOutcome {
  Table table;
  bool passed = true;
};

inline VerifyOutcome cmd_verify_solution(const VerifyArgs& a) {
  const int q = catalog::transformation_degree(a.g);
  const auto g = catalog::transformation(a.g);
  const auto entry = catalog::test_function(a.h);
  const auto grid = GridSpec::parse(a.grid).points();
  if (!(a.bound_scale > 0.0)) throw UsageError("verify-solution: --bound-scale must be > 0");
  QuadratureConfig cfg;
  cfg.tolerance = a.tolerance;
  if (!entry.h.is_identity()) cfg.inner_rule = InnerRule::adaptive;
  cfg.validate();

  VerifyOutcome out;
  out.table.columns = {"check", "m", "order", "variant", "value", "argmax", "limit", "pass"};
  const auto sigma = CovarianceSpec::identity(1);
  const auto res = stein_residual(entry.h, g, sigma, grid, cfg);
  const bool res_ok = res.max_residual <= a.residual_tol;
  out.table.add({std::string("residual"), std::int64_t{0}, std::int64_t{0}, std::string(""), res.max_residual,
                 res.worst_point.empty() ? 0.0 : res.worst_point[0], a.residual_tol, res_ok});
  out.passed = res_ok;

  const auto claims = matched_claims(q, entry.h.is_identity(), a.orders, a.psi, a.bound_scale);
  const auto rep = verify_derivative_bounds(entry.h, g, entry.norms, sigma, claims, grid, cfg);
  for (const auto& c : rep.claims) {
    const bool is_f = c.claim.target == DerivativeTarget::f;
    out.table.add({std::string(is_f ? "f" : "psi"), std::int64_t{c.claim.m}, std::int64_t{c.claim.order},
                   to_string(c.claim.variant), c.max_ratio, c.argmax.empty() ? 0.0 : c.argmax[0], 1.0, c.passed});
  }
  out.passed = out.passed && rep.passed;
  return out;
}

// ---------------------------------------------------------------------------------------
// audit

inline const std::set<std::string> kAuditKeys{"kind", "metric", "grid", "law", "battery", "N", "seed", "bootstrap",
                                              "strict", "output", "format"};

inline mc::AuditExperiment experiment_from_config(const json& cfg) {
  mc::AuditExperiment e;
  const std::string kind = cfg.value("kind", std::string("pearson"));
  if (kind == "pearson") {
    e.kind = mc::StatisticKind::pearson;
  } else if (kind == "pd") {
    e.kind = mc::StatisticKind::power_divergence;
  } else if (kind == "w_sum") {
    e.kind = mc::StatisticKind::w_sum;
  } else {
    throw UsageError("audit: kind must be pearson, pd or w_sum");
  }
  e.metric = parse_metric(cfg.value("metric", std::string("wasserstein")));
  if (!cfg.contains("grid") || !cfg["grid"].is_object()) throw UsageError("audit: config needs a 'grid' object");
  const auto& grid = cfg["grid"];
  for (const auto& [key, _] : grid.items()) {
    if (key != "n" && key != "p1" && key != "lambda") throw UsageError("audit: unknown grid key '" + key + "'");
  }
  e.n_values = grid.value("n", std::vector<std::int64_t>{});
  e.p1_values = grid.value("p1", std::vector<double>{});
  e.lambdas = grid.value("lambda", std::vector<double>{1.0});
  if (cfg.contains("law")) e.law = parse_law(cfg["law"].get<std::string>());
  if (cfg.contains("battery")) {
    for (const auto& s : cfg["battery"].get<std::vector<std::string>>()) e.battery.push_back(parse_test_function(s));
  } else if (e.metric == Metric::smooth) {
    e.battery = mc::default_battery();
  }
  const auto N = cfg.value("N", std::int64_t{1000000});
  if (N < 1) throw UsageError("audit: N must be positive");
  e.N = static_cast<std::size_t>(N);
  e.seed = cfg.value("seed", std::uint64_t{20240611});
  e.bootstrap = cfg.value("bootstrap", std::size_t{200});
  e.strict = cfg.value("strict", true);
  return e;
}

inline Table audit_table(const mc::AuditResult& r) {
  Table t{{"statistic", "n", "p1", "lambda", "test_function", "bound", "certified", "estimate", "se", "margin", "pass"},
          {}};
  for (const auto& row : r.rows) {
    double n = 0.0, p1 = std::numeric_limits<double>::quiet_NaN(), lambda = std::numeric_limits<double>::quiet_NaN();
    for (const auto& [k, v] : row.params) {
      if (k == "n") n = v;
      if (k == "p1") p1 = v;
      if (k == "lambda") lambda = v;
    }
    t.add({row.statistic, static_cast<std::int64_t>(n), p1, lambda, row.test_function, row.bound, row.certified,
           row.estimate, row.se, row.margin, row.pass});
  }
  return t;
}

// ---------------------------------------------------------------------------------------
// Entry point

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Explicit normal and chi-square approximation bounds: compute, verify and audit", "stein_audit"};
  app.set_help_flag("--help", "Print this help message and exit");  // -h is taken by verify-solution's --h
  app.require_subcommand(1);

  OutputOptions oo;
  bool seed_given = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", oo.out, "Write the machine-readable report here");
    sub->add_option("--format", oo.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", oo.seed, "Master seed")->each([&](const std::string&) { seed_given = true; });
    sub->add_flag("--deterministic", oo.deterministic, "Omit the timestamp so reports are byte-stable");
  };

  BoundArgs ba;
  std::string bound_config;
  std::string norms_text;
  auto* bound = app.add_subcommand("bound", "Evaluate a bound for Pearson, power divergence or a generic squared sum");
  bound->add_option("kind", ba.kind, "pearson | pd | general")->required()->check(
      CLI::IsMember({"pearson", "pd", "general"}));
  bound->add_option("--n", ba.n, "Number of trials (summands)");
  bound->add_option("--p1", ba.p1, "First cell probability");
  bound->add_option("--lambda", ba.lambda, "Power-divergence index (> -1)");
  bound->add_option("--metric", ba.metric, "wasserstein | smooth | kolmogorov");
  bound->add_option("--norms", norms_text, "||h'||,||h''|| for the smooth metric");
  bound->add_option("--law", ba.law, "Summand law for 'general': rademacher | uniform | bernoulli:P");
  bound->add_option("--alpha", ba.alpha, "Fixed smoothing parameter for the Kolmogorov bound (default: optimize)");
  bound->add_option("--config", bound_config, "JSON config; flags given explicitly take precedence");
  add_common(bound);

  VerifyArgs va;
  std::string verify_config;
  std::string orders_text;
  auto* verify = app.add_subcommand("verify-solution", "Check the Stein solution and its derivative bounds on a grid");
  verify->add_option("--g", va.g, "linear | quadratic | quartic | sextic");
  verify->add_option("--h", va.h, "identity | sin | cos | exp_neg");
  verify->add_option("--orders", orders_text, "Comma-separated derivative orders (default 1,2,3)");
  verify->add_flag("--psi", va.psi, "Also check the second-equation solution for m + k <= 4");
  verify->add_option("--grid", va.grid, "LO:HI:STEP");
  verify->add_option("--bound-scale", va.bound_scale, "Multiply every bound (values < 1 give a negative control)");
  verify->add_option("--residual-tol", va.residual_tol, "Pass threshold for the equation residual");
  verify->add_option("--tolerance", va.tolerance, "Quadrature tolerance");
  verify->add_option("--config", verify_config, "JSON config; flags given explicitly take precedence");
  add_common(verify);

  std::string audit_config;
  unsigned threads = 0;
  auto* aud = app.add_subcommand("audit", "Monte Carlo audit of bounds against empirical distances");
  aud->add_option("--config", audit_config, "Experiment JSON")->required();
  aud->add_option("--threads", threads, "Worker threads (default: STEIN_AUDIT_THREADS or all cores)");
  add_common(aud);

  bool list_only = false;
  auto* self = app.add_subcommand("selfcheck", "Run the inequality property suites and constant reproductions");
  self->add_flag("--list", list_only, "List suites without running them");
  add_common(self);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (bound->parsed()) {
      std::string cfg_format;
      if (!bound_config.empty()) {
        const json cfg = load_config(bound_config, kBoundKeys);
        if (bound->count("kind") == 0 || cfg.contains("kind")) ba.kind = cfg.value("kind", ba.kind);
        if (!bound->count("--n")) ba.n = cfg.value("n", ba.n);
        if (!bound->count("--p1")) ba.p1 = cfg.value("p1", ba.p1);
        if (!bound->count("--lambda")) ba.lambda = cfg.value("lambda", ba.lambda);
        if (!bound->count("--metric")) ba.metric = cfg.value("metric", ba.metric);
        if (!bound->count("--norms") && cfg.contains("norms")) ba.norms = cfg["norms"].get<std::vector<double>>();
        if (!bound->count("--law")) ba.law = cfg.value("law", ba.law);
        if (!bound->count("--alpha")) ba.alpha = cfg.value("alpha", ba.alpha);
        if (!bound->count("--out")) oo.out = cfg.value("output", oo.out);
        if (!bound->count("--format")) oo.format = cfg.value("format", oo.format);
      }
      if (!norms_text.empty()) {
        ba.norms.clear();
        for (const auto& s : split(norms_text, ',')) ba.norms.push_back(parse_number(s, "--norms"));
      }
      const Table t = cmd_bound(ba);
      write_report(t, json{{"command", "bound"}}, oo);
      print_summary(out, t);
      return kPass;
    }

    if (verify->parsed()) {
      if (!verify_config.empty()) {
        const json cfg = load_config(verify_config, kVerifyKeys);
        if (!verify->count("--g")) va.g = cfg.value("g", va.g);
        if (!verify->count("--h")) va.h = cfg.value("h", va.h);
        if (!verify->count("--orders") && cfg.contains("orders")) va.orders = cfg["orders"].get<std::vector<int>>();
        if (!verify->count("--psi")) va.psi = cfg.value("psi", va.psi);
        if (!verify->count("--grid")) va.grid = cfg.value("grid", va.grid);
        if (!verify->count("--bound-scale")) va.bound_scale = cfg.value("bound_scale", va.bound_scale);
        if (!verify->count("--residual-tol")) va.residual_tol = cfg.value("residual_tol", va.residual_tol);
        if (!verify->count("--tolerance")) va.tolerance = cfg.value("tolerance", va.tolerance);
        if (!verify->count("--out")) oo.out = cfg.value("output", oo.out);
        if (!verify->count("--format")) oo.format = cfg.value("format", oo.format);
      }
      if (!orders_text.empty()) {
        va.orders.clear();
        for (const auto& s : split(orders_text, ',')) va.orders.push_back(static_cast<int>(parse_number(s, "--orders")));
      }
      const auto res = cmd_verify_solution(va);
      write_report(res.table, json{{"command", "verify-solution"}, {"g", va.g}, {"h", va.h}}, oo);
      print_summary(out, res.table);
      out << (res.passed ? "PASS" : "FAIL") << "\n";
      return res.passed ? kPass : kFail;
    }

    if (aud->parsed()) {
      const json cfg = load_config(audit_config, kAuditKeys);
      auto e = experiment_from_config(cfg);
      if (seed_given) e.seed = oo.seed;
      e.parallel.threads = threads;
      if (!aud->count("--out")) oo.out = cfg.value("output", oo.out);
      if (!aud->count("--format")) oo.format = cfg.value("format", oo.format);
      if (oo.format != "csv" && oo.format != "json") throw UsageError("format must be csv or json");
      const auto result = mc::audit(e);
      const Table t = audit_table(result);
      write_report(t, json{{"command", "audit"}, {"seed", e.seed}, {"N", e.N}, {"metric", to_string(e.metric)}}, oo);
      print_summary(out, t);
      out << (result.all_pass() ? "PASS" : "FAIL") << "\n";
      return result.all_pass() ? kPass : kFail;
    }

    if (self->parsed()) {
      const auto suites = selfcheck::registry(oo.seed);
      if (list_only) {
        for (const auto& s : suites) out << s.name << "\n";
        return kPass;
      }
      Table t{{"suite", "cases", "failures", "pass", "first_failure"}, {}};
      bool all = true;
      for (const auto& s : suites) {
        const auto r = s.run();
        all = all && r.passed();
        out << (r.passed() ? "PASS " : "FAIL ") << r.name << " (" << r.cases << " cases)";
        if (!r.passed()) out << ": " << r.first_failure;
        out << "\n";
        t.add({r.name, static_cast<std::int64_t>(r.cases), static_cast<std::int64_t>(r.failures), r.passed(),
               r.first_failure});
      }
      write_report(t, json{{"command", "selfcheck"}, {"seed", oo.seed}}, oo);
      return all ? kPass : kFail;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const UnsupportedError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const json::exception& e) {
    err << "error: bad config value: " << e.what() << "\n";
    return kUsage;
  } catch (const QuadratureError& e) {
    err << "failure: " << e.what() << "\n";
    return kFail;
  }
  return kUsage;
}

}  // namespace stein::cli
