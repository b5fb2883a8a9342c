#ifndef TAILBOUND_CLI_HPP
#define TAILBOUND_CLI_HPP

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tailbound/bennett.hpp"
#include "tailbound/distributions.hpp"
#include "tailbound/error.hpp"
#include "tailbound/hoeffding.hpp"
#include "tailbound/moments.hpp"
#include "tailbound/oracle.hpp"
#include "tailbound/serialize.hpp"

namespace tailbound::cli {

enum ExitCode : int {
  ok = 0,
  config_error = 2,
  infeasible_moments = 3,
  solver_failure = 4,
  verification_failure = 5,
};

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::infeasible:
    case ErrorKind::degenerate: return infeasible_moments;
    case ErrorKind::solver:
    case ErrorKind::consistency:
    case ErrorKind::oracle: return solver_failure;
    default: return config_error;
  }
}

struct RunConfig {
  std::string command;
  std::string family = "hoeffding";
  std::string dist = "uniform";
  std::map<std::string, double> params;
  std::optional<double> lo;
  std::optional<double> hi;
  std::string data_path;
  std::size_t n = 1;
  std::vector<double> t_values;
  std::string t_grid;
  bool per_var = false;
  std::vector<int> p_list{1};
  std::string mode = "one_sided";
  std::string format = "csv";
  std::string output;
  std::uint64_t trials = 1000000;
  std::uint64_t seed = 42;
  double inflate = 1.0;
  double alpha = 0.05;
  double small_t_c = 1.0;
  double k_constant = 1.0;
  std::optional<double> sigma2;
  bool squared_d_n = false;
};

namespace detail {

using tailbound::detail::fail;
using tailbound::detail::require;

inline std::vector<double> parse_grid(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  require(parts.size() == 3, ErrorKind::config, "--t-grid expects start:stop:count, got '" + spec + "'");
  double a = 0.0;
  double b = 0.0;
  long count = 0;
  try {
    a = std::stod(parts[0]);
    b = std::stod(parts[1]);
    count = std::stol(parts[2]);
  } catch (const std::exception&) {
    fail(ErrorKind::config, "--t-grid expects start:stop:count, got '" + spec + "'");
  }
  require(count >= 1, ErrorKind::config, "--t-grid count must be >= 1");
  std::vector<double> out;
  for (long i = 0; i < count; ++i) {
    out.push_back(count == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  return out;
}

// Thresholds as given on the command line (absolute, or per variable with --per-var).
inline std::vector<double> raw_thresholds(const RunConfig& cfg) {
  std::vector<double> t = cfg.t_values;
  if (!cfg.t_grid.empty()) {
    const auto g = parse_grid(cfg.t_grid);
    t.insert(t.end(), g.begin(), g.end());
  }
  require(!t.empty(), ErrorKind::config, "no thresholds given; use --t or --t-grid");
  for (std::size_t i = 0; i < t.size(); ++i) {
    require(std::isfinite(t[i]) && t[i] > 0.0, ErrorKind::config,
            "thresholds must be strictly positive, got " + format_double(t[i]));
    require(i == 0 || t[i] > t[i - 1], ErrorKind::config, "thresholds must be strictly ascending");
  }
  return t;
}

inline std::vector<double> absolute_thresholds(const RunConfig& cfg) {
  auto t = raw_thresholds(cfg);
  if (cfg.per_var) {
    for (double& v : t) v *= static_cast<double>(cfg.n);
  }
  return t;
}

inline void check_p_list(const RunConfig& cfg) {
  require(!cfg.p_list.empty(), ErrorKind::config, "no moment orders given");
  for (int p : cfg.p_list) require(p >= 1, ErrorKind::config, "moment orders must be >= 1");
}

// The summand: a named law or an empirical sample on [lo, hi].
struct Source {
  std::optional<Distribution> law;
  std::vector<double> samples;
  Support support = Support::interval(0.0, 1.0);

  MomentVector moments(int p) const {
    if (law) return law->moments(p);
    return moments_from_samples(samples, p, support);
  }

  // Moments of X - E X, with the variable bounded above by hi - E X.
  MomentVector centered_moments(int p) const {
    if (law) return law->centered().moments(p);
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= static_cast<double>(samples.size());
    std::vector<double> shifted;
    shifted.reserve(samples.size());
    for (double x : samples) shifted.push_back(x - mean);
    return moments_from_samples(shifted, p,
                                Support::interval(*support.lower - mean, support.upper - mean));
  }

  const Distribution& require_law(const char* what) const {
    require(law.has_value(), ErrorKind::config, std::string(what) + " needs --dist, not --data");
    return *law;
  }
};

inline Source make_source(const RunConfig& cfg) {
  Source src;
  if (!cfg.data_path.empty()) {
    require(cfg.lo && cfg.hi, ErrorKind::config, "--data needs the support given by --lo and --hi");
    std::ifstream in(cfg.data_path);
    require(in.good(), ErrorKind::config, "cannot open data file '" + cfg.data_path + "'");
    src.samples = read_samples(in);
    require(!src.samples.empty(), ErrorKind::empty_input, "data file holds no samples");
    src.support = Support::interval(*cfg.lo, *cfg.hi);
    return src;
  }
  auto params = cfg.params;
  if (cfg.lo) params["lo"] = *cfg.lo;
  if (cfg.hi) params["hi"] = *cfg.hi;
  src.law = Distribution::from_tag(cfg.dist, params);
  src.support = src.law->support();
  return src;
}

// Upper-bound version of centered moments, scaled by the inflation factor.
inline MomentVector inflated(const MomentVector& mv, double factor) {
  if (factor == 1.0) return mv;
  require(factor > 1.0, ErrorKind::config, "--inflate must be >= 1");
  const int p = mv.order();
  std::vector<double> mu(mv.raw().begin(), mv.raw().end());
  for (int k = 2; k <= p; ++k) {
    double& m = mu[static_cast<std::size_t>(k - 1)];
    if (m > 0.0) m *= factor;
  }
  const double pos = mv.positive_part(p) * factor;
  return MomentVector(std::move(mu), mv.support(), pos, MomentKind::upper_bound);
}

inline HoeffdingMode parse_mode(const std::string& s) {
  if (s == "limit") return HoeffdingMode::limit_p_infinity;
  return hoeffding_mode_from_string(s);
}

inline HoeffdingBound hoeffding_record(const RunConfig& cfg, const Source& src, HoeffdingMode mode,
                                       double t, int p) {
  const std::size_t n = cfg.n;
  switch (mode) {
    case HoeffdingMode::one_sided:
      return hoeffding_bound(EnsembleSpec::iid(src.moments(std::max(p, 2)), n), t, p);
    case HoeffdingMode::two_sided:
      return hoeffding_two_sided(EnsembleSpec::iid(src.moments(std::max(p, 2)), n), t, p);
    case HoeffdingMode::iid:
      return hoeffding_iid(src.moments(std::max(p, 2)), n, t / static_cast<double>(n), p);
    case HoeffdingMode::small_t:
      return hoeffding_small_t(src.moments(std::max(p, 2)), n, t / static_cast<double>(n),
                               cfg.small_t_c, p);
    case HoeffdingMode::limit_p_infinity:
      return hoeffding_limit_iid(src.require_law("limit mode"), n, t);
    case HoeffdingMode::missing_factor: {
      MissingFactorOptions opt;
      opt.k_constant = cfg.k_constant;
      opt.sigma2 = cfg.sigma2;
      opt.squared_d_n = cfg.squared_d_n;
      return hoeffding_missing_factor(EnsembleSpec::iid(src.centered_moments(std::max(p, 2)), n), t,
                                      p, opt);
    }
  }
  fail(ErrorKind::config, "unsupported mode");
}

inline BennettBound bennett_record(const RunConfig& cfg, const Source& src, double t, int p) {
  const auto spec = EnsembleSpec::iid(inflated(src.centered_moments(p), cfg.inflate), cfg.n);
  if (p == 3) {
    const auto& mv = spec[0];
    const double a1 = mv.support().upper * mv.moment(2) / mv.positive_part(3) - 1.0;
    if (a1 >= 0.0) return bennett_p3_lambert(spec, t);
  }
  return bennett_bound(spec, t, p);
}

struct Record {
  std::string family;
  std::optional<HoeffdingBound> hoeffding;
  std::optional<BennettBound> bennett;

  double t() const { return hoeffding ? hoeffding->t : bennett->t; }
  int p() const { return hoeffding ? hoeffding->p : bennett->p; }
  double bound() const { return hoeffding ? hoeffding->bound : bennett->bound; }
  std::string mode() const {
    return hoeffding ? to_string(hoeffding->mode) : to_string(bennett->roots.method);
  }

  json to_json() const {
    json j = hoeffding ? json(*hoeffding) : json(*bennett);
    j["family"] = family;
    return j;
  }
};

inline std::vector<Record> compute_records(const RunConfig& cfg, const Source& src) {
  require(cfg.family == "hoeffding" || cfg.family == "bennett" || cfg.family == "both",
          ErrorKind::config, "--family must be hoeffding, bennett or both");
  check_p_list(cfg);
  const bool want_h = cfg.family != "bennett";
  const bool want_b = cfg.family != "hoeffding";
  if (cfg.family == "bennett") {
    for (int p : cfg.p_list) require(p >= 2, ErrorKind::config, "Bennett bounds need --p >= 2");
  }
  const HoeffdingMode mode = parse_mode(cfg.mode);
  std::vector<Record> out;
  for (double t : absolute_thresholds(cfg)) {
    if (want_h) {
      if (mode == HoeffdingMode::limit_p_infinity) {
        out.push_back({"hoeffding", hoeffding_record(cfg, src, mode, t, 0), std::nullopt});
      } else {
        for (int p : cfg.p_list) out.push_back({"hoeffding", hoeffding_record(cfg, src, mode, t, p), std::nullopt});
      }
    }
    if (want_b) {
      for (int p : cfg.p_list) {
        if (p >= 2) out.push_back({"bennett", std::nullopt, bennett_record(cfg, src, t, p)});
      }
    }
  }
  return out;
}

inline std::string opt_field(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

inline void emit_records(const RunConfig& cfg, const std::vector<Record>& records, std::ostream& os) {
  if (cfg.format == "json") {
    json arr = json::array();
    for (const auto& r : records) arr.push_back(r.to_json());
    os << arr.dump(2) << '\n';
    return;
  }
  write_csv_row(os, {"family", "mode", "t", "p", "bound", "s_star", "d_n", "y_star", "w_residual"});
  for (const auto& r : records) {
    if (r.hoeffding) {
      const auto& h = *r.hoeffding;
      write_csv_row(os, {r.family, r.mode(), format_double(h.t), std::to_string(h.p),
                         format_double(h.bound), format_double(h.s_star), opt_field(h.d_n), "", ""});
    } else {
      const auto& b = *r.bennett;
      write_csv_row(os, {r.family, r.mode(), format_double(b.t), std::to_string(b.p),
                         format_double(b.bound), "", "", format_double(b.y_star),
                         opt_field(b.w_residual)});
    }
  }
}

inline int cmd_bound(const RunConfig& cfg, std::ostream& os) {
  const Source src = make_source(cfg);
  emit_records(cfg, compute_records(cfg, src), os);
  return ok;
}

inline int cmd_compare(const RunConfig& cfg, std::ostream& os) {
  check_p_list(cfg);
  const Source src = make_source(cfg);
  const HoeffdingMode mode = parse_mode(cfg.mode);
  const int p = cfg.p_list.back();
  json arr = json::array();
  std::ostringstream csv;
  write_csv_row(csv, {"t", "classical_bound", "new_bound", "ratio"});
  for (double t : absolute_thresholds(cfg)) {
    const double classical = hoeffding_record(cfg, src, HoeffdingMode::one_sided, t, 1).bound;
    const double improved = hoeffding_record(cfg, src, mode, t, p).bound;
    const double ratio = classical / improved;
    write_csv_row(csv, {format_double(t), format_double(classical), format_double(improved),
                        format_double(ratio)});
    arr.push_back({{"t", t}, {"classical_bound", classical}, {"new_bound", improved}, {"ratio", ratio}});
  }
  if (cfg.format == "json") {
    os << arr.dump(2) << '\n';
  } else {
    os << csv.str();
  }
  return ok;
}

inline int cmd_sample_size(const RunConfig& cfg, std::ostream& os) {
  check_p_list(cfg);
  const Source src = make_source(cfg);
  json arr = json::array();
  std::ostringstream csv;
  write_csv_row(csv, {"alpha", "t", "p", "c_bar", "classical_n", "n", "two_sided_bound"});
  bool closed = true;
  for (double t : raw_thresholds(cfg)) {
    for (int p : cfg.p_list) {
      const MomentVector mv = src.moments(std::max(p, 2));
      const SampleSizeResult r = sample_size_for_ci(mv, t, cfg.alpha, p);
      const double check =
          hoeffding_two_sided(EnsembleSpec::iid(mv, r.n), static_cast<double>(r.n) * t, p).bound;
      closed = closed && check <= cfg.alpha;
      json j = r;
      j["two_sided_bound"] = check;
      arr.push_back(j);
      write_csv_row(csv, {format_double(cfg.alpha), format_double(t), std::to_string(p),
                          format_double(r.c_bar), std::to_string(r.classical_n), std::to_string(r.n),
                          format_double(check)});
    }
  }
  if (cfg.format == "json") {
    os << arr.dump(2) << '\n';
  } else {
    os << csv.str();
  }
  require(closed, ErrorKind::consistency, "a returned sample size does not reach the target level");
  return ok;
}

inline int cmd_moments(const RunConfig& cfg, std::ostream& os) {
  check_p_list(cfg);
  const Source src = make_source(cfg);
  const int p = *std::max_element(cfg.p_list.begin(), cfg.p_list.end());
  const MomentVector mv = src.moments(p);
  std::vector<double> pos;
  for (int k = 1; k <= p; ++k) {
    pos.push_back(src.law ? src.law->positive_part(k) : mv.positive_part(k));
  }
  if (cfg.format == "json") {
    json j{{"moments", std::vector<double>(mv.raw().begin(), mv.raw().end())},
           {"positive_part", pos},
           {"support", {*mv.support().lower, mv.support().upper}},
           {"count", src.law ? 0 : src.samples.size()}};
    os << j.dump(2) << '\n';
  } else {
    write_csv_row(os, {"k", "moment", "positive_part"});
    for (int k = 1; k <= p; ++k) {
      write_csv_row(os, {std::to_string(k), format_double(mv.moment(k)),
                         format_double(pos[static_cast<std::size_t>(k - 1)])});
    }
  }
  return ok;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& os) {
  const Source src = make_source(cfg);
  const Distribution& law = src.require_law("verify");
  const auto thresholds = absolute_thresholds(cfg);
  const auto records = compute_records(cfg, src);
  const auto estimates = mc_tail_grid(SumModel::iid(law, cfg.n), thresholds, cfg.trials, cfg.seed);
  auto estimate_at = [&](double t) -> const TailEstimate& {
    for (const auto& e : estimates) {
      if (e.t == t) return e;
    }
    fail(ErrorKind::consistency, "no Monte-Carlo estimate for t = " + format_double(t));
  };
  bool passed = true;
  json arr = json::array();
  std::ostringstream csv;
  write_csv_row(csv, {"family", "mode", "t", "p", "bound", "mc_estimate", "stderr", "margin", "pass"});
  for (const auto& r : records) {
    const auto& e = estimate_at(r.t());
    const double margin = r.bound() + 3.0 * e.std_error - e.probability;
    const bool ok_row = margin >= 0.0;
    passed = passed && ok_row;
    arr.push_back({{"family", r.family}, {"mode", r.mode()}, {"t", r.t()}, {"p", r.p()},
                   {"bound", r.bound()}, {"mc_estimate", e.probability}, {"stderr", e.std_error},
                   {"margin", margin}, {"pass", ok_row}});
    write_csv_row(csv, {r.family, r.mode(), format_double(r.t()), std::to_string(r.p()),
                        format_double(r.bound()), format_double(e.probability),
                        format_double(e.std_error), format_double(margin), ok_row ? "true" : "false"});
  }
  if (cfg.format == "json") {
    os << json{{"trials", cfg.trials}, {"seed", cfg.seed}, {"passed", passed}, {"records", arr}}.dump(2)
       << '\n';
  } else {
    os << csv.str();
  }
  return passed ? ok : verification_failure;
}

// key=value lines become --key value, skipped where the flag was given explicitly.
inline std::vector<std::string> config_arguments(const std::string& path,
                                                 const std::vector<std::string>& explicit_args) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::config, "cannot open config file '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::config,
            "config line " + std::to_string(line_no) + " is not key=value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string flag = "--" + key;
    const bool given = std::any_of(explicit_args.begin(), explicit_args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (given) continue;
    out.push_back(flag);
    if (value != "true") out.push_back(value);
  }
  return out;
}

inline void add_options(CLI::App& sub, RunConfig& cfg) {
  sub.add_option("--family", cfg.family, "hoeffding | bennett | both");
  sub.add_option("--dist", cfg.dist, "uniform | bernoulli | beta | point | truncated-exponential");
  sub.add_option("--lo", cfg.lo, "lower end of the support (uniform, point, --data)");
  sub.add_option("--hi", cfg.hi, "upper end of the support (uniform, point, --data)");
  for (const char* key : {"q", "a", "b", "rate", "cap", "value"}) {
    sub.add_option_function<double>(std::string("--") + key,
                                     [&cfg, key](double v) { cfg.params[key] = v; },
                                     "distribution parameter");
  }
  sub.add_option("--data", cfg.data_path, "file of samples, one per line or id,value");
  sub.add_option("--n", cfg.n, "number of i.i.d. summands");
  sub.add_option("--t", cfg.t_values, "thresholds, comma separated")->delimiter(',');
  sub.add_option("--t-grid", cfg.t_grid, "start:stop:count");
  sub.add_flag("--per-var", cfg.per_var, "thresholds are per variable; multiplied by n");
  sub.add_option("--p", cfg.p_list, "moment orders, comma separated")->delimiter(',');
  sub.add_option("--mode", cfg.mode,
                 "one_sided | two_sided | iid | small_t | limit | missing_factor");
  sub.add_option("--format", cfg.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  sub.add_option("--output", cfg.output, "write to this file instead of stdout");
  sub.add_option("--trials", cfg.trials, "Monte-Carlo trials for verify");
  sub.add_option("--seed", cfg.seed, "Monte-Carlo seed (TAILBOUND_SEED overrides)");
  sub.add_option("--inflate", cfg.inflate, "factor applied to Bennett moment bounds");
  sub.add_option("--alpha", cfg.alpha, "miscoverage level for sample-size");
  sub.add_option("--c", cfg.small_t_c, "constant c of the small-t bound");
  sub.add_option("--k", cfg.k_constant, "constant K of the missing-factor bound");
  sub.add_option("--sigma2", cfg.sigma2, "variance proxy for the missing-factor bound");
  sub.add_flag("--squared-dn", cfg.squared_d_n, "missing-factor bound with squared D_n terms");
}

}  // namespace detail

inline int run(const RunConfig& cfg, std::ostream& out) {
  std::ofstream file;
  std::ostream* sink = &out;
  if (!cfg.output.empty()) {
    file.open(cfg.output);
    tailbound::detail::require(file.good(), ErrorKind::config, "cannot write '" + cfg.output + "'");
    sink = &file;
  }
  if (cfg.command == "bound") return detail::cmd_bound(cfg, *sink);
  if (cfg.command == "compare") return detail::cmd_compare(cfg, *sink);
  if (cfg.command == "sample-size") return detail::cmd_sample_size(cfg, *sink);
  if (cfg.command == "moments") return detail::cmd_moments(cfg, *sink);
  if (cfg.command == "verify") return detail::cmd_verify(cfg, *sink);
  tailbound::detail::fail(ErrorKind::config, "unknown command '" + cfg.command + "'");
}

/// Full command-line entry point; returns the process exit status.
inline int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Moment-based tail bounds for sums of bounded random variables", "tailbound"};
  app.require_subcommand(1);
  std::vector<std::string> argv_rest(args.begin() + (args.empty() ? 0 : 1), args.end());
  try {
    std::string config_path;
    for (std::size_t i = 0; i < argv_rest.size(); ++i) {
      if (argv_rest[i] == "--config" && i + 1 < argv_rest.size()) {
        config_path = argv_rest[i + 1];
        argv_rest.erase(argv_rest.begin() + static_cast<long>(i), argv_rest.begin() + static_cast<long>(i) + 2);
        break;
      }
      if (argv_rest[i].rfind("--config=", 0) == 0) {
        config_path = argv_rest[i].substr(9);
        argv_rest.erase(argv_rest.begin() + static_cast<long>(i));
        break;
      }
    }
    if (!config_path.empty() && !argv_rest.empty()) {
      const auto extra = detail::config_arguments(config_path, argv_rest);
      argv_rest.insert(argv_rest.begin() + 1, extra.begin(), extra.end());
    }

    for (const char* name : {"bound", "compare", "sample-size", "moments", "verify"}) {
      auto* sub = app.add_subcommand(name);
      detail::add_options(*sub, cfg);
      sub->callback([&cfg, name] { cfg.command = name; });
    }
    std::vector<std::string> reversed(argv_rest.rbegin(), argv_rest.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? ok : config_error;
    }
    if (const char* env = std::getenv("TAILBOUND_SEED")) {
      try {
        cfg.seed = std::stoull(env);
      } catch (const std::exception&) {
        tailbound::detail::fail(ErrorKind::config, std::string("TAILBOUND_SEED is not an integer: ") + env);
      }
    }
    return run(cfg, out);
  } catch (const Error& e) {
    err << "tailbound: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const json::exception& e) {
    err << "tailbound: " << e.what() << '\n';
    return config_error;
  }
}

}  // namespace tailbound::cli

#endif  // TAILBOUND_CLI_HPP
