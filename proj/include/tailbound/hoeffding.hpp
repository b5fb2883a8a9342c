#ifndef TAILBOUND_HOEFFDING_HPP
#define TAILBOUND_HOEFFDING_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tailbound/distributions.hpp"
#include "tailbound/error.hpp"
#include "tailbound/mgf_bounds.hpp"
#include "tailbound/moments.hpp"
#include "tailbound/special_functions.hpp"

namespace tailbound {

enum class HoeffdingMode { one_sided, two_sided, iid, small_t, limit_p_infinity, missing_factor };

inline const char* to_string(HoeffdingMode mode) {
  switch (mode) {
    case HoeffdingMode::one_sided: return "one_sided";
    case HoeffdingMode::two_sided: return "two_sided";
    case HoeffdingMode::iid: return "iid";
    case HoeffdingMode::small_t: return "small_t";
    case HoeffdingMode::limit_p_infinity: return "limit_p_infinity";
    case HoeffdingMode::missing_factor: return "missing_factor";
  }
  return "one_sided";
}

inline HoeffdingMode hoeffding_mode_from_string(const std::string& s) {
  for (auto m : {HoeffdingMode::one_sided, HoeffdingMode::two_sided, HoeffdingMode::iid,
                 HoeffdingMode::small_t, HoeffdingMode::limit_p_infinity,
                 HoeffdingMode::missing_factor}) {
    if (s == to_string(m)) return m;
  }
  detail::fail(ErrorKind::config, "unknown Hoeffding mode '" + s + "'");
}

/// Result of one Hoeffding-type evaluation. `t` is always the absolute
/// deviation of S_n; `c_values` holds one C_p per distinct variable (a
/// single entry for i.i.d. ensembles); `p == 0` marks the p -> infinity limit.
struct HoeffdingBound {
  double t = 0.0;
  int p = 1;
  double bound = 1.0;
  std::vector<double> c_values;
  std::optional<double> d_n;
  double s_star = 0.0;
  HoeffdingMode mode = HoeffdingMode::one_sided;

  friend bool operator==(const HoeffdingBound&, const HoeffdingBound&) = default;
};

namespace detail {

// exp(log_value) capped to (0, 1].
inline double capped_probability(double log_value) {
  if (log_value >= 0.0) return 1.0;
  return std::max(std::exp(log_value), std::numeric_limits<double>::min());
}

inline MomentVector to_origin(const MomentVector& mv, int p) {
  require(p >= 1, ErrorKind::domain, "moment order p must be >= 1");
  require(mv.support().bounded(), ErrorKind::domain,
          "Hoeffding bounds need variables with a bounded support [a, b]");
  require(p <= mv.order() || mv.has_samples(), ErrorKind::order,
          "order p = " + std::to_string(p) + " exceeds the " + std::to_string(mv.order()) +
              " moments supplied");
  if (*mv.support().lower == 0.0) return mv.truncated(p);
  return shift_to_origin(mv, p);
}

inline double d_factor(const MomentVector& origin) {
  const double r = origin.moment(2) / origin.moment(1);
  return r * r;
}

inline void require_positive_mean(const MomentVector& origin, const char* side) {
  require(origin.moment(1) > 0.0, ErrorKind::degenerate,
          std::string("variable is a point mass at the ") + side +
              " end of its support (E X = 0 after shifting)");
}

inline void require_threshold(double t) {
  require(std::isfinite(t) && t > 0.0, ErrorKind::domain, "deviation t must be > 0");
}

}  // namespace detail

/// exp(-2 t^2 / sum_i b_i^2 C_p(4 t b_i / D_n, b_i, mu_i)) for independent
/// variables on [a_i, b_i] (shifted to [0, b_i - a_i] internally).
inline HoeffdingBound hoeffding_bound(const EnsembleSpec& spec, double t, int p) {
  detail::require_threshold(t);
  detail::require(p >= 1, ErrorKind::domain, "moment order p must be >= 1");
  std::vector<std::pair<MomentVector, double>> vars;
  for (const auto& [mv, mult] : spec.groups()) {
    vars.emplace_back(detail::to_origin(*mv, std::max(p, std::min(2, mv->order()))),
                      static_cast<double>(mult));
    detail::require_positive_mean(vars.back().first, "lower");
  }
  HoeffdingBound out;
  out.t = t;
  out.p = p;
  out.mode = HoeffdingMode::one_sided;

  bool have_d = true;
  double d_n = 0.0;
  for (const auto& [x, mult] : vars) {
    if (x.order() < 2) {
      have_d = false;
      break;
    }
    d_n += mult * detail::d_factor(x);
  }
  if (have_d) out.d_n = d_n;

  double denom = 0.0;
  for (const auto& [x, mult] : vars) {
    const double b = x.support().upper;
    const double c = p == 1 ? 1.0 : c_factor(x.truncated(p), 4.0 * t * b / d_n);
    out.c_values.push_back(c);
    denom += mult * b * b * c;
  }
  out.s_star = 4.0 * t / denom;
  out.bound = detail::capped_probability(-2.0 * t * t / denom);
  return out;
}

/// Two-sided bound 2 exp(-2 t^2 / sum (b_i - a_i)^2 Cbar_p), where Cbar_p is
/// the larger of the C_p values built from E(Y - a)^k and from E(b - Y)^k.
inline HoeffdingBound hoeffding_two_sided(const EnsembleSpec& spec, double t, int p) {
  detail::require_threshold(t);
  detail::require(p >= 1, ErrorKind::domain, "moment order p must be >= 1");
  struct Sides {
    MomentVector up;
    MomentVector down;
    double mult;
  };
  std::vector<Sides> vars;
  for (const auto& [mv, mult] : spec.groups()) {
    detail::require(mv->support().bounded(), ErrorKind::domain,
                    "two-sided bounds need a bounded support [a, b]");
    detail::require(p <= mv->order() || mv->has_samples(), ErrorKind::order,
                    "order p = " + std::to_string(p) + " exceeds the moments supplied");
    const int k = std::max(p, std::min(2, mv->order()));
    vars.push_back({shift_to_origin(*mv, k), reflect_moments(*mv, k), static_cast<double>(mult)});
    detail::require_positive_mean(vars.back().up, "lower");
    detail::require_positive_mean(vars.back().down, "upper");
  }

  HoeffdingBound out;
  out.t = t;
  out.p = p;
  out.mode = HoeffdingMode::two_sided;
  double d_up = 0.0;
  double d_down = 0.0;
  bool have_d = true;
  for (const auto& v : vars) {
    if (v.up.order() < 2) {
      have_d = false;
      break;
    }
    d_up += v.mult * detail::d_factor(v.up);
    d_down += v.mult * detail::d_factor(v.down);
  }
  if (have_d) out.d_n = d_up;

  double denom = 0.0;
  for (const auto& v : vars) {
    const double w = v.up.support().upper;
    double c = 1.0;
    if (p > 1) {
      c = std::max(c_factor(v.down.truncated(p), 4.0 * t * w / d_down),
                   c_factor(v.up.truncated(p), 4.0 * t * w / d_up));
    }
    out.c_values.push_back(c);
    denom += v.mult * w * w * c;
  }
  out.s_star = 4.0 * t / denom;
  out.bound = detail::capped_probability(std::log(2.0) - 2.0 * t * t / denom);
  return out;
}

/// P(S_n - E S_n >= n t) for n i.i.d. copies: exp(-2 n t^2 / (b^2 C_p(4 t b / d(X)))).
inline HoeffdingBound hoeffding_iid(const MomentVector& mv, std::size_t n, double t_per_var, int p) {
  detail::require_threshold(t_per_var);
  detail::require(n >= 1, ErrorKind::domain, "n must be >= 1");
  const MomentVector x = detail::to_origin(mv, std::max(p, std::min(2, mv.order())));
  detail::require_positive_mean(x, "lower");
  const double b = x.support().upper;
  const double nd = static_cast<double>(n);
  HoeffdingBound out;
  out.t = nd * t_per_var;
  out.p = p;
  out.mode = HoeffdingMode::iid;
  double c = 1.0;
  if (x.order() >= 2) {
    const double d = detail::d_factor(x);
    out.d_n = nd * d;
    if (p > 1) c = c_factor(x.truncated(p), 4.0 * t_per_var * b / d);
  }
  out.c_values = {c};
  out.s_star = 4.0 * t_per_var / (b * b * c);
  out.bound = detail::capped_probability(-2.0 * nd * t_per_var * t_per_var / (b * b * c));
  return out;
}

/// exp(-2 n t^2 I_p(X, c)^2), valid for t <= c (E X^2 / (2 E X))^2, X on [0, 1].
inline HoeffdingBound hoeffding_small_t(const MomentVector& mv, std::size_t n, double t, double c,
                                        int p) {
  detail::require_threshold(t);
  detail::require(n >= 1, ErrorKind::domain, "n must be >= 1");
  detail::require(p >= 1 && p <= mv.order(), ErrorKind::order,
                  "order p = " + std::to_string(p) + " exceeds the moments supplied");
  if (mv.order() >= 2) {
    const double half_ratio = mv.moment(2) / (2.0 * mv.moment(1));
    const double threshold = c * half_ratio * half_ratio;
    detail::require(t <= threshold, ErrorKind::precondition,
                    "small-t bound needs t <= c (E X^2 / (2 E X))^2 = " + detail::fmt(threshold) +
                        ", got t = " + detail::fmt(t));
  } else {
    detail::require(p == 1, ErrorKind::order, "the small-t precondition needs E X^2");
  }
  const double i = i_measure(mv.truncated(p), c);
  const double nd = static_cast<double>(n);
  HoeffdingBound out;
  out.t = nd * t;
  out.p = p;
  out.mode = HoeffdingMode::small_t;
  out.c_values = {1.0 / (i * i)};
  if (mv.order() >= 2) out.d_n = nd * detail::d_factor(mv);
  out.s_star = 4.0 * t * i * i;
  out.bound = detail::capped_probability(-2.0 * nd * t * t * i * i);
  return out;
}

/// p -> infinity limit: exp(-2 t^2 / sum_i (E X_i^2 e^{4tX_i/D_n} / E X_i e^{4tX_i/D_n})^2),
/// with each law shifted so its support starts at 0.
inline HoeffdingBound hoeffding_limit(std::span<const Distribution> laws, double t,
                                      std::size_t copies = 1) {
  detail::require_threshold(t);
  detail::require(!laws.empty() && copies >= 1, ErrorKind::empty_input, "no variables supplied");
  const double mult = static_cast<double>(copies);
  std::vector<Distribution> origin;
  origin.reserve(laws.size());
  double d_n = 0.0;
  for (const auto& law : laws) {
    const Support s = law.support();
    origin.push_back(law.shifted(-*s.lower));
    const double m1 = origin.back().tilted_moment(1, 0.0);
    const double m2 = origin.back().tilted_moment(2, 0.0);
    detail::require(m1 > 0.0, ErrorKind::degenerate, "variable is a point mass at its lower end");
    d_n += mult * (m2 / m1) * (m2 / m1);
  }
  const double lambda = 4.0 * t / d_n;
  HoeffdingBound out;
  out.t = t;
  out.p = 0;
  out.mode = HoeffdingMode::limit_p_infinity;
  out.d_n = d_n;
  double denom = 0.0;
  for (const auto& law : origin) {
    const double w = law.support().upper;
    const double num = law.tilted_moment(2, lambda, w);
    const double den = law.tilted_moment(1, lambda, w);
    detail::require(std::isfinite(num) && std::isfinite(den) && den > 0.0, ErrorKind::oracle,
                    "tilted moments could not be evaluated");
    const double r = num / den;
    out.c_values.push_back(r * r / (w * w));
    denom += mult * r * r;
  }
  out.s_star = 4.0 * t / denom;
  out.bound = detail::capped_probability(-2.0 * t * t / denom);
  return out;
}

inline HoeffdingBound hoeffding_limit_iid(const Distribution& law, std::size_t n, double t) {
  return hoeffding_limit(std::span<const Distribution>(&law, 1), t, n);
}

/// C_infinity(x) for X ~ U[0, 1], written out in closed form.
inline double uniform_c_infinity(double x) {
  detail::require(x > 0.0, ErrorKind::domain, "uniform_c_infinity needs x > 0");
  double r;
  if (x < 2.0) {
    // the closed form cancels badly near 0; use E U^k e^{xU} = sum x^m / (m! (k + m + 1))
    double term = 1.0;
    double num = 0.0;
    double den = 0.0;
    for (int m = 0; m < 60; ++m) {
      num += term / (m + 3);
      den += term / (m + 2);
      term *= x / (m + 1);
    }
    r = num / den;
  } else {
    const double ex = std::exp(x);
    r = (-2.0 + ex * (2.0 - 2.0 * x + x * x)) / (x * (1.0 + ex * (x - 1.0)));
  }
  return r * r;
}

struct MissingFactorOptions {
  double k_constant = 1.0;             // the universal constant K; its true value is unknown
  std::optional<double> sigma2;        // sum E X_i^2; computed from the moments when absent
  bool squared_d_n = false;            // use sum (mu2/mu1)^2 instead of sum mu2/mu1
};

/// exp(-t^2 / (2 sum b_i^2 C_p(8 t b_i / D_n, 2 b_i, mu_i))) (theta(t/sigma) + K b / sigma)
/// for centered |X_i| <= b_i, with mu_i the moments of X_i + b_i.
inline HoeffdingBound hoeffding_missing_factor(const EnsembleSpec& centered, double t, int p,
                                               const MissingFactorOptions& options = {}) {
  detail::require_threshold(t);
  detail::require(p >= 1, ErrorKind::domain, "moment order p must be >= 1");
  detail::require(options.k_constant > 0.0, ErrorKind::domain, "K must be positive");
  struct Var {
    MomentVector lifted;
    double b;
    double mult;
  };
  std::vector<Var> vars;
  double sigma2 = 0.0;
  double b_max = 0.0;
  for (const auto& [mv, mult] : centered.groups()) {
    const Support& s = mv->support();
    detail::require(s.bounded(), ErrorKind::domain, "missing-factor bound needs |X_i| <= b_i");
    const double b = std::max(std::abs(*s.lower), std::abs(s.upper));
    detail::require(std::abs(mv->moment(1)) <= 1e-9 * b, ErrorKind::precondition,
                    "missing-factor bound needs centered variables, E X = " +
                        detail::fmt(mv->moment(1)));
    const int k = std::max(p, std::min(2, mv->order()));
    detail::require(k <= mv->order(), ErrorKind::order, "order p exceeds the moments supplied");
    std::vector<double> mu;
    for (int m = 1; m <= k; ++m) {
      double acc = 0.0;
      for (int j = 0; j <= m; ++j) acc += detail::binomial(m, j) * mv->moment(j) * std::pow(b, m - j);
      mu.push_back(acc);
    }
    vars.push_back({MomentVector(std::move(mu), Support::interval(0.0, 2.0 * b)), b,
                    static_cast<double>(mult)});
    detail::require_positive_mean(vars.back().lifted, "lower");
    if (!options.sigma2) {
      detail::require(mv->order() >= 2, ErrorKind::order, "sigma^2 needs second moments");
      sigma2 += static_cast<double>(mult) * mv->moment(2);
    }
    b_max = std::max(b_max, b);
  }
  if (options.sigma2) sigma2 = *options.sigma2;
  detail::require(sigma2 > 0.0, ErrorKind::degenerate, "sigma^2 must be positive");
  const double sigma = std::sqrt(sigma2);
  const double t_max = sigma2 / (options.k_constant * b_max);
  detail::require(t <= t_max, ErrorKind::precondition,
                  "missing-factor bound needs t <= sigma^2 / (K b) = " + detail::fmt(t_max) +
                      ", got t = " + detail::fmt(t));

  HoeffdingBound out;
  out.t = t;
  out.p = p;
  out.mode = HoeffdingMode::missing_factor;
  double d_n = 0.0;
  bool have_d = true;
  for (const auto& v : vars) {
    if (v.lifted.order() < 2) {
      have_d = false;
      break;
    }
    const double r = v.lifted.moment(2) / v.lifted.moment(1);
    d_n += v.mult * (options.squared_d_n ? r * r : r);
  }
  if (have_d) out.d_n = d_n;
  double denom = 0.0;
  for (const auto& v : vars) {
    const double c = p == 1 ? 1.0 : c_factor(v.lifted.truncated(p), 8.0 * t * v.b / d_n);
    out.c_values.push_back(c);
    denom += v.mult * v.b * v.b * c;
  }
  out.s_star = t / denom;
  const double factor = mills_theta(t / sigma) + options.k_constant * b_max / sigma;
  out.bound = detail::capped_probability(-t * t / (2.0 * denom) + std::log(factor));
  return out;
}

/// Sample size so that a two-sided interval of half-width t around the mean
/// of n i.i.d. copies of Y on [a, b] has coverage >= 1 - alpha.
struct SampleSizeResult {
  std::size_t n = 0;
  std::size_t classical_n = 0;
  double c_bar = 1.0;
  double c_shifted = 1.0;
  double c_reflected = 1.0;
  double alpha = 0.05;
  double t = 0.0;
  int p = 1;
  bool fallback = false;
};

inline SampleSizeResult sample_size_for_ci(const MomentVector& mv, double t, double alpha, int p) {
  detail::require_threshold(t);
  detail::require(alpha > 0.0 && alpha < 1.0, ErrorKind::domain, "alpha must lie in (0, 1)");
  detail::require(p >= 1, ErrorKind::domain, "moment order p must be >= 1");
  detail::require(mv.support().bounded(), ErrorKind::domain, "sample size needs a support [a, b]");
  const double w = mv.support().width();
  SampleSizeResult out;
  out.alpha = alpha;
  out.t = t;
  out.p = p;
  const double scale = std::log(2.0 / alpha) * w * w / (2.0 * t * t);
  out.classical_n = static_cast<std::size_t>(std::ceil(scale));
  if (p > 1) {
    const MomentVector up = shift_to_origin(mv, p);
    const MomentVector down = reflect_moments(mv, p);
    detail::require_positive_mean(up, "lower");
    detail::require_positive_mean(down, "upper");
    // With t the half-width for the mean, the argument 4 (n t) w / (n d) is n-free.
    out.c_shifted = c_factor(up, 4.0 * t * w / detail::d_factor(up));
    out.c_reflected = c_factor(down, 4.0 * t * w / detail::d_factor(down));
    out.c_bar = std::max(out.c_shifted, out.c_reflected);
  }
  out.n = std::min(out.classical_n,
                   std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(scale * out.c_bar))));
  return out;
}

}  // namespace tailbound

#endif  // TAILBOUND_HOEFFDING_HPP
