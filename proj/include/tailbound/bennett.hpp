#ifndef TAILBOUND_BENNETT_HPP
#define TAILBOUND_BENNETT_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tailbound/error.hpp"
#include "tailbound/moments.hpp"
#include "tailbound/special_functions.hpp"

namespace tailbound {

/// Bennett-type bound for variables bounded above by a common b.
/// `aggregated_moments[k - 2]` is mu^k = sum_i mu_i^k for k = 2..p; the last
/// entry is the summed positive-part p-th moment.
struct BennettBound {
  double t = 0.0;
  int p = 2;
  double bound = 1.0;
  std::vector<double> alpha;
  RootSet roots;
  double y_star = 0.0;
  std::vector<double> aggregated_moments;
  double b = 1.0;
  std::optional<double> w_residual;  // only for the Lambert-W path

  friend bool operator==(const BennettBound&, const BennettBound&) = default;
};

inline bool operator==(const ScanGrid& a, const ScanGrid& b) {
  return a.max_abscissa == b.max_abscissa && a.step == b.step && a.extensions == b.extensions;
}

inline bool operator==(const RootSet& a, const RootSet& b) {
  return a.roots == b.roots && a.bracket_grid == b.bracket_grid && a.unique == b.unique &&
         a.method == b.method;
}

namespace detail {

struct BennettMoments {
  double b = 0.0;
  std::vector<double> mu;  // mu[k] for k = 0..p; mu[0], mu[1] unused
};

inline BennettMoments aggregate_bennett(const EnsembleSpec& spec, int p) {
  require(p >= 2, ErrorKind::domain, "Bennett bounds need p >= 2");
  BennettMoments out;
  out.mu.assign(static_cast<std::size_t>(p) + 1, 0.0);
  out.b = -std::numeric_limits<double>::infinity();
  for (const auto& [mv, mult] : spec.groups()) {
    require(p <= mv->order(), ErrorKind::order,
            "order p = " + std::to_string(p) + " exceeds the " + std::to_string(mv->order()) +
                " moments supplied");
    out.b = std::max(out.b, mv->support().upper);
    const double m = static_cast<double>(mult);
    for (int k = 2; k < p; ++k) out.mu[static_cast<std::size_t>(k)] += m * mv->moment(k);
    out.mu[static_cast<std::size_t>(p)] += m * mv->positive_part(p);
  }
  require(out.b > 0.0, ErrorKind::domain, "Bennett bounds need a common upper bound b > 0");
  require(out.mu[static_cast<std::size_t>(p)] > 0.0, ErrorKind::degenerate,
          "aggregated positive-part moment of order " + std::to_string(p) + " must be > 0");
  return out;
}

inline std::vector<double> bennett_alpha(double t, int p, const BennettMoments& m) {
  const double mup = m.mu[static_cast<std::size_t>(p)];
  std::vector<double> alpha(static_cast<std::size_t>(p) - 1);
  alpha[0] = 1.0 + t * std::pow(m.b, p - 1) / mup;
  double jfact = 1.0;
  for (int j = 1; j <= p - 2; ++j) {
    jfact *= j;
    alpha[static_cast<std::size_t>(j)] =
        (std::pow(m.b, p - j - 1) * m.mu[static_cast<std::size_t>(j) + 1] / mup - 1.0) / jfact;
  }
  return alpha;
}

// t/b - (t/b + mu2/b^2) y + sum_{j=2}^{p-1} (mu^j/(b^j j!) - mu^{j+1}/(b^{j+1} j!)) y^j
inline double bennett_exponent(double t, int p, const BennettMoments& m, double y) {
  const double b = m.b;
  double value = t / b - (t / b + m.mu[2] / (b * b)) * y;
  double yj = y;
  double jfact = 1.0;
  for (int j = 2; j <= p - 1; ++j) {
    yj *= y;
    jfact *= j;
    const double lhs = m.mu[static_cast<std::size_t>(j)] / std::pow(b, j);
    const double rhs = m.mu[static_cast<std::size_t>(j) + 1] / std::pow(b, j + 1);
    value += (lhs - rhs) / jfact * yj;
  }
  return value;
}

inline double exp_capped(double log_value) {
  if (log_value >= 0.0) return 1.0;
  return std::max(std::exp(log_value), std::numeric_limits<double>::min());
}

inline BennettBound bennett_from_moments(double t, int p, const BennettMoments& m,
                                         SolveOptions options) {
  require(std::isfinite(t) && t > 0.0, ErrorKind::domain, "deviation t must be > 0");
  BennettBound out;
  out.t = t;
  out.p = p;
  out.b = m.b;
  out.aggregated_moments.assign(m.mu.begin() + 2, m.mu.end());
  out.alpha = bennett_alpha(t, p, m);
  try {
    out.roots = solve_poly_exp(out.alpha, options);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::solver && e.kind() != ErrorKind::consistency) throw;
    std::string coeffs;
    for (double a : out.alpha) coeffs += (coeffs.empty() ? "" : ", ") + fmt(a);
    fail(e.kind(), std::string(e.what()) + " [alpha = " + coeffs + "]");
  }
  if (p == 2 && out.roots.roots.size() == 1) {
    // ln(alpha0) loses digits when t b / mu2 is small
    out.roots.roots.front() = std::log1p(t * m.b / m.mu[2]);
  }
  double best = -std::numeric_limits<double>::infinity();
  for (double y : out.roots.roots) {
    const double e = bennett_exponent(t, p, m, y);
    if (e > best) {
      best = e;
      out.y_star = y;
    }
  }
  out.bound = exp_capped(best);
  return out;
}

}  // namespace detail

/// exp(max over positive roots y of the exponent polynomial), roots of
/// alpha0 - sum_{j=1}^{p-2} alpha_j y^j = e^y. Variables share the upper
/// bound b = max_i support().upper.
inline BennettBound bennett_bound(const EnsembleSpec& spec, double t, int p,
                                  SolveOptions options = {}) {
  return detail::bennett_from_moments(t, p, detail::aggregate_bennett(spec, p), options);
}

/// Classical Bennett bound exp(-(mu2/b^2)((1+u) ln(1+u) - u)), u = b t / mu2.
inline double bennett_classical(double t, double b, double mu2) {
  detail::require(t > 0.0 && b > 0.0 && mu2 > 0.0, ErrorKind::domain,
                  "bennett_classical needs t, b, mu2 > 0");
  const double u = b * t / mu2;
  return detail::exp_capped(-(mu2 / (b * b)) * ((1.0 + u) * std::log1p(u) - u));
}

/// p = 3 through the principal-branch Lambert W closed form.
inline BennettBound bennett_p3_lambert(const EnsembleSpec& spec, double t) {
  detail::require(std::isfinite(t) && t > 0.0, ErrorKind::domain, "deviation t must be > 0");
  const detail::BennettMoments m = detail::aggregate_bennett(spec, 3);
  BennettBound out;
  out.t = t;
  out.p = 3;
  out.b = m.b;
  out.aggregated_moments.assign(m.mu.begin() + 2, m.mu.end());
  out.alpha = detail::bennett_alpha(t, 3, m);
  const double a0 = out.alpha[0];
  const double a1 = out.alpha[1];
  double y = 0.0;
  if (a1 == 0.0) {
    y = std::log(a0);
    out.roots.method = RootMethod::logarithm;
  } else {
    detail::require(a1 > 0.0, ErrorKind::precondition,
                    "Lambert-W form needs alpha1 = b mu2 / mu3 - 1 > 0, got " + detail::fmt(a1));
    const double z = a0 / a1;
    const double log_arg = z - std::log(a1);
    const double w = lambert_w0_exp(log_arg);
    y = z > 1.0 ? std::log(a1) + std::log(w) : z - w;
    out.w_residual = std::abs(std::expm1(w + std::log(w) - log_arg));
    out.roots.method = RootMethod::lambert;
  }
  detail::require(root_residual_ok(out.alpha, y), ErrorKind::consistency,
                  "Lambert-W root fails the residual check (y = " + detail::fmt(y) + ")");
  out.roots.roots = {y};
  out.roots.unique = true;
  out.y_star = y;
  out.bound = detail::exp_capped(detail::bennett_exponent(t, 3, m, y));
  return out;
}

struct BennettComparison {
  double t = 0.0;
  double bound_p2 = 1.0;
  double bound_p3 = 1.0;
  bool p3_tighter = true;
};

/// p = 3 against p = 2 on the same ensemble.
inline BennettComparison bennett_tightness_check(const EnsembleSpec& spec, double t) {
  BennettComparison out;
  out.t = t;
  out.bound_p2 = bennett_bound(spec, t, 2).bound;
  out.bound_p3 = bennett_p3_lambert(spec, t).bound;
  out.p3_tighter = out.bound_p3 <= out.bound_p2 + 1e-12;
  return out;
}

/// Odd aggregated moments of order 3..p-1 are floored at 0 (still valid
/// upper bounds), which leaves exactly one positive root.
inline BennettBound bennett_unique_root(const EnsembleSpec& spec, double t, int p) {
  detail::BennettMoments m = detail::aggregate_bennett(spec, p);
  for (int j = 3; j <= p - 1; j += 2) {
    m.mu[static_cast<std::size_t>(j)] = std::max(m.mu[static_cast<std::size_t>(j)], 0.0);
  }
  SolveOptions options;
  options.assert_unique = true;
  return detail::bennett_from_moments(t, p, m, options);
}

}  // namespace tailbound

#endif  // TAILBOUND_BENNETT_HPP
