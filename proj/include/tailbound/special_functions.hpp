#ifndef TAILBOUND_SPECIAL_FUNCTIONS_HPP
#define TAILBOUND_SPECIAL_FUNCTIONS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "tailbound/error.hpp"
#include "tailbound/moments.hpp"

namespace tailbound {

namespace detail {

// sum_{j >= m} x^j / j!, all terms computed by recurrence so nothing overflows
// before it has to.
inline double exp_tail_series(int m, double x) {
  double term = 1.0;
  for (int j = 1; j <= m; ++j) term *= x / j;
  double sum = 0.0;
  for (int j = m; j < m + 100000; ++j) {
    sum += term;
    if (j + 1 > std::abs(x) && std::abs(term) <= 1e-17 * std::abs(sum)) break;
    if (term == 0.0) break;
    term *= x / (j + 1);
  }
  return sum;
}

// T_m for any integer m, with T_m = exp for m <= 1 (empty polynomial part).
inline double taylor_remainder_any(int m, double x) {
  if (m <= 1) return std::exp(x);
  if (std::isnan(x)) return x;
  const double half = m / 2.0;
  if (std::abs(x) <= half || (x > 0.0 && x <= 2.0 * m + 10.0)) return exp_tail_series(m - 1, x);
  double sum = 0.0;
  double term = 1.0;
  for (int j = 0; j <= m - 2; ++j) {
    sum += term;
    term *= x / (j + 1);
  }
  return std::exp(x) - sum;
}

}  // namespace detail

/// T_p(x) = exp(x) - sum_{j=0}^{p-2} x^j / j!, so T_1 = exp.
///
/// Near the expansion point the polynomial part cancels almost all of exp(x);
/// there (|x| <= p/2, and for every positive x below 2p + 10, where the tail
/// terms are all positive) the value is summed directly from the tail series.
inline double taylor_remainder(int p, double x) {
  detail::require(p >= 1, ErrorKind::domain, "taylor_remainder needs p >= 1");
  return detail::taylor_remainder_any(p, x);
}

/// g(x) = T_{p+1}(x) / x^p with g(0) = 1/p!.
inline double remainder_ratio(int p, double x) {
  detail::require(p >= 1, ErrorKind::domain, "remainder_ratio needs p >= 1");
  if (x == 0.0) return 1.0 / detail::factorial(p);
  if (std::abs(x) < 1e-8) {
    // sum_m x^m / (p+m)!
    double term = 1.0 / detail::factorial(p);
    double sum = 0.0;
    for (int m = 0; m < 50; ++m) {
      sum += term;
      term *= x / (p + m + 1);
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return detail::taylor_remainder_any(p + 1, x) / std::pow(x, p);
}

namespace detail {

// Solves w + ln(w) = log_x for w > 0 (i.e. w = W(exp(log_x))) by Halley's
// method; valid and well conditioned for log_x >= 0.
inline double lambert_w0_log_form(double log_x) {
  double w;
  if (log_x < 1.5) {
    w = 0.5 + 0.4 * log_x;
  } else {
    const double l2 = std::log(log_x);
    w = log_x - l2 + l2 / log_x;
  }
  for (int it = 0; it < 50; ++it) {
    const double g = w + std::log(w) - log_x;
    const double g1 = 1.0 + 1.0 / w;
    const double g2 = -1.0 / (w * w);
    const double step = g / (g1 - 0.5 * g * g2 / g1);
    double next = w - step;
    if (next <= 0.0) next = 0.5 * w;
    const bool done = std::abs(next - w) <= 4.0 * std::numeric_limits<double>::epsilon() * next;
    w = next;
    if (done) break;
  }
  return w;
}

}  // namespace detail

/// Principal branch W0 of the Lambert W function: w * exp(w) = x, w >= -1.
inline double lambert_w0(double x) {
  constexpr double inv_e = 1.0 / std::numbers::e;
  detail::require(!std::isnan(x) && x >= -inv_e, ErrorKind::domain,
                  "lambert_w0 is undefined below -1/e");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return x;
  if (x > 1.0) return detail::lambert_w0_log_form(std::log(x));

  const double branch = 2.0 * std::fma(std::numbers::e, x, 1.0);
  if (branch <= 0.0) return -1.0;

  double w;
  if (x < -0.25) {
    const double p = std::sqrt(branch);
    w = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * 11.0 / 72.0));
  } else {
    w = std::log1p(x);
  }
  for (int it = 0; it < 50; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double f1 = ew * (w + 1.0);
    if (f1 == 0.0) break;
    const double f2 = ew * (w + 2.0);
    const double next = w - f / (f1 - 0.5 * f * f2 / f1);
    const bool done = std::abs(next - w) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                                 std::max(std::abs(next), 1e-300);
    w = std::max(next, -1.0);
    if (done) break;
  }
  return w;
}

/// W0(exp(log_x)) without forming exp(log_x), for arguments beyond double range.
inline double lambert_w0_exp(double log_x) {
  if (log_x <= 0.0) return lambert_w0(std::exp(log_x));
  return detail::lambert_w0_log_form(log_x);
}

/// Scan parameters used to bracket roots of the exponential-polynomial equation.
struct ScanGrid {
  double max_abscissa = 0.0;
  double step = 0.0;
  int extensions = 0;
};

enum class RootMethod { logarithm, lambert, scan };

/// Positive solutions y of alpha0 - sum_{j>=1} alpha_j y^j = exp(y), ascending.
struct RootSet {
  std::vector<double> roots;
  ScanGrid bracket_grid;
  bool unique = false;
  RootMethod method = RootMethod::scan;
};

struct SolveOptions {
  bool force_scan = false;     // skip closed forms, always bracket numerically
  bool assert_unique = false;  // caller guarantees a single root; more is a fault
};

/// f(y) = alpha0 - sum_j alpha_j y^j - exp(y).
inline double poly_exp_residual(std::span<const double> alpha, double y) {
  double poly = 0.0;
  for (std::size_t j = alpha.size(); j-- > 1;) poly = (poly + alpha[j]) * y;
  return alpha[0] - poly - std::exp(y);
}

inline double poly_exp_residual_derivative(std::span<const double> alpha, double y) {
  double d = 0.0;
  for (std::size_t j = alpha.size(); j-- > 1;) d = d * y + static_cast<double>(j) * alpha[j];
  return -d - std::exp(y);
}

inline bool root_residual_ok(std::span<const double> alpha, double y, double rel = 1e-10) {
  return std::abs(poly_exp_residual(alpha, y)) <= rel * (1.0 + std::exp(y));
}

namespace detail {

inline double refine_root(std::span<const double> alpha, double lo, double hi) {
  double flo = poly_exp_residual(alpha, lo);
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 300; ++it) {
    const double fx = poly_exp_residual(alpha, x);
    if (std::abs(fx) <= 1e-12 * (1.0 + std::exp(x))) return x;
    if ((fx > 0.0) == (flo > 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    const double d = poly_exp_residual_derivative(alpha, x);
    double next = d != 0.0 ? x - fx / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * std::abs(hi)) {
      return std::abs(poly_exp_residual(alpha, lo)) < std::abs(poly_exp_residual(alpha, hi)) ? lo : hi;
    }
    x = next;
  }
  return x;
}

inline double polish_root(std::span<const double> alpha, double y) {
  for (int it = 0; it < 3 && !root_residual_ok(alpha, y, 1e-13); ++it) {
    const double d = poly_exp_residual_derivative(alpha, y);
    if (d == 0.0) break;
    y -= poly_exp_residual(alpha, y) / d;
  }
  return y;
}

}  // namespace detail

/// All positive roots of alpha0 - sum_{j=1}^{q} alpha_j x^j = exp(x), q = alpha.size() - 1.
///
/// q = 0 (or all higher coefficients zero) gives ln(alpha0); a single
/// positive linear coefficient gives the Lambert-W closed form. Everything
/// else is bracketed by a sign-change scan on (0, X_max] with
/// X_max = max(4 ln alpha0, 50), doubled up to three times while the
/// right end is still nonnegative, and each bracket refined by safeguarded
/// Newton. Roots of even multiplicity can be missed by the scan.
inline RootSet solve_poly_exp(std::span<const double> alpha, SolveOptions options = {}) {
  detail::require(!alpha.empty(), ErrorKind::domain, "solve_poly_exp needs alpha0");
  for (double a : alpha) {
    detail::require(std::isfinite(a), ErrorKind::domain, "non-finite coefficient in solve_poly_exp");
  }
  detail::require(alpha[0] > 1.0, ErrorKind::precondition,
                  "solve_poly_exp requires alpha0 > 1, got " + detail::fmt(alpha[0]));

  std::size_t degree = alpha.size() - 1;
  while (degree > 0 && alpha[degree] == 0.0) --degree;
  const auto coeffs = alpha.first(degree + 1);

  RootSet out;
  if (!options.force_scan) {
    if (degree == 0) {
      out.roots = {std::log(alpha[0])};
      out.unique = true;
      out.method = RootMethod::logarithm;
      return out;
    }
    if (degree == 1 && alpha[1] > 0.0) {
      const double a0 = alpha[0];
      const double a1 = alpha[1];
      const double z = a0 / a1;
      const double w = lambert_w0_exp(z - std::log(a1));
      // exp(y) = a1 * w on the root, which avoids cancelling z against w.
      double y = z > 1.0 ? std::log(a1) + std::log(w) : z - w;
      y = detail::polish_root(coeffs, y);
      out.roots = {y};
      out.unique = true;
      out.method = RootMethod::lambert;
      return out;
    }
  }

  double x_max = std::max(4.0 * std::log(alpha[0]), 50.0);
  int extensions = 0;
  for (;; ++extensions) {
    const double step = 1e-3 * x_max;
    out.roots.clear();
    double prev_x = 0.0;
    double prev_f = poly_exp_residual(coeffs, 0.0);
    for (int i = 1; i <= 1000; ++i) {
      const double x = i == 1000 ? x_max : step * i;
      const double fx = poly_exp_residual(coeffs, x);
      if (fx == 0.0) {
        out.roots.push_back(x);
      } else if (prev_f != 0.0 && (fx > 0.0) != (prev_f > 0.0)) {
        out.roots.push_back(detail::refine_root(coeffs, prev_x, x));
      }
      prev_x = x;
      prev_f = fx;
    }
    out.bracket_grid = ScanGrid{x_max, step, extensions};
    if (prev_f < 0.0 && !out.roots.empty()) break;
    if (extensions == 3) {
      detail::fail(ErrorKind::solver,
                   "no sign change bracketing a positive root up to x = " + detail::fmt(x_max) +
                       " (alpha0 = " + detail::fmt(alpha[0]) + ", degree " +
                       std::to_string(degree) + ", f(x_max) = " + detail::fmt(prev_f) + ")");
    }
    x_max *= 2.0;
  }
  out.method = RootMethod::scan;
  bool monotone = true;
  for (std::size_t j = 1; j < coeffs.size(); ++j) monotone = monotone && coeffs[j] >= 0.0;
  if (options.assert_unique && out.roots.size() != 1) {
    detail::fail(ErrorKind::consistency, "expected a unique positive root, scan found " +
                                             std::to_string(out.roots.size()));
  }
  out.unique = options.assert_unique || monotone;
  return out;
}

/// theta(x) = exp(x^2/2) * int_x^inf exp(-u^2/2) du / sqrt(2 pi), the
/// Gaussian Mills ratio divided by sqrt(2 pi).
inline double mills_theta(double x) {
  detail::require(!std::isnan(x) && x >= 0.0, ErrorKind::domain, "mills_theta needs x >= 0");
  constexpr double inv_sqrt_2pi = 0.3989422804014326779;
  if (x < 5.0) return 0.5 * std::erfc(x / std::numbers::sqrt2) * std::exp(0.5 * x * x);
  if (std::isinf(x)) return 0.0;
  // Laplace continued fraction 1/(x+ 1/(x+ 2/(x+ 3/(x+ ...)))), modified Lentz.
  constexpr double tiny = 1e-300;
  double f = x;
  double c = x;
  double d = 0.0;
  for (int k = 1; k < 10000; ++k) {
    d = x + k * d;
    if (d == 0.0) d = tiny;
    c = x + k / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return inv_sqrt_2pi / f;
}

}  // namespace tailbound

#endif  // TAILBOUND_SPECIAL_FUNCTIONS_HPP
