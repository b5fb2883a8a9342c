#ifndef TAILBOUND_MGF_BOUNDS_HPP
#define TAILBOUND_MGF_BOUNDS_HPP

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "tailbound/error.hpp"
#include "tailbound/moments.hpp"
#include "tailbound/special_functions.hpp"

namespace tailbound {

/// m_{X,s}(order): upper bound on E exp(sX) from E X^j (j < order) and
/// E max(X^order, 0), for X bounded above by b = support().upper > 0.
inline double mgf_upper_bound(const MomentVector& mv, double s, int order) {
  detail::require(s >= 0.0, ErrorKind::domain, "mgf_upper_bound needs s >= 0");
  const double b = mv.support().upper;
  detail::require(b > 0.0, ErrorKind::domain, "mgf_upper_bound needs an upper bound b > 0");
  detail::require(order >= 1 && order <= mv.order(), ErrorKind::order,
                  "mgf bound of order " + std::to_string(order) + " needs moments up to that order");
  if (s == 0.0) return 1.0;
  const double pos = mv.positive_part(order);
  double poly = 0.0;
  double term = 1.0;  // s^j / j!
  for (int j = 0; j < order; ++j) {
    poly += term * mv.moment(j);
    term *= s / (j + 1);
  }
  return pos / std::pow(b, order) * taylor_remainder(order + 1, s * b) + poly;
}

inline double mgf_upper_bound(const MomentVector& mv, double s) {
  return mgf_upper_bound(mv, s, mv.order());
}

/// m_{X,s}(p) for each p in p_list.
inline std::vector<double> mgf_bound_sequence(const MomentVector& mv, double s,
                                              std::span<const int> p_list) {
  detail::require(s > 0.0, ErrorKind::domain, "mgf_bound_sequence needs s > 0");
  std::vector<double> out;
  out.reserve(p_list.size());
  for (int p : p_list) out.push_back(mgf_upper_bound(mv, s, p));
  return out;
}

namespace detail {

inline void require_origin_support(const MomentVector& mv, const char* who) {
  require(mv.support().bounded() && *mv.support().lower == 0.0 && mv.support().upper > 0.0,
          ErrorKind::domain, std::string(who) + " needs a variable on [0, b]; shift it first");
}

// mu^p as used by the Hoeffding family: E X^p, or its upper bound.
inline double top_moment(const MomentVector& mv) { return mv.moment(mv.order()); }

}  // namespace detail

/// k-th derivative (k = 0, 1, 2) in y of
///   v(y) = (mu^p / b^p) T_{p+1}(y) + sum_{j<p} y^j mu^j / (b^j j!).
inline double v_derivatives(const MomentVector& mv, double y, int k) {
  detail::require(y >= 0.0, ErrorKind::domain, "v_derivatives needs y >= 0");
  detail::require(k >= 0 && k <= 2, ErrorKind::domain, "v_derivatives supports k in {0,1,2}");
  detail::require_origin_support(mv, "v_derivatives");
  const int p = mv.order();
  const double b = mv.support().upper;
  double sum = 0.0;
  double term = 1.0;  // y^j / j!
  for (int j = 0; j <= p - 1 - k; ++j) {
    sum += mv.moment(j + k) / std::pow(b, j + k) * term;
    term *= y / (j + 1);
  }
  return detail::top_moment(mv) / std::pow(b, p) * detail::taylor_remainder_any(p + 1 - k, y) + sum;
}

/// Closed-form C_p(y, b, mu^1..mu^p) = (v''(y) / v'(y))^2, in (0, 1].
inline double c_factor(const MomentVector& mv, double y) {
  detail::require(y >= 0.0, ErrorKind::domain, "c_factor needs y >= 0");
  detail::require_origin_support(mv, "c_factor");
  const int p = mv.order();
  const double b = mv.support().upper;
  const double mu1 = mv.moment(1);
  const double mup = detail::top_moment(mv);
  detail::require(mu1 > 0.0, ErrorKind::degenerate, "c_factor needs E X > 0");
  detail::require(mup > 0.0, ErrorKind::degenerate, "c_factor needs E X^p > 0");
  if (p == 1) return 1.0;

  // Both numerator and denominator carry mu^p e^y; beyond y = 30 everything
  // is divided by e^y so nothing overflows.
  const bool scaled = y > 30.0;
  const double lead = scaled ? mup : mup * std::exp(y);
  auto weight = [&](int j) {
    if (!scaled) {
      double w = 1.0;
      for (int i = 1; i <= j; ++i) w *= y / i;
      return w;
    }
    return std::exp(j * std::log(y) - std::lgamma(j + 1.0) - y);
  };

  if (p == 2) {
    const double shift = b * mu1 - mup;
    const double r = lead / (lead + (scaled ? std::exp(-y) : 1.0) * shift);
    return r * r;
  }

  double num = lead;
  for (int j = 0; j <= p - 3; ++j) num += weight(j) * (std::pow(b, p - j - 2) * mv.moment(j + 2) - mup);
  double den = lead;
  for (int j = 0; j <= p - 2; ++j) den += weight(j) * (std::pow(b, p - j - 1) * mv.moment(j + 1) - mup);
  const double r = num / den;
  return r * r;
}

/// I_p(X, c) for X on [0, 1]: how much the p-th moment sharpens the bound
/// over knowing only the first p - 1. Always >= 1; equals C_p(c)^(-1/2).
inline double i_measure(const MomentVector& mv, double c) {
  detail::require(c > 0.0, ErrorKind::domain, "i_measure needs c > 0");
  detail::require(mv.support().bounded() && *mv.support().lower == 0.0 && mv.support().upper == 1.0,
                  ErrorKind::domain, "i_measure needs a variable on [0, 1]; rescale first");
  const int p = mv.order();
  const double mup = detail::top_moment(mv);
  detail::require(mup > 0.0, ErrorKind::degenerate, "i_measure needs E X^p > 0");
  if (p == 1) return 1.0;
  double num = detail::taylor_remainder_any(p, c) * mup;
  double den = detail::taylor_remainder_any(p - 1, c) * mup;
  double term = 1.0;
  for (int j = 0; j <= p - 2; ++j) {
    num += mv.moment(j + 1) * term;
    if (j <= p - 3) den += mv.moment(j + 2) * term;
    term *= c / (j + 1);
  }
  return num / den;
}

}  // namespace tailbound

#endif  // TAILBOUND_MGF_BOUNDS_HPP
