#ifndef TAILBOUND_MOMENTS_HPP
#define TAILBOUND_MOMENTS_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tailbound/error.hpp"

namespace tailbound {

/// Almost-sure range of a random variable: either [lower, upper] or
/// (-inf, upper] for variables that are only bounded above.
struct Support {
  std::optional<double> lower;
  double upper = 1.0;

  static Support interval(double a, double b) {
    detail::require(std::isfinite(a) && std::isfinite(b), ErrorKind::domain,
                    "support endpoints must be finite");
    detail::require(a < b, ErrorKind::domain,
                    "support requires lower < upper, got [" + std::to_string(a) + ", " +
                        std::to_string(b) + "]");
    return Support{a, b};
  }

  static Support upper_only(double b) {
    detail::require(std::isfinite(b), ErrorKind::domain, "support upper bound must be finite");
    return Support{std::nullopt, b};
  }

  bool bounded() const { return lower.has_value(); }
  bool nonnegative() const { return lower && *lower >= 0.0; }
  double width() const {
    detail::require(bounded(), ErrorKind::domain, "support has no lower bound");
    return upper - *lower;
  }
  bool contains(double x, double tol = 1e-12) const {
    return x <= upper + tol && (!lower || x >= *lower - tol);
  }

  friend bool operator==(const Support&, const Support&) = default;
};

/// Whether the stored moments are the true raw moments or only upper bounds
/// on them (the latter only needs the log-convexity chain to hold).
enum class MomentKind { exact, upper_bound };

namespace detail {

inline constexpr double kMomentRelTol = 1e-9;

inline double factorial(int n) { return std::tgamma(static_cast<double>(n) + 1.0); }

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

// a <= b up to a relative tolerance plus an absolute floor tied to the
// support magnitude of the moment order involved.
inline bool approx_leq(double a, double b, double abs_floor) {
  return a <= b + kMomentRelTol * std::max(std::abs(a), std::abs(b)) + abs_floor;
}

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace detail

/// First p raw moments E(X^k), k = 1..p, of one variable on a stated support.
///
/// Construction validates the moment chain: on a nonnegative support
/// 0 <= mu[k+1] <= b * mu[k] and mu[d] * mu[d+2] >= mu[d+1]^2; on a general
/// support the even-order Cauchy-Schwarz links and magnitude limits. A vector
/// that violates a chain beyond tolerance is rejected with ErrorKind::infeasible.
class MomentVector {
 public:
  MomentVector(std::vector<double> raw, Support support,
               std::optional<double> positive_part_pth = std::nullopt,
               MomentKind kind = MomentKind::exact)
      : mu_(std::move(raw)), support_(support), positive_part_(positive_part_pth), kind_(kind) {
    validate();
  }

  /// Empirical moments of `data`; every datum must lie in `support`.
  static MomentVector from_samples(std::span<const double> data, int p, Support support) {
    detail::require(!data.empty(), ErrorKind::empty_input, "no samples supplied");
    detail::require(p >= 1, ErrorKind::domain, "moment order must be >= 1");
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!std::isfinite(data[i]) || !support.contains(data[i])) {
        detail::fail(ErrorKind::domain, "sample at index " + std::to_string(i) + " (" +
                                            detail::fmt(data[i]) + ") lies outside the support");
      }
    }
    auto samples = std::make_shared<const std::vector<double>>(data.begin(), data.end());
    auto [mu, pos] = sample_moments(*samples, p, 0.0, 1.0);
    MomentVector mv(std::move(mu), support, pos, MomentKind::exact);
    mv.samples_ = std::move(samples);
    return mv;
  }

  int order() const { return static_cast<int>(mu_.size()); }

  /// E(X^k); k = 0 gives 1.
  double moment(int k) const {
    if (k == 0) return 1.0;
    detail::require(k >= 1 && k <= order(), ErrorKind::order,
                    "moment of order " + std::to_string(k) + " requested from a vector of order " +
                        std::to_string(order()));
    return mu_[static_cast<std::size_t>(k - 1)];
  }

  std::span<const double> raw() const { return mu_; }
  const Support& support() const { return support_; }
  MomentKind kind() const { return kind_; }
  bool has_samples() const { return samples_ != nullptr; }
  std::span<const double> samples() const {
    return samples_ ? std::span<const double>(*samples_) : std::span<const double>{};
  }

  /// E max(X^p, 0) for the carried order p. Defaults to mu[p] on a
  /// nonnegative support.
  std::optional<double> positive_part_pth() const {
    if (positive_part_) return positive_part_;
    if (support_.nonnegative() || order() % 2 == 0) return mu_.back();
    return std::nullopt;
  }

  /// E max(X^k, 0) for any k <= p where it can be resolved.
  double positive_part(int k) const {
    detail::require(k >= 1 && k <= order(), ErrorKind::order,
                    "positive-part moment of order " + std::to_string(k) + " unavailable");
    if (support_.nonnegative() || k % 2 == 0) return moment(k);
    if (k == order() && positive_part_) return *positive_part_;
    if (samples_) {
      double acc = 0.0;
      for (double x : *samples_) acc += x > 0.0 ? std::pow(x, k) : 0.0;
      return acc / static_cast<double>(samples_->size());
    }
    detail::fail(ErrorKind::order, "positive-part moment E max(X^" + std::to_string(k) +
                                       ",0) is not carried by this moment vector");
  }

  /// Same variable, moments up to `k` only.
  MomentVector truncated(int k) const {
    detail::require(k >= 1 && k <= order(), ErrorKind::order,
                    "cannot truncate order " + std::to_string(order()) + " vector to " +
                        std::to_string(k));
    std::vector<double> mu(mu_.begin(), mu_.begin() + k);
    std::optional<double> pos;
    if (support_.nonnegative() || k % 2 == 0) {
      pos = std::nullopt;
    } else if (k == order()) {
      pos = positive_part_;
    } else if (samples_) {
      pos = positive_part(k);
    }
    MomentVector out(std::move(mu), support_, pos, kind_);
    out.samples_ = samples_;
    return out;
  }

  /// Copy with the p-th positive-part moment replaced (e.g. inflated upper bound).
  MomentVector with_positive_part(double value) const {
    MomentVector out(mu_, support_, value, kind_);
    out.samples_ = samples_;
    return out;
  }

  friend bool operator==(const MomentVector& a, const MomentVector& b) {
    return a.mu_ == b.mu_ && a.support_ == b.support_ &&
           a.positive_part_pth() == b.positive_part_pth() && a.kind_ == b.kind_;
  }

  // Shared by from_samples and the sample-based shift/reflect paths:
  // moments of sign * (x - offset).
  static std::pair<std::vector<double>, double> sample_moments(std::span<const double> data,
                                                               int p, double offset,
                                                               double sign) {
    std::vector<double> acc(static_cast<std::size_t>(p), 0.0);
    double pos = 0.0;
    for (double raw : data) {
      const double x = sign * (raw - offset);
      double power = 1.0;
      for (int k = 0; k < p; ++k) {
        power *= x;
        acc[static_cast<std::size_t>(k)] += power;
      }
      if (x > 0.0) pos += power;
    }
    const auto n = static_cast<double>(data.size());
    for (double& v : acc) v /= n;
    return {std::move(acc), pos / n};
  }

 private:
  friend MomentVector shift_to_origin(const MomentVector&, std::optional<int>);
  friend MomentVector reflect_moments(const MomentVector&, std::optional<int>);

  void validate() const {
    using detail::approx_leq;
    using detail::fmt;
    const int p = order();
    detail::require(p >= 1, ErrorKind::domain, "moment vector needs at least one moment");
    for (int k = 1; k <= p; ++k) {
      detail::require(std::isfinite(moment(k)), ErrorKind::domain,
                      "moment mu[" + std::to_string(k) + "] is not finite");
    }
    if (positive_part_) {
      detail::require(std::isfinite(*positive_part_) && *positive_part_ >= 0.0,
                      ErrorKind::infeasible, "positive-part moment must be finite and >= 0");
    }
    const double b = support_.upper;
    const double mag = support_.lower ? std::max(std::abs(*support_.lower), std::abs(b)) : 0.0;
    auto floor_for = [&](int k) { return support_.lower ? 1e-12 * std::pow(mag, k) : 1e-300; };

    auto chain = [&](int d) {
      const double lhs = moment(d) * moment(d + 2);
      const double rhs = moment(d + 1) * moment(d + 1);
      detail::require(approx_leq(rhs, lhs, floor_for(2 * d + 2)), ErrorKind::infeasible,
                      "moment chain violated: mu[" + std::to_string(d) + "]*mu[" +
                          std::to_string(d + 2) + "] >= mu[" + std::to_string(d + 1) +
                          "]^2 fails (" + fmt(lhs) + " < " + fmt(rhs) + ")");
    };

    if (kind_ == MomentKind::upper_bound) {
      // Upper bounds need not form a moment sequence; only signs are checked.
      for (int k = 2; k <= p; k += 2) {
        detail::require(moment(k) >= 0.0, ErrorKind::infeasible,
                        "even moment bound mu[" + std::to_string(k) + "] is negative");
      }
      return;
    }

    if (support_.lower) {
      const double a = *support_.lower;
      detail::require(approx_leq(a, moment(1), floor_for(1)) && approx_leq(moment(1), b, floor_for(1)),
                      ErrorKind::infeasible,
                      "mean " + fmt(moment(1)) + " lies outside the support");
      for (int k = 1; k <= p; ++k) {
        detail::require(approx_leq(std::abs(moment(k)), std::pow(mag, k), floor_for(k)),
                        ErrorKind::infeasible,
                        "|mu[" + std::to_string(k) + "]| exceeds the support bound");
      }
    }
    for (int k = 2; k <= p; k += 2) {
      detail::require(approx_leq(0.0, moment(k), floor_for(k)), ErrorKind::infeasible,
                      "even moment mu[" + std::to_string(k) + "] is negative");
    }
    if (p >= 2) chain(0);

    if (support_.nonnegative()) {
      for (int k = 1; k <= p; ++k) {
        detail::require(approx_leq(0.0, moment(k), floor_for(k)), ErrorKind::infeasible,
                        "mu[" + std::to_string(k) + "] is negative on a nonnegative support");
        if (k < p) {
          detail::require(approx_leq(moment(k + 1), b * moment(k), floor_for(k + 1)),
                          ErrorKind::infeasible,
                          "moment chain violated: mu[" + std::to_string(k + 1) + "] <= b*mu[" +
                              std::to_string(k) + "] fails (" + fmt(moment(k + 1)) + " > " +
                              fmt(b * moment(k)) + ")");
        }
      }
      for (int d = 1; d + 2 <= p; ++d) chain(d);
      if (positive_part_) {
        detail::require(std::abs(*positive_part_ - moment(p)) <=
                            detail::kMomentRelTol * std::abs(moment(p)) + floor_for(p),
                        ErrorKind::infeasible,
                        "positive-part moment differs from mu[p] on a nonnegative support");
      }
    } else {
      for (int d = 2; d + 2 <= p; d += 2) chain(d);
      if (positive_part_) {
        detail::require(approx_leq(moment(p), *positive_part_, floor_for(p)),
                        ErrorKind::infeasible, "E max(X^p,0) must be >= E X^p");
        detail::require(approx_leq(*positive_part_, std::pow(std::max(b, 0.0), p), floor_for(p)) ||
                            !support_.lower,
                        ErrorKind::infeasible, "E max(X^p,0) exceeds max(b,0)^p");
      }
    }
  }

  std::vector<double> mu_;
  Support support_;
  std::optional<double> positive_part_;
  MomentKind kind_;
  std::shared_ptr<const std::vector<double>> samples_;
};

/// Independent variables defining S_n = sum X_i.
class EnsembleSpec {
 public:
  explicit EnsembleSpec(std::vector<MomentVector> variables) : vars_(std::move(variables)) {
    detail::require(!vars_.empty(), ErrorKind::empty_input, "ensemble needs at least one variable");
    n_ = vars_.size();
  }

  static EnsembleSpec iid(MomentVector mv, std::size_t n) {
    detail::require(n >= 1, ErrorKind::domain, "ensemble size must be >= 1");
    EnsembleSpec spec({std::move(mv)});
    spec.n_ = n;
    spec.iid_ = true;
    return spec;
  }

  std::size_t size() const { return n_; }
  bool iid() const { return iid_; }
  const MomentVector& operator[](std::size_t i) const { return iid_ ? vars_.front() : vars_.at(i); }

  /// Distinct moment vectors with their multiplicity.
  std::vector<std::pair<const MomentVector*, std::size_t>> groups() const {
    std::vector<std::pair<const MomentVector*, std::size_t>> out;
    if (iid_) {
      out.emplace_back(&vars_.front(), n_);
    } else {
      for (const auto& v : vars_) out.emplace_back(&v, 1);
    }
    return out;
  }

 private:
  std::vector<MomentVector> vars_;
  std::size_t n_ = 0;
  bool iid_ = false;
};

inline MomentVector moments_from_samples(std::span<const double> data, int p, Support support) {
  return MomentVector::from_samples(data, p, support);
}

inline MomentVector moments_uniform(int p, double lo, double hi) {
  detail::require(p >= 1, ErrorKind::domain, "moment order must be >= 1");
  const Support support = Support::interval(lo, hi);
  std::vector<double> mu;
  mu.reserve(static_cast<std::size_t>(p));
  const double w = hi - lo;
  for (int k = 1; k <= p; ++k) {
    // (hi^{k+1} - lo^{k+1}) / ((k+1)(hi-lo)) written as a sum to avoid cancellation.
    double acc = 0.0;
    for (int j = 0; j <= k; ++j) acc += std::pow(hi, j) * std::pow(lo, k - j);
    mu.push_back(acc / static_cast<double>(k + 1));
  }
  std::optional<double> pos;
  if (lo < 0.0 && p % 2 == 1) {
    pos = hi > 0.0 ? std::pow(hi, p + 1) / (static_cast<double>(p + 1) * w) : 0.0;
  }
  return MomentVector(std::move(mu), support, pos);
}

inline MomentVector moments_bernoulli(int p, double q) {
  detail::require(p >= 1, ErrorKind::domain, "moment order must be >= 1");
  detail::require(q >= 0.0 && q <= 1.0, ErrorKind::domain, "Bernoulli parameter must be in [0,1]");
  return MomentVector(std::vector<double>(static_cast<std::size_t>(p), q), Support::interval(0.0, 1.0));
}

inline MomentVector moments_point(int p, double value, Support support) {
  detail::require(p >= 1, ErrorKind::domain, "moment order must be >= 1");
  detail::require(support.contains(value, 0.0), ErrorKind::domain, "point mass outside support");
  std::vector<double> mu;
  for (int k = 1; k <= p; ++k) mu.push_back(std::pow(value, k));
  std::optional<double> pos;
  if (!support.nonnegative() && p % 2 == 1) pos = value > 0.0 ? std::pow(value, p) : 0.0;
  return MomentVector(std::move(mu), support, pos);
}

/// Beta(a, b) on [0, 1].
inline MomentVector moments_beta(int p, double a, double b) {
  detail::require(p >= 1, ErrorKind::domain, "moment order must be >= 1");
  detail::require(a > 0.0 && b > 0.0, ErrorKind::domain, "beta shape parameters must be positive");
  std::vector<double> mu;
  double m = 1.0;
  for (int k = 0; k < p; ++k) {
    m *= (a + k) / (a + b + k);
    mu.push_back(m);
  }
  return MomentVector(std::move(mu), Support::interval(0.0, 1.0));
}

/// Moments of X = Y - a on [0, b - a]. Sample-backed vectors are recomputed
/// from data; analytic ones go through the binomial expansion, which needs
/// moments up to the requested order.
inline MomentVector shift_to_origin(const MomentVector& mv, std::optional<int> order = std::nullopt) {
  detail::require(mv.support().bounded(), ErrorKind::domain,
                  "shift_to_origin needs a support with a lower bound");
  const int p = order.value_or(mv.order());
  detail::require(p >= 1, ErrorKind::domain, "moment order must be >= 1");
  const double a = *mv.support().lower;
  const Support target = Support::interval(0.0, mv.support().upper - a);
  if (mv.has_samples()) {
    auto [mu, pos] = MomentVector::sample_moments(mv.samples(), p, a, 1.0);
    MomentVector out(std::move(mu), target, pos, mv.kind());
    out.samples_ = std::make_shared<const std::vector<double>>([&] {
      std::vector<double> shifted;
      shifted.reserve(mv.samples().size());
      for (double x : mv.samples()) shifted.push_back(std::max(0.0, x - a));
      return shifted;
    }());
    return out;
  }
  detail::require(p <= mv.order(), ErrorKind::order,
                  "binomial shift to order " + std::to_string(p) + " needs moments up to order " +
                      std::to_string(p) + ", vector carries " + std::to_string(mv.order()));
  std::vector<double> mu;
  for (int k = 1; k <= p; ++k) {
    double acc = 0.0;
    for (int j = 0; j <= k; ++j) acc += detail::binomial(k, j) * mv.moment(j) * std::pow(-a, k - j);
    mu.push_back(acc);
  }
  return MomentVector(std::move(mu), target, std::nullopt, mv.kind());
}

/// Moments of (b - Y) on [0, b - a].
inline MomentVector reflect_moments(const MomentVector& mv, std::optional<int> order = std::nullopt) {
  detail::require(mv.support().bounded(), ErrorKind::domain,
                  "reflect_moments needs a support with a lower bound");
  const int p = order.value_or(mv.order());
  detail::require(p >= 1, ErrorKind::domain, "moment order must be >= 1");
  const double b = mv.support().upper;
  const Support target = Support::interval(0.0, b - *mv.support().lower);
  if (mv.has_samples()) {
    auto [mu, pos] = MomentVector::sample_moments(mv.samples(), p, b, -1.0);
    MomentVector out(std::move(mu), target, pos, mv.kind());
    out.samples_ = std::make_shared<const std::vector<double>>([&] {
      std::vector<double> reflected;
      reflected.reserve(mv.samples().size());
      for (double x : mv.samples()) reflected.push_back(std::max(0.0, b - x));
      return reflected;
    }());
    return out;
  }
  detail::require(p <= mv.order(), ErrorKind::order,
                  "binomial reflection to order " + std::to_string(p) +
                      " needs moments up to order " + std::to_string(p) + ", vector carries " +
                      std::to_string(mv.order()));
  std::vector<double> mu;
  for (int k = 1; k <= p; ++k) {
    double acc = 0.0;
    for (int j = 0; j <= k; ++j) {
      const double sign = (j % 2 == 0) ? 1.0 : -1.0;
      acc += detail::binomial(k, j) * std::pow(b, k - j) * sign * mv.moment(j);
    }
    mu.push_back(acc);
  }
  return MomentVector(std::move(mu), target, std::nullopt, mv.kind());
}

/// Reads one value per line, or `id,value` CSV rows. Blank lines and `#`
/// comments are skipped; a non-numeric first row is treated as a header.
inline std::vector<double> read_samples(std::istream& in) {
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    while (!view.empty() && (view.back() == '\r' || view.back() == ' ' || view.back() == '\t'))
      view.remove_suffix(1);
    while (!view.empty() && (view.front() == ' ' || view.front() == '\t')) view.remove_prefix(1);
    if (view.empty() || view.front() == '#') continue;
    if (const auto comma = view.find(','); comma != std::string_view::npos) {
      view = view.substr(comma + 1);
      while (!view.empty() && view.front() == ' ') view.remove_prefix(1);
    }
    if (!view.empty() && view.front() == '+') view.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(view.data(), view.data() + view.size(), value);
    if (ec != std::errc{} || ptr != view.data() + view.size()) {
      if (out.empty() && line_no == 1) continue;
      detail::fail(ErrorKind::domain, "cannot parse a number on line " + std::to_string(line_no));
    }
    out.push_back(value);
  }
  return out;
}

}  // namespace tailbound

#endif  // TAILBOUND_MOMENTS_HPP
