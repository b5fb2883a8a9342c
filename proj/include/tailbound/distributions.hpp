#ifndef TAILBOUND_DISTRIBUTIONS_HPP
#define TAILBOUND_DISTRIBUTIONS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <type_traits>
#include <variant>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "tailbound/error.hpp"
#include "tailbound/moments.hpp"

namespace tailbound {

struct UniformLaw {
  double lo = 0.0;
  double hi = 1.0;
};

/// Two-point law on {0, 1} with P(1) = q.
struct BernoulliLaw {
  double q = 0.5;
};

/// Point mass at `value`, declared on the support [lo, hi].
struct PointLaw {
  double value = 0.0;
  double lo = 0.0;
  double hi = 1.0;
};

/// Beta(a, b) on [0, 1].
struct BetaLaw {
  double a = 2.0;
  double b = 2.0;
};

/// Exponential(rate) conditioned on [0, cap].
struct TruncatedExponentialLaw {
  double rate = 1.0;
  double cap = 1.0;
};

/// A sampleable bounded law, optionally translated: X = base + offset.
class Distribution {
 public:
  using Law = std::variant<UniformLaw, BernoulliLaw, PointLaw, BetaLaw, TruncatedExponentialLaw>;

  explicit Distribution(Law law, double offset = 0.0) : law_(law), offset_(offset) { check(); }

  static Distribution uniform(double lo, double hi) { return Distribution(UniformLaw{lo, hi}); }
  static Distribution bernoulli(double q) { return Distribution(BernoulliLaw{q}); }
  static Distribution point(double value, double lo, double hi) {
    return Distribution(PointLaw{value, lo, hi});
  }
  static Distribution beta(double a, double b) { return Distribution(BetaLaw{a, b}); }
  static Distribution truncated_exponential(double rate, double cap) {
    return Distribution(TruncatedExponentialLaw{rate, cap});
  }

  /// Builds a law from a string tag and named parameters, as used by the CLI.
  static Distribution from_tag(const std::string& tag, const std::map<std::string, double>& params) {
    auto get = [&](const char* key, double fallback) {
      const auto it = params.find(key);
      return it == params.end() ? fallback : it->second;
    };
    if (tag == "uniform") return uniform(get("lo", 0.0), get("hi", 1.0));
    if (tag == "bernoulli") return bernoulli(get("q", 0.5));
    if (tag == "point") return point(get("value", 0.0), get("lo", 0.0), get("hi", 1.0));
    if (tag == "beta") return beta(get("a", 2.0), get("b", 2.0));
    if (tag == "truncated-exponential" || tag == "texp") {
      return truncated_exponential(get("rate", 1.0), get("cap", 1.0));
    }
    detail::fail(ErrorKind::config, "unknown distribution tag '" + tag + "'");
  }

  const Law& law() const { return law_; }
  double offset() const { return offset_; }

  std::string tag() const {
    return std::visit(
        [](const auto& l) -> std::string {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, UniformLaw>) return "uniform";
          else if constexpr (std::is_same_v<L, BernoulliLaw>) return "bernoulli";
          else if constexpr (std::is_same_v<L, PointLaw>) return "point";
          else if constexpr (std::is_same_v<L, BetaLaw>) return "beta";
          else return "truncated-exponential";
        },
        law_);
  }

  Distribution shifted(double delta) const { return Distribution(law_, offset_ + delta); }
  Distribution centered() const { return shifted(-mean()); }

  Support support() const {
    const auto [lo, hi] = base_range();
    return Support::interval(lo + offset_, hi + offset_);
  }

  /// E f(X), exact for discrete laws, tanh-sinh quadrature otherwise.
  template <typename F>
  double expect(F&& f) const {
    const double off = offset_;
    return std::visit(
        [&](const auto& l) -> double {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, BernoulliLaw>) {
            return (1.0 - l.q) * f(off) + l.q * f(1.0 + off);
          } else if constexpr (std::is_same_v<L, PointLaw>) {
            return f(l.value + off);
          } else if constexpr (std::is_same_v<L, UniformLaw>) {
            const double w = l.hi - l.lo;
            return integrate([&](double x) { return f(x + off) / w; }, l.lo, l.hi);
          } else if constexpr (std::is_same_v<L, BetaLaw>) {
            const double log_norm = std::lgamma(l.a + l.b) - std::lgamma(l.a) - std::lgamma(l.b);
            return integrate(
                [&](double x) {
                  if (x <= 0.0 || x >= 1.0) return 0.0;
                  return f(x + off) *
                         std::exp(log_norm + (l.a - 1.0) * std::log(x) + (l.b - 1.0) * std::log1p(-x));
                },
                0.0, 1.0);
          } else {
            const double norm = -std::expm1(-l.rate * l.cap);
            return integrate([&](double x) { return f(x + off) * l.rate * std::exp(-l.rate * x) / norm; },
                             0.0, l.cap);
          }
        },
        law_);
  }

  double mean() const {
    return std::visit(
        [&](const auto& l) -> double {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, UniformLaw>) return 0.5 * (l.lo + l.hi) + offset_;
          else if constexpr (std::is_same_v<L, BernoulliLaw>) return l.q + offset_;
          else if constexpr (std::is_same_v<L, PointLaw>) return l.value + offset_;
          else if constexpr (std::is_same_v<L, BetaLaw>) return l.a / (l.a + l.b) + offset_;
          else {
            const double r = l.rate;
            const double c = l.cap;
            // 1/r - c e^{-rc} / (1 - e^{-rc})
            return 1.0 / r - c / std::expm1(r * c) + offset_;
          }
        },
        law_);
  }

  /// Raw moments E X^k for k = 1..p, with E max(X^p, 0) attached when the
  /// support reaches below zero.
  MomentVector moments(int p) const {
    detail::require(p >= 1, ErrorKind::domain, "moment order must be >= 1");
    if (const auto* u = std::get_if<UniformLaw>(&law_)) {
      return moments_uniform(p, u->lo + offset_, u->hi + offset_);
    }
    if (const auto* pt = std::get_if<PointLaw>(&law_)) {
      return moments_point(p, pt->value + offset_, support());
    }
    if (const auto* be = std::get_if<BetaLaw>(&law_); be && offset_ == 0.0) {
      return moments_beta(p, be->a, be->b);
    }
    if (const auto* bern = std::get_if<BernoulliLaw>(&law_); bern && offset_ == 0.0) {
      return moments_bernoulli(p, bern->q);
    }
    std::vector<double> mu;
    for (int k = 1; k <= p; ++k) mu.push_back(expect([k](double x) { return std::pow(x, k); }));
    const Support s = support();
    std::optional<double> pos;
    if (!s.nonnegative() && p % 2 == 1) pos = positive_part(p);
    return MomentVector(std::move(mu), s, pos);
  }

  double positive_part(int k) const {
    return expect([k](double x) { return x > 0.0 ? std::pow(x, k) : 0.0; });
  }

  /// E exp(sX).
  double mgf(double s) const {
    if (s == 0.0) return 1.0;
    const double shift = std::exp(s * offset_);
    return shift * std::visit(
                       [&](const auto& l) -> double {
                         using L = std::decay_t<decltype(l)>;
                         if constexpr (std::is_same_v<L, UniformLaw>) {
                           const double z = s * (l.hi - l.lo);
                           return std::exp(s * l.lo) * std::expm1(z) / z;
                         } else if constexpr (std::is_same_v<L, BernoulliLaw>) {
                           return 1.0 - l.q + l.q * std::exp(s);
                         } else if constexpr (std::is_same_v<L, PointLaw>) {
                           return std::exp(s * l.value);
                         } else if constexpr (std::is_same_v<L, TruncatedExponentialLaw>) {
                           // rate (1 - e^{(s - rate) cap}) / ((rate - s)(1 - e^{-rate cap}))
                           const double d = l.rate - s;
                           const double norm = -std::expm1(-l.rate * l.cap);
                           if (std::abs(d * l.cap) < 1e-12) return l.rate * l.cap / norm;
                           return l.rate * -std::expm1(-d * l.cap) / (d * norm);
                         } else {
                           return Distribution(l).expect([s](double x) { return std::exp(s * x); });
                         }
                       },
                       law_);
  }

  /// E X^k exp(lambda (X - ref)) for k in {0, 1, 2}; choosing ref at the top
  /// of the support keeps large tilts finite.
  double tilted_moment(int k, double lambda, double ref = 0.0) const {
    if (const auto* u = std::get_if<UniformLaw>(&law_); u && u->lo + offset_ == 0.0) {
      return uniform_tilted(k, lambda, u->hi + offset_, ref);
    }
    return expect([&](double x) { return std::pow(x, k) * std::exp(lambda * (x - ref)); });
  }

  /// One draw; `rng` is any 64-bit engine.
  template <typename Rng>
  double sample(Rng& rng) const {
    auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    return offset_ + std::visit(
                         [&](const auto& l) -> double {
                           using L = std::decay_t<decltype(l)>;
                           if constexpr (std::is_same_v<L, UniformLaw>) {
                             return l.lo + (l.hi - l.lo) * unit();
                           } else if constexpr (std::is_same_v<L, BernoulliLaw>) {
                             return unit() < l.q ? 1.0 : 0.0;
                           } else if constexpr (std::is_same_v<L, PointLaw>) {
                             return l.value;
                           } else if constexpr (std::is_same_v<L, BetaLaw>) {
                             std::gamma_distribution<double> ga(l.a, 1.0);
                             std::gamma_distribution<double> gb(l.b, 1.0);
                             const double x = ga(rng);
                             const double y = gb(rng);
                             return x / (x + y);
                           } else {
                             const double u = unit();
                             return -std::log1p(u * std::expm1(-l.rate * l.cap)) / l.rate;
                           }
                         },
                         law_);
  }

 private:
  template <typename F>
  static double integrate(F&& f, double a, double b) {
    static boost::math::quadrature::tanh_sinh<double> integrator;
    double error = 0.0;
    double l1 = 0.0;
    const double value = integrator.integrate(f, a, b, 1e-14, &error, &l1);
    detail::require(std::isfinite(value) && error <= 1e-9 * std::max(l1, 1e-300),
                    ErrorKind::oracle, "quadrature did not converge (error estimate " +
                                           detail::fmt(error) + ")");
    return value;
  }

  // X ~ U[0, w]: E X^k e^{lambda (X - ref)} with s = lambda w.
  static double uniform_tilted(int k, double lambda, double w, double ref) {
    const double s = lambda * w;
    const double wk = std::pow(w, k);
    // E U^k e^{s(U - 1)} for U on [0, 1].
    double unit;
    if (std::abs(s) < 2.0) {
      // e^{-s} sum_m s^m / (m! (k + m + 1))
      double term = 1.0;
      double sum = 0.0;
      for (int m = 0; m < 200; ++m) {
        const double add = term / (k + m + 1);
        sum += add;
        if (std::abs(add) <= 1e-18 * std::abs(sum)) break;
        term *= s / (m + 1);
      }
      unit = std::exp(-s) * sum;
    } else {
      const double em = std::exp(-s);
      switch (k) {
        case 0: unit = -std::expm1(-s) / s; break;
        case 1: unit = (s - 1.0 + em) / (s * s); break;
        case 2: unit = (s * s - 2.0 * s + 2.0 - 2.0 * em) / (s * s * s); break;
        default: detail::fail(ErrorKind::domain, "tilted_moment supports k in {0,1,2}");
      }
    }
    return wk * unit * std::exp(lambda * (w - ref));
  }

  std::pair<double, double> base_range() const {
    return std::visit(
        [](const auto& l) -> std::pair<double, double> {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, UniformLaw>) return {l.lo, l.hi};
          else if constexpr (std::is_same_v<L, BernoulliLaw>) return {0.0, 1.0};
          else if constexpr (std::is_same_v<L, PointLaw>) return {l.lo, l.hi};
          else if constexpr (std::is_same_v<L, BetaLaw>) return {0.0, 1.0};
          else return {0.0, l.cap};
        },
        law_);
  }

  void check() const {
    detail::require(std::isfinite(offset_), ErrorKind::config, "distribution offset must be finite");
    std::visit(
        [](const auto& l) {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, UniformLaw>) {
            detail::require(l.lo < l.hi, ErrorKind::config, "uniform needs lo < hi");
          } else if constexpr (std::is_same_v<L, BernoulliLaw>) {
            detail::require(l.q >= 0.0 && l.q <= 1.0, ErrorKind::config, "bernoulli needs q in [0,1]");
          } else if constexpr (std::is_same_v<L, PointLaw>) {
            detail::require(l.lo < l.hi && l.value >= l.lo && l.value <= l.hi, ErrorKind::config,
                            "point mass needs lo <= value <= hi with lo < hi");
          } else if constexpr (std::is_same_v<L, BetaLaw>) {
            detail::require(l.a > 0.0 && l.b > 0.0, ErrorKind::config, "beta needs a, b > 0");
          } else {
            detail::require(l.rate > 0.0 && l.cap > 0.0, ErrorKind::config,
                            "truncated exponential needs rate > 0 and cap > 0");
          }
        },
        law_);
  }

  Law law_;
  double offset_ = 0.0;
};

}  // namespace tailbound

#endif  // TAILBOUND_DISTRIBUTIONS_HPP
