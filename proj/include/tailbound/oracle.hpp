#ifndef TAILBOUND_ORACLE_HPP
#define TAILBOUND_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "tailbound/distributions.hpp"
#include "tailbound/error.hpp"
#include "tailbound/special_functions.hpp"

namespace tailbound {

/// Empirical P(S_n - E S_n >= t) with its binomial standard error.
struct TailEstimate {
  double t = 0.0;
  double probability = 0.0;
  double std_error = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const TailEstimate&, const TailEstimate&) = default;
};

/// Independent summands: every law in `laws` appears `copies` times.
struct SumModel {
  std::vector<Distribution> laws;
  std::size_t copies = 1;

  static SumModel iid(Distribution law, std::size_t n) { return SumModel{{std::move(law)}, n}; }
  std::size_t size() const { return laws.size() * copies; }
  double mean() const {
    double m = 0.0;
    for (const auto& l : laws) m += l.mean();
    return m * static_cast<double>(copies);
  }
};

inline constexpr unsigned kMonteCarloShards = 16;

/// Tail frequencies for every t in `t_grid` from one set of simulated sums.
/// Trials are split into a fixed number of shards, shard k seeded with
/// seed_seq{seed, k}, so the result does not depend on the thread count.
inline std::vector<TailEstimate> mc_tail_grid(const SumModel& model, std::span<const double> t_grid,
                                              std::uint64_t trials, std::uint64_t seed) {
  detail::require(trials >= 1000, ErrorKind::domain, "Monte-Carlo needs at least 1000 trials");
  detail::require(!model.laws.empty() && model.copies >= 1, ErrorKind::empty_input,
                  "Monte-Carlo needs at least one variable");
  for (double t : t_grid) {
    detail::require(std::isfinite(t) && t > 0.0, ErrorKind::domain, "thresholds must be > 0");
  }
  const double center = model.mean();
  const std::size_t m = t_grid.size();
  std::vector<std::vector<std::uint64_t>> counts(kMonteCarloShards, std::vector<std::uint64_t>(m, 0));

  auto run_shard = [&](unsigned shard) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(shard)};
    std::mt19937_64 rng(seq);
    const std::uint64_t share = trials / kMonteCarloShards + (shard < trials % kMonteCarloShards ? 1 : 0);
    auto& local = counts[shard];
    for (std::uint64_t r = 0; r < share; ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < model.copies; ++c) {
        for (const auto& law : model.laws) sum += law.sample(rng);
      }
      const double dev = sum - center;
      for (std::size_t i = 0; i < m; ++i) local[i] += dev >= t_grid[i] ? 1 : 0;
    }
  };

  const unsigned workers = std::clamp(std::thread::hardware_concurrency(), 1u, kMonteCarloShards);
  if (workers == 1) {
    for (unsigned s = 0; s < kMonteCarloShards; ++s) run_shard(s);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (unsigned s = w; s < kMonteCarloShards; s += workers) run_shard(s);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<TailEstimate> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::uint64_t hits = 0;
    for (const auto& c : counts) hits += c[i];
    const double n = static_cast<double>(trials);
    const double prob = static_cast<double>(hits) / n;
    out[i] = TailEstimate{t_grid[i], prob, std::sqrt(prob * (1.0 - prob) / n), trials, seed};
  }
  return out;
}

inline TailEstimate mc_tail(const SumModel& model, double t, std::uint64_t trials, std::uint64_t seed) {
  return mc_tail_grid(model, std::span<const double>(&t, 1), trials, seed).front();
}

/// E exp(sX), closed form where one exists, quadrature otherwise.
inline double exact_mgf(const Distribution& law, double s) { return law.mgf(s); }

/// Dense-grid sign-change scan of alpha0 - sum alpha_j y^j - e^y on (0, X],
/// each bracket narrowed by plain bisection. X is chosen so that
/// e^x > 2 (alpha0 + sum |alpha_j| x^j) for every x >= X, which rules out
/// roots beyond the grid.
inline RootSet brute_root_scan(std::span<const double> alpha, std::size_t resolution = 100000) {
  detail::require(resolution >= 100000, ErrorKind::domain, "brute_root_scan needs >= 1e5 grid points");
  detail::require(!alpha.empty(), ErrorKind::domain, "brute_root_scan needs alpha0");
  const double q = static_cast<double>(alpha.size() - 1);
  auto poly_abs = [&](double x) {
    double s = std::abs(alpha[0]);
    double xj = 1.0;
    for (std::size_t j = 1; j < alpha.size(); ++j) {
      xj *= x;
      s += std::abs(alpha[j]) * xj;
    }
    return s;
  };
  double x_max = std::max({1.0, q, std::log(std::abs(alpha[0]) + 1.0) + 1.0});
  while (std::exp(x_max) <= 2.0 * poly_abs(x_max)) x_max *= 2.0;

  RootSet out;
  out.method = RootMethod::scan;
  const double step = x_max / static_cast<double>(resolution);
  out.bracket_grid = ScanGrid{x_max, step, 0};
  double prev_x = 0.0;
  double prev_f = poly_exp_residual(alpha, 0.0);
  for (std::size_t i = 1; i <= resolution; ++i) {
    const double x = i == resolution ? x_max : step * static_cast<double>(i);
    const double fx = poly_exp_residual(alpha, x);
    if (fx == 0.0) {
      out.roots.push_back(x);
    } else if (prev_f != 0.0 && (fx > 0.0) != (prev_f > 0.0)) {
      double lo = prev_x;
      double hi = x;
      const bool lo_positive = prev_f > 0.0;
      for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = poly_exp_residual(alpha, mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        ((fm > 0.0) == lo_positive ? lo : hi) = mid;
      }
      out.roots.push_back(0.5 * (lo + hi));
    }
    prev_x = x;
    prev_f = fx;
  }
  out.unique = out.roots.size() == 1;
  return out;
}

}  // namespace tailbound

#endif  // TAILBOUND_ORACLE_HPP
