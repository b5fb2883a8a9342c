#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "support/oracles.hpp"
#include "tailbound/bennett.hpp"
#include "tailbound/distributions.hpp"
#include "tailbound/oracle.hpp"
#include "tailbound/special_functions.hpp"

using namespace tailbound;
using Catch::Approx;

TEST_CASE("point mass never deviates") {
  const auto est = mc_tail(SumModel::iid(Distribution::point(0.3, 0, 1), 5), 0.01, 10000, 1);
  CHECK(est.probability == 0.0);
  CHECK(est.std_error == 0.0);
}

TEST_CASE("single uniform tail at 1/4") {
  const auto est = mc_tail(SumModel::iid(Distribution::uniform(0, 1), 1), 0.25, 400000, 2);
  CHECK(std::abs(est.probability - 0.25) <= 3 * est.std_error);
  CHECK(est.trials == 400000);
  CHECK(est.seed == 2);
}

TEST_CASE("sum of two uniforms beyond its mean by 1/2") {
  const auto est = mc_tail(SumModel::iid(Distribution::uniform(0, 1), 2), 0.5, 400000, 3);
  CHECK(std::abs(est.probability - 0.125) <= 3 * est.std_error);
}

TEST_CASE("standard error follows the binomial formula") {
  const auto grid = std::vector<double>{0.1, 0.3, 0.5};
  const auto out = mc_tail_grid(SumModel::iid(Distribution::bernoulli(0.3), 4), grid, 5000, 4);
  for (const auto& e : out) {
    CHECK(e.std_error == Approx(std::sqrt(e.probability * (1 - e.probability) / 5000.0)).epsilon(1e-15));
  }
}

TEST_CASE("simulation is reproducible for a fixed seed") {
  const auto grid = std::vector<double>{0.5, 1.0, 2.0};
  const SumModel model = SumModel::iid(Distribution::beta(2, 5), 12);
  const auto a = mc_tail_grid(model, grid, 20000, 99);
  const auto b = mc_tail_grid(model, grid, 20000, 99);
  const auto c = mc_tail_grid(model, grid, 20000, 100);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(a[i].probability == b[i].probability);
  bool differs = false;
  for (std::size_t i = 0; i < grid.size(); ++i) differs = differs || a[i].probability != c[i].probability;
  CHECK(differs);
}

TEST_CASE("grid and single-threshold estimates agree") {
  const SumModel model = SumModel::iid(Distribution::uniform(0, 1), 6);
  const auto grid = std::vector<double>{0.5, 1.0};
  const auto all = mc_tail_grid(model, grid, 10000, 5);
  CHECK(mc_tail(model, 1.0, 10000, 5).probability == all[1].probability);
}

TEST_CASE("mixed laws are centered on the total mean") {
  SumModel model{{Distribution::uniform(0, 1), Distribution::bernoulli(0.5)}, 3};
  CHECK(model.size() == 6);
  CHECK(model.mean() == Approx(3.0));
  // symmetric sum: the tail above the mean by a small amount is just under 1/2
  const auto est = mc_tail(model, 1e-9, 200000, 6);
  CHECK(std::abs(est.probability - 0.5) < 0.01);
}

TEST_CASE("simulation argument checks") {
  const SumModel model = SumModel::iid(Distribution::uniform(0, 1), 2);
  CHECK_THROWS_AS(mc_tail(model, 0.5, 999, 1), Error);
  CHECK_THROWS_AS(mc_tail(model, 0.0, 10000, 1), Error);
  CHECK_THROWS_AS(mc_tail(SumModel{{}, 1}, 0.5, 10000, 1), Error);
}

TEST_CASE("unknown distribution tag is a configuration error") {
  try {
    Distribution::from_tag("cauchy", {});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
  }
}

TEST_CASE("exact mgf values") {
  CHECK(exact_mgf(Distribution::uniform(0, 1), 0.0) == 1.0);
  CHECK(exact_mgf(Distribution::beta(2, 5), 0.0) == 1.0);
  CHECK(exact_mgf(Distribution::uniform(0, 1), 1.0) == Approx(std::numbers::e - 1).epsilon(1e-15));
  CHECK(exact_mgf(Distribution::uniform(0, 1), 1e-12) == Approx(1.0 + 0.5e-12).epsilon(1e-15));
  for (double q : {0.2, 0.7}) {
    for (double s : {-1.0, 0.5, 3.0}) {
      CHECK(exact_mgf(Distribution::bernoulli(q), s) == Approx(q * std::exp(s) + 1 - q).epsilon(1e-15));
    }
  }
}

TEST_CASE("exact mgf agrees with an independent quadrature") {
  const std::vector<Distribution> laws{Distribution::uniform(-1, 2), Distribution::beta(2, 2),
                                       Distribution::beta(2, 5).shifted(-0.3),
                                       Distribution::truncated_exponential(1.5, 2.0)};
  for (const auto& law : laws) {
    for (double s : {-2.0, 0.3, 1.0, 5.0}) {
      const auto sup = law.support();
      double ref = 0.0;
      if (const auto* be = std::get_if<BetaLaw>(&law.law())) {
        const double norm = std::beta(be->a, be->b);
        ref = oracle::integrate(
            [&](double x) {
              return std::exp(s * (x + law.offset())) * std::pow(x, be->a - 1) * std::pow(1 - x, be->b - 1) / norm;
            },
            0.0, 1.0);
      } else if (const auto* te = std::get_if<TruncatedExponentialLaw>(&law.law())) {
        const double norm = 1 - std::exp(-te->rate * te->cap);
        ref = oracle::integrate([&](double x) { return std::exp(s * x) * te->rate * std::exp(-te->rate * x) / norm; },
                                0.0, te->cap);
      } else {
        ref = oracle::integrate([&](double x) { return std::exp(s * x) / sup.width(); }, *sup.lower, sup.upper);
      }
      CHECK(exact_mgf(law, s) == Approx(ref).epsilon(1e-10));
    }
  }
}

TEST_CASE("brute scan simple cases") {
  const std::vector<double> log_case{std::numbers::e};
  const auto r0 = brute_root_scan(log_case);
  REQUIRE(r0.roots.size() == 1);
  CHECK(r0.roots[0] == Approx(1.0).epsilon(1e-12));

  const std::vector<double> lin{2.0, 1.0};
  const auto r1 = brute_root_scan(lin);
  REQUIRE(r1.roots.size() == 1);
  CHECK(r1.roots[0] == Approx(0.44285440100238858314).epsilon(1e-12));
  CHECK(r1.bracket_grid.max_abscissa > r1.roots[0]);

  CHECK_THROWS_AS(brute_root_scan(lin, 1000), Error);
}

TEST_CASE("brute scan agrees with the production solver") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> tdist(-2.0, 1.5);
  int multi = 0;
  for (int i = 0; i < 500; ++i) {
    const int p = 2 + i % 5;
    auto law = oracle::random_law(rng, -1.0, 1.0, 2 + i % 4);
    law.x.front() = 0.5 + 0.5 * std::uniform_real_distribution<double>()(rng);
    const MomentVector mv = law.moments(p, Support::interval(-1, 1));
    const std::size_t n = 1 + i % 9;
    const double t = std::pow(10.0, tdist(rng)) * static_cast<double>(n);
    const auto bound = bennett_bound(EnsembleSpec::iid(mv, n), t, p);
    const auto brute = brute_root_scan(bound.alpha);
    INFO("case " << i);
    REQUIRE(brute.roots.size() == bound.roots.roots.size());
    for (std::size_t k = 0; k < brute.roots.size(); ++k) {
      CHECK(std::abs(brute.roots[k] - bound.roots.roots[k]) <= 1e-8);
    }
    multi += brute.roots.size() > 1 ? 1 : 0;
  }
  // the three-root interpolating cubic as a fixed multi-root case
  const std::vector<double> cubic{1.5, -1.016440311377049, 0.5603608348801457, -0.7622023519621419};
  const auto brute = brute_root_scan(cubic);
  const auto prod = solve_poly_exp(cubic);
  REQUIRE(brute.roots.size() == 3);
  REQUIRE(prod.roots.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(brute.roots[k] - prod.roots[k]) <= 1e-8);
}
