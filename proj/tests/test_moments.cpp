#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "support/oracles.hpp"
#include "tailbound/distributions.hpp"
#include "tailbound/moments.hpp"

using namespace tailbound;
using Catch::Approx;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::domain;
}

void check_moments(const MomentVector& mv, const std::vector<double>& expected, double tol = 1e-12) {
  REQUIRE(mv.order() == static_cast<int>(expected.size()));
  for (int k = 1; k <= mv.order(); ++k) {
    INFO("k = " << k);
    CHECK(mv.moment(k) == Approx(expected[static_cast<std::size_t>(k - 1)]).epsilon(tol).margin(tol));
  }
}

}  // namespace

TEST_CASE("point-mass samples give unit moments") {
  const std::vector<double> data{1, 1, 1};
  check_moments(moments_from_samples(data, 3, Support::interval(0, 1)), {1, 1, 1});
}

TEST_CASE("two-point samples") {
  const std::vector<double> data{0, 1};
  check_moments(moments_from_samples(data, 2, Support::interval(0, 1)), {0.5, 0.5});
}

TEST_CASE("sample moments converge to uniform moments") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 1000000;
  std::vector<double> data(n);
  for (auto& x : data) x = u(rng);
  const MomentVector mv = moments_from_samples(data, 4, Support::interval(0, 1));
  for (int k = 1; k <= 4; ++k) {
    double m2 = 0.0;
    for (double x : data) m2 += std::pow(x, 2 * k);
    const double sd = std::sqrt(m2 / n - mv.moment(k) * mv.moment(k));
    CHECK(std::abs(mv.moment(k) - 1.0 / (k + 1)) <= 5.0 * sd / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("samples outside the support are rejected with their index") {
  const std::vector<double> data{0.2, 0.4, 1.5};
  try {
    moments_from_samples(data, 2, Support::interval(0, 1));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::domain);
    CHECK(std::string(e.what()).find("index 2") != std::string::npos);
  }
}

TEST_CASE("samples within the support tolerance are accepted") {
  const std::vector<double> data{-1e-13, 1.0 + 1e-13};
  CHECK_NOTHROW(moments_from_samples(data, 2, Support::interval(0, 1)));
}

TEST_CASE("empty sample set is an empty-input error") {
  const std::vector<double> data;
  CHECK(kind_of([&] { moments_from_samples(data, 2, Support::interval(0, 1)); }) == ErrorKind::empty_input);
}

TEST_CASE("sample moments carry the positive part") {
  const std::vector<double> data{-1.0, 0.5, 2.0};
  const MomentVector mv = moments_from_samples(data, 3, Support::interval(-1, 2));
  CHECK(mv.positive_part(3) == Approx((0.125 + 8.0) / 3.0));
  CHECK(mv.positive_part(1) == Approx(2.5 / 3.0));
  CHECK(mv.moment(3) == Approx((-1.0 + 0.125 + 8.0) / 3.0));
}

TEST_CASE("uniform moments on [0,1]") {
  const MomentVector mv = moments_uniform(2, 0, 1);
  check_moments(mv, {0.5, 1.0 / 3.0});
  const double d = std::pow(mv.moment(2) / mv.moment(1), 2);
  CHECK(d == Approx(4.0 / 9.0));
  check_moments(moments_uniform(1, 0, 1), {0.5});
}

TEST_CASE("uniform moments on [0,2]") {
  check_moments(moments_uniform(4, 0, 2), {1.0, 4.0 / 3.0, 2.0, 16.0 / 5.0});
}

TEST_CASE("uniform moments agree with quadrature on a shifted interval") {
  const MomentVector mv = moments_uniform(5, -0.7, 1.9);
  for (int k = 1; k <= 5; ++k) {
    const double ref = oracle::integrate([k](double x) { return std::pow(x, k); }, -0.7, 1.9) / 2.6;
    CHECK(mv.moment(k) == Approx(ref).epsilon(1e-13));
  }
  const double pos = oracle::integrate([](double x) { return x > 0 ? std::pow(x, 5) : 0.0; }, -0.7, 1.9) / 2.6;
  CHECK(mv.positive_part(5) == Approx(pos).epsilon(1e-12));
}

TEST_CASE("uniform with lo >= hi is a domain error") {
  CHECK(kind_of([] { moments_uniform(2, 1, 1); }) == ErrorKind::domain);
  CHECK(kind_of([] { moments_uniform(2, 2, 1); }) == ErrorKind::domain);
}

TEST_CASE("shifting a point mass at the lower end gives zero moments") {
  const MomentVector mv = moments_point(3, -2.0, Support::interval(-2, 5));
  check_moments(shift_to_origin(mv), {0, 0, 0});
  CHECK(shift_to_origin(mv).support() == Support::interval(0, 7));
}

TEST_CASE("shifted symmetric uniform equals uniform on [0,2]") {
  const MomentVector shifted = shift_to_origin(moments_uniform(5, -1, 1));
  const MomentVector direct = moments_uniform(5, 0, 2);
  for (int k = 1; k <= 5; ++k) CHECK(shifted.moment(k) == Approx(direct.moment(k)).epsilon(1e-13));
}

TEST_CASE("shifted plus-minus-one Bernoulli has moments q 2^k") {
  const double q = 0.3;
  // Y in {-1, 1}, P(Y = 1) = q
  std::vector<double> mu;
  for (int k = 1; k <= 4; ++k) mu.push_back(q + (1 - q) * std::pow(-1.0, k));
  const MomentVector y(mu, Support::interval(-1, 1));
  const MomentVector x = shift_to_origin(y);
  for (int k = 1; k <= 4; ++k) CHECK(x.moment(k) == Approx(q * std::pow(2.0, k)).epsilon(1e-13));
}

TEST_CASE("shifting needs the requested order") {
  CHECK(kind_of([] { shift_to_origin(moments_uniform(2, 0, 1), 3); }) == ErrorKind::order);
}

TEST_CASE("shifting sample-based moments recomputes from the data") {
  const std::vector<double> data{2.0, 2.5, 3.0, 3.5};
  const MomentVector mv = moments_from_samples(data, 3, Support::interval(2, 4));
  const MomentVector shifted = shift_to_origin(mv);
  CHECK(shifted.moment(1) == Approx(0.75));
  CHECK(shifted.moment(2) == Approx((0.25 + 1.0 + 2.25) / 4.0));
  CHECK(shifted.moment(3) == Approx((0.125 + 1.0 + 3.375) / 4.0));
}

TEST_CASE("reflecting a symmetric uniform leaves it unchanged") {
  const MomentVector mv = moments_uniform(4, 0, 1);
  const MomentVector r = reflect_moments(mv);
  check_moments(r, {0.5, 1.0 / 3.0, 0.25, 0.2}, 1e-13);
}

TEST_CASE("reflecting a point mass at the top gives zeros") {
  const MomentVector mv = moments_point(3, 1.0, Support::interval(0, 1));
  check_moments(reflect_moments(mv), {0, 0, 0});
}

TEST_CASE("reflected Bernoulli has moments 1 - q") {
  const MomentVector r = reflect_moments(moments_bernoulli(5, 0.3));
  for (int k = 1; k <= 5; ++k) CHECK(r.moment(k) == Approx(0.7).epsilon(1e-14));
}

TEST_CASE("shift then reflect twice returns the shifted vector") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const auto law = oracle::random_law(rng, -2.0, 3.0);
    const MomentVector mv = law.moments(5, Support::interval(-2, 3));
    const MomentVector base = shift_to_origin(mv);
    const MomentVector twice = reflect_moments(reflect_moments(base));
    for (int k = 1; k <= 5; ++k) {
      CHECK(twice.moment(k) == Approx(base.moment(k)).epsilon(1e-10).margin(1e-12));
    }
  }
}

TEST_CASE("moment chains hold for random laws on [0, b]") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 200; ++i) {
    const double b = 0.5 + 3.0 * (i % 7);
    const auto law = oracle::random_law(rng, 0.0, b, 2 + i % 5);
    const MomentVector mv = law.moments(6, Support::interval(0, b));
    for (int d = 1; d + 2 <= 6; ++d) {
      const double lhs = mv.moment(d) * mv.moment(d + 2);
      CHECK(lhs - mv.moment(d + 1) * mv.moment(d + 1) >= -1e-12 * lhs);
    }
    for (int k = 1; k < 6; ++k) CHECK(mv.moment(k + 1) <= b * mv.moment(k) * (1 + 1e-12));
  }
}

TEST_CASE("infeasible moment vectors are rejected and name the chain") {
  try {
    MomentVector({0.5, 0.3, 0.15}, Support::interval(0, 1));  // 0.5 * 0.15 < 0.3^2
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::infeasible);
    CHECK(std::string(e.what()).find("mu[1]*mu[3] >= mu[2]^2") != std::string::npos);
  }
  CHECK(kind_of([] { MomentVector({0.5, 0.6}, Support::interval(0, 1)); }) == ErrorKind::infeasible);
  CHECK(kind_of([] { MomentVector({1.5}, Support::interval(0, 1)); }) == ErrorKind::infeasible);
  CHECK(kind_of([] { MomentVector({0.5, 0.1}, Support::interval(0, 1)); }) == ErrorKind::infeasible);
}

TEST_CASE("moment upper bounds skip the sequence checks") {
  CHECK_NOTHROW(MomentVector({0.0, 0.4, 0.3}, Support::upper_only(1.0), 0.3, MomentKind::upper_bound));
  CHECK(kind_of([] {
          MomentVector({0.0, -0.4}, Support::upper_only(1.0), std::nullopt, MomentKind::upper_bound);
        }) == ErrorKind::infeasible);
}

TEST_CASE("positive part defaults to the top moment on a nonnegative support") {
  const MomentVector mv = moments_uniform(3, 0, 2);
  REQUIRE(mv.positive_part_pth().has_value());
  CHECK(*mv.positive_part_pth() == mv.moment(3));
}

TEST_CASE("odd positive part on a signed support must be supplied") {
  const MomentVector mv({0.0, 1.0 / 3.0, 0.0}, Support::interval(-1, 1));
  CHECK_FALSE(mv.positive_part_pth().has_value());
  CHECK(kind_of([&] { mv.positive_part(3); }) == ErrorKind::order);
  CHECK(mv.positive_part(2) == Approx(1.0 / 3.0));
}

TEST_CASE("moment access beyond the order is an order error") {
  const MomentVector mv = moments_uniform(2, 0, 1);
  CHECK(mv.moment(0) == 1.0);
  CHECK(kind_of([&] { mv.moment(3); }) == ErrorKind::order);
}

TEST_CASE("beta and Bernoulli moments match their laws") {
  const MomentVector beta = moments_beta(4, 2.0, 5.0);
  const Distribution law = Distribution::beta(2.0, 5.0);
  for (int k = 1; k <= 4; ++k) {
    const double ref = oracle::integrate(
        [k](double x) { return std::pow(x, k) * 30.0 * x * std::pow(1 - x, 4); }, 0.0, 1.0);
    CHECK(beta.moment(k) == Approx(ref).epsilon(1e-12));
    CHECK(law.moments(4).moment(k) == Approx(ref).epsilon(1e-12));
  }
  const MomentVector bern = moments_bernoulli(6, 0.25);
  for (int k = 1; k <= 6; ++k) CHECK(bern.moment(k) == 0.25);
}

TEST_CASE("iid ensemble replicates one vector") {
  const auto spec = EnsembleSpec::iid(moments_uniform(2, 0, 1), 40);
  CHECK(spec.size() == 40);
  CHECK(spec.iid());
  CHECK(spec[39] == spec[0]);
  const auto groups = spec.groups();
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].second == 40);
}

TEST_CASE("empty ensemble is rejected") {
  CHECK(kind_of([] { EnsembleSpec(std::vector<MomentVector>{}); }) == ErrorKind::empty_input);
}

TEST_CASE("sample files accept plain values and id,value rows") {
  std::istringstream plain("# comment\n0.25\n\n0.5\n1e-1\n");
  CHECK(read_samples(plain) == std::vector<double>{0.25, 0.5, 0.1});
  std::istringstream csv("id,value\n1,0.2\n2,0.8\n");
  CHECK(read_samples(csv) == std::vector<double>{0.2, 0.8});
  std::istringstream bad("0.1\nabc\n");
  CHECK(kind_of([&] { read_samples(bad); }) == ErrorKind::domain);
}
