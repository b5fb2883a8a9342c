#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <sstream>

#include "tailbound/serialize.hpp"

using namespace tailbound;

TEST_CASE("Hoeffding record field names") {
  const auto h = hoeffding_iid(moments_uniform(2, 0, 1), 40, 0.25, 2);
  const json j = h;
  for (const char* key : {"t", "p", "bound", "c_values", "d_n", "s_star", "mode"}) CHECK(j.contains(key));
  CHECK(j.size() == 7);
  CHECK(j.at("mode") == "iid");
  CHECK(j.get<HoeffdingBound>() == h);
}

TEST_CASE("Hoeffding record without D_n") {
  const auto h = hoeffding_iid(moments_uniform(1, 0, 1), 10, 0.1, 1);
  REQUIRE(!h.d_n);
  const json j = h;
  CHECK(j.at("d_n").is_null());
  CHECK(j.get<HoeffdingBound>() == h);
}

TEST_CASE("Bennett record round trip") {
  const EnsembleSpec spec = EnsembleSpec::iid(moments_uniform(3, 0, 1), 4);
  for (const auto& b : {bennett_bound(spec, 0.5, 3, SolveOptions{true, false}), bennett_p3_lambert(spec, 0.5),
                        bennett_bound(spec, 0.5, 2)}) {
    const json j = b;
    for (const char* key : {"t", "p", "bound", "alpha", "roots", "y_star", "b"}) CHECK(j.contains(key));
    CHECK(j.contains("w_residual") == b.w_residual.has_value());
    const auto back = j.get<BennettBound>();
    CHECK(back == b);
    CHECK(json::parse(j.dump()).get<BennettBound>() == b);
  }
}

TEST_CASE("root set keeps its method and grid") {
  const std::vector<double> alpha{2.0, 1.0, 0.1};
  const RootSet rs = solve_poly_exp(alpha, SolveOptions{true, false});
  const json j = rs;
  CHECK(j.at("method") == "scan");
  CHECK(j.get<RootSet>() == rs);
  json bad = j;
  bad["method"] = "guess";
  CHECK_THROWS_AS(bad.get<RootSet>(), Error);
}

TEST_CASE("tail estimate uses the stderr key") {
  const TailEstimate e{1.5, 0.25, 0.001, 1000000, 0xFFFFFFFFFFFFFFFFull};
  const json j = e;
  CHECK(j.contains("stderr"));
  const auto back = json::parse(j.dump()).get<TailEstimate>();
  CHECK(back.seed == e.seed);
  CHECK(back.trials == e.trials);
  CHECK(back.std_error == e.std_error);
}

TEST_CASE("sample size record round trip") {
  const auto s = sample_size_for_ci(moments_uniform(3, 0, 1), 0.05, 0.05, 3);
  const auto back = json(s).get<SampleSizeResult>();
  CHECK(back.n == s.n);
  CHECK(back.c_bar == s.c_bar);
  CHECK(back.classical_n == s.classical_n);
}

TEST_CASE("doubles print with round-trip precision") {
  CHECK(format_double(std::exp(-5.0)) == "0.006737946999085467");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(1e-300) == "1e-300");
  for (double x : {std::exp(1.0), 1.0 / 3.0, 123456.789e10}) CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("CSV quoting and line endings") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  std::ostringstream os;
  write_csv_row(os, {"t", "bound", "x,y"});
  CHECK(os.str() == "t,bound,\"x,y\"\r\n");
}
