#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "paramflux/error.hpp"
#include "paramflux/expr.hpp"
#include "paramflux/model.hpp"
#include "paramflux/registry.hpp"
#include "paramflux/schedule.hpp"

using namespace paramflux;
using Catch::Approx;

namespace {
const std::vector<std::string> kXY{"x", "y"};
const std::vector<std::string> kAD{"a", "d"};
}  // namespace

TEST_CASE("parse builds the expected tree", "[expr]") {
  const Expr e = parse_expr("a*x - d*y", kXY, kAD);
  CHECK(to_sexpr(e) == "(- (* a x) (* d y))");
}

TEST_CASE("power binds tighter than division and is right associative", "[expr]") {
  const std::vector<std::string> states{"x", "y"};
  const std::vector<std::string> params{"a1", "ky", "ny", "d1"};
  const Expr e = parse_expr("a1/(1+(y/ky)^ny) - d1*x", states, params);
  CHECK(to_sexpr(e) == "(- (/ a1 (+ 1 (^ (/ y ky) ny))) (* d1 x))");
  CHECK(to_sexpr(parse_expr("x^y^2", kXY, {})) == "(^ x (^ y 2))");
  CHECK(to_sexpr(parse_expr("-x^2", kXY, {})) == "(neg (^ x 2))");
}

TEST_CASE("unknown identifiers and syntax errors are reported", "[expr]") {
  const std::vector<std::string> states{"x"};
  const std::vector<std::string> params{"a"};
  try {
    parse_expr("a*z", states, params);
    FAIL("expected an error");
  } catch (const UnknownIdentifierError& e) {
    CHECK(e.name() == "z");
  }
  try {
    parse_expr("a*(x+", states, params);
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 5);
  }
  CHECK_THROWS_AS(parse_expr("", states, params), ParseError);
}

TEST_CASE("parse, print, parse is stable", "[expr][property]") {
  const std::vector<std::string> states{"x", "y"};
  const std::vector<std::string> params{"a", "b", "k"};
  const char* cases[] = {"a*x - b*y",          "a/(1 + (y/k)^b) - 0.3*x",
                         "-(x - y)^2 / -k",     "sin(a*t + b) * exp(-x) + log(abs(y) + 1)",
                         "pow(x, 2) - x^-1",    "(a - b) - (x - y)",
                         "a / (b / k) * x",     "2^3^2",
                         "-x - -y",             "1.5e-3*x + 1e10"};
  for (const char* text : cases) {
    const Expr first = parse_expr(text, states, params);
    const Expr second = parse_expr(to_string(first), states, params);
    INFO(text << " -> " << to_string(first));
    CHECK(to_sexpr(first) == to_sexpr(second));
    CHECK(to_string(first) == to_string(second));
  }
}

TEST_CASE("gene model rhs at the origin", "[model]") {
  const auto sys = builtin_model("gene");
  const auto f = eval_rhs(sys.model, std::vector<double>{0.0, 0.0},
                          std::vector<double>{4.0, 1.0, 4.0, 1.0}, 0.0);
  CHECK(f[0] == 4.0);
  CHECK(f[1] == 0.0);
}

TEST_CASE("zero parameters give a zero derivative on parameter-scaled systems", "[model]") {
  const auto model = ModelSpec::ode("lin", {"x", "y"}, {"a", "b"}, {"a*x*y", "b*sin(x)"});
  const auto f = eval_rhs(model, std::vector<double>{1.3, -2.0}, std::vector<double>{0.0, 0.0}, 0.5);
  CHECK(f[0] == 0.0);
  CHECK(f[1] == 0.0);
}

TEST_CASE("pvts rhs hand evaluation", "[model]") {
  const auto sys = builtin_model("pvts");
  const auto f = eval_rhs(sys.model, std::vector<double>{1.0, 1.0},
                          std::vector<double>{1.0, 0.3, 1.0, 3.35}, 0.0);
  CHECK(f[0] == Approx(0.2).margin(1e-15));
  CHECK(f[1] == Approx(0.2).margin(1e-15));
}

TEST_CASE("domain errors carry the state index", "[model]") {
  const auto model = ModelSpec::ode("m", {"x", "y"}, {"a"}, {"a", "log(y)"});
  try {
    eval_rhs(model, std::vector<double>{1.0, -1.0}, std::vector<double>{1.0}, 0.0);
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    REQUIRE(e.has_state_index());
    CHECK(e.state_index() == 1);
  }
}

TEST_CASE("model validation", "[model]") {
  CHECK_THROWS_AS(ModelSpec::ode("m", {"x"}, {"a"}, {"a", "a"}), InvalidArgument);
  CHECK_THROWS_AS(ModelSpec::ode("m", {"x", "x"}, {"a"}, {"a", "a"}), InvalidArgument);
  CHECK_THROWS_AS(ModelSpec::ode("m", {"x"}, {"a"}, {"a"}, {"b"}), UnknownIdentifierError);
  const auto m = ModelSpec::ode("m", {"x"}, {"a", "b"}, {"a*x + b"}, {"b"});
  CHECK(m.static_mask() == std::vector<bool>{false, true});
  CHECK(m.with_static({}).static_mask() == std::vector<bool>{false, false});
}

TEST_CASE("builtin registry contents", "[model]") {
  const auto pvts = builtin_model("pvts");
  CHECK(pvts.truth.breakpoints() == std::vector<double>{12.0});
  CHECK(pvts.truth.eval(6.0) == std::vector<double>{1.0, 0.3, 1.0, 3.35});
  CHECK(pvts.truth.eval(18.0) == std::vector<double>{8.0, 0.6, 1.0, 3.35});
  CHECK(pvts.tgrid.size() == 1000);
  CHECK(pvts.tgrid.front() == 0.0);
  CHECK(pvts.tgrid.back() == 24.0);

  const auto nu = builtin_model("gene_nonuniform");
  CHECK(nu.truth.breakpoints() == std::vector<double>{5.0, 10.0, 15.0, 20.0});
  const double probes[] = {2.5, 7.5, 12.5, 17.5, 22.5};
  const double alpha_m[] = {4, 5, 5, 6, 6};
  const double alpha_p[] = {4, 5, 6, 7, 8};
  for (int k = 0; k < 5; ++k) {
    const auto p = nu.truth.eval(probes[k]);
    CHECK(p[0] == alpha_m[k]);
    CHECK(p[1] == 1.0);
    CHECK(p[2] == alpha_p[k]);
    CHECK(p[3] == 1.0);
  }
  CHECK(nu.tgrid.back() == 25.0);

  const auto heat = builtin_model("heat_mol");
  CHECK(heat.truth.breakpoints() == std::vector<double>{0.25, 0.5, 0.75});
  const double p1[] = {0.1, 2.1, 4.1, 6.1};
  const double p2[] = {0.5, 0.4, 0.3, 0.2};
  const double heat_probes[] = {0.1, 0.3, 0.6, 0.9};
  for (int k = 0; k < 4; ++k) {
    CHECK(heat.truth.eval(heat_probes[k]) == std::vector<double>{p1[k], p2[k]});
  }
  CHECK(heat.model.state_count() == 100);
  CHECK(heat.tgrid.size() == 100);
  CHECK(heat.model.grid()->x_hi == Approx(M_PI));

  const auto adv = builtin_model("advdiff_mol");
  CHECK(adv.model.grid()->x_lo == Approx(-M_PI / 4));
  CHECK(adv.truth.eval(1.0 / 3.0)[0] == Approx(0.0).margin(1e-12));
  CHECK(adv.truth.eval(0.5)[1] == 0.01);

  try {
    builtin_model("nope");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == "unknown_model");
    CHECK(std::string(e.what()).find("gene_nonuniform") != std::string::npos);
  }
}

TEST_CASE("schedule breakpoint convention", "[schedule]") {
  const auto s = builtin_model("pvts").truth;
  CHECK(s.eval(12.0)[0] == 1.0);
  CHECK(s.eval(12.0)[1] == 0.3);
  CHECK(s.eval(12.001)[0] == 8.0);
  CHECK(s.eval(12.001)[1] == 0.6);
  CHECK(s.eval(0.0)[0] == 1.0);
  CHECK(s.eval(24.0)[0] == 8.0);
  CHECK_THROWS_AS(s.eval(24.5), InvalidArgument);
  CHECK_THROWS_AS(s.eval(-0.1), InvalidArgument);

  const auto c = ParamSchedule::constant(0.0, 5.0, {1.5, -2.0});
  for (double t : {0.0, 1.0, 2.5, 5.0}) CHECK(c.eval(t) == std::vector<double>{1.5, -2.0});
}

TEST_CASE("schedule is continuous from the left and jumps right after each breakpoint",
          "[schedule][property]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> bps;
    double t = 0.0;
    const int n = 1 + static_cast<int>(u(rng) * 5);
    for (int k = 0; k < n; ++k) bps.push_back(t += 0.1 + u(rng));
    std::vector<std::vector<double>> values;
    for (int k = 0; k <= n; ++k) {
      if (k > 0 && u(rng) < 0.3) {
        values.push_back(values.back());  // no jump here
      } else {
        values.push_back({u(rng), std::floor(u(rng) * 3)});
      }
    }
    const auto s = ParamSchedule::piecewise(0.0, t + 1.0, bps, values);
    for (int k = 0; k < n; ++k) {
      const double tk = bps[static_cast<std::size_t>(k)];
      const double eps = 1e-9;
      CHECK(s.eval(tk) == values[static_cast<std::size_t>(k)]);
      CHECK(s.eval(tk - eps) == values[static_cast<std::size_t>(k)]);
      CHECK(s.eval(tk + eps) == values[static_cast<std::size_t>(k) + 1]);
      CHECK(s.eval(std::nextafter(tk, 1e9)) == values[static_cast<std::size_t>(k) + 1]);
      // jumps exactly where adjacent segments differ
      const bool differs = values[static_cast<std::size_t>(k)] != values[static_cast<std::size_t>(k) + 1];
      CHECK((s.eval(tk) != s.eval(tk + eps)) == differs);
    }
  }
}

TEST_CASE("schedule validation", "[schedule]") {
  CHECK_THROWS_AS(ParamSchedule::piecewise(0, 1, {0.5, 0.5}, {{1}, {2}, {3}}), InvalidArgument);
  CHECK_THROWS_AS(ParamSchedule::piecewise(0, 1, {1.0}, {{1}, {2}}), InvalidArgument);
  CHECK_THROWS_AS(ParamSchedule::piecewise(0, 1, {0.5}, {{1}, {2, 3}}), InvalidArgument);
  CHECK_THROWS_AS(ParamSchedule::piecewise(0, 1, {0.5}, {{1}}), InvalidArgument);
}

TEST_CASE("rhs is finite along every builtin ground-truth trajectory", "[model][property]") {
  for (const auto& name : builtin_names()) {
    const auto sys = builtin_model(name);
    const auto data = generate_data(sys);
    std::vector<double> x(data.states());
    for (std::size_t j = 0; j < data.samples(); ++j) {
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = data.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const auto f = eval_rhs(sys.model, x, sys.truth.eval(data.t[j]), data.t[j]);
      bool finite = true;
      for (double v : f) finite = finite && std::isfinite(v);
      INFO(name << " at t=" << data.t[j]);
      REQUIRE(finite);
    }
  }
}
