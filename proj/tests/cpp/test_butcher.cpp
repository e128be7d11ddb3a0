#include <doctest.h>

#include <cmath>

#include "gmrk/butcher.hpp"

using namespace gmrk;

namespace {

Rhs decay_rhs() {
  return [](const Vec& x, double) -> Vec { return -0.5 * x; };
}

double loglog_slope(const std::vector<double>& hs, const std::vector<double>& errs) {
  const int n = static_cast<int>(hs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = std::log(hs[i]);
    const double y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("Euler tableau") {
  Tableau t = tableau_euler();
  CHECK(t.s == 1);
  CHECK(t.p == 1);
  CHECK(t.c[0] == 0.0);
  CHECK(t.b[0] == 1.0);
  CHECK(t.W(0, 0) == 0.0);
  CHECK(check_order_conditions(t, 1).pass);
  CHECK_FALSE(check_order_conditions(t, 2).pass);  // sum b_i c_i = 0 != 1/2
}

TEST_CASE("second-order family") {
  Tableau mid = tableau_second_order(0.5);
  CHECK(mid.b[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(mid.b[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mid.c[1] == 0.5);

  Tableau heun = tableau_second_order(1.0);
  CHECK(heun.b[0] == doctest::Approx(0.5));
  CHECK(heun.b[1] == doctest::Approx(0.5));

  CHECK(check_order_conditions(tableau_second_order(0.7), 2).pass);
  CHECK_THROWS_AS(tableau_second_order(0.0), DomainError);
  CHECK_THROWS_AS(tableau_second_order(1.5), DomainError);
}

TEST_CASE("third-order family") {
  Tableau t = tableau_third_order(0.5, 1.0);
  CHECK(t.W(2, 1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(t.W(2, 0) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(t.b[0] == doctest::Approx(1.0 / 6));
  CHECK(t.b[1] == doctest::Approx(2.0 / 3));
  CHECK(t.b[2] == doctest::Approx(1.0 / 6));

  CHECK_THROWS_AS(tableau_third_order(2.0 / 3.0, 1.0), DomainError);
  CHECK_THROWS_AS(tableau_third_order(0.5, 0.5), DomainError);
  CHECK_THROWS_AS(tableau_third_order(0.0, 0.5), DomainError);
}

TEST_CASE("order conditions hold across the parameter grids") {
  for (double a : {0.1, 0.25, 0.3, 0.5, 0.7, 0.9, 1.0}) {
    CAPTURE(a);
    CHECK(check_order_conditions(tableau_second_order(a), 2).pass);
  }
  for (double u : {0.4, 0.5, 0.9}) {
    for (double v : {0.6, 2.0 / 3.0, 1.0}) {
      CAPTURE(u);
      CAPTURE(v);
      CHECK(check_order_conditions(tableau_third_order(u, v), 3).pass);
    }
  }
}

TEST_CASE("rk_step hand-checked values") {
  Vec x0 = Vec::Constant(1, 1.0);
  auto f = decay_rhs();

  auto euler = rk_step(tableau_euler(), f, 0.0, x0, 1.0);
  CHECK(euler.x1[0] == doctest::Approx(0.5).epsilon(1e-15));

  auto mid = rk_step(tableau_second_order(0.5), f, 0.0, x0, 1.0);
  CHECK(mid.stage_derivs[0][0] == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(mid.stage_derivs[1][0] == doctest::Approx(-0.375).epsilon(1e-15));
  CHECK(mid.x1[0] == doctest::Approx(0.625).epsilon(1e-15));
}

TEST_CASE("rk_step small-h continuity and constant-rhs exactness") {
  Vec x0 = Vec::Constant(1, 2.0);
  auto f = decay_rhs();
  const double h = 1e-9;
  auto r = rk_step(tableau_third_order(0.5, 1.0), f, 0.0, x0, h);
  CHECK(std::abs(r.x1[0] - x0[0]) < 1e-8);

  Rhs constant = [](const Vec& x, double) { return Vec::Constant(x.size(), 3.25); };
  for (const Tableau& tab :
       {tableau_euler(), tableau_second_order(0.3), tableau_third_order(0.9, 0.6)}) {
    auto rc = rk_step(tab, constant, 1.0, x0, 0.37);
    CHECK(rc.x1[0] == doctest::Approx(2.0 + 0.37 * 3.25).epsilon(1e-14));
  }
}

TEST_CASE("rk_step rejects non-finite stages and bad h") {
  Rhs bad = [](const Vec& x, double) { return Vec::Constant(x.size(), std::nan("")); };
  Vec x0 = Vec::Constant(1, 1.0);
  CHECK_THROWS_AS(rk_step(tableau_euler(), bad, 0.0, x0, 1.0), EvaluationError);
  CHECK_THROWS_AS(rk_step(tableau_euler(), decay_rhs(), 0.0, x0, 0.0), DomainError);
  try {
    rk_step(
        tableau_second_order(0.5),
        [](const Vec& x, double t) -> Vec {
          return t > 0.0 ? Vec::Constant(x.size(), INFINITY) : Vec::Zero(x.size());
        },
        0.0, x0, 1.0);
    CHECK(false);
  } catch (const EvaluationError& e) {
    CHECK(e.stage() == 1);
  }
}

TEST_CASE("chained steps reach the claimed global order") {
  auto f = decay_rhs();
  Vec x0 = Vec::Constant(1, 1.0);
  const double target = 1.0;
  const std::vector<double> hs = {0.2, 0.1, 0.05, 0.025};
  struct Case {
    Tableau tab;
    int p;
  };
  for (const auto& cs : {Case{tableau_euler(), 1}, Case{tableau_second_order(0.5), 2},
                         Case{tableau_third_order(0.5, 1.0), 3}}) {
    std::vector<double> errs;
    for (double h : hs) {
      const int n = static_cast<int>(std::lround(target / h));
      auto xs = rk_chain(cs.tab, f, 0.0, x0, h, n);
      errs.push_back(std::abs(xs.back()[0] - std::exp(-0.5 * target)));
    }
    const double slope = loglog_slope(hs, errs);
    CAPTURE(cs.p);
    CHECK(std::abs(slope - cs.p) <= 0.15);
  }
}

TEST_CASE("vector-valued steps act elementwise") {
  Rhs f = [](const Vec& x, double) -> Vec {
    Vec out(2);
    out[0] = -0.5 * x[0];
    out[1] = -1.0 * x[1];
    return out;
  };
  Vec x0(2);
  x0 << 1.0, 2.0;
  auto r = rk_step(tableau_second_order(0.5), f, 0.0, x0, 0.5);

  auto scalar = [&](double lambda, double v0) {
    Rhs g = [lambda](const Vec& x, double) -> Vec { return lambda * x; };
    return rk_step(tableau_second_order(0.5), g, 0.0, Vec::Constant(1, v0), 0.5).x1[0];
  };
  CHECK(r.x1[0] == doctest::Approx(scalar(-0.5, 1.0)).epsilon(1e-15));
  CHECK(r.x1[1] == doctest::Approx(scalar(-1.0, 2.0)).epsilon(1e-15));
}

TEST_CASE("IVProblem validation") {
  IVProblem p = IVProblem::scalar([](double x, double) { return x; }, 0.0, 1.0, -1.0);
  CHECK_THROWS_AS(p.validate(), DomainError);

  IVProblem q = IVProblem::scalar([](double x, double) { return x; }, 0.0, 1.0, 1.0,
                                  [](double t) { return std::exp(t) + 1e-3; });
  CHECK_THROWS_AS(q.validate(), DomainError);
}
