#include <catch2/catch_amalgamated.hpp>

#include "nsopt/prox.hpp"
#include "nsopt/rng.hpp"
#include "oracles.hpp"

using namespace nsopt;
using Catch::Approx;

TEST_CASE("soft threshold basics") {
  CHECK(soft_threshold(3.0, 1.0) == Approx(2.0));
  CHECK(soft_threshold(-0.5, 1.0) == 0.0);
  CHECK(soft_threshold(0.7, 0.2) == Approx(0.5));
  CHECK(soft_threshold(-3.0, 1.0) == Approx(-2.0));

  Vector v(3);
  v << 3.0, -0.5, 0.7;
  const Vector out = soft_threshold(v, 0.2);
  CHECK(out[0] == Approx(2.8));
  CHECK(out[1] == Approx(-0.3));
  CHECK(out[2] == Approx(0.5));

  CHECK_THROWS_AS(soft_threshold(1.0, 0.0), InvalidParameter);
  CHECK_THROWS_AS(soft_threshold(v, -1.0), InvalidParameter);
}

TEST_CASE("soft threshold minimizes its objective") {
  Rng rng(11);
  for (int t = 0; t < 200; ++t) {
    const double v = oracle::uniform(rng, -3, 3);
    const double tau = oracle::uniform(rng, 0.05, 2.0);
    const double x = soft_threshold(v, tau);
    const auto gm = oracle::grid_prox_min(v, 1.0, ScalarPenaltyParams::l1(tau));
    CHECK(std::abs(x - gm.x) < 1e-5);
  }
}

TEST_CASE("l1 prox reproduces soft threshold on a grid") {
  const auto p = ScalarPenaltyParams::l1(0.7);
  for (double w : {0.5, 1.0, 2.5}) {
    for (double v = -3.0; v <= 3.0; v += 0.01) {
      CHECK(prox_scalar_penalty(v, w, p) == Approx(soft_threshold(v, 0.7 / w)).margin(1e-12));
    }
  }
}

TEST_CASE("scad and mcp reference points") {
  const auto scad = ScalarPenaltyParams::scad(1.0, 3.7);
  const auto g1 = oracle::grid_prox_min(0.5, 1.0, scad);
  const double x1 = prox_scalar_penalty(0.5, 1.0, scad);
  CHECK(std::abs(x1 - g1.x) < 1e-5);
  CHECK(penalty_value(scad, x1) + 0.5 * (x1 - 0.5) * (x1 - 0.5) <= g1.val + 1e-9);

  // beyond the flat region the mcp prox is the identity
  const auto mcp = ScalarPenaltyParams::mcp(1.0, 2.0);
  const double x2 = prox_scalar_penalty(5.0, 1.0, mcp);
  CHECK(x2 == Approx(5.0));
  const auto g2 = oracle::grid_prox_min(5.0, 1.0, mcp);
  CHECK(std::abs(x2 - g2.x) < 1e-5);
}

TEST_CASE("scalar prox matches the grid oracle across variants") {
  Rng rng(42);
  std::vector<ScalarPenaltyParams> variants;
  for (int t = 0; t < 60; ++t) {
    const double a = oracle::uniform(rng, 0.2, 2.0);
    variants.push_back(ScalarPenaltyParams::l1(a));
    variants.push_back(ScalarPenaltyParams::scad(a, oracle::uniform(rng, 2.2, 5.0)));
    variants.push_back(ScalarPenaltyParams::mcp(a, oracle::uniform(rng, 0.4, 4.0)));
    variants.push_back(ScalarPenaltyParams::capped_l1(a, oracle::uniform(rng, 0.3, 3.0)));
    variants.push_back(ScalarPenaltyParams::lsp(a, oracle::uniform(rng, 0.2, 3.0)));
  }
  for (const auto& p : variants) {
    const double v = oracle::uniform(rng, -3, 3);
    const double w = oracle::uniform(rng, 0.3, 3.0);
    const double x = prox_scalar_penalty(v, w, p);
    const auto gm = oracle::grid_prox_min(v, w, p);
    const double fx = penalty_value(p, x) + 0.5 * w * (x - v) * (x - v);
    INFO("variant " << static_cast<int>(p.variant) << " alpha " << p.alpha << " theta " << p.theta
                    << " v " << v << " w " << w);
    CHECK(fx <= gm.val + 1e-9);
    CHECK(std::abs(x - gm.x) < 1e-5);
  }
}

TEST_CASE("box prox matches a restricted grid oracle") {
  Rng rng(43);
  for (int t = 0; t < 300; ++t) {
    ScalarPenaltyParams p;
    switch (t % 5) {
      case 0: p = ScalarPenaltyParams::l1(0.8); break;
      case 1: p = ScalarPenaltyParams::scad(0.8, 3.7); break;
      case 2: p = ScalarPenaltyParams::mcp(0.8, 1.5); break;
      case 3: p = ScalarPenaltyParams::capped_l1(0.8, 1.0); break;
      default: p = ScalarPenaltyParams::lsp(0.8, 0.5); break;
    }
    const double v = oracle::uniform(rng, -3, 3);
    const double w = oracle::uniform(rng, 0.3, 3.0);
    double lo = oracle::uniform(rng, -2, 1), hi = lo + oracle::uniform(rng, 0.1, 3.0);
    const double x = prox_scalar_penalty_box(v, w, p, lo, hi);
    REQUIRE(x >= lo);
    REQUIRE(x <= hi);
    const auto gm = oracle::grid_prox_min(v, w, p, lo, hi);
    const double fx = penalty_value(p, x) + 0.5 * w * (x - v) * (x - v);
    CHECK(fx <= gm.val + 1e-9);
  }
}

TEST_CASE("subgradient selection is consistent with the distance query") {
  Rng rng(7);
  const std::vector<ScalarPenaltyParams> ps = {
      ScalarPenaltyParams::l1(1.3), ScalarPenaltyParams::scad(1.0, 3.7),
      ScalarPenaltyParams::mcp(0.7, 2.0), ScalarPenaltyParams::capped_l1(1.0, 0.8),
      ScalarPenaltyParams::lsp(1.0, 0.5)};
  for (const auto& p : ps) {
    for (int t = 0; t < 100; ++t) {
      const double x = (t % 10 == 0) ? 0.0 : oracle::uniform(rng, -3, 3);
      CHECK(dist_to_scalar_subdiff(p, x, scalar_subgrad_select(p, x)) == Approx(0.0).margin(1e-14));
    }
  }
}

TEST_CASE("first-order optimality holds at the prox output") {
  // 0 must belong to the subdifferential of phi + (w/2)(. - v)^2 at the
  // minimizer, i.e. w (v - x*) is a subgradient of phi at x*
  Rng rng(8);
  const std::vector<ScalarPenaltyParams> ps = {
      ScalarPenaltyParams::l1(1.0), ScalarPenaltyParams::scad(1.0, 3.0),
      ScalarPenaltyParams::mcp(1.0, 2.5), ScalarPenaltyParams::capped_l1(0.9, 1.2),
      ScalarPenaltyParams::lsp(0.8, 0.6)};
  for (const auto& p : ps) {
    for (int t = 0; t < 200; ++t) {
      const double v = oracle::uniform(rng, -4, 4);
      const double w = oracle::uniform(rng, 0.4, 3.0);
      const double x = prox_scalar_penalty(v, w, p);
      CHECK(dist_to_scalar_subdiff(p, x, w * (v - x)) == Approx(0.0).margin(1e-7));
    }
  }
}

TEST_CASE("penalty parameter validation") {
  CHECK_THROWS_AS(prox_scalar_penalty(1.0, 1.0, ScalarPenaltyParams::scad(1.0, 2.0)),
                  InvalidParameter);
  CHECK_THROWS_AS(prox_scalar_penalty(1.0, 1.0, ScalarPenaltyParams::mcp(1.0, 0.0)),
                  InvalidParameter);
  CHECK_THROWS_AS(prox_scalar_penalty(1.0, 1.0, ScalarPenaltyParams::l1(-1.0)), InvalidParameter);
  CHECK_THROWS_AS(prox_scalar_penalty(1.0, 0.0, ScalarPenaltyParams::l1(1.0)), InvalidParameter);
  CHECK_THROWS_AS(prox_scalar_penalty_box(1.0, 1.0, ScalarPenaltyParams::l1(1.0), 2.0, 1.0),
                  InvalidParameter);
}

TEST_CASE("ball projection") {
  Vector v(2);
  v << 3.0, 4.0;
  CHECK(project_ball(v, 5.0).isApprox(v));
  const Vector p = project_ball(v, 1.0);
  CHECK(p[0] == Approx(0.6));
  CHECK(p[1] == Approx(0.8));

  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const Vector x = normal_vector(rng, 4) * 3.0;
    const Vector q = project_ball(x, 1.5);
    CHECK(q.norm() <= 1.5 + 1e-12);
    CHECK(project_ball(q, 1.5).isApprox(q, 1e-14));
  }
  CHECK_THROWS_AS(project_ball(v, 0.0), InvalidParameter);
}

TEST_CASE("box projection") {
  Vector v(1), lo(1), hi(1);
  v << 2.0;
  lo << 0.0;
  hi << 1.0;
  CHECK(project_box(v, lo, hi)[0] == Approx(1.0));
  v << 0.5;
  CHECK(project_box(v, lo, hi)[0] == Approx(0.5));

  Rng rng(6);
  Vector blo = Vector::Constant(3, -1.0), bhi = Vector::Constant(3, 2.0);
  const Vector x = 5.0 * normal_vector(rng, 3);
  const Vector p = project_box(x, blo, bhi);
  for (Eigen::Index j = 0; j < 3; ++j) {
    CHECK(p[j] >= blo[j]);
    CHECK(p[j] <= bhi[j]);
  }
  // projection is the nearest feasible point, so no feasible y is closer to x
  for (int t = 0; t < 1000; ++t) {
    Vector y(3);
    for (Eigen::Index j = 0; j < 3; ++j) y[j] = oracle::uniform(rng, blo[j], bhi[j]);
    CHECK((p - x).norm() <= (y - x).norm() + 1e-12);
  }

  Vector bad_lo(1), bad_hi(1);
  bad_lo << 2.0;
  bad_hi << 1.0;
  Vector w(1);
  w << 0.0;
  CHECK_THROWS_AS(project_box(w, bad_lo, bad_hi), InvalidParameter);
}
