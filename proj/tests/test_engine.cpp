#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "pdegm/engine.hpp"
#include "pdegm/problems.hpp"
#include "testing_util.hpp"

using namespace pdegm;

namespace {

ProblemSpec noiseless_l1(int n, double alpha, double gamma) {
  const Mesh1D mesh = build_mesh(n);
  auto [u_truth, y_truth] = make_truth(mesh);
  (void)u_truth;
  return make_l1_problem(mesh, alpha, gamma, std::move(y_truth));
}

}  // namespace

TEST_CASE("schedule_update: mu = 0 leaves steps unchanged in every mode") {
  for (AccelMode mode : {AccelMode::none, AccelMode::accel_g, AccelMode::accel_fstar}) {
    auto s = make_schedule(0.99, 1.0, 0.0, mode);
    const auto next = schedule_update(s);
    CHECK(next.omega == 1.0);
    CHECK(next.tau == s.tau);
    CHECK(next.sigma == s.sigma);
  }
}

TEST_CASE("schedule_update: accel_g formula") {
  auto s = make_schedule(1.0, 1.0, 0.5, AccelMode::accel_g);
  const auto next = schedule_update(s);
  CHECK(next.omega == doctest::Approx(0.7071067811865475).epsilon(1e-15));
  CHECK(next.tau == doctest::Approx(0.7071067811865475).epsilon(1e-15));
  CHECK(next.sigma == doctest::Approx(1.4142135623730951).epsilon(1e-15));
}

TEST_CASE("schedule invariants hold over 10000 accelerated updates") {
  for (AccelMode mode : {AccelMode::accel_g, AccelMode::accel_fstar}) {
    auto s = make_schedule(0.99, 1.0, 1.0 - 1e-16, mode);
    const double product = s.step_product;
    for (int i = 0; i < 10000; ++i) {
      const auto prev = s;
      s = schedule_update(s);
      check_schedule_transition(prev, s);  // throws on violation
      CHECK(std::abs(s.tau * s.sigma - product) <= 1e-12 * product);
      CHECK(s.omega > 0.0);
      CHECK(s.omega <= 1.0);
      if (mode == AccelMode::accel_g) {
        CHECK(s.tau <= prev.tau);
        CHECK(s.sigma >= prev.sigma);
        CHECK(prev.mu + 1.0 / prev.tau - 1.0 / s.tau >= 0.0);
      } else {
        CHECK(s.sigma <= prev.sigma);
        CHECK(s.tau >= prev.tau);
        CHECK(prev.mu + 1.0 / prev.sigma - 1.0 / s.sigma >= 0.0);
      }
    }
  }
}

TEST_CASE("schedule freezes once the acceleration budget is spent") {
  auto s = make_schedule(0.99, 1.0, 0.9, AccelMode::accel_g, 5);
  for (int i = 0; i < 5; ++i) s = schedule_update(s);
  const double tau5 = s.tau, sigma5 = s.sigma;
  CHECK(tau5 < 0.99);
  for (int i = 0; i < 20; ++i) {
    s = schedule_update(s);
    CHECK(s.omega == 1.0);
    CHECK(s.tau == tau5);
    CHECK(s.sigma == sigma5);
  }
}

TEST_CASE("first primal update is independent of mu") {
  const auto prob = noiseless_l1(20, 1e-2, 1e-2);
  const ElementField u0 = ElementField::constant(20, 1.0);
  NodalField p0(21);
  for (std::size_t j = 0; j < p0.size(); ++j) p0[j] = 0.1 * std::sin(1.0 + 3.0 * j);

  auto run_one = [&](double mu) {
    auto st = make_initial_state(prob, u0, p0);
    auto sched = make_schedule(0.99, 1.0, mu, AccelMode::accel_g);
    pdegm_step(st, sched, prob);
    return st.u;
  };
  const auto u_plain = run_one(0.0);
  const auto u_accel = run_one(1.0 - 1e-16);
  for (std::size_t e = 0; e < u_plain.size(); ++e) CHECK(u_plain[e] == u_accel[e]);
}

TEST_CASE("one step on n=2 matches a dense hand computation") {
  const Mesh1D mesh = build_mesh(2);
  const double alpha = 1.0, gamma = 2.0;  // large gamma: dual clamp stays inactive
  NodalField y_delta(3);
  y_delta[0] = 0.9;
  y_delta[1] = 1.1;
  y_delta[2] = 0.8;
  const auto prob = make_l1_problem(mesh, alpha, gamma, y_delta);

  ElementField u0(2);
  u0[0] = 1.3;
  u0[1] = 0.7;
  NodalField p0(3);
  p0[0] = 0.2;
  p0[1] = -0.1;
  p0[2] = 0.4;
  const double tau = 0.3, sigma = 0.5;

  // Hand computation with dense solves.
  const auto solve_dense = [&](const ElementField& u, const NodalField& rhs) {
    return testutil::dense_solve(testutil::to_dense(assemble_operator(mesh, u)), rhs.values);
  };
  const NodalField load = load_vector(mesh, 1.0);
  const auto y0 = solve_dense(u0, load);
  NodalField minus_wp(3);
  for (int j = 0; j < 3; ++j) minus_wp[j] = -mesh.lumped_weights[j] * p0[j];
  const auto z = solve_dense(u0, minus_wp);
  double q[2];
  for (int e = 0; e < 2; ++e) {
    q[e] = (2.0 * y0[e] * z[e] + y0[e] * z[e + 1] + y0[e + 1] * z[e] + 2.0 * y0[e + 1] * z[e + 1]) / 6.0;
  }
  ElementField u1(2);
  for (int e = 0; e < 2; ++e) u1[e] = (u0[e] - tau * q[e]) / (1.0 + tau);
  ElementField u_bar(2);
  for (int e = 0; e < 2; ++e) u_bar[e] = 2.0 * u1[e] - u0[e];  // omega = 1
  const auto y_bar = solve_dense(u_bar, load);
  NodalField p1(3);
  for (int j = 0; j < 3; ++j) {
    const double r = p0[j] + sigma * (y_bar[j] - y_delta[j]);
    p1[j] = std::clamp(r / (1.0 + sigma * gamma), -1.0 / alpha, 1.0 / alpha);
    CHECK(std::abs(r / (1.0 + sigma * gamma)) < 1.0 / alpha);  // clamp inactive as intended
  }

  auto st = make_initial_state(prob, u0, p0);
  auto sched = make_schedule(tau, sigma, 0.0, AccelMode::none);
  pdegm_step(st, sched, prob);
  for (int e = 0; e < 2; ++e) CHECK(st.u[e] == doctest::Approx(u1[e]).epsilon(1e-12));
  for (int j = 0; j < 3; ++j) CHECK(st.p[j] == doctest::Approx(p1[j]).epsilon(1e-12));
}

TEST_CASE("a converged saddle point is a fixed point of the step") {
  const auto prob = noiseless_l1(16, 1e-2, 1e-2);
  auto sched = make_schedule(0.99, 1.0, 0.0, AccelMode::none);
  auto result = run(prob, sched, ElementField::constant(16, 1.0), NodalField(17), 20000);
  REQUIRE(result.records.back().primal_change <= 1e-13);

  auto st = make_initial_state(prob, result.u, result.p);
  const ElementField u_star = st.u;
  const NodalField p_star = st.p;
  pdegm_step(st, sched, prob);
  for (std::size_t e = 0; e < u_star.size(); ++e) CHECK(std::abs(st.u[e] - u_star[e]) <= 1e-10);
  for (std::size_t j = 0; j < p_star.size(); ++j) CHECK(std::abs(st.p[j] - p_star[j]) <= 1e-10);
}

TEST_CASE("accel_fstar mode runs with the roles of tau and sigma swapped") {
  // F*_gamma is gamma-strongly convex; mu must stay below it.  The primal
  // step grows under this rule, so start it small.
  const auto prob = noiseless_l1(24, 1e-2, 0.1);
  auto sched = make_schedule(0.2, 0.2, 0.05, AccelMode::accel_fstar);
  const auto result = run(prob, sched, ElementField::constant(24, 1.0), NodalField(25), 100);
  REQUIRE(result.records.size() == 100);
  for (std::size_t k = 1; k < result.records.size(); ++k) {
    CHECK(result.records[k].sigma <= result.records[k - 1].sigma);
    CHECK(result.records[k].tau >= result.records[k - 1].tau);
  }
  CHECK(std::isfinite(result.records.back().j_gamma));
}

TEST_CASE("acceleration budget freezes the in-run schedule") {
  const auto prob = noiseless_l1(24, 1e-2, 1e-3);
  auto sched = make_schedule(0.99, 1.0, 1.0 - 1e-16, AccelMode::accel_g, 50);
  const auto result = run(prob, sched, ElementField::constant(24, 1.0), NodalField(25), 120);
  for (std::size_t k = 0; k < 50; ++k) CHECK(result.records[k].omega < 1.0);
  for (std::size_t k = 50; k < 120; ++k) {
    CHECK(result.records[k].omega == 1.0);
    CHECK(result.records[k].tau == result.records[49].tau);
    CHECK(result.records[k].sigma == result.records[49].sigma);
  }
}

TEST_CASE("run with N=1 equals a single step") {
  const auto prob = noiseless_l1(12, 1e-2, 1e-3);
  const ElementField u0 = ElementField::constant(12, 1.0);
  const NodalField p0(13);
  auto sched = make_schedule(0.99, 1.0, 0.5, AccelMode::accel_g);
  const auto result = run(prob, sched, u0, p0, 1);
  auto st = make_initial_state(prob, u0, p0);
  auto sched2 = sched;
  const auto rec = pdegm_step(st, sched2, prob);
  REQUIRE(result.records.size() == 1);
  CHECK(result.records[0].j_gamma == rec.j_gamma);
  CHECK(result.records[0].primal_change == rec.primal_change);
  for (std::size_t e = 0; e < st.u.size(); ++e) CHECK(result.u[e] == st.u[e]);
  for (std::size_t j = 0; j < st.p.size(); ++j) CHECK(result.p[j] == st.p[j]);
}

TEST_CASE("l1 run decreases the objective and settles") {
  const Mesh1D mesh = build_mesh(100);
  auto [u_truth, y_truth] = make_truth(mesh);
  (void)u_truth;
  const auto y_delta = add_impulsive_noise(mesh, y_truth, 0.3, 0.1, 2024);
  const auto prob = make_l1_problem(mesh, 1e-2, 1e-12, y_delta);
  const auto init = lipschitz_estimate(prob, ElementField::constant(100, 1.0));
  auto sched = make_schedule(init.tau0, init.sigma0, 1.0 - 1e-16, AccelMode::accel_g);
  const auto result = run(prob, sched, ElementField::constant(100, 1.0), NodalField(101), 1000);
  CHECK(result.records.back().j_gamma <= result.j_initial);
  CHECK(result.records.back().primal_change <= 1e-2 * result.records.front().primal_change);
  // records are densely indexed 1..N
  for (std::size_t k = 0; k < result.records.size(); ++k) {
    CHECK(result.records[k].iter == static_cast<long>(k) + 1);
  }
}

TEST_CASE("acceleration with mu -> 0 recovers the unaccelerated trajectory") {
  const auto prob = noiseless_l1(24, 1e-2, 1e-3);
  const ElementField u0 = ElementField::constant(24, 1.0);
  const NodalField p0(25);
  auto plain = run(prob, make_schedule(0.99, 1.0, 0.0, AccelMode::none), u0, p0, 100);
  auto tiny = run(prob, make_schedule(0.99, 1.0, 1e-14, AccelMode::accel_g), u0, p0, 100);
  for (std::size_t e = 0; e < plain.u.size(); ++e) {
    CHECK(std::abs(plain.u[e] - tiny.u[e]) <= 1e-8);
  }
}

namespace {

// Mock problem whose primal prox expands instead of contracting; the
// objective grows geometrically, which must trip the divergence guard.
struct ExplodingProblem {
  Mesh1D mesh = build_mesh(4);
  NodalField forward(const ElementField&) const { return NodalField(5, 0.0); }
  NodalField k_value(NodalField y) const { return y; }
  ElementField adjoint_gradient(const ElementField&, const NodalField&, const NodalField&) const {
    return ElementField(4, 0.0);
  }
  ElementField prox_primal(ElementField u, double) const {
    for (auto& v : u) v *= 3.0;
    return u;
  }
  NodalField prox_dual(NodalField r, double) const { return r; }
  double objective(const ElementField& u, const NodalField&) const {
    return 1.0 + inner_element(mesh, u, u);
  }
  double feasibility(const NodalField&) const { return 0.0; }
};

}  // namespace

TEST_CASE("divergence guard aborts with the iteration index") {
  const ExplodingProblem prob;
  auto sched = make_schedule(0.5, 0.5, 0.0, AccelMode::none);
  CHECK_THROWS_WITH_AS(run(prob, sched, ElementField::constant(4, 1.0), NodalField(5), 100),
                       doctest::Contains("diverged"), std::runtime_error);
}

TEST_CASE("non-finite data aborts before iterating") {
  auto prob = noiseless_l1(8, 1e-2, 1e-3);
  prob.data[3] = std::numeric_limits<double>::quiet_NaN();
  auto sched = make_schedule(0.99, 1.0, 0.0, AccelMode::none);
  CHECK_THROWS_AS(run(prob, sched, ElementField::constant(8, 1.0), NodalField(9), 5),
                  std::runtime_error);
}

TEST_CASE("solver failure surfaces the iteration index") {
  // A huge primal step sends u to ~0, where the pure-Neumann operator becomes
  // singular only at exactly zero; drive u negative instead via the dual.
  const Mesh1D mesh = build_mesh(8);
  NodalField y_delta(9, 0.0);
  const auto prob = make_l1_problem(mesh, 1e-6, 0.0, y_delta);  // strong pull away from u0
  auto sched = make_schedule(50.0, 50.0, 0.0, AccelMode::none);
  try {
    run(prob, sched, ElementField::constant(8, 1.0), NodalField(9), 50);
    // Either the solver trips or the divergence guard does; both must carry
    // the iteration index.
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("iteration") != std::string::npos);
  }
}
