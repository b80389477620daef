#include <cmath>

#include "doctest.h"
#include "freqlab/errors.hpp"
#include "freqlab/grid.hpp"
#include "freqlab/stats.hpp"
#include "helpers.hpp"

using namespace freqlab;

namespace {

// Single governed machine plus a compensator on the 100 MVA base.
GridState small_grid(double d_za_hz, double d_l, double b = 1.0) {
  GridState s;
  TurbineGovernor tg;
  tg.d_za_hz = d_za_hz;
  s.generators.push_back(Generator{5.0, 100.0, tg, 0.0});
  s.generators.push_back(Generator{3.0, 50.0, std::nullopt, 0.0});
  s.coi.h_total = s.rating_weighted_h();
  s.coi.d_l = d_l;
  s.load.ou = OuParams{0.0, 0.5, b, 0.0};
  s.stream = NoiseStream{1, 0};
  return s;
}

}  // namespace

TEST_CASE("apply_deadband") {
  CHECK(apply_deadband(0.0004, 0.0006) == 0.0);
  CHECK(apply_deadband(0.0010, 0.0006) == doctest::Approx(0.0004).epsilon(1e-12));
  CHECK(apply_deadband(0.0006, 0.0006) == 0.0);
  CHECK(apply_deadband(0.5, 0.0) == 0.5);
  NoiseStream s{5, 0};
  for (int i = 0; i < 1000; ++i) {
    const double x = 0.01 * (2 * uniform(s) - 1);
    s.counter++;
    const double d = 0.005 * uniform(s);
    s.counter++;
    CHECK(apply_deadband(-x, d) == -apply_deadband(x, d));
    // Continuity across the band edge.
    CHECK(std::abs(apply_deadband(d + 1e-12, d)) < 1e-11);
  }
}

TEST_CASE("governor holds p_ref inside the dead-band with no wear") {
  TurbineGovernor tg;
  tg.p_ref = 0.4;
  tg.state = 0.4;
  const double inside = 0.5 * tg.d_za_pu();
  for (int i = 0; i < 1000; ++i) {
    auto r = tg_step(tg, i % 2 ? inside : -inside, 0.01);
    CHECK(r.p_mech == 0.4);
    CHECK_FALSE(r.wear_event);
    tg = r.tg;
  }
}

TEST_CASE("governor step response settles within five servo constants") {
  TurbineGovernor tg;
  tg.p_ref = 0.5;
  tg.state = 0.5;
  const double dev = 2.0 * tg.d_za_pu();
  const double target = 0.5 - tg.d_za_pu() / tg.droop;
  const double dt = 0.01;
  int wear = 0;
  for (int i = 0; i < static_cast<int>(5 * tg.t_servo / dt); ++i) {
    auto r = tg_step(tg, dev, dt);
    wear += r.wear_event;
    tg = r.tg;
  }
  CHECK(std::abs(tg.state - target) <= 0.01 * std::abs(target - 0.5));
  CHECK(wear == 1);
  // First-order response: after exactly one time constant 63.2% of the way.
  TurbineGovernor g2;
  g2.p_ref = 0.5;
  g2.state = 0.5;
  for (int i = 0; i < 50; ++i) g2 = tg_step(g2, dev, 0.01).tg;
  CHECK((g2.state - 0.5) / (target - 0.5) == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("governor follows the AGC input") {
  TurbineGovernor tg;
  tg.d_p = 0.05;
  for (int i = 0; i < 1000; ++i) tg = tg_step(tg, 0.0, 0.01).tg;
  CHECK(tg.state == doctest::Approx(0.05).epsilon(1e-8));
}

TEST_CASE("tg_step rejects large or nonpositive steps") {
  TurbineGovernor tg;
  CHECK_THROWS_AS(tg_step(tg, 0.0, 0.2), InvalidArgument);
  CHECK_THROWS_AS(tg_step(tg, 0.0, 0.0), InvalidArgument);
  CHECK_NOTHROW(tg_step(tg, 0.0, 0.1));
}

TEST_CASE("governor output limits") {
  TurbineGovernor tg;
  tg.limits_enabled = true;
  tg.p_max = 0.8;
  tg.p_ref = 0.7;
  tg.state = 0.7;
  for (int i = 0; i < 2000; ++i) tg = tg_step(tg, -0.01, 0.01).tg;
  CHECK(tg.state == doctest::Approx(0.8));
}

TEST_CASE("agc integrator") {
  Agc a{0.01, 0.0, true, 1};
  CHECK(agc_step(a, 1.0, 0.1).p_agc == 0.0);
  for (int i = 0; i < 1000; ++i) a = agc_step(a, 0.999, 0.1);
  CHECK(a.p_agc == doctest::Approx(1e-3).epsilon(1e-9));
  CHECK(agc_step(a, 1.001, 0.1).p_agc < a.p_agc);
  Agc off{0.01, 0.3, false, 1};
  CHECK(agc_step(off, 0.9, 1.0).p_agc == 0.3);
  CHECK_THROWS_AS(agc_step(a, 1.0, 0.0), InvalidArgument);
}

TEST_CASE("load power") {
  StochasticLoad sl;
  const DriftingLoad dl;
  sl.p_l0_mw = 1.0;
  CHECK(load_power(sl, &dl, 0.0, 0.0) == 14.9);
  CHECK(load_power(sl, nullptr, 10.0, 1.0) == 1.0);
  CHECK(load_power(sl, &dl, 86400.0 * M_PI / 2, 0.0) == doctest::Approx(13.112).epsilon(1e-12));
  sl.gamma = 2.5;  // inert while v_ratio = 1
  CHECK(load_power(sl, nullptr, 10.0, 0.5) == 0.5);
  CHECK_THROWS_AS(load_power(sl, nullptr, -1.0, 0.0), InvalidArgument);
}

TEST_CASE("synthetic inertia step") {
  SyntheticInertia si;
  auto r = synthetic_inertia_step(si, 0.0, 0.0, 0.001);
  CHECK(r.p_mw == 0.0);
  CHECK(r.si.e_state_mj == si.e_state_mj);

  // Strong falling frequency: output saturates at +p_max once filtered.
  SyntheticInertia s2 = si;
  for (int i = 0; i < 20; ++i) {
    r = synthetic_inertia_step(s2, 0.0, -1.0, 0.001);
    s2 = r.si;
  }
  CHECK(r.p_mw == 2.0);

  SyntheticInertia empty = si;
  empty.e_state_mj = 0.0;
  r = synthetic_inertia_step(empty, -0.001, 0.0, 0.001);
  CHECK(r.p_mw == 0.0);
  SyntheticInertia full = si;
  full.e_state_mj = full.e_cap_mj;
  r = synthetic_inertia_step(full, 0.001, 0.0, 0.001);
  CHECK(r.p_mw == 0.0);

  SyntheticInertia bad = si;
  bad.e_state_mj = -1.0;
  CHECK_THROWS_AS(synthetic_inertia_step(bad, 0.0, 0.0, 0.001), InvariantViolation);
  bad.e_state_mj = 161.0;
  CHECK_THROWS_AS(synthetic_inertia_step(bad, 0.0, 0.0, 0.001), InvariantViolation);
}

TEST_CASE("synthetic inertia energy bookkeeping and clamps") {
  SyntheticInertia si;
  si.e_state_mj = 0.5;
  const double e0 = si.e_state_mj;
  double delivered = 0.0;
  NoiseStream s{3, 0};
  for (int i = 0; i < 200000; ++i) {
    const auto g = gaussian(s);
    s = g.next;
    const auto r = synthetic_inertia_step(si, 1e-4 * g.value, 0.01 * g.value, 0.001);
    CHECK(std::abs(r.p_mw) <= si.p_max_mw);
    delivered += r.p_mw * 0.001;
    si = r.si;
    REQUIRE(si.e_state_mj >= 0.0);
    REQUIRE(si.e_state_mj <= si.e_cap_mj);
  }
  CHECK(std::abs((si.e_state_mj - e0) + delivered) < 1e-6);
}

TEST_CASE("grid equilibrium stays exactly at zero") {
  GridState s = small_grid(0.036, 2.0, 0.0);
  const GridStepper st(s, 0.01);
  for (int i = 0; i < 10000; ++i) st.advance(s);
  CHECK(s.coi.delta_omega == 0.0);
  CHECK(s.wear_events == 0);
  CHECK(s.steps == 10000);
  CHECK(s.t == doctest::Approx(100.0));
}

TEST_CASE("pinned load settles at -P_L0/D_L") {
  GridState s = small_grid(1.0, 2.0);  // 1 Hz dead-band: governors never act
  s.load.ou = OuParams{0.5, 0.5, 0.0, 1.0};
  s.eta = 1.0;
  const GridStepper st(s, 0.01);
  for (int i = 0; i < 20000; ++i) st.advance(s);
  // Fixed point of 0 = −P_L0/S − D_L·Δω.
  CHECK(s.coi.delta_omega == doctest::Approx(-0.01 / 2.0).epsilon(1e-9));
  CHECK(s.wear_events == 0);
}

TEST_CASE("power bookkeeping identity holds every step") {
  GridState s = small_grid(0.0, 1.5);
  s.agc = Agc{0.01, 0.0, true, 0};
  s.drift = DriftingLoad{};
  const double dt = 0.01;
  const GridStepper st(s, dt);
  for (int i = 0; i < 5000; ++i) {
    const double before = s.coi.delta_omega;
    st.advance(s);
    const double lhs = s.last_mismatch_pu;
    const double rhs = 2 * s.coi.h_total * (s.coi.delta_omega - before) / dt + s.coi.d_l * before;
    REQUIRE(std::abs(lhs - rhs) < 1e-9);
  }
}

TEST_CASE("dead-band inertness without disturbances") {
  GridState s = small_grid(0.036, 0.0, 0.0);
  s.coi.delta_omega = 0.5 * 0.036 / 60.0;
  s.prev_delta_omega = s.coi.delta_omega;
  const GridStepper st(s, 0.01);
  for (int i = 0; i < 5000; ++i) {
    st.advance(s);
    REQUIRE(s.generators[0].tg->state == 0.0);
  }
  CHECK(s.wear_events == 0);
}

TEST_CASE("divergence guard") {
  GridState s = small_grid(1.0, 0.0);
  s.load.p_l0_mw = 2000.0;
  s.load.ou = OuParams{5.0, 0.5, 0.0, 10.0};
  s.eta = 10.0;
  const GridStepper st(s, 0.01);
  bool thrown = false;
  try {
    for (int i = 0; i < 100000; ++i) st.advance(s);
  } catch (const SimulationDiverged& e) {
    thrown = true;
    CHECK(e.time_s() > 0.0);
  }
  CHECK(thrown);
}

TEST_CASE("step_grid is deterministic and equals the stepper") {
  GridState s = small_grid(0.036, 2.0);
  const GridState a = step_grid(s, 0.01, NoiseStream{9, 4});
  const GridState b = step_grid(s, 0.01, NoiseStream{9, 4});
  CHECK(a.coi.delta_omega == b.coi.delta_omega);
  CHECK(a.eta == b.eta);
  CHECK(a.stream == (NoiseStream{9, 5}));
  s.stream = NoiseStream{9, 4};
  GridStepper(s, 0.01).advance(s);
  CHECK(s.eta == a.eta);
}

TEST_CASE("inertia doubling equals halving the noise: 4:1 variance ratio") {
  // D_L = 0, no governors: Δω(t; 2H, b) has the law of Δω(t; H, b/2).
  auto ensemble_var = [](double h_scale, double b) {
    const std::size_t paths = 4000;
    double s2 = 0.0;
    for (std::size_t k = 0; k < paths; ++k) {
      GridState s;
      s.generators.push_back(Generator{5.0 * h_scale, 100.0, std::nullopt, 0.0});
      s.coi.h_total = s.rating_weighted_h();
      s.coi.d_l = 0.0;
      s.load.p_l0_mw = 1.0;
      s.load.ou = OuParams{0.0, 0.5, b, 0.0};
      s.stream = NoiseStream{77, k * 100000};
      const GridStepper st(s, 0.05);
      for (int i = 0; i < 1000; ++i) st.advance(s);
      s2 += s.coi.delta_omega * s.coi.delta_omega;
    }
    return s2 / static_cast<double>(paths);
  };
  const double ratio = ensemble_var(1.0, 1.0) / ensemble_var(2.0, 1.0);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));
  const double same = ensemble_var(2.0, 1.0) / ensemble_var(1.0, 0.5);
  CHECK(same == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("GridState validation") {
  GridState s = small_grid(0.036, 2.0);
  s.agc = Agc{0.01, 0.0, true, 1};  // compensator has no governor
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s = small_grid(0.036, 2.0);
  s.si = SyntheticInertia{};
  s.si->e_state_mj = 200.0;
  CHECK_THROWS_AS(s.validate(), InvariantViolation);
  s = small_grid(0.036, 2.0);
  CHECK_THROWS_AS(GridStepper(s, 0.2), InvalidArgument);
}
