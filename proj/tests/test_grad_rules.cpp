#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "eventq/grad_rules.hpp"

using namespace eventq;

TEST_CASE("threshold crossing") {
  const auto mid = detect_crossing({-1.0, 0.0}, {1.0, 0.0}, 0.0, 1, 1.0);
  REQUIRE(mid.has_value());
  CHECK(mid->t_spk == 0.5);
  CHECK(mid->frac == 0.5);
  CHECK(mid->v_dot == 2.0);
  CHECK(mid->dt_dtheta == 0.0);

  // v_dot = 2, dv/dtheta = 0.5 at the crossing.
  const auto slope = detect_crossing({0.0, 0.5}, {2.0, 0.5}, 1.0, 7, 1.0);
  REQUIRE(slope.has_value());
  CHECK(slope->t_spk == 6.5);
  CHECK(slope->dt_dtheta == -0.25);

  CHECK_FALSE(detect_crossing({1.0, 0.0}, {2.0, 0.0}, 0.0, 1, 1.0).has_value());
  CHECK_FALSE(detect_crossing({0.5, 0.0}, {-2.0, 0.0}, 0.0, 1, 1.0).has_value());
  CHECK_THROWS_AS(detect_crossing({1.0 - 1e-14, 0.0}, {1.0, 0.0}, 1.0, 1, 1e-3), GrazingCrossingError);
}

TEST_CASE("crossing tangent matches a finite difference of the interpolated time") {
  // v_prev and v_curr depend on theta; t_spk(theta) is the linear interpolation.
  auto crossing_time = [](double theta) {
    const double vp = 0.6 + 0.3 * theta;
    const double vc = 1.3 - 0.2 * theta * theta;
    const double frac = (1.0 - vp) / (vc - vp);
    return 4e-3 + 1e-3 * frac;
  };
  const double theta = 0.4;
  const auto c = detect_crossing({0.6 + 0.3 * theta, 0.3}, {1.3 - 0.2 * theta * theta, -0.4 * theta}, 1.0, 5, 1e-3);
  REQUIRE(c.has_value());
  const double eps = 1e-6;
  const double fd = (crossing_time(theta + eps) - crossing_time(theta - eps)) / (2 * eps);
  CHECK(c->t_spk == doctest::Approx(crossing_time(theta)).epsilon(1e-15));
  CHECK(c->dt_dtheta == doctest::Approx(fd).epsilon(1e-7));
}

TEST_CASE("delay composition") {
  ThresholdCrossing c;
  c.t_spk = 1.5;
  c.dt_dtheta = -0.25;
  auto t = compose_delay(c, {2.0, 1.0});
  CHECK(t.t_post == 3.5);
  CHECK(t.time_tangent == 0.75);
  t = compose_delay(c, {0.0, 0.0});
  CHECK(t.time_tangent == -0.25);
  c.dt_dtheta = 0.0;
  CHECK(compose_delay(c, {0.7, 1.0}).time_tangent == 1.0);
  CHECK_THROWS_AS(compose_delay(c, {-0.1, 0.0}), ConfigError);
}

TEST_CASE("synaptic jump") {
  const Dual a = apply_jump({0.0, 0.0}, {2.0, {1.0, 0.0}}, 1.0);
  CHECK(a == Dual{1.0, 0.5});
  const Dual b = apply_jump({0.3, 0.2}, {2.0, {1.0, 0.0}}, 0.0);
  CHECK(b == Dual{1.3, 0.2});
  const Dual c = apply_jump({0.3, 0.2}, {2.0, {1.0, 1.0}}, 0.0);
  CHECK(c == Dual{1.3, 1.2});
  CHECK_THROWS_AS(apply_jump({}, {0.0, {1.0, 0.0}}, 1.0), ConfigError);
}

TEST_CASE("single spike: tangent along the delay is the derivative of the closed form") {
  // x(T) = w exp(-(T - t_post)/tau)  =>  dx/dd = (w/tau) exp(-(T - t_post)/tau)
  for (double tau : {0.05, 0.2, 2.0}) {
    for (double t_post : {0.013, 0.2, 0.71}) {
      const double T = 1.0;
      const double w = 0.8;
      Dual x = apply_jump({0.0, 0.0}, {tau, {w, 0.0}}, 1.0);
      x = dual_exp_decay(x, T - t_post, tau);
      const double expected = w / tau * std::exp(-(T - t_post) / tau);
      CHECK(x.tangent == doctest::Approx(expected).epsilon(1e-12));
      CHECK(x.primal == doctest::Approx(w * std::exp(-(T - t_post) / tau)).epsilon(1e-12));
    }
  }
}

TEST_CASE("merged pulses equal the sequence of single jumps") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double tau = 0.5 + u(rng) * 0.4;
    Dual sequential{u(rng), u(rng)};
    const Dual start = sequential;
    AggregatedPulse pulse;
    for (int k = 0; k < 5; ++k) {
      SpikeEvent ev{1, {1.0 + 0.5 * u(rng), u(rng)}, u(rng)};
      sequential = apply_jump(sequential, {tau, ev.weight}, ev.time_tangent);
      pulse += ev;
    }
    const Dual merged = apply_jump_pulse(start, pulse, tau);
    CHECK(merged.primal == doctest::Approx(sequential.primal).epsilon(1e-13));
    CHECK(merged.tangent == doctest::Approx(sequential.tangent).epsilon(1e-12));
  }

  CHECK(apply_jump_pulse({0.4, -0.1}, AggregatedPulse{}, 1.0) == Dual{0.4, -0.1});
  AggregatedPulse two;
  two += SpikeEvent{1, {1.0, 0.0}, 1.0};
  two += SpikeEvent{1, {1.0, 0.0}, 1.0};
  CHECK(apply_jump_pulse({0.0, 0.0}, two, 1.0) == Dual{2.0, 2.0});
  const SpikeEvent one{1, {0.7, 0.3}, -0.4};
  CHECK(apply_jump_pulse({0.1, 0.2}, AggregatedPulse::from(one), 0.9).tangent ==
        doctest::Approx(apply_jump({0.1, 0.2}, {0.9, one.weight}, one.time_tangent).tangent).epsilon(1e-15));
}

TEST_CASE("general jump rule") {
  // dx+/dtheta = dx-/dtheta + (xdot- - xdot+) * t' + ddelta/dtheta
  CHECK(jump({1.0, 0.5}, {-1.0, 0.25}, 2.0, -3.0, 0.1) == Dual{0.0, 0.5 + 0.5 + 0.25});
}

TEST_CASE("heaviside and superspike") {
  CHECK(heaviside(0.0) == 1.0);
  CHECK(heaviside(-1e-300) == 0.0);
  CHECK(superspike_grad(0.0) == 1.0);
  CHECK(superspike_grad(-3.0) == 1.0 / 16.0);
  CHECK(superspike_grad(3.0) == 1.0 / 16.0);
}
