#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "so3prop/dynamics.hpp"

using namespace so3prop;

namespace {

std::mt19937 rng(424242);

RigidBodyState random_state() {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> a(0.0, 3.0);
  RigidBodyState s;
  s.attitude = exp_so3(a(rng) * Vec3(n(rng), n(rng), n(rng)).normalized());
  s.omega = Vec3(n(rng), n(rng), n(rng)) * 2.0;
  return s;
}

// Classical RK4 on (R, Omega) with Rdot = R hat(Omega),
// J Omegadot = J Omega x Omega + M(R); reference oracle for convergence.
RigidBodyState rk4_step(const RigidBodyState& s, const PendulumParams& p,
                        double h) {
  struct D {
    Mat3 Rd;
    Vec3 wd;
  };
  auto deriv = [&](const Mat3& R, const Vec3& w) {
    const Vec3 M = gravity_moment(Rotation(R, Rotation::unchecked{}), p);
    return D{R * hat(w),
             p.inertia.ldlt().solve((p.inertia * w).cross(w) + M)};
  };
  const Mat3 R0 = s.attitude.matrix();
  const Vec3 w0 = s.omega;
  const D k1 = deriv(R0, w0);
  const D k2 = deriv(R0 + 0.5 * h * k1.Rd, w0 + 0.5 * h * k1.wd);
  const D k3 = deriv(R0 + 0.5 * h * k2.Rd, w0 + 0.5 * h * k2.wd);
  const D k4 = deriv(R0 + h * k3.Rd, w0 + h * k3.wd);
  RigidBodyState out;
  out.attitude = Rotation(
      R0 + h / 6.0 * (k1.Rd + 2.0 * k2.Rd + 2.0 * k3.Rd + k4.Rd));
  out.omega = w0 + h / 6.0 * (k1.wd + 2.0 * k2.wd + 2.0 * k3.wd + k4.wd);
  return out;
}

RigidBodyState rk4_flow(RigidBodyState s, const PendulumParams& p, double h,
                        int k) {
  for (int i = 0; i < k; ++i) s = rk4_step(s, p, h);
  return s;
}

}  // namespace

TEST_CASE("pendulum parameter validation") {
  REQUIRE_NOTHROW(PendulumParams::reference_pendulum());
  Mat3 bad = Mat3::Identity();
  bad(0, 0) = -1.0;
  REQUIRE_THROWS_AS(PendulumParams(bad, 1.0, Vec3(0, 0, 0.3), 9.81),
                    ConfigError);
  const PendulumParams p = PendulumParams::reference_pendulum();
  const Mat3 Jd = p.nonstandard_inertia();
  REQUIRE(Jd(0, 0) == Catch::Approx(0.29 - 0.13).margin(1e-15));
  REQUIRE(Jd(1, 1) == Catch::Approx(0.29 - 0.28).margin(1e-15));
  REQUIRE(Jd(2, 2) == Catch::Approx(0.29 - 0.17).margin(1e-15));
}

TEST_CASE("energy of the hanging equilibrium") {
  const PendulumParams p = PendulumParams::reference_pendulum();
  RigidBodyState s;  // identity attitude, zero velocity
  REQUIRE(energy(s, p) == Catch::Approx(-2.943).margin(1e-12));
  REQUIRE(gravity_moment(s.attitude, p).norm() == 0.0);
}

TEST_CASE("equilibrium state is a fixed point of the step") {
  const PendulumParams p = PendulumParams::reference_pendulum();
  StepConfig c;
  RigidBodyState s;
  for (int i = 0; i < 10; ++i) s = step(s, p, c);
  REQUIRE((s.attitude.matrix() - Mat3::Identity()).norm() < 1e-12);
  REQUIRE(s.omega.norm() < 1e-12);
}

TEST_CASE("implicit solve satisfies the defining matrix equation") {
  const PendulumParams p = PendulumParams::reference_pendulum();
  const Mat3 Jd = p.nonstandard_inertia();
  for (int i = 0; i < 20; ++i) {
    std::normal_distribution<double> n(0.0, 1.0);
    const Vec3 a(n(rng), n(rng), n(rng));
    const Rotation F = solve_implicit_F(a, p, 0.01);
    const Mat3& Fm = F.matrix();
    REQUIRE((Fm * Jd - Jd * Fm.transpose() - 0.01 * hat(a)).norm() < 1e-12);
  }
}

TEST_CASE("step and inverse_step are mutually inverse") {
  const PendulumParams p = PendulumParams::reference_pendulum();
  StepConfig c;
  for (int i = 0; i < 30; ++i) {
    const RigidBodyState s = random_state();
    const RigidBodyState fwd = step(s, p, c);
    const RigidBodyState back = inverse_step(fwd, p, c);
    REQUIRE((back.attitude.matrix() - s.attitude.matrix()).norm() < 1e-12);
    REQUIRE((back.omega - s.omega).norm() < 1e-12);
    const RigidBodyState fwd2 = step(inverse_step(s, p, c), p, c);
    REQUIRE((fwd2.attitude.matrix() - s.attitude.matrix()).norm() < 1e-12);
    REQUIRE((fwd2.omega - s.omega).norm() < 1e-12);
  }
}

TEST_CASE("energy and orthogonality over a thousand steps") {
  const PendulumParams p = PendulumParams::reference_pendulum();
  StepConfig c;
  RigidBodyState s;
  s.omega = Vec3(4.14, 4.14, 4.14);
  const double e0 = energy(s, p);
  double max_rel = 0.0;
  for (int k = 0; k < 1000; ++k) {
    s = step(s, p, c);
    max_rel = std::max(max_rel, std::abs(energy(s, p) - e0) / std::abs(e0));
    REQUIRE(s.attitude.ortho_defect() < 1e-12);
  }
  REQUIRE(max_rel < 2e-3);
}

TEST_CASE("multi-step reversibility") {
  const PendulumParams p = PendulumParams::reference_pendulum();
  StepConfig c;
  RigidBodyState s0;
  s0.omega = Vec3(4.14, 4.14, 4.14);
  const RigidBodyState s1 = flow(s0, p, c, 100);
  const RigidBodyState back = backward_flow(s1, p, c, 100);
  REQUIRE((back.attitude.matrix() - s0.attitude.matrix()).norm() < 1e-9);
  REQUIRE((back.omega - s0.omega).norm() < 1e-9);
}

TEST_CASE("agrees with an RK4 reference at fine step size") {
  const PendulumParams p = PendulumParams::reference_pendulum();
  RigidBodyState s0;
  s0.omega = Vec3(4.14, 4.14, 4.14);
  StepConfig c;
  c.h = 5e-4;
  const int n = int(std::llround(0.5 / c.h));
  const RigidBodyState a = flow(s0, p, c, n);
  const RigidBodyState b = rk4_flow(s0, p, c.h, n);
  REQUIRE((a.attitude.matrix() - b.attitude.matrix()).norm() < 5e-5);
  REQUIRE((a.omega - b.omega).norm() < 5e-4);
}
