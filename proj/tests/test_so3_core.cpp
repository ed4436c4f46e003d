#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "so3prop/core.hpp"

using namespace so3prop;

namespace {
std::mt19937 rng(12345);

Vec3 random_vec(double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(rng), u(rng), u(rng));
}

Rotation random_rotation() {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v(n(rng), n(rng), n(rng));
  std::uniform_real_distribution<double> a(0.0, kPi - 0.05);
  return exp_so3(a(rng) * v.normalized());
}
}  // namespace

TEST_CASE("hat and vee are mutually inverse") {
  for (int i = 0; i < 20; ++i) {
    const Vec3 x = random_vec(5.0);
    REQUIRE((vee(hat(x)) - x).norm() == 0.0);
  }
  const Vec3 x(1.0, 2.0, 3.0);
  const Mat3 s = hat(x);
  REQUIRE((s + s.transpose()).norm() == 0.0);
  REQUIRE((s * Vec3(0.5, -1.0, 2.0) - x.cross(Vec3(0.5, -1.0, 2.0))).norm() ==
          0.0);
}

TEST_CASE("vee rejects non-skew matrices") {
  REQUIRE_THROWS_AS(vee(Mat3::Identity()), NotSkew);
}

TEST_CASE("exp_so3 lands on the group") {
  for (int i = 0; i < 50; ++i) {
    const Rotation r = exp_so3(random_vec(3.0));
    REQUIRE(r.ortho_defect() < 1e-13);
    REQUIRE(r.matrix().determinant() == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("exp_so3 of zero is identity, small angles are stable") {
  REQUIRE((exp_so3(Vec3::Zero()).matrix() - Mat3::Identity()).norm() == 0.0);
  const Vec3 tiny(1e-12, -2e-12, 3e-13);
  REQUIRE((exp_so3(tiny).matrix() - (Mat3::Identity() + hat(tiny))).norm() <
          1e-20);
}

TEST_CASE("log_so3 inverts exp_so3 on the principal domain") {
  for (int i = 0; i < 100; ++i) {
    std::uniform_real_distribution<double> a(1e-8, kPi - 1e-6);
    const Vec3 axis = random_vec(1.0).normalized();
    const Vec3 f = a(rng) * axis;
    REQUIRE((log_so3(exp_so3(f)) - f).norm() < 1e-9);
  }
}

TEST_CASE("log_so3 handles rotations by pi") {
  for (const Vec3& axis :
       {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1),
        Vec3(1, 1, 1).normalized(), Vec3(-1, 2, 0.5).normalized()}) {
    const Vec3 f = kPi * axis;
    const Vec3 back = log_so3(exp_so3(f));
    // axis sign is conventional at pi; compare as rotations
    REQUIRE((exp_so3(back).matrix() - exp_so3(f).matrix()).norm() < 1e-7);
    REQUIRE(back.norm() == Catch::Approx(kPi).margin(1e-9));
  }
}

TEST_CASE("euler 3-1-3 round trip") {
  for (int i = 0; i < 200; ++i) {
    const Rotation r = random_rotation();
    const Euler313 e = rotation_to_euler313(r);
    REQUIRE(e.alpha >= 0.0);
    REQUIRE(e.alpha < kTwoPi);
    REQUIRE(e.beta >= 0.0);
    REQUIRE(e.beta <= kPi);
    REQUIRE(e.gamma >= 0.0);
    REQUIRE(e.gamma < kTwoPi);
    REQUIRE((euler313_to_rotation(e).matrix() - r.matrix()).norm() < 1e-12);
  }
}

TEST_CASE("euler 3-1-3 gimbal lock convention") {
  const Euler313 in{1.2, 0.0, 0.7};  // alpha and gamma merge at beta = 0
  const Euler313 out = rotation_to_euler313(euler313_to_rotation(in));
  REQUIRE(out.beta == 0.0);
  REQUIRE(out.gamma == 0.0);
  REQUIRE(out.alpha == Catch::Approx(wrap_2pi(1.2 + 0.7)).margin(1e-12));
  const Euler313 in2{0.4, kPi, 0.9};
  const Euler313 out2 = rotation_to_euler313(euler313_to_rotation(in2));
  REQUIRE(out2.beta == kPi);
  REQUIRE(out2.gamma == 0.0);
  REQUIRE((euler313_to_rotation(out2).matrix() -
           euler313_to_rotation(in2).matrix())
              .norm() < 1e-12);
}

TEST_CASE("haar weight matches sin(beta)/8pi^2") {
  REQUIRE(haar_weight(0.0) == 0.0);
  REQUIRE(haar_weight(kPi / 2.0) ==
          Catch::Approx(1.0 / (8.0 * kPi * kPi)).epsilon(1e-15));
}

TEST_CASE("wrap_2pi maps into [0, 2pi)") {
  REQUIRE(wrap_2pi(-0.1) == Catch::Approx(kTwoPi - 0.1).epsilon(1e-14));
  REQUIRE(wrap_2pi(kTwoPi + 0.25) == Catch::Approx(0.25).margin(1e-14));
  REQUIRE(wrap_2pi(0.0) == 0.0);
}

TEST_CASE("Rotation construction renormalizes mild drift and rejects "
          "reflections") {
  Mat3 drift = exp_so3(Vec3(0.3, -0.2, 0.5)).matrix();
  drift(0, 0) += 1e-8;
  const Rotation r(drift);
  REQUIRE(r.ortho_defect() < 1e-13);
  Mat3 refl = Mat3::Identity();
  refl(2, 2) = -1.0;
  REQUIRE_THROWS_AS(Rotation(refl), NotRotation);
}

TEST_CASE("coset representative sends the axis to the requested direction") {
  std::normal_distribution<double> n(0.0, 1.0);
  for (int axis = 1; axis <= 3; ++axis) {
    for (int i = 0; i < 30; ++i) {
      const Vec3 r = Vec3(n(rng), n(rng), n(rng)).normalized();
      const Rotation q = coset_representative(axis, r);
      REQUIRE((q.col(axis - 1) - r).norm() < 1e-12);
      REQUIRE(q.ortho_defect() < 1e-12);
    }
    // poles
    REQUIRE((coset_representative(axis, axis_vector(axis)).matrix() -
             Mat3::Identity())
                .norm() < 1e-14);
    const Rotation q = coset_representative(axis, -axis_vector(axis));
    REQUIRE((q.col(axis - 1) + axis_vector(axis)).norm() < 1e-12);
  }
  REQUIRE_THROWS_AS(coset_representative(1, Vec3(1.0, 1.0, 0.0)), NotUnit);
}
