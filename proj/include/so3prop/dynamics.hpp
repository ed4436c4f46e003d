#pragma once

// 3D pendulum model and its Lie group variational integrator, with the exact
// inverse step used for density pull-back.

#include <Eigen/Dense>
#include <cmath>

#include "so3prop/core.hpp"
#include "so3prop/errors.hpp"

namespace so3prop {

struct PendulumParams {
  Mat3 inertia = Mat3::Identity();        // J  [kg m^2]
  double mass = 1.0;                      // m  [kg]
  Vec3 com_offset = Vec3(0.0, 0.0, 0.3);  // rho, body frame [m]
  double gravity = 9.81;                  // g  [m/s^2]

  Mat3 inertia_inv = Mat3::Identity();    // cached J^{-1}

  PendulumParams() { inertia_inv = inertia.inverse(); }
  PendulumParams(const Mat3& J, double m, const Vec3& rho, double g)
      : inertia(J), mass(m), com_offset(rho), gravity(g) {
    validate();
    inertia_inv = inertia.inverse();
  }

  void validate() const {
    if ((inertia - inertia.transpose()).norm() > 1e-12) {
      throw ConfigError("pendulum inertia must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat3> es(inertia);
    if (es.eigenvalues().minCoeff() <= 0.0) {
      throw ConfigError("pendulum inertia must be positive definite");
    }
  }

  /// Nonstandard inertia  J_d = tr(J)/2 I - J, always derived from J.
  Mat3 nonstandard_inertia() const {
    return 0.5 * inertia.trace() * Mat3::Identity() - inertia;
  }

  static PendulumParams reference_pendulum() {
    return PendulumParams(Vec3(0.13, 0.28, 0.17).asDiagonal(), 1.0,
                          Vec3(0.0, 0.0, 0.3), 9.81);
  }
};

struct RigidBodyState {
  Rotation attitude;   // R: body to inertial
  Vec3 omega = Vec3::Zero();  // body angular velocity [rad/s]
};

struct StepConfig {
  double h = 0.01;            // step size [s]
  double newton_tol = 1e-14;
  int newton_max_iter = 50;
};

/// M = m g rho x R^T e3  (e3 points along gravity)
inline Vec3 gravity_moment(const Rotation& R, const PendulumParams& p) {
  return p.mass * p.gravity *
         p.com_offset.cross(R.matrix().transpose() * Vec3::UnitZ());
}

inline double energy(const RigidBodyState& s, const PendulumParams& p) {
  const double kinetic = 0.5 * s.omega.dot(p.inertia * s.omega);
  const double potential =
      -p.mass * p.gravity * Vec3::UnitZ().dot(s.attitude.matrix() * p.com_offset);
  return kinetic + potential;
}

namespace detail {

/// Right Jacobian of exp_so3: d/dt exp(f(t)) = exp(f) hat(Jr(f) f').
inline Mat3 right_jacobian(const Vec3& f) {
  const double th = f.norm();
  const Mat3 k = hat(f);
  if (th < 1e-6) {
    return Mat3::Identity() - 0.5 * k + (1.0 / 6.0) * k * k;
  }
  return Mat3::Identity() - (1.0 - std::cos(th)) / (th * th) * k +
         (th - std::sin(th)) / (th * th * th) * (k * k);
}

/// Columns of u -> vee(F hat(u) Jd + Jd hat(u) F^T).
inline Mat3 skew_residual_jacobian(const Mat3& F, const Mat3& Jd) {
  Mat3 A;
  for (int i = 0; i < 3; ++i) {
    Vec3 u = Vec3::Zero();
    u(i) = 1.0;
    const Mat3 H = hat(u);
    const Mat3 S = F * H * Jd + Jd * H * F.transpose();
    A.col(i) = Vec3(S(2, 1), S(0, 2), S(1, 0));
  }
  return A;
}

inline Vec3 vee_unchecked(const Mat3& S) {
  return Vec3(S(2, 1), S(0, 2), S(1, 0));
}

}  // namespace detail

/// Solve  h hat(a) = F Jd - Jd F^T  for F in SO(3) by Newton iteration on
/// f with F = exp_so3(f), initial guess f0 = h J^{-1} a.
inline Rotation solve_implicit_F(const Vec3& a, const PendulumParams& p,
                                 double h, double tol = 1e-14,
                                 int max_iter = 50) {
  const Mat3 Jd = p.nonstandard_inertia();
  Vec3 f = h * (p.inertia_inv * a);
  double rnorm = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Rotation F = exp_so3(f);
    const Mat3& Fm = F.matrix();
    const Vec3 r =
        detail::vee_unchecked(Fm * Jd - Jd * Fm.transpose()) - h * a;
    rnorm = r.norm();
    if (rnorm <= tol) return F;
    const Mat3 Jm =
        detail::skew_residual_jacobian(Fm, Jd) * detail::right_jacobian(f);
    f -= Jm.inverse() * r;
  }
  const Rotation F = exp_so3(f);
  const Mat3& Fm = F.matrix();
  rnorm = (detail::vee_unchecked(Fm * Jd - Jd * Fm.transpose()) - h * a).norm();
  if (rnorm <= tol) return F;
  throw NoConvergence(rnorm, max_iter);
}

/// One step of the variational integrator:
///   h hat(J Om_k + h/2 M_k) = F Jd - Jd F^T
///   R_{k+1}  = R_k F
///   J Om_{k+1} = F^T J Om_k + h/2 F^T M_k + h/2 M_{k+1}
inline RigidBodyState step(const RigidBodyState& s, const PendulumParams& p,
                           const StepConfig& c) {
  const Vec3 M = gravity_moment(s.attitude, p);
  const Vec3 a = p.inertia * s.omega + 0.5 * c.h * M;
  const Rotation F = solve_implicit_F(a, p, c.h, c.newton_tol,
                                      c.newton_max_iter);
  RigidBodyState out;
  out.attitude = s.attitude * F;
  const Vec3 M1 = gravity_moment(out.attitude, p);
  out.omega = p.inertia_inv * (
      F.matrix().transpose() * (p.inertia * s.omega + 0.5 * c.h * M) +
      0.5 * c.h * M1);
  return out;
}

/// Exact inverse of step.  Eliminating Om_k from the update equations leaves
/// a single rotation unknown:  vee(F Jd - Jd F^T) = h F b  with
/// b = J Om_{k+1} - h/2 M_{k+1}; then R_k = R_{k+1} F^T and Om_k follows.
inline RigidBodyState inverse_step(const RigidBodyState& s,
                                   const PendulumParams& p,
                                   const StepConfig& c) {
  const Mat3 Jd = p.nonstandard_inertia();
  const Vec3 M1 = gravity_moment(s.attitude, p);
  const Vec3 b = p.inertia * s.omega - 0.5 * c.h * M1;
  Vec3 f = c.h * s.omega;
  bool ok = false;
  Mat3 Fm;
  for (int it = 0; it < c.newton_max_iter && !ok; ++it) {
    Fm = exp_so3(f).matrix();
    const Vec3 r = detail::vee_unchecked(Fm * Jd - Jd * Fm.transpose()) -
                   c.h * (Fm * b);
    if (r.norm() <= c.newton_tol) {
      ok = true;
      break;
    }
    const Mat3 Jm = (detail::skew_residual_jacobian(Fm, Jd) +
                     c.h * Fm * hat(b)) *
                    detail::right_jacobian(f);
    f -= Jm.inverse() * r;
  }
  if (!ok) {
    Fm = exp_so3(f).matrix();
    const double rn = (detail::vee_unchecked(Fm * Jd - Jd * Fm.transpose()) -
                       c.h * (Fm * b)).norm();
    if (rn > c.newton_tol) throw NoConvergence(rn, c.newton_max_iter);
  }
  RigidBodyState out;
  out.attitude = Rotation(s.attitude.matrix() * Fm.transpose(),
                          Rotation::unchecked{});
  const Vec3 M0 = gravity_moment(out.attitude, p);
  out.omega = p.inertia_inv * (Fm * b - 0.5 * c.h * M0);
  return out;
}

inline RigidBodyState flow(RigidBodyState s, const PendulumParams& p,
                           const StepConfig& c, int k) {
  for (int i = 0; i < k; ++i) s = step(s, p, c);
  return s;
}

inline RigidBodyState backward_flow(RigidBodyState s, const PendulumParams& p,
                                    const StepConfig& c, int k) {
  for (int i = 0; i < k; ++i) s = inverse_step(s, p, c);
  return s;
}

}  // namespace so3prop
