#pragma once

// Rotation-group algebra: skew maps, exponential/logarithm, 3-1-3 Euler
// angles, Haar measure and the coset representative used by the sphere
// marginals.

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "so3prop/errors.hpp"

namespace so3prop {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// hat(x) y = x cross y
inline Mat3 hat(const Vec3& x) {
  Mat3 s;
  s << 0.0, -x.z(), x.y(),
       x.z(), 0.0, -x.x(),
      -x.y(), x.x(), 0.0;
  return s;
}

inline Vec3 vee(const Mat3& s) {
  if ((s + s.transpose()).norm() > 1e-9) {
    throw NotSkew("vee: matrix is not skew-symmetric");
  }
  return Vec3(s(2, 1), s(0, 2), s(1, 0));
}

namespace detail {
inline double ortho_defect(const Mat3& m) {
  return (m.transpose() * m - Mat3::Identity()).norm();
}
}  // namespace detail

/// Element of SO(3).  Construction re-projects onto the group (polar
/// decomposition) when the orthogonality defect exceeds 1e-12; a matrix with
/// negative determinant is rejected.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  explicit Rotation(const Mat3& m) : m_(m) {
    if (m_.determinant() < 0.0) {
      throw NotRotation("Rotation: determinant is negative");
    }
    if (detail::ortho_defect(m_) > 1e-12) {
      renormalize();
    }
  }

  static Rotation identity() { return Rotation(); }

  const Mat3& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }
  Vec3 col(int i) const { return m_.col(i); }

  Rotation inverse() const { return Rotation(m_.transpose(), unchecked{}); }
  Rotation transpose() const { return inverse(); }

  Rotation operator*(const Rotation& o) const {
    Mat3 p = m_ * o.m_;
    if (detail::ortho_defect(p) > 1e-12) {
      Rotation r(p, unchecked{});
      r.renormalize();
      return r;
    }
    return Rotation(p, unchecked{});
  }

  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  double ortho_defect() const { return detail::ortho_defect(m_); }

  /// Closest element of O(3) via polar decomposition.
  void renormalize() {
    Eigen::JacobiSVD<Mat3> svd(m_, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 p = svd.matrixU() * svd.matrixV().transpose();
    if (p.determinant() < 0.0) {
      throw NotRotation("Rotation: nearest orthogonal matrix is a reflection");
    }
    m_ = p;
  }

  struct unchecked {};
  Rotation(const Mat3& m, unchecked) : m_(m) {}

 private:
  Mat3 m_;
};

/// 3-1-3 Euler angles, alpha/gamma in [0,2pi), beta in [0,pi].
struct Euler313 {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

inline double wrap_2pi(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a;
}

inline Rotation exp_so3(const Vec3& x) {
  const double th = x.norm();
  const Mat3 k = hat(x);
  Mat3 r;
  if (th < 1e-10) {
    r = Mat3::Identity() + k + 0.5 * k * k;
  } else {
    r = Mat3::Identity() + std::sin(th) / th * k +
        (1.0 - std::cos(th)) / (th * th) * (k * k);
  }
  return Rotation(r, Rotation::unchecked{});
}

/// Principal logarithm, |result| <= pi.  At rotation angle pi the axis sign is
/// fixed so the first nonzero component is positive.
inline Vec3 log_so3(const Rotation& rot) {
  const Mat3& r = rot.matrix();
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double th = std::acos(c);
  if (th < 1e-10) {
    return vee((r - r.transpose()) / 2.0);
  }
  if (th < kPi - 1e-6) {
    return th / (2.0 * std::sin(th)) * Vec3(r(2, 1) - r(1, 2),
                                            r(0, 2) - r(2, 0),
                                            r(1, 0) - r(0, 1));
  }
  // Near pi the antisymmetric part degenerates; recover the axis from the
  // symmetric part  r + r^T = 2(cos(th) I + (1-cos(th)) n n^T).
  const Mat3 b = (r + r.transpose()) / 2.0;
  Vec3 n;
  for (int i = 0; i < 3; ++i) {
    n(i) = std::sqrt(std::max(0.0, (b(i, i) - c) / (1.0 - c)));
  }
  // off-diagonal entries fix the relative signs
  int imax = 0;
  b.diagonal().maxCoeff(&imax);
  for (int i = 0; i < 3; ++i) {
    if (i == imax) continue;
    if (b(imax, i) < 0.0) n(i) = -n(i);
  }
  if (n(imax) == 0.0) { /* degenerate axis component, others carry the sign */ }
  // tie-break: first nonzero component positive
  for (int i = 0; i < 3; ++i) {
    if (std::abs(n(i)) > 1e-12) {
      if (n(i) < 0.0) n = -n;
      break;
    }
  }
  n.normalize();
  // refine the angle using the antisymmetric part when away from exactly pi
  const double s = 0.5 * Vec3(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0),
                              r(1, 0) - r(0, 1)).dot(n);
  const double angle = std::atan2(s, c) >= 0.0 ? std::atan2(s, c)
                                               : std::atan2(s, c) + kTwoPi;
  return std::min(angle, kPi) * n;
}

/// R = Rz(alpha) Rx(beta) Rz(gamma)
inline Rotation euler313_to_rotation(const Euler313& e) {
  const double ca = std::cos(e.alpha), sa = std::sin(e.alpha);
  const double cb = std::cos(e.beta), sb = std::sin(e.beta);
  const double cg = std::cos(e.gamma), sg = std::sin(e.gamma);
  Mat3 r;
  r << ca * cg - sa * cb * sg, -ca * sg - sa * cb * cg, sa * sb,
       sa * cg + ca * cb * sg, -sa * sg + ca * cb * cg, -ca * sb,
       sb * sg, sb * cg, cb;
  return Rotation(r, Rotation::unchecked{});
}

/// Inverse of euler313_to_rotation.  At gimbal lock (beta in {0,pi}) gamma is
/// set to 0 and alpha absorbs the free angle.
inline Euler313 rotation_to_euler313(const Rotation& rot) {
  const Mat3& r = rot.matrix();
  Euler313 e;
  const double cb = std::clamp(r(2, 2), -1.0, 1.0);
  e.beta = std::acos(cb);
  if (std::abs(r(2, 2)) > 1.0 - 1e-12) {
    e.gamma = 0.0;
    e.alpha = wrap_2pi(std::atan2(r(1, 0), r(0, 0)));
    e.beta = r(2, 2) > 0.0 ? 0.0 : kPi;
    return e;
  }
  e.alpha = wrap_2pi(std::atan2(r(0, 2), -r(1, 2)));
  e.gamma = wrap_2pi(std::atan2(r(2, 0), r(2, 1)));
  return e;
}

/// Haar density in 3-1-3 Euler angles: sin(beta) / (8 pi^2).
inline double haar_weight(double beta) {
  return std::sin(beta) / (8.0 * kPi * kPi);
}

inline Vec3 axis_vector(int i) {
  Vec3 e = Vec3::Zero();
  e(i - 1) = 1.0;
  return e;
}

/// A rotation whose i-th column equals r (i in 1..3).  For r = e_i returns the
/// identity; for r = -e_i a half turn about e_{i mod 3 + 1}.
inline Rotation coset_representative(int i, const Vec3& r) {
  if (std::abs(r.norm() - 1.0) > 1e-12) {
    throw NotUnit("coset_representative: direction is not unit length");
  }
  const Vec3 ei = axis_vector(i);
  const Vec3 cxr = ei.cross(r);
  const double cn = cxr.norm();
  const double d = std::clamp(ei.dot(r), -1.0, 1.0);
  if (cn < 1e-14) {
    if (d > 0.0) return Rotation::identity();
    return exp_so3(kPi * axis_vector(i % 3 + 1));
  }
  return exp_so3(std::acos(d) / cn * cxr);
}

}  // namespace so3prop
