#pragma once

// Measurement model (body-frame direction to a known inertial reference plus
// angular velocity) and the Bayes-rule posterior update on a propagated
// density.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "so3prop/core.hpp"
#include "so3prop/density.hpp"
#include "so3prop/errors.hpp"
#include "so3prop/marginals.hpp"
#include "so3prop/parallel.hpp"

namespace so3prop {

/// z = [R^T a; Omega] + v,  v zero-mean Gaussian with block covariance.
struct MeasurementModel {
  Vec3 reference;      // a, inertial frame, unit
  Mat3 cov_direction;  // noise covariance of the direction block
  Mat3 cov_omega;      // noise covariance of the angular velocity block

  MeasurementModel(const Vec3& a, const Mat3& cd, const Mat3& co)
      : reference(a), cov_direction(cd), cov_omega(co) {
    if (std::abs(reference.norm() - 1.0) > 1e-9) {
      throw NotUnit("MeasurementModel: reference direction must be unit");
    }
    prec_dir_ = cd.ldlt().solve(Mat3::Identity());
    prec_om_ = co.ldlt().solve(Mat3::Identity());
    const double det = cd.determinant() * co.determinant();
    if (!(det > 0.0)) {
      throw ConfigError("MeasurementModel: covariances must be SPD");
    }
    log_norm_ = -0.5 * (6.0 * std::log(kTwoPi) + std::log(det));
  }

  Eigen::Matrix<double, 6, 1> predict(const Rotation& R,
                                      const Vec3& omega) const {
    Eigen::Matrix<double, 6, 1> z;
    z.head<3>() = R.matrix().transpose() * reference;
    z.tail<3>() = omega;
    return z;
  }

  double log_likelihood(const Eigen::Matrix<double, 6, 1>& z,
                        const Rotation& R, const Vec3& omega) const {
    const Eigen::Matrix<double, 6, 1> r = z - predict(R, omega);
    const Vec3 rd = r.head<3>(), ro = r.tail<3>();
    return log_norm_ - 0.5 * rd.dot(prec_dir_ * rd) -
           0.5 * ro.dot(prec_om_ * ro);
  }

 private:
  Mat3 prec_dir_, prec_om_;
  double log_norm_;
};

struct Measurement {
  Eigen::Matrix<double, 6, 1> z;
  int timestamp = 0;  // integration step index
};

inline double likelihood(const MeasurementModel& m,
                         const Measurement& meas, const Rotation& R,
                         const Vec3& omega) {
  return std::exp(m.log_likelihood(meas.z, R, omega));
}

struct UpdateResult {
  DensityGrid posterior;
  double evidence;  // quadrature integral of likelihood x prior
};

/// Node-wise product of the prior grid and the measurement likelihood,
/// renormalized; the divisor is the marginal evidence.
inline UpdateResult bayes_update(const DensityGrid& prior,
                                 const MeasurementModel& m,
                                 const Measurement& meas, int workers = 1) {
  const So3Quadrature& q = prior.attitude_grid();
  const VelocityGrid& vg = prior.velocity_grid();
  DensityGrid post(q, vg);
  post.set_timestamp(prior.timestamp());
  post.set_mean_state(prior.mean_state());
  const std::size_t nv = vg.size();
  const int nb = q.n_beta(), ng = q.n_gamma();
  parallel_for(q.size(), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t a = b; a < e; ++a) {
      const int ig = int(a % ng);
      const int ib = int((a / ng) % nb);
      const int ia = int(a / (std::size_t(nb) * ng));
      const Rotation R = q.rotation(ia, ib, ig);
      for (std::size_t v = 0; v < nv; ++v) {
        post.at(a, v) =
            prior.at(a, v) * likelihood(m, meas, R, vg.point(v));
      }
    }
  });
  const double evidence = post.integral(workers);
  if (evidence < 1e-300) {
    throw DegenerateUpdate(
        "bayes_update: evidence underflow, measurement inconsistent with "
        "prior support");
  }
  for (double& v : post.values()) v /= evidence;
  return UpdateResult{std::move(post), evidence};
}

struct CycleResult {
  DensityGrid final_posterior;
  std::vector<double> evidences;
};

/// Alternate propagation and measurement updates.  Measurements must be
/// time-ordered; timestamps are integration step indices relative to the
/// prior's timestamp.  The callback (optional) receives each posterior.
inline CycleResult estimate_cycle(
    DensityGrid prior, const PendulumParams& p, const StepConfig& c,
    const MeasurementModel& m, const std::vector<Measurement>& measurements,
    const PropagateOptions& opts = {},
    const std::function<void(const DensityGrid&, double)>& on_posterior = {}) {
  CycleResult out{std::move(prior), {}};
  for (const Measurement& meas : measurements) {
    const int dk = meas.timestamp - out.final_posterior.timestamp();
    if (dk < 0) {
      throw ConfigError("estimate_cycle: measurements not time-ordered");
    }
    if (dk > 0) {
      out.final_posterior =
          propagate(out.final_posterior, p, c, dk, opts).grid;
      out.final_posterior.normalize(opts.workers);
    }
    UpdateResult u = bayes_update(out.final_posterior, m, meas, opts.workers);
    out.final_posterior = std::move(u.posterior);
    out.evidences.push_back(u.evidence);
    if (on_posterior) on_posterior(out.final_posterior, u.evidence);
  }
  return out;
}

/// Grid argmax of an attitude marginal with per-axis parabolic refinement of
/// the peak (periodic in alpha/gamma, clamped in beta).
inline Rotation argmax_attitude(const AttitudeMarginal& m) {
  const So3Quadrature& q = m.grid;
  int bia = 0, bib = 0, big = 0;
  double best = -1.0;
  for (int ia = 0; ia < q.n_alpha(); ++ia)
    for (int ib = 0; ib < q.n_beta(); ++ib)
      for (int ig = 0; ig < q.n_gamma(); ++ig) {
        const double v = m.values[q.index(ia, ib, ig)];
        if (v > best) {
          best = v;
          bia = ia;
          bib = ib;
          big = ig;
        }
      }
  auto value = [&](int ia, int ib, int ig) {
    const int na = q.n_alpha() - 1, ng2 = q.n_gamma() - 1;
    ia = ((ia % na) + na) % na;
    ig = ((ig % ng2) + ng2) % ng2;
    ib = std::clamp(ib, 0, q.n_beta() - 1);
    return m.values[q.index(ia, ib, ig)];
  };
  auto refine = [](double vm, double v0, double vp) {
    const double den = vm - 2.0 * v0 + vp;
    if (std::abs(den) < 1e-300) return 0.0;
    return std::clamp(0.5 * (vm - vp) / den, -0.5, 0.5);
  };
  const double da = q.alpha(1) - q.alpha(0);
  const double db = q.beta(1) - q.beta(0);
  const double dg = q.gamma(1) - q.gamma(0);
  const double oa = refine(value(bia - 1, bib, big), best,
                           value(bia + 1, bib, big));
  const double og = refine(value(bia, bib, big - 1), best,
                           value(bia, bib, big + 1));
  double ob = 0.0;
  if (bib > 0 && bib < q.n_beta() - 1) {
    ob = refine(value(bia, bib - 1, big), best, value(bia, bib + 1, big));
  }
  Euler313 e{wrap_2pi(q.alpha(bia) + oa * da),
             std::clamp(q.beta(bib) + ob * db, 0.0, kPi),
             wrap_2pi(q.gamma(big) + og * dg)};
  return euler313_to_rotation(e);
}

/// Rotation angle between two attitudes.
inline double rotation_distance(const Rotation& a, const Rotation& b) {
  const double c =
      std::clamp(((a.matrix().transpose() * b.matrix()).trace() - 1.0) / 2.0,
                 -1.0, 1.0);
  return std::acos(c);
}

}  // namespace so3prop
