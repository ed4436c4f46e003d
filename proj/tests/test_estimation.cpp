#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "so3prop/estimation.hpp"
#include "so3prop/marginals.hpp"

using namespace so3prop;

namespace {
std::mt19937 rng(550);

PendulumParams tame_pendulum() {
  return PendulumParams(Vec3(0.13, 0.28, 0.17).asDiagonal(), 1.0,
                        Vec3(0.0, 0.0, 0.03), 9.81);
}

GaussianParams tame_gaussian() {
  return GaussianParams{Vec3(1.0, 1.0, 1.0), 0.09 * Mat3::Identity()};
}

DensityGrid tame_prior(int na = 13, int nv = 9) {
  const So3Quadrature q(na, na, na);
  const VelocityGrid vg = VelocityGrid::centered(
      Vec3(1.0, 1.0, 1.0), Vec3(1.65, 1.65, 1.65), {nv, nv, nv});
  return init_density(VonMisesSo3Params{Rotation(), 8.0}, tame_gaussian(), q,
                      vg)
      .grid;
}

MeasurementModel model(double sd = 0.05, double so = 0.05) {
  return MeasurementModel(Vec3(0, 0, 1), sd * sd * Mat3::Identity(),
                          so * so * Mat3::Identity());
}
}  // namespace

TEST_CASE("measurement model predicts body-frame reference and velocity") {
  const MeasurementModel m = model();
  const Rotation R = exp_so3(Vec3(0.1, 0.4, -0.2));
  const Vec3 w(1.0, 2.0, 3.0);
  const auto z = m.predict(R, w);
  REQUIRE((z.head<3>() - R.matrix().transpose() * Vec3(0, 0, 1)).norm() ==
          0.0);
  REQUIRE((z.tail<3>() - w).norm() == 0.0);
  REQUIRE_THROWS_AS(MeasurementModel(Vec3(0, 0, 2), Mat3::Identity(),
                                     Mat3::Identity()),
                    NotUnit);
}

TEST_CASE("flat likelihood leaves the prior unchanged") {
  const DensityGrid prior = tame_prior(9, 5);
  // enormous covariances: likelihood is effectively constant on the support
  const MeasurementModel flat = model(1e6, 1e6);
  Measurement meas;
  meas.z = flat.predict(Rotation(), Vec3(1.0, 1.0, 1.0));
  const UpdateResult u = bayes_update(prior, flat, meas);
  double max_rel = 0.0;
  for (std::size_t i = 0; i < prior.values().size(); ++i) {
    if (prior.values()[i] < 1e-12) continue;
    max_rel = std::max(max_rel, std::abs(u.posterior.values()[i] -
                                         prior.values()[i]) /
                                    prior.values()[i]);
  }
  REQUIRE(max_rel < 1e-10);
}

TEST_CASE("flat prior makes the posterior proportional to the likelihood") {
  const So3Quadrature q(9, 9, 9);
  const VelocityGrid vg = VelocityGrid::centered(
      Vec3(1.0, 1.0, 1.0), Vec3(1.0, 1.0, 1.0), {5, 5, 5});
  DensityGrid prior(q, vg);
  for (double& v : prior.values()) v = 1.0 / 8.0;  // uniform joint density
  const MeasurementModel m = model(0.3, 0.3);
  Measurement meas;
  meas.z = m.predict(exp_so3(Vec3(0.2, 0.0, 0.1)), Vec3(1.0, 1.2, 0.8));
  const UpdateResult u = bayes_update(prior, m, meas);
  // posterior / likelihood should be a single constant
  double c0 = -1.0, max_rel = 0.0;
  std::size_t a = 0;
  for (int ia = 0; ia < 9; ++ia)
    for (int ib = 0; ib < 9; ++ib)
      for (int ig = 0; ig < 9; ++ig, ++a) {
        const Rotation R = q.rotation(ia, ib, ig);
        for (std::size_t v = 0; v < vg.size(); ++v) {
          const double lik = likelihood(m, meas, R, vg.point(v));
          if (lik < 1e-30) continue;
          const double ratio = u.posterior.at(a, v) / lik;
          if (c0 < 0.0) c0 = ratio;
          max_rel = std::max(max_rel, std::abs(ratio - c0) / c0);
        }
      }
  REQUIRE(max_rel < 1e-10);
}

TEST_CASE("posterior integrates to one and evidence is positive") {
  const DensityGrid prior = tame_prior(9, 5);
  const MeasurementModel m = model(0.2, 0.2);
  Measurement meas;
  meas.z = m.predict(Rotation(), Vec3(1.0, 1.0, 1.0));
  const UpdateResult u = bayes_update(prior, m, meas);
  REQUIRE(u.posterior.integral() == Catch::Approx(1.0).margin(1e-10));
  REQUIRE(u.evidence > 0.0);
}

TEST_CASE("impossible measurement raises a degenerate update") {
  const DensityGrid prior = tame_prior(9, 5);
  const MeasurementModel m = model(1e-4, 1e-4);
  Measurement meas;
  meas.z = m.predict(Rotation(), Vec3(-40.0, 0.0, 0.0));  // far outside box
  REQUIRE_THROWS_AS(bayes_update(prior, m, meas), DegenerateUpdate);
}

TEST_CASE("sharp direction measurement concentrates the measured axis") {
  const DensityGrid prior = tame_prior(13, 5);
  const MeasurementModel m = model(0.05, 10.0);
  Measurement meas;
  meas.z = m.predict(Rotation(), Vec3(1.0, 1.0, 1.0));
  const UpdateResult u = bayes_update(prior, m, meas);
  const double before =
      sphere_marginal(attitude_marginal(prior), 3, 33, 65, 24)
          .circular_variance();
  const double after =
      sphere_marginal(attitude_marginal(u.posterior), 3, 33, 65, 24)
          .circular_variance();
  REQUIRE(after < before);
}

TEST_CASE("argmax recovers the mode of a concentrated marginal") {
  const Rotation mean = exp_so3(Vec3(0.25, -0.15, 0.35));
  const So3Quadrature q(21, 21, 21);
  AttitudeMarginal m{q, std::vector<double>(q.size(), 0.0)};
  const Mat3 mt = mean.matrix().transpose();
  std::size_t a = 0;
  for (int ia = 0; ia < 21; ++ia)
    for (int ib = 0; ib < 21; ++ib)
      for (int ig = 0; ig < 21; ++ig, ++a) {
        m.values[a] = std::exp(
            8.0 * 0.5 *
            ((mt * q.rotation(ia, ib, ig).matrix()).trace() - 1.0));
      }
  const Rotation mode = argmax_attitude(m);
  REQUIRE(rotation_distance(mode, mean) < 0.1);
}

TEST_CASE("estimate cycle with no measurements is the identity") {
  DensityGrid prior = tame_prior(9, 5);
  const CycleResult r =
      estimate_cycle(prior, tame_pendulum(), StepConfig{}, model(), {});
  REQUIRE(r.evidences.empty());
  REQUIRE(r.final_posterior.values() == prior.values());
}

TEST_CASE("estimate cycle rejects out-of-order measurements") {
  DensityGrid prior = tame_prior(9, 5);
  const MeasurementModel m = model(0.3, 0.3);
  Measurement m1, m2;
  m1.z = m.predict(Rotation(), Vec3(1, 1, 1));
  m1.timestamp = 4;
  m2.z = m1.z;
  m2.timestamp = 2;
  REQUIRE_THROWS_AS(estimate_cycle(prior, tame_pendulum(), StepConfig{}, m,
                                   {m1, m2}),
                    ConfigError);
}

TEST_CASE("cycle posteriors stay normalized and evidences are recorded") {
  DensityGrid prior = tame_prior(9, 7);
  const PendulumParams p = tame_pendulum();
  const MeasurementModel m = model(0.3, 0.3);
  // measurements along the true trajectory from the prior mean
  RigidBodyState truth{Rotation(), Vec3(1.0, 1.0, 1.0)};
  std::vector<Measurement> ms;
  StepConfig c;
  RigidBodyState s = truth;
  for (int k = 1; k <= 3; ++k) {
    s = step(s, p, c);
    Measurement meas;
    meas.z = m.predict(s.attitude, s.omega);
    meas.timestamp = k;
    ms.push_back(meas);
  }
  int count = 0;
  const CycleResult r = estimate_cycle(
      prior, p, c, m, ms, PropagateOptions{},
      [&](const DensityGrid& post, double ev) {
        ++count;
        REQUIRE(post.integral() == Catch::Approx(1.0).margin(1e-10));
        REQUIRE(ev > 0.0);
      });
  REQUIRE(count == 3);
  REQUIRE(r.evidences.size() == 3);
}
