#pragma once

// Joint densities on SO(3) x R^3: grid representation, von Mises / Gaussian
// initialization, Liouville pull-back propagation along the variational
// integrator flow, and the per-velocity-node attitude spectra.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "so3prop/core.hpp"
#include "so3prop/dynamics.hpp"
#include "so3prop/errors.hpp"
#include "so3prop/harmonic.hpp"
#include "so3prop/parallel.hpp"

namespace so3prop {

/// Cartesian product grid over a velocity box, composite Simpson weights per
/// axis.  Node counts must be odd.
class VelocityGrid {
 public:
  VelocityGrid(const Vec3& box_min, const Vec3& box_max,
               const std::array<int, 3>& counts)
      : min_(box_min), max_(box_max), n_(counts) {
    for (int a = 0; a < 3; ++a) {
      if (n_[a] < 3 || n_[a] % 2 == 0) {
        throw ConfigError("VelocityGrid: node counts must be odd and >= 3");
      }
      if (!(max_(a) > min_(a))) {
        throw ConfigError("VelocityGrid: empty box");
      }
      spacing_[a] = (max_(a) - min_(a)) / (n_[a] - 1);
      weights_[a] = detail::simpson_weights(n_[a], spacing_[a]);
    }
  }

  static VelocityGrid centered(const Vec3& center, const Vec3& half_width,
                               const std::array<int, 3>& counts) {
    return VelocityGrid(center - half_width, center + half_width, counts);
  }

  const Vec3& box_min() const { return min_; }
  const Vec3& box_max() const { return max_; }
  Vec3 center() const { return 0.5 * (min_ + max_); }
  Vec3 half_width() const { return 0.5 * (max_ - min_); }
  int count(int axis) const { return n_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  std::size_t size() const {
    return std::size_t(n_[0]) * n_[1] * n_[2];
  }

  double node(int axis, int i) const { return min_(axis) + i * spacing_[axis]; }
  Vec3 point(int i, int j, int k) const {
    return Vec3(node(0, i), node(1, j), node(2, k));
  }
  std::size_t index(int i, int j, int k) const {
    return (std::size_t(i) * n_[1] + j) * n_[2] + k;
  }
  Vec3 point(std::size_t idx) const {
    const int k = int(idx % n_[2]);
    const int j = int((idx / n_[2]) % n_[1]);
    const int i = int(idx / (std::size_t(n_[1]) * n_[2]));
    return point(i, j, k);
  }
  double weight(int i, int j, int k) const {
    return weights_[0][i] * weights_[1][j] * weights_[2][k];
  }
  double weight(std::size_t idx) const {
    const int k = int(idx % n_[2]);
    const int j = int((idx / n_[2]) % n_[1]);
    const int i = int(idx / (std::size_t(n_[1]) * n_[2]));
    return weight(i, j, k);
  }

  bool contains(const Vec3& v) const {
    for (int a = 0; a < 3; ++a) {
      if (v(a) < min_(a) || v(a) > max_(a)) return false;
    }
    return true;
  }

 private:
  Vec3 min_, max_;
  std::array<int, 3> n_;
  std::array<double, 3> spacing_;
  std::array<std::vector<double>, 3> weights_;
};

struct VonMisesSo3Params {
  Rotation mean;
  double kappa = 1.0;
};

struct GaussianParams {
  Vec3 mean = Vec3::Zero();
  Mat3 cov = Mat3::Identity();
};

/// Sampled joint density; values laid out attitude-major:
/// values[att_index * n_velocity + vel_index].
class DensityGrid {
 public:
  DensityGrid(So3Quadrature att, VelocityGrid vel)
      : att_(std::move(att)), vel_(std::move(vel)),
        values_(att_.size() * vel_.size(), 0.0) {}

  const So3Quadrature& attitude_grid() const { return att_; }
  const VelocityGrid& velocity_grid() const { return vel_; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  double& at(std::size_t att_idx, std::size_t vel_idx) {
    return values_[att_idx * vel_.size() + vel_idx];
  }
  double at(std::size_t att_idx, std::size_t vel_idx) const {
    return values_[att_idx * vel_.size() + vel_idx];
  }

  int timestamp() const { return timestamp_; }
  void set_timestamp(int k) { timestamp_ = k; }

  /// Mean state of the represented density, advanced by the flow during
  /// propagation; used to recenter the velocity box.
  const RigidBodyState& mean_state() const { return mean_; }
  void set_mean_state(const RigidBodyState& s) { mean_ = s; }

  double integral(int workers = 1) const {
    const std::size_t nv = vel_.size();
    return parallel_sum(att_.size(), workers, [&](std::size_t a) {
      const int ng = att_.n_gamma(), nb = att_.n_beta();
      const int ig = int(a % ng);
      const int ib = int((a / ng) % nb);
      const int ia = int(a / (std::size_t(nb) * ng));
      const double wa = att_.weight(ia, ib, ig);
      double acc = 0.0;
      for (std::size_t v = 0; v < nv; ++v) {
        acc += vel_.weight(v) * values_[a * nv + v];
      }
      return wa * acc;
    });
  }

  /// Scales so the integral is 1; returns the divisor.
  double normalize(int workers = 1) {
    const double z = integral(workers);
    if (!(z > 0.0)) throw DegenerateUpdate("normalize: nonpositive integral");
    for (double& v : values_) v /= z;
    return z;
  }

 private:
  So3Quadrature att_;
  VelocityGrid vel_;
  std::vector<double> values_;
  int timestamp_ = 0;
  RigidBodyState mean_;
};

namespace detail {

struct AxisInterp {
  int i0, i1;
  double w0, w1;
};

inline AxisInterp interp_periodic(double x, double lo, double spacing, int n) {
  // nodes cover [lo, lo + (n-1) spacing] with first/last identified
  double t = (x - lo) / spacing;
  int i = int(std::floor(t));
  double f = t - i;
  i = ((i % (n - 1)) + (n - 1)) % (n - 1);
  return {i, i + 1, 1.0 - f, f};
}

inline AxisInterp interp_clamped(double x, double lo, double spacing, int n) {
  double t = (x - lo) / spacing;
  int i = int(std::floor(t));
  if (i < 0) return {0, 1, 1.0, 0.0};
  if (i >= n - 1) return {n - 2, n - 1, 0.0, 1.0};
  double f = t - i;
  return {i, i + 1, 1.0 - f, f};
}

}  // namespace detail

/// Trilinear x trilinear interpolation in (alpha,beta,gamma) x Omega with
/// periodic wrap in alpha and gamma and clamped beta.  Exact at nodes.
/// Throws OutOfSupport when Omega leaves the box.
inline double evaluate(const DensityGrid& d, const Rotation& R,
                       const Vec3& omega) {
  const VelocityGrid& vg = d.velocity_grid();
  if (!vg.contains(omega)) {
    throw OutOfSupport("evaluate: velocity outside grid box");
  }
  const So3Quadrature& q = d.attitude_grid();
  const Euler313 e = rotation_to_euler313(R);
  const auto ai = detail::interp_periodic(wrap_2pi(e.alpha), 0.0,
                                          q.alpha(1) - q.alpha(0),
                                          q.n_alpha());
  const auto bi = detail::interp_clamped(e.beta, 0.0, q.beta(1) - q.beta(0),
                                         q.n_beta());
  const auto gi = detail::interp_periodic(wrap_2pi(e.gamma), 0.0,
                                          q.gamma(1) - q.gamma(0),
                                          q.n_gamma());
  std::array<detail::AxisInterp, 3> vi;
  for (int a = 0; a < 3; ++a) {
    vi[a] = detail::interp_clamped(omega(a), vg.box_min()(a), vg.spacing(a),
                                   vg.count(a));
  }
  const std::size_t nv = vg.size();
  double acc = 0.0;
  for (int ca = 0; ca < 2; ++ca) {
    for (int cb = 0; cb < 2; ++cb) {
      for (int cg = 0; cg < 2; ++cg) {
        const double watt = (ca ? ai.w1 : ai.w0) * (cb ? bi.w1 : bi.w0) *
                            (cg ? gi.w1 : gi.w0);
        if (watt == 0.0) continue;
        const std::size_t a = q.index(ca ? ai.i1 : ai.i0, cb ? bi.i1 : bi.i0,
                                      cg ? gi.i1 : gi.i0);
        for (int c0 = 0; c0 < 2; ++c0) {
          for (int c1 = 0; c1 < 2; ++c1) {
            for (int c2 = 0; c2 < 2; ++c2) {
              const double wv = (c0 ? vi[0].w1 : vi[0].w0) *
                                (c1 ? vi[1].w1 : vi[1].w0) *
                                (c2 ? vi[2].w1 : vi[2].w0);
              if (wv == 0.0) continue;
              const std::size_t v = vg.index(c0 ? vi[0].i1 : vi[0].i0,
                                             c1 ? vi[1].i1 : vi[1].i0,
                                             c2 ? vi[2].i1 : vi[2].i0);
              acc += watt * wv * d.values()[a * nv + v];
            }
          }
        }
      }
    }
  }
  return acc;
}

struct InitResult {
  DensityGrid grid;
  double scale_c;  // integral of the unnormalized product density
};

/// Gaussian mass outside the box, per-axis union bound with the marginal
/// standard deviations.
inline double gaussian_mass_outside_box(const GaussianParams& gp,
                                        const VelocityGrid& vg) {
  double out = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double s = std::sqrt(gp.cov(a, a));
    const double zl = (gp.mean(a) - vg.box_min()(a)) / s;
    const double zh = (vg.box_max()(a) - gp.mean(a)) / s;
    out += 0.5 * std::erfc(zl / std::sqrt(2.0));
    out += 0.5 * std::erfc(zh / std::sqrt(2.0));
  }
  return out;
}

/// Product of the SO(3) von Mises factor exp(kappa (tr(Rbar^T R) - 1) / 2)
/// and the velocity Gaussian, normalized on the grid.
inline InitResult init_density(const VonMisesSo3Params& vm,
                               const GaussianParams& gp,
                               const So3Quadrature& att,
                               const VelocityGrid& vel, int workers = 1) {
  if (!(vm.kappa > 0.0)) throw ConfigError("init_density: kappa must be > 0");
  const double tail = gaussian_mass_outside_box(gp, vel);
  if (tail > 1e-6) {
    throw BoxTooSmall("init_density: Gaussian mass outside velocity box " +
                      std::to_string(tail) + " exceeds 1e-6");
  }
  DensityGrid grid(att, vel);
  const Mat3 prec = gp.cov.ldlt().solve(Mat3::Identity());
  const Mat3 mbar_t = vm.mean.matrix().transpose();
  const std::size_t nv = vel.size();
  std::vector<double> velf(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    const Vec3 dx = vel.point(v) - gp.mean;
    velf[v] = std::exp(-0.5 * dx.dot(prec * dx));
  }
  const int nb = att.n_beta(), ng = att.n_gamma();
  parallel_for(att.size(), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t a = b; a < e; ++a) {
      const int ig = int(a % ng);
      const int ib = int((a / ng) % nb);
      const int ia = int(a / (std::size_t(nb) * ng));
      const Rotation R = att.rotation(ia, ib, ig);
      const double attf =
          std::exp(0.5 * vm.kappa * ((mbar_t * R.matrix()).trace() - 1.0));
      for (std::size_t v = 0; v < nv; ++v) {
        grid.at(a, v) = attf * velf[v];
      }
    }
  });
  const double c = grid.normalize(workers);
  grid.set_mean_state(RigidBodyState{vm.mean, gp.mean});
  grid.set_timestamp(0);
  return InitResult{std::move(grid), c};
}

struct PropagateOptions {
  bool recenter = true;   // translate the velocity box by the flowed mean
  int workers = 1;
  bool renormalize = false;  // explicit flag; escaped mass is never masked
};

struct PropagateResult {
  DensityGrid grid;
  double escaped_weight;  // quadrature weight of out-of-support nodes
  double mass;            // integral of the propagated grid (pre-renormalize)
};

/// Liouville pull-back: each output node takes the interpolated value of the
/// input density at its k-step backward image.  Out-of-support nodes get 0.
inline PropagateResult propagate(const DensityGrid& d,
                                 const PendulumParams& p, const StepConfig& c,
                                 int k_steps,
                                 const PropagateOptions& opts = {}) {
  const So3Quadrature& q = d.attitude_grid();
  const VelocityGrid& vg = d.velocity_grid();
  RigidBodyState mean1 = flow(d.mean_state(), p, c, k_steps);
  VelocityGrid out_vel =
      opts.recenter
          ? VelocityGrid::centered(mean1.omega, vg.half_width(),
                                   {vg.count(0), vg.count(1), vg.count(2)})
          : vg;
  DensityGrid out(q, out_vel);
  out.set_timestamp(d.timestamp() + k_steps);
  out.set_mean_state(mean1);

  const std::size_t nv = out_vel.size();
  const int nb = q.n_beta(), ng = q.n_gamma();
  const std::size_t nchunks =
      (q.size() + kParallelChunk - 1) / kParallelChunk;
  std::vector<double> escaped(nchunks, 0.0);
  parallel_for(q.size(), opts.workers, [&](std::size_t b, std::size_t e) {
    double esc = 0.0;
    for (std::size_t a = b; a < e; ++a) {
      const int ig = int(a % ng);
      const int ib = int((a / ng) % nb);
      const int ia = int(a / (std::size_t(nb) * ng));
      const Rotation R = q.rotation(ia, ib, ig);
      const double wa = q.weight(ia, ib, ig);
      for (std::size_t v = 0; v < nv; ++v) {
        RigidBodyState s{R, out_vel.point(v)};
        s = backward_flow(s, p, c, k_steps);
        if (!vg.contains(s.omega)) {
          out.at(a, v) = 0.0;
          esc += wa * out_vel.weight(v);
        } else {
          out.at(a, v) = evaluate(d, s.attitude, s.omega);
        }
      }
    }
    escaped[b / kParallelChunk] = esc;
  });
  double escaped_total = 0.0;
  for (double v : escaped) escaped_total += v;
  const double mass = out.integral(opts.workers);
  if (opts.renormalize) out.normalize(opts.workers);
  return PropagateResult{std::move(out), escaped_total, mass};
}

/// Closed-form initial density (von Mises x Gaussian, normalized on a grid),
/// evaluable anywhere; lets long pull-backs bypass grid interpolation.
struct InitialDensity {
  VonMisesSo3Params attitude;
  GaussianParams velocity;
  double scale_c = 1.0;  // grid normalization constant from init_density
  RigidBodyState mean;

  double value(const Rotation& R, const Vec3& omega) const {
    const double attf = std::exp(
        0.5 * attitude.kappa *
        ((attitude.mean.matrix().transpose() * R.matrix()).trace() - 1.0));
    const Vec3 dx = omega - velocity.mean;
    const Mat3 prec = velocity.cov.ldlt().solve(Mat3::Identity());
    return attf * std::exp(-0.5 * dx.dot(prec * dx)) / scale_c;
  }
};

inline InitialDensity make_initial_density(const VonMisesSo3Params& vm,
                                           const GaussianParams& gp,
                                           double scale_c) {
  return InitialDensity{vm, gp, scale_c,
                        RigidBodyState{vm.mean, gp.mean}};
}

/// Liouville pull-back straight from the closed-form initial density:
/// p_k(x) = p_0(Phi^{-k}(x)) with p_0 evaluated exactly (no interpolation).
inline PropagateResult propagate_exact(const InitialDensity& p0,
                                       const So3Quadrature& q,
                                       const VelocityGrid& vg0,
                                       const PendulumParams& p,
                                       const StepConfig& c, int k_steps,
                                       const PropagateOptions& opts = {}) {
  const RigidBodyState mean1 = flow(p0.mean, p, c, k_steps);
  const VelocityGrid out_vel =
      opts.recenter
          ? VelocityGrid::centered(mean1.omega, vg0.half_width(),
                                   {vg0.count(0), vg0.count(1), vg0.count(2)})
          : vg0;
  DensityGrid out(q, out_vel);
  out.set_timestamp(k_steps);
  out.set_mean_state(mean1);
  const Mat3 prec = p0.velocity.cov.ldlt().solve(Mat3::Identity());
  const Mat3 mbar_t = p0.attitude.mean.matrix().transpose();
  const std::size_t nv = out_vel.size();
  const int nb = q.n_beta(), ng = q.n_gamma();
  parallel_for(q.size(), opts.workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t a = b; a < e; ++a) {
      const int ig = int(a % ng);
      const int ib = int((a / ng) % nb);
      const int ia = int(a / (std::size_t(nb) * ng));
      const Rotation R = q.rotation(ia, ib, ig);
      for (std::size_t v = 0; v < nv; ++v) {
        RigidBodyState s{R, out_vel.point(v)};
        s = backward_flow(s, p, c, k_steps);
        const double attf = std::exp(
            0.5 * p0.attitude.kappa *
            ((mbar_t * s.attitude.matrix()).trace() - 1.0));
        const Vec3 dx = s.omega - p0.velocity.mean;
        out.at(a, v) =
            attf * std::exp(-0.5 * dx.dot(prec * dx)) / p0.scale_c;
      }
    }
  });
  const double mass = out.integral(opts.workers);
  if (opts.renormalize) out.normalize(opts.workers);
  return PropagateResult{std::move(out), 0.0, mass};
}

/// Attitude Fourier spectra, one per velocity node.
inline std::vector<So3Spectrum> attitude_spectrum(const DensityGrid& d, int L,
                                                  int workers = 1) {
  const So3Quadrature& q = d.attitude_grid();
  const std::size_t nv = d.velocity_grid().size();
  std::vector<So3Spectrum> out;
  out.reserve(nv);
  std::vector<double> samples(q.size());
  for (std::size_t v = 0; v < nv; ++v) {
    for (std::size_t a = 0; a < q.size(); ++a) samples[a] = d.at(a, v);
    out.push_back(forward_transform(samples, L, q, workers));
  }
  return out;
}

/// Plain DFT of the per-node spectra over the velocity grid; realizes the
/// velocity Fourier parameter on the dual grid.
struct VelocitySpectrum {
  std::array<int, 3> counts;
  Vec3 box_min;
  Vec3 spacing;
  std::vector<So3Spectrum> coeff;  // frequency-major, same layout as nodes

  /// Dual-grid frequency vector of coefficient (k0,k1,k2), centered.
  Vec3 theta(int k0, int k1, int k2) const {
    auto f = [&](int k, int n, double dx) {
      int kk = k <= n / 2 ? k : k - n;
      return kTwoPi * kk / (n * dx);
    };
    return Vec3(f(k0, counts[0], spacing(0)), f(k1, counts[1], spacing(1)),
                f(k2, counts[2], spacing(2)));
  }
};

inline VelocitySpectrum velocity_dft(const std::vector<So3Spectrum>& spectra,
                                     const VelocityGrid& vg) {
  if (spectra.size() != vg.size()) {
    throw ConfigError("velocity_dft: spectra count does not match grid");
  }
  const int L = spectra.empty() ? 0 : spectra.front().L;
  VelocitySpectrum out;
  out.counts = {vg.count(0), vg.count(1), vg.count(2)};
  out.box_min = vg.box_min();
  out.spacing = Vec3(vg.spacing(0), vg.spacing(1), vg.spacing(2));
  out.coeff.assign(vg.size(), So3Spectrum(L));
  const int n0 = out.counts[0], n1 = out.counts[1], n2 = out.counts[2];
  const double norm = 1.0 / double(vg.size());
  for (int k0 = 0; k0 < n0; ++k0)
    for (int k1 = 0; k1 < n1; ++k1)
      for (int k2 = 0; k2 < n2; ++k2) {
        So3Spectrum& acc = out.coeff[vg.index(k0, k1, k2)];
        for (int v0 = 0; v0 < n0; ++v0)
          for (int v1 = 0; v1 < n1; ++v1)
            for (int v2 = 0; v2 < n2; ++v2) {
              const double ph = -kTwoPi * (double(k0) * v0 / n0 +
                                           double(k1) * v1 / n1 +
                                           double(k2) * v2 / n2);
              const Complex z = norm * std::exp(Complex(0.0, ph));
              const So3Spectrum& s = spectra[vg.index(v0, v1, v2)];
              for (int l = 0; l <= L; ++l) acc.P[l] += z * s.P[l];
            }
      }
  return out;
}

/// Truncated Peter-Weyl sum in R composed with trigonometric interpolation of
/// the inverse DFT in Omega.
inline double reconstruct(const VelocitySpectrum& vs, const Rotation& R,
                          const Vec3& omega) {
  const int L = vs.coeff.empty() ? 0 : vs.coeff.front().L;
  So3Spectrum at_omega(L);
  const int n0 = vs.counts[0], n1 = vs.counts[1], n2 = vs.counts[2];
  const Vec3 t((omega - vs.box_min).cwiseQuotient(vs.spacing));
  auto phase = [](int k, int n, double tv) {
    const int kk = k <= n / 2 ? k : k - n;
    return kTwoPi * kk * tv / n;
  };
  for (int k0 = 0; k0 < n0; ++k0)
    for (int k1 = 0; k1 < n1; ++k1)
      for (int k2 = 0; k2 < n2; ++k2) {
        const double ph = phase(k0, n0, t(0)) + phase(k1, n1, t(1)) +
                          phase(k2, n2, t(2));
        const Complex z = std::exp(Complex(0.0, ph));
        const So3Spectrum& s =
            vs.coeff[(std::size_t(k0) * n1 + k1) * n2 + k2];
        for (int l = 0; l <= L; ++l) at_omega.P[l] += z * s.P[l];
      }
  return inverse_transform(at_omega, R);
}

/// Per-node reconstruction: Peter-Weyl sum of the spectrum attached to one
/// velocity node.
inline double reconstruct(const std::vector<So3Spectrum>& spectra,
                          const Rotation& R, std::size_t vel_idx) {
  return inverse_transform(spectra[vel_idx], R);
}

// ---------------------------------------------------------------------------
// Serialization: self-describing binary (grid descriptors + value array,
// little-endian 64-bit floats) and CSV slice export.

inline constexpr char kDensityMagic[8] = {'S', 'O', '3', 'D', 'E', 'N', 'S',
                                          '1'};

namespace detail {
template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}
}  // namespace detail

inline void write_density(const DensityGrid& d, std::ostream& os,
                          std::uint64_t config_hash = 0,
                          std::uint32_t tool_version = 1) {
  os.write(kDensityMagic, 8);
  detail::put<std::uint32_t>(os, tool_version);
  detail::put<std::uint64_t>(os, config_hash);
  detail::put<std::int64_t>(os, d.timestamp());
  const So3Quadrature& q = d.attitude_grid();
  detail::put<std::int32_t>(os, q.n_alpha());
  detail::put<std::int32_t>(os, q.n_beta());
  detail::put<std::int32_t>(os, q.n_gamma());
  detail::put<std::int32_t>(
      os, q.beta_scheme() == BetaScheme::kClenshawCurtis ? 0 : 1);
  const VelocityGrid& vg = d.velocity_grid();
  for (int a = 0; a < 3; ++a) {
    detail::put<double>(os, vg.box_min()(a));
    detail::put<double>(os, vg.box_max()(a));
    detail::put<std::int32_t>(os, vg.count(a));
  }
  const Mat3& m = d.mean_state().attitude.matrix();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) detail::put<double>(os, m(i, j));
  for (int a = 0; a < 3; ++a) detail::put<double>(os, d.mean_state().omega(a));
  detail::put<std::uint64_t>(os, d.values().size());
  os.write(reinterpret_cast<const char*>(d.values().data()),
           std::streamsize(d.values().size() * sizeof(double)));
}

inline DensityGrid read_density(std::istream& is,
                                std::uint64_t* config_hash = nullptr) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::string(magic, 8) != std::string(kDensityMagic, 8)) {
    throw ConfigError("read_density: bad magic");
  }
  (void)detail::get<std::uint32_t>(is);  // tool version
  const std::uint64_t hash = detail::get<std::uint64_t>(is);
  if (config_hash) *config_hash = hash;
  const std::int64_t ts = detail::get<std::int64_t>(is);
  const int na = detail::get<std::int32_t>(is);
  const int nb = detail::get<std::int32_t>(is);
  const int ng = detail::get<std::int32_t>(is);
  const int scheme = detail::get<std::int32_t>(is);
  So3Quadrature q(na, nb, ng,
                  scheme == 0 ? BetaScheme::kClenshawCurtis
                              : BetaScheme::kSimpson);
  Vec3 mn, mx;
  std::array<int, 3> counts{};
  for (int a = 0; a < 3; ++a) {
    mn(a) = detail::get<double>(is);
    mx(a) = detail::get<double>(is);
    counts[a] = detail::get<std::int32_t>(is);
  }
  VelocityGrid vg(mn, mx, counts);
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = detail::get<double>(is);
  Vec3 om;
  for (int a = 0; a < 3; ++a) om(a) = detail::get<double>(is);
  const std::uint64_t count = detail::get<std::uint64_t>(is);
  DensityGrid d(q, vg);
  if (count != d.values().size()) {
    throw ConfigError("read_density: value count mismatch");
  }
  is.read(reinterpret_cast<char*>(d.values().data()),
          std::streamsize(count * sizeof(double)));
  if (!is) throw ConfigError("read_density: truncated stream");
  d.set_timestamp(int(ts));
  d.set_mean_state(RigidBodyState{Rotation(m), om});
  return d;
}

/// CSV of the attitude slice at one velocity node.
inline void export_attitude_slice(const DensityGrid& d, std::size_t vel_idx,
                                  std::ostream& os,
                                  const std::string& header_extra = "") {
  const So3Quadrature& q = d.attitude_grid();
  if (!header_extra.empty()) os << "# " << header_extra << "\n";
  os << "alpha,beta,gamma,density\n";
  os.precision(17);
  for (int ia = 0; ia < q.n_alpha(); ++ia)
    for (int ib = 0; ib < q.n_beta(); ++ib)
      for (int ig = 0; ig < q.n_gamma(); ++ig) {
        os << q.alpha(ia) << "," << q.beta(ib) << "," << q.gamma(ig) << ","
           << d.at(q.index(ia, ib, ig), vel_idx) << "\n";
      }
}

}  // namespace so3prop
