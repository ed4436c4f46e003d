#pragma once

// Attitude marginal and the per-axis sphere marginals used to visualize
// attitude uncertainty on three copies of S^2.

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "so3prop/core.hpp"
#include "so3prop/density.hpp"
#include "so3prop/parallel.hpp"

namespace so3prop {

/// p_R(R) = int p(R,Omega) dOmega on the attitude quadrature nodes.
struct AttitudeMarginal {
  So3Quadrature grid;
  std::vector<double> values;  // one per attitude node

  double integral() const {
    double s = 0.0;
    std::size_t a = 0;
    for (int ia = 0; ia < grid.n_alpha(); ++ia)
      for (int ib = 0; ib < grid.n_beta(); ++ib)
        for (int ig = 0; ig < grid.n_gamma(); ++ig, ++a)
          s += grid.weight(ia, ib, ig) * values[a];
    return s;
  }

  /// Trilinear interpolation with the same wrap conventions as the density.
  double evaluate(const Rotation& R) const {
    const Euler313 e = rotation_to_euler313(R);
    const auto ai = detail::interp_periodic(wrap_2pi(e.alpha), 0.0,
                                            grid.alpha(1) - grid.alpha(0),
                                            grid.n_alpha());
    const auto bi = detail::interp_clamped(e.beta, 0.0,
                                           grid.beta(1) - grid.beta(0),
                                           grid.n_beta());
    const auto gi = detail::interp_periodic(wrap_2pi(e.gamma), 0.0,
                                            grid.gamma(1) - grid.gamma(0),
                                            grid.n_gamma());
    double acc = 0.0;
    for (int ca = 0; ca < 2; ++ca)
      for (int cb = 0; cb < 2; ++cb)
        for (int cg = 0; cg < 2; ++cg) {
          const double w = (ca ? ai.w1 : ai.w0) * (cb ? bi.w1 : bi.w0) *
                           (cg ? gi.w1 : gi.w0);
          if (w == 0.0) continue;
          acc += w * values[grid.index(ca ? ai.i1 : ai.i0,
                                       cb ? bi.i1 : bi.i0,
                                       cg ? gi.i1 : gi.i0)];
        }
    return acc;
  }
};

inline AttitudeMarginal attitude_marginal(const DensityGrid& d,
                                          int workers = 1) {
  const So3Quadrature& q = d.attitude_grid();
  const VelocityGrid& vg = d.velocity_grid();
  AttitudeMarginal out{q, std::vector<double>(q.size(), 0.0)};
  const std::size_t nv = vg.size();
  std::vector<double> wv(nv);
  for (std::size_t v = 0; v < nv; ++v) wv[v] = vg.weight(v);
  parallel_for(q.size(), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t a = b; a < e; ++a) {
      double acc = 0.0;
      for (std::size_t v = 0; v < nv; ++v) acc += wv[v] * d.at(a, v);
      out.values[a] = acc;
    }
  });
  return out;
}

/// Marginal density of the i-th body axis direction on an equiangular
/// latitude x longitude sphere grid.  Normalized so that
/// int_{S^2} p dA = 1 when the attitude marginal integrates to 1.
struct SphereMarginal {
  int axis;  // 1..3
  int n_lat, n_lon;
  std::vector<double> values;  // row-major (lat, lon)

  double colatitude(int i) const { return kPi * i / (n_lat - 1); }
  double longitude(int j) const { return kTwoPi * j / (n_lon - 1); }
  Vec3 direction(int i, int j) const {
    const double th = colatitude(i), ph = longitude(j);
    return Vec3(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                std::cos(th));
  }
  double value(int i, int j) const { return values[std::size_t(i) * n_lon + j]; }

  /// Area-weighted integral over the sphere (trapezoid in longitude,
  /// sin(colatitude)-weighted trapezoid in colatitude).
  double integral() const {
    const double dth = kPi / (n_lat - 1);
    const double dph = kTwoPi / (n_lon - 1);
    double s = 0.0;
    for (int i = 0; i < n_lat; ++i) {
      const double wi = (i == 0 || i == n_lat - 1) ? 0.5 : 1.0;
      for (int j = 0; j < n_lon; ++j) {
        const double wj = (j == 0 || j == n_lon - 1) ? 0.5 : 1.0;
        s += wi * wj * std::sin(colatitude(i)) * value(i, j);
      }
    }
    return s * dth * dph;
  }

  /// 1 - |resultant|: zero for a point mass, maximal for uniform spread.
  double circular_variance() const {
    const double dth = kPi / (n_lat - 1);
    const double dph = kTwoPi / (n_lon - 1);
    Vec3 r = Vec3::Zero();
    double mass = 0.0;
    for (int i = 0; i < n_lat; ++i) {
      const double wi = (i == 0 || i == n_lat - 1) ? 0.5 : 1.0;
      for (int j = 0; j < n_lon; ++j) {
        const double wj = (j == 0 || j == n_lon - 1) ? 0.5 : 1.0;
        const double w =
            wi * wj * std::sin(colatitude(i)) * value(i, j) * dth * dph;
        r += w * direction(i, j);
        mass += w;
      }
    }
    if (mass <= 0.0) return 1.0;
    return 1.0 - r.norm() / mass;
  }

  Vec3 argmax_direction() const {
    int bi = 0, bj = 0;
    double best = -1.0;
    for (int i = 0; i < n_lat; ++i)
      for (int j = 0; j < n_lon; ++j)
        if (value(i, j) > best) {
          best = value(i, j);
          bi = i;
          bj = j;
        }
    return direction(bi, bj);
  }
};

/// p_R^i(r) = (1/4pi) avg_theta p_R(R_i(r) exp(theta e_i)); the circle
/// average over the stabilizer of r, divided by the sphere area so the
/// marginal integrates to 1.
inline SphereMarginal sphere_marginal(const AttitudeMarginal& m, int axis,
                                      int n_lat = 65, int n_lon = 129,
                                      int n_theta = 64, int workers = 1) {
  if (n_theta < 8) throw ConfigError("sphere_marginal: n_theta must be >= 8");
  SphereMarginal out{axis, n_lat, n_lon,
                     std::vector<double>(std::size_t(n_lat) * n_lon, 0.0)};
  const Vec3 ei = axis_vector(axis);
  parallel_for(std::size_t(n_lat) * n_lon, workers,
               [&](std::size_t b, std::size_t e) {
    for (std::size_t idx = b; idx < e; ++idx) {
      const int i = int(idx / n_lon), j = int(idx % n_lon);
      const Vec3 r = out.direction(i, j);
      const Rotation rep = coset_representative(axis, r);
      double acc = 0.0;
      for (int t = 0; t < n_theta; ++t) {
        const double th = kTwoPi * t / n_theta;
        acc += m.evaluate(rep * exp_so3(th * ei));
      }
      out.values[idx] = acc / n_theta / (4.0 * kPi);
    }
  });
  return out;
}

/// CSV columns: colatitude, longitude, x, y, z, density; rows ordered by
/// latitude then longitude.
inline void export_sphere(const SphereMarginal& s, std::ostream& os,
                          const std::string& header_extra = "") {
  if (!header_extra.empty()) os << "# " << header_extra << "\n";
  os << "colatitude,longitude,x,y,z,density\n";
  os.precision(17);
  for (int i = 0; i < s.n_lat; ++i) {
    for (int j = 0; j < s.n_lon; ++j) {
      const Vec3 r = s.direction(i, j);
      os << s.colatitude(i) << "," << s.longitude(j) << "," << r.x() << ","
         << r.y() << "," << r.z() << "," << s.value(i, j) << "\n";
    }
  }
}

inline void export_sphere(const SphereMarginal& s, const std::string& path,
                          const std::string& header_extra = "") {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("export_sphere: cannot open " + path);
  export_sphere(s, os, header_extra);
}

}  // namespace so3prop
