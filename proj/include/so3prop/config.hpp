#pragma once

// Run configuration: flat dotted-key text files, validation with field-path
// messages, and a content hash stamped into every output.

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "so3prop/core.hpp"
#include "so3prop/density.hpp"
#include "so3prop/dynamics.hpp"
#include "so3prop/estimation.hpp"
#include "so3prop/harmonic.hpp"

namespace so3prop {

inline constexpr std::uint32_t kToolVersion = 1;

struct RunConfig {
  PendulumParams pendulum = PendulumParams::reference_pendulum();
  StepConfig step;

  std::array<int, 3> attitude_counts{21, 21, 21};
  BetaScheme beta_scheme = BetaScheme::kClenshawCurtis;
  std::array<int, 3> velocity_counts{9, 9, 9};
  Vec3 velocity_half_width = Vec3(0.8484, 0.8484, 0.8484);  // 6 sigma default

  double kappa = 8.0;
  Euler313 mean_euler{};                      // Rbar0
  Vec3 omega_mean = Vec3(4.14, 4.14, 4.14);   // Omegabar0
  Mat3 omega_cov = 0.1414 * 0.1414 * Mat3::Identity();

  int bandlimit = 10;
  bool recenter = true;
  bool renormalize = false;

  int sphere_lat = 65;
  int sphere_lon = 129;
  int sphere_theta = 64;

  std::vector<double> snapshot_times{0.0, 0.1, 0.2, 0.4, 1.0};

  Vec3 meas_reference = Vec3(0.0, 0.0, 1.0);
  double meas_sigma_dir = 0.05;
  double meas_sigma_omega = 0.05;

  int workers = 1;                // excluded from the config hash
  std::string output_dir = "out";  // excluded from the config hash

  So3Quadrature make_attitude_grid() const {
    return So3Quadrature(attitude_counts[0], attitude_counts[1],
                         attitude_counts[2], beta_scheme);
  }
  VelocityGrid make_velocity_grid() const {
    return VelocityGrid::centered(omega_mean, velocity_half_width,
                                  velocity_counts);
  }
  VonMisesSo3Params make_von_mises() const {
    return VonMisesSo3Params{euler313_to_rotation(mean_euler), kappa};
  }
  GaussianParams make_gaussian() const {
    return GaussianParams{omega_mean, omega_cov};
  }
  MeasurementModel make_measurement_model() const {
    return MeasurementModel(
        meas_reference, meas_sigma_dir * meas_sigma_dir * Mat3::Identity(),
        meas_sigma_omega * meas_sigma_omega * Mat3::Identity());
  }

  void validate() const {
    pendulum.validate();
    if (!(step.h > 0.0)) throw ConfigError("step.h: must be > 0");
    if (!(step.newton_tol > 0.0))
      throw ConfigError("step.newton_tol: must be > 0");
    if (!(kappa > 0.0)) throw ConfigError("density.kappa: must be > 0");
    double prev = -1.0;
    for (double t : snapshot_times) {
      if (t < 0.0 || t <= prev) {
        throw ConfigError(
            "snapshot_times: must be non-negative and strictly increasing");
      }
      prev = t;
    }
    if (bandlimit < 0) throw ConfigError("bandlimit.L: must be >= 0");
  }
};

namespace detail {

inline std::vector<double> parse_list(const std::string& key,
                                      const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (...) {
      throw ConfigError(key + ": cannot parse number '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError(key + ": empty value");
  return out;
}

inline double parse_scalar(const std::string& key, const std::string& v) {
  const auto list = parse_list(key, v);
  if (list.size() != 1) throw ConfigError(key + ": expected a single number");
  return list[0];
}

inline Vec3 parse_vec3(const std::string& key, const std::string& v) {
  const auto list = parse_list(key, v);
  if (list.size() != 3) throw ConfigError(key + ": expected three numbers");
  return Vec3(list[0], list[1], list[2]);
}

inline std::array<int, 3> parse_counts(const std::string& key,
                                       const std::string& v) {
  const Vec3 x = parse_vec3(key, v);
  return {int(x(0)), int(x(1)), int(x(2))};
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true/false");
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline std::map<std::string, std::string> parse_key_values(
    std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    kv[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
  }
  return kv;
}

inline RunConfig parse_config(std::istream& is) {
  RunConfig cfg;
  Mat3 J = cfg.pendulum.inertia;
  Vec3 rho = cfg.pendulum.com_offset;
  double mass = cfg.pendulum.mass, grav = cfg.pendulum.gravity;
  for (const auto& [key, value] : parse_key_values(is)) {
    if (key == "pendulum.J.diag") {
      J = Mat3(detail::parse_vec3(key, value).asDiagonal());
    } else if (key == "pendulum.mass") {
      mass = detail::parse_scalar(key, value);
    } else if (key == "pendulum.rho") {
      rho = detail::parse_vec3(key, value);
    } else if (key == "pendulum.gravity") {
      grav = detail::parse_scalar(key, value);
    } else if (key == "step.h") {
      cfg.step.h = detail::parse_scalar(key, value);
    } else if (key == "step.newton_tol") {
      cfg.step.newton_tol = detail::parse_scalar(key, value);
    } else if (key == "step.newton_max_iter") {
      cfg.step.newton_max_iter = int(detail::parse_scalar(key, value));
    } else if (key == "grid.attitude") {
      cfg.attitude_counts = detail::parse_counts(key, value);
    } else if (key == "grid.beta_scheme") {
      if (value == "clenshaw_curtis") {
        cfg.beta_scheme = BetaScheme::kClenshawCurtis;
      } else if (value == "simpson") {
        cfg.beta_scheme = BetaScheme::kSimpson;
      } else {
        throw ConfigError("grid.beta_scheme: unknown scheme '" + value + "'");
      }
    } else if (key == "grid.velocity") {
      cfg.velocity_counts = detail::parse_counts(key, value);
    } else if (key == "grid.velocity_halfwidth") {
      cfg.velocity_half_width = detail::parse_vec3(key, value);
    } else if (key == "density.kappa") {
      cfg.kappa = detail::parse_scalar(key, value);
    } else if (key == "density.mean_euler") {
      const Vec3 e = detail::parse_vec3(key, value);
      cfg.mean_euler = Euler313{e(0), e(1), e(2)};
    } else if (key == "density.omega_mean") {
      cfg.omega_mean = detail::parse_vec3(key, value);
    } else if (key == "density.sigma") {
      const double s = detail::parse_scalar(key, value);
      cfg.omega_cov = s * s * Mat3::Identity();
    } else if (key == "density.cov.diag") {
      cfg.omega_cov = Mat3(detail::parse_vec3(key, value).asDiagonal());
    } else if (key == "density.recenter") {
      cfg.recenter = detail::parse_bool(key, value);
    } else if (key == "density.renormalize") {
      cfg.renormalize = detail::parse_bool(key, value);
    } else if (key == "bandlimit.L") {
      cfg.bandlimit = int(detail::parse_scalar(key, value));
    } else if (key == "sphere.lat") {
      cfg.sphere_lat = int(detail::parse_scalar(key, value));
    } else if (key == "sphere.lon") {
      cfg.sphere_lon = int(detail::parse_scalar(key, value));
    } else if (key == "sphere.theta") {
      cfg.sphere_theta = int(detail::parse_scalar(key, value));
    } else if (key == "snapshot_times") {
      cfg.snapshot_times = detail::parse_list(key, value);
    } else if (key == "measurement.reference") {
      cfg.meas_reference = detail::parse_vec3(key, value).normalized();
    } else if (key == "measurement.sigma_dir") {
      cfg.meas_sigma_dir = detail::parse_scalar(key, value);
    } else if (key == "measurement.sigma_omega") {
      cfg.meas_sigma_omega = detail::parse_scalar(key, value);
    } else if (key == "workers") {
      cfg.workers = int(detail::parse_scalar(key, value));
    } else if (key == "output.dir") {
      cfg.output_dir = value;
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  cfg.pendulum = PendulumParams(J, mass, rho, grav);
  cfg.validate();
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(is);
}

/// FNV-1a hash of the physically meaningful configuration (worker count and
/// output paths excluded, so runs differing only in parallelism hash equal).
inline std::uint64_t config_hash(const RunConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << c.pendulum.inertia << ";" << c.pendulum.mass << ";"
     << c.pendulum.com_offset.transpose() << ";" << c.pendulum.gravity << ";"
     << c.step.h << ";" << c.step.newton_tol << ";" << c.step.newton_max_iter
     << ";";
  for (int v : c.attitude_counts) os << v << ",";
  os << int(c.beta_scheme) << ";";
  for (int v : c.velocity_counts) os << v << ",";
  os << c.velocity_half_width.transpose() << ";" << c.kappa << ";"
     << c.mean_euler.alpha << "," << c.mean_euler.beta << ","
     << c.mean_euler.gamma << ";" << c.omega_mean.transpose() << ";"
     << c.omega_cov << ";" << c.bandlimit << ";" << c.recenter << ";"
     << c.renormalize << ";" << c.sphere_lat << "," << c.sphere_lon << ","
     << c.sphere_theta << ";";
  for (double t : c.snapshot_times) os << t << ",";
  os << ";" << c.meas_reference.transpose() << ";" << c.meas_sigma_dir << ";"
     << c.meas_sigma_omega;
  std::uint64_t h = 14695981039346656037ull;
  for (char ch : os.str()) {
    h ^= std::uint64_t(static_cast<unsigned char>(ch));
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace so3prop
