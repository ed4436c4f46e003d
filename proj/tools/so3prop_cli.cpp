// Command-line driver for the attitude uncertainty propagation pipeline.
//
// Subcommands:
//   propagate   initialize the joint density and write snapshot files
//   estimate    alternate propagation and measurement updates
//   trajectory  integrate a single state and log energy/orthogonality
//   transform   Fourier-transform a stored density's attitude marginal
//   marginal    sphere-marginal CSV exports for a stored density
//
// Errors are reported as a single JSON object on stderr with exit code 1.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "so3prop/config.hpp"
#include "so3prop/core.hpp"
#include "so3prop/density.hpp"
#include "so3prop/dynamics.hpp"
#include "so3prop/estimation.hpp"
#include "so3prop/harmonic.hpp"
#include "so3prop/marginals.hpp"

namespace fs = std::filesystem;
using namespace so3prop;

namespace {

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return std::string(buf);
}

std::string csv_header(std::uint64_t h) {
  return "config=" + hash_hex(h) + " version=" + std::to_string(kToolVersion);
}

struct CommonArgs {
  std::string config_path;
  int workers = -1;
  std::string out_dir;
  std::string snapshot_times;
};

void add_common(CLI::App* app, CommonArgs* a, bool config_required = true) {
  auto* c = app->add_option("--config", a->config_path, "configuration file");
  if (config_required) c->required();
  app->add_option("--workers", a->workers, "worker thread count override");
  app->add_option("--out", a->out_dir, "output directory override");
  app->add_option("--snapshot-times", a->snapshot_times,
                  "comma-separated snapshot times override (seconds)");
}

RunConfig resolve(const CommonArgs& a) {
  RunConfig cfg =
      a.config_path.empty() ? RunConfig{} : load_config(a.config_path);
  if (a.workers > 0) cfg.workers = a.workers;
  if (!a.out_dir.empty()) cfg.output_dir = a.out_dir;
  if (!a.snapshot_times.empty()) {
    cfg.snapshot_times = detail::parse_list("snapshot-times", a.snapshot_times);
    cfg.validate();
  }
  return cfg;
}

fs::path ensure_out(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  return dir;
}

int snapshot_step(double t, double h) {
  const double k = t / h;
  const int ki = int(std::llround(k));
  if (std::abs(k - ki) > 1e-9) {
    throw ConfigError("snapshot_times: " + std::to_string(t) +
                      " is not a multiple of step.h");
  }
  return ki;
}

void write_density_file(const DensityGrid& d, const fs::path& path,
                        std::uint64_t hash) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  write_density(d, os, hash, kToolVersion);
}

void export_sphere_set(const DensityGrid& d, const RunConfig& cfg,
                       const fs::path& dir, int k, std::uint64_t hash,
                       std::ostream* summary = nullptr) {
  const AttitudeMarginal am = attitude_marginal(d, cfg.workers);
  for (int axis = 1; axis <= 3; ++axis) {
    const SphereMarginal sm =
        sphere_marginal(am, axis, cfg.sphere_lat, cfg.sphere_lon,
                        cfg.sphere_theta, cfg.workers);
    export_sphere(sm,
                  (dir / ("axis" + std::to_string(axis) + "_k" +
                          std::to_string(k) + ".csv"))
                      .string(),
                  csv_header(hash));
    if (summary) {
      summary->precision(17);
      *summary << k << "," << k * cfg.step.h << "," << axis << ","
               << sm.integral() << "," << sm.circular_variance() << "\n";
    }
  }
}

int cmd_propagate(const CommonArgs& args) {
  const RunConfig cfg = resolve(args);
  const std::uint64_t hash = config_hash(cfg);
  const fs::path dir = ensure_out(cfg);

  DensityGrid d = init_density(cfg.make_von_mises(), cfg.make_gaussian(),
                               cfg.make_attitude_grid(),
                               cfg.make_velocity_grid(), cfg.workers)
                      .grid;
  PropagateOptions opts;
  opts.recenter = cfg.recenter;
  opts.workers = cfg.workers;
  opts.renormalize = cfg.renormalize;

  std::ofstream summary(dir / "summary.csv");
  summary << "# " << csv_header(hash) << "\n";
  summary << "step,time,axis,sphere_integral,circular_variance\n";
  std::ofstream masses(dir / "mass.csv");
  masses << "# " << csv_header(hash) << "\n";
  masses << "step,time,mass,escaped_weight\n";
  masses.precision(17);

  int k_prev = 0;
  for (double t : cfg.snapshot_times) {
    const int k = snapshot_step(t, cfg.step.h);
    if (k > k_prev) {
      PropagateResult r =
          propagate(d, cfg.pendulum, cfg.step, k - k_prev, opts);
      d = std::move(r.grid);
      masses << k << "," << t << "," << r.mass << "," << r.escaped_weight
             << "\n";
    } else {
      masses << k << "," << t << "," << d.integral(cfg.workers) << ",0\n";
    }
    k_prev = k;
    write_density_file(d, dir / ("density_k" + std::to_string(k) + ".bin"),
                       hash);
    export_sphere_set(d, cfg, dir, k, hash, &summary);
  }
  return 0;
}

std::vector<Measurement> load_measurements(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open measurements file '" + path + "'");
  std::vector<Measurement> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto vals = detail::parse_list("measurements line " +
                                             std::to_string(lineno),
                                         line);
    if (vals.size() != 7) {
      throw ConfigError("measurements line " + std::to_string(lineno) +
                        ": expected k,z1,...,z6");
    }
    Measurement m;
    m.timestamp = int(vals[0]);
    for (int i = 0; i < 6; ++i) m.z(i) = vals[i + 1];
    out.push_back(m);
  }
  return out;
}

int cmd_estimate(const CommonArgs& args, const std::string& meas_path) {
  const RunConfig cfg = resolve(args);
  const std::uint64_t hash = config_hash(cfg);
  const fs::path dir = ensure_out(cfg);
  const std::vector<Measurement> measurements = load_measurements(meas_path);

  DensityGrid prior = init_density(cfg.make_von_mises(), cfg.make_gaussian(),
                                   cfg.make_attitude_grid(),
                                   cfg.make_velocity_grid(), cfg.workers)
                          .grid;
  PropagateOptions opts;
  opts.recenter = cfg.recenter;
  opts.workers = cfg.workers;
  opts.renormalize = cfg.renormalize;
  const MeasurementModel model = cfg.make_measurement_model();

  std::ofstream log(dir / "estimate.csv");
  log << "# " << csv_header(hash) << "\n";
  log << "step,time,evidence,mode_angle_from_identity\n";
  log.precision(17);

  CycleResult r = estimate_cycle(
      std::move(prior), cfg.pendulum, cfg.step, model, measurements, opts,
      [&](const DensityGrid& post, double evidence) {
        const int k = post.timestamp();
        write_density_file(
            post, dir / ("posterior_k" + std::to_string(k) + ".bin"), hash);
        export_sphere_set(post, cfg, dir, k, hash);
        const Rotation mode =
            argmax_attitude(attitude_marginal(post, cfg.workers));
        log << k << "," << k * cfg.step.h << "," << evidence << ","
            << rotation_distance(mode, Rotation()) << "\n";
      });
  (void)r;
  return 0;
}

int cmd_trajectory(const CommonArgs& args, double duration,
                   const std::string& euler0, const std::string& omega0) {
  const RunConfig cfg = resolve(args);
  const std::uint64_t hash = config_hash(cfg);
  const fs::path dir = ensure_out(cfg);

  RigidBodyState s{euler313_to_rotation(cfg.mean_euler), cfg.omega_mean};
  if (!euler0.empty()) {
    const Vec3 e = detail::parse_vec3("euler0", euler0);
    s.attitude = euler313_to_rotation(Euler313{e(0), e(1), e(2)});
  }
  if (!omega0.empty()) s.omega = detail::parse_vec3("omega0", omega0);

  const int n_steps = int(std::llround(duration / cfg.step.h));
  std::ofstream os(dir / "trajectory.csv");
  os << "# " << csv_header(hash) << "\n";
  os << "t,r11,r12,r13,r21,r22,r23,r31,r32,r33,w1,w2,w3,energy,"
        "ortho_defect\n";
  os.precision(17);
  auto row = [&](int k) {
    const Mat3& R = s.attitude.matrix();
    os << k * cfg.step.h;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) os << "," << R(i, j);
    for (int a = 0; a < 3; ++a) os << "," << s.omega(a);
    os << "," << energy(s, cfg.pendulum) << "," << s.attitude.ortho_defect()
       << "\n";
  };
  row(0);
  for (int k = 1; k <= n_steps; ++k) {
    s = step(s, cfg.pendulum, cfg.step);
    row(k);
  }
  return 0;
}

int cmd_transform(const CommonArgs& args, const std::string& density_path,
                  bool per_node) {
  const RunConfig cfg = resolve(args);
  const fs::path dir = ensure_out(cfg);
  std::ifstream is(density_path, std::ios::binary);
  if (!is) throw ConfigError("cannot open density file '" + density_path + "'");
  std::uint64_t hash = 0;
  const DensityGrid d = read_density(is, &hash);

  if (per_node) {
    const std::vector<So3Spectrum> spectra =
        attitude_spectrum(d, cfg.bandlimit, cfg.workers);
    std::ofstream os(dir / "spectra.bin", std::ios::binary);
    detail::put<std::uint64_t>(os, hash);
    detail::put<std::uint32_t>(os, kToolVersion);
    detail::put<std::uint64_t>(os, spectra.size());
    for (const So3Spectrum& s : spectra) write_spectrum(s, os);
  } else {
    const AttitudeMarginal am = attitude_marginal(d, cfg.workers);
    const So3Spectrum s = forward_transform(am.values, cfg.bandlimit,
                                            d.attitude_grid(), cfg.workers);
    {
      std::ofstream os(dir / "spectrum.bin", std::ios::binary);
      detail::put<std::uint64_t>(os, hash);
      detail::put<std::uint32_t>(os, kToolVersion);
      write_spectrum(s, os);
    }
    std::ofstream ts(dir / "spectrum.txt");
    ts << "# " << csv_header(hash) << "\n";
    write_spectrum_text(s, ts);
  }
  return 0;
}

int cmd_marginal(const CommonArgs& args, const std::string& density_path) {
  const RunConfig cfg = resolve(args);
  const fs::path dir = ensure_out(cfg);
  std::ifstream is(density_path, std::ios::binary);
  if (!is) throw ConfigError("cannot open density file '" + density_path + "'");
  std::uint64_t hash = 0;
  const DensityGrid d = read_density(is, &hash);
  export_sphere_set(d, cfg, dir, d.timestamp(), hash);
  return 0;
}

int error_json(const std::string& type, const std::string& message) {
  nlohmann::json j;
  j["error"] = {{"type", type}, {"message", message}};
  std::cerr << j.dump() << std::endl;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"attitude uncertainty propagation on SO(3) x R^3"};
  app.require_subcommand(1);

  CommonArgs prop_args, est_args, traj_args, tf_args, marg_args;
  std::string meas_path, density_path_tf, density_path_m;
  std::string euler0, omega0;
  double duration = 10.0;
  bool per_node = false;

  auto* prop = app.add_subcommand("propagate", "propagate density snapshots");
  add_common(prop, &prop_args);

  auto* est = app.add_subcommand("estimate", "Bayesian measurement updates");
  add_common(est, &est_args);
  est->add_option("--measurements", meas_path, "CSV with rows k,z1,...,z6")
      ->required();

  auto* traj = app.add_subcommand("trajectory", "single-state integration log");
  add_common(traj, &traj_args);
  traj->add_option("--duration", duration, "integration time (seconds)");
  traj->add_option("--euler0", euler0, "initial 3-1-3 Euler angles a,b,g");
  traj->add_option("--omega0", omega0, "initial body angular velocity");

  auto* tf = app.add_subcommand("transform", "density to Fourier spectrum");
  add_common(tf, &tf_args);
  tf->add_option("--density", density_path_tf, "stored density file")
      ->required();
  tf->add_flag("--per-node", per_node,
               "one spectrum per velocity node instead of the marginal");

  auto* marg = app.add_subcommand("marginal", "density to sphere CSVs");
  add_common(marg, &marg_args);
  marg->add_option("--density", density_path_m, "stored density file")
      ->required();

  try {
    app.parse(argc, argv);
    if (prop->parsed()) return cmd_propagate(prop_args);
    if (est->parsed()) return cmd_estimate(est_args, meas_path);
    if (traj->parsed())
      return cmd_trajectory(traj_args, duration, euler0, omega0);
    if (tf->parsed()) return cmd_transform(tf_args, density_path_tf, per_node);
    if (marg->parsed()) return cmd_marginal(marg_args, density_path_m);
    return error_json("usage", "no subcommand given");
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    return error_json("usage", e.what());
  } catch (const ConfigError& e) {
    return error_json("config", e.what());
  } catch (const std::invalid_argument& e) {
    return error_json("input", e.what());
  } catch (const std::domain_error& e) {
    return error_json("numeric", e.what());
  } catch (const std::runtime_error& e) {
    return error_json("numeric", e.what());
  } catch (const std::exception& e) {
    return error_json("internal", e.what());
  }
}
