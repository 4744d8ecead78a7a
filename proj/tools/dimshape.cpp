// dimshape: train linear policies with dimension-shaped returns and measure the
// box-counting and variation dimensions of trajectories and fractal point sets.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dimshape/ars.hpp"
#include "dimshape/box_mesh.hpp"
#include "dimshape/eval.hpp"
#include "dimshape/fractals.hpp"
#include "dimshape/io.hpp"
#include "dimshape/variation.hpp"

namespace fs = std::filesystem;
using namespace dimshape;

namespace {

enum ExitCode : int { kOk = 0, kRuntimeError = 1, kUsageError = 2, kDiverged = 3 };

std::size_t resolve_workers(std::size_t flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("DIMSHAPE_WORKERS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return 1;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

template <typename Writer>
void write_csv(const fs::path& path, Writer&& writer) {
  std::ostringstream buf;
  writer(buf);
  write_file(path, buf.str());
}

RunningStats sample_stats(std::span<const StateVector> points) {
  RunningStats stats(points.front().size());
  for (const auto& p : points) stats.update(p);
  return stats;
}

// ---------------------------------------------------------------- train

struct TrainOptions {
  std::string config_path;
  std::string env;
  std::string post;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> seeds;
  std::optional<std::uint64_t> seed;
  std::string two_phase;
  std::optional<std::size_t> checkpoint_interval;
  std::string out = "out";
  std::size_t workers = 0;
};

Provenance make_provenance(const RunConfig& cfg, std::uint64_t seed, std::size_t epochs,
                           std::optional<std::size_t> boundary, const std::string& post) {
  Provenance prov;
  prov.config_hash = config_hash(cfg);
  prov.seed = seed;
  prov.phase_boundary = boundary;
  prov.postprocessor = post;
  prov.epochs = epochs;
  return prov;
}

int cmd_train(const TrainOptions& o) {
  RunConfig cfg;
  if (!o.config_path.empty()) cfg = load_run_config(o.config_path);
  if (!o.env.empty()) cfg.env = o.env;
  if (!o.post.empty()) cfg.post.kind = parse_postprocessor(o.post);
  if (o.epochs) cfg.ars.epochs = *o.epochs;
  if (o.seeds) cfg.seeds = *o.seeds;
  if (o.seed) cfg.base_seed = *o.seed;
  if (!o.two_phase.empty()) cfg.two_phase = parse_two_phase(o.two_phase);
  if (o.checkpoint_interval) cfg.checkpoint_interval = *o.checkpoint_interval;
  cfg.ars.workers = resolve_workers(o.workers);
  cfg.ars.disturbance = cfg.disturbance;
  cfg.validate();

  const EnvSpec env = make_env_spec(cfg.env);
  const fs::path out(o.out);
  fs::create_directories(out);
  write_file(out / "config.json", to_json(cfg).dump(2) + "\n");

  int status = kOk;
  for (std::size_t k = 0; k < cfg.seeds; ++k) {
    const std::uint64_t seed = cfg.base_seed + k;
    const fs::path dir = out / ("seed_" + std::to_string(k));
    fs::create_directories(dir);
    const std::optional<std::size_t> boundary =
        cfg.two_phase ? std::optional(cfg.two_phase->base_epochs) : std::nullopt;
    const std::string post_name = to_string(cfg.post.kind);

    TrainHistory partial;
    partial.phase_boundary = boundary;
    auto on_epoch = [&](const LinearPolicy& policy, const EpochRecord& rec) {
      partial.epochs.push_back(rec);
      if (cfg.checkpoint_interval > 0 && rec.epoch % cfg.checkpoint_interval == 0) {
        PolicyFile file{kPolicySchemaVersion, env.name, policy,
                        make_provenance(cfg, seed, rec.epoch, boundary, rec.postprocessor)};
        save_policy(dir / ("checkpoint_" + std::to_string(rec.epoch) + ".json"), file);
      }
    };

    try {
      TrainResult result;
      std::size_t total_epochs = cfg.ars.epochs;
      if (cfg.two_phase) {
        ArsConfig base = cfg.ars, tune = cfg.ars;
        base.epochs = cfg.two_phase->base_epochs;
        tune.epochs = cfg.two_phase->tune_epochs;
        total_epochs = base.epochs + tune.epochs;
        result = two_phase_train(env, base, tune, cfg.post, seed, on_epoch);
      } else {
        result = train(env, cfg.ars, cfg.post, seed, on_epoch);
      }
      PolicyFile file{kPolicySchemaVersion, env.name, result.policy,
                      make_provenance(cfg, seed, total_epochs, boundary, post_name)};
      save_policy(dir / "policy.json", file);
      write_csv(dir / "history.csv", [&](std::ostream& s) { write_history_csv(s, result.history); });
      const auto& last = result.history.epochs.back();
      std::printf("seed %llu: epochs %zu mean_raw %s mean_shaped %s mean_dimension %s\n",
                  static_cast<unsigned long long>(seed), last.epoch,
                  format_double(last.mean_raw).c_str(), format_double(last.mean_shaped).c_str(),
                  format_double(last.mean_dimension).c_str());
    } catch (const training_diverged& e) {
      const std::size_t good_epoch = e.epoch() - 1;
      PolicyFile file{kPolicySchemaVersion, env.name, e.last_good(),
                      make_provenance(cfg, seed, good_epoch, boundary, post_name)};
      save_policy(dir / "last_good.json", file);
      write_csv(dir / "history.csv", [&](std::ostream& s) { write_history_csv(s, partial); });
      std::fprintf(stderr, "error: seed %llu diverged at epoch %zu; last good policy kept\n",
                   static_cast<unsigned long long>(seed), e.epoch());
      status = kDiverged;
    }
  }
  return status;
}

// ---------------------------------------------------------------- dim

struct DimOptions {
  std::string fractal;
  std::string points;
  std::string policy;
  std::size_t n = 10000;
  std::uint64_t seed = 0;
  std::size_t episodes = 5;
  std::size_t len = 10000;
  std::size_t transient = 200;
  bool noise = false;
  double growth = 1.5;
  double d0 = 1e-2;
  std::size_t window = 1;
  std::string out = "out";
  std::size_t workers = 0;
};

int dim_point_set(const DimOptions& o, const MeshParams& mesh) {
  std::vector<StateVector> points;
  std::string label;
  if (!o.fractal.empty()) {
    FractalSpec spec;
    spec.kind = parse_fractal(o.fractal);
    spec.n_points = o.n;
    spec.seed = o.seed;
    points = generate(spec);
    label = to_string(spec.kind);
  } else {
    std::ifstream in(o.points);
    if (!in) throw std::runtime_error("cannot read " + o.points);
    points = read_points_csv(in);
    label = o.points;
  }
  if (points.empty()) throw std::runtime_error("empty state set");

  const fs::path out(o.out);
  const MeshCurve curve = mesh_curve(points, mesh, sample_stats(points));
  write_csv(out / "mesh_curve.csv", [&](std::ostream& s) { write_mesh_curve_csv(s, curve); });

  std::printf("input %s points %zu curve_entries %zu\n", label.c_str(), points.size(),
              curve.entries.size());
  nlohmann::json summary = {{"input", label}, {"points", points.size()}};
  try {
    const DimensionEstimate est = mesh_dimensions(curve, o.window);
    const double central = central_mesh_dim(curve);
    std::printf("lower_mesh_dim %s\nupper_mesh_dim %s\ncentral_mesh_dim %s\n",
                format_double(est.lower).c_str(), format_double(est.upper).c_str(),
                format_double(central).c_str());
    summary["lower_mesh_dim"] = est.lower;
    summary["upper_mesh_dim"] = est.upper;
    summary["central_mesh_dim"] = central;
  } catch (const degenerate_curve& e) {
    write_file(out / "dims.json", summary.dump(2) + "\n");
    std::fflush(stdout);
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeError;
  }
  if (points.size() >= 3) {
    const double mado = trajectory_variation_dim(points, 1.0);
    const double vario = trajectory_variation_dim(points, 2.0);
    std::printf("madogram %s\nvariogram %s\n", format_double(mado).c_str(),
                format_double(vario).c_str());
    summary["madogram"] = mado;
    summary["variogram"] = vario;
  }
  write_file(out / "dims.json", summary.dump(2) + "\n");
  return kOk;
}

int dim_policy(const DimOptions& o, const MeshParams& mesh) {
  const PolicyFile file = load_policy(o.policy);
  const EnvSpec env = make_env_spec(file.env);
  EvalOptions opts;
  opts.rollouts_per_seed = o.episodes;
  opts.horizon = o.len;
  opts.transient = o.transient;
  opts.mesh = mesh;
  opts.seed = o.seed;
  opts.workers = resolve_workers(o.workers);
  if (o.noise) opts.disturbance = kNoiseMode;
  const DimensionReport report = evaluate_dimensions(file.policy, env, 1, opts);

  const fs::path out(o.out);
  write_csv(out / "dimensions.csv", [&](std::ostream& s) { write_dimension_report_csv(s, report); });
  write_file(out / "dimensions.json", to_json(report).dump(2) + "\n");

  // Mesh curve of the first evaluation rollout, for plotting.
  const auto first = rollout(env, file.policy, o.len, opts.disturbance, report.rows.front().rollout_seed);
  const auto states =
      select_coords(post_transient(first.trajectory, o.transient), env.meshed_coords);
  if (!states.empty()) {
    const MeshCurve curve =
        mesh_curve(states, mesh, file.policy.obs_stats.count() > 0
                                     ? file.policy.obs_stats.select(env.meshed_coords)
                                     : RunningStats::identity(env.meshed_coords.size()));
    write_csv(out / "mesh_curve.csv", [&](std::ostream& s) { write_mesh_curve_csv(s, curve); });
  }

  auto show = [](const char* name, const Aggregate& a) {
    std::printf("%s mean %s std %s count %zu\n", name, format_double(a.mean).c_str(),
                format_double(a.std).c_str(), a.count);
  };
  show("raw_return", report.raw_return);
  show("lower_mesh_dim", report.lower);
  show("upper_mesh_dim", report.upper);
  show("madogram", report.madogram);
  show("variogram", report.variogram);
  return report.lower.count > 0 ? kOk : kRuntimeError;
}

int cmd_dim(const DimOptions& o) {
  MeshParams mesh;
  mesh.growth_factor = o.growth;
  mesh.initial_box_size = o.d0;
  mesh.upper_window = o.window;
  if (!o.policy.empty()) return dim_policy(o, mesh);
  return dim_point_set(o, mesh);
}

// ---------------------------------------------------------------- robust

struct RobustOptions {
  std::string policy;
  std::size_t n = 100;
  std::size_t len = 1000;
  std::uint64_t seed = 0;
  DisturbanceConfig fixed;
  std::optional<double> calibrate;
  std::vector<double> grid_action_noise{0.0};
  std::vector<double> grid_obs_noise{0.0};
  std::vector<double> grid_push_magnitude;
  std::vector<double> grid_push_rate{0.2};
  std::string out = "out";
  std::size_t workers = 0;
};

std::vector<DisturbanceConfig> build_grid(const RobustOptions& o) {
  std::vector<double> magnitudes = o.grid_push_magnitude;
  if (magnitudes.empty())
    for (double m = 0.25; m <= 64.0; m *= 1.4142135623730951) magnitudes.push_back(m);
  std::vector<DisturbanceConfig> grid;
  for (double a : o.grid_action_noise)
    for (double s : o.grid_obs_noise)
      for (double m : magnitudes)
        for (double r : o.grid_push_rate) grid.push_back({a, s, m, r});
  return grid;
}

int cmd_robust(const RobustOptions& o) {
  const PolicyFile file = load_policy(o.policy);
  const EnvSpec env = make_env_spec(file.env);
  const std::size_t workers = resolve_workers(o.workers);
  const fs::path out(o.out);

  std::vector<RobustnessReport> reports;
  std::optional<std::size_t> selected;
  if (o.calibrate) {
    const auto grid = build_grid(o);
    auto result = disturbance_grid_search(file.policy, env, grid, *o.calibrate, o.n, o.len,
                                          o.seed, workers);
    reports = std::move(result.reports);
    selected = result.selected;
  } else {
    reports.push_back(failure_rate(file.policy, env, o.fixed, o.n, o.len, o.seed, workers));
  }
  std::ostringstream buf;
  write_robustness_csv(buf, reports, selected);
  write_file(out / "robustness.csv", buf.str());
  std::fputs(buf.str().c_str(), stdout);
  return kOk;
}

// ---------------------------------------------------------------- fractal

struct FractalOptions {
  std::string kind = "sierpinski";
  std::size_t n = 10000;
  std::uint64_t seed = 0;
  int koch_level = 7;
  std::string out = "out";
};

int cmd_fractal(const FractalOptions& o) {
  FractalSpec spec;
  spec.kind = parse_fractal(o.kind);
  spec.n_points = o.n;
  spec.seed = o.seed;
  spec.koch_level = o.koch_level;
  const auto points = generate(spec);
  const fs::path path = fs::path(o.out) / (to_string(spec.kind) + ".csv");
  write_csv(path, [&](std::ostream& s) { write_points_csv(s, points); });
  std::printf("wrote %zu points to %s (reference dimension %s)\n", points.size(),
              path.string().c_str(), format_double(reference_dimension(spec.kind)).c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trajectory dimensionality toolkit and dimension-shaped ARS trainer"};
  app.require_subcommand(1);

  TrainOptions train_opts;
  auto* train_cmd = app.add_subcommand("train", "Train linear policies with ARS");
  train_cmd->add_option("--config", train_opts.config_path, "Run configuration JSON")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--env", train_opts.env, "pendulum | cartpole_swingup | hopper1d");
  train_cmd->add_option("--post", train_opts.post,
                        "identity | lower-mesh | upper-mesh | madogram | variogram");
  train_cmd->add_option("--epochs", train_opts.epochs, "Epochs for single-phase training");
  train_cmd->add_option("--seeds", train_opts.seeds, "Number of training seeds");
  train_cmd->add_option("--seed", train_opts.seed, "First training seed");
  train_cmd->add_option("--two-phase", train_opts.two_phase,
                        "A:B runs A identity epochs then B epochs with --post")
      ->check([](const std::string& text) {
        try {
          (void)parse_two_phase(text);
          return std::string();
        } catch (const std::invalid_argument& e) {
          return std::string(e.what());
        }
      });
  train_cmd->add_option("--checkpoint-interval", train_opts.checkpoint_interval,
                        "Save a checkpoint every k epochs (0 disables)");
  train_cmd->add_option("--out", train_opts.out, "Output directory");
  train_cmd->add_option("--workers", train_opts.workers, "Parallel rollouts");

  DimOptions dim_opts;
  auto* dim_cmd = app.add_subcommand("dim", "Measure mesh and variation dimensions");
  auto* dim_fractal = dim_cmd->add_option("--fractal", dim_opts.fractal, "Generated point set");
  auto* dim_points = dim_cmd->add_option("--points", dim_opts.points, "Point-set CSV file");
  auto* dim_policy_opt = dim_cmd->add_option("--policy", dim_opts.policy, "Policy JSON file");
  dim_fractal->excludes(dim_points)->excludes(dim_policy_opt);
  dim_points->excludes(dim_policy_opt);
  dim_cmd->add_option("--n", dim_opts.n, "Fractal point count");
  dim_cmd->add_option("--seed", dim_opts.seed, "Generator or evaluation seed");
  dim_cmd->add_option("--episodes", dim_opts.episodes, "Evaluation rollouts");
  dim_cmd->add_option("--len", dim_opts.len, "Evaluation rollout length");
  dim_cmd->add_option("--transient", dim_opts.transient, "Steps dropped before measuring");
  dim_cmd->add_flag("--noise", dim_opts.noise, "Evaluate under action std .001, obs std .01");
  dim_cmd->add_option("--growth", dim_opts.growth, "Mesh curve growth factor");
  dim_cmd->add_option("--d0", dim_opts.d0, "Initial box size");
  dim_cmd->add_option("--window", dim_opts.window, "Upper-dimension slope window");
  dim_cmd->add_option("--out", dim_opts.out, "Output directory");
  dim_cmd->add_option("--workers", dim_opts.workers, "Parallel rollouts");

  RobustOptions robust_opts;
  auto* robust_cmd = app.add_subcommand("robust", "Failure rates under disturbances");
  robust_cmd->add_option("--policy", robust_opts.policy, "Policy JSON file")->required();
  robust_cmd->add_option("--n", robust_opts.n, "Rollouts per configuration");
  robust_cmd->add_option("--len", robust_opts.len, "Rollout horizon");
  robust_cmd->add_option("--seed", robust_opts.seed, "Rollout seed base");
  robust_cmd->add_option("--action-noise", robust_opts.fixed.action_noise_std, "Action noise std");
  robust_cmd->add_option("--obs-noise", robust_opts.fixed.obs_noise_std, "Observation noise std");
  robust_cmd->add_option("--push-magnitude", robust_opts.fixed.push_magnitude, "Push force magnitude");
  robust_cmd->add_option("--push-rate", robust_opts.fixed.push_rate, "Per-step push probability");
  robust_cmd->add_option("--calibrate", robust_opts.calibrate,
                         "Grid-search the configuration nearest this failure rate");
  robust_cmd->add_option("--grid-action-noise", robust_opts.grid_action_noise, "Grid values, comma separated")->delimiter(',');
  robust_cmd->add_option("--grid-obs-noise", robust_opts.grid_obs_noise, "Grid values, comma separated")->delimiter(',');
  robust_cmd->add_option("--grid-push-magnitude", robust_opts.grid_push_magnitude, "Grid values, comma separated")->delimiter(',');
  robust_cmd->add_option("--grid-push-rate", robust_opts.grid_push_rate, "Grid values, comma separated")->delimiter(',');
  robust_cmd->add_option("--out", robust_opts.out, "Output directory");
  robust_cmd->add_option("--workers", robust_opts.workers, "Parallel rollouts");

  FractalOptions fractal_opts;
  auto* fractal_cmd = app.add_subcommand("fractal", "Write a fractal point set as CSV");
  fractal_cmd->add_option("kind", fractal_opts.kind,
                          "line | circle | square | sierpinski | koch | lorenz");
  fractal_cmd->add_option("--n", fractal_opts.n, "Point count");
  fractal_cmd->add_option("--seed", fractal_opts.seed, "Generator seed");
  fractal_cmd->add_option("--koch-level", fractal_opts.koch_level, "Koch recursion depth");
  fractal_cmd->add_option("--out", fractal_opts.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (train_cmd->parsed()) {
      if (train_opts.config_path.empty() && train_opts.env.empty()) {
        std::cerr << "error: train needs --env or --config\n" << train_cmd->help();
        return kUsageError;
      }
      return cmd_train(train_opts);
    }
    if (dim_cmd->parsed()) {
      if (dim_opts.fractal.empty() && dim_opts.points.empty() && dim_opts.policy.empty()) {
        std::cerr << "error: dim needs --fractal, --points or --policy\n" << dim_cmd->help();
        return kUsageError;
      }
      return cmd_dim(dim_opts);
    }
    if (robust_cmd->parsed()) return cmd_robust(robust_opts);
    if (fractal_cmd->parsed()) return cmd_fractal(fractal_opts);
  } catch (const std::exception& e) {
    std::fflush(stdout);
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeError;
  }
  return kUsageError;
}
