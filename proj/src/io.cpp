#include "dimshape/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dimshape {

using nlohmann::json;

namespace {

json stats_to_json(const RunningStats& s) {
  return {{"count", s.count()}, {"mean", s.mean()}, {"m2", s.m2()}};
}

RunningStats stats_from_json(const json& j) {
  return RunningStats(j.at("count").get<std::uint64_t>(), j.at("mean").get<std::vector<double>>(),
                      j.at("m2").get<std::vector<double>>());
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw format_error(std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw format_error("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::string csv_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return format_double(x);
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

json to_json(const PolicyFile& f) {
  const auto& p = f.policy;
  json prov = {{"config_hash", f.provenance.config_hash},
               {"seed", f.provenance.seed},
               {"postprocessor", f.provenance.postprocessor},
               {"epochs", f.provenance.epochs},
               {"phase_boundary", f.provenance.phase_boundary ? json(*f.provenance.phase_boundary)
                                                               : json(nullptr)}};
  return {{"schema_version", f.schema_version},
          {"env", f.env},
          {"weights", {{"rows", p.weights.rows}, {"cols", p.weights.cols}, {"data", p.weights.data}}},
          {"obs_stats", stats_to_json(p.obs_stats)},
          {"provenance", prov}};
}

PolicyFile policy_from_json(const json& j) {
  try {
    PolicyFile f;
    f.schema_version = j.at("schema_version").get<int>();
    if (f.schema_version > kPolicySchemaVersion)
      throw format_error("policy schema version " + std::to_string(f.schema_version) +
                         " is newer than supported version " + std::to_string(kPolicySchemaVersion));
    if (f.schema_version < 1) throw format_error("invalid policy schema version");
    f.env = j.at("env").get<std::string>();
    const auto& w = j.at("weights");
    f.policy.weights.rows = w.at("rows").get<std::size_t>();
    f.policy.weights.cols = w.at("cols").get<std::size_t>();
    f.policy.weights.data = w.at("data").get<std::vector<double>>();
    if (f.policy.weights.data.size() != f.policy.weights.rows * f.policy.weights.cols)
      throw format_error("weight matrix size does not match its shape");
    f.policy.obs_stats = stats_from_json(j.at("obs_stats"));
    if (f.policy.obs_stats.dim() != f.policy.weights.cols)
      throw format_error("observation statistics do not match weight columns");
    const auto& prov = j.at("provenance");
    f.provenance.config_hash = prov.at("config_hash").get<std::uint64_t>();
    f.provenance.seed = prov.at("seed").get<std::uint64_t>();
    f.provenance.postprocessor = prov.at("postprocessor").get<std::string>();
    f.provenance.epochs = prov.at("epochs").get<std::size_t>();
    if (!prov.at("phase_boundary").is_null())
      f.provenance.phase_boundary = prov.at("phase_boundary").get<std::size_t>();
    return f;
  } catch (const json::exception& e) {
    throw format_error(std::string("corrupt policy file: ") + e.what());
  } catch (const contract_error& e) {
    throw format_error(std::string("corrupt policy file: ") + e.what());
  }
}

void save_policy(const std::filesystem::path& path, const PolicyFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw format_error("cannot write " + path.string());
  out << to_json(file).dump(2) << '\n';
  if (!out) throw format_error("failed writing " + path.string());
}

PolicyFile load_policy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw format_error("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw format_error("corrupt policy file: " + std::string(e.what()));
  }
  return policy_from_json(j);
}

void RunConfig::validate() const {
  (void)make_env_spec(env);
  ars.validate();
  post.validate();
  disturbance.validate();
  if (seeds == 0) throw std::invalid_argument("need at least one seed");
}

json to_json(const RunConfig& c) {
  json j = {
      {"env", c.env},
      {"seeds", c.seeds},
      {"base_seed", c.base_seed},
      {"checkpoint_interval", c.checkpoint_interval},
      {"ars",
       {{"step_size", c.ars.step_size},
        {"exploration_std", c.ars.exploration_std},
        {"directions", c.ars.directions},
        {"top_directions", c.ars.top_directions},
        {"epochs", c.ars.epochs},
        {"rollout_length", c.ars.rollout_length},
        {"eval_interval", c.ars.eval_interval}}},
      {"postprocessor",
       {{"kind", to_string(c.post.kind)},
        {"transient", c.post.transient},
        {"growth_factor", c.post.mesh.growth_factor},
        {"initial_box_size", c.post.mesh.initial_box_size},
        {"upper_window", c.post.mesh.upper_window}}},
      {"disturbance",
       {{"action_noise_std", c.disturbance.action_noise_std},
        {"obs_noise_std", c.disturbance.obs_noise_std},
        {"push_magnitude", c.disturbance.push_magnitude},
        {"push_rate", c.disturbance.push_rate}}},
  };
  j["two_phase"] = c.two_phase ? json{{"base_epochs", c.two_phase->base_epochs},
                                      {"tune_epochs", c.two_phase->tune_epochs}}
                               : json(nullptr);
  return j;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  try {
    reject_unknown(j, {"env", "seeds", "base_seed", "checkpoint_interval", "ars", "postprocessor",
                       "disturbance", "two_phase"},
                   "config");
    read_opt(j, "env", c.env);
    read_opt(j, "seeds", c.seeds);
    read_opt(j, "base_seed", c.base_seed);
    read_opt(j, "checkpoint_interval", c.checkpoint_interval);
    if (j.contains("ars")) {
      const auto& a = j.at("ars");
      reject_unknown(a, {"step_size", "exploration_std", "directions", "top_directions", "epochs",
                         "rollout_length", "eval_interval"},
                     "ars");
      read_opt(a, "step_size", c.ars.step_size);
      read_opt(a, "exploration_std", c.ars.exploration_std);
      read_opt(a, "directions", c.ars.directions);
      read_opt(a, "top_directions", c.ars.top_directions);
      read_opt(a, "epochs", c.ars.epochs);
      read_opt(a, "rollout_length", c.ars.rollout_length);
      read_opt(a, "eval_interval", c.ars.eval_interval);
    }
    if (j.contains("postprocessor")) {
      const auto& p = j.at("postprocessor");
      reject_unknown(p, {"kind", "transient", "growth_factor", "initial_box_size", "upper_window"},
                     "postprocessor");
      if (p.contains("kind")) c.post.kind = parse_postprocessor(p.at("kind").get<std::string>());
      read_opt(p, "transient", c.post.transient);
      read_opt(p, "growth_factor", c.post.mesh.growth_factor);
      read_opt(p, "initial_box_size", c.post.mesh.initial_box_size);
      read_opt(p, "upper_window", c.post.mesh.upper_window);
    }
    if (j.contains("disturbance")) {
      const auto& d = j.at("disturbance");
      reject_unknown(d, {"action_noise_std", "obs_noise_std", "push_magnitude", "push_rate"},
                     "disturbance");
      read_opt(d, "action_noise_std", c.disturbance.action_noise_std);
      read_opt(d, "obs_noise_std", c.disturbance.obs_noise_std);
      read_opt(d, "push_magnitude", c.disturbance.push_magnitude);
      read_opt(d, "push_rate", c.disturbance.push_rate);
    }
    if (j.contains("two_phase") && !j.at("two_phase").is_null()) {
      const auto& t = j.at("two_phase");
      reject_unknown(t, {"base_epochs", "tune_epochs"}, "two_phase");
      TwoPhase tp;
      read_opt(t, "base_epochs", tp.base_epochs);
      read_opt(t, "tune_epochs", tp.tune_epochs);
      c.two_phase = tp;
    }
  } catch (const json::exception& e) {
    throw format_error(std::string("invalid config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw format_error(std::string("invalid config: ") + e.what());
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw format_error(std::string("invalid config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw format_error("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw format_error("corrupt config file: " + std::string(e.what()));
  }
  return run_config_from_json(j);
}

std::uint64_t config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(cfg).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

TwoPhase parse_two_phase(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("two-phase split must look like A:B");
  auto parse = [&](std::string_view s) {
    std::size_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
      throw std::invalid_argument("two-phase split must look like A:B");
    return v;
  };
  const std::string_view sv(text);
  return {parse(sv.substr(0, colon)), parse(sv.substr(colon + 1))};
}

void write_mesh_curve_csv(std::ostream& out, const MeshCurve& curve) {
  out << "d,m,log10_d,neg_log10_m\n";
  for (const auto& e : curve.entries)
    out << csv_double(e.box_size) << ',' << e.mesh_size << ',' << csv_double(std::log10(e.box_size))
        << ',' << csv_double(-std::log10(static_cast<double>(e.mesh_size))) << '\n';
}

void write_history_csv(std::ostream& out, const TrainHistory& h) {
  out << "epoch,phase,postprocessor,mean_shaped,mean_raw,mean_dimension,max_raw,"
         "early_terminations,negative_returns,eval_raw,policy_hash\n";
  for (const auto& e : h.epochs) {
    const int phase = h.phase_boundary && e.epoch > *h.phase_boundary ? 2 : 1;
    out << e.epoch << ',' << phase << ',' << e.postprocessor << ',' << csv_double(e.mean_shaped)
        << ',' << csv_double(e.mean_raw) << ',' << csv_double(e.mean_dimension) << ','
        << csv_double(e.max_raw) << ',' << e.early_terminations << ',' << e.negative_returns << ','
        << csv_double(e.eval_raw) << ',' << e.policy_hash << '\n';
  }
}

void write_dimension_report_csv(std::ostream& out, const DimensionReport& r) {
  out << "seed_index,rollout_index,rollout_seed,length,terminated_early,raw_return,lower_mesh_dim,"
         "upper_mesh_dim,madogram,variogram\n";
  for (const auto& row : r.rows)
    out << row.seed_index << ',' << row.rollout_index << ',' << row.rollout_seed << ',' << row.length
        << ',' << (row.terminated_early ? 1 : 0) << ',' << csv_double(row.raw_return) << ','
        << csv_double(row.lower) << ',' << csv_double(row.upper) << ','
        << csv_double(row.madogram) << ',' << csv_double(row.variogram) << '\n';
}

void write_robustness_csv(std::ostream& out, std::span<const RobustnessReport> reports,
                          std::optional<std::size_t> selected) {
  out << "action_noise_std,obs_noise_std,push_magnitude,push_rate,n_rollouts,failure_count,"
         "failure_rate,selected\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    out << csv_double(r.disturbance.action_noise_std) << ','
        << csv_double(r.disturbance.obs_noise_std) << ','
        << csv_double(r.disturbance.push_magnitude) << ',' << csv_double(r.disturbance.push_rate)
        << ',' << r.n_rollouts << ',' << r.failure_count << ',' << csv_double(r.failure_rate) << ','
        << (selected && *selected == i ? 1 : 0) << '\n';
  }
}

void write_points_csv(std::ostream& out, std::span<const StateVector> points) {
  const std::size_t dim = points.empty() ? 0 : points.front().size();
  for (std::size_t c = 0; c < dim; ++c) out << (c ? "," : "") << 'x' << c;
  out << '\n';
  for (const auto& p : points) {
    for (std::size_t c = 0; c < p.size(); ++c) out << (c ? "," : "") << csv_double(p[c]);
    out << '\n';
  }
}

std::vector<StateVector> read_points_csv(std::istream& in) {
  std::vector<StateVector> points;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    StateVector row;
    bool numeric = true;
    std::size_t start = 0;
    while (start <= line.size()) {
      const std::size_t end = std::min(line.find(',', start), line.size());
      std::string cell = line.substr(start, end - start);
      char* stop = nullptr;
      const double v = std::strtod(cell.c_str(), &stop);
      if (cell.empty() || stop != cell.c_str() + cell.size()) numeric = false;
      row.push_back(v);
      start = end + 1;
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw format_error("non-numeric row in point file: " + line);
    }
    first = false;
    if (!points.empty() && row.size() != points.front().size())
      throw format_error("ragged point file");
    points.push_back(std::move(row));
  }
  return points;
}

json to_json(const MeshCurve& curve) {
  json entries = json::array();
  for (const auto& e : curve.entries) entries.push_back({{"d", e.box_size}, {"m", e.mesh_size}});
  return {{"data_size", curve.data_size}, {"entries", entries}};
}

json to_json(const DimensionReport& r) {
  auto agg = [](const Aggregate& a) {
    auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
    return json{{"mean", num(a.mean)}, {"std", num(a.std)}, {"seeds", a.count}};
  };
  return {{"rollouts", r.rows.size()},
          {"lower_mesh_dim", agg(r.lower)},
          {"upper_mesh_dim", agg(r.upper)},
          {"madogram", agg(r.madogram)},
          {"variogram", agg(r.variogram)},
          {"raw_return", agg(r.raw_return)}};
}

}  // namespace dimshape
