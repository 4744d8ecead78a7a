#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dimshape/ars.hpp"
#include "dimshape/box_mesh.hpp"
#include "dimshape/eval.hpp"
#include "dimshape/postprocessors.hpp"

namespace dimshape {

inline constexpr int kPolicySchemaVersion = 1;

class format_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Provenance {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> phase_boundary;
  std::string postprocessor = "identity";
  std::size_t epochs = 0;
};

struct PolicyFile {
  int schema_version = kPolicySchemaVersion;
  std::string env;
  LinearPolicy policy;
  Provenance provenance;
};

nlohmann::json to_json(const PolicyFile& file);
/// Throws format_error on schema mismatch or malformed content.
PolicyFile policy_from_json(const nlohmann::json& j);

void save_policy(const std::filesystem::path& path, const PolicyFile& file);
PolicyFile load_policy(const std::filesystem::path& path);

struct TwoPhase {
  std::size_t base_epochs = 200;
  std::size_t tune_epochs = 100;
};

/// Everything a training run needs, as one declarative document.
struct RunConfig {
  std::string env = "pendulum";
  ArsConfig ars;
  PostprocessorConfig post;
  std::optional<TwoPhase> two_phase;
  DisturbanceConfig disturbance;
  std::size_t seeds = 1;
  std::uint64_t base_seed = 0;
  std::size_t checkpoint_interval = 50;

  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Strict: unknown keys raise format_error; missing keys take the defaults.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
std::uint64_t config_hash(const RunConfig& cfg);

/// Parses "A:B" into a two-phase split.
TwoPhase parse_two_phase(const std::string& text);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

void write_mesh_curve_csv(std::ostream& out, const MeshCurve& curve);
void write_history_csv(std::ostream& out, const TrainHistory& history);
void write_dimension_report_csv(std::ostream& out, const DimensionReport& report);
void write_robustness_csv(std::ostream& out, std::span<const RobustnessReport> reports,
                          std::optional<std::size_t> selected = std::nullopt);
void write_points_csv(std::ostream& out, std::span<const StateVector> points);
/// Reads comma-separated rows of equal width; a non-numeric first row is a header.
std::vector<StateVector> read_points_csv(std::istream& in);

nlohmann::json to_json(const DimensionReport& report);
nlohmann::json to_json(const MeshCurve& curve);

}  // namespace dimshape
