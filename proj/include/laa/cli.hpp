#pragma once

#include "laa/dynamics.hpp"
#include "laa/error.hpp"
#include "laa/oracle.hpp"
#include "laa/response.hpp"
#include "laa/scheduling.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace laa::cli {

/// Invalid configuration; the message starts with the offending field path.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

enum class OutputFormat { Csv, Json };

struct SimulateConfig {
  std::vector<int> buses;
  double attack_mw = 0.0;  // per attacked bus
  double start = 0.0;
  double duration = 15.0;  // 0: step held to t_end
  double t_end = 30.0;
  MonitorMode mode = MonitorMode::Observe;
};

struct SweepConfig {
  SweepOptions options;
};

struct PredictConfig {
  std::vector<int> generators;       // empty: the renewable generators
  std::vector<double> relative_dm{-0.45};  // dM_g / M_g
  double horizon = 20.0;
  double step = 0.01;
};

struct SensConfig {
  double horizon = 20.0;
  double step = 0.05;
};

struct TemporalConfig {
  std::filesystem::path profile;
  std::map<int, double> allocation;  // empty: the attack bus carries everything
  double scale = 1.0;
  double sigma = 0.0;
  int runs = 1;
  ScheduleOptions schedule;
};

struct IngestConfig {
  std::vector<std::filesystem::path> series;
  std::filesystem::path mapping;
  std::string quantity = "penetration";
  std::optional<double> local_offset_hours;  // default: the mapping's input offset
  double p_low = 5.0;
  double p_high = 95.0;
};

struct RunConfig {
  std::filesystem::path case_path;
  std::vector<double> scenarios{0.0};
  std::vector<int> renewable_generators;  // empty: the last generator bus
  PenetrationScaling scaling = PenetrationScaling::InertiaAndDamping;
  double threshold_hz = 0.1;
  std::optional<int> target_generator;  // empty: all generators
  std::optional<int> attack_bus;        // empty: all load buses
  ProtectionScheme protection;
  bool feasibility = false;
  std::vector<double> feasibility_mw;
  std::filesystem::path out = "out";
  OutputFormat format = OutputFormat::Csv;
  std::uint64_t seed = 0;
  std::size_t threads = 0;

  SimulateConfig simulate;
  SweepConfig sweep;
  PredictConfig predict;
  SensConfig sens;
  TemporalConfig temporal;
  IngestConfig ingest;
};

/// Reads a JSON config file; relative paths inside it resolve against the
/// file's directory.
nlohmann::json read_config_document(const std::filesystem::path& path);

/// Validates a merged config document. `command` selects which referenced
/// paths must exist.
RunConfig parse_config(const nlohmann::json& doc, const std::string& command);

/// A named output file; written only after the whole command succeeded.
struct OutputFile {
  std::string name;
  std::string text;
};

std::vector<OutputFile> run_command(const std::string& command, const RunConfig& config);

/// Converts a CSV table to a JSON array of row objects; numeric cells become numbers.
std::string csv_to_json(const std::string& csv_text);

/// Writes every file under `dir` via temporaries, so a failure leaves no partial set.
void write_outputs(const std::filesystem::path& dir, const std::vector<OutputFile>& files);

/// Entry point of the `laa` tool; returns the process exit code.
int run(int argc, char** argv);

}  // namespace laa::cli
