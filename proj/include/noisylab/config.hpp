#pragma once

// Batch front end: config ingestion and validation, command dispatch, CSV and
// manifest emission. One command per config document.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "noisylab/freqmodel.hpp"
#include "noisylab/mcsim.hpp"
#include "noisylab/noise.hpp"

namespace noisylab::cli {

inline constexpr std::string_view kToolName = "noisylab";
inline constexpr std::string_view kToolVersion = "0.1.0";

enum class Command { Tau, Weight, Simulate, Bounds, Sweep, NoiseSynth };

std::string_view to_string(Command c) noexcept;
std::optional<Command> command_from_string(std::string_view name);

enum ExitCode : int { kExitOk = 0, kExitInvalid = 2, kExitRuntime = 3 };

struct Violation {
  std::string path;  // dotted field path, e.g. "grid.l[2]"; empty for the whole document
  std::string message;

  std::string str() const;
};

/// Command-line values that take precedence over the config document.
struct Overrides {
  std::optional<std::string> command;
  std::optional<std::string> out;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
};

struct TauJob {
  std::vector<double> raw_values;  // tau_exact runs on these, unnormalized
  PriorSpec prior;                 // normalized, for MC and weights
  std::uint64_t n = 0;
  std::vector<std::uint64_t> ls;
  std::size_t replicates = 0;  // normalized-mode MC; 0 skips it
  std::size_t weight_replicates = 1000;
};

struct WeightJob {
  PriorSpec prior;
  std::vector<Interval> intervals;
  std::size_t replicates = 1000;
};

struct SimulateJob {
  InstanceScenario scenario;
  std::vector<Treatment> treatments;
};

struct BoundsJob {
  InstanceScenario scenario;
};

struct SweepJob {
  std::vector<InstanceScenario> scenarios;
};

struct NoiseSynthJob {
  double epsilon = 0.2;
  double sigma = 0.1;
  std::size_t dim = 8;
  std::size_t samples = 1000;
  RateCombiner combiner = RateCombiner::ScaledLogisticV1;
};

using Job = std::variant<TauJob, WeightJob, SimulateJob, BoundsJob, SweepJob, NoiseSynthJob>;

struct RunConfig {
  Command command = Command::Bounds;
  std::uint64_t seed = 0;
  std::uint64_t trials = 10000;
  std::size_t workers = 1;
  std::string output;
  nlohmann::json document;  // effective config, overrides applied
  Job job;
};

struct Validation {
  std::vector<Violation> violations;
  std::optional<RunConfig> config;

  bool ok() const noexcept { return violations.empty() && config.has_value(); }
};

/// Full schema and range check. Never touches the filesystem.
Validation validate_document(const nlohmann::json& doc, const Overrides& overrides = {});

/// Reads and validates a config file. Unreadable or malformed files yield a
/// single violation with an empty path.
Validation validate_file(const std::string& path, const Overrides& overrides = {});

/// Writes the command's CSV to `out` and returns the number of data rows.
std::size_t write_csv(const RunConfig& config, std::ostream& out);

struct RunResult {
  std::size_t rows = 0;
  std::string csv_path;
  std::string manifest_path;
  double wall_time_seconds = 0.0;
};

/// Runs the command, writing `config.output` and `<output>.manifest.json`.
/// Throws std::runtime_error on I/O failure.
RunResult execute(const RunConfig& config);

nlohmann::json make_manifest(const RunConfig& config, const RunResult& result);

/// Entry point behind `noisylab <command> --config <path> [--out <path>]
/// [--trials N] [--seed S] [--workers W]` and `noisylab validate --config <path>`.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace noisylab::cli
