#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "scif/error.hpp"
#include "scif/localizer.hpp"
#include "scif/map_builder.hpp"
#include "scif/metrics.hpp"
#include "scif/sim.hpp"

namespace scif::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitParse = 2,
  kExitNonConvergence = 3,
  kExitInvalidInput = 4,
};

int exit_code_for(ErrorCode code);

struct RunConfig {
  std::filesystem::path scenario;
  std::vector<std::string> methods;  // empty: every method
  std::filesystem::path out = "out";
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  double success_threshold = 1.0;
  std::vector<std::string> overrides;  // key.path=value
  std::filesystem::path streams;       // localize: stream directory; empty: synthesize
  std::filesystem::path map;           // localize: tag-map file; empty: scenario layout
  std::filesystem::path session;       // build-map input
  bool write_session = false;          // simulate: also emit a mapping session
  int seeds = 10;                      // sweep: consecutive seeds from the base seed
  int max_iterations = 50;             // build-map
};

/// Scenario with overrides and the seed override applied.
sim::Scenario load_run_scenario(const RunConfig& cfg);

/// Throws Error(kParse) naming the valid methods on an unknown name.
std::vector<Method> resolve_methods(const std::vector<std::string>& names);

/// Writes truth.csv, odometry.csv, measurements.csv (and mapping_session.json).
void cmd_simulate(const RunConfig& cfg);

struct MethodResult {
  Method method = Method::kScifFull;
  sim::RunRecord record;
  std::optional<ErrorReport> report;  // empty when the method never produced an estimate
};

struct LocalizeResult {
  std::vector<MethodResult> results;  // in requested order
  Method baseline = Method::kTagSlam;
};

/// Runs each method (in parallel up to cfg.jobs) and writes
/// trajectory_<method>.csv, summary.csv, reduction.csv and summary.json.
LocalizeResult cmd_localize(const RunConfig& cfg);

/// Builds tag_map.json in cfg.out from cfg.session. The map is written even
/// when the optimizer does not converge.
OptimizeResult cmd_build_map(const RunConfig& cfg);

struct SweepRow {
  std::uint64_t seed = 0;
  Method method = Method::kScifFull;
  std::optional<ErrorReport> report;
};

/// Monte-Carlo over cfg.seeds seeds; writes sweep_runs.csv and
/// sweep_summary.csv. Rows are ordered by (seed, method).
std::vector<SweepRow> cmd_sweep(const RunConfig& cfg);

/// Command-line front end; returns the process exit code.
int run(int argc, const char* const* argv);

}  // namespace scif::cli
