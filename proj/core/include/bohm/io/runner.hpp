#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bohm/field.hpp"
#include "bohm/io/emit.hpp"
#include "bohm/io/scenario.hpp"
#include "bohm/tise.hpp"
#include "bohm/trajectory.hpp"

namespace bohm::io {

inline constexpr const char* kOutputRootEnv = "BOHM_OUTPUT_ROOT";

/// $BOHM_OUTPUT_ROOT, else ./runs.
std::filesystem::path default_output_root();

struct RunOptions {
  std::filesystem::path out_dir;  // empty: <output root>/<name>-seed<seed>
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  bool override_stability = false;
  bool write = true;  // false keeps everything in memory
  // Called with (t, psi) at every snapshot of single-particle wave runs.
  std::function<void(double, const ComplexField&)> on_snapshot;
};

struct RunResult {
  std::filesystem::path dir;
  std::vector<WrittenFile> files;
  double stability_factor = 0.0;
  std::size_t node_carries = 0;
  std::size_t boundary_hits = 0;
  double max_norm_drift = 0.0;
  TrajectoryEnsemble ensemble;  // many-body runs: id = member * 2 + particle
  std::optional<ComplexField> final_psi;
  std::vector<TransmissionPoint> scan;
  std::string observables_json;
  std::string manifest_json;
};

/// Runs the scenario, writes fields.csv, trajectories.csv, observables.json,
/// transmission.csv (with a scan) and manifest.json. Solver errors are
/// rethrown with the scenario name prepended and their type kept.
RunResult run_scenario(ScenarioConfig cfg, const RunOptions& opts = {});

/// |t|^2 and |r|^2 of the scenario's potential on its grid.
std::vector<TransmissionPoint> scan_transmission(const ScenarioConfig& cfg, double emin, double emax, double de);
std::string transmission_csv(const std::vector<TransmissionPoint>& scan, const UnitSystem& units, std::size_t* rows = nullptr);

/// The scenario's initial single-particle state on its grid.
ComplexField initial_state(const ScenarioConfig& cfg);

}  // namespace bohm::io
