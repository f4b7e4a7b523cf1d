#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qtl/chaos_analysis.hpp"
#include "qtl/config.hpp"
#include "qtl/csv.hpp"
#include "qtl/trajectory_record.hpp"

namespace qtl {

/// Quantities derived from the "auto" entries of a RunConfig.
/// resolve_config fills every auto entry the mode uses, so the result is
/// what gets embedded in outputs and can be fed back in unchanged.
RunConfig resolve_config(const RunConfig& c);

Grid resolve_grid(const RunConfig& c);
double resolve_sigma(const RunConfig& c);
/// Quantum step: config value, or the dt_bounds recommendation shrunk so
/// that record.window is an integer number of steps.
double resolve_quantum_dt(const RunConfig& c, const Grid& grid);
double resolve_classical_dt(const RunConfig& c);
/// Matched model: noise.var_x_bar, or a closure calibration over ten drive
/// periods from init when it is auto.
double resolve_var_x_bar(const RunConfig& c);
NoiseSpec resolve_noise(const RunConfig& c);
TrajectoryStats resolve_stats(const RunConfig& c);

ClassicalSystem classical_system(const RunConfig& c);
QuantumSystem quantum_system(const RunConfig& c);

/// Per-trajectory start: init, displaced uniformly within a disc of radius
/// ensemble.start_dispersion using the trajectory's own substream.
PhasePoint ensemble_start(const RunConfig& c, std::uint64_t run);

struct TrajectoryOutcome {
    std::uint64_t run = 0;
    std::uint64_t seed = 0;
    std::optional<TrajectoryRecord> record;  ///< absent on failure
    std::vector<StrobePoint> strobe;
    std::string error;                       ///< empty on success
    bool numerical_failure = false;
};

struct EnsembleResult {
    std::vector<TrajectoryOutcome> runs;     ///< indexed by run
    std::vector<csv::StrobeRow> strobe;      ///< sorted by (run, period_index)

    std::size_t failures() const noexcept;
};

/// Concatenates and sorts by (run, period_index).
std::vector<csv::StrobeRow> merge_strobe(std::vector<csv::StrobeRow> rows);

/// Runs n_traj trajectories of the config's system (classical for mode
/// classical, strobe.system for strobe, quantum otherwise) on up to
/// `workers` threads. Trajectory i uses substream (seed, i). A failing
/// trajectory is reported in its slot; the others are kept.
EnsembleResult run_ensemble(const RunConfig& c, std::size_t n_traj, int workers = 1);

struct RunResult {
    std::string summary;
    std::vector<std::filesystem::path> files;
};

/// Executes the config's mode, writing outputs under c.output_dir.
/// Throws ConfigError for unusable settings and NumericalError when a
/// trajectory leaks or diverges (after writing what succeeded).
RunResult run(const RunConfig& c, int workers = 1);

}  // namespace qtl
