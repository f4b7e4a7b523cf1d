#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qtl/chaos_analysis.hpp"
#include "qtl/classical_dynamics.hpp"
#include "qtl/regime.hpp"
#include "qtl/system.hpp"

namespace qtl {

enum class Mode { quantum, classical, lyapunov, strobe, regime, sweep };
enum class NoiseModel { none, matched, manual };
enum class SystemKind { classical, quantum };

std::string_view to_string(Mode m) noexcept;
std::optional<Mode> parse_mode(std::string_view s) noexcept;

/// Fully resolved run configuration. Optional members are "auto": they are
/// derived at run time from the rest of the configuration.
struct RunConfig {
    Mode mode = Mode::quantum;
    std::optional<std::uint64_t> seed;

    SystemParams system;
    MeasureParams measure;

    NoiseModel noise_model = NoiseModel::matched;
    NoiseSpec noise;                        ///< used when noise_model == manual
    std::optional<double> noise_var_x_bar;  ///< matched model: mean quantum Vx

    double grid_x_min = -10.0;
    double grid_x_max = 10.0;
    std::optional<std::size_t> grid_n;

    PhasePoint init{-3.0, 8.0};
    std::optional<double> init_sigma;

    std::optional<double> dt;
    double T = 10.0;
    std::size_t sample_every = 10;
    double transient_periods = 2.0;

    RecordSpec record;

    SystemKind lyapunov_system = SystemKind::classical;
    BranchProtocol protocol;
    FitWindow fit;

    SystemKind strobe_system = SystemKind::classical;
    double strobe_phase = 0.0;
    double strobe_t_skip = 0.0;
    std::size_t ensemble_n_traj = 1;
    double ensemble_dispersion = 0.0;
    bool ensemble_write_trajectories = false;

    std::vector<double> sweep_k;

    std::optional<double> regime_dF;
    std::optional<double> regime_unstable_dF;
    std::optional<double> regime_d2F_over_F;
    std::optional<double> regime_action;
    double regime_estimate_T = 50.0;

    int fft_threads = 1;
    double leak_threshold = kDefaultLeakThreshold;

    std::string output_dir = "out";

    bool operator==(const RunConfig&) const = default;

    bool is_stochastic() const noexcept { return mode != Mode::regime; }
};

/// Parses the flat `key = value` format: one assignment per line, `#`
/// starts a comment, dotted keys address sub-configs (`measure.k = 1e5`).
/// Omitted keys take their documented defaults; `mode` is required, and
/// `seed` is required for every stochastic mode. Errors are ConfigError
/// carrying the offending line number.
RunConfig parse_config(std::string_view text);

/// Command-line values applied after the file is read and before the
/// required-key and invariant checks. A mode that contradicts the file's
/// `mode` is a ConfigError.
struct ConfigOverrides {
    std::optional<Mode> mode;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
};
RunConfig parse_config(std::string_view text, const ConfigOverrides& overrides);

/// Canonical text form; parse_config(render_config(c)) == c.
/// With `include_output = false` the output directory is left out, which
/// is the form embedded in result files and hashed into the fingerprint.
std::string render_config(const RunConfig& c, bool include_output = true);

/// FNV-1a 64 hash of render_config(c, false).
std::uint64_t config_fingerprint(const RunConfig& c);

/// Every recognised key, in canonical order.
std::vector<std::string> config_keys();

}  // namespace qtl
