#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qtl/classical_dynamics.hpp"
#include "qtl/phase_grid.hpp"
#include "qtl/quantum_evolution.hpp"
#include "qtl/regime.hpp"
#include "qtl/system.hpp"
#include "qtl/trajectory_record.hpp"

namespace qtl {

/// sqrt((ax - bx)^2 + w (ap - bp)^2)
double phase_distance(PhasePoint a, PhasePoint b, double weight = 1.0) noexcept;

enum class Perturbation { noise_realization, initial_offset };

/// Branch-and-track protocol: each fiducial trajectory is followed and, at
/// n_branch_points times spaced branch_spacing apart (the first one
/// branch_spacing after the start), a neighbour is spawned and the pair is
/// co-evolved for track_time while ln Delta(tau) is recorded.
struct BranchProtocol {
    std::size_t n_fiducial = 10;
    PhasePoint start{-3.0, 8.0};
    /// Fiducial starts are drawn uniformly from a disc of this radius.
    double start_dispersion = 0.0;
    std::size_t n_branch_points = 17;
    double branch_spacing = 20.0;
    double track_time = 8.0;
    Perturbation perturbation = Perturbation::noise_realization;
    /// Offset size for Perturbation::initial_offset (random direction).
    double delta0 = 1e-6;
    /// Spacing of the recorded ln Delta curve.
    double sample_interval = 0.05;
    double metric_weight = 1.0;
    /// Mean separation at the start of the fit window that counts as saturated.
    double saturation_delta = 1.0;

    bool operator==(const BranchProtocol&) const = default;

    void validate() const;
    bool windows_overlap() const noexcept { return branch_spacing < track_time; }
};

struct FitWindow {
    double begin = 1.0;
    double end = 6.0;

    bool operator==(const FitWindow&) const = default;
};

struct CurvePoint {
    double tau = 0.0;
    double mean_ln_delta = 0.0;
    double std_error = 0.0;
};

/// Compares local slopes in the first and last thirds of the fit window;
/// a ratio outside [0.5, 2] means the window has no clean linear region.
struct LinearityDiagnostic {
    double early_slope = 0.0;
    double late_slope = 0.0;
    double r_squared = 0.0;
    bool washed_out = false;
};

struct LyapunovResult {
    /// Mean of the per-fiducial slopes and its standard error.
    double lambda = 0.0;
    double std_error = 0.0;
    /// Single slope fitted to the grand mean curve.
    double pooled_lambda = 0.0;
    double pooled_std_error = 0.0;
    std::vector<CurvePoint> curve;
    FitWindow fit_window;
    std::size_t n_samples = 0;
    std::vector<double> fiducial_slopes;
    LinearityDiagnostic linearity;
};

/// ln Delta series for every (fiducial, branch) instance on a shared tau grid.
struct SeparationSet {
    std::vector<double> tau;
    std::vector<std::size_t> fiducial;            ///< fiducial index of each instance
    std::vector<std::vector<double>> ln_delta;    ///< [instance][tau index]
};

/// Fits the separation curves. Throws NumericalError if every separation
/// is zero or any is zero inside the curve (identical noise streams), or if
/// the mean separation has already saturated at the window start.
LyapunovResult analyze_separations(const SeparationSet& set, FitWindow window, double saturation_delta = 1.0);

struct ClassicalSystem {
    SystemParams params;
    NoiseSpec noise;
    double dt = 1e-3;
};

struct QuantumSystem {
    SystemParams params;
    MeasureParams measure;
    Grid grid;
    double initial_sigma = 0.0;  ///< width of the initial Gaussian
    double dt = 1e-3;
    QuantumOptions options;
};

SeparationSet collect_separations(const BranchProtocol& proto, const ClassicalSystem& sys, std::uint64_t seed,
                                  int workers = 1);
SeparationSet collect_separations(const BranchProtocol& proto, const QuantumSystem& sys, std::uint64_t seed,
                                  int workers = 1);

LyapunovResult lyapunov_estimate(const BranchProtocol& proto, const ClassicalSystem& sys, FitWindow window,
                                 std::uint64_t seed, int workers = 1);
LyapunovResult lyapunov_estimate(const BranchProtocol& proto, const QuantumSystem& sys, FitWindow window,
                                 std::uint64_t seed, int workers = 1);

struct StrobePoint {
    std::int64_t period_index = 0;
    double t = 0.0;
    double x = 0.0;
    double p = 0.0;
};

/// Linear interpolation of (mean_x, mean_p) to t_n = phase/omega + n 2pi/omega,
/// for every t_n in [max(t_skip, first sample), last sample]. `phase` is
/// the drive phase in radians and is taken modulo 2 pi; period_index is n.
std::vector<StrobePoint> stroboscopic_map(std::span<const SeriesSample> series, double omega, double phase,
                                          double t_skip);

/// Non-overlapping boxcar means over windows of round(window/dt) samples,
/// each stamped with the mean time of its samples. A trailing partial
/// window is dropped. Throws if window is not an integer multiple of dt.
std::vector<RecordSample> band_limit_record(std::span<const RecordSample> raw, double dt, double window);

struct SweepRow {
    double k = 0.0;
    RegimeReport regime;
    LyapunovResult result;
};

/// One quantum Lyapunov estimate per k (same seed tree for every k).
/// Each k must not violate the localization or noise condition.
std::vector<SweepRow> k_sensitivity_sweep(std::span<const double> k_values, const QuantumSystem& base,
                                          const BranchProtocol& proto, FitWindow window, std::uint64_t seed,
                                          const TrajectoryStats& stats, const RecordSpec& record, int workers = 1);

}  // namespace qtl
