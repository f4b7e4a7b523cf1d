#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>

#include "qtl/aligned.hpp"
#include "qtl/fft.hpp"
#include "qtl/phase_grid.hpp"
#include "qtl/rng.hpp"
#include "qtl/system.hpp"
#include "qtl/trajectory_record.hpp"

namespace qtl {

struct StepOutcome {
    WaveState state;
    Moments moments;
    double dW = 0.0;
    /// <X> + dW / (sqrt(8 eta k) dt); absent when k == 0.
    std::optional<double> record_sample;
};

struct QuantumOptions {
    int fft_threads = 1;
    double leak_threshold = kDefaultLeakThreshold;
};

/// Split-operator integrator for the position-measured Schrodinger equation.
///
/// One step is a Strang-split unitary step
///     exp(-i T dt/2hbar) exp(-i V(x, t + dt/2) dt/hbar) exp(-i T dt/2hbar)
/// followed by a single diffuse-projection multiplier carrying the whole
/// step's Wiener increment, then renormalization. The multiplier uses the
/// expanded exponent -2k dt u^2 + sqrt(2k) dW u, u = x - <X>; the literal
/// (x - <X> - xi)^2 form differs only by a state-independent constant.
///
/// The propagator owns the kinetic phase table for its current boost and
/// re-centres the state's momentum frame (an exact cyclic shift of the
/// spectrum) whenever the packet drifts an eighth of the way to Nyquist.
class SplitStepPropagator {
public:
    SplitStepPropagator(const Grid& grid, const SystemParams& params, const MeasureParams& measure, double dt,
                        const QuantumOptions& options = {});

    /// Strang unitary step; advances state.t by dt. Throws NumericalError on leak.
    void unitary_step(WaveState& state);
    /// Measurement multiplier and renormalization. Returns the record sample.
    std::optional<double> measure(WaveState& state, double dW) const;
    /// unitary_step then measure.
    std::optional<double> step(WaveState& state, double dW);

    double dt() const noexcept { return dt_; }
    const SystemParams& system() const noexcept { return params_; }
    const MeasureParams& measurement() const noexcept { return measure_; }
    const QuantumOptions& options() const noexcept { return options_; }

private:
    void ensure_table(const WaveState& state);
    std::int64_t recentre(WaveState& state, double mean_k);

    Grid grid_;
    SystemParams params_;
    MeasureParams measure_;
    double dt_;
    QuantumOptions options_;
    std::shared_ptr<const Fft> fft_;
    ComplexVector half_kinetic_;
    std::optional<std::int64_t> table_boost_;
};

/// Strang unitary step only (dt may be negative to run backward).
WaveState unitary_step(WaveState state, double dt, const SystemParams& p, const MeasureParams& mp);

/// Applies the measurement multiplier for increment dW to a normalized state.
/// Throws std::invalid_argument for an unnormalized input.
StepOutcome measurement_update(WaveState state, double dt, double dW, const SystemParams& p,
                               const MeasureParams& mp);

/// One full conditioned step; dW = sqrt(dt) * standard_normal.
StepOutcome sse_step(WaveState state, double dt, double standard_normal, const SystemParams& p,
                     const MeasureParams& mp);

/// Step-size heuristics. `recommended` is min(drive, measurement); the
/// kinetic bound (Nyquist phase per step) is reported for reference only,
/// since the spectral kinetic factor is exact at any dt.
struct DtBounds {
    double drive = 0.0;
    double kinetic = 0.0;
    double measurement = 0.0;
    double recommended = 0.0;
};
DtBounds dt_bounds(const Grid& grid, const SystemParams& p, const MeasureParams& mp, double expected_var_x);

/// A quantum trajectory with its own noise stream. Copies are independent
/// and continue identically until one of them is reseeded.
class QuantumSimulation {
public:
    QuantumSimulation(WaveState init, const SystemParams& p, const MeasureParams& mp, double dt, std::uint64_t seed,
                      const QuantumOptions& options = {});

    /// One conditioned step; returns the record sample (if k > 0).
    std::optional<double> step();
    void advance(std::size_t steps);

    double time() const noexcept { return state_.t; }
    double dt() const noexcept { return propagator_.dt(); }
    const WaveState& state() const noexcept { return state_; }
    Moments moments() const;
    PhasePoint phase_point() const;

    void reseed(std::uint64_t seed) { noise_.reseed(seed); }
    /// Translates the state by dx and kicks it by dp.
    void displace(double dx, double dp);

private:
    WaveState state_;
    SplitStepPropagator propagator_;
    rng::NormalStream noise_;
};

/// Integrates for round(T/dt) steps from `init`, sampling Moments every
/// `sample_every` steps (including t = init.t) and the raw record each step.
/// A leak aborts with NumericalError carrying the failure time.
TrajectoryRecord run_quantum_trajectory(const WaveState& init, double T, double dt, const SystemParams& p,
                                        const MeasureParams& mp, std::uint64_t seed, std::size_t sample_every,
                                        const QuantumOptions& options = {});

SeriesSample to_sample(const Moments& m);

}  // namespace qtl
