#pragma once

#include <cstddef>
#include <cstdint>

#include "qtl/rng.hpp"
#include "qtl/system.hpp"
#include "qtl/trajectory_record.hpp"

namespace qtl {

struct ClassicalState {
    double x = 0.0;
    double p = 0.0;
    double t = 0.0;
};

/// Additive white noise: x += sigma_x dW1, p += sigma_p dW2 each step.
struct NoiseSpec {
    double sigma_x = 0.0;
    double sigma_p = 0.0;

    bool operator==(const NoiseSpec&) const = default;

    bool silent() const noexcept { return sigma_x == 0.0 && sigma_p == 0.0; }
};

/// Noise matched to the measurement back-action on the state estimate:
/// sigma_p = hbar sqrt(2k), sigma_x = sqrt(2k) * mean_var_x.
NoiseSpec matched_noise(const MeasureParams& mp, double mean_var_x);

/// Kick-drift-kick leapfrog with the drive evaluated at the kick times
/// (t and t + dt), followed by the additive noise for standard normals
/// (n1, n2). Time-reversible for zero noise.
ClassicalState classical_step(const ClassicalState& s, double dt, const SystemParams& p, const NoiseSpec& ns,
                              double n1, double n2);

double classical_energy(const ClassicalState& s, const SystemParams& p);

/// A classical trajectory with its own noise stream.
class ClassicalSimulation {
public:
    ClassicalSimulation(ClassicalState init, const SystemParams& p, const NoiseSpec& ns, double dt,
                        std::uint64_t seed);

    void step();
    /// Throws NumericalError if the orbit diverges.
    void advance(std::size_t steps);

    double time() const noexcept { return state_.t; }
    double dt() const noexcept { return dt_; }
    const ClassicalState& state() const noexcept { return state_; }
    PhasePoint phase_point() const noexcept { return {state_.x, state_.p}; }

    void reseed(std::uint64_t seed) { noise_.reseed(seed); }
    void displace(double dx, double dp) {
        state_.x += dx;
        state_.p += dp;
    }

private:
    ClassicalState state_;
    SystemParams params_;
    NoiseSpec noise_spec_;
    double dt_;
    rng::NormalStream noise_;
};

/// Integrates round(T/dt) steps, sampling every `sample_every` steps
/// (including the start). Throws NumericalError on divergence.
TrajectoryRecord run_classical_trajectory(const ClassicalState& init, double T, double dt, const SystemParams& p,
                                          const NoiseSpec& ns, std::uint64_t seed, std::size_t sample_every);

}  // namespace qtl
