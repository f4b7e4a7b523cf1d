#include "qtl/quantum_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qtl/errors.hpp"
#include "qtl/kernels.hpp"

namespace qtl {
namespace {

void check_leak(const char* where, double fraction, double threshold, double t) {
    if (fraction > threshold || !std::isfinite(fraction)) {
        std::ostringstream os;
        os << "state leaked to the " << where << " edge of the grid (edge mass " << fraction << ") at t = " << t;
        throw NumericalError(os.str(), t);
    }
}

}  // namespace

SplitStepPropagator::SplitStepPropagator(const Grid& grid, const SystemParams& params, const MeasureParams& measure,
                                         double dt, const QuantumOptions& options)
    : grid_(grid), params_(params), measure_(measure), dt_(dt), options_(options),
      fft_(Fft::get(grid.n, options.fft_threads)), half_kinetic_(grid.n) {
    params_.validate();
    measure_.validate();
    if (!(std::isfinite(dt) && dt != 0.0)) throw std::invalid_argument("propagator: dt must be finite and nonzero");
}

void SplitStepPropagator::ensure_table(const WaveState& state) {
    if (state.grid.n != grid_.n || state.grid.dx != grid_.dx) {
        throw std::invalid_argument("propagator: state grid does not match");
    }
    if (state.hbar != measure_.hbar) throw std::invalid_argument("propagator: state hbar does not match measure.hbar");
    if (table_boost_ == state.boost) return;
    kernels::kinetic_table(half_kinetic_, grid_, measure_.hbar, params_.m,
                           static_cast<double>(state.boost) * grid_.dk, dt_, 1.0 / static_cast<double>(grid_.n));
    table_boost_ = state.boost;
}

std::int64_t SplitStepPropagator::recentre(WaveState& state, double mean_k) {
    const std::int64_t shift = std::llround(mean_k / grid_.dk);
    if (shift == 0) return 0;
    const auto n = static_cast<std::int64_t>(grid_.n);
    const auto left = static_cast<std::ptrdiff_t>(((shift % n) + n) % n);
    std::rotate(state.amplitudes.begin(), state.amplitudes.begin() + left, state.amplitudes.end());
    state.boost += shift;
    ensure_table(state);
    return shift;
}

void SplitStepPropagator::unitary_step(WaveState& state) {
    ensure_table(state);
    std::span<cplx> psi = state.amplitudes;

    fft_->forward(psi);
    const kernels::WeightedSums ks = kernels::wavenumber_sums(psi, grid_, 0.0);
    check_leak("momentum", kernels::nyquist_mass(psi, grid_.edge_band()) / ks.mass, options_.leak_threshold,
               state.t);
    double mean_k = ks.first / ks.mass;
    const double limit = grid_.nyquist_wavenumber() / 8.0;
    if (std::abs(mean_k) > limit) mean_k -= static_cast<double>(recentre(state, mean_k)) * grid_.dk;

    kernels::multiply(psi, half_kinetic_);
    fft_->backward(psi);

    // A strong force can kick the packet across the whole wavenumber window
    // in one step, so the lattice part of the expected kick goes into the boost.
    const double t_mid = state.t + 0.5 * dt_;
    const kernels::WeightedSums xs = kernels::position_sums(psi, grid_, 0.0);
    const double kick_k = force(xs.first / xs.mass, t_mid, params_) * dt_ / measure_.hbar;
    std::int64_t shift = 0;
    if (std::abs(mean_k + kick_k) > limit) shift = std::llround((mean_k + kick_k) / grid_.dk);
    kernels::potential_phase(psi, grid_, params_, t_mid, dt_ / measure_.hbar, shift);
    state.boost += shift;
    ensure_table(state);

    fft_->forward(psi);
    kernels::multiply(psi, half_kinetic_);
    fft_->backward(psi);
    state.t += dt_;
}

std::optional<double> SplitStepPropagator::measure(WaveState& state, double dW) const {
    std::span<cplx> psi = state.amplitudes;
    const double k = measure_.k;
    if (k == 0.0) {
        check_leak("position", kernels::edge_mass(psi, grid_.edge_band()) / kernels::norm_sq(psi),
                   options_.leak_threshold, state.t);
        return std::nullopt;
    }
    if (!(dt_ > 0.0)) throw std::invalid_argument("measure: dt must be > 0");

    const kernels::WeightedSums s = kernels::position_sums(psi, grid_, 0.0);
    const double mean_x = s.first / s.mass;
    const double quad = 2.0 * k * dt_;
    const double lin = std::sqrt(2.0 * k) * dW;
    // Peak of the exponent; subtracting it keeps every factor <= 1.
    const double offset = lin * lin / (4.0 * quad);
    kernels::measurement_weight(psi, grid_, mean_x, quad, lin, offset);

    const double mass = kernels::norm_sq(psi);
    if (!(mass > 0.0) || !std::isfinite(mass)) {
        throw NumericalError("measurement update annihilated the state", state.t);
    }
    check_leak("position", kernels::edge_mass(psi, grid_.edge_band()) / mass, options_.leak_threshold, state.t);
    kernels::scale(psi, 1.0 / std::sqrt(mass * grid_.dx));
    return mean_x + dW / (std::sqrt(8.0 * measure_.eta * k) * dt_);
}

std::optional<double> SplitStepPropagator::step(WaveState& state, double dW) {
    unitary_step(state);
    return measure(state, dW);
}

WaveState unitary_step(WaveState state, double dt, const SystemParams& p, const MeasureParams& mp) {
    SplitStepPropagator prop(state.grid, p, mp, dt);
    prop.unitary_step(state);
    return state;
}

StepOutcome measurement_update(WaveState state, double dt, double dW, const SystemParams& p,
                               const MeasureParams& mp) {
    if (std::abs(norm(state) - 1.0) > 1e-9) throw std::invalid_argument("measurement_update: state is not normalized");
    if (!(dt > 0.0)) throw std::invalid_argument("measurement_update: dt must be > 0");
    SplitStepPropagator prop(state.grid, p, mp, dt);
    StepOutcome out;
    out.record_sample = prop.measure(state, dW);
    out.dW = dW;
    out.moments = moments(state, p);
    out.state = std::move(state);
    return out;
}

StepOutcome sse_step(WaveState state, double dt, double standard_normal, const SystemParams& p,
                     const MeasureParams& mp) {
    if (!(dt > 0.0)) throw std::invalid_argument("sse_step: dt must be > 0");
    SplitStepPropagator prop(state.grid, p, mp, dt);
    StepOutcome out;
    out.dW = std::sqrt(dt) * standard_normal;
    out.record_sample = prop.step(state, out.dW);
    out.moments = moments(state, p);
    out.state = std::move(state);
    return out;
}

DtBounds dt_bounds(const Grid& grid, const SystemParams& p, const MeasureParams& mp, double expected_var_x) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    DtBounds b;
    b.drive = p.Lambda != 0.0 ? 0.02 / p.omega : inf;
    b.kinetic = 0.1 * p.m * grid.dx * grid.dx / mp.hbar / (std::numbers::pi * std::numbers::pi);
    b.measurement = (mp.k > 0.0 && expected_var_x > 0.0) ? 0.1 / (mp.k * expected_var_x) : inf;
    b.recommended = std::min(b.drive, b.measurement);
    if (!std::isfinite(b.recommended)) b.recommended = b.kinetic;
    return b;
}

QuantumSimulation::QuantumSimulation(WaveState init, const SystemParams& p, const MeasureParams& mp, double dt,
                                     std::uint64_t seed, const QuantumOptions& options)
    : state_(std::move(init)), propagator_(state_.grid, p, mp, dt, options), noise_(seed) {
    if (!(dt > 0.0)) throw std::invalid_argument("QuantumSimulation: dt must be > 0");
}

std::optional<double> QuantumSimulation::step() {
    const double dW = std::sqrt(propagator_.dt()) * noise_.normal();
    return propagator_.step(state_, dW);
}

void QuantumSimulation::advance(std::size_t steps) {
    for (std::size_t i = 0; i < steps; ++i) step();
}

Moments QuantumSimulation::moments() const {
    return qtl::moments(state_, propagator_.system(), propagator_.options().leak_threshold);
}

PhasePoint QuantumSimulation::phase_point() const {
    const Moments m = moments();
    return {m.mean_x, m.mean_p};
}

void QuantumSimulation::displace(double dx, double dp) {
    if (dx != 0.0) {
        const Grid& g = state_.grid;
        auto fft = Fft::get(g.n);
        fft->forward(state_.amplitudes);
        const double inv_n = 1.0 / static_cast<double>(g.n);
        for (std::size_t j = 0; j < g.n; ++j) state_.amplitudes[j] *= std::polar(inv_n, -g.wavenumber(j) * dx);
        fft->backward(state_.amplitudes);
    }
    if (dp != 0.0) apply_momentum_kick(state_, dp);
}

SeriesSample to_sample(const Moments& m) {
    return {m.t, m.mean_x, m.mean_p, m.var_x, m.var_p, m.cov_xp, m.norm, m.energy};
}

TrajectoryRecord run_quantum_trajectory(const WaveState& init, double T, double dt, const SystemParams& p,
                                        const MeasureParams& mp, std::uint64_t seed, std::size_t sample_every,
                                        const QuantumOptions& options) {
    if (!(T > 0.0) || !(dt > 0.0)) throw std::invalid_argument("run_quantum_trajectory: T and dt must be > 0");
    if (sample_every == 0) throw std::invalid_argument("run_quantum_trajectory: sample_every must be >= 1");
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    if (steps == 0) throw std::invalid_argument("run_quantum_trajectory: T shorter than one step");

    QuantumSimulation sim(init, p, mp, dt, seed, options);
    TrajectoryRecord rec;
    rec.seed = seed;
    rec.series.reserve(steps / sample_every + 1);
    if (mp.k > 0.0) rec.raw_record.reserve(steps);
    rec.series.push_back(to_sample(sim.moments()));
    for (std::size_t i = 1; i <= steps; ++i) {
        if (auto y = sim.step()) rec.raw_record.push_back({sim.time(), *y});
        if (i % sample_every == 0) rec.series.push_back(to_sample(sim.moments()));
    }
    return rec;
}

}  // namespace qtl
