#include "qtl/classical_dynamics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qtl/errors.hpp"

namespace qtl {
namespace {

constexpr double kDivergence = 1e6;

void check_finite(const ClassicalState& s) {
    if (!std::isfinite(s.x) || !std::isfinite(s.p) || std::abs(s.x) > kDivergence || std::abs(s.p) > kDivergence) {
        std::ostringstream os;
        os << "classical orbit diverged at t = " << s.t;
        throw NumericalError(os.str(), s.t);
    }
}

SeriesSample sample(const ClassicalState& s, const SystemParams& p) {
    SeriesSample out;
    out.t = s.t;
    out.mean_x = s.x;
    out.mean_p = s.p;
    out.norm = 1.0;
    out.energy = classical_energy(s, p);
    return out;
}

}  // namespace

NoiseSpec matched_noise(const MeasureParams& mp, double mean_var_x) {
    if (!(mean_var_x >= 0.0)) throw std::invalid_argument("matched_noise: mean_var_x must be >= 0");
    return {std::sqrt(2.0 * mp.k) * mean_var_x, mp.hbar * std::sqrt(2.0 * mp.k)};
}

ClassicalState classical_step(const ClassicalState& s, double dt, const SystemParams& p, const NoiseSpec& ns,
                              double n1, double n2) {
    const double half = 0.5 * dt;
    ClassicalState out = s;
    out.p += half * force(out.x, s.t, p);
    out.x += dt * out.p / p.m;
    out.t = s.t + dt;
    out.p += half * force(out.x, out.t, p);
    if (!ns.silent()) {
        const double sq = std::sqrt(std::abs(dt));
        out.x += ns.sigma_x * sq * n1;
        out.p += ns.sigma_p * sq * n2;
    }
    return out;
}

double classical_energy(const ClassicalState& s, const SystemParams& p) {
    return 0.5 * s.p * s.p / p.m + potential(s.x, s.t, p);
}

ClassicalSimulation::ClassicalSimulation(ClassicalState init, const SystemParams& p, const NoiseSpec& ns, double dt,
                                         std::uint64_t seed)
    : state_(init), params_(p), noise_spec_(ns), dt_(dt), noise_(seed) {
    params_.validate();
    if (!(dt > 0.0)) throw std::invalid_argument("ClassicalSimulation: dt must be > 0");
    if (!(ns.sigma_x >= 0.0) || !(ns.sigma_p >= 0.0)) throw std::invalid_argument("noise amplitudes must be >= 0");
}

void ClassicalSimulation::step() {
    double n1 = 0.0, n2 = 0.0;
    if (!noise_spec_.silent()) {
        n1 = noise_.normal();
        n2 = noise_.normal();
    }
    state_ = classical_step(state_, dt_, params_, noise_spec_, n1, n2);
}

void ClassicalSimulation::advance(std::size_t steps) {
    for (std::size_t i = 0; i < steps; ++i) step();
    check_finite(state_);
}

TrajectoryRecord run_classical_trajectory(const ClassicalState& init, double T, double dt, const SystemParams& p,
                                          const NoiseSpec& ns, std::uint64_t seed, std::size_t sample_every) {
    if (!(T > 0.0) || !(dt > 0.0)) throw std::invalid_argument("run_classical_trajectory: T and dt must be > 0");
    if (sample_every == 0) throw std::invalid_argument("run_classical_trajectory: sample_every must be >= 1");
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    ClassicalSimulation sim(init, p, ns, dt, seed);
    TrajectoryRecord rec;
    rec.seed = seed;
    rec.series.reserve(steps / sample_every + 1);
    rec.series.push_back(sample(sim.state(), p));
    for (std::size_t i = 1; i <= steps; ++i) {
        sim.step();
        if (i % sample_every == 0) {
            check_finite(sim.state());
            rec.series.push_back(sample(sim.state(), p));
        }
    }
    check_finite(sim.state());
    return rec;
}

}  // namespace qtl
