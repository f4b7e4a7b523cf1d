#include "qtl/phase_grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qtl/errors.hpp"
#include "qtl/fft.hpp"
#include "qtl/kernels.hpp"

namespace qtl {

std::size_t Grid::edge_band() const noexcept {
    return std::max<std::size_t>(1, (n + 99) / 100);
}

Grid make_grid(double x_min, double x_max, std::size_t n) {
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min)) {
        throw std::invalid_argument("make_grid: degenerate interval, need x_max > x_min");
    }
    if (n < 16 || !std::has_single_bit(n)) {
        throw std::invalid_argument("make_grid: n must be a power of two >= 16");
    }
    Grid g;
    g.x_min = x_min;
    g.x_max = x_max;
    g.n = n;
    g.dx = (x_max - x_min) / static_cast<double>(n);
    g.dk = 2.0 * std::numbers::pi / (static_cast<double>(n) * g.dx);
    return g;
}

Grid suggest_grid(const SystemParams& p, double energy, double expected_width) {
    if (!(expected_width > 0.0)) throw std::invalid_argument("suggest_grid: expected_width must be > 0");
    // Outermost |x| reachable at `energy` for the least confining drive phase.
    auto reachable = [&](double x) { return p.B * x * x * x * x - p.A * x * x - std::abs(p.Lambda) * x <= energy; };
    double hi = 1.0;
    while (reachable(hi)) {
        hi *= 2.0;
        if (hi > 1e6) throw std::invalid_argument("suggest_grid: motion is unbounded at this energy");
    }
    double lo = 0.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (reachable(mid) ? lo : hi) = mid;
    }
    const double half = 1.5 * std::max(hi, expected_width);
    const double target_dx = expected_width / 5.0;
    std::size_t n = 16;
    while (2.0 * half / static_cast<double>(n) > target_dx) n *= 2;
    return make_grid(-half, half, n);
}

ComplexVector WaveState::lab_amplitudes() const {
    ComplexVector out(amplitudes.size());
    const auto n = static_cast<std::int64_t>(grid.n);
    const auto b = static_cast<std::uint64_t>(((boost % n) + n) % n);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::uint64_t r = (b * i) % grid.n;
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(grid.n);
        out[i] = amplitudes[i] * std::polar(1.0, angle);
    }
    return out;
}

WaveState init_gaussian(const Grid& grid, double x0, double p0, double sigma, double hbar) {
    if (!(hbar > 0.0)) throw std::invalid_argument("init_gaussian: hbar must be > 0");
    if (!(sigma >= 4.0 * grid.dx)) {
        throw std::invalid_argument("init_gaussian: sigma is not resolved by the grid (need sigma >= 4 dx)");
    }
    const double margin = 0.1 * grid.length();
    if (!(x0 >= grid.x_min + margin && x0 <= grid.x_max - margin)) {
        throw std::invalid_argument("init_gaussian: x0 must lie in the inner 80% of the grid");
    }
    WaveState s;
    s.grid = grid;
    s.hbar = hbar;
    s.boost = std::llround(p0 / (hbar * grid.dk));
    const double residual_k = (p0 - s.boost_momentum()) / hbar;
    s.amplitudes.resize(grid.n);
    const double inv4s2 = 1.0 / (4.0 * sigma * sigma);
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double u = grid.x(i) - x0;
        s.amplitudes[i] = std::exp(-u * u * inv4s2) * std::polar(1.0, residual_k * u);
    }
    normalize_in_place(s);
    return s;
}

double norm(const WaveState& state) {
    return kernels::norm_sq(state.amplitudes) * state.grid.dx;
}

double momentum_norm(const WaveState& state) {
    ComplexVector psi_k = state.amplitudes;
    Fft::get(psi_k.size())->forward(psi_k);
    return kernels::norm_sq(psi_k) * state.grid.dx / static_cast<double>(psi_k.size());
}

void normalize_in_place(WaveState& state) {
    const double nrm = norm(state);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw std::invalid_argument("normalize: state has zero or non-finite norm");
    kernels::scale(state.amplitudes, 1.0 / std::sqrt(nrm));
}

WaveState normalize(WaveState state) {
    normalize_in_place(state);
    return state;
}

EdgeMass edge_mass(const WaveState& state) {
    EdgeMass e;
    const std::size_t band = state.grid.edge_band();
    const double total = kernels::norm_sq(state.amplitudes);
    if (!(total > 0.0)) return e;
    e.position = kernels::edge_mass(state.amplitudes, band) / total;
    ComplexVector psi_k = state.amplitudes;
    Fft::get(psi_k.size())->forward(psi_k);
    e.momentum = kernels::nyquist_mass(psi_k, band) / kernels::norm_sq(psi_k);
    return e;
}

namespace {

[[noreturn]] void throw_leak(const char* where, double fraction, double t) {
    std::ostringstream os;
    os << "state leaked to the " << where << " edge of the grid (edge mass " << fraction << ") at t = " << t;
    throw NumericalError(os.str(), t);
}

}  // namespace

Moments moments(const WaveState& state, const SystemParams& params, double leak_threshold) {
    const Grid& g = state.grid;
    std::span<const cplx> psi = state.amplitudes;
    const std::size_t band = g.edge_band();

    Moments m;
    m.t = state.t;

    const kernels::WeightedSums raw = kernels::position_sums(psi, g, 0.0);
    if (!(raw.mass > 0.0)) throw std::invalid_argument("moments: zero state");
    const double edge = kernels::edge_mass(psi, band) / raw.mass;
    if (edge > leak_threshold) throw_leak("position", edge, state.t);

    const double mean_x = raw.first / raw.mass;
    const kernels::WeightedSums central = kernels::position_sums(psi, g, mean_x);
    const double shift = central.first / central.mass;
    m.mean_x = mean_x + shift;
    m.var_x = std::max(0.0, central.second / central.mass - shift * shift);
    m.norm = raw.mass * g.dx;

    ComplexVector work(psi.begin(), psi.end());
    const auto fft = Fft::get(g.n);
    fft->forward(work);
    const kernels::WeightedSums kraw = kernels::wavenumber_sums(work, g, 0.0);
    const double kedge = kernels::nyquist_mass(work, band) / kraw.mass;
    if (kedge > leak_threshold) throw_leak("momentum", kedge, state.t);
    const double mean_k = kraw.first / kraw.mass;
    const kernels::WeightedSums kcentral = kernels::wavenumber_sums(work, g, mean_k);
    const double kshift = kcentral.first / kcentral.mass;
    const double hbar = state.hbar;
    m.mean_p = state.boost_momentum() + hbar * (mean_k + kshift);
    m.var_p = std::max(0.0, hbar * hbar * (kcentral.second / kcentral.mass - kshift * kshift));

    // cov_xp = hbar * Re<(X - <X>) K>, with K psi = -i psi' applied spectrally.
    kernels::multiply_wavenumber(work, g, 1.0 / static_cast<double>(g.n));
    fft->backward(work);
    m.cov_xp = hbar * kernels::cross_sum(psi, work, g, m.mean_x) / raw.mass;

    const double mean_v = kernels::potential_sum(psi, g, params, state.t) / raw.mass;
    m.energy = (m.var_p + m.mean_p * m.mean_p) / (2.0 * params.m) + mean_v;
    return m;
}

void apply_momentum_kick(WaveState& state, double q) {
    const std::int64_t lattice = std::llround(q / (state.hbar * state.grid.dk));
    state.boost += lattice;
    const double residual_k = (q - static_cast<double>(lattice) * state.hbar * state.grid.dk) / state.hbar;
    if (residual_k == 0.0) return;
    for (std::size_t i = 0; i < state.grid.n; ++i) {
        state.amplitudes[i] *= std::polar(1.0, residual_k * (state.grid.x(i) - state.grid.x_min));
    }
}

void shift_points(WaveState& state, std::int64_t points) {
    const auto n = static_cast<std::int64_t>(state.grid.n);
    const auto r = static_cast<std::size_t>(((points % n) + n) % n);
    std::rotate(state.amplitudes.rbegin(), state.amplitudes.rbegin() + static_cast<std::ptrdiff_t>(r),
                state.amplitudes.rend());
}

}  // namespace qtl
