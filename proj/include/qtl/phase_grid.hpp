#pragma once

#include <cstddef>
#include <cstdint>

#include "qtl/aligned.hpp"
#include "qtl/system.hpp"

namespace qtl {

/// Uniform periodic lattice x_i = x_min + i*dx, i < n, with the conjugate
/// wavenumber lattice kappa_j = j*dk in FFT order (j >= n/2 wraps negative).
struct Grid {
    double x_min = 0.0;
    double x_max = 0.0;
    std::size_t n = 0;
    double dx = 0.0;
    double dk = 0.0;

    double length() const noexcept { return x_max - x_min; }
    double x(std::size_t i) const noexcept { return x_min + static_cast<double>(i) * dx; }
    std::int64_t signed_index(std::size_t j) const noexcept {
        return j < n / 2 ? static_cast<std::int64_t>(j)
                         : static_cast<std::int64_t>(j) - static_cast<std::int64_t>(n);
    }
    double wavenumber(std::size_t j) const noexcept { return static_cast<double>(signed_index(j)) * dk; }
    double nyquist_wavenumber() const noexcept { return 0.5 * static_cast<double>(n) * dk; }
    /// Points in each of the two edge bands used by the leak guard (1% per side).
    std::size_t edge_band() const noexcept;
};

/// Throws std::invalid_argument unless x_max > x_min and n is a power of two >= 16.
Grid make_grid(double x_min, double x_max, std::size_t n);

/// Smallest power-of-two grid on a symmetric domain that spans at least
/// 1.5x the classical turning points at `energy` and has dx <= width/5.
Grid suggest_grid(const SystemParams& p, double energy, double expected_width);

/// Conditioned pure state on a Grid.
///
/// Amplitudes are stored in a frame boosted by the lattice momentum
/// hbar*boost*dk: the physical wavefunction is
///     psi(x_i) = exp(2 pi i * boost * i / n) * amplitudes[i].
/// Because the boost is an exact lattice momentum the representation stays
/// periodic, and re-centring it is a cyclic shift of the spectrum. This lets
/// a packet with |p| >> pi*hbar/dx live on a grid that only has to resolve
/// its momentum spread.
struct WaveState {
    Grid grid;
    double hbar = 1.0;
    ComplexVector amplitudes;
    std::int64_t boost = 0;
    double t = 0.0;

    double boost_momentum() const noexcept { return hbar * static_cast<double>(boost) * grid.dk; }
    /// Physical amplitudes in the unboosted frame (aliased if |p| exceeds the lattice).
    ComplexVector lab_amplitudes() const;
};

struct Moments {
    double mean_x = 0.0;
    double mean_p = 0.0;
    double var_x = 0.0;
    double var_p = 0.0;
    double cov_xp = 0.0;
    double norm = 0.0;
    double energy = 0.0;
    double t = 0.0;
};

inline constexpr double kDefaultLeakThreshold = 1e-10;

/// Minimum-uncertainty Gaussian exp(-(x-x0)^2/(4 sigma^2) + i p0 x/hbar), normalized.
WaveState init_gaussian(const Grid& grid, double x0, double p0, double sigma, double hbar);

/// sum |psi_i|^2 dx
double norm(const WaveState& state);
/// Same quantity evaluated on the wavenumber lattice (Parseval).
double momentum_norm(const WaveState& state);
WaveState normalize(WaveState state);
void normalize_in_place(WaveState& state);

/// Fraction of probability in the outer position bands and in the
/// near-Nyquist wavenumber bands.
struct EdgeMass {
    double position = 0.0;
    double momentum = 0.0;
};
EdgeMass edge_mass(const WaveState& state);

/// Position/momentum moments and energy at state.t. Throws NumericalError
/// if the edge mass in either representation exceeds `leak_threshold`.
Moments moments(const WaveState& state, const SystemParams& params,
                double leak_threshold = kDefaultLeakThreshold);

/// Multiplies by exp(i q x / hbar) (a momentum kick of q).
void apply_momentum_kick(WaveState& state, double q);
/// Cyclically shifts the amplitudes by `points` grid points (positive = toward +x).
void shift_points(WaveState& state, std::int64_t points);

}  // namespace qtl
