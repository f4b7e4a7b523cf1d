#pragma once

// Data-parallel inner loops of the spectral integrator.
//
// Two implementations share one interface:
//   qtl::kernels            OpenMP, used by the library
//   qtl::kernels::reference plain serial loops, kept for tests and benchmarks
//
// The OpenMP reductions sum fixed-size blocks independently and combine the
// block partials serially in block order, so their results are bitwise
// independent of the number of threads.

#include <cstddef>
#include <cstdint>
#include <span>

#include "qtl/aligned.hpp"
#include "qtl/phase_grid.hpp"
#include "qtl/system.hpp"

namespace qtl::kernels {

inline constexpr std::size_t kReductionBlock = 2048;

/// sum w, sum w*(u - c), sum w*(u - c)^2 for weights w = |psi|^2.
struct WeightedSums {
    double mass = 0.0;
    double first = 0.0;
    double second = 0.0;
};

#define QTL_KERNEL_DECLS                                                                          \
    double norm_sq(std::span<const cplx> psi);                                                   \
    WeightedSums position_sums(std::span<const cplx> psi, const Grid& g, double center);         \
    WeightedSums wavenumber_sums(std::span<const cplx> psi_k, const Grid& g, double center);     \
    double edge_mass(std::span<const cplx> psi, std::size_t band);                               \
    double nyquist_mass(std::span<const cplx> psi_k, std::size_t band);                          \
    double potential_sum(std::span<const cplx> psi, const Grid& g, const SystemParams& p,         \
                         double t);                                                               \
    double cross_sum(std::span<const cplx> psi, std::span<const cplx> chi, const Grid& g,         \
                     double center);                                                              \
    void scale(std::span<cplx> psi, double s);                                                    \
    void multiply(std::span<cplx> psi, std::span<const cplx> table);                              \
    void multiply_wavenumber(std::span<cplx> psi_k, const Grid& g, double s);                     \
    void kinetic_table(std::span<cplx> table, const Grid& g, double hbar, double m,              \
                       double boost_k, double dt, double scale);                                  \
    void potential_phase(std::span<cplx> psi, const Grid& g, const SystemParams& p, double t,    \
                         double dt_over_hbar, std::int64_t boost_shift);                          \
    void measurement_weight(std::span<cplx> psi, const Grid& g, double center, double quad,      \
                            double lin, double offset);

// clang-format off
/// norm_sq:            sum |psi_i|^2
/// position_sums:      moments of x about `center`, weights |psi|^2
/// wavenumber_sums:    moments of the signed wavenumber about `center`
/// edge_mass:          sum |psi|^2 over the first and last `band` points
/// nyquist_mass:       sum |psi_k|^2 over the `band` wavenumbers either side of n/2
/// potential_sum:      sum V(x_i, t) |psi_i|^2
/// cross_sum:          Re sum conj(psi_i) (x_i - center) chi_i
/// multiply_wavenumber psi_k[j] *= s * kappa_j
/// kinetic_table:      table[j] = scale * exp(-i hbar (kappa_j + boost_k)^2 dt / 4m), half a kinetic step
/// potential_phase:    psi_i *= exp(-i V(x_i, t) dt/hbar - 2 pi i boost_shift i / n)
/// measurement_weight: psi_i *= exp(-quad u^2 + lin u - offset), u = x_i - center
// clang-format on
QTL_KERNEL_DECLS

namespace reference {
QTL_KERNEL_DECLS
}  // namespace reference

#undef QTL_KERNEL_DECLS

}  // namespace qtl::kernels
