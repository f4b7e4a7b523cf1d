#include "qtl/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace qtl::kernels {
namespace {

// Below this size the fork/join cost dominates.
constexpr std::size_t kParallelMin = 1 << 14;

std::size_t block_count(std::size_t n) {
    return (n + kReductionBlock - 1) / kReductionBlock;
}

/// Evaluates `partial(begin, end)` on fixed blocks in parallel and adds the
/// block results in block order.
template <class T, class Partial>
T block_reduce(std::size_t n, Partial partial) {
    const std::size_t nb = block_count(n);
    std::vector<T> partials(nb);
    const auto nbs = static_cast<std::ptrdiff_t>(nb);
#pragma omp parallel for schedule(static) if (n >= kParallelMin)
    for (std::ptrdiff_t b = 0; b < nbs; ++b) {
        const std::size_t begin = static_cast<std::size_t>(b) * kReductionBlock;
        partials[static_cast<std::size_t>(b)] = partial(begin, std::min(n, begin + kReductionBlock));
    }
    T total{};
    for (const T& v : partials) total += v;
    return total;
}

WeightedSums& operator+=(WeightedSums& a, const WeightedSums& b) {
    a.mass += b.mass;
    a.first += b.first;
    a.second += b.second;
    return a;
}

template <class Fn>
void parallel_for(std::size_t n, Fn fn) {
    const auto ns = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (n >= kParallelMin)
    for (std::ptrdiff_t i = 0; i < ns; ++i) fn(static_cast<std::size_t>(i));
}

/// z *= (c + i s), written out so it does not go through the library's
/// NaN-recovering complex multiply.
inline void rotate(cplx& z, double c, double s) {
    const double re = z.real();
    const double im = z.imag();
    z = cplx(re * c - im * s, re * s + im * c);
}

}  // namespace

double norm_sq(std::span<const cplx> psi) {
    return block_reduce<double>(psi.size(), [&](std::size_t b, std::size_t e) {
        double s = 0.0;
        for (std::size_t i = b; i < e; ++i) s += std::norm(psi[i]);
        return s;
    });
}

WeightedSums position_sums(std::span<const cplx> psi, const Grid& g, double center) {
    return block_reduce<WeightedSums>(psi.size(), [&](std::size_t b, std::size_t e) {
        WeightedSums s;
        for (std::size_t i = b; i < e; ++i) {
            const double w = std::norm(psi[i]);
            const double u = g.x(i) - center;
            s.mass += w;
            s.first += w * u;
            s.second += w * u * u;
        }
        return s;
    });
}

WeightedSums wavenumber_sums(std::span<const cplx> psi_k, const Grid& g, double center) {
    return block_reduce<WeightedSums>(psi_k.size(), [&](std::size_t b, std::size_t e) {
        WeightedSums s;
        for (std::size_t j = b; j < e; ++j) {
            const double w = std::norm(psi_k[j]);
            const double u = g.wavenumber(j) - center;
            s.mass += w;
            s.first += w * u;
            s.second += w * u * u;
        }
        return s;
    });
}

double edge_mass(std::span<const cplx> psi, std::size_t band) {
    const std::size_t n = psi.size();
    band = std::min(band, n / 2);
    double s = 0.0;
    for (std::size_t i = 0; i < band; ++i) s += std::norm(psi[i]) + std::norm(psi[n - 1 - i]);
    return s;
}

double nyquist_mass(std::span<const cplx> psi_k, std::size_t band) {
    const std::size_t n = psi_k.size();
    const std::size_t half = n / 2;
    band = std::min(band, half);
    double s = 0.0;
    for (std::size_t j = half - band; j < half + band; ++j) s += std::norm(psi_k[j]);
    return s;
}

double potential_sum(std::span<const cplx> psi, const Grid& g, const SystemParams& p, double t) {
    const double drive = p.Lambda * std::cos(p.omega * t);
    return block_reduce<double>(psi.size(), [&](std::size_t b, std::size_t e) {
        double s = 0.0;
        for (std::size_t i = b; i < e; ++i) {
            const double x = g.x(i);
            const double x2 = x * x;
            s += ((p.B * x2 - p.A) * x2 + drive * x) * std::norm(psi[i]);
        }
        return s;
    });
}

double cross_sum(std::span<const cplx> psi, std::span<const cplx> chi, const Grid& g, double center) {
    return block_reduce<double>(psi.size(), [&](std::size_t b, std::size_t e) {
        double s = 0.0;
        for (std::size_t i = b; i < e; ++i) {
            const double re = psi[i].real() * chi[i].real() + psi[i].imag() * chi[i].imag();
            s += (g.x(i) - center) * re;
        }
        return s;
    });
}

void scale(std::span<cplx> psi, double s) {
    parallel_for(psi.size(), [&](std::size_t i) { psi[i] *= s; });
}

void multiply(std::span<cplx> psi, std::span<const cplx> table) {
    parallel_for(psi.size(), [&](std::size_t i) { rotate(psi[i], table[i].real(), table[i].imag()); });
}

void multiply_wavenumber(std::span<cplx> psi_k, const Grid& g, double s) {
    parallel_for(psi_k.size(), [&](std::size_t j) { psi_k[j] *= s * g.wavenumber(j); });
}

void kinetic_table(std::span<cplx> table, const Grid& g, double hbar, double m, double boost_k, double dt,
                   double scale) {
    const double c = -hbar * dt / (4.0 * m);
    parallel_for(table.size(), [&](std::size_t j) {
        const double kappa = g.wavenumber(j);
        const double q = kappa + boost_k;
        const double phase = c * q * q;
        table[j] = scale * cplx(std::cos(phase), std::sin(phase));
    });
}

void potential_phase(std::span<cplx> psi, const Grid& g, const SystemParams& p, double t, double dt_over_hbar,
                     std::int64_t boost_shift) {
    const double drive = p.Lambda * std::cos(p.omega * t);
    const auto n = static_cast<std::int64_t>(psi.size());
    const std::int64_t s = ((boost_shift % n) + n) % n;
    const double two_pi_over_n = 2.0 * std::numbers::pi / static_cast<double>(n);
    parallel_for(psi.size(), [&](std::size_t i) {
        const double x = g.x(i);
        const double x2 = x * x;
        const auto turn = static_cast<double>((s * static_cast<std::int64_t>(i)) % n);
        const double phase = -((p.B * x2 - p.A) * x2 + drive * x) * dt_over_hbar - two_pi_over_n * turn;
        rotate(psi[i], std::cos(phase), std::sin(phase));
    });
}

void measurement_weight(std::span<cplx> psi, const Grid& g, double center, double quad, double lin,
                        double offset) {
    parallel_for(psi.size(), [&](std::size_t i) {
        const double u = g.x(i) - center;
        psi[i] *= std::exp(u * (lin - quad * u) - offset);
    });
}

}  // namespace qtl::kernels
