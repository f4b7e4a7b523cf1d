#include <algorithm>
#include <cmath>
#include <numbers>

#include "qtl/kernels.hpp"

namespace qtl::kernels::reference {

double norm_sq(std::span<const cplx> psi) {
    double s = 0.0;
    for (const cplx& a : psi) s += std::norm(a);
    return s;
}

WeightedSums position_sums(std::span<const cplx> psi, const Grid& g, double center) {
    WeightedSums s;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double w = std::norm(psi[i]);
        const double u = g.x(i) - center;
        s.mass += w;
        s.first += w * u;
        s.second += w * u * u;
    }
    return s;
}

WeightedSums wavenumber_sums(std::span<const cplx> psi_k, const Grid& g, double center) {
    WeightedSums s;
    for (std::size_t j = 0; j < psi_k.size(); ++j) {
        const double w = std::norm(psi_k[j]);
        const double u = g.wavenumber(j) - center;
        s.mass += w;
        s.first += w * u;
        s.second += w * u * u;
    }
    return s;
}

double edge_mass(std::span<const cplx> psi, std::size_t band) {
    const std::size_t n = psi.size();
    band = std::min(band, n / 2);
    double s = 0.0;
    for (std::size_t i = 0; i < band; ++i) s += std::norm(psi[i]);
    for (std::size_t i = n - band; i < n; ++i) s += std::norm(psi[i]);
    return s;
}

double nyquist_mass(std::span<const cplx> psi_k, std::size_t band) {
    const std::size_t half = psi_k.size() / 2;
    band = std::min(band, half);
    double s = 0.0;
    for (std::size_t j = half - band; j < half + band; ++j) s += std::norm(psi_k[j]);
    return s;
}

double potential_sum(std::span<const cplx> psi, const Grid& g, const SystemParams& p, double t) {
    double s = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) s += potential(g.x(i), t, p) * std::norm(psi[i]);
    return s;
}

double cross_sum(std::span<const cplx> psi, std::span<const cplx> chi, const Grid& g, double center) {
    double s = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) s += (g.x(i) - center) * (std::conj(psi[i]) * chi[i]).real();
    return s;
}

void scale(std::span<cplx> psi, double s) {
    for (cplx& a : psi) a *= s;
}

void multiply(std::span<cplx> psi, std::span<const cplx> table) {
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= table[i];
}

void multiply_wavenumber(std::span<cplx> psi_k, const Grid& g, double s) {
    for (std::size_t j = 0; j < psi_k.size(); ++j) psi_k[j] *= s * g.wavenumber(j);
}

void kinetic_table(std::span<cplx> table, const Grid& g, double hbar, double m, double boost_k, double dt,
                   double scale) {
    for (std::size_t j = 0; j < table.size(); ++j) {
        const double kappa = g.wavenumber(j);
        const double phase = -hbar * dt * (kappa + boost_k) * (kappa + boost_k) / (4.0 * m);
        table[j] = scale * std::polar(1.0, phase);
    }
}

void potential_phase(std::span<cplx> psi, const Grid& g, const SystemParams& p, double t, double dt_over_hbar,
                     std::int64_t boost_shift) {
    const auto n = static_cast<std::int64_t>(psi.size());
    const std::int64_t s = ((boost_shift % n) + n) % n;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const auto turn = static_cast<double>((s * static_cast<std::int64_t>(i)) % n) / static_cast<double>(n);
        psi[i] *= std::polar(1.0, -potential(g.x(i), t, p) * dt_over_hbar - 2.0 * std::numbers::pi * turn);
    }
}

void measurement_weight(std::span<cplx> psi, const Grid& g, double center, double quad, double lin,
                        double offset) {
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double u = g.x(i) - center;
        psi[i] *= std::exp(-quad * u * u + lin * u - offset);
    }
}

}  // namespace qtl::kernels::reference
