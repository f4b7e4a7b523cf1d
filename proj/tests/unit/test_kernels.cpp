#include <omp.h>

#include <cmath>
#include <cstdint>

#include "doctest.h"
#include "qtl/kernels.hpp"
#include "qtl/phase_grid.hpp"

using namespace qtl;
namespace k = qtl::kernels;
namespace ref = qtl::kernels::reference;

namespace {

// Large enough to take the parallel path.
const Grid kGrid = make_grid(-10.0, 10.0, 1 << 15);
const SystemParams kParams{};

ComplexVector random_state(std::uint64_t seed) {
    ComplexVector v(kGrid.n);
    std::uint64_t z = seed;
    auto next = [&z] {
        z = z * 6364136223846793005ULL + 1442695040888963407ULL;
        return static_cast<double>(z >> 11) * 0x1.0p-53 - 0.5;
    };
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double x = kGrid.x(i);
        v[i] = cplx(next(), next()) * std::exp(-0.1 * x * x);
    }
    return v;
}

double max_rel_diff(const ComplexVector& a, const ComplexVector& b) {
    double d = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i] - b[i]));
        scale = std::max(scale, std::abs(b[i]));
    }
    return d / scale;
}

bool close(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("OpenMP reductions match the serial reference") {
    const ComplexVector psi = random_state(1);
    const ComplexVector chi = random_state(2);
    CHECK(close(k::norm_sq(psi), ref::norm_sq(psi)));
    const auto a = k::position_sums(psi, kGrid, 0.3);
    const auto b = ref::position_sums(psi, kGrid, 0.3);
    CHECK(close(a.mass, b.mass));
    CHECK(close(a.first, b.first));
    CHECK(close(a.second, b.second));
    const auto c = k::wavenumber_sums(psi, kGrid, -1.0);
    const auto d = ref::wavenumber_sums(psi, kGrid, -1.0);
    CHECK(close(c.first, d.first));
    CHECK(close(c.second, d.second));
    CHECK(close(k::edge_mass(psi, 100), ref::edge_mass(psi, 100)));
    CHECK(close(k::nyquist_mass(psi, 100), ref::nyquist_mass(psi, 100)));
    CHECK(close(k::potential_sum(psi, kGrid, kParams, 0.4), ref::potential_sum(psi, kGrid, kParams, 0.4)));
    CHECK(close(k::cross_sum(psi, chi, kGrid, 0.2), ref::cross_sum(psi, chi, kGrid, 0.2)));
}

TEST_CASE("OpenMP elementwise kernels match the serial reference") {
    const ComplexVector psi = random_state(3);
    const ComplexVector table = random_state(4);

    auto compare = [&](auto fast, auto slow) {
        ComplexVector a = psi;
        ComplexVector b = psi;
        fast(a);
        slow(b);
        return max_rel_diff(a, b);
    };
    CHECK(compare([](auto& v) { k::scale(v, 1.7); }, [](auto& v) { ref::scale(v, 1.7); }) < 1e-15);
    CHECK(compare([&](auto& v) { k::multiply(v, table); }, [&](auto& v) { ref::multiply(v, table); }) < 1e-15);
    CHECK(compare([](auto& v) { k::multiply_wavenumber(v, kGrid, 0.5); },
                  [](auto& v) { ref::multiply_wavenumber(v, kGrid, 0.5); }) < 1e-15);
    CHECK(compare([](auto& v) { k::potential_phase(v, kGrid, kParams, 0.3, 1e-2, 0); },
                  [](auto& v) { ref::potential_phase(v, kGrid, kParams, 0.3, 1e-2, 0); }) < 1e-11);
    CHECK(compare([](auto& v) { k::potential_phase(v, kGrid, kParams, 0.3, 1e-2, -12345); },
                  [](auto& v) { ref::potential_phase(v, kGrid, kParams, 0.3, 1e-2, -12345); }) < 1e-11);
    CHECK(compare([](auto& v) { k::measurement_weight(v, kGrid, 0.4, 3.0, 1.5, 0.2); },
                  [](auto& v) { ref::measurement_weight(v, kGrid, 0.4, 3.0, 1.5, 0.2); }) < 1e-13);

    ComplexVector ta(kGrid.n), tb(kGrid.n);
    k::kinetic_table(ta, kGrid, 1e-3, 1.0, 40.0 * kGrid.dk, 1e-3, 0.5);
    ref::kinetic_table(tb, kGrid, 1e-3, 1.0, 40.0 * kGrid.dk, 1e-3, 0.5);
    CHECK(max_rel_diff(ta, tb) < 1e-13);
}

TEST_CASE("boost shift in the potential phase is an exact lattice momentum") {
    ComplexVector a = random_state(5);
    ComplexVector b = a;
    const std::int64_t s = 37;
    k::potential_phase(a, kGrid, kParams, 0.1, 1e-3, s);
    k::potential_phase(b, kGrid, kParams, 0.1, 1e-3, 0);
    const double n = static_cast<double>(kGrid.n);
    for (std::size_t i = 0; i < kGrid.n; i += 997) {
        const cplx expected = b[i] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(s) * static_cast<double>(i) / n);
        CHECK(std::abs(a[i] - expected) < 1e-12);
    }
}

TEST_CASE("reductions are bitwise independent of the thread count") {
    const ComplexVector psi = random_state(6);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const double n1 = k::norm_sq(psi);
    const auto p1 = k::position_sums(psi, kGrid, 0.1);
    const double v1 = k::potential_sum(psi, kGrid, kParams, 0.2);
    omp_set_num_threads(4);
    const double n4 = k::norm_sq(psi);
    const auto p4 = k::position_sums(psi, kGrid, 0.1);
    const double v4 = k::potential_sum(psi, kGrid, kParams, 0.2);
    omp_set_num_threads(saved);
    CHECK(n1 == n4);
    CHECK(p1.first == p4.first);
    CHECK(p1.second == p4.second);
    CHECK(v1 == v4);
}
