#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "qtl/classical_dynamics.hpp"
#include "qtl/regime.hpp"

using namespace qtl;

TEST_CASE("record condition threshold") {
    const RegimeReport r = regime_check({}, {}, {}, {0.01, 0.01});
    CHECK(r.record_rhs == 1e6);
    CHECK(r.k_min_record == 1.25e5);
    CHECK(r.record_lhs == 8e5);
    CHECK(r.record == Verdict::violated);

    MeasureParams mp;
    mp.k = 1.25e5 * 1.001;
    CHECK(regime_check({}, mp, {}, {0.01, 0.01}).record == Verdict::satisfied);
}

TEST_CASE("noise condition at the default measurement") {
    TrajectoryStats st;
    st.dF = 20.0;
    st.action = 10.0;
    const RegimeReport r = regime_check({}, {}, st, {0.01, 0.01});
    CHECK(r.s == doctest::Approx(1e6));
    CHECK(r.noise_lo == doctest::Approx(4e-5));
    CHECK(r.noise_mid == doctest::Approx(1.0));
    CHECK(r.noise_hi == doctest::Approx(5e6));
    CHECK(r.noise == Verdict::satisfied);
    CHECK(r.localization == Verdict::satisfied);
}

TEST_CASE("linear systems localize automatically") {
    TrajectoryStats st;
    st.d2F_over_F = 0.0;
    MeasureParams mp;
    mp.k = 1e-6;
    const RegimeReport r = regime_check({1.0, 0.0, 3.0, 0.0, 6.07}, mp, st, {0.01, 0.01});
    CHECK(r.loc_rhs == 0.0);
    CHECK(r.localization == Verdict::satisfied);
}

TEST_CASE("verdict monotonicity in k") {
    std::vector<Verdict> record, noise;
    for (double k = 1e-4; k <= 1e14; k *= 10.0) {
        MeasureParams mp;
        mp.k = k;
        const RegimeReport r = regime_check({}, mp, {}, {0.01, 0.01});
        record.push_back(r.record);
        noise.push_back(r.noise);
    }
    for (std::size_t i = 1; i < record.size(); ++i) {
        CHECK(static_cast<int>(record[i]) <= static_cast<int>(record[i - 1]));
    }
    CHECK(noise.front() == Verdict::violated);
    CHECK(noise.back() == Verdict::violated);
    bool any = false;
    for (Verdict v : noise) any = any || v == Verdict::satisfied;
    CHECK(any);
}

TEST_CASE("regime input validation") {
    TrajectoryStats st;
    st.action = 0.0;
    CHECK_THROWS_AS(regime_check({}, {}, st, {}), std::invalid_argument);
    CHECK_THROWS_AS(regime_check({}, {}, {}, {0.0, 0.01}), std::invalid_argument);
    CHECK_THROWS_AS(regime_check({}, {}, {}, {0.01, -1.0}), std::invalid_argument);
    st = {};
    st.dF = -1.0;
    CHECK_THROWS_AS(regime_check({}, {}, st, {}), std::invalid_argument);
}

TEST_CASE("trajectory statistics of a harmonic orbit") {
    // V = 5 x^2: F' = -10 everywhere, one orbit encloses pi x0 p0.
    const SystemParams p{1.0, 0.0, -5.0, 0.0, 6.07};
    const double w = std::sqrt(10.0);
    const double T = 5.0 * 2.0 * std::numbers::pi / w;
    const auto rec = run_classical_trajectory({1.0, 0.0, 0.0}, T, T / 50000.0, p, {}, 0, 1);
    const TrajectoryStats st = estimate_trajectory_stats(rec.series, p);
    CHECK(st.dF == doctest::Approx(10.0));
    CHECK(st.d2F_over_F == 0.0);
    // Undriven: the whole record is one analysis period.
    CHECK(st.action == doctest::Approx(5.0 * std::numbers::pi * w).epsilon(1e-3));
    CHECK_THROWS(estimate_trajectory_stats(std::span(rec.series).first(2), p));
}
