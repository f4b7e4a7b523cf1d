#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "qtl/chaos_analysis.hpp"
#include "qtl/config.hpp"
#include "qtl/errors.hpp"
#include "qtl/harness.hpp"

using namespace qtl;

namespace {

SeparationSet synthetic(double lambda, std::size_t fiducials, double jitter, std::uint64_t seed) {
    SeparationSet s;
    for (int j = 0; j <= 160; ++j) s.tau.push_back(0.05 * j);
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    for (std::size_t f = 0; f < fiducials; ++f) {
        for (int b = 0; b < 3; ++b) {
            std::vector<double> row;
            const double offset = -12.0 + 0.1 * static_cast<double>(f) + jitter * normal(gen);
            for (double t : s.tau) row.push_back(offset + lambda * t + jitter * normal(gen));
            s.ln_delta.push_back(row);
            s.fiducial.push_back(f);
        }
    }
    return s;
}

std::vector<SeriesSample> constant_series(double T, double dt, double x, double p) {
    std::vector<SeriesSample> out;
    const auto n = static_cast<int>(std::lround(T / dt));
    for (int i = 0; i <= n; ++i) out.push_back({i * dt, x, p, 0, 0, 0, 1, 0});
    return out;
}

}  // namespace

TEST_CASE("phase distance") {
    CHECK(phase_distance({0, 0}, {3, 4}) == doctest::Approx(5.0));
    CHECK(phase_distance({0, 0}, {3, 4}, 0.0) == doctest::Approx(3.0));
    CHECK(phase_distance({1, 2}, {1, 2}) == 0.0);
}

TEST_CASE("exact exponential separation gives its rate") {
    const LyapunovResult r = analyze_separations(synthetic(0.7, 5, 0.0, 1), {1.0, 6.0});
    CHECK(std::abs(r.lambda - 0.7) < 1e-6);
    CHECK(std::abs(r.pooled_lambda - 0.7) < 1e-6);
    CHECK(r.std_error < 1e-9);
    CHECK(r.fiducial_slopes.size() == 5);
    CHECK_FALSE(r.linearity.washed_out);
    CHECK(r.curve.size() == 161);

    const LyapunovResult noisy = analyze_separations(synthetic(0.7, 8, 0.3, 2), {1.0, 6.0});
    CHECK(std::abs(noisy.lambda - 0.7) < 4.0 * noisy.std_error + 1e-3);
    CHECK(noisy.std_error > 0.0);
}

TEST_CASE("flat separation curves are flagged") {
    SeparationSet s = synthetic(0.0, 3, 0.0, 1);
    for (auto& row : s.ln_delta) {
        for (std::size_t j = 0; j < row.size(); ++j) row[j] += std::min(s.tau[j], 2.0);
    }
    const LyapunovResult r = analyze_separations(s, {1.0, 6.0});
    CHECK(r.linearity.washed_out);
}

TEST_CASE("degenerate separations are errors") {
    SeparationSet zero = synthetic(0.7, 2, 0.0, 1);
    for (auto& row : zero.ln_delta) std::fill(row.begin(), row.end(), -std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(analyze_separations(zero, {1.0, 6.0}), NumericalError);

    SeparationSet one_zero = synthetic(0.7, 2, 0.0, 1);
    one_zero.ln_delta[1][40] = -std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(analyze_separations(one_zero, {1.0, 6.0}), NumericalError);

    SeparationSet saturated = synthetic(0.7, 2, 0.0, 1);
    for (auto& row : saturated.ln_delta) {
        for (double& v : row) v += 12.0;
    }
    CHECK_THROWS_AS(analyze_separations(saturated, {1.0, 6.0}), NumericalError);
    CHECK_THROWS_AS(analyze_separations(synthetic(0.7, 2, 0.0, 1), {1.0, 9.0}), std::invalid_argument);
}

TEST_CASE("inverted harmonic separation grows at sqrt(2A/m)") {
    BranchProtocol proto;
    proto.n_fiducial = 4;
    proto.start = {0.0, 0.0};
    proto.n_branch_points = 2;
    proto.branch_spacing = 0.5;
    proto.track_time = 3.0;
    proto.perturbation = Perturbation::initial_offset;
    proto.delta0 = 1e-8;
    ClassicalSystem sys{{1.0, 0.0, 10.0, 0.0, 6.07}, {}, 1e-4};
    const LyapunovResult r = lyapunov_estimate(proto, sys, {1.0, 3.0}, 7);
    CHECK(r.lambda == doctest::Approx(std::sqrt(20.0)).epsilon(0.05));
}

TEST_CASE("noise branching needs distinct streams and is seed independent") {
    BranchProtocol proto;
    proto.n_fiducial = 3;
    proto.n_branch_points = 2;
    proto.branch_spacing = 5.0;
    proto.track_time = 3.0;
    const ClassicalSystem sys{{}, {1e-3, 4e-3}, 1e-3};
    const SeparationSet a = collect_separations(proto, sys, 11, 1);
    const SeparationSet b = collect_separations(proto, sys, 11, 3);
    const SeparationSet c = collect_separations(proto, sys, 12, 1);
    CHECK(a.ln_delta == b.ln_delta);
    CHECK(a.ln_delta != c.ln_delta);
    for (const auto& row : a.ln_delta) {
        for (std::size_t j = 1; j < row.size(); ++j) CHECK(std::isfinite(row[j]));
    }

    const ClassicalSystem quiet{{}, {}, 1e-3};
    CHECK_THROWS_AS(lyapunov_estimate(proto, quiet, {1.0, 3.0}, 11), NumericalError);
}

TEST_CASE("stroboscopic sampling") {
    const auto series = constant_series(103.5, 0.01, 0.25, -1.5);
    const auto pts = stroboscopic_map(series, 6.07, 0.0, 0.0);
    CHECK(pts.size() == 100);
    for (const auto& pt : pts) {
        CHECK(pt.x == 0.25);
        CHECK(pt.p == -1.5);
    }
    CHECK(pts[1].t == doctest::Approx(2.0 * std::numbers::pi / 6.07));

    auto moving = series;
    for (auto& s : moving) {
        s.mean_x = std::sin(0.7 * s.t);
        s.mean_p = std::cos(1.3 * s.t);
    }
    const auto a = stroboscopic_map(moving, 6.07, 0.4, 0.0);
    const auto b = stroboscopic_map(moving, 6.07, 0.4 + 2.0 * std::numbers::pi, 0.0);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].x == doctest::Approx(b[i].x).epsilon(1e-12));
        CHECK(a[i].p == doctest::Approx(b[i].p).epsilon(1e-12));
        CHECK(a[i].period_index == b[i].period_index);
    }
    CHECK_THROWS(stroboscopic_map(series, 6.07, 0.0, 200.0));
    CHECK(stroboscopic_map(series, 6.07, 0.0, 50.0).front().t >= 50.0);
}

TEST_CASE("band-limited record") {
    std::vector<RecordSample> raw;
    for (int i = 0; i < 1000; ++i) raw.push_back({(i + 1) * 1e-3, 2.5});
    const auto avg = band_limit_record(raw, 1e-3, 0.01);
    CHECK(avg.size() == 100);
    for (const auto& s : avg) CHECK(s.y == doctest::Approx(2.5));
    CHECK(avg.front().t == doctest::Approx(5.5e-3));
    CHECK_THROWS(band_limit_record(raw, 1e-3, 0.0105));

    std::mt19937_64 gen(3);
    std::normal_distribution<double> normal(0.0, 2.0);
    std::vector<RecordSample> noise, other, sum;
    for (int i = 0; i < 200000; ++i) {
        noise.push_back({i * 1e-3, normal(gen)});
        other.push_back({i * 1e-3, normal(gen)});
        sum.push_back({i * 1e-3, noise.back().y + other.back().y});
    }
    const auto out = band_limit_record(noise, 1e-3, 0.02);
    double var = 0.0;
    for (const auto& s : out) var += s.y * s.y;
    var /= static_cast<double>(out.size());
    CHECK(var == doctest::Approx(4.0 / 20.0).epsilon(0.15));

    const auto o = band_limit_record(other, 1e-3, 0.02);
    const auto s = band_limit_record(sum, 1e-3, 0.02);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i].y == doctest::Approx(out[i].y + o[i].y));
}

TEST_CASE("single-k sweep equals a direct estimate") {
    const RunConfig c = resolve_config(parse_config(R"(
mode = sweep
seed = 5
measure.hbar = 1e-2
measure.k = 1e3
lyapunov.n_fiducial = 1
lyapunov.n_branch = 1
lyapunov.spacing = 1
lyapunov.track = 1
lyapunov.fit_begin = 0.2
lyapunov.fit_end = 0.8
record.window = 0.05
record.tolerance = 0.1
sweep.k_values = 1000
regime.dF = 20
regime.unstable_dF = 14
regime.d2F_over_F = 0.9
regime.action = 50
)"));
    const QuantumSystem sys = quantum_system(c);
    const TrajectoryStats stats{20.0, 14.0, 0.9, 50.0};
    const double k[] = {1e3};
    const auto rows = k_sensitivity_sweep(k, sys, c.protocol, c.fit, 5, stats, c.record);
    REQUIRE(rows.size() == 1);
    const LyapunovResult direct = lyapunov_estimate(c.protocol, sys, c.fit, 5);
    CHECK(rows[0].result.lambda == direct.lambda);
    CHECK(rows[0].result.pooled_lambda == direct.pooled_lambda);

    const double bad[] = {1e12};
    CHECK_THROWS_AS(k_sensitivity_sweep(bad, sys, c.protocol, c.fit, 5, stats, c.record), std::invalid_argument);
}
