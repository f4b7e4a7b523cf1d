#include "qtl/regime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace qtl {
namespace {

Verdict much_greater(double lhs, double rhs) {
    if (rhs <= 0.0) return lhs > 0.0 ? Verdict::satisfied : Verdict::violated;
    const double ratio = lhs / rhs;
    if (ratio >= 10.0) return Verdict::satisfied;
    if (ratio >= 1.0) return Verdict::marginal;
    return Verdict::violated;
}

Verdict worse(Verdict a, Verdict b) {
    return static_cast<int>(a) > static_cast<int>(b) ? a : b;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

}  // namespace

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::satisfied: return "satisfied";
        case Verdict::marginal: return "marginal";
        case Verdict::violated: return "violated";
    }
    return "?";
}

RegimeReport regime_check(const SystemParams& p, const MeasureParams& mp, const TrajectoryStats& stats,
                          const RecordSpec& record) {
    if (!(stats.action > 0.0)) throw std::invalid_argument("regime_check: action must be > 0");
    if (!(stats.dF >= 0.0) || !(stats.unstable_dF >= 0.0) || !(stats.d2F_over_F >= 0.0)) {
        throw std::invalid_argument("regime_check: derivative magnitudes must be >= 0");
    }
    if (!(record.window > 0.0) || !(record.tolerance > 0.0)) {
        throw std::invalid_argument("regime_check: record window and tolerance must be > 0");
    }
    p.validate();
    mp.validate();

    RegimeReport r;
    const double ek8 = 8.0 * mp.eta * mp.k;
    r.s = stats.action / mp.hbar;

    r.loc_lhs = ek8;
    r.loc_rhs = stats.d2F_over_F * std::sqrt(stats.unstable_dF / (2.0 * p.m));
    r.localization = much_greater(r.loc_lhs, r.loc_rhs);

    r.noise_lo = 2.0 * stats.dF / (mp.eta * r.s);
    r.noise_mid = mp.hbar * mp.k;
    r.noise_hi = stats.dF * r.s / 4.0;
    r.noise = worse(much_greater(r.noise_mid, r.noise_lo), much_greater(r.noise_hi, r.noise_mid));

    // Written as reciprocals so round decimal inputs give round outputs.
    const double inv_dt = 1.0 / record.window;
    const double inv_dx = 1.0 / record.tolerance;
    r.record_lhs = ek8;
    r.record_rhs = inv_dt * inv_dx * inv_dx;
    r.k_min_record = r.record_rhs / (8.0 * mp.eta);
    r.record = r.record_lhs > r.record_rhs ? Verdict::satisfied : Verdict::violated;
    return r;
}

TrajectoryStats estimate_trajectory_stats(std::span<const SeriesSample> series, const SystemParams& p) {
    if (series.size() < 3) throw std::invalid_argument("estimate_trajectory_stats: series too short");
    std::vector<double> abs_df, unstable_df, curvature;
    abs_df.reserve(series.size());
    for (const SeriesSample& s : series) {
        const double df = force_gradient(s.mean_x, p);
        abs_df.push_back(std::abs(df));
        if (df > 0.0) {
            unstable_df.push_back(df);
            const double f = force(s.mean_x, s.t, p);
            if (f != 0.0) curvature.push_back(std::abs(force_curvature(s.mean_x, p) / f));
        }
    }
    TrajectoryStats st;
    st.dF = median(abs_df);
    st.unstable_dF = unstable_df.empty() ? st.dF : median(unstable_df);
    st.d2F_over_F = median(curvature);

    // Action: |sum p dx| per drive period, averaged over complete periods.
    const double period = p.Lambda != 0.0 ? p.drive_period() : series.back().t - series.front().t;
    double area = 0.0, total = 0.0;
    std::size_t periods = 0;
    double next = series.front().t + period;
    for (std::size_t i = 1; i < series.size(); ++i) {
        const SeriesSample& a = series[i - 1];
        const SeriesSample& b = series[i];
        area += 0.5 * (a.mean_p + b.mean_p) * (b.mean_x - a.mean_x);
        if (b.t >= next) {
            total += std::abs(area);
            area = 0.0;
            ++periods;
            next += period;
        }
    }
    if (periods == 0) throw std::invalid_argument("estimate_trajectory_stats: series shorter than one drive period");
    st.action = total / static_cast<double>(periods);
    return st;
}

}  // namespace qtl
