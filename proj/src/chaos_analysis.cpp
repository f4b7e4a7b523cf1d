#include "qtl/chaos_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qtl/errors.hpp"
#include "qtl/moment_closure.hpp"
#include "qtl/rng.hpp"

namespace qtl {

double phase_distance(PhasePoint a, PhasePoint b, double weight) noexcept {
    const double dx = a.x - b.x;
    const double dp = a.p - b.p;
    return std::sqrt(dx * dx + weight * dp * dp);
}

void BranchProtocol::validate() const {
    if (n_fiducial < 1) throw std::invalid_argument("lyapunov: n_fiducial must be >= 1");
    if (n_branch_points < 1) throw std::invalid_argument("lyapunov: n_branch_points must be >= 1");
    if (!(branch_spacing > 0.0) || !(track_time > 0.0) || !(sample_interval > 0.0)) {
        throw std::invalid_argument("lyapunov: branch_spacing, track_time and sample_interval must be > 0");
    }
    if (!(start_dispersion >= 0.0)) throw std::invalid_argument("lyapunov: start_dispersion must be >= 0");
    if (perturbation == Perturbation::initial_offset && !(delta0 > 0.0)) {
        throw std::invalid_argument("lyapunov: delta0 must be > 0 for initial-offset branching");
    }
    if (!(metric_weight > 0.0)) throw std::invalid_argument("lyapunov: metric_weight must be > 0");
}

namespace {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double r_squared = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ssr += r * r;
    }
    f.slope_stderr = x.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;
    f.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
    return f;
}

/// Index range [lo, hi) of tau values inside [a, b] (with rounding slack).
std::pair<std::size_t, std::size_t> window_range(std::span<const double> tau, double a, double b) {
    const double eps = 1e-9 * std::max(1.0, std::abs(b));
    std::size_t lo = 0;
    while (lo < tau.size() && tau[lo] < a - eps) ++lo;
    std::size_t hi = lo;
    while (hi < tau.size() && tau[hi] <= b + eps) ++hi;
    return {lo, hi};
}

double fit_slope_over(std::span<const double> tau, std::span<const double> y, double a, double b) {
    const auto [lo, hi] = window_range(tau, a, b);
    if (hi - lo < 2) return std::numeric_limits<double>::quiet_NaN();
    return fit_line(tau.subspan(lo, hi - lo), y.subspan(lo, hi - lo)).slope;
}

}  // namespace

LyapunovResult analyze_separations(const SeparationSet& set, FitWindow window, double saturation_delta) {
    const std::size_t n_inst = set.ln_delta.size();
    const std::size_t n_tau = set.tau.size();
    if (n_inst == 0 || n_tau == 0) throw std::invalid_argument("analyze_separations: empty separation set");
    if (set.fiducial.size() != n_inst) throw std::invalid_argument("analyze_separations: fiducial ids mismatch");
    if (!(window.begin >= 0.0 && window.end > window.begin && window.end <= set.tau.back() + 1e-9)) {
        throw std::invalid_argument("analyze_separations: fit window must lie inside [0, track_time]");
    }

    bool any_finite = false;
    bool any_zero = false;
    for (const auto& row : set.ln_delta) {
        if (row.size() != n_tau) throw std::invalid_argument("analyze_separations: ragged separation set");
        for (double v : row) {
            if (std::isfinite(v)) any_finite = true;
            else any_zero = true;
        }
    }
    if (!any_finite) {
        throw NumericalError("all separations are identically zero: neighbour and fiducial share a noise stream", 0.0);
    }
    if (any_zero) throw NumericalError("a neighbour trajectory coincided with its fiducial (zero separation)", 0.0);

    LyapunovResult res;
    res.fit_window = window;
    res.n_samples = n_inst;
    res.curve.resize(n_tau);
    std::vector<double> mean(n_tau);
    for (std::size_t j = 0; j < n_tau; ++j) {
        double s = 0.0, s2 = 0.0;
        for (const auto& row : set.ln_delta) s += row[j];
        const double m = s / static_cast<double>(n_inst);
        for (const auto& row : set.ln_delta) s2 += (row[j] - m) * (row[j] - m);
        const double sd = n_inst > 1 ? std::sqrt(s2 / static_cast<double>(n_inst - 1)) : 0.0;
        mean[j] = m;
        res.curve[j] = {set.tau[j], m, sd / std::sqrt(static_cast<double>(n_inst))};
    }

    const auto [lo, hi] = window_range(set.tau, window.begin, window.end);
    if (hi - lo < 3) throw std::invalid_argument("analyze_separations: fewer than 3 curve points in the fit window");
    if (std::exp(mean[lo]) >= saturation_delta) {
        std::ostringstream os;
        os << "separation already saturated at the start of the fit window (mean Delta = " << std::exp(mean[lo])
           << "); shrink the window";
        throw NumericalError(os.str(), set.tau[lo]);
    }
    const std::span<const double> tau_w(set.tau.data() + lo, hi - lo);
    const LineFit pooled = fit_line(tau_w, std::span<const double>(mean.data() + lo, hi - lo));
    res.pooled_lambda = pooled.slope;
    res.pooled_std_error = pooled.slope_stderr;

    // Per-fiducial curves: mean over that fiducial's branches.
    std::size_t n_fid = 0;
    for (std::size_t f : set.fiducial) n_fid = std::max(n_fid, f + 1);
    std::vector<std::vector<double>> fid_sum(n_fid, std::vector<double>(n_tau, 0.0));
    std::vector<std::size_t> fid_count(n_fid, 0);
    for (std::size_t i = 0; i < n_inst; ++i) {
        auto& acc = fid_sum[set.fiducial[i]];
        for (std::size_t j = 0; j < n_tau; ++j) acc[j] += set.ln_delta[i][j];
        ++fid_count[set.fiducial[i]];
    }
    for (std::size_t f = 0; f < n_fid; ++f) {
        if (fid_count[f] == 0) continue;
        for (double& v : fid_sum[f]) v /= static_cast<double>(fid_count[f]);
        res.fiducial_slopes.push_back(fit_line(tau_w, std::span<const double>(fid_sum[f].data() + lo, hi - lo)).slope);
    }
    const auto nf = static_cast<double>(res.fiducial_slopes.size());
    double ms = 0.0;
    for (double s : res.fiducial_slopes) ms += s;
    ms /= nf;
    res.lambda = ms;
    if (res.fiducial_slopes.size() > 1) {
        double v = 0.0;
        for (double s : res.fiducial_slopes) v += (s - ms) * (s - ms);
        res.std_error = std::sqrt(v / (nf - 1.0) / nf);
    } else {
        res.std_error = pooled.slope_stderr;
    }

    const double third = (window.end - window.begin) / 3.0;
    res.linearity.early_slope = fit_slope_over(set.tau, mean, window.begin, window.begin + third);
    res.linearity.late_slope = fit_slope_over(set.tau, mean, window.end - third, window.end);
    res.linearity.r_squared = pooled.r_squared;
    const double ratio = res.linearity.late_slope / res.linearity.early_slope;
    res.linearity.washed_out = !(ratio >= 0.5 && ratio <= 2.0);
    return res;
}

namespace {

constexpr std::uint64_t kStartTag = 0x5354415254ULL;   // "START"
constexpr std::uint64_t kOffsetTag = 0x4f4646534554ULL; // "OFFSET"

PhasePoint draw_start(const BranchProtocol& proto, std::uint64_t seed, std::size_t f) {
    if (proto.start_dispersion == 0.0) return proto.start;
    rng::NormalStream u(rng::substream_seed(seed, {f, kStartTag}));
    const double r = proto.start_dispersion * std::sqrt(u.uniform());
    const double theta = 2.0 * std::numbers::pi * u.uniform();
    return {proto.start.x + r * std::cos(theta), proto.start.p + r * std::sin(theta)};
}

/// Runs one fiducial and all its branches. `make(start, stream_seed)`
/// builds a simulation exposing advance/phase_point/reseed/displace/dt.
template <class Factory>
void track_fiducial(const BranchProtocol& proto, std::uint64_t seed, std::size_t f, Factory make,
                    std::vector<std::vector<double>>& rows, double& sample_dt) {
    auto sim = make(draw_start(proto, seed, f), rng::substream_seed(seed, {f}));
    const double dt = sim.dt();
    const auto spacing_steps = static_cast<std::size_t>(std::llround(proto.branch_spacing / dt));
    const std::size_t steps_per_sample =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(proto.sample_interval / dt)));
    sample_dt = static_cast<double>(steps_per_sample) * dt;
    const std::size_t n_samples = static_cast<std::size_t>(std::llround(proto.track_time / dt)) / steps_per_sample;

    for (std::size_t b = 0; b < proto.n_branch_points; ++b) {
        sim.advance(spacing_steps);
        auto fid = sim;
        auto nb = sim;
        if (proto.perturbation == Perturbation::noise_realization) {
            nb.reseed(rng::substream_seed(seed, {f, b}));
        } else {
            rng::NormalStream dir(rng::substream_seed(seed, {f, b, kOffsetTag}));
            const double theta = 2.0 * std::numbers::pi * dir.uniform();
            nb.displace(proto.delta0 * std::cos(theta), proto.delta0 * std::sin(theta) / std::sqrt(proto.metric_weight));
        }
        std::vector<double> row(n_samples + 1);
        row[0] = std::log(phase_distance(fid.phase_point(), nb.phase_point(), proto.metric_weight));
        for (std::size_t j = 1; j <= n_samples; ++j) {
            fid.advance(steps_per_sample);
            nb.advance(steps_per_sample);
            row[j] = std::log(phase_distance(fid.phase_point(), nb.phase_point(), proto.metric_weight));
        }
        rows.push_back(std::move(row));
    }
}

template <class Factory>
SeparationSet collect(const BranchProtocol& proto, std::uint64_t seed, int workers, Factory make) {
    proto.validate();
    const std::size_t nf = proto.n_fiducial;
    std::vector<std::vector<std::vector<double>>> per_fid(nf);
    std::vector<double> sample_dt(nf, 0.0);
    std::vector<std::exception_ptr> errors(nf);
    const auto nfs = static_cast<std::ptrdiff_t>(nf);
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, workers))
    for (std::ptrdiff_t f = 0; f < nfs; ++f) {
        const auto fi = static_cast<std::size_t>(f);
        try {
            track_fiducial(proto, seed, fi, make, per_fid[fi], sample_dt[fi]);
        } catch (...) {
            errors[fi] = std::current_exception();
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    SeparationSet set;
    const std::size_t n_tau = per_fid[0].front().size();
    const double dt_sample = sample_dt[0];
    set.tau.resize(n_tau);
    for (std::size_t j = 0; j < n_tau; ++j) set.tau[j] = static_cast<double>(j) * dt_sample;
    for (std::size_t f = 0; f < nf; ++f) {
        for (auto& row : per_fid[f]) {
            set.fiducial.push_back(f);
            set.ln_delta.push_back(std::move(row));
        }
    }
    // Drop tau = 0 when the pairs start on top of each other.
    const bool zero_start = std::any_of(set.ln_delta.begin(), set.ln_delta.end(),
                                        [](const auto& r) { return !std::isfinite(r[0]); });
    if (zero_start && n_tau > 1) {
        set.tau.erase(set.tau.begin());
        for (auto& row : set.ln_delta) row.erase(row.begin());
    }
    return set;
}

}  // namespace

SeparationSet collect_separations(const BranchProtocol& proto, const ClassicalSystem& sys, std::uint64_t seed,
                                  int workers) {
    return collect(proto, seed, workers, [&](PhasePoint start, std::uint64_t stream) {
        return ClassicalSimulation({start.x, start.p, 0.0}, sys.params, sys.noise, sys.dt, stream);
    });
}

SeparationSet collect_separations(const BranchProtocol& proto, const QuantumSystem& sys, std::uint64_t seed,
                                  int workers) {
    const double sigma = sys.initial_sigma > 0.0 ? sys.initial_sigma
                                                 : std::sqrt(free_steady_var_x(sys.params, sys.measure));
    return collect(proto, seed, workers, [&](PhasePoint start, std::uint64_t stream) {
        return QuantumSimulation(init_gaussian(sys.grid, start.x, start.p, sigma, sys.measure.hbar), sys.params,
                                 sys.measure, sys.dt, stream, sys.options);
    });
}

LyapunovResult lyapunov_estimate(const BranchProtocol& proto, const ClassicalSystem& sys, FitWindow window,
                                 std::uint64_t seed, int workers) {
    return analyze_separations(collect_separations(proto, sys, seed, workers), window, proto.saturation_delta);
}

LyapunovResult lyapunov_estimate(const BranchProtocol& proto, const QuantumSystem& sys, FitWindow window,
                                 std::uint64_t seed, int workers) {
    return analyze_separations(collect_separations(proto, sys, seed, workers), window, proto.saturation_delta);
}

std::vector<StrobePoint> stroboscopic_map(std::span<const SeriesSample> series, double omega, double phase,
                                          double t_skip) {
    if (!(omega > 0.0)) throw std::invalid_argument("stroboscopic_map: omega must be > 0");
    if (series.empty()) throw std::invalid_argument("stroboscopic_map: empty record");
    const double t_first = series.front().t;
    const double t_last = series.back().t;
    if (t_last < t_skip) throw std::invalid_argument("stroboscopic_map: record is shorter than t_skip");

    const double period = 2.0 * std::numbers::pi / omega;
    double reduced = std::fmod(phase, 2.0 * std::numbers::pi);
    if (reduced < 0.0) reduced += 2.0 * std::numbers::pi;
    const double offset = reduced / omega;
    const double t_begin = std::max(t_skip, t_first);
    const double slack = 1e-12 * std::max(1.0, std::abs(t_last));

    auto n = static_cast<std::int64_t>(std::ceil((t_begin - offset) / period - 1e-12));
    std::vector<StrobePoint> out;
    std::size_t seg = 0;
    for (;; ++n) {
        const double tn = offset + static_cast<double>(n) * period;
        if (tn > t_last + slack) break;
        if (tn < t_begin - slack) continue;
        while (seg + 1 < series.size() && series[seg + 1].t < tn) ++seg;
        StrobePoint pt;
        pt.period_index = n;
        pt.t = tn;
        if (seg + 1 >= series.size()) {
            pt.x = series.back().mean_x;
            pt.p = series.back().mean_p;
        } else {
            const SeriesSample& a = series[seg];
            const SeriesSample& b = series[seg + 1];
            const double w = std::clamp((tn - a.t) / (b.t - a.t), 0.0, 1.0);
            pt.x = a.mean_x + w * (b.mean_x - a.mean_x);
            pt.p = a.mean_p + w * (b.mean_p - a.mean_p);
        }
        out.push_back(pt);
    }
    return out;
}

std::vector<RecordSample> band_limit_record(std::span<const RecordSample> raw, double dt, double window) {
    if (!(dt > 0.0)) throw std::invalid_argument("band_limit_record: dt must be > 0");
    if (!(window >= dt * (1.0 - 1e-9))) throw std::invalid_argument("band_limit_record: window shorter than dt");
    const double ratio = window / dt;
    const double count = std::round(ratio);
    if (std::abs(ratio - count) > 1e-6 * count) {
        throw std::invalid_argument("band_limit_record: window is not an integer multiple of dt");
    }
    const auto per = static_cast<std::size_t>(count);
    std::vector<RecordSample> out;
    out.reserve(raw.size() / per);
    for (std::size_t start = 0; start + per <= raw.size(); start += per) {
        double st = 0.0, sy = 0.0;
        for (std::size_t i = start; i < start + per; ++i) {
            st += raw[i].t;
            sy += raw[i].y;
        }
        out.push_back({st / count, sy / count});
    }
    return out;
}

std::vector<SweepRow> k_sensitivity_sweep(std::span<const double> k_values, const QuantumSystem& base,
                                          const BranchProtocol& proto, FitWindow window, std::uint64_t seed,
                                          const TrajectoryStats& stats, const RecordSpec& record, int workers) {
    if (k_values.empty()) throw std::invalid_argument("k_sensitivity_sweep: no k values");
    std::vector<SweepRow> rows;
    for (double k : k_values) {
        QuantumSystem sys = base;
        sys.measure.k = k;
        SweepRow row;
        row.k = k;
        row.regime = regime_check(sys.params, sys.measure, stats, record);
        if (row.regime.localization == Verdict::violated || row.regime.noise == Verdict::violated) {
            std::ostringstream os;
            os << "k_sensitivity_sweep: k = " << k << " is outside the classical regime (localization "
               << to_string(row.regime.localization) << ", noise " << to_string(row.regime.noise) << ")";
            throw std::invalid_argument(os.str());
        }
        row.result = lyapunov_estimate(proto, sys, window, seed, workers);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace qtl
