#include "qtl/harness.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numbers>
#include <stdexcept>

#include "qtl/classical_dynamics.hpp"
#include "qtl/errors.hpp"
#include "qtl/moment_closure.hpp"
#include "qtl/quantum_evolution.hpp"
#include "qtl/regime.hpp"
#include "qtl/rng.hpp"

namespace qtl {

namespace {

constexpr std::uint64_t kEnsembleStartTag = 0x454e53535452ULL;  // "ENSSTR"
constexpr std::size_t kMaxAutoGrid = std::size_t{1} << 22;
constexpr double kDefaultClassicalDt = 1e-3;

bool uses_quantum(const RunConfig& c) {
    switch (c.mode) {
        case Mode::quantum:
        case Mode::sweep: return true;
        case Mode::lyapunov: return c.lyapunov_system == SystemKind::quantum;
        case Mode::strobe: return c.strobe_system == SystemKind::quantum;
        default: return false;
    }
}

bool uses_classical(const RunConfig& c) {
    switch (c.mode) {
        case Mode::classical: return true;
        case Mode::lyapunov: return c.lyapunov_system == SystemKind::classical;
        case Mode::strobe: return c.strobe_system == SystemKind::classical;
        default: return false;
    }
}

bool uses_stats(const RunConfig& c) { return c.mode == Mode::regime || c.mode == Mode::sweep; }

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

std::uint64_t seed_of(const RunConfig& c) {
    if (!c.seed) throw ConfigError("seed is required for mode " + std::string(to_string(c.mode)));
    return *c.seed;
}

TrajectoryOutcome run_one(const RunConfig& c, std::uint64_t run, bool quantum) {
    TrajectoryOutcome out;
    out.run = run;
    out.seed = rng::substream_seed(seed_of(c), {run});
    const PhasePoint start = ensemble_start(c, run);
    try {
        TrajectoryRecord rec;
        if (quantum) {
            const QuantumSystem sys = quantum_system(c);
            const WaveState init = init_gaussian(sys.grid, start.x, start.p, sys.initial_sigma, c.measure.hbar);
            rec = run_quantum_trajectory(init, c.T, sys.dt, c.system, c.measure, out.seed, c.sample_every,
                                         sys.options);
            if (!rec.raw_record.empty()) rec.band_limited = band_limit_record(rec.raw_record, sys.dt, c.record.window);
        } else {
            const ClassicalSystem sys = classical_system(c);
            rec = run_classical_trajectory({start.x, start.p, 0.0}, c.T, sys.dt, c.system, sys.noise, out.seed,
                                           c.sample_every);
        }
        rec.fingerprint = config_fingerprint(c);
        rec.seed = out.seed;
        if (c.mode == Mode::strobe) out.strobe = stroboscopic_map(rec.series, c.system.omega, c.strobe_phase, c.strobe_t_skip);
        out.record = std::move(rec);
    } catch (const NumericalError& e) {
        out.error = e.what();
        out.numerical_failure = true;
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

struct Writer {
    const RunConfig& config;
    std::string embedded;
    std::uint64_t fingerprint;
    std::vector<std::filesystem::path> files;

    explicit Writer(const RunConfig& c)
        : config(c), embedded(render_config(c, false)), fingerprint(config_fingerprint(c)) {}

    void write(const std::string& name, std::string_view kind, std::string_view header, const std::string& rows,
               std::optional<std::uint64_t> seed) {
        std::string text = csv::preamble(kind, fingerprint, seed, embedded);
        text += header;
        text += '\n';
        text += rows;
        const auto path = std::filesystem::path(config.output_dir) / name;
        csv::write_atomic(path, text);
        files.push_back(path);
    }
};

std::string suffix(std::size_t n_traj, std::uint64_t run) {
    return n_traj == 1 ? std::string() : "_" + std::to_string(run);
}

void write_trajectory(Writer& w, const TrajectoryOutcome& o, std::size_t n_traj) {
    if (!o.record) return;
    const std::string sfx = suffix(n_traj, o.run);
    w.write("trajectory" + sfx + ".csv", "trajectory", csv::kTrajectoryHeader, csv::trajectory_rows(o.record->series),
            o.seed);
    if (!o.record->raw_record.empty()) {
        w.write("record_raw" + sfx + ".csv", "record_raw", csv::kRecordRawHeader,
                csv::record_rows(o.record->raw_record), o.seed);
        w.write("record_avg" + sfx + ".csv", "record_avg", csv::kRecordAvgHeader,
                csv::record_rows(o.record->band_limited), o.seed);
    }
}

std::string failure_report(const EnsembleResult& e) {
    std::string out;
    for (const auto& o : e.runs) {
        if (!o.error.empty()) out += "run " + std::to_string(o.run) + ": " + o.error + "\n";
    }
    return out;
}

std::string lyapunov_summary(const LyapunovResult& r) {
    std::string s = "lambda = " + fmt("%.4f", r.lambda) + " ± " + fmt("%.4f", r.std_error) + " (pooled " +
                    fmt("%.4f", r.pooled_lambda) + " ± " + fmt("%.4f", r.pooled_std_error) + ", " +
                    std::to_string(r.fiducial_slopes.size()) + " fiducials)";
    if (r.linearity.washed_out) s += " [no clean linear region]";
    return s;
}

}  // namespace

std::size_t EnsembleResult::failures() const noexcept {
    return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [](const auto& o) { return !o.error.empty(); }));
}

double resolve_sigma(const RunConfig& c) {
    if (c.init_sigma) return *c.init_sigma;
    if (!(c.measure.k > 0.0)) throw ConfigError("init.sigma must be set when measure.k = 0");
    return std::sqrt(free_steady_var_x(c.system, c.measure));
}

Grid resolve_grid(const RunConfig& c) {
    if (c.grid_n) return make_grid(c.grid_x_min, c.grid_x_max, *c.grid_n);
    const double sigma = resolve_sigma(c);
    std::size_t n = 256;
    while ((c.grid_x_max - c.grid_x_min) / static_cast<double>(n) > sigma / 5.0) {
        n *= 2;
        if (n > kMaxAutoGrid) throw ConfigError("init.sigma too small for an automatic grid; set grid.n");
    }
    return make_grid(c.grid_x_min, c.grid_x_max, n);
}

double resolve_quantum_dt(const RunConfig& c, const Grid& grid) {
    if (c.dt) return *c.dt;
    const double sigma = resolve_sigma(c);
    const double rec = dt_bounds(grid, c.system, c.measure, sigma * sigma).recommended;
    const double steps = std::ceil(c.record.window / rec - 1e-9);
    return c.record.window / steps;
}

double resolve_classical_dt(const RunConfig& c) { return c.dt.value_or(kDefaultClassicalDt); }

double resolve_var_x_bar(const RunConfig& c) {
    if (c.noise_var_x_bar) return *c.noise_var_x_bar;
    if (!(c.measure.k > 0.0)) return 0.0;
    const double period = c.system.Lambda != 0.0 ? c.system.drive_period() : 1.0;
    return calibrate_mean_var_x(c.system, c.measure, c.init.x, c.init.p, 11.0 * period,
                                std::min(kDefaultClassicalDt, period / 1000.0));
}

NoiseSpec resolve_noise(const RunConfig& c) {
    switch (c.noise_model) {
        case NoiseModel::none: return {};
        case NoiseModel::manual: return c.noise;
        case NoiseModel::matched: break;
    }
    return matched_noise(c.measure, resolve_var_x_bar(c));
}

TrajectoryStats resolve_stats(const RunConfig& c) {
    TrajectoryStats stats;
    if (!(c.regime_dF && c.regime_unstable_dF && c.regime_d2F_over_F && c.regime_action)) {
        const double dt = resolve_classical_dt(c);
        const auto rec = run_classical_trajectory({c.init.x, c.init.p, 0.0}, c.regime_estimate_T, dt, c.system, {},
                                                  0, 10);
        stats = estimate_trajectory_stats(rec.series, c.system);
    }
    if (c.regime_dF) stats.dF = *c.regime_dF;
    if (c.regime_unstable_dF) stats.unstable_dF = *c.regime_unstable_dF;
    if (c.regime_d2F_over_F) stats.d2F_over_F = *c.regime_d2F_over_F;
    if (c.regime_action) stats.action = *c.regime_action;
    return stats;
}

RunConfig resolve_config(const RunConfig& c) {
    RunConfig r = c;
    if (uses_quantum(c)) {
        r.init_sigma = resolve_sigma(c);
        const Grid g = resolve_grid(r);
        r.grid_n = g.n;
        r.dt = resolve_quantum_dt(r, g);
    }
    if (uses_classical(c)) {
        r.dt = resolve_classical_dt(c);
        if (c.noise_model == NoiseModel::matched) r.noise_var_x_bar = resolve_var_x_bar(c);
        r.noise = resolve_noise(r);
    }
    if (uses_stats(c)) {
        const TrajectoryStats s = resolve_stats(c);
        r.regime_dF = s.dF;
        r.regime_unstable_dF = s.unstable_dF;
        r.regime_d2F_over_F = s.d2F_over_F;
        r.regime_action = s.action;
    }
    return r;
}

ClassicalSystem classical_system(const RunConfig& c) {
    return ClassicalSystem{c.system, resolve_noise(c), resolve_classical_dt(c)};
}

QuantumSystem quantum_system(const RunConfig& c) {
    QuantumSystem sys;
    sys.params = c.system;
    sys.measure = c.measure;
    sys.grid = resolve_grid(c);
    sys.initial_sigma = resolve_sigma(c);
    sys.dt = resolve_quantum_dt(c, sys.grid);
    sys.options.fft_threads = c.fft_threads;
    sys.options.leak_threshold = c.leak_threshold;
    return sys;
}

PhasePoint ensemble_start(const RunConfig& c, std::uint64_t run) {
    if (!(c.ensemble_dispersion > 0.0)) return c.init;
    rng::NormalStream u(rng::substream_seed(seed_of(c), {run, kEnsembleStartTag}));
    const double r = c.ensemble_dispersion * std::sqrt(u.uniform());
    const double phi = 2.0 * std::numbers::pi * u.uniform();
    return {c.init.x + r * std::cos(phi), c.init.p + r * std::sin(phi)};
}

std::vector<csv::StrobeRow> merge_strobe(std::vector<csv::StrobeRow> rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const csv::StrobeRow& a, const csv::StrobeRow& b) {
        return a.run != b.run ? a.run < b.run : a.point.period_index < b.point.period_index;
    });
    return rows;
}

EnsembleResult run_ensemble(const RunConfig& c, std::size_t n_traj, int workers) {
    if (n_traj == 0) throw ConfigError("run_ensemble: n_traj must be >= 1");
    seed_of(c);
    const bool quantum = c.mode == Mode::strobe ? c.strobe_system == SystemKind::quantum : c.mode != Mode::classical;
    EnsembleResult result;
    result.runs.resize(n_traj);
    const auto n = static_cast<std::int64_t>(n_traj);
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, workers))
    for (std::int64_t i = 0; i < n; ++i) {
        result.runs[static_cast<std::size_t>(i)] = run_one(c, static_cast<std::uint64_t>(i), quantum);
    }
    std::vector<csv::StrobeRow> rows;
    for (const auto& o : result.runs) {
        for (const auto& pt : o.strobe) rows.push_back({o.run, pt});
    }
    result.strobe = merge_strobe(std::move(rows));
    return result;
}

RunResult run(const RunConfig& config, int workers) {
    RunConfig c;
    try {
        c = resolve_config(config);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    Writer w(c);
    w.files.clear();
    RunResult result;

    const std::string resolved = render_config(c, false);
    const auto resolved_path = std::filesystem::path(c.output_dir) / "resolved_config.txt";

    auto finish = [&](std::string summary) {
        csv::write_atomic(resolved_path, resolved);
        w.files.push_back(resolved_path);
        result.summary = std::move(summary);
        result.files = w.files;
        return result;
    };

    try {
        switch (c.mode) {
            case Mode::quantum:
            case Mode::classical:
            case Mode::strobe: {
                const EnsembleResult e = run_ensemble(c, c.ensemble_n_traj, workers);
                const bool per_run = c.mode != Mode::strobe || c.ensemble_write_trajectories;
                if (per_run) {
                    for (const auto& o : e.runs) write_trajectory(w, o, c.ensemble_n_traj);
                }
                std::string summary;
                if (c.mode == Mode::strobe) {
                    w.write("strobe.csv", "strobe", csv::kStrobeHeader, csv::strobe_rows(e.strobe), c.seed);
                    summary = "strobe points = " + std::to_string(e.strobe.size()) + " from " +
                              std::to_string(e.runs.size() - e.failures()) + " runs";
                } else if (c.mode == Mode::quantum) {
                    const double t0 = c.transient_periods * (c.system.Lambda != 0.0 ? c.system.drive_period() : 0.0);
                    double max_sd = 0.0;
                    for (const auto& o : e.runs) {
                        if (!o.record) continue;
                        for (const auto& s : o.record->series) {
                            if (s.t >= t0) max_sd = std::max(max_sd, std::sqrt(s.var_x));
                        }
                    }
                    summary = "max sqrt(var_x) = " + fmt("%.4g", max_sd) + " for t >= " + fmt("%.4g", t0);
                } else {
                    double max_e = -INFINITY, min_e = INFINITY;
                    for (const auto& o : e.runs) {
                        if (!o.record) continue;
                        for (const auto& s : o.record->series) {
                            max_e = std::max(max_e, s.energy);
                            min_e = std::min(min_e, s.energy);
                        }
                    }
                    summary = "energy range = [" + fmt("%.6g", min_e) + ", " + fmt("%.6g", max_e) + "]";
                }
                if (e.failures() > 0) {
                    const std::string report = failure_report(e);
                    const auto path = std::filesystem::path(c.output_dir) / "failures.txt";
                    csv::write_atomic(path, report);
                    w.files.push_back(path);
                    finish(summary);
                    const bool numerical = std::any_of(e.runs.begin(), e.runs.end(),
                                                       [](const auto& o) { return o.numerical_failure; });
                    if (numerical) throw NumericalError(std::to_string(e.failures()) + " trajectory failure(s): " + report, 0.0);
                    throw std::runtime_error(std::to_string(e.failures()) + " trajectory failure(s): " + report);
                }
                if (c.mode == Mode::classical || c.mode == Mode::quantum) {
                    if (e.runs.size() > 1) summary += " over " + std::to_string(e.runs.size()) + " runs";
                }
                return finish(summary);
            }
            case Mode::lyapunov: {
                const std::uint64_t seed = seed_of(c);
                const LyapunovResult r = c.lyapunov_system == SystemKind::classical
                                             ? lyapunov_estimate(c.protocol, classical_system(c), c.fit, seed, workers)
                                             : lyapunov_estimate(c.protocol, quantum_system(c), c.fit, seed, workers);
                w.write("lyapunov.csv", "lyapunov", csv::kLyapunovHeader, csv::lyapunov_rows(r.curve), c.seed);
                return finish(lyapunov_summary(r));
            }
            case Mode::regime: {
                const RegimeReport rep = regime_check(c.system, c.measure, resolve_stats(c), c.record);
                using csv::format_double;
                std::string rows;
                rows += "localization," + format_double(rep.loc_lhs) + "," + format_double(rep.loc_rhs) + "," +
                        std::string(to_string(rep.localization)) + "\n";
                rows += "noise_lower," + format_double(rep.noise_mid) + "," + format_double(rep.noise_lo) + "," +
                        std::string(to_string(rep.noise)) + "\n";
                rows += "noise_upper," + format_double(rep.noise_mid) + "," + format_double(rep.noise_hi) + "," +
                        std::string(to_string(rep.noise)) + "\n";
                rows += "record," + format_double(rep.record_lhs) + "," + format_double(rep.record_rhs) + "," +
                        std::string(to_string(rep.record)) + "\n";
                rows += "k_min_record," + format_double(rep.k_min_record) + "," + format_double(c.measure.k) + "," +
                        std::string(c.measure.k > rep.k_min_record ? "satisfied" : "violated") + "\n";
                w.write("regime.csv", "regime", csv::kRegimeHeader, rows, c.seed);
                return finish("localization: " + std::string(to_string(rep.localization)) +
                              ", noise: " + std::string(to_string(rep.noise)) +
                              ", record: " + std::string(to_string(rep.record)) +
                              ", k_min(record) = " + fmt("%.6g", rep.k_min_record));
            }
            case Mode::sweep: {
                const std::uint64_t seed = seed_of(c);
                const auto rows = k_sensitivity_sweep(c.sweep_k, quantum_system(c), c.protocol, c.fit, seed,
                                                      resolve_stats(c), c.record, workers);
                std::string text;
                double lo = INFINITY, hi = -INFINITY;
                for (const auto& row : rows) {
                    using csv::format_double;
                    text += format_double(row.k) + "," + format_double(row.result.lambda) + "," +
                            format_double(row.result.std_error) + "," + format_double(row.result.pooled_lambda) +
                            "," + (row.result.linearity.washed_out ? "1" : "0") + "," +
                            std::string(to_string(row.regime.localization)) + "," +
                            std::string(to_string(row.regime.noise)) + "," +
                            std::string(to_string(row.regime.record)) + "\n";
                    lo = std::min(lo, row.result.lambda);
                    hi = std::max(hi, row.result.lambda);
                }
                w.write("sweep.csv", "sweep", csv::kSweepHeader, text, c.seed);
                return finish("sweep over " + std::to_string(rows.size()) + " k values: lambda in [" +
                              fmt("%.4f", lo) + ", " + fmt("%.4f", hi) + "]");
            }
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("unhandled mode");
}

}  // namespace qtl
