#include "qtl/config.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "qtl/errors.hpp"

namespace qtl {

std::string_view to_string(Mode m) noexcept {
    switch (m) {
        case Mode::quantum: return "quantum";
        case Mode::classical: return "classical";
        case Mode::lyapunov: return "lyapunov";
        case Mode::strobe: return "strobe";
        case Mode::regime: return "regime";
        case Mode::sweep: return "sweep";
    }
    return "?";
}

std::optional<Mode> parse_mode(std::string_view s) noexcept {
    for (Mode m : {Mode::quantum, Mode::classical, Mode::lyapunov, Mode::strobe, Mode::regime, Mode::sweep}) {
        if (to_string(m) == s) return m;
    }
    return std::nullopt;
}

namespace {

// ---- scalar codecs ---------------------------------------------------------

struct BadValue : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(std::string_view v, const char* what) {
    T out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw BadValue(std::string("expected ") + what + ", got '" + std::string(v) + "'");
    }
    return out;
}

double parse_real(std::string_view v) {
    const double d = parse_number<double>(v, "a number");
    if (!std::isfinite(d)) throw BadValue("expected a finite number, got '" + std::string(v) + "'");
    return d;
}

std::size_t parse_count(std::string_view v) { return parse_number<std::size_t>(v, "a non-negative integer"); }

bool parse_bool(std::string_view v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw BadValue("expected true or false, got '" + std::string(v) + "'");
}

std::string real(double d) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    return buf;
}

template <class T>
std::string integer(T v) {
    return std::to_string(v);
}

std::optional<double> parse_auto_real(std::string_view v) {
    if (v == "auto") return std::nullopt;
    return parse_real(v);
}

std::string auto_real(const std::optional<double>& v) { return v ? real(*v) : "auto"; }

std::string_view kind_name(SystemKind k) { return k == SystemKind::classical ? "classical" : "quantum"; }

SystemKind parse_kind(std::string_view v) {
    if (v == "classical") return SystemKind::classical;
    if (v == "quantum") return SystemKind::quantum;
    throw BadValue("expected classical or quantum, got '" + std::string(v) + "'");
}

// ---- key table -------------------------------------------------------------

struct Key {
    const char* name;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define QTL_REAL(key, member)                                                             \
    Key {                                                                                 \
        key, [](RunConfig& c, std::string_view v) { c.member = parse_real(v); },         \
            [](const RunConfig& c) { return real(c.member); }                             \
    }
#define QTL_COUNT(key, member)                                                            \
    Key {                                                                                 \
        key, [](RunConfig& c, std::string_view v) { c.member = parse_count(v); },        \
            [](const RunConfig& c) { return integer(c.member); }                          \
    }
#define QTL_AUTO_REAL(key, member)                                                        \
    Key {                                                                                 \
        key, [](RunConfig& c, std::string_view v) { c.member = parse_auto_real(v); },    \
            [](const RunConfig& c) { return auto_real(c.member); }                        \
    }

const std::vector<Key>& keys() {
    static const std::vector<Key> table = {
        Key{"mode",
            [](RunConfig& c, std::string_view v) {
                auto m = parse_mode(v);
                if (!m) throw BadValue("unknown mode '" + std::string(v) + "'");
                c.mode = *m;
            },
            [](const RunConfig& c) { return std::string(to_string(c.mode)); }},
        Key{"seed", [](RunConfig& c, std::string_view v) { c.seed = parse_number<std::uint64_t>(v, "a 64-bit seed"); },
            [](const RunConfig& c) { return c.seed ? integer(*c.seed) : std::string("none"); }},

        QTL_REAL("system.m", system.m),
        QTL_REAL("system.B", system.B),
        QTL_REAL("system.A", system.A),
        QTL_REAL("system.Lambda", system.Lambda),
        QTL_REAL("system.omega", system.omega),

        QTL_REAL("measure.hbar", measure.hbar),
        QTL_REAL("measure.k", measure.k),
        QTL_REAL("measure.eta", measure.eta),

        Key{"noise.model",
            [](RunConfig& c, std::string_view v) {
                if (v == "none") c.noise_model = NoiseModel::none;
                else if (v == "matched") c.noise_model = NoiseModel::matched;
                else if (v == "manual") c.noise_model = NoiseModel::manual;
                else throw BadValue("expected none, matched or manual, got '" + std::string(v) + "'");
            },
            [](const RunConfig& c) {
                switch (c.noise_model) {
                    case NoiseModel::none: return std::string("none");
                    case NoiseModel::matched: return std::string("matched");
                    case NoiseModel::manual: return std::string("manual");
                }
                return std::string("?");
            }},
        QTL_REAL("noise.sigma_x", noise.sigma_x),
        QTL_REAL("noise.sigma_p", noise.sigma_p),
        QTL_AUTO_REAL("noise.var_x_bar", noise_var_x_bar),

        QTL_REAL("grid.x_min", grid_x_min),
        QTL_REAL("grid.x_max", grid_x_max),
        Key{"grid.n",
            [](RunConfig& c, std::string_view v) {
                if (v == "auto") c.grid_n.reset();
                else c.grid_n = parse_count(v);
            },
            [](const RunConfig& c) { return c.grid_n ? integer(*c.grid_n) : std::string("auto"); }},

        QTL_REAL("init.x", init.x),
        QTL_REAL("init.p", init.p),
        QTL_AUTO_REAL("init.sigma", init_sigma),

        QTL_AUTO_REAL("time.dt", dt),
        QTL_REAL("time.T", T),
        QTL_COUNT("time.sample_every", sample_every),
        QTL_REAL("time.transient_periods", transient_periods),

        QTL_REAL("record.window", record.window),
        QTL_REAL("record.tolerance", record.tolerance),

        Key{"lyapunov.system", [](RunConfig& c, std::string_view v) { c.lyapunov_system = parse_kind(v); },
            [](const RunConfig& c) { return std::string(kind_name(c.lyapunov_system)); }},
        QTL_COUNT("lyapunov.n_fiducial", protocol.n_fiducial),
        QTL_REAL("lyapunov.start_x", protocol.start.x),
        QTL_REAL("lyapunov.start_p", protocol.start.p),
        QTL_REAL("lyapunov.start_dispersion", protocol.start_dispersion),
        QTL_COUNT("lyapunov.n_branch", protocol.n_branch_points),
        QTL_REAL("lyapunov.spacing", protocol.branch_spacing),
        QTL_REAL("lyapunov.track", protocol.track_time),
        Key{"lyapunov.perturbation",
            [](RunConfig& c, std::string_view v) {
                if (v == "noise") c.protocol.perturbation = Perturbation::noise_realization;
                else if (v == "offset") c.protocol.perturbation = Perturbation::initial_offset;
                else throw BadValue("expected noise or offset, got '" + std::string(v) + "'");
            },
            [](const RunConfig& c) {
                return std::string(c.protocol.perturbation == Perturbation::noise_realization ? "noise" : "offset");
            }},
        QTL_REAL("lyapunov.delta0", protocol.delta0),
        QTL_REAL("lyapunov.sample_interval", protocol.sample_interval),
        QTL_REAL("lyapunov.metric_weight", protocol.metric_weight),
        QTL_REAL("lyapunov.saturation_delta", protocol.saturation_delta),
        QTL_REAL("lyapunov.fit_begin", fit.begin),
        QTL_REAL("lyapunov.fit_end", fit.end),

        Key{"strobe.system", [](RunConfig& c, std::string_view v) { c.strobe_system = parse_kind(v); },
            [](const RunConfig& c) { return std::string(kind_name(c.strobe_system)); }},
        QTL_REAL("strobe.phase", strobe_phase),
        QTL_REAL("strobe.t_skip", strobe_t_skip),
        QTL_COUNT("ensemble.n_traj", ensemble_n_traj),
        QTL_REAL("ensemble.start_dispersion", ensemble_dispersion),
        Key{"ensemble.write_trajectories",
            [](RunConfig& c, std::string_view v) { c.ensemble_write_trajectories = parse_bool(v); },
            [](const RunConfig& c) { return std::string(c.ensemble_write_trajectories ? "true" : "false"); }},

        Key{"sweep.k_values",
            [](RunConfig& c, std::string_view v) {
                c.sweep_k.clear();
                std::size_t pos = 0;
                while (pos <= v.size()) {
                    const auto comma = v.find(',', pos);
                    const auto item = trim(v.substr(pos, comma == std::string_view::npos ? v.npos : comma - pos));
                    if (!item.empty()) c.sweep_k.push_back(parse_real(item));
                    if (comma == std::string_view::npos) break;
                    pos = comma + 1;
                }
            },
            [](const RunConfig& c) {
                std::string s;
                for (std::size_t i = 0; i < c.sweep_k.size(); ++i) s += (i ? ", " : "") + real(c.sweep_k[i]);
                return s;
            }},

        QTL_AUTO_REAL("regime.dF", regime_dF),
        QTL_AUTO_REAL("regime.unstable_dF", regime_unstable_dF),
        QTL_AUTO_REAL("regime.d2F_over_F", regime_d2F_over_F),
        QTL_AUTO_REAL("regime.action", regime_action),
        QTL_REAL("regime.estimate_T", regime_estimate_T),

        Key{"numerics.fft_threads",
            [](RunConfig& c, std::string_view v) { c.fft_threads = parse_number<int>(v, "an integer"); },
            [](const RunConfig& c) { return integer(c.fft_threads); }},
        QTL_REAL("numerics.leak_threshold", leak_threshold),

        Key{"output.dir", [](RunConfig& c, std::string_view v) { c.output_dir = std::string(v); },
            [](const RunConfig& c) { return c.output_dir; }},
    };
    return table;
}

#undef QTL_REAL
#undef QTL_COUNT
#undef QTL_AUTO_REAL

// ---- validation ------------------------------------------------------------

class Validator {
public:
    explicit Validator(const std::map<std::string, std::size_t>& lines) : lines_(lines) {}

    void require(bool ok, const char* key, const std::string& message) const {
        if (ok) return;
        const auto it = lines_.find(key);
        if (it != lines_.end()) throw ConfigError("line " + std::to_string(it->second) + ": " + message);
        throw ConfigError(message + " (" + key + " default)");
    }

private:
    const std::map<std::string, std::size_t>& lines_;
};

void validate(const RunConfig& c, const std::map<std::string, std::size_t>& lines) {
    const Validator v(lines);
    v.require(c.system.m > 0.0, "system.m", "system.m must be > 0");
    v.require(c.system.B >= 0.0, "system.B", "system.B must be >= 0");
    v.require(c.system.Lambda == 0.0 || c.system.omega > 0.0, "system.omega", "system.omega must be > 0 when Lambda != 0");
    v.require(c.measure.hbar > 0.0, "measure.hbar", "hbar must be > 0");
    v.require(c.measure.k >= 0.0, "measure.k", "k must be >= 0");
    v.require(c.measure.eta > 0.0 && c.measure.eta <= 1.0, "measure.eta", "eta out of (0,1]");
    v.require(c.noise.sigma_x >= 0.0, "noise.sigma_x", "noise.sigma_x must be >= 0");
    v.require(c.noise.sigma_p >= 0.0, "noise.sigma_p", "noise.sigma_p must be >= 0");
    v.require(!c.noise_var_x_bar || *c.noise_var_x_bar >= 0.0, "noise.var_x_bar", "noise.var_x_bar must be >= 0");
    v.require(c.grid_x_max > c.grid_x_min, "grid.x_max", "grid.x_max must exceed grid.x_min");
    v.require(!c.grid_n || (*c.grid_n >= 16 && std::has_single_bit(*c.grid_n)), "grid.n",
              "grid.n must be a power of two >= 16");
    v.require(!c.init_sigma || *c.init_sigma > 0.0, "init.sigma", "init.sigma must be > 0");
    v.require(!c.dt || *c.dt > 0.0, "time.dt", "time.dt must be > 0");
    v.require(c.T > 0.0, "time.T", "time.T must be > 0");
    v.require(c.sample_every >= 1, "time.sample_every", "time.sample_every must be >= 1");
    v.require(c.transient_periods >= 0.0, "time.transient_periods", "time.transient_periods must be >= 0");
    v.require(c.record.window > 0.0, "record.window", "record.window must be > 0");
    v.require(c.record.tolerance > 0.0, "record.tolerance", "record.tolerance must be > 0");
    v.require(c.protocol.n_fiducial >= 1, "lyapunov.n_fiducial", "lyapunov.n_fiducial must be >= 1");
    v.require(c.protocol.n_branch_points >= 1, "lyapunov.n_branch", "lyapunov.n_branch must be >= 1");
    v.require(c.protocol.branch_spacing > 0.0, "lyapunov.spacing", "lyapunov.spacing must be > 0");
    v.require(c.protocol.track_time > 0.0, "lyapunov.track", "lyapunov.track must be > 0");
    v.require(c.protocol.start_dispersion >= 0.0, "lyapunov.start_dispersion", "lyapunov.start_dispersion must be >= 0");
    v.require(c.protocol.delta0 > 0.0, "lyapunov.delta0", "lyapunov.delta0 must be > 0");
    v.require(c.protocol.sample_interval > 0.0, "lyapunov.sample_interval", "lyapunov.sample_interval must be > 0");
    v.require(c.protocol.metric_weight > 0.0, "lyapunov.metric_weight", "lyapunov.metric_weight must be > 0");
    v.require(c.protocol.saturation_delta > 0.0, "lyapunov.saturation_delta", "lyapunov.saturation_delta must be > 0");
    v.require(c.fit.begin >= 0.0 && c.fit.end > c.fit.begin && c.fit.end <= c.protocol.track_time, "lyapunov.fit_end",
              "lyapunov fit window must satisfy 0 <= fit_begin < fit_end <= track");
    v.require(c.ensemble_n_traj >= 1, "ensemble.n_traj", "ensemble.n_traj must be >= 1");
    v.require(c.ensemble_dispersion >= 0.0, "ensemble.start_dispersion", "ensemble.start_dispersion must be >= 0");
    v.require(c.mode != Mode::sweep || !c.sweep_k.empty(), "sweep.k_values", "sweep mode needs sweep.k_values");
    for (double k : c.sweep_k) v.require(k > 0.0, "sweep.k_values", "sweep.k_values must be > 0");
    v.require(!c.regime_action || *c.regime_action > 0.0, "regime.action", "regime.action must be > 0");
    v.require(c.regime_estimate_T > 0.0, "regime.estimate_T", "regime.estimate_T must be > 0");
    v.require(c.fft_threads >= 1, "numerics.fft_threads", "numerics.fft_threads must be >= 1");
    v.require(c.leak_threshold > 0.0 && c.leak_threshold < 1.0, "numerics.leak_threshold",
              "numerics.leak_threshold must be in (0,1)");
    v.require(!c.output_dir.empty(), "output.dir", "output.dir must not be empty");
}

}  // namespace

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const Key& k : keys()) out.emplace_back(k.name);
    return out;
}

RunConfig parse_config(std::string_view text) { return parse_config(text, ConfigOverrides{}); }

RunConfig parse_config(std::string_view text, const ConfigOverrides& overrides) {
    RunConfig c;
    std::map<std::string, std::size_t> lines;
    std::map<std::string_view, const Key*> index;
    for (const Key& k : keys()) index[k.name] = &k;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        const auto it = index.find(key);
        if (it == index.end()) throw ConfigError(where + "unknown key '" + std::string(key) + "'");
        if (lines.count(std::string(key))) throw ConfigError(where + "duplicate key '" + std::string(key) + "'");
        if (value.empty()) throw ConfigError(where + "missing value for '" + std::string(key) + "'");
        try {
            it->second->set(c, value);
        } catch (const BadValue& e) {
            throw ConfigError(where + std::string(key) + ": " + e.what());
        }
        lines[std::string(key)] = line_no;
    }

    if (overrides.mode) {
        if (lines.count("mode") && c.mode != *overrides.mode) {
            throw ConfigError("line " + std::to_string(lines["mode"]) + ": mode '" + std::string(to_string(c.mode)) +
                              "' does not match requested mode '" + std::string(to_string(*overrides.mode)) + "'");
        }
        c.mode = *overrides.mode;
    }
    if (overrides.seed) c.seed = overrides.seed;
    if (overrides.output_dir) c.output_dir = *overrides.output_dir;

    std::vector<std::string> missing;
    if (!lines.count("mode") && !overrides.mode) missing.emplace_back("mode");
    if (!c.seed && ((!lines.count("mode") && !overrides.mode) || c.is_stochastic())) missing.emplace_back("seed");
    if (!missing.empty()) {
        std::string msg = "missing required keys:";
        for (std::size_t i = 0; i < missing.size(); ++i) msg += (i ? ", " : " ") + missing[i];
        throw ConfigError(msg);
    }
    validate(c, lines);
    return c;
}

std::string render_config(const RunConfig& c, bool include_output) {
    std::string out;
    for (const Key& k : keys()) {
        const std::string_view name = k.name;
        if (name == "output.dir" && !include_output) continue;
        if (name == "seed" && !c.seed) continue;
        if (name == "sweep.k_values" && c.sweep_k.empty()) continue;
        out += std::string(name) + " = " + k.get(c) + "\n";
    }
    return out;
}

std::uint64_t config_fingerprint(const RunConfig& c) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : render_config(c, false)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace qtl
