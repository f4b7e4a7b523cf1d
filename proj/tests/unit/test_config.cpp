#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "qtl/config.hpp"
#include "qtl/csv.hpp"
#include "qtl/errors.hpp"
#include "qtl/harness.hpp"

using namespace qtl;
namespace fs = std::filesystem;

namespace {

std::string error_of(std::string_view text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("qtl_unit_" + name);
    fs::remove_all(dir);
    return dir;
}

const char* kSmallQuantum = R"(
mode = quantum
seed = 42
measure.hbar = 1e-2
measure.k = 1e3
time.T = 0.5
record.window = 0.05
record.tolerance = 0.1
)";

}  // namespace

TEST_CASE("defaults are the driven double well") {
    const RunConfig c = parse_config("mode = regime\n");
    CHECK(c.system.m == 1.0);
    CHECK(c.system.B == 0.5);
    CHECK(c.system.A == 10.0);
    CHECK(c.system.Lambda == 10.0);
    CHECK(c.system.omega == 6.07);
    CHECK(c.measure.hbar == 1e-5);
    CHECK(c.measure.k == 1e5);
    CHECK(c.measure.eta == 1.0);
    CHECK(c.init == PhasePoint{-3.0, 8.0});
    CHECK_FALSE(c.seed);
    CHECK_FALSE(c.dt);
}

TEST_CASE("config errors carry line numbers") {
    CHECK(error_of("mode = quantum\nseed = 1\nmeasure.eta = 1.5\n") == "line 3: eta out of (0,1]");
    CHECK(error_of("") == "missing required keys: mode, seed");
    CHECK(error_of("# only a comment\n") == "missing required keys: mode, seed");
    CHECK(error_of("mode = quantum\n") == "missing required keys: seed");
    CHECK(error_of("mode = regime\nsystem.mass = 2\n") == "line 2: unknown key 'system.mass'");
    CHECK(error_of("mode = regime\nmeasure.k = 1\nmeasure.k = 2\n") == "line 3: duplicate key 'measure.k'");
    CHECK(error_of("mode = regime\nmeasure.k =\n") == "line 2: missing value for 'measure.k'");
    CHECK(error_of("mode = regime\nmeasure.k = lots\n").starts_with("line 2: measure.k: expected a number"));
    CHECK(error_of("mode = regime\njust words\n") == "line 2: expected 'key = value'");
    CHECK(error_of("mode = teleport\n").starts_with("line 1:"));
}

TEST_CASE("render and parse round trip") {
    RunConfig c = parse_config(R"(
mode = lyapunov
seed = 18446744073709551615
measure.k = 12345.678901234567
noise.model = manual
noise.sigma_p = 0.1
lyapunov.perturbation = offset
lyapunov.system = quantum
sweep.k_values = 1e4, 2e4
grid.n = 4096
output.dir = somewhere
)");
    CHECK(*c.seed == 18446744073709551615ull);
    CHECK(c.sweep_k == std::vector<double>{1e4, 2e4});
    CHECK(parse_config(render_config(c)) == c);
    CHECK(render_config(c, false).find("output.dir") == std::string::npos);

    RunConfig moved = c;
    moved.output_dir = "elsewhere";
    CHECK(config_fingerprint(moved) == config_fingerprint(c));
    moved.measure.k += 1.0;
    CHECK(config_fingerprint(moved) != config_fingerprint(c));
    CHECK(config_keys().size() > 40);
}

TEST_CASE("command line overrides") {
    const RunConfig c = parse_config("mode = quantum\n", {Mode::quantum, 9, "o"});
    CHECK(*c.seed == 9);
    CHECK(c.output_dir == "o");
    const RunConfig d = parse_config("mode = quantum\nseed = 1\n", {std::nullopt, 2, std::nullopt});
    CHECK(*d.seed == 2);
    CHECK_THROWS_AS(parse_config("\nmode = quantum\nseed = 1\n", {Mode::classical, {}, {}}), ConfigError);
    const RunConfig e = parse_config("seed = 3\n", {Mode::classical, {}, {}});
    CHECK(e.mode == Mode::classical);
}

TEST_CASE("csv layout") {
    CHECK(csv::format_double(0.1) == "0.10000000000000001");
    const std::string pre = csv::preamble("trajectory", 0xabcULL, 7, "mode = quantum\nseed = 7\n");
    CHECK(pre == "# qtl trajectory v1\n# fingerprint: 0000000000000abc\n# seed: 7\n# mode = quantum\n# seed = 7\n");
    CHECK(csv::preamble("regime", 1, std::nullopt, "").find("# seed: none\n") != std::string::npos);

    const SeriesSample s{0.5, 1, 2, 3, 4, 5, 1, 6};
    CHECK(csv::trajectory_rows(std::span(&s, 1)) == "0.5,1,2,3,4,5,1,6\n");
    const csv::StrobeRow r{3, {7, 1.0, -0.25, 2.0}};
    CHECK(csv::strobe_rows(std::span(&r, 1)) == "3,7,-0.25,2\n");

    const fs::path dir = scratch("csv");
    fs::create_directories(dir);
    csv::write_atomic(dir / "a.csv", "x\n");
    csv::write_atomic(dir / "a.csv", "y\n");
    CHECK(slurp(dir / "a.csv") == "y\n");
    CHECK_FALSE(fs::exists(dir / "a.csv.tmp"));
    fs::remove_all(dir);
}

TEST_CASE("resolved config is a fixed point") {
    const RunConfig r = resolve_config(parse_config(kSmallQuantum));
    REQUIRE(r.dt);
    REQUIRE(r.grid_n);
    REQUIRE(r.init_sigma);
    const double steps = r.record.window / *r.dt;
    CHECK(steps == doctest::Approx(std::round(steps)).epsilon(1e-12));
    CHECK(resolve_config(r) == r);
    CHECK(parse_config(render_config(r)) == r);
}

TEST_CASE("runs are byte-identical across worker counts") {
    RunConfig c = parse_config(kSmallQuantum);
    c.output_dir = scratch("w1").string();
    const RunResult a = run(c, 1);
    RunConfig c8 = c;
    c8.output_dir = scratch("w8").string();
    const RunResult b = run(c8, 8);
    REQUIRE(a.files.size() == b.files.size());
    REQUIRE(a.files.size() >= 4);
    for (std::size_t i = 0; i < a.files.size(); ++i) {
        CHECK(a.files[i].filename() == b.files[i].filename());
        CHECK(slurp(a.files[i]) == slurp(b.files[i]));
    }
    const std::string traj = slurp(fs::path(c.output_dir) / "trajectory.csv");
    CHECK(traj.starts_with("# qtl trajectory v1\n"));
    CHECK(traj.find("\nt,mean_x,mean_p,var_x,var_p,cov_xp,norm,energy\n") != std::string::npos);
    CHECK(fs::exists(fs::path(c.output_dir) / "resolved_config.txt"));
    fs::remove_all(c.output_dir);
    fs::remove_all(c8.output_dir);
}

TEST_CASE("classical ensembles") {
    RunConfig c = resolve_config(parse_config(R"(
mode = strobe
seed = 8
time.T = 12
ensemble.n_traj = 4
ensemble.start_dispersion = 0.1
noise.model = manual
noise.sigma_p = 0.01
)"));
    const EnsembleResult a = run_ensemble(c, 4, 1);
    const EnsembleResult b = run_ensemble(c, 4, 4);
    CHECK(a.failures() == 0);
    REQUIRE(a.strobe.size() == b.strobe.size());
    CHECK(a.strobe.size() == 4 * 12);
    for (std::size_t i = 0; i < a.strobe.size(); ++i) {
        CHECK(a.strobe[i].run == b.strobe[i].run);
        CHECK(a.strobe[i].point.x == b.strobe[i].point.x);
    }
    CHECK(a.strobe.front().run == 0);
    CHECK(a.strobe.back().run == 3);
    CHECK(ensemble_start(c, 0) != ensemble_start(c, 1));
    CHECK(phase_distance(ensemble_start(c, 2), c.init) <= 0.1);
    CHECK_THROWS_AS(run_ensemble(c, 0, 1), ConfigError);

    std::vector<csv::StrobeRow> rows{{1, {2, 0, 0, 0}}, {0, {5, 0, 0, 0}}, {1, {1, 0, 0, 0}}, {0, {3, 0, 0, 0}}};
    rows = merge_strobe(rows);
    CHECK(rows[0].run == 0);
    CHECK(rows[0].point.period_index == 3);
    CHECK(rows[3].point.period_index == 2);
}

TEST_CASE("regime mode reports default-parameter verdicts") {
    RunConfig c = parse_config(R"(
mode = regime
regime.dF = 20
regime.unstable_dF = 20
regime.d2F_over_F = 1
regime.action = 10
)");
    c.output_dir = scratch("regime").string();
    const RunResult r = run(c, 1);
    CHECK(r.summary.find("k_min(record) = 125000") != std::string::npos);
    const std::string text = slurp(fs::path(c.output_dir) / "regime.csv");
    CHECK(text.find("\ncondition,lhs,rhs,verdict\n") != std::string::npos);
    CHECK(text.find("record,800000,1000000,violated") != std::string::npos);
    fs::remove_all(c.output_dir);
}
