#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "qtl/config.hpp"
#include "qtl/errors.hpp"
#include "qtl/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continuous-measurement double-well simulator"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string out_dir;

    for (const char* name : {"quantum", "classical", "lyapunov", "strobe", "regime", "sweep"}) {
        auto* sub = app.add_subcommand(name, std::string("run mode ") + name);
        sub->add_option("--config", config_path, "config file")->required();
        sub->add_option("--seed", seed, "master seed (overrides the config)");
        sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    const CLI::App* sub = app.get_subcommands().front();
    const auto mode = qtl::parse_mode(sub->get_name());

    try {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) throw qtl::ConfigError("cannot read " + config_path);
        std::ostringstream text;
        text << in.rdbuf();

        qtl::ConfigOverrides overrides;
        overrides.mode = mode;
        if (sub->count("--seed")) overrides.seed = seed;
        if (sub->count("--out")) overrides.output_dir = out_dir;
        const qtl::RunConfig config = qtl::parse_config(text.str(), overrides);

        const qtl::RunResult result = qtl::run(config, workers);
        std::cout << result.summary << '\n';
        return 0;
    } catch (const qtl::ConfigError& e) {
        std::cerr << "qtl: config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const qtl::NumericalError& e) {
        std::cerr << "qtl: numerical failure at t = " << e.time() << ": " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "qtl: " << e.what() << '\n';
        return 1;
    }
}
