// Prints one PASS/FAIL line per acceptance criterion; exits 1 if any fails.
#include <chrono>
#include <cstdio>
#include <exception>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "criteria.hpp"

using namespace acceptance;

namespace {

struct Entry {
    int id;
    const char* name;
    bool slow;
    Outcome (*run)(Context&);
};

const Entry kCriteria[] = {
    {1, "noiseless classical Lyapunov", false, noiseless_classical_lyapunov},
    {2, "noisy classical Lyapunov", false, noisy_classical_lyapunov},
    {3, "quantum localization at hbar=1e-5, k=1e5", true, quantum_localization},
    {4, "quantum Lyapunov at hbar=1e-2, k=1e3", true, quantum_lyapunov_relaxed},
    {5, "moment-equation statistics", false, moment_statistics},
    {6, "Gaussian-closure equivalence", false, gaussian_closure_equivalence},
    {7, "deterministic convergence", false, deterministic_convergence},
    {8, "regime arithmetic", false, regime_arithmetic},
    {9, "synthetic estimator", false, synthetic_estimator},
    {10, "determinism across workers", false, determinism},
};

std::set<int> parse_list(const std::string& s) {
    std::set<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.insert(std::stoi(item));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    bool fast = false;
    std::string only;
    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    app.add_flag("--fast", fast, "skip the long quantum criteria (3, 4)");
    app.add_option("--only", only, "comma-separated criterion numbers");
    app.add_option("--workers", workers, "threads for ensemble work");
    CLI11_PARSE(app, argc, argv);

    std::set<int> selected;
    try {
        if (!only.empty()) selected = parse_list(only);
    } catch (const std::exception&) {
        std::fprintf(stderr, "bad --only list '%s'\n", only.c_str());
        return 2;
    }

    Context ctx;
    ctx.workers = workers;
    int failed = 0;
    for (const Entry& e : kCriteria) {
        if (!selected.empty() && !selected.count(e.id)) continue;
        if (fast && e.slow && selected.empty()) {
            std::printf("criterion %2d SKIP  %s (--fast)\n", e.id, e.name);
            continue;
        }
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = e.run(ctx);
        } catch (const std::exception& ex) {
            o = {false, std::string("threw: ") + ex.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failed;
        std::printf("criterion %2d %s  %s: %s [%.1fs]\n", e.id, o.pass ? "PASS" : "FAIL", e.name, o.detail.c_str(),
                    secs);
        std::fflush(stdout);
    }
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
