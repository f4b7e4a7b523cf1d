#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qtl/chaos_analysis.hpp"

namespace acceptance {

struct Outcome {
    bool pass = false;
    std::string detail;
};

/// Mean of one estimate repeated over several seeds.
struct SeedSpread {
    std::vector<double> lambdas;
    double mean = 0.0;
    double std_error = 0.0;  ///< of the mean over seeds
};

/// Shared between criteria: 2 compares against 1, and 4 against 2.
struct Context {
    int workers = 1;
    std::optional<SeedSpread> noiseless;
    std::optional<SeedSpread> noisy;
};

Outcome noiseless_classical_lyapunov(Context& ctx);
Outcome noisy_classical_lyapunov(Context& ctx);
Outcome quantum_localization(Context& ctx);
Outcome quantum_lyapunov_relaxed(Context& ctx);
Outcome moment_statistics(Context& ctx);
Outcome gaussian_closure_equivalence(Context& ctx);
Outcome deterministic_convergence(Context& ctx);
Outcome regime_arithmetic(Context& ctx);
Outcome synthetic_estimator(Context& ctx);
Outcome determinism(Context& ctx);

}  // namespace acceptance
