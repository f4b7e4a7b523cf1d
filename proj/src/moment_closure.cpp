#include "qtl/moment_closure.hpp"

#include <cmath>
#include <stdexcept>

namespace qtl {
namespace {

struct Rates {
    double x, p, vx, cxp, vp;
};

Rates drift(const GaussianMoments& g, const SystemParams& p, const MeasureParams& mp) {
    // Gaussian averages of F = -4B x^3 + 2A x - Lambda cos(omega t) and F'.
    const double mean_f = force(g.x, g.t, p) - 12.0 * p.B * g.x * g.var_x;
    const double mean_df = force_gradient(g.x, p) - 12.0 * p.B * g.var_x;
    const double c = 8.0 * mp.k;
    return {g.p / p.m,
            mean_f,
            2.0 * g.cov_xp / p.m - c * g.var_x * g.var_x,
            g.var_p / p.m + mean_df * g.var_x - c * g.var_x * g.cov_xp,
            2.0 * mean_df * g.cov_xp + 2.0 * mp.hbar * mp.hbar * mp.k - c * g.cov_xp * g.cov_xp};
}

GaussianMoments advance(const GaussianMoments& g, const Rates& r, double dt) {
    GaussianMoments out = g;
    out.x += r.x * dt;
    out.p += r.p * dt;
    out.var_x += r.vx * dt;
    out.cov_xp += r.cxp * dt;
    out.var_p += r.vp * dt;
    out.t += dt;
    return out;
}

}  // namespace

GaussianMoments gaussian_closure_step(const GaussianMoments& g, double dt, double dW, const SystemParams& p,
                                      const MeasureParams& mp) {
    const Rates r0 = drift(g, p, mp);
    const GaussianMoments trial = advance(g, r0, dt);
    const Rates r1 = drift(trial, p, mp);
    const Rates avg{0.5 * (r0.x + r1.x), 0.5 * (r0.p + r1.p), 0.5 * (r0.vx + r1.vx), 0.5 * (r0.cxp + r1.cxp),
                    0.5 * (r0.vp + r1.vp)};
    GaussianMoments out = advance(g, avg, dt);
    // The innovation enters through the pre-step covariance (Ito).
    const double gain = std::sqrt(8.0 * mp.k) * dW;
    out.x += gain * g.var_x;
    out.p += gain * g.cov_xp;
    return out;
}

double free_steady_var_x(const SystemParams& p, const MeasureParams& mp) {
    if (!(mp.k > 0.0)) throw std::invalid_argument("free_steady_var_x: needs k > 0");
    return std::sqrt(mp.hbar / (8.0 * p.m * mp.k));
}

double calibrate_mean_var_x(const SystemParams& p, const MeasureParams& mp, double x0, double p0, double T,
                            double dt) {
    if (!(T > 0.0) || !(dt > 0.0)) throw std::invalid_argument("calibrate_mean_var_x: T and dt must be > 0");
    GaussianMoments g;
    g.x = x0;
    g.p = p0;
    g.var_x = free_steady_var_x(p, mp);
    g.cov_xp = 0.5 * mp.hbar;
    g.var_p = 8.0 * p.m * mp.k * g.var_x * g.cov_xp;
    const double skip = p.Lambda != 0.0 ? p.drive_period() : 0.0;
    double sum = 0.0;
    std::size_t count = 0;
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    for (std::size_t i = 0; i < steps; ++i) {
        g = gaussian_closure_step(g, dt, 0.0, p, mp);
        if (!std::isfinite(g.var_x)) throw std::runtime_error("calibrate_mean_var_x: closure diverged");
        if (g.t >= skip) {
            sum += g.var_x;
            ++count;
        }
    }
    if (count == 0) throw std::invalid_argument("calibrate_mean_var_x: T shorter than the transient");
    return sum / static_cast<double>(count);
}

}  // namespace qtl
