#pragma once

#include "qtl/system.hpp"

namespace qtl {

/// Mean and covariance of a Gaussian state under continuous position
/// measurement, with the hierarchy closed at second order. For quadratic
/// potentials the closure is exact; for the double well it is the local
/// Gaussian approximation used to calibrate the classical noise model.
struct GaussianMoments {
    double x = 0.0;
    double p = 0.0;
    double var_x = 0.0;
    double cov_xp = 0.0;
    double var_p = 0.0;
    double t = 0.0;
};

/// One Heun step of the closed equations with Wiener increment dW:
///   d<X>  = <P>/m dt + sqrt(8k) Vx dW
///   d<P>  = <F> dt   + sqrt(8k) Cxp dW
///   dVx   = 2 Cxp/m - 8k Vx^2
///   dCxp  = Vp/m + <F'> Vx - 8k Vx Cxp
///   dVp   = 2 <F'> Cxp + 2 hbar^2 k - 8k Cxp^2
/// with <F>, <F'> the Gaussian averages of the cubic force.
GaussianMoments gaussian_closure_step(const GaussianMoments& g, double dt, double dW, const SystemParams& p,
                                      const MeasureParams& mp);

/// Steady-state position variance of a measured free particle,
/// sqrt(hbar / (8 m k)); also the default initial-width scale.
double free_steady_var_x(const SystemParams& p, const MeasureParams& mp);

/// Time-averaged Vx along a noise-free closure run of duration T started
/// from (x0, p0) at the free steady-state covariance. The first drive
/// period is discarded as transient.
double calibrate_mean_var_x(const SystemParams& p, const MeasureParams& mp, double x0, double p0, double T,
                            double dt);

}  // namespace qtl
