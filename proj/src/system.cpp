#include "qtl/system.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qtl {

void SystemParams::validate() const {
    if (!(m > 0.0)) throw std::invalid_argument("system.m must be > 0");
    if (!(B >= 0.0)) throw std::invalid_argument("system.B must be >= 0");
    if (!std::isfinite(A) || !std::isfinite(Lambda)) throw std::invalid_argument("system.A and system.Lambda must be finite");
    if (Lambda != 0.0 && !(omega > 0.0)) throw std::invalid_argument("system.omega must be > 0 when Lambda != 0");
}

double SystemParams::drive_period() const {
    return 2.0 * std::numbers::pi / omega;
}

void MeasureParams::validate() const {
    if (!(hbar > 0.0)) throw std::invalid_argument("measure.hbar must be > 0");
    if (!(k >= 0.0) || !std::isfinite(k)) throw std::invalid_argument("measure.k must be >= 0");
    if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("eta out of (0,1]");
}

double potential(double x, double t, const SystemParams& p) noexcept {
    const double x2 = x * x;
    return p.B * x2 * x2 - p.A * x2 + p.Lambda * x * std::cos(p.omega * t);
}

double force(double x, double t, const SystemParams& p) noexcept {
    return -4.0 * p.B * x * x * x + 2.0 * p.A * x - p.Lambda * std::cos(p.omega * t);
}

double force_gradient(double x, const SystemParams& p) noexcept {
    return -12.0 * p.B * x * x + 2.0 * p.A;
}

double force_curvature(double x, const SystemParams& p) noexcept {
    return -24.0 * p.B * x;
}

}  // namespace qtl
