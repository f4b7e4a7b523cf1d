#pragma once

namespace qtl {

/// Driven double well H = P^2/2m + B X^4 - A X^2 + Lambda X cos(omega t).
/// Defaults are the chaotic operating point used throughout the project.
struct SystemParams {
    double m = 1.0;
    double B = 0.5;
    double A = 10.0;
    double Lambda = 10.0;
    double omega = 6.07;

    bool operator==(const SystemParams&) const = default;

    void validate() const;  // throws std::invalid_argument
    double drive_period() const;
};

/// Continuous position measurement: strength k, efficiency eta.
/// State evolution always uses the eta = 1 pure-state unraveling; eta only
/// scales the record noise and enters the regime inequalities.
struct MeasureParams {
    double hbar = 1e-5;
    double k = 1e5;
    double eta = 1.0;

    bool operator==(const MeasureParams&) const = default;

    void validate() const;
};

double potential(double x, double t, const SystemParams& p) noexcept;
double force(double x, double t, const SystemParams& p) noexcept;
/// dF/dx, independent of t.
double force_gradient(double x, const SystemParams& p) noexcept;
/// d^2F/dx^2.
double force_curvature(double x, const SystemParams& p) noexcept;

}  // namespace qtl
