#pragma once

#include <span>
#include <string_view>

#include "qtl/system.hpp"
#include "qtl/trajectory_record.hpp"

namespace qtl {

enum class Verdict { satisfied, marginal, violated };
std::string_view to_string(Verdict v) noexcept;

/// Typical values along a trajectory that enter the regime inequalities.
struct TrajectoryStats {
    double dF = 20.0;          ///< typical |dF/dx| along the trajectory
    double unstable_dF = 20.0; ///< typical dF/dx > 0 at the unstable points
    double d2F_over_F = 1.0;   ///< typical |F''/F| at the unstable points
    double action = 10.0;      ///< typical action S (system units)

    bool operator==(const TrajectoryStats&) const = default;
};

/// Averaging window and position tolerance of the band-limited record.
struct RecordSpec {
    double window = 0.01;
    double tolerance = 0.01;

    bool operator==(const RecordSpec&) const = default;
};

/// The three classical-regime conditions:
///   localization   8 eta k  >>  |F''/F| sqrt(F'/2m)
///   noise          2|F'|/(eta s)  <<  hbar k  <<  |F'| s / 4,   s = S/hbar
///   record         8 eta k  >   1 / (dt_rec dx_rec^2)
/// ">>"/"<<" are satisfied at a ratio >= 10, marginal in [1, 10).
struct RegimeReport {
    double loc_lhs = 0.0;
    double loc_rhs = 0.0;
    double noise_lo = 0.0;
    double noise_mid = 0.0;
    double noise_hi = 0.0;
    double record_lhs = 0.0;
    double record_rhs = 0.0;
    double k_min_record = 0.0;  ///< smallest k meeting the record condition
    double s = 0.0;
    Verdict localization = Verdict::violated;
    Verdict noise = Verdict::violated;
    Verdict record = Verdict::violated;

    bool all_satisfied() const noexcept {
        return localization == Verdict::satisfied && noise == Verdict::satisfied && record == Verdict::satisfied;
    }
};

/// Throws std::invalid_argument for nonpositive action, window, tolerance or
/// negative derivative magnitudes.
RegimeReport regime_check(const SystemParams& p, const MeasureParams& mp, const TrajectoryStats& stats,
                          const RecordSpec& record);

/// Medians of |F'|, and of F' and |F''/F| over the unstable samples (F' > 0),
/// plus the mean |closed-loop integral of p dx| per drive period. `series`
/// should be a densely sampled classical run covering several periods.
TrajectoryStats estimate_trajectory_stats(std::span<const SeriesSample> series, const SystemParams& p);

}  // namespace qtl
