#pragma once

#include <cstdint>
#include <vector>

namespace qtl {

/// One sampled instant. Classical runs fill mean_x/mean_p with (x, p),
/// leave the variances at zero and set norm = 1.
struct SeriesSample {
    double t = 0.0;
    double mean_x = 0.0;
    double mean_p = 0.0;
    double var_x = 0.0;
    double var_p = 0.0;
    double cov_xp = 0.0;
    double norm = 0.0;
    double energy = 0.0;
};

struct RecordSample {
    double t = 0.0;
    double y = 0.0;
};

struct TrajectoryRecord {
    std::uint64_t fingerprint = 0;
    std::uint64_t seed = 0;
    std::vector<SeriesSample> series;
    std::vector<RecordSample> raw_record;
    std::vector<RecordSample> band_limited;
};

/// Phase-space point (x, p) or (<X>, <P>).
struct PhasePoint {
    double x = 0.0;
    double p = 0.0;

    bool operator==(const PhasePoint&) const = default;
};

}  // namespace qtl
