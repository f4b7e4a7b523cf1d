#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "qtl/chaos_analysis.hpp"
#include "qtl/trajectory_record.hpp"

namespace qtl::csv {

/// Schema version stamped into every file's first line.
inline constexpr int kSchemaVersion = 1;

inline constexpr std::string_view kTrajectoryHeader = "t,mean_x,mean_p,var_x,var_p,cov_xp,norm,energy";
inline constexpr std::string_view kRecordRawHeader = "t,y_raw";
inline constexpr std::string_view kRecordAvgHeader = "t_center,y_avg";
inline constexpr std::string_view kStrobeHeader = "run,period_index,x,p";
inline constexpr std::string_view kLyapunovHeader = "tau,mean_ln_delta,stderr";
inline constexpr std::string_view kSweepHeader = "k,lambda,stderr,pooled_lambda,washed_out,localization,noise,record";
inline constexpr std::string_view kRegimeHeader = "condition,lhs,rhs,verdict";

/// 17 significant digits.
std::string format_double(double v);

/// "# qtl <kind> v1", "# fingerprint: <hex>", "# seed: <n>" and the
/// resolved config, each line prefixed with "# ".
std::string preamble(std::string_view kind, std::uint64_t fingerprint, std::optional<std::uint64_t> seed,
                     std::string_view resolved_config);

std::string trajectory_rows(std::span<const SeriesSample> series);
std::string record_rows(std::span<const RecordSample> record);

struct StrobeRow {
    std::uint64_t run = 0;
    StrobePoint point;
};
std::string strobe_rows(std::span<const StrobeRow> rows);
std::string lyapunov_rows(std::span<const CurvePoint> curve);

/// Writes to `<path>.tmp` then renames over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace qtl::csv
