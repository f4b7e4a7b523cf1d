#include "qtl/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace qtl::csv {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string preamble(std::string_view kind, std::uint64_t fingerprint, std::optional<std::uint64_t> seed,
                     std::string_view resolved_config) {
    char hex[20];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fingerprint));
    std::string out = "# qtl " + std::string(kind) + " v" + std::to_string(kSchemaVersion) + "\n";
    out += "# fingerprint: " + std::string(hex) + "\n";
    out += "# seed: " + (seed ? std::to_string(*seed) : std::string("none")) + "\n";
    std::size_t pos = 0;
    while (pos < resolved_config.size()) {
        auto nl = resolved_config.find('\n', pos);
        if (nl == std::string_view::npos) nl = resolved_config.size();
        out += "# ";
        out.append(resolved_config.substr(pos, nl - pos));
        out += '\n';
        pos = nl + 1;
    }
    return out;
}

std::string trajectory_rows(std::span<const SeriesSample> series) {
    std::string out;
    out.reserve(series.size() * 200);
    for (const SeriesSample& s : series) {
        for (double v : {s.t, s.mean_x, s.mean_p, s.var_x, s.var_p, s.cov_xp, s.norm}) {
            out += format_double(v);
            out += ',';
        }
        out += format_double(s.energy);
        out += '\n';
    }
    return out;
}

std::string record_rows(std::span<const RecordSample> record) {
    std::string out;
    out.reserve(record.size() * 50);
    for (const RecordSample& r : record) out += format_double(r.t) + "," + format_double(r.y) + "\n";
    return out;
}

std::string strobe_rows(std::span<const StrobeRow> rows) {
    std::string out;
    for (const StrobeRow& r : rows) {
        out += std::to_string(r.run) + "," + std::to_string(r.point.period_index) + "," + format_double(r.point.x) +
               "," + format_double(r.point.p) + "\n";
    }
    return out;
}

std::string lyapunov_rows(std::span<const CurvePoint> curve) {
    std::string out;
    for (const CurvePoint& c : curve) {
        out += format_double(c.tau) + "," + format_double(c.mean_ln_delta) + "," + format_double(c.std_error) + "\n";
    }
    return out;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot rename " + tmp.string() + ": " + ec.message());
    }
}

}  // namespace qtl::csv
