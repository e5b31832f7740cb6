#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace crt {

struct ReportRow {
    std::string experiment;
    /// "key=value;key=value", keys in a fixed order per experiment.
    std::string params;
    std::string statistic;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t replicas = 0;
    std::uint64_t seed = 0;
};

struct Report {
    std::vector<ReportRow> rows;

    void add(ReportRow row);
    /// First row with the given statistic and params substring, or nullptr.
    const ReportRow* find(const std::string& statistic, const std::string& params_fragment = {}) const;
};

inline constexpr const char* kReportHeader = "experiment,params,statistic,value,lo,hi,replicas,seed";
inline constexpr const char* kPlotHeader = "series,x,y,lo,hi";

void write_report_csv(const Report& report, std::ostream& out);
void write_report_json(const Report& report, std::ostream& out);
Report read_report_csv(std::istream& in);

/// Writes <dir>/<name>.csv and <dir>/<name>.json, creating dir if needed.
void save_report(const Report& report, const std::filesystem::path& dir, const std::string& name);

/// Plot table from a report CSV: one row per report row with series the
/// statistic name, x the first parameter value, y the value and the
/// interval bounds. Missing input raises IoError.
void emit_plotdata(const std::filesystem::path& report_csv, const std::filesystem::path& out_csv);

/// Value of `key` in a params string, or empty.
std::string param_value(const std::string& params, const std::string& key);

}  // namespace crt
