#include "crtlab/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "crtlab/error.hpp"

namespace crt {
namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

void check_field(const std::string& s) {
    if (s.find_first_of(",\n\"") != std::string::npos)
        throw InvalidParameter("report field contains a separator: " + s);
}

}  // namespace

void Report::add(ReportRow row) {
    if (!std::isfinite(row.value)) throw DataError("report value for " + row.statistic + " is not finite");
    if (!(row.lo <= row.hi)) throw DataError("report interval for " + row.statistic + " is not ordered");
    check_field(row.experiment);
    check_field(row.params);
    check_field(row.statistic);
    rows.push_back(std::move(row));
}

const ReportRow* Report::find(const std::string& statistic, const std::string& params_fragment) const {
    for (const auto& r : rows)
        if (r.statistic == statistic && r.params.find(params_fragment) != std::string::npos) return &r;
    return nullptr;
}

void write_report_csv(const Report& report, std::ostream& out) {
    out << kReportHeader << '\n' << std::setprecision(12);
    for (const auto& r : report.rows)
        out << r.experiment << ',' << r.params << ',' << r.statistic << ',' << r.value << ',' << r.lo << ',' << r.hi
            << ',' << r.replicas << ',' << r.seed << '\n';
    if (!out) throw IoError("failed to write report csv");
}

void write_report_json(const Report& report, std::ostream& out) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : report.rows) {
        nlohmann::ordered_json j;
        j["experiment"] = r.experiment;
        j["params"] = r.params;
        j["statistic"] = r.statistic;
        j["value"] = r.value;
        j["lo"] = r.lo;
        j["hi"] = r.hi;
        j["replicas"] = r.replicas;
        j["seed"] = r.seed;
        rows.push_back(std::move(j));
    }
    out << rows.dump(2) << '\n';
    if (!out) throw IoError("failed to write report json");
}

Report read_report_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kReportHeader) throw DataError("report csv: unexpected header");
    Report report;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != 8) throw DataError("report csv: malformed row '" + line + "'");
        try {
            ReportRow r;
            r.experiment = cells[0];
            r.params = cells[1];
            r.statistic = cells[2];
            r.value = std::stod(cells[3]);
            r.lo = std::stod(cells[4]);
            r.hi = std::stod(cells[5]);
            r.replicas = std::stoull(cells[6]);
            r.seed = std::stoull(cells[7]);
            report.rows.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw DataError("report csv: bad number in '" + line + "'");
        }
    }
    return report;
}

void save_report(const Report& report, const std::filesystem::path& dir, const std::string& name) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    std::ofstream csv(dir / (name + ".csv"));
    if (!csv) throw IoError("cannot open " + (dir / (name + ".csv")).string());
    write_report_csv(report, csv);
    std::ofstream json(dir / (name + ".json"));
    if (!json) throw IoError("cannot open " + (dir / (name + ".json")).string());
    write_report_json(report, json);
}

std::string param_value(const std::string& params, const std::string& key) {
    for (const auto& kv : split(params, ';')) {
        const auto eq = kv.find('=');
        if (eq != std::string::npos && kv.substr(0, eq) == key) return kv.substr(eq + 1);
    }
    return {};
}

void emit_plotdata(const std::filesystem::path& report_csv, const std::filesystem::path& out_csv) {
    std::ifstream in(report_csv);
    if (!in) throw IoError("report not found: " + report_csv.string());
    const Report report = read_report_csv(in);
    if (out_csv.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(out_csv.parent_path(), ec);
    }
    std::ofstream out(out_csv);
    if (!out) throw IoError("cannot open " + out_csv.string());
    out << kPlotHeader << '\n' << std::setprecision(12);
    for (const auto& r : report.rows) {
        const auto first = split(r.params, ';');
        std::string x;
        if (!first.empty()) {
            const auto eq = first.front().find('=');
            x = eq == std::string::npos ? first.front() : first.front().substr(eq + 1);
        }
        out << r.statistic << ',' << x << ',' << r.value << ',' << r.lo << ',' << r.hi << '\n';
    }
    if (!out) throw IoError("failed to write " + out_csv.string());
}

}  // namespace crt
