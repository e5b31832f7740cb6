#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "crtlab/error.hpp"
#include "crtlab/report.hpp"

using namespace crt;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Report sample_report() {
    Report r;
    r.add({"gap-distortion", "2n=256;k=3", "median_gap", 0.5, 0.4, 0.6, 10, 7});
    r.add({"gap-distortion", "2n=1024;k=3", "median_gap", 0.25, 0.2, 0.3, 10, 7});
    return r;
}

}  // namespace

TEST_CASE("report rows are validated") {
    Report r;
    CHECK_THROWS_AS(r.add({"x", "a=1", "s", std::numeric_limits<double>::quiet_NaN(), 0, 0, 1, 1}), DataError);
    CHECK_THROWS_AS(r.add({"x", "a=1", "s", 1.0, 2.0, 0.5, 1, 1}), DataError);
    CHECK_THROWS_AS(r.add({"x", "a=1,b=2", "s", 1.0, 1.0, 1.0, 1, 1}), InvalidParameter);
    r.add({"x", "a=1", "s", 1.0, 1.0, 1.0, 1, 1});
    CHECK(r.rows.size() == 1);
}

TEST_CASE("CSV round trip and JSON mirror") {
    const Report r = sample_report();
    std::ostringstream csv;
    write_report_csv(r, csv);
    std::istringstream in(csv.str());
    const Report back = read_report_csv(in);
    REQUIRE(back.rows.size() == 2);
    CHECK(back.rows[1].params == "2n=1024;k=3");
    CHECK(back.rows[1].value == 0.25);
    CHECK(back.rows[0].seed == 7);

    std::ostringstream js;
    write_report_json(r, js);
    const auto parsed = nlohmann::json::parse(js.str());
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0]["statistic"] == "median_gap");
    CHECK(parsed[1]["hi"].get<double>() == 0.3);

    CHECK(param_value("2n=1024;k=3", "k") == "3");
    CHECK(param_value("2n=1024;k=3", "eta").empty());
    CHECK(r.find("median_gap", "2n=1024")->value == 0.25);
    CHECK(r.find("mean_gap") == nullptr);
}

TEST_CASE("plot data") {
    const auto dir = std::filesystem::temp_directory_path() / "crtlab-report-test";
    std::filesystem::remove_all(dir);
    save_report(sample_report(), dir, "gap");
    CHECK(std::filesystem::exists(dir / "gap.json"));
    emit_plotdata(dir / "gap.csv", dir / "plot.csv");
    CHECK(slurp(dir / "plot.csv") == "series,x,y,lo,hi\nmedian_gap,256,0.5,0.4,0.6\nmedian_gap,1024,0.25,0.2,0.3\n");

    save_report(Report{}, dir, "empty");
    CHECK(slurp(dir / "empty.csv") == std::string(kReportHeader) + "\n");
    emit_plotdata(dir / "empty.csv", dir / "empty-plot.csv");
    CHECK(slurp(dir / "empty-plot.csv") == std::string(kPlotHeader) + "\n");

    CHECK_THROWS_AS(emit_plotdata(dir / "missing.csv", dir / "x.csv"), IoError);
    std::filesystem::remove_all(dir);
}
