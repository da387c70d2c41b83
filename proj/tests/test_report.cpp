#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "growth/report.hpp"
#include "json.hpp"

using namespace growth;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

const EquilibriumState& market() {
    static const EquilibriumState s = solve_equilibrium(Primitives{});
    return s;
}

fs::path scratch_dir() {
    const fs::path d = fs::temp_directory_path() / "growth_report_test";
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("table layout") {
    const auto cols = table_columns();
    CHECK(cols.size() == 14);
    CHECK(cols.front() == "x_e");
    CHECK(cols.back() == "welfare");
    TableRow row{"market", market(), 100.0, 100.0, 0.0};
    const auto v = table_values(row);
    REQUIRE(v.size() == cols.size());
    CHECK(v[1] == market().x[0]);
    CHECK(v[12] == market().g);
    CHECK(v[13] == 100.0);

    const fs::path path = scratch_dir() / "table.csv";
    write_table(path.string(), {row}, "0123456789abcdef");
    const auto ls = lines(slurp(path));
    REQUIRE(ls.size() >= 4);
    CHECK(ls[0].find(kTableSchema) != std::string::npos);
    CHECK(ls[1].find("0123456789abcdef") != std::string::npos);
    CHECK(ls.back().rfind("market,", 0) == 0);
    CHECK(ls.back().find(",100.00") != std::string::npos);
}

TEST_CASE("writing the same results twice gives identical bytes") {
    const fs::path d = scratch_dir();
    const std::vector<TableRow> rows{{"market", market(), 100.0, 100.0, 0.0}};
    for (const char* name : {"a", "b"}) {
        fs::create_directories(d / name);
        const std::string base = (d / name / "out").string();
        write_table(base + ".csv", rows, "h");
        write_table_raw(base + "_raw.csv", rows, "h");
        write_distribution(base + "_dist.csv", market().dist, "h");
        write_plot_script(base + ".gp", "x.csv", market().q_min, "market");
    }
    for (const char* ext : {".csv", "_raw.csv", "_dist.csv", ".gp"}) {
        const std::string a = slurp(d / "a" / (std::string("out") + ext));
        CHECK_FALSE(a.empty());
        CHECK(a == slurp(d / "b" / (std::string("out") + ext)));
    }
}

TEST_CASE("raw table keeps full precision") {
    const fs::path path = scratch_dir() / "raw.csv";
    write_table_raw(path.string(), {{"market", market(), 100.0, 100.0, 0.0}}, "h");
    const auto ls = lines(slurp(path));
    std::string header, last = ls.back();
    for (const auto& l : ls)
        if (!l.empty() && l[0] != '#') {
            header = l;
            break;
        }
    CHECK(header.find("welfare_net") != std::string::npos);
    // Parse the g column back and compare bit for bit.
    std::vector<std::string> names, values;
    for (std::istringstream h(header); h.good();) {
        std::string c;
        std::getline(h, c, ',');
        names.push_back(c);
    }
    for (std::istringstream r(last); r.good();) {
        std::string c;
        std::getline(r, c, ',');
        values.push_back(c);
    }
    REQUIRE(names.size() == values.size());
    const auto it = std::find(names.begin(), names.end(), "g");
    REQUIRE(it != names.end());
    CHECK(std::stod(values[static_cast<std::size_t>(it - names.begin())]) == market().g);
}

TEST_CASE("distribution file ends at one") {
    const fs::path path = scratch_dir() / "dist.csv";
    write_distribution(path.string(), market().dist, "h");
    const auto ls = lines(slurp(path));
    CHECK(ls[0].find(kDistributionSchema) != std::string::npos);
    const std::string& last = ls.back();
    CHECK(std::stod(last.substr(last.rfind(',') + 1)) == 1.0);
}

TEST_CASE("manifest lists file hashes") {
    const fs::path d = scratch_dir();
    {
        std::ofstream(d / "one.txt") << "abc";
    }
    write_manifest(d.string(), {"one.txt"}, "h", "solve", 7, {{"total", 0.5}});
    const auto j = nlohmann::json::parse(slurp(d / "manifest.json"));
    CHECK(j["command"] == "solve");
    CHECK(j["seed"] == 7);
    CHECK(j["files"][0]["file"] == "one.txt");
    // FNV-1a 64 of "abc".
    CHECK(j["files"][0]["fnv1a64"] == "e71fa2190541574b");
    CHECK(file_hash((d / "one.txt").string()) == "e71fa2190541574b");

    write_error_record((d / "error.json").string(), "solve", "bad", "epsilon", "h");
    const auto e = nlohmann::json::parse(slurp(d / "error.json"));
    CHECK(e["key"] == "epsilon");
}
