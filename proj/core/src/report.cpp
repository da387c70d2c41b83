#include "growth/report.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "json.hpp"

namespace growth {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    return f;
}

std::string num(double v, const char* spec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

void header(std::ofstream& f, const char* schema, const std::string& hash) {
    f << "# schema: " << schema << "\n# config_hash: " << hash << "\n";
}

}  // namespace

std::vector<std::string> table_columns() {
    return {"x_e",    "x_al",   "x_ah",   "x_b",    "phi_al", "phi_ah",      "phi_b",
            "qmin_al", "qmin_ah", "qmin_b", "rd_labor_ratio", "tau", "g", "welfare"};
}

std::vector<double> table_values(const TableRow& r) {
    const auto& s = r.state;
    return {s.x_e,      s.x[0],    s.x[1],    s.x[2],    s.dist.phi[0], s.dist.phi[1], s.dist.phi[2],
            s.q_min[0], s.q_min[1], s.q_min[2], s.rd_labor_ratio, s.tau, s.g, r.welfare_index};
}

void write_table(const std::string& path, const std::vector<TableRow>& rows, const std::string& hash) {
    auto f = open_out(path);
    header(f, kTableSchema, hash);
    f << "# units: percent, welfare as an index (no policy = 100)\nlabel";
    for (const auto& c : table_columns()) f << ',' << c;
    f << '\n';
    for (const auto& r : rows) {
        f << r.label;
        const auto v = table_values(r);
        for (std::size_t i = 0; i < v.size(); ++i)
            f << ',' << num(i + 1 == v.size() ? v[i] : 100.0 * v[i], "%.2f");
        f << '\n';
    }
}

void write_table_raw(const std::string& path, const std::vector<TableRow>& rows,
                     const std::string& hash) {
    auto f = open_out(path);
    header(f, kTableSchema, hash);
    f << "label";
    for (const auto& c : table_columns()) f << ',' << c;
    f << ",welfare_net,s_inc,wage,q_bar,iterations,residual\n";
    for (const auto& r : rows) {
        f << r.label;
        for (double v : table_values(r)) f << ',' << num(v, "%.17g");
        f << ',' << num(r.welfare_index_net, "%.17g") << ',' << num(r.s_inc, "%.17g") << ','
          << num(r.state.vec.w, "%.17g") << ',' << num(r.state.dist.q_bar, "%.17g") << ','
          << r.state.iterations << ',' << num(r.state.residual, "%.6g") << '\n';
    }
}

void write_distribution(const std::string& path, const DistributionSet& d, const std::string& hash) {
    auto f = open_out(path);
    header(f, kDistributionSchema, hash);
    f << "# density_*: active mass per unit q_hat; cdf_*: conditional on the type being active\n";
    f << "q_hat,density_al,density_ah,density_b,cdf_al,cdf_ah,cdf_b,cdf_all\n";
    for (std::size_t i = 1; i < d.grid.size(); ++i) {
        const double width = d.grid[i] - d.grid[i - 1];
        f << num(d.grid[i], "%.10g");
        for (std::size_t k = 0; k < 3; ++k) f << ',' << num(d.type_mass[k][i] / width, "%.10g");
        for (std::size_t k = 0; k < 3; ++k)
            f << ',' << num(d.phi[k] > 0 ? d.F_type[k][i] / d.phi[k] : 0.0, "%.10g");
        f << ',' << num(d.F[i], "%.10g") << '\n';
    }
}

void write_plot_script(const std::string& path, const std::string& csv_name, const PerType& q_min,
                       const std::string& title) {
    auto f = open_out(path);
    const char* names[3] = {"applied low", "applied high", "basic"};
    f << "# gnuplot " << path.substr(path.find_last_of('/') + 1) << "\n"
      << "set datafile separator ','\n"
      << "set terminal pngcairo size 1500,450\n"
      << "set output '" << csv_name.substr(0, csv_name.rfind('.')) << ".png'\n"
      << "set multiplot layout 1,3 title '" << title << "'\n"
      << "set xlabel 'relative productivity'\nset xrange [0:6]\n";
    for (std::size_t k = 0; k < 3; ++k) {
        f << "set title '" << names[k] << "'\n"
          << "set style fill transparent solid 0.3 noborder\n"
          << "plot '" << csv_name << "' skip 4 using 1:($1<=" << num(q_min[k], "%.10g") << "?$"
          << k + 2 << ":1/0) with filledcurves y1=0 lc rgb 'gray' title 'below threshold', \\\n"
          << "     '' skip 4 using 1:" << k + 2 << " with lines lw 2 title 'density'\n";
    }
    f << "unset multiplot\n";
}

void write_planner_trace(const std::string& path, const std::vector<TracePoint>& trace,
                         const std::string& hash) {
    auto f = open_out(path);
    header(f, kTraceSchema, hash);
    f << "start,evaluation,x_al,x_ah,x_b,qmin_al,qmin_ah,qmin_b,welfare\n";
    for (const auto& t : trace) {
        f << t.start << ',' << t.evaluation;
        for (double c : t.controls) f << ',' << num(c, "%.10g");
        f << ',' << (std::isfinite(t.welfare_index) ? num(t.welfare_index, "%.10g") : "nan") << '\n';
    }
}

void write_oracle(const std::string& path, const PanelStats& s, const OracleReport& r,
                  const DistributionSet& d, const std::string& hash) {
    auto f = open_out(path);
    header(f, kOracleSchema, hash);
    f << "quantity,type,analytic,empirical,delta,pass\n";
    const char* tn[3] = {"al", "ah", "b"};
    for (std::size_t k = 0; k < 3; ++k)
        f << "share," << tn[k] << ',' << num(d.phi[k], "%.8g") << ',' << num(s.phi_hat[k], "%.8g") << ','
          << num(r.share_delta[k], "%.8g") << ',' << (r.shares_ok ? 1 : 0) << '\n';
    for (std::size_t k = 0; k < 3; ++k)
        f << "ks," << tn[k] << ",0," << num(r.ks[k], "%.8g") << ',' << num(r.ks[k], "%.8g") << ','
          << (r.ks_ok ? 1 : 0) << '\n';
    f << "growth,all," << num(d.g, "%.8g") << ',' << num(s.growth_emp, "%.8g") << ','
      << num(r.growth_rel_delta, "%.8g") << ',' << (r.growth_ok ? 1 : 0) << '\n';
    f << "q_bar,all," << num(d.q_bar, "%.8g") << ',' << num(s.q_bar_hat_emp, "%.8g") << ','
      << num(s.q_bar_hat_emp - d.q_bar, "%.8g") << ",1\n";
    f << "inactive_share,all," << num(d.phi_np, "%.8g") << ',' << num(s.phi_np_hat, "%.8g") << ','
      << num(s.phi_np_hat - d.phi_np, "%.8g") << ",1\n";
}

std::string file_hash(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::istreambuf_iterator<char> it(f), end; it != end; ++it) {
        h ^= static_cast<unsigned char>(*it);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_manifest(const std::string& dir, const std::vector<std::string>& files,
                    const std::string& hash, const std::string& command, std::uint64_t seed,
                    const std::vector<std::pair<std::string, double>>& timings) {
    nlohmann::ordered_json j;
    j["tool"] = "growth";
    j["version"] = GROWTH_VERSION;
    j["command"] = command;
    j["config_hash"] = hash;
    j["seed"] = seed;
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const auto& name : files) list.push_back({{"file", name}, {"fnv1a64", file_hash(dir + "/" + name)}});
    j["files"] = list;
    nlohmann::ordered_json t = nlohmann::ordered_json::object();
    for (const auto& [name, secs] : timings) t[name] = secs;
    j["timings_s"] = t;
    auto f = open_out(dir + "/manifest.json");
    f << j.dump(2) << '\n';
}

void write_error_record(const std::string& path, const std::string& command,
                        const std::string& message, const std::string& key, const std::string& hash) {
    nlohmann::ordered_json j;
    j["status"] = "error";
    j["command"] = command;
    j["message"] = message;
    if (!key.empty()) j["key"] = key;
    if (!hash.empty()) j["config_hash"] = hash;
    auto f = open_out(path);
    f << j.dump(2) << '\n';
}

}  // namespace growth
