#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "growth/config.hpp"
#include "growth/report.hpp"

namespace fs = std::filesystem;
using namespace growth;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kNoConvergence = 3, kInfeasible = 4 };

struct Run {
    RunConfig cfg;
    std::string out;
    std::string hash;
    std::string command;
    std::vector<std::string> files;
    std::vector<std::pair<std::string, double>> timings;

    std::string path(const std::string& name) {
        files.push_back(name);
        return out + "/" + name;
    }

    template <class F>
    auto timed(const std::string& label, F&& f) {
        const auto t0 = std::chrono::steady_clock::now();
        auto result = f();
        timings.emplace_back(label, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        return result;
    }
};

void print_rows(const std::vector<TableRow>& rows) {
    std::printf("%-18s", "");
    for (const auto& c : table_columns()) std::printf(" %8s", c.c_str());
    std::printf("\n");
    for (const auto& r : rows) {
        std::printf("%-18s", r.label.c_str());
        const auto v = table_values(r);
        for (std::size_t i = 0; i < v.size(); ++i)
            std::printf(" %8.2f", i + 1 == v.size() ? v[i] : 100.0 * v[i]);
        std::printf("\n");
    }
}

void emit_table(Run& run, const std::string& stem, const std::vector<TableRow>& rows) {
    write_table(run.path(stem + ".csv"), rows, run.hash);
    write_table_raw(run.path(stem + "_raw.csv"), rows, run.hash);
    print_rows(rows);
}

void emit_distribution(Run& run, const std::string& stem, const EquilibriumState& s,
                       const std::string& title) {
    write_distribution(run.path(stem + ".csv"), s.dist, run.hash);
    write_plot_script(run.path(stem + ".gp"), stem + ".csv", s.q_min, title);
}

TableRow row_of(std::string label, const EquilibriumState& s) {
    return {std::move(label), s, 100.0, 100.0, 0.0};
}

TableRow row_of(std::string label, const PolicyOutcome& o) {
    return {std::move(label), o.state, o.welfare_index, o.welfare_index_net, o.s_inc};
}

EquilibriumState baseline(Run& run, const Primitives& p, const std::string& label = "baseline") {
    return run.timed(label, [&] { return solve_equilibrium(p, {}, run.cfg.solver); });
}

PolicySpec subsidy_spec(const TargetSet& targets, double share, double varsigma) {
    PolicySpec s;
    s.kind = PolicyKind::IncumbentSubsidy;
    s.targets = targets;
    s.budget_share = share;
    s.varsigma = varsigma;
    return s;
}

int cmd_solve(Run& run) {
    const auto s = baseline(run, run.cfg.primitives);
    emit_table(run, "solve", {row_of("baseline", s)});
    emit_distribution(run, "distribution_baseline", s, "market equilibrium");
    return kOk;
}

int cmd_subsidy(Run& run) {
    PolicySpec spec = run.cfg.policy;
    spec.kind = PolicyKind::IncumbentSubsidy;
    if (!(spec.targets[0] || spec.targets[1] || spec.targets[2]))
        throw ConfigError("policy.targets", "the subsidy command needs at least one targeted type");
    const auto base = baseline(run, run.cfg.primitives);
    const auto o = run.timed("subsidy", [&] { return net_welfare(spec, run.cfg.primitives, base, run.cfg.solver); });
    emit_table(run, "subsidy", {row_of("baseline", base), row_of("subsidy_" + targets_name(spec.targets), o)});
    emit_distribution(run, "distribution_subsidy", o.state, "incumbent subsidy");
    return kOk;
}

std::vector<TableRow> planner_rows(Run& run, const EquilibriumState& market) {
    const Primitives& p = run.cfg.primitives;
    std::vector<TableRow> rows{row_of("market", market)};
    auto add = [&](const std::string& label, const PlannerResult& r) {
        rows.push_back({label, r.state, r.welfare_index, r.welfare_index_net, r.s_inc});
    };
    const PlannerResult plain =
        run.timed("planner", [&] { return optimize_planner(std::nullopt, p, market, run.cfg.planner); });
    add("planner", plain);
    write_planner_trace(run.path("planner_trace.csv"), plain.trace, run.hash);
    emit_distribution(run, "distribution_planner", plain.state, "social planner");
    if (run.cfg.planner_subsidy.budget_share > 0) {
        const PlannerResult sub = run.timed(
            "planner_subsidy", [&] { return optimize_planner(run.cfg.planner_subsidy, p, market, run.cfg.planner); });
        add("planner_subsidy", sub);
        write_planner_trace(run.path("planner_subsidy_trace.csv"), sub.trace, run.hash);
    }
    if (run.cfg.policy.planner_controls) {
        // Fixed controls from the config, evaluated without search.
        PolicySpec spec = run.cfg.policy;
        spec.kind = PolicyKind::Planner;
        rows.push_back(row_of("controls", net_welfare(spec, p, market, run.cfg.solver)));
        if (run.cfg.planner_subsidy.budget_share > 0) {
            spec.kind = PolicyKind::PlannerWithSubsidy;
            spec.targets = run.cfg.planner_subsidy.targets;
            spec.budget_share = run.cfg.planner_subsidy.budget_share;
            rows.push_back(row_of("controls_subsidy", net_welfare(spec, p, market, run.cfg.solver)));
        }
    }
    return rows;
}

int cmd_planner(Run& run) {
    const auto market = baseline(run, run.cfg.primitives, "market");
    emit_table(run, "planner", planner_rows(run, market));
    return kOk;
}

int cmd_oracle(Run& run) {
    const auto s = baseline(run, run.cfg.primitives);
    const PanelStats stats = run.timed("oracle", [&] {
        return simulate_panel(s, run.cfg.primitives, run.cfg.oracle, run.cfg.seed, run.cfg.workers);
    });
    const OracleReport r = compare_to_analytic(stats, s.dist, run.cfg.oracle);
    write_oracle(run.path("oracle.csv"), stats, r, s.dist, run.hash);
    const char* tn[3] = {"al", "ah", "b"};
    for (std::size_t k = 0; k < 3; ++k)
        std::printf("share %-2s analytic %.4f empirical %.4f  ks %.4f\n", tn[k], s.dist.phi[k],
                    stats.phi_hat[k], r.ks[k]);
    std::printf("growth analytic %.5f empirical %.5f (rel %+.3f)\n", s.dist.g, stats.growth_emp,
                r.growth_rel_delta);
    std::printf("oracle %s\n", r.pass() ? "PASS" : "FAIL");
    return r.pass() ? kOk : kFailure;
}

int cmd_sweep(Run& run) {
    const Primitives& p = run.cfg.primitives;
    const auto base = baseline(run, p);
    const std::vector<double> shares{0.0, 0.0025, 0.005, 0.01};
    const std::vector<std::string> groups{"all", "applied", "basic"};
    std::vector<std::pair<std::string, PolicySpec>> points;
    for (const auto& g : groups)
        for (double s : shares) {
            char label[48];
            std::snprintf(label, sizeof label, "%s_%.2f%%", g.c_str(), 100.0 * s);
            points.emplace_back(label, subsidy_spec(parse_targets(g), s, p.varsigma));
        }
    std::vector<TableRow> rows(points.size());
    std::vector<std::exception_ptr> errors(points.size());
    std::atomic_size_t next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < points.size();) {
            try {
                rows[i] = row_of(points[i].first, net_welfare(points[i].second, p, base, run.cfg.solver));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    run.timed("sweep", [&] {
        std::vector<std::thread> pool;
        for (int w = 1; w < run.cfg.workers; ++w) pool.emplace_back(work);
        work();
        for (auto& t : pool) t.join();
        return 0;
    });
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    emit_table(run, "sweep", rows);
    return kOk;
}

int cmd_tables(Run& run) {
    const Primitives& p = run.cfg.primitives;
    const auto base = baseline(run, p);
    emit_table(run, "table_market", {row_of("baseline", base)});
    emit_distribution(run, "distribution_baseline", base, "market equilibrium");

    std::vector<TableRow> subsidy{row_of("baseline", base)};
    for (const std::string g : {"all", "applied", "basic"}) {
        const auto o = run.timed("subsidy_" + g, [&] {
            return net_welfare(subsidy_spec(parse_targets(g), 0.01, p.varsigma), p, base, run.cfg.solver);
        });
        subsidy.push_back(row_of("subsidy_" + g, o));
        if (g == "basic") emit_distribution(run, "distribution_basic_subsidy", o.state, "basic subsidy");
    }
    emit_table(run, "table_subsidy", subsidy);

    std::vector<TableRow> planner = planner_rows(run, base);
    emit_table(run, "table_planner", planner);

    Primitives strong = p;
    strong.varsigma = 20.0;
    const auto strong_base = baseline(run, strong, "baseline_spillover");
    const auto strong_basic = run.timed("subsidy_basic_spillover", [&] {
        return net_welfare(subsidy_spec(parse_targets("basic"), 0.01, strong.varsigma), strong, strong_base,
                           run.cfg.solver);
    });
    emit_table(run, "table_spillover",
               {row_of("baseline", base), row_of("spillover_baseline", strong_base),
                row_of("spillover_basic", strong_basic)});
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Three-research-type growth model: equilibria, subsidies, planner, Monte Carlo oracle"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<double> tolerance;
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--tolerance", tolerance, "outer fixed-point tolerance")->check(CLI::PositiveNumber);

    const std::vector<std::pair<std::string, std::function<int(Run&)>>> commands{
        {"solve", cmd_solve},   {"subsidy", cmd_subsidy}, {"planner", cmd_planner},
        {"oracle", cmd_oracle}, {"sweep", cmd_sweep},     {"tables", cmd_tables}};
    const std::map<std::string, std::string> help{
        {"solve", "market equilibrium"},
        {"subsidy", "incumbent R&D subsidy from the policy.* keys"},
        {"planner", "planner optimum, with and without the planner subsidy"},
        {"oracle", "Monte Carlo panel against the analytic distributions"},
        {"sweep", "subsidy budgets 0, 0.25, 0.5, 1% of GDP for each target group"},
        {"tables", "all result tables"}};
    for (const auto& [name, fn] : commands) app.add_subcommand(name, help.at(name));
    CLI11_PARSE(app, argc, argv);

    Run run;
    run.out = out_dir;
    run.command = app.get_subcommands().front()->get_name();
    try {
        fs::create_directories(run.out);
    } catch (const std::exception& e) {
        std::cerr << "error: cannot create " << run.out << ": " << e.what() << "\n";
        return kFailure;
    }
    const std::string error_path = run.out + "/error.json";
    std::error_code ec;
    fs::remove(error_path, ec);
    auto fail = [&](int code, const std::string& msg, const std::string& key) {
        std::cerr << "error: " << msg << "\n";
        write_error_record(error_path, run.command, msg, key, run.hash);
        return code;
    };
    try {
        run.cfg = config_path.empty() ? parse_config("") : load_config(config_path);
        if (seed) run.cfg.seed = *seed;
        if (workers) run.cfg.workers = *workers;
        if (tolerance) run.cfg.solver.tolerance = *tolerance;
        run.cfg = parse_config(to_text(run.cfg));  // re-validate the overrides
        run.hash = config_hash(run.cfg);
        std::ofstream(run.path("config.txt"), std::ios::binary) << to_text(run.cfg);
        int code = kFailure;
        for (const auto& [name, fn] : commands)
            if (name == run.command) code = fn(run);
        write_manifest(run.out, run.files, run.hash, run.command, run.cfg.seed, run.timings);
        return code;
    } catch (const ConfigError& e) {
        return fail(kConfig, e.what(), e.key);
    } catch (const ConvergenceError& e) {
        std::string msg = e.what();
        if (!e.history.empty()) {
            msg += "; last residuals:";
            const std::size_t from = e.history.size() > 5 ? e.history.size() - 5 : 0;
            for (std::size_t i = from; i < e.history.size(); ++i) {
                char buf[32];
                std::snprintf(buf, sizeof buf, " %.3g", e.history[i]);
                msg += buf;
            }
        }
        return fail(kNoConvergence, msg, "");
    } catch (const InfeasibleError& e) {
        return fail(kInfeasible, e.what(), "");
    } catch (const std::exception& e) {
        return fail(kFailure, e.what(), "");
    }
}
