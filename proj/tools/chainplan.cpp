#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chainplan/bilevel.hpp"
#include "chainplan/scenarios.hpp"

namespace fs = std::filesystem;
using namespace chainplan;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InvalidConfig("cannot read config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    out << content;
}

struct CommonOpts {
    std::string config;
    std::string finance_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    int verbosity = 0;
    int population = 200;
    int iterations = 500;
};

scenarios::ScenarioConfig load_scenario(const CommonOpts& opt) {
    auto cfg = scenarios::scenario_from_json(read_file(opt.config));
    if (opt.seed) cfg.seed = *opt.seed;
    return cfg;
}

std::optional<scenarios::FinanceConfig> load_finance(const CommonOpts& opt) {
    if (opt.finance_path.empty()) return std::nullopt;
    return scenarios::finance_from_json(read_file(opt.finance_path));
}

swarm::SwarmConfig make_swarm_cfg(const CommonOpts& opt) {
    swarm::SwarmConfig sc;
    sc.population = opt.population;
    sc.iterations = opt.iterations;
    return sc;
}

int cmd_plan(const CommonOpts& opt) {
    const auto cfg = load_scenario(opt);
    const auto finance = load_finance(opt);
    std::vector<swarm::TraceRow> trace;
    const auto report =
        scenarios::run_pipeline(cfg, finance, make_swarm_cfg(opt), &trace);

    write_file(fs::path(opt.out_dir) / "report.json", report.to_json());
    write_file(fs::path(opt.out_dir) / "report.csv",
               report.csv_header() + "\n" + report.csv_row() + "\n");
    write_file(fs::path(opt.out_dir) / "trace.csv",
               swarm::trace_to_csv(trace));
    if (opt.verbosity > 0)
        std::cout << "plan: wrote report + trace to " << opt.out_dir << "\n";
    return 0;
}

int cmd_sweep(const CommonOpts& opt, const std::string& factor,
              const std::vector<double>& levels) {
    if (levels.size() < 2)
        throw InvalidConfig("sweep needs at least 2 levels");
    if (factor != "demand" && factor != "distance")
        throw InvalidConfig("factor must be demand or distance");

    auto cfg = load_scenario(opt);
    std::ostringstream csv;
    csv.precision(17);
    csv << "factor,level,min_operating_cost,decision_code\n";
    for (double level : levels) {
        auto c = cfg;
        (factor == "demand" ? c.demand_multiplier : c.distance_multiplier) =
            level;
        const auto report =
            scenarios::run_pipeline(c, std::nullopt, make_swarm_cfg(opt));
        csv << factor << ',' << level << ',' << report.min_operating_cost << ','
            << report.decision_code << '\n';
    }
    write_file(fs::path(opt.out_dir) / ("sweep_" + factor + ".csv"), csv.str());
    if (opt.verbosity > 0)
        std::cout << "sweep: " << levels.size() << " rows written\n";
    return 0;
}

int cmd_finance(const CommonOpts& opt) {
    const auto cfg = load_scenario(opt);
    const auto report =
        scenarios::run_pipeline(cfg, std::nullopt, make_swarm_cfg(opt));

    using scenarios::CreditLevel;
    using scenarios::FinancingMode;
    const std::vector<std::tuple<FinancingMode, CreditLevel, int, std::string>>
        rows = {
            {FinancingMode::Factoring, CreditLevel::AAA, 30, "Factoring,AAA,30"},
            {FinancingMode::Factoring, CreditLevel::AA, 60, "Factoring,AA,60"},
            {FinancingMode::OrderLending, CreditLevel::AAA, 30,
             "OrderLending,AAA,30"},
            {FinancingMode::OrderLending, CreditLevel::A, 90,
             "OrderLending,A,90"},
            {FinancingMode::SupplyChainABS, CreditLevel::AAA, 60,
             "SupplyChainABS,AAA,60"},
            {FinancingMode::SupplyChainABS, CreditLevel::AA, 90,
             "SupplyChainABS,AA,90"},
        };
    std::ostringstream csv;
    csv.precision(10);
    csv << "mode,credit,cycle_days,financing_cost_rate,capital_turnover,"
           "credit_risk_rate,net_profit_rate\n";
    for (const auto& [mode, credit, cycle, label] : rows) {
        scenarios::FinanceConfig fc;
        fc.mode = mode;
        fc.credit = credit;
        fc.cycle_days = cycle;
        const auto m = scenarios::finance_metrics(report, fc, cfg.seed);
        csv << label << ',' << m.financing_cost_rate << ','
            << m.capital_turnover << ',' << m.credit_risk_rate << ','
            << m.net_profit_rate << '\n';
    }
    write_file(fs::path(opt.out_dir) / "finance.csv", csv.str());
    if (opt.verbosity > 0) std::cout << "finance: table written\n";
    return 0;
}

int cmd_oracle(const CommonOpts& opt, double grid_step) {
    const auto problem = bilevel::problem_from_json(read_file(opt.config));

    auto block_points = [&](std::size_t j) {
        std::size_t n = 1;
        for (const auto& b : problem.bounds[j])
            n *= bilevel::grid_axis(b, grid_step).size();
        return n;
    };
    std::size_t follower_points = 0;
    for (std::size_t j = 1; j < problem.bounds.size(); ++j)
        follower_points += block_points(j);
    const std::size_t points =
        block_points(0) * std::max<std::size_t>(follower_points, 1);
    if (points > 1'000'000)
        std::cerr << "warning: grid has " << points << " evaluations\n";

    const auto solution = bilevel::oracle_solve(problem, grid_step);
    write_file(fs::path(opt.out_dir) / "solution.json",
               bilevel::solution_to_json(solution));
    if (opt.verbosity > 0)
        std::cout << "oracle: leader value " << solution.leader_value << "\n";
    return 0;
}

int cmd_report(const CommonOpts& opt, double grid_step, int replications) {
    const auto cfg = load_scenario(opt);
    const auto finance = load_finance(opt);
    const auto sc = make_swarm_cfg(opt);

    std::vector<scenarios::Comparison> comparisons;
    for (int r = 0; r < replications; ++r) {
        auto c = cfg;
        c.seed = cfg.seed + static_cast<std::uint64_t>(r);
        comparisons.push_back(
            scenarios::compare_baseline(c, finance, sc, grid_step));
    }

    std::ostringstream csv;
    csv.precision(10);
    csv << "metric,guided_mean,baseline_mean,improvement_pct_mean,"
           "improvement_pct_sd\n";
    const std::size_t n_rows = comparisons.front().rows.size();
    for (std::size_t i = 0; i < n_rows; ++i) {
        double g = 0, b = 0, imp = 0, imp2 = 0;
        for (const auto& cmp : comparisons) {
            g += cmp.rows[i].guided;
            b += cmp.rows[i].baseline;
            imp += cmp.rows[i].improvement_pct;
            imp2 += cmp.rows[i].improvement_pct * cmp.rows[i].improvement_pct;
        }
        const double n = static_cast<double>(comparisons.size());
        const double mean = imp / n;
        const double var = std::max(0.0, imp2 / n - mean * mean);
        csv << comparisons.front().rows[i].metric << ',' << g / n << ','
            << b / n << ',' << mean << ',' << std::sqrt(var) << '\n';
    }
    write_file(fs::path(opt.out_dir) / "improvement.csv", csv.str());
    if (opt.verbosity > 0)
        std::cout << "report: " << replications << " replications compared\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"chainplan: supply-chain decision optimization toolkit"};
    app.require_subcommand(1);

    CommonOpts opt;
    std::string factor = "demand";
    std::vector<double> levels;
    double grid_step = 0.05;
    int replications = 10;

    auto add_common = [&](CLI::App* sub, bool needs_config = true) {
        auto* c = sub->add_option("--config", opt.config, "config JSON path");
        if (needs_config) c->required();
        sub->add_option("--finance", opt.finance_path, "finance config JSON");
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--seed", opt.seed, "seed override");
        sub->add_option("--population", opt.population, "swarm population");
        sub->add_option("--iterations", opt.iterations, "swarm iterations");
        sub->add_flag("-v", opt.verbosity, "verbosity");
    };

    auto* plan = app.add_subcommand("plan", "run the full decision pipeline");
    add_common(plan);

    auto* sweep = app.add_subcommand("sweep", "factor sweep over levels");
    add_common(sweep);
    sweep->add_option("--factor", factor, "demand or distance");
    sweep->add_option("--levels", levels, "multiplier levels")->delimiter(',');

    auto* finance = app.add_subcommand("finance", "finance metric table");
    add_common(finance);

    auto* oracle = app.add_subcommand("oracle", "grid oracle for a problem file");
    add_common(oracle);
    oracle->add_option("--grid-step", grid_step, "oracle grid step");

    auto* report = app.add_subcommand("report", "guided-vs-baseline comparison");
    add_common(report);
    report->add_option("--grid-step", grid_step, "oracle grid step");
    report->add_option("--replications", replications, "seeded replications");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (plan->parsed()) return cmd_plan(opt);
        if (sweep->parsed()) return cmd_sweep(opt, factor, levels);
        if (finance->parsed()) return cmd_finance(opt);
        if (oracle->parsed()) return cmd_oracle(opt, grid_step);
        if (report->parsed()) return cmd_report(opt, grid_step, replications);
    } catch (const InvalidConfig& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "pipeline error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
