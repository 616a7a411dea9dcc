// Acceptance suite: one pass/fail line per criterion, exit 0 only when all
// criteria hold. Tolerances are pinned here, next to each check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "chainplan/bilevel.hpp"
#include "chainplan/indicators.hpp"
#include "chainplan/risk.hpp"
#include "chainplan/network.hpp"
#include "chainplan/scenarios.hpp"
#include "chainplan/swarm.hpp"

using namespace chainplan;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << criterion << ": "
              << detail << "\n";
    if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bilevel::BilevelProblem seeded_instance(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    bilevel::BilevelProblem p;
    p.k = 2;
    p.block_dims = {2, 2, 2};
    auto draw_vec = [&] {
        Eigen::VectorXd v(2);
        v << 0.5 + uni(rng), 0.5 + uni(rng);
        return v;
    };
    for (int j = 0; j < 3; ++j) p.leader_coeffs.push_back(draw_vec());
    for (int v = 0; v < 2; ++v)
        p.follower_coeffs.push_back({draw_vec(), draw_vec(), draw_vec()});
    Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(2);
    for (int j = 0; j < 3; ++j) {
        Eigen::MatrixXd a(2, 2);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) {
                a(r, c) = uni(rng);
                row_sums(r) += a(r, c);
            }
        p.constraint_blocks.push_back(std::move(a));
        p.bounds.push_back({{0.0, 1.0}, {0.0, 1.0}});
    }
    p.rhs = 0.55 * row_sums;
    return p;
}

swarm::SwarmProblem adapt(const bilevel::BilevelProblem& p) {
    swarm::SwarmProblem sp;
    sp.bounds.assign(static_cast<std::size_t>(p.total_dim()), {0.0, 1.0});
    sp.maximize = true;
    sp.fitness = [&p](const std::vector<double>& x) {
        double v = 0.0;
        std::size_t at = 0;
        for (std::size_t j = 0; j < p.leader_coeffs.size(); ++j)
            for (Eigen::Index d = 0; d < p.leader_coeffs[j].size(); ++d)
                v += p.leader_coeffs[j](d) * x[at++];
        return v;
    };
    sp.in_decision_set = [&p](const std::vector<double>& x) {
        bilevel::DecisionVector dv;
        std::size_t at = 0;
        for (int b : p.block_dims) {
            Eigen::VectorXd block(b);
            for (int d = 0; d < b; ++d) block(d) = x[at++];
            dv.blocks.push_back(std::move(block));
        }
        return bilevel::feasible(p, dv);
    };
    return sp;
}

double swarm_leader_value(const bilevel::BilevelProblem& p, std::uint64_t seed,
                          bool guided, int population, int iterations) {
    const auto sp = adapt(p);
    swarm::SwarmConfig cfg;
    cfg.population = population;
    cfg.iterations = iterations;
    cfg.seed = seed;
    if (guided) {
        swarm::GuidanceController gc(0.1);
        return swarm::run(sp, cfg, &gc).best_value;
    }
    return swarm::run(sp, cfg).best_value;
}

// --- criterion 1: swarm vs oracle on the seeded bilevel instances -----------
void criterion_1() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed : {101, 102, 103, 104, 105}) {
        const auto p = seeded_instance(seed);
        const auto oracle = bilevel::oracle_solve(p, 0.05);
        const double got = swarm_leader_value(p, seed, true, 200, 500);
        const double ratio = got / oracle.leader_value;
        if (ratio < 0.99) {
            ok = false;
            detail += " seed " + std::to_string(seed) + " ratio " +
                      std::to_string(ratio);
        }
    }
    const double elapsed = seconds_since(t0);
    if (elapsed >= 60.0) {
        ok = false;
        detail += " runtime " + std::to_string(elapsed) + "s";
    }
    report(1, ok,
           "swarm >= 0.99x oracle on 5 seeded bilevel instances, " +
               std::to_string(elapsed) + "s" + detail);
}

// --- criterion 2: sphere benchmark ------------------------------------------
void criterion_2() {
    const auto t0 = Clock::now();
    swarm::SwarmProblem sp;
    sp.bounds.assign(25, {-5.12, 5.12});
    sp.maximize = false;
    sp.fitness = [](const std::vector<double>& x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return s;
    };
    std::vector<double> finals;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        swarm::SwarmConfig cfg;
        cfg.population = 200;
        cfg.iterations = 1800;
        cfg.seed = seed;
        finals.push_back(swarm::run(sp, cfg).best_value);
    }
    std::sort(finals.begin(), finals.end());
    const double median = 0.5 * (finals[4] + finals[5]);
    const double elapsed = seconds_since(t0);
    const bool ok = median < 1e-3 && elapsed < 30.0;
    report(2, ok,
           "sphere dim 25: median best " + std::to_string(median) + " over 10 seeds, " +
               std::to_string(elapsed) + "s");
}

// --- criterion 3: normalization property suite ------------------------------
void criterion_3() {
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> uni(-100.0, 100.0);
    std::uniform_int_distribution<int> rows(2, 12);
    std::uniform_real_distribution<double> scale(0.1, 10.0);
    long violations = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        const int n = rows(rng);
        std::vector<double> col(static_cast<std::size_t>(n));
        for (auto& v : col) v = uni(rng);
        if (*std::max_element(col.begin(), col.end()) ==
            *std::min_element(col.begin(), col.end()))
            col[0] += 1.0;

        const auto b = indicators::normalize_column(
            col, indicators::Orientation::Benefit);
        const auto c = indicators::normalize_column(
            col, indicators::Orientation::Cost);
        const double bmin = *std::min_element(b.begin(), b.end());
        const double bmax = *std::max_element(b.begin(), b.end());
        if (std::abs(bmin) > 1e-12 || std::abs(bmax - 1.0) > 1e-12) ++violations;
        for (std::size_t i = 0; i < col.size(); ++i) {
            if (b[i] < -1e-12 || b[i] > 1.0 + 1e-12) ++violations;
            if (std::abs(b[i] + c[i] - 1.0) > 1e-12) ++violations;
        }

        // positive affine transforms leave the normalization unchanged
        const double a = scale(rng), off = uni(rng);
        std::vector<double> mapped(col.size());
        for (std::size_t i = 0; i < col.size(); ++i) mapped[i] = a * col[i] + off;
        const auto b2 = indicators::normalize_column(
            mapped, indicators::Orientation::Benefit);
        for (std::size_t i = 0; i < col.size(); ++i)
            if (std::abs(b[i] - b2[i]) > 1e-9) ++violations;
    }
    report(3, violations == 0,
           "1000 random normalization matrices, " + std::to_string(violations) +
               " violations");
}

// --- criterion 4: logistic recovery -----------------------------------------
void criterion_4() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(404);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const int n = 5000, t = 3;

    Eigen::MatrixXd scores(n, t);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < t; ++j) scores(i, j) = gauss(rng);

    std::array<double, risk::kCategories> b0{0.3, -0.4, 0.1, -0.2};
    std::vector<Eigen::VectorXd> beta(risk::kCategories);
    beta[0] = Eigen::Vector3d(0.9, -0.4, 0.2);
    beta[1] = Eigen::Vector3d(-0.6, 0.8, 0.5);
    beta[2] = Eigen::Vector3d(0.3, 0.3, -1.0);
    beta[3] = Eigen::Vector3d(-0.2, -0.7, 0.6);

    Eigen::MatrixXi outcomes(n, risk::kCategories);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < risk::kCategories; ++c) {
            const auto sc = static_cast<std::size_t>(c);
            const double eta = b0[sc] + beta[sc].dot(scores.row(i));
            outcomes(i, c) = uni(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0;
        }

    const auto model = risk::fit_logistic(scores, outcomes);
    double worst = 0.0;
    for (int c = 0; c < risk::kCategories; ++c) {
        const auto sc = static_cast<std::size_t>(c);
        worst = std::max(worst, std::abs(model.intercept[sc] - b0[sc]));
        for (int j = 0; j < t; ++j)
            worst = std::max(worst, std::abs(model.coeffs[sc](j) - beta[sc](j)));
    }
    const double elapsed = seconds_since(t0);
    const bool ok = worst <= 0.15 && elapsed < 10.0;
    report(4, ok,
           "logistic recovery worst |error| " + std::to_string(worst) + ", " +
               std::to_string(elapsed) + "s");
}

// --- criteria 5-7: scenario directional reproduction ------------------------
swarm::SwarmConfig scenario_swarm() {
    swarm::SwarmConfig sc;
    sc.population = 60;
    sc.iterations = 120;
    return sc;
}

void criterion_5() {
    bool ok = true;
    std::string detail;
    const std::vector<double> demand_levels{0.5, 0.6, 1.3, 1.5};
    const std::vector<double> distance_levels{0.6, 0.7, 1.3, 1.5};
    for (std::uint64_t seed = 1; seed <= 10 && ok; ++seed) {
        double prev = -1.0;
        for (double lvl : demand_levels) {
            scenarios::ScenarioConfig cfg;
            cfg.seed = seed;
            cfg.demand_multiplier = lvl;
            const auto r =
                scenarios::run_pipeline(cfg, std::nullopt, scenario_swarm());
            if (r.min_operating_cost <= prev) {
                ok = false;
                detail = " demand sweep not increasing at seed " +
                         std::to_string(seed);
            }
            prev = r.min_operating_cost;
        }
        prev = -1.0;
        for (double lvl : distance_levels) {
            scenarios::ScenarioConfig cfg;
            cfg.seed = seed;
            cfg.distance_multiplier = lvl;
            const auto r =
                scenarios::run_pipeline(cfg, std::nullopt, scenario_swarm());
            if (r.min_operating_cost <= prev) {
                ok = false;
                detail = " distance sweep not increasing at seed " +
                         std::to_string(seed);
            }
            prev = r.min_operating_cost;
        }
    }
    report(5, ok, "demand/distance sweeps strictly increasing, 10 seeds each" +
                      detail);
}

void criterion_6() {
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 10 && ok; ++seed)
        for (int rep = 0; rep < 4 && ok; ++rep) {
            scenarios::ScenarioConfig cfg;
            cfg.seed = seed * 1000 + static_cast<std::uint64_t>(rep);
            cfg.scale = scenarios::NetworkScale::Regional;
            const auto regional =
                scenarios::run_pipeline(cfg, std::nullopt, scenario_swarm());
            cfg.scale = scenarios::NetworkScale::National;
            const auto national =
                scenarios::run_pipeline(cfg, std::nullopt, scenario_swarm());

            const bool ordering = regional.unit_cost < national.unit_cost &&
                                  regional.on_time_rate > national.on_time_rate;
            auto in_bands = [](const scenarios::RunReport& r) {
                return r.unit_cost >= 1.0 && r.unit_cost <= 3.0 &&
                       r.on_time_rate >= 0.95 && r.on_time_rate <= 0.99;
            };
            if (!ordering || !in_bands(regional) || !in_bands(national)) {
                ok = false;
                detail = " violated at seed " + std::to_string(cfg.seed);
            }
        }
    report(6, ok,
           "Regional < National unit cost, Regional > National on-time, "
           "bands 1-3 CNY / 95-99%, 4 replications x 10 seeds" + detail);
}

void criterion_7() {
    bool ok = true;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 10 && ok; ++seed) {
        scenarios::ScenarioConfig cfg;
        cfg.seed = seed;
        const auto base =
            scenarios::run_pipeline(cfg, std::nullopt, scenario_swarm());

        scenarios::FinanceConfig good;
        good.mode = scenarios::FinancingMode::SupplyChainABS;
        good.credit = scenarios::CreditLevel::AAA;
        good.cycle_days = 60;
        scenarios::FinanceConfig bad;
        bad.mode = scenarios::FinancingMode::OrderLending;
        bad.credit = scenarios::CreditLevel::A;
        bad.cycle_days = 90;

        const auto mg = scenarios::finance_metrics(base, good, seed);
        const auto mb = scenarios::finance_metrics(base, bad, seed);
        if (!(mg.financing_cost_rate < mb.financing_cost_rate &&
              mg.net_profit_rate > mb.net_profit_rate)) {
            ok = false;
            detail = " violated at seed " + std::to_string(seed);
        }
    }
    report(7, ok,
           "(ABS, AAA, 60d) dominates (OrderLending, A, 90d) on financing "
           "cost and net profit, 10 seeds" + detail);
}

// --- criterion 8: guidance non-inferiority ----------------------------------
void criterion_8() {
    double mean_on = 0.0, mean_off = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto p = seeded_instance(100 + seed);
        mean_on += swarm_leader_value(p, seed, true, 200, 500);
        mean_off += swarm_leader_value(p, seed, false, 200, 500);
    }
    mean_on /= 10.0;
    mean_off /= 10.0;
    const double delta = mean_on - mean_off;
    const bool ok = mean_on >= mean_off - 1e-9;
    report(8, ok,
           "guided mean " + std::to_string(mean_on) + " vs unguided " +
               std::to_string(mean_off) + ", delta " + std::to_string(delta));
}

// --- criterion 9: determinism across re-runs and worker counts --------------
void criterion_9() {
    scenarios::ScenarioConfig cfg;
    cfg.seed = 909;
    scenarios::FinanceConfig fc;

    auto render = [&] {
        std::vector<swarm::TraceRow> trace;
        const auto r =
            scenarios::run_pipeline(cfg, fc, scenario_swarm(), &trace);
        return r.csv_header() + "\n" + r.csv_row() + "\n" +
               swarm::trace_to_csv(trace);
    };

    setenv("CHAINPLAN_THREADS", "1", 1);
    const auto serial_a = render();
    const auto serial_b = render();
    setenv("CHAINPLAN_THREADS", "4", 1);
    const auto parallel = render();
    unsetenv("CHAINPLAN_THREADS");

    const bool ok = serial_a == serial_b && serial_a == parallel;
    report(9, ok, "byte-identical CSV across re-runs and CHAINPLAN_THREADS 1/4");
}

// --- criterion 10: invariant batch ------------------------------------------
void criterion_10() {
    long violations = 0;

    // gbest monotonicity across seeds
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto p = seeded_instance(200 + seed);
        const auto sp = adapt(p);
        swarm::SwarmConfig cfg;
        cfg.population = 50;
        cfg.iterations = 120;
        cfg.seed = seed;
        const auto result = swarm::run(sp, cfg);
        double prev = -1e300;
        for (const auto& row : result.trace) {
            if (row.best_value < prev - 1e-12) ++violations;
            prev = row.best_value;
        }
        // every reported solution passes the feasibility predicate
        if (!sp.in_decision_set(result.best_position)) ++violations;
    }

    // unit-step position property
    {
        std::mt19937_64 rng(1010);
        std::uniform_real_distribution<double> uni(-3.0, 3.0);
        std::uniform_real_distribution<double> gate(0.0, 1.0);
        const std::vector<std::pair<double, double>> bounds(
            4, {-100.0, 100.0});
        for (int rep = 0; rep < 2000; ++rep) {
            std::vector<double> x(4), v(4);
            for (std::size_t d = 0; d < 4; ++d) {
                x[d] = uni(rng);
                v[d] = uni(rng);
            }
            const auto moved = swarm::update_position(x, v, gate(rng), bounds);
            double len = 0.0;
            for (std::size_t d = 0; d < 4; ++d)
                len += (moved[d] - x[d]) * (moved[d] - x[d]);
            len = std::sqrt(len);
            if (std::abs(len) > 1e-9 && std::abs(len - 1.0) > 1e-9) ++violations;
        }
    }

    // closure idempotence
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        std::mt19937_64 rng(3000 + seed);
        std::uniform_real_distribution<double> coord(0.0, 10.0);
        network::NetworkGraph g;
        for (int i = 0; i < 6; ++i)
            g.nodes.push_back({i, coord(rng), coord(rng), 0.0, 1.0, 1.0});
        const auto closed =
            network::all_pairs_shortest(network::build_distance_matrix(g));
        const auto twice = network::all_pairs_shortest(closed);
        if ((closed.d - twice.d).norm() > 1e-12) ++violations;
        if ((closed.d - closed.d.transpose()).norm() > 1e-12) ++violations;
    }

    // reward weight sum
    {
        double s = 0.0;
        for (double w : swarm::GuidanceController::kRewardWeights) s += w;
        if (std::abs(s - 1.0) > 1e-12) ++violations;
    }

    // oracle solutions are feasible
    for (std::uint64_t seed : {101, 103, 105}) {
        const auto p = seeded_instance(seed);
        const auto sol = bilevel::oracle_solve(p, 0.1);
        if (!bilevel::feasible(p, sol.x)) ++violations;
    }

    report(10, violations == 0,
           "invariant batch (" + std::to_string(violations) + " violations)");
}

} // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    std::cout << (failures == 0 ? "ALL CRITERIA PASSED"
                                : std::to_string(failures) + " CRITERIA FAILED")
              << "\n";
    return failures == 0 ? 0 : 1;
}
