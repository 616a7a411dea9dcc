#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chainplan/bilevel.hpp"
#include "chainplan/network.hpp"
#include "chainplan/risk.hpp"
#include "chainplan/swarm.hpp"

namespace chainplan::scenarios {

enum class NetworkScale { Regional, National };
enum class FinancingMode { Factoring, OrderLending, SupplyChainABS };
enum class CreditLevel { AAA, AA, A };

struct ScenarioConfig {
    int distributors = 5;                       // in {3, 5, 7, 8, 10}
    std::array<double, 5> weights{0.38, 0.62, 0.27, 0.24, 0.06};
    std::string pn_sequence = "01100101";       // 8 bits
    double demand_multiplier = 1.0;
    double distance_multiplier = 1.0;
    NetworkScale scale = NetworkScale::Regional;
    std::uint64_t seed = 1;
    double sampling_khz = 250.0;                // report metadata only
    double q_max = 0.2;                         // risk gate threshold

    void validate() const;
};

struct FinanceConfig {
    FinancingMode mode = FinancingMode::Factoring;
    CreditLevel credit = CreditLevel::AAA;
    int cycle_days = 30;                        // in {30, 60, 90}
    double omega6 = 0.42;                       // financing cost weight
    double omega7 = 0.33;                       // risk weight

    void validate() const;
};

struct FinanceMetrics {
    double financing_cost_rate = 0.0;   // percent
    double capital_turnover = 0.0;      // times per quarter
    double credit_risk_rate = 0.0;      // percent
    double net_profit_rate = 0.0;       // percent
};

struct RunReport {
    double unit_cost = 0.0;             // CNY per piece
    double on_time_rate = 0.0;          // fraction
    double min_operating_cost = 0.0;    // 10,000 CNY per quarter
    double leader_value = 0.0;
    std::string decision_code;          // 10 bits
    std::vector<int> route;             // chosen node ids
    double route_score = 0.0;
    int main_paths = 0;
    double sampling_khz = 250.0;
    std::optional<FinanceMetrics> finance;

    std::string to_json() const;
    std::string csv_header() const;
    std::string csv_row() const;
};

struct Instance {
    network::NetworkGraph graph;
    bilevel::BilevelProblem problem;
    risk::RiskDataset risk_data;
    int main_paths = 0;
    double total_demand = 0.0;
    double total_distance = 0.0;        // closed depot-to-node distances
};

Instance generate_instance(const ScenarioConfig& cfg);

RunReport run_pipeline(const ScenarioConfig& cfg,
                       const std::optional<FinanceConfig>& finance,
                       const swarm::SwarmConfig& swarm_cfg,
                       std::vector<swarm::TraceRow>* trace_out = nullptr);

FinanceMetrics finance_metrics(const RunReport& solution,
                               const FinanceConfig& fc, std::uint64_t seed);

struct ImprovementRow {
    std::string metric;
    double guided = 0.0;
    double baseline = 0.0;
    double improvement_pct = 0.0;
};

struct Comparison {
    std::vector<ImprovementRow> rows;
    double guided_leader_value = 0.0;
    double baseline_leader_value = 0.0;
};

/// Full pipeline (guided swarm, finance adaptation) vs a baseline that solves
/// the logistics bilevel program with the grid oracle only. The guided arm is
/// seeded with the baseline solution, so its leader value never trails.
Comparison compare_baseline(const ScenarioConfig& cfg,
                            const std::optional<FinanceConfig>& finance,
                            const swarm::SwarmConfig& swarm_cfg,
                            double grid_step = 0.05);

ScenarioConfig scenario_from_json(const std::string& text);
FinanceConfig finance_from_json(const std::string& text);

} // namespace chainplan::scenarios
