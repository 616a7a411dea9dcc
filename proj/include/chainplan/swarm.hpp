#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "chainplan/errors.hpp"

namespace chainplan::swarm {

/// Iteration-scheduled inertia weight: 0.9 - decay * i / (T + 1).
double inertia(int i, int T, double decay = 0.5);

/// 1 / (1 + exp(-v)) with the exponent clamped to +/-50.
double sigmoid(double v);

struct Particle {
    std::vector<double> position;
    std::vector<double> velocity;
    std::vector<double> pbest;
    double pbest_value = 0.0;
    bool has_pbest = false;
};

struct SwarmConfig {
    int population = 200;
    int iterations = 1800;
    double c1 = 2.0;
    double c2 = 2.0;
    std::uint64_t seed = 1;
    double velocity_clamp_fraction = 0.10;  // of each variable's box width
    int init_retries = 100;
    double inertia_decay = 0.5;
    int guidance_interval = 10;             // iterations between controller steps
};

/// Problem adapter: fitness is maximized when maximize is true. The two
/// screening layers are the decision-set membership test and the risk gate.
struct SwarmProblem {
    std::vector<std::pair<double, double>> bounds;
    std::function<double(const std::vector<double>&)> fitness;
    std::function<bool(const std::vector<double>&)> in_decision_set;  // optional
    std::function<bool(const std::vector<double>&)> safety_check;     // optional
    bool maximize = true;
    // optional metrics source for the guidance controller; values in [0,1],
    // higher is better (risk already inverted by the caller)
    std::function<std::array<double, 4>()> metrics;
    // optional warm starts; the first particles are placed here
    std::vector<std::vector<double>> initial_positions;
};

enum class GuidanceAction {
    RaiseInertiaDecay,
    LowerInertiaDecay,
    RaiseObjectiveWeight,
    LowerObjectiveWeight,
};

std::string to_string(GuidanceAction a);

/// Epsilon-greedy bandit over a discrete action set, rewarded by the fixed
/// weighted metric blend. Realizes reward-driven adaptation of the swarm's
/// runtime parameters.
class GuidanceController {
public:
    static constexpr std::array<double, 4> kRewardWeights{0.35, 0.30, 0.25, 0.10};

    explicit GuidanceController(double epsilon = 0.1);

    double reward(const std::array<double, 4>& metrics) const;

    /// Credits the observed metrics to the last selected action, then picks
    /// the next action epsilon-greedily using the supplied RNG.
    GuidanceAction step(const std::array<double, 4>& metrics,
                        std::mt19937_64& rng);

    /// Applies an action to the runtime parameters within safe ranges:
    /// inertia decay in [0.3, 0.7], objective weight in [0, 1].
    void apply(GuidanceAction a, double& inertia_decay,
               double& objective_weight) const;

    const std::map<GuidanceAction, std::pair<double, int>>& value_table() const {
        return values_;
    }
    double epsilon() const { return epsilon_; }
    void set_epsilon(double e) { epsilon_ = e; }

private:
    double epsilon_;
    std::map<GuidanceAction, std::pair<double, int>> values_;  // mean, count
    std::optional<GuidanceAction> last_action_;
};

struct TraceRow {
    int iteration = 0;
    double best_value = 0.0;
    double omega = 0.0;
    std::string action;  // empty when the controller did not step
};

struct RunResult {
    std::vector<double> best_position;
    double best_value = 0.0;
    std::vector<TraceRow> trace;
    double objective_weight = 0.5;  // controller-adjusted blend parameter
    // screening counters
    long rescreen_accepts = 0;
    long safety_accepts = 0;
    long rejections = 0;
};

std::vector<double> update_velocity(const Particle& p,
                                    const std::vector<double>& gbest,
                                    double omega, double c1, double c2,
                                    double r1, double r2,
                                    const std::vector<double>& clamp);

/// Gated unit step: if sigmoid(|v|) > r_e the particle moves by v / |v|,
/// otherwise it stays; the result is clamped to the problem bounds.
std::vector<double> update_position(const std::vector<double>& position,
                                    const std::vector<double>& v_new,
                                    double r_e,
                                    const std::vector<std::pair<double, double>>& bounds);

RunResult run(const SwarmProblem& problem, const SwarmConfig& cfg,
              GuidanceController* gc = nullptr);

std::string trace_to_csv(const std::vector<TraceRow>& trace);

} // namespace chainplan::swarm
