#include "chainplan/swarm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

namespace chainplan::swarm {

double inertia(int i, int T, double decay) {
    if (i < 0 || T < 1 || i > T)
        throw InvalidConfig("inertia requires 0 <= i <= T");
    return 0.9 - decay * static_cast<double>(i) / static_cast<double>(T + 1);
}

double sigmoid(double v) {
    const double z = std::clamp(v, -50.0, 50.0);
    return 1.0 / (1.0 + std::exp(-z));
}

std::string to_string(GuidanceAction a) {
    switch (a) {
        case GuidanceAction::RaiseInertiaDecay: return "raise_inertia_decay";
        case GuidanceAction::LowerInertiaDecay: return "lower_inertia_decay";
        case GuidanceAction::RaiseObjectiveWeight: return "raise_objective_weight";
        case GuidanceAction::LowerObjectiveWeight: return "lower_objective_weight";
    }
    return "unknown";
}

GuidanceController::GuidanceController(double epsilon) : epsilon_(epsilon) {
    if (epsilon < 0.0 || epsilon > 1.0)
        throw InvalidConfig("epsilon must lie in [0,1]");
    for (auto a : {GuidanceAction::RaiseInertiaDecay,
                   GuidanceAction::LowerInertiaDecay,
                   GuidanceAction::RaiseObjectiveWeight,
                   GuidanceAction::LowerObjectiveWeight})
        values_[a] = {0.0, 0};
}

double GuidanceController::reward(const std::array<double, 4>& metrics) const {
    double r = 0.0;
    for (std::size_t i = 0; i < metrics.size(); ++i) {
        if (metrics[i] < 0.0 || metrics[i] > 1.0)
            throw MetricOutOfRange("guidance metrics must lie in [0,1]");
        r += kRewardWeights[i] * metrics[i];
    }
    return r;
}

GuidanceAction GuidanceController::step(const std::array<double, 4>& metrics,
                                        std::mt19937_64& rng) {
    const double r = reward(metrics);
    if (last_action_) {
        auto& [mean, count] = values_[*last_action_];
        ++count;
        mean += (r - mean) / static_cast<double>(count);
    }
    GuidanceAction chosen = GuidanceAction::RaiseInertiaDecay;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    if (uni(rng) < epsilon_) {
        std::uniform_int_distribution<int> pick(0, 3);
        chosen = static_cast<GuidanceAction>(pick(rng));
    } else {
        double best = -1.0;
        for (const auto& [action, stat] : values_) {
            if (stat.first > best) {
                best = stat.first;
                chosen = action;
            }
        }
    }
    last_action_ = chosen;
    return chosen;
}

void GuidanceController::apply(GuidanceAction a, double& inertia_decay,
                               double& objective_weight) const {
    switch (a) {
        case GuidanceAction::RaiseInertiaDecay:
            inertia_decay = std::min(0.7, inertia_decay + 0.05);
            break;
        case GuidanceAction::LowerInertiaDecay:
            inertia_decay = std::max(0.3, inertia_decay - 0.05);
            break;
        case GuidanceAction::RaiseObjectiveWeight:
            objective_weight = std::min(1.0, objective_weight + 0.05);
            break;
        case GuidanceAction::LowerObjectiveWeight:
            objective_weight = std::max(0.0, objective_weight - 0.05);
            break;
    }
}

std::vector<double> update_velocity(const Particle& p,
                                    const std::vector<double>& gbest,
                                    double omega, double c1, double c2,
                                    double r1, double r2,
                                    const std::vector<double>& clamp) {
    const std::size_t dim = p.position.size();
    std::vector<double> v(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        const double pb = p.has_pbest ? p.pbest[d] : p.position[d];
        double nv = omega * p.velocity[d] + c1 * r1 * (pb - p.position[d]) +
                    c2 * r2 * (gbest[d] - p.position[d]);
        nv = std::clamp(nv, -clamp[d], clamp[d]);
        v[d] = nv;
    }
    return v;
}

std::vector<double> update_position(
    const std::vector<double>& position, const std::vector<double>& v_new,
    double r_e, const std::vector<std::pair<double, double>>& bounds) {
    double norm = 0.0;
    for (double v : v_new) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0 || sigmoid(norm) <= r_e) return position;

    std::vector<double> out(position.size());
    for (std::size_t d = 0; d < position.size(); ++d) {
        out[d] = position[d] + v_new[d] / norm;
        out[d] = std::clamp(out[d], bounds[d].first, bounds[d].second);
    }
    return out;
}

namespace {

int worker_count() {
    if (const char* env = std::getenv("CHAINPLAN_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return 1;
}

/// Evaluates fitness into slots; chunked threads keep results index-ordered,
/// so the outcome is independent of the worker count.
void evaluate_all(const SwarmProblem& problem,
                  const std::vector<const std::vector<double>*>& points,
                  std::vector<double>& out) {
    const int workers =
        std::min<int>(worker_count(), static_cast<int>(points.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < points.size(); ++i)
            out[i] = points[i] ? problem.fitness(*points[i]) : 0.0;
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (points.size() + static_cast<std::size_t>(workers) - 1) /
                              static_cast<std::size_t>(workers);
    for (int w = 0; w < workers; ++w) {
        const std::size_t lo = static_cast<std::size_t>(w) * chunk;
        const std::size_t hi = std::min(points.size(), lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i)
                out[i] = points[i] ? problem.fitness(*points[i]) : 0.0;
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace

RunResult run(const SwarmProblem& problem, const SwarmConfig& cfg,
              GuidanceController* gc) {
    if (cfg.population < 2 || cfg.iterations < 1 || cfg.c1 < 0.0 || cfg.c2 < 0.0)
        throw InvalidConfig("invalid swarm configuration");
    const std::size_t dim = problem.bounds.size();
    if (dim == 0 || !problem.fitness)
        throw InvalidConfig("problem needs bounds and a fitness function");

    const double sign = problem.maximize ? 1.0 : -1.0;
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    std::vector<double> clamp(dim);
    for (std::size_t d = 0; d < dim; ++d)
        clamp[d] = cfg.velocity_clamp_fraction *
                   (problem.bounds[d].second - problem.bounds[d].first);

    auto in_set = [&](const std::vector<double>& x) {
        return !problem.in_decision_set || problem.in_decision_set(x);
    };
    auto is_safe = [&](const std::vector<double>& x) {
        return !problem.safety_check || problem.safety_check(x);
    };

    // --- initialization -----------------------------------------------------
    std::vector<Particle> particles(static_cast<std::size_t>(cfg.population));
    for (std::size_t pi = 0; pi < particles.size(); ++pi) {
        auto& p = particles[pi];
        p.position.resize(dim);
        p.velocity.resize(dim);
        bool placed = false;
        if (pi < problem.initial_positions.size() &&
            problem.initial_positions[pi].size() == dim) {
            for (std::size_t d = 0; d < dim; ++d)
                p.position[d] = std::clamp(problem.initial_positions[pi][d],
                                           problem.bounds[d].first,
                                           problem.bounds[d].second);
            placed = in_set(p.position);
        }
        for (int attempt = 0; attempt < cfg.init_retries && !placed; ++attempt) {
            for (std::size_t d = 0; d < dim; ++d)
                p.position[d] = problem.bounds[d].first +
                                uni(rng) * (problem.bounds[d].second -
                                            problem.bounds[d].first);
            placed = in_set(p.position);
        }
        for (std::size_t d = 0; d < dim; ++d)
            p.velocity[d] = (2.0 * uni(rng) - 1.0) * clamp[d];
        if (placed && is_safe(p.position)) {
            p.pbest = p.position;
            p.pbest_value = problem.fitness(p.position);
            p.has_pbest = true;
        }
    }

    std::vector<double> gbest;
    double gbest_value = 0.0;
    bool has_gbest = false;
    for (const auto& p : particles) {
        if (!p.has_pbest) continue;
        if (!has_gbest || sign * p.pbest_value > sign * gbest_value) {
            gbest = p.pbest;
            gbest_value = p.pbest_value;
            has_gbest = true;
        }
    }
    if (!has_gbest)
        throw NoFeasibleParticle(
            "initialization could not place any particle in the decision set");

    RunResult result;
    result.trace.reserve(static_cast<std::size_t>(cfg.iterations));
    double inertia_decay = cfg.inertia_decay;
    double objective_weight = result.objective_weight;

    double window_prev_best = gbest_value;
    long window_moves = 0, window_updates = 0, window_rejects = 0;

    std::vector<std::vector<double>> candidates(particles.size());
    std::vector<bool> eligible(particles.size());
    std::vector<const std::vector<double>*> eval_points(particles.size());
    std::vector<double> fitness_out(particles.size());

    // --- main loop ----------------------------------------------------------
    for (int iter = 0; iter < cfg.iterations; ++iter) {
        const double omega = inertia(iter, cfg.iterations, inertia_decay);

        for (std::size_t pi = 0; pi < particles.size(); ++pi) {
            auto& p = particles[pi];
            const double r1 = uni(rng);
            const double r2 = uni(rng);
            p.velocity = update_velocity(p, gbest, omega, cfg.c1, cfg.c2, r1, r2,
                                         clamp);
            const double r_e = uni(rng);
            std::vector<double> candidate =
                update_position(p.position, p.velocity, r_e, problem.bounds);

            // two-layer screening
            bool accept = in_set(candidate);
            if (!accept) accept = in_set(candidate);  // re-check once
            if (!accept) {
                // re-perturb within 5% of box width, then re-check
                for (std::size_t d = 0; d < dim; ++d) {
                    const double width =
                        problem.bounds[d].second - problem.bounds[d].first;
                    candidate[d] = std::clamp(
                        candidate[d] + (2.0 * uni(rng) - 1.0) * 0.05 * width,
                        problem.bounds[d].first, problem.bounds[d].second);
                }
                accept = in_set(candidate);
                if (accept) ++result.rescreen_accepts;
            }
            bool safe = true;
            if (!accept) {
                // second-layer safety verification before rejection
                safe = is_safe(candidate);
                if (safe) {
                    accept = true;
                    ++result.safety_accepts;
                }
            } else {
                safe = is_safe(candidate);
            }

            if (accept) {
                p.position = candidate;
                ++window_moves;
            } else {
                ++result.rejections;
                ++window_rejects;
            }
            candidates[pi] = p.position;
            eligible[pi] = accept && in_set(p.position) && safe;
            eval_points[pi] = eligible[pi] ? &candidates[pi] : nullptr;
        }

        evaluate_all(problem, eval_points, fitness_out);

        for (std::size_t pi = 0; pi < particles.size(); ++pi) {
            if (!eligible[pi]) continue;
            auto& p = particles[pi];
            const double f = fitness_out[pi];
            if (!p.has_pbest || sign * f > sign * p.pbest_value) {
                p.pbest = p.position;
                p.pbest_value = f;
                p.has_pbest = true;
                ++window_updates;
            }
            if (sign * p.pbest_value > sign * gbest_value) {
                gbest = p.pbest;
                gbest_value = p.pbest_value;
            }
        }

        TraceRow row{iter, gbest_value, omega, ""};
        if (gc && (iter + 1) % cfg.guidance_interval == 0) {
            std::array<double, 4> metrics{};
            if (problem.metrics) {
                metrics = problem.metrics();
            } else {
                const long window =
                    static_cast<long>(cfg.guidance_interval) *
                    static_cast<long>(particles.size());
                const double improvement =
                    sign * (gbest_value - window_prev_best) /
                    (std::abs(window_prev_best) + 1.0);
                metrics[0] = std::clamp(improvement, 0.0, 1.0);
                metrics[1] = std::clamp(
                    static_cast<double>(window_moves) / static_cast<double>(window),
                    0.0, 1.0);
                metrics[2] = std::clamp(
                    1.0 - static_cast<double>(window_rejects) /
                              static_cast<double>(window),
                    0.0, 1.0);
                metrics[3] = std::clamp(static_cast<double>(window_updates) /
                                            static_cast<double>(window),
                                        0.0, 1.0);
            }
            const GuidanceAction action = gc->step(metrics, rng);
            gc->apply(action, inertia_decay, objective_weight);
            row.action = to_string(action);
            window_prev_best = gbest_value;
            window_moves = window_updates = window_rejects = 0;
        }
        result.trace.push_back(std::move(row));
    }

    result.best_position = gbest;
    result.best_value = gbest_value;
    result.objective_weight = objective_weight;
    return result;
}

std::string trace_to_csv(const std::vector<TraceRow>& trace) {
    std::ostringstream out;
    out << "iteration,best_value,omega,action\n";
    out.precision(17);
    for (const auto& row : trace)
        out << row.iteration << ',' << row.best_value << ',' << row.omega << ','
            << row.action << '\n';
    return out.str();
}

} // namespace chainplan::swarm
