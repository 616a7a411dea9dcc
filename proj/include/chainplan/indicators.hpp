#pragma once

#include <Eigen/Dense>
#include <vector>

#include "chainplan/errors.hpp"

namespace chainplan::indicators {

enum class Orientation { Benefit, Cost };

/// Raw per-node indicator values; one column per indicator, one row per node.
struct IndicatorMatrix {
    Eigen::MatrixXd values;                   // k nodes x m indicators
    std::vector<Orientation> orientations;    // length m

    void validate() const;
};

/// Weights for the composite node score. Must sum to 1.
struct ScoreWeights {
    double w1 = 0.0;
    double w2 = 0.0;
    double w3 = 0.0;
};

/// Per-node metrics entering the composite score. q_delay is expected to be
/// passed after Cost-orientation normalization, so that larger is better.
struct NodeMetrics {
    double t_coverage = 0.0;   // coverage range
    double c_coeff = 0.0;      // distribution coefficient
    double q_delay = 0.0;      // max transmission delay, normalized
};

struct ThroughputSnapshot {
    double n_i = 0.0;
    double n_r = 0.0;
    double n_s = 0.0;
    double c_norm = 1.0;
};

struct ThroughputRatios {
    double rho_i = 0.0;
    double rho_r = 0.0;
    double rho_s = 0.0;
};

struct CohesionInput {
    std::vector<double> cohesion;     // s_i per node
    std::vector<double> variance;     // sigma^2_i per node, > 0
    Eigen::MatrixXd d_w;              // n x n weighted shortest distances
    double c_norm = 1.0;
};

/// Min-max normalization of one indicator column. Benefit columns map the
/// maximum to 1; Cost columns map the minimum to 1.
std::vector<double> normalize_column(const std::vector<double>& column,
                                     Orientation orientation);

IndicatorMatrix normalize_matrix(const IndicatorMatrix& m);

double composite_score(const NodeMetrics& metrics, const ScoreWeights& w);

ThroughputRatios throughput_ratios(const ThroughputSnapshot& s);

/// Reciprocal "spread x load" cohesion metric of the node network:
///   1 / ( c_norm * sum_i (s_i / sigma^2_i) * mean_{i != j}(d_ij^w) )
double cohesion(const CohesionInput& input);

} // namespace chainplan::indicators
