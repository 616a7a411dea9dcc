#include "chainplan/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace chainplan::indicators {

void IndicatorMatrix::validate() const {
    if (values.rows() < 2)
        throw NonFinite("indicator matrix needs at least 2 nodes");
    if (values.cols() < 1 ||
        static_cast<std::size_t>(values.cols()) != orientations.size())
        throw DimensionMismatch("orientation count does not match column count");
    if (!values.allFinite())
        throw NonFinite("indicator matrix contains non-finite values");
}

std::vector<double> normalize_column(const std::vector<double>& column,
                                     Orientation orientation) {
    if (column.size() < 2)
        throw DegenerateIndicator("column needs at least 2 entries");
    for (double v : column)
        if (!std::isfinite(v))
            throw NonFinite("non-finite value in indicator column");

    const auto [lo_it, hi_it] = std::minmax_element(column.begin(), column.end());
    const double lo = *lo_it, hi = *hi_it;
    if (hi == lo)
        throw DegenerateIndicator("column is constant (max == min)");

    std::vector<double> out(column.size());
    const double span = hi - lo;
    for (std::size_t i = 0; i < column.size(); ++i) {
        out[i] = orientation == Orientation::Benefit ? (column[i] - lo) / span
                                                     : (hi - column[i]) / span;
    }
    return out;
}

IndicatorMatrix normalize_matrix(const IndicatorMatrix& m) {
    m.validate();
    IndicatorMatrix out = m;
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
        std::vector<double> col(m.values.rows());
        Eigen::VectorXd::Map(col.data(), m.values.rows()) = m.values.col(j);
        try {
            auto norm = normalize_column(col, m.orientations[static_cast<std::size_t>(j)]);
            out.values.col(j) = Eigen::VectorXd::Map(norm.data(), m.values.rows());
        } catch (const DegenerateIndicator&) {
            throw DegenerateIndicator("column " + std::to_string(j) + " is constant");
        }
    }
    return out;
}

double composite_score(const NodeMetrics& metrics, const ScoreWeights& w) {
    const double sum = w.w1 + w.w2 + w.w3;
    if (std::abs(sum - 1.0) > 1e-9)
        throw WeightSumViolation("score weights must sum to 1");
    return w.w1 * metrics.t_coverage + w.w2 * metrics.c_coeff + w.w3 * metrics.q_delay;
}

ThroughputRatios throughput_ratios(const ThroughputSnapshot& s) {
    if (s.c_norm <= 0.0)
        throw NonPositiveNormalizer("c_norm must be > 0");
    return {s.n_i / s.c_norm, s.n_r / s.c_norm, s.n_s / s.c_norm};
}

double cohesion(const CohesionInput& input) {
    const auto n = static_cast<Eigen::Index>(input.cohesion.size());
    if (n < 2 || input.variance.size() != input.cohesion.size() ||
        input.d_w.rows() != n || input.d_w.cols() != n)
        throw DimensionMismatch("cohesion input dimensions inconsistent");

    double load = 0.0;
    for (std::size_t i = 0; i < input.cohesion.size(); ++i) {
        if (input.variance[i] <= 0.0)
            throw NonPositiveNormalizer("sigma^2 must be > 0");
        load += input.cohesion[i] / input.variance[i];
    }

    double dist_sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j) dist_sum += input.d_w(i, j);
    const double mean_dist = dist_sum / static_cast<double>(n * (n - 1));

    const double denom = input.c_norm * load * mean_dist;
    if (denom == 0.0)
        throw ZeroDenominator("cohesion denominator is zero");
    return 1.0 / denom;
}

} // namespace chainplan::indicators
