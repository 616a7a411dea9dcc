#pragma once

#include <Eigen/Dense>
#include <array>

#include "chainplan/errors.hpp"

namespace chainplan::risk {

inline constexpr int kCategories = 4;

/// Assessment index values and binary outcomes per risk category.
struct RiskDataset {
    Eigen::MatrixXd x;          // n samples x m indices
    Eigen::MatrixXi outcomes;   // n x 4, entries in {0,1}
};

/// Principal-direction factor model fitted on centered data.
struct FactorModel {
    Eigen::MatrixXd loadings;   // m x t, orthonormal columns
    Eigen::VectorXd mean;       // length m
    int t = 0;

    Eigen::MatrixXd scores(const Eigen::MatrixXd& x) const {
        return (x.rowwise() - mean.transpose()) * loadings;
    }
};

/// Four independent binary logit models over the factor scores.
struct LogisticRiskModel {
    std::array<double, kCategories> intercept{};
    std::array<Eigen::VectorXd, kCategories> coeffs;  // length t each
};

struct FeatureWeights {
    Eigen::VectorXd beta;
    double beta0 = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

struct FactorExtraction {
    FactorModel model;
    Eigen::MatrixXd scores;     // n x t
};

FactorExtraction extract_factors(const RiskDataset& data, int t);

/// Maximum-likelihood fit, one independent Bernoulli logit per category.
/// Damped Newton with step halving; gradient norm tolerance 1e-6, cap 200.
LogisticRiskModel fit_logistic(const Eigen::MatrixXd& scores,
                               const Eigen::MatrixXi& outcomes);

std::array<double, kCategories> predict_risk(const LogisticRiskModel& model,
                                             const Eigen::VectorXd& factors);

/// Elastic-net hinge objective for one weight vector.
double feature_weight_objective(const Eigen::MatrixXd& samples,
                                const Eigen::VectorXd& labels,
                                const Eigen::VectorXd& beta, double beta0,
                                double lambda1, double lambda2);

/// Subgradient descent on the elastic-net hinge loss
///   sum_i [1 - y_i (beta . k_i + beta0)]_+ + l1 ||beta||_1 + l2 ||beta||^2 / 2
FeatureWeights fit_feature_weights(const Eigen::MatrixXd& samples,
                                   const Eigen::VectorXd& labels,
                                   double lambda1, double lambda2,
                                   int max_iter = 5000);

/// First-layer risk gate: a solution is safe when every category probability
/// stays at or below q_max.
bool is_safe(const LogisticRiskModel& model, const Eigen::VectorXd& factors,
             double q_max);

} // namespace chainplan::risk
