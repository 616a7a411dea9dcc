#include "chainplan/risk.hpp"

#include <cmath>
#include <string>

namespace chainplan::risk {

namespace {

double clamped_sigmoid(double z) {
    if (z > 50.0) z = 50.0;
    if (z < -50.0) z = -50.0;
    return 1.0 / (1.0 + std::exp(-z));
}

double log_likelihood(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = design * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double z = std::clamp(eta(i), -50.0, 50.0);
        // log sigma(z) for y=1, log(1-sigma(z)) for y=0
        ll += y(i) * z - std::log1p(std::exp(z));
    }
    return ll;
}

} // namespace

FactorExtraction extract_factors(const RiskDataset& data, int t) {
    const Eigen::Index n = data.x.rows(), m = data.x.cols();
    if (t < 1 || t > m)
        throw DimensionMismatch("factor count t must satisfy 1 <= t <= m");
    if (n < 2)
        throw DimensionMismatch("need at least 2 samples");

    const Eigen::VectorXd mean = data.x.colwise().mean();
    const Eigen::MatrixXd centered = data.x.rowwise() - mean.transpose();
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::VectorXd evals = eig.eigenvalues();  // ascending
    const double tol = 1e-12 * std::max(1.0, evals(m - 1));
    int positive = 0;
    for (Eigen::Index j = 0; j < m; ++j)
        if (evals(j) > tol) ++positive;
    if (positive < t)
        throw RankDeficient("covariance has only " + std::to_string(positive) +
                            " nonzero eigenvalues, need " + std::to_string(t));

    FactorExtraction out;
    out.model.t = t;
    out.model.mean = mean;
    out.model.loadings.resize(m, t);
    for (int j = 0; j < t; ++j)
        out.model.loadings.col(j) = eig.eigenvectors().col(m - 1 - j);
    out.scores = centered * out.model.loadings;
    return out;
}

LogisticRiskModel fit_logistic(const Eigen::MatrixXd& scores,
                               const Eigen::MatrixXi& outcomes) {
    const Eigen::Index n = scores.rows(), t = scores.cols();
    if (outcomes.rows() != n || outcomes.cols() != kCategories)
        throw DimensionMismatch("outcomes must be n x 4");

    Eigen::MatrixXd design(n, t + 1);
    design.col(0).setOnes();
    design.rightCols(t) = scores;

    LogisticRiskModel model;
    for (int c = 0; c < kCategories; ++c) {
        const Eigen::VectorXd y = outcomes.col(c).cast<double>();
        const double rate = y.mean();
        if (rate <= 0.0 || rate >= 1.0)
            throw Separation("category " + std::to_string(c + 1) +
                             " has a single outcome class");

        Eigen::VectorXd beta = Eigen::VectorXd::Zero(t + 1);
        double ll = log_likelihood(design, y, beta);
        bool converged = false;
        for (int iter = 0; iter < 200; ++iter) {
            Eigen::VectorXd p(n);
            for (Eigen::Index i = 0; i < n; ++i)
                p(i) = clamped_sigmoid(design.row(i).dot(beta));
            const Eigen::VectorXd grad = design.transpose() * (y - p);
            if (grad.norm() <= 1e-6) {
                converged = true;
                break;
            }
            const Eigen::VectorXd w = p.array() * (1.0 - p.array());
            Eigen::MatrixXd hess = design.transpose() * w.asDiagonal() * design;
            hess.diagonal().array() += 1e-10;  // guard near-flat curvature
            const Eigen::VectorXd step = hess.ldlt().solve(grad);

            double alpha = 1.0;
            Eigen::VectorXd candidate = beta + step;
            double cll = log_likelihood(design, y, candidate);
            int halvings = 0;
            while (cll < ll && halvings < 40) {
                alpha *= 0.5;
                candidate = beta + alpha * step;
                cll = log_likelihood(design, y, candidate);
                ++halvings;
            }
            // double precision caps attainable likelihood gains near the
            // optimum; a step that no longer moves beta counts as converged
            // provided the gradient is already small
            if ((candidate - beta).norm() <= 1e-10 * (1.0 + beta.norm()) &&
                grad.norm() <= 1e-4) {
                beta = candidate;
                converged = true;
                break;
            }
            beta = candidate;
            ll = cll;
            if (beta.norm() > 1e3) {
                const Eigen::VectorXd eta = design * beta;
                bool separated = true;
                for (Eigen::Index i = 0; i < n && separated; ++i)
                    separated = (2.0 * y(i) - 1.0) * eta(i) > 0.0;
                if (separated)
                    throw Separation("category " + std::to_string(c + 1) +
                                     " is perfectly separable");
            }
        }
        if (!converged)
            throw NoConvergence("logistic fit for category " +
                                std::to_string(c + 1) +
                                " did not converge in 200 iterations");
        model.intercept[static_cast<std::size_t>(c)] = beta(0);
        model.coeffs[static_cast<std::size_t>(c)] = beta.tail(t);
    }
    return model;
}

std::array<double, kCategories> predict_risk(const LogisticRiskModel& model,
                                             const Eigen::VectorXd& factors) {
    std::array<double, kCategories> q{};
    for (int c = 0; c < kCategories; ++c) {
        const auto& b = model.coeffs[static_cast<std::size_t>(c)];
        if (b.size() != factors.size())
            throw DimensionMismatch("factor vector length does not match model");
        q[static_cast<std::size_t>(c)] = clamped_sigmoid(
            model.intercept[static_cast<std::size_t>(c)] + b.dot(factors));
    }
    return q;
}

double feature_weight_objective(const Eigen::MatrixXd& samples,
                                const Eigen::VectorXd& labels,
                                const Eigen::VectorXd& beta, double beta0,
                                double lambda1, double lambda2) {
    double obj = 0.0;
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
        const double margin = labels(i) * (samples.row(i).dot(beta) + beta0);
        obj += std::max(0.0, 1.0 - margin);
    }
    obj += lambda1 * beta.lpNorm<1>() + 0.5 * lambda2 * beta.squaredNorm();
    return obj;
}

FeatureWeights fit_feature_weights(const Eigen::MatrixXd& samples,
                                   const Eigen::VectorXd& labels,
                                   double lambda1, double lambda2,
                                   int max_iter) {
    const Eigen::Index n = samples.rows(), d = samples.cols();
    if (n < 2 || labels.size() != n)
        throw DimensionMismatch("need at least 2 labeled samples");
    if (lambda1 < 0.0 || lambda2 < 0.0)
        throw InvalidConfig("regularizers must be nonnegative");
    bool pos = false, neg = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (labels(i) > 0) pos = true;
        if (labels(i) < 0) neg = true;
    }
    if (!pos || !neg)
        throw InvalidConfig("both label classes must be present");

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
    double beta0 = 0.0;
    Eigen::VectorXd best_beta = beta;
    double best_beta0 = beta0;
    double best_obj = feature_weight_objective(samples, labels, beta, beta0,
                                               lambda1, lambda2);

    const double step0 = 1.0 / static_cast<double>(n);
    for (int iter = 1; iter <= max_iter; ++iter) {
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(d);
        double grad0 = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double margin = labels(i) * (samples.row(i).dot(beta) + beta0);
            if (margin < 1.0) {
                grad -= labels(i) * samples.row(i).transpose();
                grad0 -= labels(i);
            }
        }
        for (Eigen::Index j = 0; j < d; ++j)
            grad(j) += lambda1 * (beta(j) > 0 ? 1.0 : (beta(j) < 0 ? -1.0 : 0.0));
        grad += lambda2 * beta;

        const double step = step0 / std::sqrt(static_cast<double>(iter));
        beta -= step * grad;
        beta0 -= step * grad0;

        const double obj = feature_weight_objective(samples, labels, beta, beta0,
                                                    lambda1, lambda2);
        if (!std::isfinite(obj))
            throw NoConvergence("feature-weight objective diverged");
        if (obj < best_obj) {
            best_obj = obj;
            best_beta = beta;
            best_beta0 = beta0;
        }
    }
    return {best_beta, best_beta0, lambda1, lambda2};
}

bool is_safe(const LogisticRiskModel& model, const Eigen::VectorXd& factors,
             double q_max) {
    for (double q : predict_risk(model, factors))
        if (q > q_max) return false;
    return true;
}

} // namespace chainplan::risk
