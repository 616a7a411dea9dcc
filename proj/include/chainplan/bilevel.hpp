#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "chainplan/errors.hpp"

namespace chainplan::bilevel {

struct Bounds {
    double lo = 0.0;
    double hi = 1.0;
};

/// Linear leader/follower program with one leader block (index 0) and k
/// follower blocks (indices 1..k). Joint constraints sum_j A_j x_j <= b,
/// x_j >= 0, box bounds per variable.
struct BilevelProblem {
    std::vector<int> block_dims;                         // k+1 entries
    std::vector<Eigen::VectorXd> leader_coeffs;          // per block
    std::vector<std::vector<Eigen::VectorXd>> follower_coeffs;  // [v][block]
    std::vector<Eigen::MatrixXd> constraint_blocks;      // A_j, rows x dim_j
    Eigen::VectorXd rhs;
    std::vector<std::vector<Bounds>> bounds;             // per block, per var
    int k = 1;

    void validate() const;
    int total_dim() const;
};

struct DecisionVector {
    std::vector<Eigen::VectorXd> blocks;   // k+1 blocks

    Eigen::VectorXd flat() const;
};

struct Response {
    Eigen::VectorXd x_v;
    double value = 0.0;     // follower objective
};

struct ResponseSet {
    int follower = 0;       // 1-based block index
    std::vector<Response> responses;  // all within 1e-9 of the same value
};

bool feasible(const BilevelProblem& p, const DecisionVector& x);

double leader_objective(const BilevelProblem& p, const DecisionVector& x);

double follower_objective(const BilevelProblem& p, int v,
                          const DecisionVector& x);

/// Enumerates follower v's block over the boxed grid with the other blocks
/// fixed; keeps every feasible maximizer of f_v.
ResponseSet follower_best_response(const BilevelProblem& p, int v,
                                   const DecisionVector& conditioning,
                                   double grid_step);

struct OracleSolution {
    DecisionVector x;
    double leader_value = 0.0;
};

/// Exhaustive leader-grid search with one Gauss-Seidel sweep of follower best
/// responses per leader point. Optimistic semantics: ties inside a response
/// set go to the point maximizing the leader objective, then the
/// lexicographically smallest. Guarded at 1e7 grid evaluations.
OracleSolution oracle_solve(const BilevelProblem& p, double grid_step);

/// Grid axis for one variable: lo, lo+step, ..., hi (endpoint always present).
std::vector<double> grid_axis(const Bounds& b, double step);

BilevelProblem problem_from_json(const std::string& text);
std::string problem_to_json(const BilevelProblem& p);
std::string solution_to_json(const OracleSolution& s);

} // namespace chainplan::bilevel
