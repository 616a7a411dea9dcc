#include "chainplan/bilevel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace chainplan::bilevel {

namespace {
constexpr double kFeasTol = 1e-9;
constexpr double kTieTol = 1e-9;

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a(i) < b(i)) return true;
        if (a(i) > b(i)) return false;
    }
    return false;
}
} // namespace

void BilevelProblem::validate() const {
    const auto blocks = block_dims.size();
    if (k < 1 || blocks != static_cast<std::size_t>(k + 1))
        throw DimensionMismatch("need k+1 blocks for k followers");
    if (leader_coeffs.size() != blocks || constraint_blocks.size() != blocks ||
        bounds.size() != blocks ||
        follower_coeffs.size() != static_cast<std::size_t>(k))
        throw DimensionMismatch("per-block containers must have k+1 entries");
    for (std::size_t j = 0; j < blocks; ++j) {
        const auto dim = static_cast<Eigen::Index>(block_dims[j]);
        if (dim < 1 || leader_coeffs[j].size() != dim ||
            constraint_blocks[j].cols() != dim ||
            constraint_blocks[j].rows() != rhs.size() ||
            bounds[j].size() != static_cast<std::size_t>(dim))
            throw DimensionMismatch("block " + std::to_string(j) +
                                    " dimensions inconsistent");
        for (const auto& b : bounds[j])
            if (b.lo > b.hi)
                throw InvalidConfig("empty variable box");
    }
    for (const auto& fc : follower_coeffs) {
        if (fc.size() != blocks)
            throw DimensionMismatch("follower coefficients need k+1 blocks");
        for (std::size_t j = 0; j < blocks; ++j)
            if (fc[j].size() != static_cast<Eigen::Index>(block_dims[j]))
                throw DimensionMismatch("follower coefficient block mismatch");
    }
}

int BilevelProblem::total_dim() const {
    int d = 0;
    for (int b : block_dims) d += b;
    return d;
}

Eigen::VectorXd DecisionVector::flat() const {
    Eigen::Index total = 0;
    for (const auto& b : blocks) total += b.size();
    Eigen::VectorXd out(total);
    Eigen::Index at = 0;
    for (const auto& b : blocks) {
        out.segment(at, b.size()) = b;
        at += b.size();
    }
    return out;
}

bool feasible(const BilevelProblem& p, const DecisionVector& x) {
    if (x.blocks.size() != p.block_dims.size())
        throw DimensionMismatch("decision vector block count mismatch");
    for (std::size_t j = 0; j < x.blocks.size(); ++j) {
        if (x.blocks[j].size() != static_cast<Eigen::Index>(p.block_dims[j]))
            throw DimensionMismatch("decision vector block size mismatch");
        for (Eigen::Index i = 0; i < x.blocks[j].size(); ++i) {
            const double v = x.blocks[j](i);
            const auto& b = p.bounds[j][static_cast<std::size_t>(i)];
            if (v < -kFeasTol || v < b.lo - kFeasTol || v > b.hi + kFeasTol)
                return false;
        }
    }
    Eigen::VectorXd lhs = Eigen::VectorXd::Zero(p.rhs.size());
    for (std::size_t j = 0; j < x.blocks.size(); ++j)
        lhs += p.constraint_blocks[j] * x.blocks[j];
    return ((lhs.array() - p.rhs.array()) <= kFeasTol).all();
}

double leader_objective(const BilevelProblem& p, const DecisionVector& x) {
    if (!feasible(p, x))
        throw InfeasibleEvaluation("leader objective requires a feasible point");
    double v = 0.0;
    for (std::size_t j = 0; j < x.blocks.size(); ++j)
        v += p.leader_coeffs[j].dot(x.blocks[j]);
    return v;
}

double follower_objective(const BilevelProblem& p, int v,
                          const DecisionVector& x) {
    if (v < 1 || v > p.k)
        throw DimensionMismatch("follower index out of range");
    double out = 0.0;
    const auto& fc = p.follower_coeffs[static_cast<std::size_t>(v - 1)];
    for (std::size_t j = 0; j < x.blocks.size(); ++j)
        out += fc[j].dot(x.blocks[j]);
    return out;
}

std::vector<double> grid_axis(const Bounds& b, double step) {
    if (!(step > 0.0))
        throw InvalidConfig("grid step must be positive");
    std::vector<double> axis;
    const auto count = static_cast<long>(std::floor((b.hi - b.lo) / step + 1e-12));
    for (long i = 0; i <= count; ++i)
        axis.push_back(b.lo + static_cast<double>(i) * step);
    if (axis.empty() || b.hi - axis.back() > 1e-12) axis.push_back(b.hi);
    return axis;
}

namespace {

/// Visits every grid point of one block; calls fn with the block vector.
template <typename Fn>
void for_each_grid_point(const std::vector<std::vector<double>>& axes, Fn&& fn) {
    const std::size_t dim = axes.size();
    std::vector<std::size_t> idx(dim, 0);
    Eigen::VectorXd point(static_cast<Eigen::Index>(dim));
    while (true) {
        for (std::size_t i = 0; i < dim; ++i)
            point(static_cast<Eigen::Index>(i)) = axes[i][idx[i]];
        fn(point);
        std::size_t at = 0;
        while (at < dim && ++idx[at] == axes[at].size()) {
            idx[at] = 0;
            ++at;
        }
        if (at == dim) break;
    }
}

std::vector<std::vector<double>> block_axes(const BilevelProblem& p,
                                            std::size_t block, double step) {
    std::vector<std::vector<double>> axes;
    for (const auto& b : p.bounds[block]) axes.push_back(grid_axis(b, step));
    return axes;
}

std::size_t axes_size(const std::vector<std::vector<double>>& axes) {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.size();
    return n;
}

} // namespace

ResponseSet follower_best_response(const BilevelProblem& p, int v,
                                   const DecisionVector& conditioning,
                                   double grid_step) {
    p.validate();
    if (v < 1 || v > p.k)
        throw DimensionMismatch("follower index out of range");

    DecisionVector x = conditioning;
    ResponseSet set;
    set.follower = v;
    double best = -std::numeric_limits<double>::infinity();

    const auto axes = block_axes(p, static_cast<std::size_t>(v), grid_step);
    for_each_grid_point(axes, [&](const Eigen::VectorXd& point) {
        x.blocks[static_cast<std::size_t>(v)] = point;
        if (!feasible(p, x)) return;
        const double val = follower_objective(p, v, x);
        if (val > best + kTieTol) {
            best = val;
            set.responses.clear();
            set.responses.push_back({point, val});
        } else if (val >= best - kTieTol) {
            set.responses.push_back({point, val});
        }
    });
    if (set.responses.empty())
        throw EmptyResponse("no feasible grid point for follower " +
                            std::to_string(v));
    return set;
}

OracleSolution oracle_solve(const BilevelProblem& p, double grid_step) {
    p.validate();

    const auto leader_axes = block_axes(p, 0, grid_step);
    std::size_t follower_work = 0;
    for (int v = 1; v <= p.k; ++v)
        follower_work += axes_size(block_axes(p, static_cast<std::size_t>(v), grid_step));
    if (axes_size(leader_axes) * std::max<std::size_t>(follower_work, 1) > 10'000'000)
        throw GridTooLarge("oracle grid exceeds 1e7 evaluations");

    bool found = false;
    OracleSolution best;
    best.leader_value = -std::numeric_limits<double>::infinity();

    for_each_grid_point(leader_axes, [&](const Eigen::VectorXd& leader_point) {
        DecisionVector x;
        x.blocks.resize(p.block_dims.size());
        x.blocks[0] = leader_point;
        // deterministic sweep start: follower blocks at their box lower bounds
        for (int v = 1; v <= p.k; ++v) {
            const auto& bb = p.bounds[static_cast<std::size_t>(v)];
            Eigen::VectorXd lo(static_cast<Eigen::Index>(bb.size()));
            for (std::size_t i = 0; i < bb.size(); ++i)
                lo(static_cast<Eigen::Index>(i)) = std::max(bb[i].lo, 0.0);
            x.blocks[static_cast<std::size_t>(v)] = lo;
        }
        try {
            for (int v = 1; v <= p.k; ++v) {
                const ResponseSet set = follower_best_response(p, v, x, grid_step);
                // optimistic tie-break: leader-best, then lexicographic
                const Response* pick = &set.responses.front();
                double pick_leader =
                    p.leader_coeffs[static_cast<std::size_t>(v)].dot(pick->x_v);
                for (const auto& r : set.responses) {
                    const double lv =
                        p.leader_coeffs[static_cast<std::size_t>(v)].dot(r.x_v);
                    if (lv > pick_leader + kTieTol ||
                        (lv >= pick_leader - kTieTol && lex_less(r.x_v, pick->x_v))) {
                        pick = &r;
                        pick_leader = lv;
                    }
                }
                x.blocks[static_cast<std::size_t>(v)] = pick->x_v;
            }
        } catch (const EmptyResponse&) {
            return;  // leader point has no follower response; skip
        }
        if (!feasible(p, x)) return;
        double value = 0.0;
        for (std::size_t j = 0; j < x.blocks.size(); ++j)
            value += p.leader_coeffs[j].dot(x.blocks[j]);
        if (value > best.leader_value + kTieTol ||
            (found && value >= best.leader_value - kTieTol &&
             lex_less(x.flat(), best.x.flat()))) {
            best.x = x;
            best.leader_value = value;
            found = true;
        } else if (!found && value > best.leader_value) {
            best.x = x;
            best.leader_value = value;
            found = true;
        }
    });
    if (!found)
        throw NoFeasibleSolution("no feasible leader/follower grid point");
    return best;
}

BilevelProblem problem_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    BilevelProblem p;
    p.k = j.at("k").get<int>();
    p.block_dims = j.at("block_dims").get<std::vector<int>>();
    for (const auto& c : j.at("leader_coeffs")) {
        const auto v = c.get<std::vector<double>>();
        p.leader_coeffs.push_back(
            Eigen::VectorXd::Map(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    for (const auto& fc : j.at("follower_coeffs")) {
        std::vector<Eigen::VectorXd> blocks;
        for (const auto& c : fc) {
            const auto v = c.get<std::vector<double>>();
            blocks.push_back(Eigen::VectorXd::Map(
                v.data(), static_cast<Eigen::Index>(v.size())));
        }
        p.follower_coeffs.push_back(std::move(blocks));
    }
    const auto rhs = j.at("rhs").get<std::vector<double>>();
    p.rhs = Eigen::VectorXd::Map(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    for (const auto& a : j.at("constraint_blocks")) {
        const auto rows = a.size();
        const auto cols = a.empty() ? 0 : a.front().size();
        Eigen::MatrixXd mat(rows, cols);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c)
                mat(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    a[r][c].get<double>();
        p.constraint_blocks.push_back(std::move(mat));
    }
    for (const auto& bb : j.at("bounds")) {
        std::vector<Bounds> block;
        for (const auto& b : bb)
            block.push_back({b[0].get<double>(), b[1].get<double>()});
        p.bounds.push_back(std::move(block));
    }
    p.validate();
    return p;
}

std::string problem_to_json(const BilevelProblem& p) {
    nlohmann::json j;
    j["k"] = p.k;
    j["block_dims"] = p.block_dims;
    for (const auto& c : p.leader_coeffs)
        j["leader_coeffs"].push_back(
            std::vector<double>(c.data(), c.data() + c.size()));
    for (const auto& fc : p.follower_coeffs) {
        nlohmann::json blocks = nlohmann::json::array();
        for (const auto& c : fc)
            blocks.push_back(std::vector<double>(c.data(), c.data() + c.size()));
        j["follower_coeffs"].push_back(blocks);
    }
    j["rhs"] = std::vector<double>(p.rhs.data(), p.rhs.data() + p.rhs.size());
    for (const auto& a : p.constraint_blocks) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(a(r, c));
            rows.push_back(row);
        }
        j["constraint_blocks"].push_back(rows);
    }
    for (const auto& bb : p.bounds) {
        nlohmann::json block = nlohmann::json::array();
        for (const auto& b : bb) block.push_back({b.lo, b.hi});
        j["bounds"].push_back(block);
    }
    return j.dump(2);
}

std::string solution_to_json(const OracleSolution& s) {
    nlohmann::json j;
    j["leader_value"] = s.leader_value;
    for (const auto& b : s.x.blocks)
        j["blocks"].push_back(std::vector<double>(b.data(), b.data() + b.size()));
    return j.dump(2);
}

} // namespace chainplan::bilevel
