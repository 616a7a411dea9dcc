#include "chainplan/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include <json.hpp>

namespace chainplan::network {

void NetworkGraph::validate() const {
    if (nodes.empty())
        throw EmptyGraph("graph has no nodes");
    std::unordered_set<int> ids;
    for (const auto& n : nodes) {
        if (!ids.insert(n.id).second)
            throw InvalidConfig("duplicate node id " + std::to_string(n.id));
        if (!std::isfinite(n.importance) || n.importance < 0.0)
            throw NonFinite("node importance must be finite and nonnegative");
    }
    for (const auto& e : edges) {
        if (!ids.count(e.i) || !ids.count(e.j))
            throw InvalidConfig("edge endpoint not in graph");
        if (!(e.weight > 0.0))
            throw NegativeWeight("edge weights must be positive");
    }
}

std::size_t NetworkGraph::index_of(int node_id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].id == node_id) return i;
    throw EmptyGraph("unknown node id " + std::to_string(node_id));
}

DistanceMatrix build_distance_matrix(const NetworkGraph& g) {
    g.validate();
    const auto n = static_cast<Eigen::Index>(g.nodes.size());
    Eigen::MatrixXd d(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto& a = g.nodes[static_cast<std::size_t>(i)];
            const auto& b = g.nodes[static_cast<std::size_t>(j)];
            d(i, j) = i == j ? 0.0 : std::hypot(a.x - b.x, a.y - b.y);
        }
    for (const auto& e : g.edges) {
        const auto i = static_cast<Eigen::Index>(g.index_of(e.i));
        const auto j = static_cast<Eigen::Index>(g.index_of(e.j));
        d(i, j) = e.weight;
        d(j, i) = std::min(d(j, i), e.weight);
    }
    // min-symmetrization
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double m = std::min(d(i, j), d(j, i));
            d(i, j) = d(j, i) = m;
        }
    return {std::move(d)};
}

DistanceMatrix all_pairs_shortest(const DistanceMatrix& m) {
    const Eigen::Index n = m.d.rows();
    if (n == 0)
        throw EmptyGraph("empty distance matrix");
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j && m.d(i, j) < 0.0)
                throw NegativeWeight("distances must be nonnegative");

    Eigen::MatrixXd d = m.d;
    for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
    return {std::move(d)};
}

double path_control(const NetworkGraph& g, int node_id,
                    const std::unordered_set<int>& neighbors,
                    const PathControlParams& p) {
    if (neighbors.empty())
        throw EmptyCandidateSet("neighbor set is empty");
    const double u_i = g.nodes[g.index_of(node_id)].load;
    double acc = 0.0;
    for (int j : neighbors) {
        const double u_j = g.nodes[g.index_of(j)].load;
        const double arg = std::clamp(p.gain * (u_j - u_i), -50.0, 50.0);
        acc += std::exp(arg);
    }
    return p.d_s * acc;
}

double route_satisfaction(const RouteCandidate& c, const NetworkGraph& g) {
    if (c.sequence.size() != c.satisfaction.size())
        throw DimensionMismatch("satisfaction length must match sequence length");
    double m = 0.0;
    for (std::size_t i = 0; i < c.sequence.size(); ++i) {
        const double d = c.satisfaction[i];
        if (d < 0.0 || d > 1.0)
            throw MetricOutOfRange("satisfaction must lie in [0,1]");
        m += g.nodes[g.index_of(c.sequence[i])].importance * d;
    }
    return m;
}

std::pair<RouteCandidate, double> best_route(
    const std::vector<RouteCandidate>& candidates, const NetworkGraph& g) {
    if (candidates.empty())
        throw EmptyCandidateSet("no route candidates");
    const RouteCandidate* best = nullptr;
    double best_m = -std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) {
        const double m = route_satisfaction(c, g);
        if (m > best_m ||
            (m == best_m && c.sequence < best->sequence)) {
            best = &c;
            best_m = m;
        }
    }
    return {*best, best_m};
}

namespace {

void enumerate_paths(const std::vector<std::vector<std::size_t>>& adj,
                     std::size_t current, std::size_t sink,
                     std::vector<std::size_t>& path, std::vector<bool>& visited,
                     std::vector<std::vector<std::size_t>>& out,
                     std::size_t cap) {
    if (out.size() >= cap) return;
    if (current == sink) {
        out.push_back(path);
        return;
    }
    for (std::size_t next : adj[current]) {
        if (visited[next]) continue;
        visited[next] = true;
        path.push_back(next);
        enumerate_paths(adj, next, sink, path, visited, out, cap);
        path.pop_back();
        visited[next] = false;
    }
}

} // namespace

std::vector<std::vector<int>> k_shortest_paths(const NetworkGraph& g,
                                               const DistanceMatrix& closed,
                                               int source_id, int sink_id,
                                               int k) {
    g.validate();
    const std::size_t n = g.nodes.size();
    const std::size_t src = g.index_of(source_id);
    const std::size_t dst = g.index_of(sink_id);

    std::vector<std::vector<std::size_t>> adj(n);
    if (g.edges.empty()) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) adj[i].push_back(j);
    } else {
        for (const auto& e : g.edges) {
            adj[g.index_of(e.i)].push_back(g.index_of(e.j));
            adj[g.index_of(e.j)].push_back(g.index_of(e.i));
        }
        for (auto& a : adj) {
            std::sort(a.begin(), a.end());
            a.erase(std::unique(a.begin(), a.end()), a.end());
        }
    }

    std::vector<std::vector<std::size_t>> paths;
    std::vector<std::size_t> path{src};
    std::vector<bool> visited(n, false);
    visited[src] = true;
    enumerate_paths(adj, src, dst, path, visited, paths, 20000);

    auto length = [&](const std::vector<std::size_t>& p) {
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < p.size(); ++i)
            total += closed.d(static_cast<Eigen::Index>(p[i]),
                              static_cast<Eigen::Index>(p[i + 1]));
        return total;
    };
    std::stable_sort(paths.begin(), paths.end(),
                     [&](const auto& a, const auto& b) {
                         const double la = length(a), lb = length(b);
                         return la != lb ? la < lb : a < b;
                     });
    if (paths.size() > static_cast<std::size_t>(k)) paths.resize(static_cast<std::size_t>(k));

    std::vector<std::vector<int>> out;
    out.reserve(paths.size());
    for (const auto& p : paths) {
        std::vector<int> ids;
        ids.reserve(p.size());
        for (std::size_t idx : p) ids.push_back(g.nodes[idx].id);
        out.push_back(std::move(ids));
    }
    return out;
}

NetworkGraph graph_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    NetworkGraph g;
    for (const auto& n : j.at("nodes")) {
        g.nodes.push_back({n.at("id").get<int>(), n.at("x").get<double>(),
                           n.at("y").get<double>(), n.at("load").get<double>(),
                           n.at("capacity").get<double>(),
                           n.at("importance").get<double>()});
    }
    for (const auto& e : j.value("edges", nlohmann::json::array())) {
        g.edges.push_back({e.at("i").get<int>(), e.at("j").get<int>(),
                           e.at("w").get<double>()});
    }
    g.validate();
    return g;
}

std::string graph_to_json(const NetworkGraph& g) {
    nlohmann::json j;
    j["nodes"] = nlohmann::json::array();
    for (const auto& n : g.nodes)
        j["nodes"].push_back({{"id", n.id}, {"x", n.x}, {"y", n.y},
                              {"load", n.load}, {"capacity", n.capacity},
                              {"importance", n.importance}});
    j["edges"] = nlohmann::json::array();
    for (const auto& e : g.edges)
        j["edges"].push_back({{"i", e.i}, {"j", e.j}, {"w", e.weight}});
    return j.dump(2);
}

} // namespace chainplan::network
