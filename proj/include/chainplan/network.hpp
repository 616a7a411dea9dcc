#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <unordered_set>
#include <vector>

#include "chainplan/errors.hpp"

namespace chainplan::network {

struct Node {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
    double load = 0.0;        // U_i
    double capacity = 0.0;
    double importance = 0.0;  // theta_i
};

struct Edge {
    int i = 0;
    int j = 0;
    double weight = 0.0;      // > 0
};

struct NetworkGraph {
    std::vector<Node> nodes;
    std::vector<Edge> edges;

    void validate() const;
    std::size_t index_of(int node_id) const;  // throws EmptyGraph on unknown id
};

/// Symmetric nonnegative node distance matrix with zero diagonal.
struct DistanceMatrix {
    Eigen::MatrixXd d;
};

struct PathControlParams {
    double d_s = 1.0;   // equivalent constraint quantity
    double gain = 1.0;  // exponent gain g
};

struct RouteCandidate {
    std::vector<int> sequence;            // distinct node ids
    std::vector<double> satisfaction;     // d_i in [0,1], one per visited node
};

/// Direct distances: edge weight where an edge exists, Euclidean coordinate
/// distance otherwise; symmetrized by the elementwise minimum.
DistanceMatrix build_distance_matrix(const NetworkGraph& g);

/// Shortest-path closure (Floyd-Warshall). Result satisfies the triangle
/// inequality exactly and is idempotent under re-closure.
DistanceMatrix all_pairs_shortest(const DistanceMatrix& m);

/// Path-control value theta = d_s(i) * sum_{j in omega} exp(g * (U_j - U_i)).
/// The exponent argument is clamped to +/-50.
double path_control(const NetworkGraph& g, int node_id,
                    const std::unordered_set<int>& neighbors,
                    const PathControlParams& p);

double route_satisfaction(const RouteCandidate& c, const NetworkGraph& g);

/// Argmax of M = sum_i theta_i * d_i over candidates; ties broken by the
/// lexicographically smallest node sequence.
std::pair<RouteCandidate, double> best_route(
    const std::vector<RouteCandidate>& candidates, const NetworkGraph& g);

/// Up to k loop-free paths between source and sink, ordered by total closed
/// distance (shortest first). Enumeration is bounded for small graphs.
std::vector<std::vector<int>> k_shortest_paths(const NetworkGraph& g,
                                               const DistanceMatrix& closed,
                                               int source_id, int sink_id,
                                               int k = 10);

NetworkGraph graph_from_json(const std::string& text);
std::string graph_to_json(const NetworkGraph& g);

} // namespace chainplan::network
