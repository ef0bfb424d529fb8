#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "bargrain/model.hpp"

namespace bargrain {

struct WeightedEdge {
    std::size_t source = 0;
    std::size_t target = 0;
    double weight = 0.0;

    bool operator==(const WeightedEdge&) const = default;
};

struct GraphInspection {
    std::string name;                 // "filtered" or "optimal"
    std::size_t present_edges = 0;    // edges in the whole graph
    std::vector<WeightedEdge> edges;  // top share of edges, heaviest first
    std::vector<std::size_t> in_degree;  // over the whole graph, one entry per node
};

// Filtered edges are undirected and listed once with source < target,
// weighted by the correlation. Optimal edges are directed pairs (row i =
// source) weighted by theta. In-degree of the filtered graph counts
// incident edges; of the optimal graph, edges whose target is the node.
struct InspectionReport {
    GraphInspection filtered;
    GraphInspection optimal;
};

/// Keeps ceil(top_percent% of present edges), ordered by weight descending
/// with ties broken by (source, target) ascending.
std::vector<WeightedEdge> top_edges(std::vector<WeightedEdge> edges, double top_percent);

/// Both graphs of one subject: the thresholded correlation graph with the
/// model's c, and the hardened noise-free optimal graph. A model without an
/// edge scorer yields an empty optimal graph.
InspectionReport inspect_subject(const ModelState& state, const BoldMatrix& subject, double top_percent);

// source,target,weight
std::string edges_csv(const std::vector<WeightedEdge>& edges);
std::vector<WeightedEdge> parse_edges_csv(const std::string& text);
// graph,node_id,in_degree
std::string degrees_csv(const InspectionReport& report);

}  // namespace bargrain
