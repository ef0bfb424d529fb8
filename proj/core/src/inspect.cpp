#include "bargrain/inspect.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "bargrain/errors.hpp"

namespace bargrain {

std::vector<WeightedEdge> top_edges(std::vector<WeightedEdge> edges, double top_percent) {
    if (!(top_percent > 0.0 && top_percent <= 100.0)) {
        throw ValidationError("top_percent must lie in (0, 100]");
    }
    std::sort(edges.begin(), edges.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        if (a.source != b.source) return a.source < b.source;
        return a.target < b.target;
    });
    const auto keep = static_cast<std::size_t>(std::ceil(top_percent * static_cast<double>(edges.size()) / 100.0));
    edges.resize(std::min(keep, edges.size()));
    return edges;
}

InspectionReport inspect_subject(const ModelState& state, const BoldMatrix& subject, double top_percent) {
    const SubjectInput input = SubjectInput::prepare(subject, state.config.threshold_c);
    const std::size_t n = subject.n_rois();
    const Matrix corr = input.features.to_matrix();

    InspectionReport report;
    report.filtered.name = "filtered";
    report.filtered.in_degree.assign(n, 0);
    std::vector<WeightedEdge> filtered;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (input.filtered(i, j) == 0.0) continue;
            ++report.filtered.in_degree[i];
            if (i < j) filtered.push_back({i, j, corr(i, j)});
        }
    }
    report.filtered.present_edges = filtered.size();
    report.filtered.edges = top_edges(std::move(filtered), top_percent);

    report.optimal.name = "optimal";
    report.optimal.in_degree.assign(n, 0);
    if (state.scorer) {
        const Matrix theta = edge_probabilities(input.series, *state.scorer).to_matrix();
        const Matrix hard = evaluation_optimal_graph(input, state);
        std::vector<WeightedEdge> optimal;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (hard(i, j) == 0.0) continue;
                ++report.optimal.in_degree[j];
                optimal.push_back({i, j, theta(i, j)});
            }
        }
        report.optimal.present_edges = optimal.size();
        report.optimal.edges = top_edges(std::move(optimal), top_percent);
    }
    return report;
}

std::string edges_csv(const std::vector<WeightedEdge>& edges) {
    std::string out = "source,target,weight\n";
    char buf[64];
    for (const auto& e : edges) {
        std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g\n", e.source, e.target, e.weight);
        out += buf;
    }
    return out;
}

std::vector<WeightedEdge> parse_edges_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "source,target,weight") throw LoadError("edges CSV: missing header");
    std::vector<WeightedEdge> edges;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        WeightedEdge e;
        if (std::sscanf(line.c_str(), "%zu,%zu,%lf", &e.source, &e.target, &e.weight) != 3) {
            throw LoadError("edges CSV: malformed row '" + line + "'");
        }
        edges.push_back(e);
    }
    return edges;
}

std::string degrees_csv(const InspectionReport& report) {
    std::string out = "graph,node_id,in_degree\n";
    for (const GraphInspection* g : {&report.filtered, &report.optimal}) {
        for (std::size_t i = 0; i < g->in_degree.size(); ++i) {
            out += g->name + ',' + std::to_string(i) + ',' + std::to_string(g->in_degree[i]) + '\n';
        }
    }
    return out;
}

}  // namespace bargrain
