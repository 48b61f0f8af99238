#include "tcdet/association.hpp"

#include <algorithm>
#include <stdexcept>

#include "tcdet/hungarian.hpp"

namespace tcdet {

namespace {
// large finite penalty standing in for a missing edge; keeps the solver free
// of infinities while making forbidden pairs unpickable
constexpr double kForbidden = 1e9;
}  // namespace

AssociationGraph build_graph(const std::vector<Tracklet>& tracklets,
                             const std::vector<Detection>& detections,
                             double edge_min_iou) {
    if (!(edge_min_iou >= 0.0 && edge_min_iou < 1.0))
        throw std::invalid_argument("build_graph: edge_min_iou must be in [0,1)");
    std::vector<const Tracklet*> order;
    order.reserve(tracklets.size());
    for (const Tracklet& t : tracklets) order.push_back(&t);
    std::sort(order.begin(), order.end(),
              [](const Tracklet* a, const Tracklet* b) { return a->id < b->id; });

    AssociationGraph g;
    g.num_detections = static_cast<int>(detections.size());
    g.tracklet_ids.reserve(order.size());
    for (const Tracklet* t : order) g.tracklet_ids.push_back(t->id);
    g.weight.assign(order.size(), std::vector<double>(detections.size(), 0.0));
    g.has_edge.assign(order.size(), std::vector<char>(detections.size(), 0));
    for (std::size_t j = 0; j < order.size(); ++j) {
        const Box& last = order[j]->last_box();
        for (std::size_t i = 0; i < detections.size(); ++i) {
            if (iou(last, detections[i].box) > edge_min_iou) {
                g.has_edge[j][i] = 1;
                g.weight[j][i] = cosine(detections[i].embedding, order[j]->embedding);
            }
        }
    }
    return g;
}

AssociationResult solve(const AssociationGraph& graph) {
    const int m = static_cast<int>(graph.tracklet_ids.size());
    const int n = graph.num_detections;
    AssociationResult res;
    if (n == 0) return res;

    // rows = detections, columns = real tracklets then one pseudo per
    // detection; minimizing negated weights maximizes the matching weight
    std::vector<std::vector<double>> cost(n, std::vector<double>(m + n, kForbidden));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j)
            if (graph.has_edge[j][i]) cost[i][j] = -graph.weight[j][i];
        cost[i][m + i] = 0.0;
    }
    const std::vector<int> col = solve_assignment_min(cost);

    res.matches.resize(n);
    for (int i = 0; i < n; ++i) {
        AssociationMatch& match = res.matches[i];
        match.detection_index = i;
        const int j = col[i];
        if (j < m) {
            if (!graph.has_edge[j][i])
                throw std::logic_error("association: forbidden pair selected");
            match.tracklet_id = graph.tracklet_ids[j];
            match.weight = graph.weight[j][i];
        } else {
            if (j != m + i)
                throw std::logic_error("association: pseudo tracklet crossed detections");
            match.tracklet_id = kNewTrack;
            match.weight = 0.0;
        }
    }
    return res;
}

}  // namespace tcdet
