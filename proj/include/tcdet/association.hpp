#pragma once

#include <vector>

#include "tcdet/frame.hpp"
#include "tcdet/tracklet.hpp"

namespace tcdet {

// outcome marker for a detection that starts a new track
inline constexpr int kNewTrack = -1;

// Bipartite graph between active tracklets and one frame's detections. Each
// detection also carries an implicit zero-weight pseudo tracklet, so every
// detection is matchable. Columns are ordered by ascending tracklet id.
struct AssociationGraph {
    std::vector<int> tracklet_ids;
    std::vector<std::vector<double>> weight;  // [tracklet][detection] cosine
    std::vector<std::vector<char>> has_edge;  // [tracklet][detection]
    int num_detections = 0;
};

struct AssociationMatch {
    int detection_index = 0;
    int tracklet_id = kNewTrack;  // kNewTrack when the detection starts a track
    double weight = 0.0;          // cosine for real matches, 0 for new tracks
};

struct AssociationResult {
    std::vector<AssociationMatch> matches;  // one per detection, input order
};

// An edge exists where the tracklet's last box overlaps the detection with
// IoU strictly above edge_min_iou; its weight is the embedding cosine.
AssociationGraph build_graph(const std::vector<Tracklet>& tracklets,
                             const std::vector<Detection>& detections,
                             double edge_min_iou);

// Maximum-total-weight matching. Real tracklets may stay unmatched; every
// detection gets either a tracklet or kNewTrack. Negative-weight edges never
// enter the solution because the zero-weight pseudo edge dominates them.
AssociationResult solve(const AssociationGraph& graph);

}  // namespace tcdet
