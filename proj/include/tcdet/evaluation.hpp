#pragma once

#include <vector>

#include "tcdet/geometry.hpp"
#include "tcdet/pipeline.hpp"
#include "tcdet/simulator.hpp"

namespace tcdet {

struct EvalConfig {
    double box_iou_threshold = 0.5;
    std::vector<double> temporal_thresholds{0.25, 0.5, 0.75};

    void validate() const;  // throws std::invalid_argument
};

// one evaluated box: a track's box at one frame, class-projected
struct TrackRow {
    int frame = 0;
    int track_id = 0;
    Box box;
    double confidence = 0.0;
    int class_id = 0;
};

struct EvalBox {
    int frame = 0;
    Box box;
    double confidence = 0.0;
    int class_id = 0;
};

struct EvalTracklet {
    int track_id = 0;
    std::vector<EvalBox> boxes;  // frame ascending
    int class_id = 0;            // majority over boxes, ties to the smaller id
    double confidence = 0.0;     // mean box confidence
};

// groups rows by track id; rejects duplicate (frame, track_id) pairs
std::vector<EvalTracklet> build_tracklets(const std::vector<TrackRow>& rows);

// pipeline output rows under the best-foreground class projection
std::vector<TrackRow> to_rows(const PipelineResult& result);

// ground-truth rows (confidence 1) from a frame stream
std::vector<TrackRow> gt_rows(const std::vector<FrameRecord>& frames);

// Detection mean average precision: per class, score-ranked predictions
// greedily match unmatched same-frame ground truth at the box IoU threshold;
// all-point interpolated AP, averaged over classes with ground truth.
// Throws std::domain_error when gt is empty.
double map_det(const std::vector<TrackRow>& pred,
               const std::vector<TrackRow>& gt,
               const EvalConfig& cfg);

// Matched frames over frames where either tracklet has a box; a frame
// matches when both boxes are present with IoU at or above the threshold.
double temporal_iou(const EvalTracklet& a, const EvalTracklet& b,
                    double box_iou_threshold);

// Tracklet mean average precision over every (temporal threshold, class)
// cell; a prediction is a true positive when class and temporal IoU agree
// and the ground truth is still unmatched.
double map_track(const std::vector<EvalTracklet>& pred,
                 const std::vector<EvalTracklet>& gt,
                 const EvalConfig& cfg);

// map_track over ground truth restricted to one motion split. Predictions
// whose best-overlap ground truth lies outside the split are ignored rather
// than counted as false positives. Throws std::domain_error when the split
// holds no ground truth.
double map_track_split(const std::vector<EvalTracklet>& pred,
                       const std::vector<EvalTracklet>& gt,
                       const EvalConfig& cfg,
                       MotionSpeed split);

struct SplitStability {
    double fragment = 0.0;  // presence-transition rate along the gt span
    double center = 0.0;    // std of normalized center offsets
    double aspect = 0.0;    // std of aspect and scale ratio deviations
    int gt_count = 0;
};

struct StabilityReport {
    SplitStability overall;
    SplitStability slow;
    SplitStability medium;
    SplitStability fast;
};

// Best-match stability: per temporal threshold, each positive prediction is
// assigned to its highest-overlap ground truth; the highest-confidence
// assignee becomes the best match whose fragment/center/aspect errors are
// averaged over ground-truth tracklets, then over threshold settings. A
// ground truth with no best match counts fragment 1 and skips the spatial
// errors. Throws std::domain_error when gt is empty.
StabilityReport stability(const std::vector<EvalTracklet>& pred,
                          const std::vector<EvalTracklet>& gt,
                          const EvalConfig& cfg);

}  // namespace tcdet
