#pragma once

#include <vector>

#include "tcdet/association.hpp"
#include "tcdet/frame.hpp"
#include "tcdet/scoring.hpp"
#include "tcdet/tracklet.hpp"

namespace tcdet {

enum class PipelineMode { sequential, integrated };

struct PipelineConfig {
    FusionParams fusion;
    PipelineMode mode = PipelineMode::integrated;
    bool propagate_boxes = false;      // sequential only
    bool rescore_boxes = false;        // sequential only
    bool condition_proposals = false;  // integrated only: candidate pre-filter
    int proposal_budget = 0;           // candidates kept by the pre-filter; 0 keeps all
    int max_inactive = 10;
    double min_output_score = 0.0;  // output rows below this confidence are dropped
    int min_tracklet_length = 1;    // output rows of shorter tracks are dropped
    double spawn_threshold = -1.0;  // negative: derive as min_output_score / 2

    double effective_spawn_threshold() const;
    void validate() const;
};

struct OutputBox {
    int frame = 0;
    int track_id = 0;
    Box box;
    ClassDistribution score;
};

// single-class projection of a multi-class score: best foreground class wins
int argmax_foreground(const ClassDistribution& p);
double max_foreground(const ClassDistribution& p);

struct PipelineResult {
    std::vector<Tracklet> tracklets;             // id order, retired ones included
    std::vector<std::vector<OutputBox>> frames;  // per input frame, post filters
};

// Tracklet-conditioned tracking: candidate scores are reweighted against the
// previous frame's tracklets before suppression, so the candidate consistent
// with an existing track wins.
PipelineResult run_integrated(const std::vector<FrameRecord>& frames,
                              const PipelineConfig& config);

// Late-integration baseline: raw detector scores drive suppression; optional
// box propagation and post-hoc score averaging bolt on afterwards.
PipelineResult run_sequential(const std::vector<FrameRecord>& frames,
                              const PipelineConfig& config);

// Last boxes of active tracklets displaced one frame ahead. The displacement
// comes from a candidate motion hint whose back-shifted box overlaps the
// tracklet, then constant velocity from the last two boxes, then zero.
// Propagated boxes carry the tracklet's running score and embedding.
std::vector<Detection> propagate_box(const std::vector<Tracklet>& tracklets,
                                     const FrameRecord& frame);

// Late rescoring: the score a tracklet's boxes report is the unweighted mean
// of all entry scores. The tracklet itself is not changed.
ClassDistribution rescore_box(const Tracklet& t);

}  // namespace tcdet
