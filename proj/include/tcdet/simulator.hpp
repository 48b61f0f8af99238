#pragma once

#include <cstdint>
#include <vector>

#include "tcdet/frame.hpp"
#include "tcdet/scoring.hpp"

namespace tcdet {

struct SceneConfig {
    int num_objects = 5;
    int num_frames = 100;
    double image_width = 640.0;
    double image_height = 480.0;
    int num_classes = 4;
    double min_speed = 0.5;  // px/frame
    double max_speed = 4.0;
    double min_size = 20.0;  // box side, px
    double max_size = 60.0;
    double jitter_sigma = 0.0;     // candidate corner noise, px
    int duplicates = 1;            // candidates per visible object
    int embedding_dim = 128;
    double embedding_noise = 0.0;  // appearance noise scale
    double score_confusion = 0.0;  // logit noise on candidate scores
    double distractor_rate = 0.0;  // mean spurious candidates per frame
    double motion_noise = 0.0;     // noise on emitted motion hints, px
    double dropout = 0.0;          // per-object per-frame invisibility
    std::uint64_t seed = 1;

    void validate() const;  // throws std::invalid_argument
};

struct SceneObject {
    int track_id = 0;
    int class_id = 0;
    Embedding identity;
};

struct SyntheticSequence {
    SceneConfig config;
    std::vector<SceneObject> objects;
    std::vector<FrameRecord> frames;  // ground_truth populated
};

// Seeded scene: objects with stratified speeds and sizes bounce inside the
// image; every visible object emits jittered duplicate candidates with
// confusable scores, degraded embeddings, and noisy motion hints, plus
// Poisson distractors. Same config and seed give identical output.
SyntheticSequence generate(const SceneConfig& config);

enum class MotionSpeed { slow, medium, fast };

// mean consecutive-box IoU: > 0.8 slow, >= 0.6 medium, below that fast;
// needs at least two boxes
MotionSpeed motion_speed_of(const std::vector<Box>& boxes);

const char* to_string(MotionSpeed s);

}  // namespace tcdet
