#pragma once

#include <array>
#include <vector>

#include "tcdet/geometry.hpp"
#include "tcdet/scoring.hpp"

namespace tcdet {

// displacement (dx, dy, dw, dh): moves a box to
// (x1+dx, y1+dy, x2+dx+dw, y2+dy+dh)
using Motion = std::array<double, 4>;

inline Box apply_motion(const Box& b, const Motion& m) {
    Box r{b.x1 + m[0], b.y1 + m[1], b.x2 + m[0] + m[2], b.y2 + m[1] + m[3]};
    if (r.x2 < r.x1) r.x2 = r.x1;
    if (r.y2 < r.y1) r.y2 = r.y1;
    return r;
}

struct Detection {
    Box box;
    ClassDistribution scores;  // C+1 entries
    Embedding embedding;
    bool has_motion = false;
    Motion motion{0.0, 0.0, 0.0, 0.0};
};

struct GroundTruthBox {
    int track_id = 0;
    int class_id = 0;  // 1..C
    Box box;
};

struct FrameRecord {
    int frame_index = 0;
    std::vector<Detection> candidates;
    std::vector<GroundTruthBox> ground_truth;
};

}  // namespace tcdet
