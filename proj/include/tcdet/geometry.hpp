#pragma once

#include <vector>

namespace tcdet {

struct Box {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const { return width() * height(); }
    double cx() const { return 0.5 * (x1 + x2); }
    double cy() const { return 0.5 * (y1 + y2); }
};

// x1 <= x2, y1 <= y2, all coordinates finite
bool box_valid(const Box& b);

// intersection over union; two zero-area boxes give 0 by convention
double iou(const Box& a, const Box& b);

// Greedy non-maximum suppression. Returns indices of kept boxes ordered by
// descending score (equal scores: lower index first). A box is suppressed
// when its IoU with an already-kept box reaches iou_threshold.
std::vector<int> nms(const std::vector<Box>& boxes,
                     const std::vector<double>& scores,
                     double iou_threshold);

}  // namespace tcdet
