#include "tcdet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tcdet {

bool box_valid(const Box& b) {
    return std::isfinite(b.x1) && std::isfinite(b.y1) && std::isfinite(b.x2) &&
           std::isfinite(b.y2) && b.x1 <= b.x2 && b.y1 <= b.y2;
}

double iou(const Box& a, const Box& b) {
    const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return inter / uni;
}

std::vector<int> nms(const std::vector<Box>& boxes,
                     const std::vector<double>& scores,
                     double iou_threshold) {
    if (boxes.size() != scores.size())
        throw std::invalid_argument("nms: boxes and scores differ in length");
    if (!(iou_threshold > 0.0 && iou_threshold < 1.0))
        throw std::invalid_argument("nms: iou_threshold must be in (0,1)");
    for (double s : scores)
        if (!std::isfinite(s)) throw std::invalid_argument("nms: non-finite score");

    std::vector<int> order(boxes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores[a] > scores[b]; });

    std::vector<int> kept;
    for (int idx : order) {
        bool suppressed = false;
        for (int k : kept) {
            if (iou(boxes[idx], boxes[k]) >= iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) kept.push_back(idx);
    }
    return kept;
}

}  // namespace tcdet
