#include "tcdet/scoring.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace tcdet {

namespace {
constexpr double kProbFloor = 1e-12;
constexpr double kSumTol = 1e-9;
}  // namespace

ClassDistribution::ClassDistribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
    if (probs_.size() < 2)
        throw std::invalid_argument(
            "ClassDistribution: need background plus at least one class");
    double sum = 0.0;
    for (double p : probs_) {
        if (!std::isfinite(p) || p < -kSumTol || p > 1.0 + kSumTol)
            throw std::invalid_argument("ClassDistribution: entry outside [0,1]");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTol)
        throw std::invalid_argument("ClassDistribution: entries must sum to 1");
    for (double& p : probs_) p = std::clamp(p, 0.0, 1.0);
}

ClassDistribution ClassDistribution::uniform(int num_classes) {
    if (num_classes < 1)
        throw std::invalid_argument("ClassDistribution::uniform: num_classes must be >= 1");
    return ClassDistribution(
        std::vector<double>(num_classes + 1, 1.0 / (num_classes + 1)));
}

Embedding::Embedding(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("Embedding: empty vector");
    double sq = 0.0;
    for (double v : values_) {
        if (!std::isfinite(v)) throw std::invalid_argument("Embedding: non-finite entry");
        sq += v * v;
    }
    if (!std::isfinite(sq)) throw std::invalid_argument("Embedding: norm overflow");
    if (sq <= 0.0) throw std::invalid_argument("Embedding: zero vector");
    // already-unit input is kept bit-for-bit; anything else is normalized
    if (std::abs(sq - 1.0) > 1e-12) {
        const double inv = 1.0 / std::sqrt(sq);
        for (double& v : values_) v *= inv;
    }
}

double cosine(const Embedding& a, const Embedding& b) {
    if (a.dim() == 0 || a.dim() != b.dim())
        throw std::invalid_argument("cosine: dimension mismatch");
    double dot = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) dot += a.values()[i] * b.values()[i];
    return std::clamp(dot, -1.0, 1.0);
}

void FusionParams::validate() const {
    if (!(std::isfinite(alpha) && alpha >= 0.0))
        throw std::invalid_argument("FusionParams: alpha must be >= 0");
    if (!(std::isfinite(beta) && beta > 0.0 && beta <= 1.0))
        throw std::invalid_argument("FusionParams: beta must be in (0,1]");
    if (!(std::isfinite(gamma) && gamma > 0.0))
        throw std::invalid_argument("FusionParams: gamma must be > 0");
    if (!(std::isfinite(eta) && eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("FusionParams: eta must be in (0,1]");
    if (!std::isfinite(r_null))
        throw std::invalid_argument("FusionParams: r_null must be finite");
    if (num_classes < 1)
        throw std::invalid_argument("FusionParams: num_classes must be >= 1");
    if (!(std::isfinite(nms_iou) && nms_iou > 0.0 && nms_iou < 1.0))
        throw std::invalid_argument("FusionParams: nms_iou must be in (0,1)");
    if (!(std::isfinite(edge_min_iou) && edge_min_iou >= 0.0 && edge_min_iou < 1.0))
        throw std::invalid_argument("FusionParams: edge_min_iou must be in [0,1)");
}

std::vector<double> association_weights(const Embedding& box_emb,
                                        const std::vector<Embedding>& tracklet_embs,
                                        const FusionParams& params) {
    std::vector<double> logits;
    logits.reserve(tracklet_embs.size() + 1);
    logits.push_back(params.r_null);
    for (const Embedding& e : tracklet_embs)
        logits.push_back(params.gamma * cosine(box_emb, e));

    const double top = *std::max_element(logits.begin(), logits.end());
    std::vector<double> w(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = std::exp(logits[i] - top);
        sum += w[i];
    }
    for (double& x : w) x /= sum;
    return w;
}

ClassDistribution fuse_scores(const ClassDistribution& p_det,
                              const ClassDistribution& p_tr,
                              double alpha) {
    if (p_det.size() == 0 || p_det.size() != p_tr.size())
        throw std::invalid_argument("fuse_scores: distribution size mismatch");
    if (!(std::isfinite(alpha) && alpha >= 0.0))
        throw std::invalid_argument("fuse_scores: alpha must be >= 0");
    std::vector<double> r(p_det.size());
    double sum = 0.0;
    for (std::size_t c = 0; c < r.size(); ++c) {
        const double det = std::max(p_det[c], kProbFloor);
        const double tr = std::max(p_tr[c], kProbFloor);
        r[c] = det * std::pow(tr, alpha);
        sum += r[c];
    }
    assert(sum > 0.0);  // unreachable after flooring
    for (double& x : r) x /= sum;
    return ClassDistribution(std::move(r));
}

ClassDistribution conditioned_score(const ClassDistribution& p_det,
                                    const std::vector<ClassDistribution>& tracklet_dists,
                                    const std::vector<double>& weights,
                                    const FusionParams& params) {
    if (p_det.size() == 0)
        throw std::invalid_argument("conditioned_score: empty detector distribution");
    if (p_det.num_classes() != params.num_classes)
        throw std::invalid_argument("conditioned_score: num_classes mismatch");
    if (weights.size() != tracklet_dists.size() + 1)
        throw std::invalid_argument(
            "conditioned_score: weight count must be tracklet count + 1");
    double wsum = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w) || w < 0.0)
            throw std::invalid_argument("conditioned_score: weights must be nonnegative");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > kSumTol)
        throw std::invalid_argument("conditioned_score: weights must sum to 1");

    const ClassDistribution null_prior = ClassDistribution::uniform(params.num_classes);
    std::vector<double> acc(p_det.size(), 0.0);
    for (std::size_t j = 0; j < weights.size(); ++j) {
        if (weights[j] == 0.0) continue;
        const ClassDistribution& prior = (j == 0) ? null_prior : tracklet_dists[j - 1];
        if (prior.size() != p_det.size())
            throw std::invalid_argument("conditioned_score: distribution size mismatch");
        const ClassDistribution fused = fuse_scores(p_det, prior, params.alpha);
        for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += weights[j] * fused[c];
    }
    return ClassDistribution(std::move(acc));
}

double foreground_probability(const ClassDistribution& p) {
    if (p.size() == 0)
        throw std::invalid_argument("foreground_probability: empty distribution");
    double fg = 0.0;
    for (std::size_t c = 1; c < p.size(); ++c) fg += p[c];
    return fg;
}

namespace {
void check_loss_args(double cos_sim, double iou_with_gt) {
    if (!(cos_sim >= -1.0 && cos_sim <= 1.0))
        throw std::invalid_argument("tracking_loss: cos_sim outside [-1,1]");
    if (!(iou_with_gt >= 0.0 && iou_with_gt <= 1.0))
        throw std::invalid_argument("tracking_loss: iou outside [0,1]");
}
}  // namespace

double tracking_loss(double cos_sim, double iou_with_gt) {
    check_loss_args(cos_sim, iou_with_gt);
    if (iou_with_gt >= 0.5) {
        const double d = 1.0 - cos_sim;
        return d * d;
    }
    const double c = std::max(0.0, cos_sim);
    return c * c;
}

double tracking_loss_dcos(double cos_sim, double iou_with_gt) {
    check_loss_args(cos_sim, iou_with_gt);
    if (iou_with_gt >= 0.5) return -2.0 * (1.0 - cos_sim);
    return 2.0 * std::max(0.0, cos_sim);
}

}  // namespace tcdet
