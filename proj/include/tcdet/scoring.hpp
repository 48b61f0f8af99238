#pragma once

#include <cstddef>
#include <vector>

namespace tcdet {

// Per-class probabilities over C+1 entries; index 0 is background.
class ClassDistribution {
  public:
    ClassDistribution() = default;  // empty; assign before use
    explicit ClassDistribution(std::vector<double> probs);
    static ClassDistribution uniform(int num_classes);

    const std::vector<double>& probs() const { return probs_; }
    double operator[](std::size_t c) const { return probs_[c]; }
    std::size_t size() const { return probs_.size(); }
    int num_classes() const { return static_cast<int>(probs_.size()) - 1; }

    bool operator==(const ClassDistribution& o) const { return probs_ == o.probs_; }

  private:
    std::vector<double> probs_;
};

// Appearance vector with unit L2 norm. Non-unit input is normalized at
// construction; the zero vector is rejected.
class Embedding {
  public:
    Embedding() = default;  // empty; assign before use
    explicit Embedding(std::vector<double> values);

    const std::vector<double>& values() const { return values_; }
    std::size_t dim() const { return values_.size(); }

    bool operator==(const Embedding& o) const { return values_ == o.values_; }

  private:
    std::vector<double> values_;
};

double cosine(const Embedding& a, const Embedding& b);

struct FusionParams {
    double alpha = 1.0;   // balance between detector and tracklet log-likelihoods
    double beta = 0.99;   // rescore decay
    double gamma = 8.0;   // cosine modulation in association weights
    double eta = 0.8;     // embedding moving-average weight
    double r_null = 0.3;  // null-tracklet log-weight
    int num_classes = 1;  // foreground class count C
    double nms_iou = 0.3;
    double edge_min_iou = 0.0;  // exclusive overlap floor for association edges

    void validate() const;  // throws std::invalid_argument
};

// Softmax over [r_null, gamma*cos_1, ..., gamma*cos_m]; index 0 is the null
// tracklet. Output sums to 1.
std::vector<double> association_weights(const Embedding& box_emb,
                                        const std::vector<Embedding>& tracklet_embs,
                                        const FusionParams& params);

// result[c] proportional to p_det[c] * p_tr[c]^alpha, renormalized. Each
// factor is floored at 1e-12 so zero probabilities cannot annihilate a class.
ClassDistribution fuse_scores(const ClassDistribution& p_det,
                              const ClassDistribution& p_tr,
                              double alpha);

// Weighted mixture of per-tracklet fusions; weights[0] pairs p_det with the
// uniform distribution (the null tracklet). weights must have one entry per
// tracklet plus the null slot and sum to 1.
ClassDistribution conditioned_score(const ClassDistribution& p_det,
                                    const std::vector<ClassDistribution>& tracklet_dists,
                                    const std::vector<double>& weights,
                                    const FusionParams& params);

// Probability mass on foreground classes, i.e. everything but index 0.
double foreground_probability(const ClassDistribution& p);

// (1-cos)^2 when the box is a positive example (iou >= 0.5), max(0,cos)^2
// otherwise. Takes the cosine directly so the function stays independent of
// embedding storage.
double tracking_loss(double cos_sim, double iou_with_gt);

// Analytic derivative of tracking_loss with respect to cos_sim.
double tracking_loss_dcos(double cos_sim, double iou_with_gt);

}  // namespace tcdet
