#include "tcdet/tracklet.hpp"

#include <algorithm>
#include <stdexcept>

namespace tcdet {

Embedding update_embedding(const Embedding& tracklet_emb,
                           const Embedding& box_emb,
                           double eta) {
    if (tracklet_emb.dim() == 0 || tracklet_emb.dim() != box_emb.dim())
        throw std::invalid_argument("update_embedding: dimension mismatch");
    if (!(eta > 0.0 && eta <= 1.0))
        throw std::invalid_argument("update_embedding: eta must be in (0,1]");
    std::vector<double> v(tracklet_emb.dim());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = eta * box_emb.values()[i] + (1.0 - eta) * tracklet_emb.values()[i];
    return Embedding(std::move(v));  // rejects the antipodal zero-sum case
}

ClassDistribution rescore(const ClassDistribution& p_tr_prev,
                          int len_prev,
                          const ClassDistribution& fused_box,
                          double beta) {
    if (p_tr_prev.size() == 0 || p_tr_prev.size() != fused_box.size())
        throw std::invalid_argument("rescore: distribution size mismatch");
    if (len_prev < 1) throw std::invalid_argument("rescore: len_prev must be >= 1");
    if (!(beta >= 0.0 && beta <= 1.0))
        throw std::invalid_argument("rescore: beta must be in [0,1]");
    const double denom = 1.0 + beta * len_prev;
    std::vector<double> r(p_tr_prev.size());
    for (std::size_t c = 0; c < r.size(); ++c)
        r[c] = (fused_box[c] + beta * p_tr_prev[c] * len_prev) / denom;
    return ClassDistribution(std::move(r));
}

void append(Tracklet& t,
            int frame,
            const Box& box,
            const ClassDistribution& fused_score,
            const Embedding& box_emb,
            double beta,
            double eta) {
    if (t.entries.empty()) throw std::invalid_argument("append: empty tracklet");
    if (frame <= t.last_active_frame())
        throw std::invalid_argument("append: frame must be after the last active frame");
    t.p_tr = rescore(t.p_tr, t.length(), fused_score, beta);
    t.embedding = update_embedding(t.embedding, box_emb, eta);
    t.entries.push_back({frame, box, fused_score});
    t.inactive_frames = 0;
}

Tracklet& TrackletStore::create(int frame,
                                const Box& box,
                                const ClassDistribution& score,
                                const Embedding& emb) {
    Tracklet t;
    t.id = next_id_++;
    t.p_tr = score;
    t.embedding = emb;
    t.entries.push_back({frame, box, score});
    active_.push_back(std::move(t));
    return active_.back();
}

Tracklet* TrackletStore::find_active(int id) {
    for (Tracklet& t : active_)
        if (t.id == id) return &t;
    return nullptr;
}

void TrackletStore::age_and_retire(int current_frame, int max_inactive) {
    if (max_inactive < 0)
        throw std::invalid_argument("age_and_retire: max_inactive must be >= 0");
    std::vector<Tracklet> still_active;
    still_active.reserve(active_.size());
    for (Tracklet& t : active_) {
        if (t.last_active_frame() < current_frame) {
            ++t.inactive_frames;
            if (t.inactive_frames > max_inactive) {
                terminated_.push_back(std::move(t));
                continue;
            }
        }
        still_active.push_back(std::move(t));
    }
    active_ = std::move(still_active);
}

std::vector<Tracklet> TrackletStore::all() const {
    std::vector<Tracklet> out;
    out.reserve(active_.size() + terminated_.size());
    out.insert(out.end(), active_.begin(), active_.end());
    out.insert(out.end(), terminated_.begin(), terminated_.end());
    std::sort(out.begin(), out.end(),
              [](const Tracklet& a, const Tracklet& b) { return a.id < b.id; });
    return out;
}

}  // namespace tcdet
