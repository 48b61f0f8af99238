#pragma once

#include <vector>

#include "tcdet/geometry.hpp"
#include "tcdet/scoring.hpp"

namespace tcdet {

struct TrackletEntry {
    int frame = 0;
    Box box;
    ClassDistribution score;  // score recorded for this box: conditioned in
                              // integrated mode, raw detector in sequential
};

struct Tracklet {
    int id = -1;
    std::vector<TrackletEntry> entries;  // frames strictly increasing
    ClassDistribution p_tr;              // running class estimate
    Embedding embedding;                 // moving-average appearance
    int inactive_frames = 0;

    int length() const { return static_cast<int>(entries.size()); }
    int last_active_frame() const { return entries.back().frame; }
    const Box& last_box() const { return entries.back().box; }
};

// eta * box_emb + (1 - eta) * tracklet_emb, renormalized to unit length.
// Throws when the blend cancels to the zero vector (antipodal inputs).
Embedding update_embedding(const Embedding& tracklet_emb,
                           const Embedding& box_emb,
                           double eta);

// Decayed running average of per-box scores:
// (fused_box + beta * p_tr_prev * len_prev) / (1 + beta * len_prev).
ClassDistribution rescore(const ClassDistribution& p_tr_prev,
                          int len_prev,
                          const ClassDistribution& fused_box,
                          double beta);

// Appends one box and applies both running updates. frame must be greater
// than the tracklet's last active frame.
void append(Tracklet& t,
            int frame,
            const Box& box,
            const ClassDistribution& fused_score,
            const Embedding& box_emb,
            double beta,
            double eta);

class TrackletStore {
  public:
    // creates an active length-1 tracklet with a fresh id
    Tracklet& create(int frame,
                     const Box& box,
                     const ClassDistribution& score,
                     const Embedding& emb);

    std::vector<Tracklet>& active() { return active_; }
    const std::vector<Tracklet>& active() const { return active_; }
    const std::vector<Tracklet>& terminated() const { return terminated_; }

    Tracklet* find_active(int id);

    // Ages every active tracklet whose last entry predates current_frame and
    // retires those inactive for more than max_inactive frames. Retired
    // tracklets stay in the final output.
    void age_and_retire(int current_frame, int max_inactive);

    // active plus terminated, ordered by id
    std::vector<Tracklet> all() const;

    int next_id() const { return next_id_; }

  private:
    std::vector<Tracklet> active_;
    std::vector<Tracklet> terminated_;
    int next_id_ = 0;
};

}  // namespace tcdet
