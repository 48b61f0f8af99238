#include "tcdet/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace tcdet {

double PipelineConfig::effective_spawn_threshold() const {
    return spawn_threshold < 0.0 ? min_output_score / 2.0 : spawn_threshold;
}

void PipelineConfig::validate() const {
    fusion.validate();
    if (mode == PipelineMode::integrated && (propagate_boxes || rescore_boxes))
        throw std::invalid_argument(
            "PipelineConfig: propagate/rescore apply to sequential mode only");
    if (mode == PipelineMode::sequential && condition_proposals)
        throw std::invalid_argument(
            "PipelineConfig: proposal conditioning applies to integrated mode only");
    if (max_inactive < 0)
        throw std::invalid_argument("PipelineConfig: max_inactive must be >= 0");
    if (!(std::isfinite(min_output_score) && min_output_score >= 0.0 &&
          min_output_score <= 1.0))
        throw std::invalid_argument("PipelineConfig: min_output_score must be in [0,1]");
    if (min_tracklet_length < 1)
        throw std::invalid_argument("PipelineConfig: min_tracklet_length must be >= 1");
    if (spawn_threshold >= 0.0 &&
        !(std::isfinite(spawn_threshold) && spawn_threshold <= 1.0))
        throw std::invalid_argument("PipelineConfig: spawn_threshold must be in [0,1]");
    if (proposal_budget < 0)
        throw std::invalid_argument("PipelineConfig: proposal_budget must be >= 0");
}

int argmax_foreground(const ClassDistribution& p) {
    if (p.size() < 2)
        throw std::invalid_argument("argmax_foreground: empty distribution");
    int best = 1;
    for (std::size_t c = 2; c < p.size(); ++c)
        if (p[c] > p[best]) best = static_cast<int>(c);
    return best;
}

double max_foreground(const ClassDistribution& p) { return p[argmax_foreground(p)]; }

ClassDistribution rescore_box(const Tracklet& t) {
    if (t.entries.empty()) throw std::invalid_argument("rescore_box: empty tracklet");
    std::vector<double> mean(t.entries.front().score.size(), 0.0);
    for (const TrackletEntry& e : t.entries) {
        if (e.score.size() != mean.size())
            throw std::invalid_argument("rescore_box: inconsistent score sizes");
        for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += e.score[c];
    }
    for (double& x : mean) x /= static_cast<double>(t.entries.size());
    return ClassDistribution(std::move(mean));
}

std::vector<Detection> propagate_box(const std::vector<Tracklet>& tracklets,
                                     const FrameRecord& frame) {
    std::vector<Detection> out;
    out.reserve(tracklets.size());
    for (const Tracklet& t : tracklets) {
        const Box& last = t.last_box();
        const int steps = frame.frame_index - t.last_active_frame();
        if (steps <= 0)
            throw std::invalid_argument("propagate_box: frame not ahead of tracklet");

        Motion m{0.0, 0.0, 0.0, 0.0};
        double best = 0.0;
        for (const Detection& d : frame.candidates) {
            if (!d.has_motion) continue;
            // a hint belongs to this tracklet when undoing its displacement
            // lands the candidate on the tracklet's last box
            const Box back = apply_motion(
                d.box, {-d.motion[0], -d.motion[1], -d.motion[2], -d.motion[3]});
            const double ov = iou(back, last);
            if (ov > best) {
                best = ov;
                m = d.motion;
            }
        }
        if (best == 0.0 && t.length() >= 2) {
            // constant velocity from the last two boxes, scaled to the gap
            const TrackletEntry& e1 = t.entries[t.entries.size() - 2];
            const TrackletEntry& e2 = t.entries.back();
            const double s = static_cast<double>(steps) / (e2.frame - e1.frame);
            m = {(e2.box.x1 - e1.box.x1) * s, (e2.box.y1 - e1.box.y1) * s,
                 (e2.box.width() - e1.box.width()) * s,
                 (e2.box.height() - e1.box.height()) * s};
        }

        const Box moved = apply_motion(last, m);
        if (moved.width() <= 0.0 || moved.height() <= 0.0) continue;  // collapsed
        Detection d;
        d.box = moved;
        d.scores = t.p_tr;  // propagated boxes inherit the tracklet's score
        d.embedding = t.embedding;
        out.push_back(std::move(d));
    }
    return out;
}

namespace {

ClassDistribution two_class(const ClassDistribution& p) {
    return ClassDistribution({p[0], foreground_probability(p)});
}

// Keeps the proposal_budget candidates with the highest tracklet-conditioned
// two-class foreground score. Selection only: surviving candidates stay in
// input order.
void filter_proposals(std::vector<Detection>& cands,
                      const std::vector<Embedding>& prior_embs,
                      const std::vector<ClassDistribution>& prior_dists,
                      const FusionParams& fp,
                      int budget) {
    if (budget <= 0 || budget >= static_cast<int>(cands.size())) return;
    FusionParams fg_params = fp;
    fg_params.num_classes = 1;
    std::vector<ClassDistribution> prior_fg;
    prior_fg.reserve(prior_dists.size());
    for (const ClassDistribution& d : prior_dists) prior_fg.push_back(two_class(d));

    std::vector<double> key(cands.size());
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const std::vector<double> w =
            association_weights(cands[i].embedding, prior_embs, fp);
        key[i] = conditioned_score(two_class(cands[i].scores), prior_fg, w, fg_params)[1];
    }
    std::vector<int> order(cands.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return key[a] > key[b]; });
    order.resize(budget);
    std::sort(order.begin(), order.end());
    std::vector<Detection> kept;
    kept.reserve(order.size());
    for (int i : order) kept.push_back(std::move(cands[i]));
    cands = std::move(kept);
}

PipelineResult run(const std::vector<FrameRecord>& frames, const PipelineConfig& cfg) {
    cfg.validate();
    const FusionParams& fp = cfg.fusion;
    const bool integrated = cfg.mode == PipelineMode::integrated;

    TrackletStore store;
    std::vector<std::vector<OutputBox>> out(frames.size());
    bool first = true;
    int prev_frame = 0;

    for (std::size_t fi = 0; fi < frames.size(); ++fi) {
        const FrameRecord& rec = frames[fi];
        if (!first && rec.frame_index <= prev_frame)
            throw std::invalid_argument(
                "pipeline: frame indices must be strictly increasing");
        first = false;
        prev_frame = rec.frame_index;

        for (const Detection& d : rec.candidates) {
            if (!box_valid(d.box))
                throw std::invalid_argument("pipeline: invalid candidate box");
            if (d.scores.num_classes() != fp.num_classes)
                throw std::invalid_argument("pipeline: candidate class count mismatch");
            if (d.embedding.dim() == 0)
                throw std::invalid_argument("pipeline: candidate missing embedding");
        }

        std::vector<Detection> cands = rec.candidates;

        // tracklet state as of the previous frame, fixed for the whole frame
        std::vector<Embedding> prior_embs;
        std::vector<ClassDistribution> prior_dists;
        prior_embs.reserve(store.active().size());
        prior_dists.reserve(store.active().size());
        for (const Tracklet& t : store.active()) {
            prior_embs.push_back(t.embedding);
            prior_dists.push_back(t.p_tr);
        }
        const bool has_priors = !prior_embs.empty();

        if (!integrated && cfg.propagate_boxes && has_priors) {
            std::vector<Detection> prop = propagate_box(store.active(), rec);
            cands.insert(cands.end(), std::make_move_iterator(prop.begin()),
                         std::make_move_iterator(prop.end()));
        }
        if (integrated && cfg.condition_proposals && has_priors)
            filter_proposals(cands, prior_embs, prior_dists, fp, cfg.proposal_budget);

        std::vector<ClassDistribution> scored(cands.size());
        for (std::size_t i = 0; i < cands.size(); ++i) {
            if (integrated && has_priors) {
                const std::vector<double> w =
                    association_weights(cands[i].embedding, prior_embs, fp);
                scored[i] = conditioned_score(cands[i].scores, prior_dists, w, fp);
            } else {
                scored[i] = cands[i].scores;
            }
        }

        std::vector<Box> boxes(cands.size());
        std::vector<double> nms_scores(cands.size());
        for (std::size_t i = 0; i < cands.size(); ++i) {
            boxes[i] = cands[i].box;
            nms_scores[i] = max_foreground(scored[i]);
        }
        const std::vector<int> keep = nms(boxes, nms_scores, fp.nms_iou);

        std::vector<Detection> kept_dets;
        std::vector<ClassDistribution> kept_scores;
        kept_dets.reserve(keep.size());
        kept_scores.reserve(keep.size());
        for (int k : keep) {
            kept_dets.push_back(cands[k]);
            kept_scores.push_back(scored[k]);
        }

        const AssociationResult assoc =
            solve(build_graph(store.active(), kept_dets, fp.edge_min_iou));

        const double spawn = cfg.effective_spawn_threshold();
        const bool late_rescore = !integrated && cfg.rescore_boxes;
        for (std::size_t k = 0; k < kept_dets.size(); ++k) {
            const AssociationMatch& match = assoc.matches[k];
            const Detection& det = kept_dets[k];
            const ClassDistribution& s = kept_scores[k];
            if (match.tracklet_id != kNewTrack) {
                Tracklet* t = store.find_active(match.tracklet_id);
                append(*t, rec.frame_index, det.box, s, det.embedding, fp.beta, fp.eta);
                out[fi].push_back({rec.frame_index, t->id, det.box,
                                   late_rescore ? rescore_box(*t) : s});
            } else if (foreground_probability(s) > spawn) {
                Tracklet& t = store.create(rec.frame_index, det.box, s, det.embedding);
                out[fi].push_back(
                    {rec.frame_index, t.id, det.box, late_rescore ? rescore_box(t) : s});
            }
        }

        store.age_and_retire(rec.frame_index, cfg.max_inactive);
    }

    PipelineResult result;
    result.tracklets = store.all();

    // length and score floors drop output rows; surviving rows are untouched
    std::unordered_set<int> long_enough;
    for (const Tracklet& t : result.tracklets)
        if (t.length() >= cfg.min_tracklet_length) long_enough.insert(t.id);
    for (auto& rows : out) {
        std::vector<OutputBox> survivors;
        survivors.reserve(rows.size());
        for (OutputBox& r : rows) {
            if (!long_enough.count(r.track_id)) continue;
            if (max_foreground(r.score) < cfg.min_output_score) continue;
            survivors.push_back(std::move(r));
        }
        rows = std::move(survivors);
    }
    result.frames = std::move(out);
    return result;
}

}  // namespace

PipelineResult run_integrated(const std::vector<FrameRecord>& frames,
                              const PipelineConfig& config) {
    PipelineConfig c = config;
    c.mode = PipelineMode::integrated;
    return run(frames, c);
}

PipelineResult run_sequential(const std::vector<FrameRecord>& frames,
                              const PipelineConfig& config) {
    PipelineConfig c = config;
    c.mode = PipelineMode::sequential;
    return run(frames, c);
}

}  // namespace tcdet
