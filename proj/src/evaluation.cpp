#include "tcdet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "tcdet/scoring.hpp"

namespace tcdet {
namespace {

// all-point interpolated AP; counting true positives as integers keeps the
// perfect case at exactly 1.0
double average_precision(const std::vector<char>& is_tp, int num_gt) {
    if (num_gt <= 0) throw std::domain_error("average_precision: no ground truth");
    const int n = static_cast<int>(is_tp.size());
    std::vector<int> tp_prefix(n, 0);
    int running = 0;
    for (int k = 0; k < n; ++k) {
        running += is_tp[k] ? 1 : 0;
        tp_prefix[k] = running;
    }
    double ap_num = 0.0;
    double best_prec = 0.0;
    for (int k = n - 1; k >= 0; --k) {
        const double prec = static_cast<double>(tp_prefix[k]) / static_cast<double>(k + 1);
        best_prec = std::max(best_prec, prec);
        if (is_tp[k]) ap_num += best_prec;
    }
    return ap_num / static_cast<double>(num_gt);
}

double population_std(const std::vector<double>& values) {
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    return std::sqrt(var / n);
}

std::vector<int> sorted_classes(const std::vector<int>& ids) {
    std::set<int> uniq(ids.begin(), ids.end());
    return {uniq.begin(), uniq.end()};
}

// indices into `items`, stable-sorted by descending confidence
template <typename T, typename ConfFn>
std::vector<int> rank_by_confidence(const std::vector<T>& items, ConfFn conf) {
    std::vector<int> order(items.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return conf(items[a]) > conf(items[b]); });
    return order;
}

}  // namespace

void EvalConfig::validate() const {
    if (!(box_iou_threshold > 0.0) || !(box_iou_threshold <= 1.0))
        throw std::invalid_argument("eval: box_iou_threshold must be in (0, 1]");
    if (temporal_thresholds.empty())
        throw std::invalid_argument("eval: temporal_thresholds must be non-empty");
    for (double t : temporal_thresholds)
        if (!(t > 0.0) || !(t <= 1.0))
            throw std::invalid_argument("eval: temporal thresholds must be in (0, 1]");
}

std::vector<EvalTracklet> build_tracklets(const std::vector<TrackRow>& rows) {
    std::map<int, std::vector<EvalBox>> by_track;
    for (const TrackRow& r : rows) {
        if (!box_valid(r.box)) throw std::invalid_argument("build_tracklets: invalid box");
        by_track[r.track_id].push_back({r.frame, r.box, r.confidence, r.class_id});
    }
    std::vector<EvalTracklet> tracklets;
    tracklets.reserve(by_track.size());
    for (auto& [id, boxes] : by_track) {
        std::stable_sort(boxes.begin(), boxes.end(),
                         [](const EvalBox& a, const EvalBox& b) { return a.frame < b.frame; });
        for (size_t i = 1; i < boxes.size(); ++i)
            if (boxes[i].frame == boxes[i - 1].frame)
                throw std::invalid_argument("build_tracklets: duplicate frame within a track");
        std::map<int, int> class_votes;
        double conf_sum = 0.0;
        for (const EvalBox& b : boxes) {
            ++class_votes[b.class_id];
            conf_sum += b.confidence;
        }
        int best_class = class_votes.begin()->first;
        int best_votes = class_votes.begin()->second;
        for (const auto& [cls, votes] : class_votes) {
            if (votes > best_votes) {  // ties keep the smaller class id
                best_class = cls;
                best_votes = votes;
            }
        }
        EvalTracklet t;
        t.track_id = id;
        t.boxes = std::move(boxes);
        t.class_id = best_class;
        t.confidence = conf_sum / static_cast<double>(t.boxes.size());
        tracklets.push_back(std::move(t));
    }
    return tracklets;
}

std::vector<TrackRow> to_rows(const PipelineResult& result) {
    std::vector<TrackRow> rows;
    for (const std::vector<OutputBox>& frame : result.frames) {
        for (const OutputBox& out : frame) {
            TrackRow r;
            r.frame = out.frame;
            r.track_id = out.track_id;
            r.box = out.box;
            r.confidence = max_foreground(out.score);
            r.class_id = argmax_foreground(out.score);
            rows.push_back(r);
        }
    }
    return rows;
}

std::vector<TrackRow> gt_rows(const std::vector<FrameRecord>& frames) {
    std::vector<TrackRow> rows;
    for (const FrameRecord& f : frames)
        for (const GroundTruthBox& g : f.ground_truth)
            rows.push_back({f.frame_index, g.track_id, g.box, 1.0, g.class_id});
    return rows;
}

double map_det(const std::vector<TrackRow>& pred,
               const std::vector<TrackRow>& gt,
               const EvalConfig& cfg) {
    cfg.validate();
    if (gt.empty()) throw std::domain_error("map_det: no ground truth");

    std::vector<int> gt_classes;
    gt_classes.reserve(gt.size());
    for (const TrackRow& g : gt) gt_classes.push_back(g.class_id);

    double ap_sum = 0.0;
    int num_classes = 0;
    for (int cls : sorted_classes(gt_classes)) {
        std::map<int, std::vector<Box>> gt_boxes;   // frame -> boxes
        std::map<int, std::vector<char>> matched;
        int total_gt = 0;
        for (const TrackRow& g : gt) {
            if (g.class_id != cls) continue;
            gt_boxes[g.frame].push_back(g.box);
            ++total_gt;
        }
        for (const auto& [frame, boxes] : gt_boxes) matched[frame].assign(boxes.size(), 0);

        std::vector<TrackRow> preds;
        for (const TrackRow& p : pred)
            if (p.class_id == cls) preds.push_back(p);
        const std::vector<int> order = rank_by_confidence(
            preds, [](const TrackRow& r) { return r.confidence; });

        std::vector<char> is_tp(preds.size(), 0);
        for (size_t rank = 0; rank < order.size(); ++rank) {
            const TrackRow& p = preds[order[rank]];
            auto it = gt_boxes.find(p.frame);
            if (it == gt_boxes.end()) continue;
            std::vector<char>& flags = matched[p.frame];
            int best = -1;
            double best_iou = 0.0;
            for (size_t gi = 0; gi < it->second.size(); ++gi) {
                if (flags[gi]) continue;
                const double ov = iou(p.box, it->second[gi]);
                if (ov > best_iou) {  // ties keep the earlier ground truth
                    best_iou = ov;
                    best = static_cast<int>(gi);
                }
            }
            if (best >= 0 && best_iou >= cfg.box_iou_threshold) {
                flags[best] = 1;
                is_tp[rank] = 1;
            }
        }
        ap_sum += average_precision(is_tp, total_gt);
        ++num_classes;
    }
    return ap_sum / static_cast<double>(num_classes);
}

double temporal_iou(const EvalTracklet& a, const EvalTracklet& b,
                    double box_iou_threshold) {
    size_t i = 0;
    size_t j = 0;
    int matched = 0;
    int joint = 0;
    while (i < a.boxes.size() && j < b.boxes.size()) {
        const int fa = a.boxes[i].frame;
        const int fb = b.boxes[j].frame;
        ++joint;
        if (fa == fb) {
            if (iou(a.boxes[i].box, b.boxes[j].box) >= box_iou_threshold) ++matched;
            ++i;
            ++j;
        } else if (fa < fb) {
            ++i;
        } else {
            ++j;
        }
    }
    joint += static_cast<int>((a.boxes.size() - i) + (b.boxes.size() - j));
    if (joint == 0) return 0.0;
    return static_cast<double>(matched) / static_cast<double>(joint);
}

namespace {

// shared core: `gt` is the evaluated subset, `ignore_gt` the remainder used
// only to absorb out-of-split predictions
double map_track_core(const std::vector<EvalTracklet>& pred,
                      const std::vector<EvalTracklet>& gt,
                      const std::vector<EvalTracklet>& ignore_gt,
                      const EvalConfig& cfg) {
    if (gt.empty()) throw std::domain_error("map_track: no ground truth tracklets");

    std::vector<int> gt_classes;
    gt_classes.reserve(gt.size());
    for (const EvalTracklet& g : gt) gt_classes.push_back(g.class_id);

    double ap_sum = 0.0;
    int cells = 0;
    for (int cls : sorted_classes(gt_classes)) {
        std::vector<const EvalTracklet*> gts;
        for (const EvalTracklet& g : gt)
            if (g.class_id == cls) gts.push_back(&g);
        std::vector<const EvalTracklet*> ignored;
        for (const EvalTracklet& g : ignore_gt)
            if (g.class_id == cls) ignored.push_back(&g);

        std::vector<const EvalTracklet*> preds;
        for (const EvalTracklet& p : pred)
            if (p.class_id == cls) preds.push_back(&p);
        const std::vector<int> order = rank_by_confidence(
            preds, [](const EvalTracklet* t) { return t->confidence; });

        // cache overlaps once per class; a prediction is ignored when an
        // out-of-split ground truth beats every in-split one
        std::vector<std::vector<double>> overlap(preds.size(),
                                                 std::vector<double>(gts.size(), 0.0));
        std::vector<char> ignore_pred(preds.size(), 0);
        for (size_t p = 0; p < preds.size(); ++p) {
            double best_in = 0.0;
            for (size_t g = 0; g < gts.size(); ++g) {
                overlap[p][g] = temporal_iou(*preds[p], *gts[g], cfg.box_iou_threshold);
                best_in = std::max(best_in, overlap[p][g]);
            }
            for (const EvalTracklet* ig : ignored) {
                if (temporal_iou(*preds[p], *ig, cfg.box_iou_threshold) > best_in) {
                    ignore_pred[p] = 1;
                    break;
                }
            }
        }

        for (double tau : cfg.temporal_thresholds) {
            std::vector<char> gt_matched(gts.size(), 0);
            std::vector<char> is_tp;
            is_tp.reserve(order.size());
            for (int idx : order) {
                if (ignore_pred[idx]) continue;
                int best = -1;
                double best_ov = 0.0;
                for (size_t g = 0; g < gts.size(); ++g) {
                    if (gt_matched[g]) continue;
                    if (overlap[idx][g] > best_ov) {  // ties keep the earlier gt
                        best_ov = overlap[idx][g];
                        best = static_cast<int>(g);
                    }
                }
                if (best >= 0 && best_ov >= tau) {
                    gt_matched[best] = 1;
                    is_tp.push_back(1);
                } else {
                    is_tp.push_back(0);
                }
            }
            ap_sum += average_precision(is_tp, static_cast<int>(gts.size()));
            ++cells;
        }
    }
    return ap_sum / static_cast<double>(cells);
}

}  // namespace

double map_track(const std::vector<EvalTracklet>& pred,
                 const std::vector<EvalTracklet>& gt,
                 const EvalConfig& cfg) {
    cfg.validate();
    return map_track_core(pred, gt, {}, cfg);
}

double map_track_split(const std::vector<EvalTracklet>& pred,
                       const std::vector<EvalTracklet>& gt,
                       const EvalConfig& cfg,
                       MotionSpeed split) {
    cfg.validate();
    std::vector<EvalTracklet> in_split;
    std::vector<EvalTracklet> out_split;
    for (const EvalTracklet& g : gt) {
        if (g.boxes.size() < 2) {
            out_split.push_back(g);  // speed undefined: absorb, never evaluate
            continue;
        }
        std::vector<Box> boxes;
        boxes.reserve(g.boxes.size());
        for (const EvalBox& b : g.boxes) boxes.push_back(b.box);
        if (motion_speed_of(boxes) == split)
            in_split.push_back(g);
        else
            out_split.push_back(g);
    }
    if (in_split.empty()) throw std::domain_error("map_track_split: empty split");
    return map_track_core(pred, in_split, out_split, cfg);
}

namespace {

double fragment_rate(const EvalTracklet& gt,
                     const std::unordered_map<int, const EvalBox*>& pred_by_frame,
                     double box_iou_threshold) {
    const int len = static_cast<int>(gt.boxes.size());
    if (len <= 1) return 0.0;
    int transitions = 0;
    bool prev_covered = false;
    bool first = true;
    for (const EvalBox& gb : gt.boxes) {
        bool covered = false;
        auto it = pred_by_frame.find(gb.frame);
        if (it != pred_by_frame.end())
            covered = iou(it->second->box, gb.box) >= box_iou_threshold;
        if (!first && covered != prev_covered) ++transitions;
        prev_covered = covered;
        first = false;
    }
    return static_cast<double>(transitions) / static_cast<double>(len - 1);
}

bool spatial_errors(const EvalTracklet& gt,
                    const std::unordered_map<int, const EvalBox*>& pred_by_frame,
                    double box_iou_threshold,
                    double* center, double* aspect) {
    std::vector<double> ex, ey, er, es;
    for (const EvalBox& gb : gt.boxes) {
        auto it = pred_by_frame.find(gb.frame);
        if (it == pred_by_frame.end()) continue;
        const Box& pb = it->second->box;
        if (iou(pb, gb.box) < box_iou_threshold) continue;
        const double gw = gb.box.width();
        const double gh = gb.box.height();
        ex.push_back((pb.cx() - gb.box.cx()) / gw);
        ey.push_back((pb.cy() - gb.box.cy()) / gh);
        er.push_back((pb.width() / pb.height()) / (gw / gh) - 1.0);
        es.push_back(std::sqrt((pb.width() * pb.height()) / (gw * gh)) - 1.0);
    }
    if (ex.empty()) return false;
    *center = population_std(ex) + population_std(ey);
    *aspect = population_std(er) + population_std(es);
    return true;
}

struct BucketAccumulator {
    std::vector<double> frag_sum, center_sum, aspect_sum;
    std::vector<int> frag_n, spatial_n;
    int gt_count = 0;

    explicit BucketAccumulator(size_t settings)
        : frag_sum(settings, 0.0), center_sum(settings, 0.0), aspect_sum(settings, 0.0),
          frag_n(settings, 0), spatial_n(settings, 0) {}

    SplitStability finalize() const {
        SplitStability out;
        out.gt_count = gt_count;
        if (gt_count == 0) return out;
        double frag = 0.0;
        int frag_settings = 0;
        double center = 0.0, aspect = 0.0;
        int spatial_settings = 0;
        for (size_t s = 0; s < frag_sum.size(); ++s) {
            if (frag_n[s] > 0) {
                frag += frag_sum[s] / frag_n[s];
                ++frag_settings;
            }
            if (spatial_n[s] > 0) {
                center += center_sum[s] / spatial_n[s];
                aspect += aspect_sum[s] / spatial_n[s];
                ++spatial_settings;
            }
        }
        if (frag_settings > 0) out.fragment = frag / frag_settings;
        if (spatial_settings > 0) {
            out.center = center / spatial_settings;
            out.aspect = aspect / spatial_settings;
        }
        return out;
    }
};

}  // namespace

StabilityReport stability(const std::vector<EvalTracklet>& pred,
                          const std::vector<EvalTracklet>& gt,
                          const EvalConfig& cfg) {
    cfg.validate();
    if (gt.empty()) throw std::domain_error("stability: no ground truth tracklets");

    constexpr int kOverall = 0;
    std::vector<int> split_of(gt.size(), kOverall);  // 0 none, 1 slow, 2 medium, 3 fast
    for (size_t g = 0; g < gt.size(); ++g) {
        if (gt[g].boxes.size() < 2) continue;
        std::vector<Box> boxes;
        boxes.reserve(gt[g].boxes.size());
        for (const EvalBox& b : gt[g].boxes) boxes.push_back(b.box);
        switch (motion_speed_of(boxes)) {
            case MotionSpeed::slow: split_of[g] = 1; break;
            case MotionSpeed::medium: split_of[g] = 2; break;
            case MotionSpeed::fast: split_of[g] = 3; break;
        }
    }

    const size_t settings = cfg.temporal_thresholds.size();
    std::vector<BucketAccumulator> buckets(4, BucketAccumulator(settings));
    for (size_t g = 0; g < gt.size(); ++g) {
        ++buckets[kOverall].gt_count;
        if (split_of[g] != kOverall) ++buckets[split_of[g]].gt_count;
    }

    std::vector<std::unordered_map<int, const EvalBox*>> pred_frames(pred.size());
    for (size_t p = 0; p < pred.size(); ++p)
        for (const EvalBox& b : pred[p].boxes) pred_frames[p].emplace(b.frame, &b);

    for (size_t s = 0; s < settings; ++s) {
        const double tau = cfg.temporal_thresholds[s];

        // assign each positive prediction to its best-overlap ground truth
        std::vector<std::vector<int>> assignees(gt.size());
        for (size_t p = 0; p < pred.size(); ++p) {
            int best_g = -1;
            double best_ov = 0.0;
            for (size_t g = 0; g < gt.size(); ++g) {
                if (gt[g].class_id != pred[p].class_id) continue;
                const double ov = temporal_iou(pred[p], gt[g], cfg.box_iou_threshold);
                if (ov > best_ov) {
                    best_ov = ov;
                    best_g = static_cast<int>(g);
                }
            }
            if (best_g >= 0 && best_ov >= tau) assignees[best_g].push_back(static_cast<int>(p));
        }

        for (size_t g = 0; g < gt.size(); ++g) {
            int best_p = -1;
            for (int p : assignees[g]) {
                if (best_p < 0 || pred[p].confidence > pred[best_p].confidence ||
                    (pred[p].confidence == pred[best_p].confidence &&
                     pred[p].track_id < pred[best_p].track_id))
                    best_p = p;
            }
            // a ground truth nothing tracked counts as fully fragmented
            const double frag =
                best_p >= 0 ? fragment_rate(gt[g], pred_frames[best_p], cfg.box_iou_threshold)
                            : 1.0;
            double center = 0.0, aspect = 0.0;
            const bool has_spatial =
                best_p >= 0 && spatial_errors(gt[g], pred_frames[best_p],
                                              cfg.box_iou_threshold, &center, &aspect);
            for (int b : {kOverall, split_of[g]}) {
                buckets[b].frag_sum[s] += frag;
                ++buckets[b].frag_n[s];
                if (has_spatial) {
                    buckets[b].center_sum[s] += center;
                    buckets[b].aspect_sum[s] += aspect;
                    ++buckets[b].spatial_n[s];
                }
                if (split_of[g] == kOverall) break;  // avoid double-counting
            }
        }
    }

    StabilityReport report;
    report.overall = buckets[0].finalize();
    report.slow = buckets[1].finalize();
    report.medium = buckets[2].finalize();
    report.fast = buckets[3].finalize();
    return report;
}

}  // namespace tcdet
