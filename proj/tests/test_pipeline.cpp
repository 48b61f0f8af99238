#include "doctest.h"

#include <cmath>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "tcdet/pipeline.hpp"

using namespace tcdet;

namespace {

Embedding at_angle(double theta) {
    return Embedding({std::cos(theta), std::sin(theta)});
}

Detection make_det(const Box& box, std::vector<double> scores, const Embedding& emb) {
    Detection d;
    d.box = box;
    d.scores = ClassDistribution(std::move(scores));
    d.embedding = emb;
    return d;
}

std::vector<double> random_distribution(std::mt19937& rng, int size) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> p(size);
    double sum = 0.0;
    for (double& v : p) {
        v = u(rng);
        sum += v;
    }
    for (double& v : p) v /= sum;
    return p;
}

// conditioned foreground probability for one candidate against one tracklet,
// written straight from the definitions (C=1)
double walkthrough_fg(double raw_bg, double raw_fg, double cos_sim,
                      double tr_bg, double tr_fg, const FusionParams& fp) {
    const double z = std::exp(fp.r_null) + std::exp(fp.gamma * cos_sim);
    const double w_null = std::exp(fp.r_null) / z;
    const double w_tr = std::exp(fp.gamma * cos_sim) / z;
    const double fused_tr = raw_fg * tr_fg / (raw_fg * tr_fg + raw_bg * tr_bg);
    return w_tr * fused_tr + w_null * raw_fg;
}

bool same_box(const Box& a, const Box& b, double tol = 1e-12) {
    return std::abs(a.x1 - b.x1) <= tol && std::abs(a.y1 - b.y1) <= tol &&
           std::abs(a.x2 - b.x2) <= tol && std::abs(a.y2 - b.y2) <= tol;
}

// one object seen as the same candidate in every listed frame
std::vector<FrameRecord> constant_frames(const std::vector<int>& frame_indices,
                                         const Detection& det) {
    std::vector<FrameRecord> frames;
    for (int f : frame_indices) {
        FrameRecord rec;
        rec.frame_index = f;
        rec.candidates.push_back(det);
        frames.push_back(std::move(rec));
    }
    return frames;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("argmax over foreground classes ignores the background mass") {
    CHECK(argmax_foreground(ClassDistribution({0.2, 0.5, 0.3})) == 1);
    CHECK(argmax_foreground(ClassDistribution({0.6, 0.1, 0.3})) == 2);
    CHECK(max_foreground(ClassDistribution({0.6, 0.1, 0.3})) == 0.3);
    CHECK_THROWS_AS(argmax_foreground(ClassDistribution()), std::invalid_argument);
}

TEST_CASE("spawn threshold defaults to half the output floor") {
    PipelineConfig cfg;
    cfg.min_output_score = 0.6;
    CHECK(cfg.effective_spawn_threshold() == 0.3);
    cfg.spawn_threshold = 0.2;
    CHECK(cfg.effective_spawn_threshold() == 0.2);
    cfg.spawn_threshold = 0.0;
    CHECK(cfg.effective_spawn_threshold() == 0.0);
}

TEST_CASE("config validation rejects cross-mode flags and bad ranges") {
    PipelineConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    PipelineConfig bad = cfg;
    bad.mode = PipelineMode::integrated;
    bad.propagate_boxes = true;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.mode = PipelineMode::integrated;
    bad.rescore_boxes = true;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.mode = PipelineMode::sequential;
    bad.condition_proposals = true;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.max_inactive = -1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.min_output_score = 1.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.min_tracklet_length = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.spawn_threshold = 1.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.proposal_budget = -1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("a single frame reduces to detection plus suppression") {
    std::mt19937 rng(70);
    FrameRecord rec;
    rec.frame_index = 0;
    std::uniform_real_distribution<double> pos(0.0, 40.0);
    std::uniform_real_distribution<double> ang(0.0, 6.28);
    for (int i = 0; i < 8; ++i) {
        const double x = pos(rng), y = pos(rng);
        rec.candidates.push_back(make_det(Box{x, y, x + 12, y + 12},
                                          random_distribution(rng, 2),
                                          at_angle(ang(rng))));
    }
    PipelineConfig cfg;
    cfg.fusion.num_classes = 1;

    std::vector<Box> boxes;
    std::vector<double> scores;
    for (const Detection& d : rec.candidates) {
        boxes.push_back(d.box);
        scores.push_back(max_foreground(d.scores));
    }
    const std::vector<int> keep = nms(boxes, scores, cfg.fusion.nms_iou);

    for (PipelineMode mode : {PipelineMode::integrated, PipelineMode::sequential}) {
        cfg.mode = mode;
        const PipelineResult res = mode == PipelineMode::integrated
                                       ? run_integrated({rec}, cfg)
                                       : run_sequential({rec}, cfg);
        REQUIRE(res.frames.size() == 1);
        REQUIRE(res.frames[0].size() == keep.size());
        for (size_t k = 0; k < keep.size(); ++k) {
            CHECK(same_box(res.frames[0][k].box, boxes[keep[k]]));
            CHECK(res.frames[0][k].score == rec.candidates[keep[k]].scores);
        }
    }
}

TEST_CASE("the same candidate twice becomes one tracklet of length two") {
    const Detection det =
        make_det(Box{0, 0, 10, 10}, {0.2, 0.8}, at_angle(0.0));
    PipelineConfig cfg;
    const PipelineResult res = run_integrated(constant_frames({0, 1}, det), cfg);
    REQUIRE(res.tracklets.size() == 1);
    CHECK(res.tracklets[0].length() == 2);
    CHECK(res.tracklets[0].entries[0].frame == 0);
    CHECK(res.tracklets[0].entries[1].frame == 1);
    REQUIRE(res.frames.size() == 2);
    CHECK(res.frames[0].size() == 1);
    CHECK(res.frames[1].size() == 1);
    CHECK(res.frames[0][0].track_id == res.frames[1][0].track_id);
}

TEST_CASE("conditioning flips the suppression winner toward the track") {
    // frame 0 establishes a tracklet with p_tr=[0.1,0.9] and embedding (1,0);
    // frame 1 offers two overlapping candidates: one consistent with the
    // track (cos 0.98, raw fg 0.85) and a fresher-looking impostor
    // (cos -0.5, raw fg 0.90)
    const Box box_a{0, 0, 10, 10};
    const Box box_b{1, 0, 11, 10};
    const Detection seed = make_det(box_a, {0.1, 0.9}, at_angle(0.0));
    const Detection consistent =
        make_det(box_a, {0.15, 0.85}, at_angle(std::acos(0.98)));
    const Detection impostor =
        make_det(box_b, {0.10, 0.90}, at_angle(std::acos(-0.5)));

    FrameRecord f0;
    f0.frame_index = 0;
    f0.candidates.push_back(seed);
    FrameRecord f1;
    f1.frame_index = 1;
    f1.candidates.push_back(consistent);
    f1.candidates.push_back(impostor);

    PipelineConfig cfg;  // defaults: alpha 1, gamma 8, r_null 0.3, nms 0.3
    const PipelineResult inte = run_integrated({f0, f1}, cfg);
    REQUIRE(inte.frames[1].size() == 1);
    CHECK(same_box(inte.frames[1][0].box, box_a));  // track-consistent box wins
    CHECK(inte.frames[1][0].track_id == 0);
    REQUIRE(inte.tracklets.size() == 1);
    CHECK(inte.tracklets[0].length() == 2);

    const double want_consistent =
        walkthrough_fg(0.15, 0.85, 0.98, 0.1, 0.9, cfg.fusion);
    const double want_impostor =
        walkthrough_fg(0.10, 0.90, -0.5, 0.1, 0.9, cfg.fusion);
    CHECK(want_consistent == doctest::Approx(0.98070).epsilon(1e-4));
    CHECK(want_impostor == doctest::Approx(0.90118).epsilon(1e-4));
    CHECK(inte.frames[1][0].score[1] ==
          doctest::Approx(want_consistent).epsilon(1e-9));

    const PipelineResult seq = run_sequential({f0, f1}, cfg);
    REQUIRE(seq.frames[1].size() == 1);
    CHECK(same_box(seq.frames[1][0].box, box_b));  // raw scores keep the impostor
    CHECK(seq.frames[1][0].track_id == 1);         // embedding mismatch: new track
    CHECK(seq.frames[1][0].score[1] == 0.90);
    CHECK(seq.tracklets.size() == 2);
}

TEST_CASE("propagation copies the last box under zero displacement") {
    TrackletStore store;
    const ClassDistribution s({0.2, 0.8});
    store.create(0, Box{3, 4, 13, 14}, s, at_angle(0.0));
    FrameRecord next;
    next.frame_index = 1;
    const std::vector<Detection> prop = propagate_box(store.active(), next);
    REQUIRE(prop.size() == 1);
    CHECK(same_box(prop[0].box, Box{3, 4, 13, 14}));
    CHECK(prop[0].scores == s);  // inherits the tracklet score
    CHECK(cosine(prop[0].embedding, at_angle(0.0)) == doctest::Approx(1.0));
}

TEST_CASE("a motion hint matching the tracklet drives its propagation") {
    TrackletStore store;
    store.create(0, Box{0, 0, 10, 10}, ClassDistribution({0.2, 0.8}), at_angle(0.0));
    store.create(0, Box{50, 50, 60, 60}, ClassDistribution({0.2, 0.8}), at_angle(1.0));
    FrameRecord next;
    next.frame_index = 1;
    Detection hinted = make_det(Box{5, 0, 15, 10}, {0.5, 0.5}, at_angle(0.0));
    hinted.has_motion = true;
    hinted.motion = {5.0, 0.0, 0.0, 0.0};
    next.candidates.push_back(hinted);
    const std::vector<Detection> prop = propagate_box(store.active(), next);
    REQUIRE(prop.size() == 2);
    CHECK(same_box(prop[0].box, Box{5, 0, 15, 10}));    // hint claimed
    CHECK(same_box(prop[1].box, Box{50, 50, 60, 60}));  // zero fallback
}

TEST_CASE("without hints propagation extrapolates constant velocity") {
    TrackletStore store;
    Tracklet& t =
        store.create(0, Box{0, 0, 10, 10}, ClassDistribution({0.2, 0.8}), at_angle(0.0));
    append(t, 1, Box{2, 0, 12, 10}, ClassDistribution({0.2, 0.8}), at_angle(0.0),
           0.99, 0.8);
    FrameRecord f2;
    f2.frame_index = 2;
    const std::vector<Detection> one = propagate_box(store.active(), f2);
    REQUIRE(one.size() == 1);
    CHECK(same_box(one[0].box, Box{4, 0, 14, 10}));
    FrameRecord f3;
    f3.frame_index = 3;  // two-frame gap doubles the displacement
    const std::vector<Detection> two = propagate_box(store.active(), f3);
    CHECK(same_box(two[0].box, Box{6, 0, 16, 10}));
}

TEST_CASE("propagation drops collapsed boxes and rejects stale frames") {
    TrackletStore store;
    Tracklet& t =
        store.create(0, Box{0, 0, 10, 10}, ClassDistribution({0.2, 0.8}), at_angle(0.0));
    append(t, 1, Box{0, 0, 2, 2}, ClassDistribution({0.2, 0.8}), at_angle(0.0),
           0.99, 0.8);
    FrameRecord f2;
    f2.frame_index = 2;  // shrinking at -8 px/frame collapses the box
    CHECK(propagate_box(store.active(), f2).empty());
    FrameRecord stale;
    stale.frame_index = 1;
    CHECK_THROWS_AS(propagate_box(store.active(), stale), std::invalid_argument);
}

TEST_CASE("propagation bridges a missed detection") {
    const Detection det = make_det(Box{0, 0, 10, 10}, {0.2, 0.8}, at_angle(0.0));
    std::vector<FrameRecord> frames = constant_frames({0, 1}, det);
    FrameRecord gap;
    gap.frame_index = 2;  // detector missed the object here
    frames.push_back(gap);
    FrameRecord back;
    back.frame_index = 3;
    back.candidates.push_back(det);
    frames.push_back(back);

    PipelineConfig cfg;
    cfg.propagate_boxes = true;
    const PipelineResult with = run_sequential(frames, cfg);
    REQUIRE(with.frames[2].size() == 1);
    CHECK(with.frames[2][0].track_id == 0);
    CHECK(same_box(with.frames[2][0].box, Box{0, 0, 10, 10}));
    CHECK(with.frames[2][0].score == with.tracklets[0].entries[2].score);
    REQUIRE(with.tracklets.size() == 1);
    CHECK(with.tracklets[0].length() == 4);

    PipelineConfig bare;
    const PipelineResult without = run_sequential(frames, bare);
    CHECK(without.frames[2].empty());
    CHECK(without.tracklets[0].length() == 3);
}

TEST_CASE("late rescoring reports the running mean without touching tracklets") {
    FrameRecord f0;
    f0.frame_index = 0;
    f0.candidates.push_back(make_det(Box{0, 0, 10, 10}, {0.9, 0.1}, at_angle(0.0)));
    FrameRecord f1;
    f1.frame_index = 1;
    f1.candidates.push_back(make_det(Box{0, 0, 10, 10}, {0.5, 0.5}, at_angle(0.0)));

    PipelineConfig cfg;
    cfg.rescore_boxes = true;
    const PipelineResult res = run_sequential({f0, f1}, cfg);
    CHECK(res.frames[0][0].score == ClassDistribution({0.9, 0.1}));
    CHECK(res.frames[1][0].score[0] == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(res.frames[1][0].score[1] == doctest::Approx(0.3).epsilon(1e-12));
    // the tracklet's own entries keep the raw per-box scores
    CHECK(res.tracklets[0].entries[0].score == ClassDistribution({0.9, 0.1}));
    CHECK(res.tracklets[0].entries[1].score == ClassDistribution({0.5, 0.5}));
}

TEST_CASE("rescore_box equals the brute-force mean on random tracklets") {
    std::mt19937 rng(71);
    TrackletStore store;
    std::vector<std::vector<double>> scores;
    scores.push_back(random_distribution(rng, 3));
    Tracklet& t = store.create(0, Box{0, 0, 10, 10}, ClassDistribution(scores[0]),
                               at_angle(0.2));
    CHECK(rescore_box(t) == t.p_tr);  // length 1: unchanged
    for (int f = 1; f < 17; ++f) {
        scores.push_back(random_distribution(rng, 3));
        append(t, f, Box{0, 0, 10, 10}, ClassDistribution(scores.back()),
               at_angle(0.2), 0.99, 0.8);
    }
    const ClassDistribution mean = rescore_box(t);
    for (size_t c = 0; c < 3; ++c) {
        double want = 0.0;
        for (const std::vector<double>& s : scores) want += s[c];
        want /= scores.size();
        CHECK(mean[c] == doctest::Approx(want).epsilon(1e-12));
    }
    Tracklet empty;
    CHECK_THROWS_AS(rescore_box(empty), std::invalid_argument);
}

TEST_CASE("disabled conditioning reproduces the bare sequential baseline") {
    std::mt19937 rng(72);
    std::uniform_real_distribution<double> pos(0.0, 60.0);
    std::uniform_real_distribution<double> ang(0.0, 6.28);
    std::uniform_int_distribution<int> cnt(1, 6);
    std::vector<FrameRecord> frames;
    for (int f = 0; f < 8; ++f) {
        FrameRecord rec;
        rec.frame_index = f;
        const int n = cnt(rng);
        for (int i = 0; i < n; ++i) {
            const double x = pos(rng), y = pos(rng);
            rec.candidates.push_back(make_det(Box{x, y, x + 15, y + 15},
                                              random_distribution(rng, 4),
                                              at_angle(ang(rng))));
        }
        frames.push_back(std::move(rec));
    }
    PipelineConfig cfg;
    cfg.fusion.num_classes = 3;
    PipelineConfig off = cfg;
    off.fusion.alpha = 0.0;  // conditioning degenerates to the raw scores
    const PipelineResult inte = run_integrated(frames, off);
    const PipelineResult seq = run_sequential(frames, cfg);
    REQUIRE(inte.frames.size() == seq.frames.size());
    for (size_t f = 0; f < frames.size(); ++f) {
        REQUIRE(inte.frames[f].size() == seq.frames[f].size());
        for (size_t k = 0; k < inte.frames[f].size(); ++k) {
            const OutputBox& a = inte.frames[f][k];
            const OutputBox& b = seq.frames[f][k];
            CHECK(same_box(a.box, b.box));
            CHECK(a.track_id == b.track_id);
            CHECK(argmax_foreground(a.score) == argmax_foreground(b.score));
            for (size_t c = 0; c < a.score.size(); ++c)
                CHECK(a.score[c] == doctest::Approx(b.score[c]).epsilon(1e-9));
        }
    }
}

TEST_CASE("identical runs are bit-identical") {
    std::mt19937 rng(73);
    std::uniform_real_distribution<double> pos(0.0, 60.0);
    std::uniform_real_distribution<double> ang(0.0, 6.28);
    std::vector<FrameRecord> frames;
    for (int f = 0; f < 6; ++f) {
        FrameRecord rec;
        rec.frame_index = f;
        for (int i = 0; i < 4; ++i) {
            const double x = pos(rng), y = pos(rng);
            rec.candidates.push_back(make_det(Box{x, y, x + 15, y + 15},
                                              random_distribution(rng, 3),
                                              at_angle(ang(rng))));
        }
        frames.push_back(std::move(rec));
    }
    PipelineConfig cfg;
    cfg.fusion.num_classes = 2;
    const PipelineResult a = run_integrated(frames, cfg);
    const PipelineResult b = run_integrated(frames, cfg);
    REQUIRE(a.frames.size() == b.frames.size());
    for (size_t f = 0; f < a.frames.size(); ++f) {
        REQUIRE(a.frames[f].size() == b.frames[f].size());
        for (size_t k = 0; k < a.frames[f].size(); ++k) {
            CHECK(a.frames[f][k].box.x1 == b.frames[f][k].box.x1);
            CHECK(a.frames[f][k].box.y2 == b.frames[f][k].box.y2);
            CHECK(a.frames[f][k].track_id == b.frames[f][k].track_id);
            CHECK(a.frames[f][k].score == b.frames[f][k].score);
        }
    }
    REQUIRE(a.tracklets.size() == b.tracklets.size());
    for (size_t i = 0; i < a.tracklets.size(); ++i) {
        CHECK(a.tracklets[i].id == b.tracklets[i].id);
        CHECK(a.tracklets[i].p_tr == b.tracklets[i].p_tr);
        CHECK(a.tracklets[i].embedding == b.tracklets[i].embedding);
    }
}

TEST_CASE("the output floor drops rows without touching survivors") {
    const Detection strong = make_det(Box{0, 0, 10, 10}, {0.1, 0.9}, at_angle(0.0));
    const Detection weak = make_det(Box{40, 40, 50, 50}, {0.6, 0.4}, at_angle(1.6));
    std::vector<FrameRecord> frames;
    for (int f = 0; f < 3; ++f) {
        FrameRecord rec;
        rec.frame_index = f;
        rec.candidates.push_back(strong);
        rec.candidates.push_back(weak);
        frames.push_back(std::move(rec));
    }
    PipelineConfig open_cfg;
    const PipelineResult open_res = run_sequential(frames, open_cfg);
    PipelineConfig gated = open_cfg;
    gated.min_output_score = 0.6;  // spawn threshold becomes 0.3 < 0.4
    const PipelineResult gated_res = run_sequential(frames, gated);

    CHECK(gated_res.tracklets.size() == 2);  // the weak track still exists
    for (size_t f = 0; f < frames.size(); ++f) {
        CHECK(open_res.frames[f].size() == 2);
        REQUIRE(gated_res.frames[f].size() == 1);
        CHECK(gated_res.frames[f][0].track_id == open_res.frames[f][0].track_id);
        CHECK(same_box(gated_res.frames[f][0].box, open_res.frames[f][0].box));
        CHECK(gated_res.frames[f][0].score == open_res.frames[f][0].score);
    }
}

TEST_CASE("the length floor drops rows of short tracks only") {
    const Detection stable = make_det(Box{0, 0, 10, 10}, {0.1, 0.9}, at_angle(0.0));
    const Detection flash = make_det(Box{40, 40, 50, 50}, {0.2, 0.8}, at_angle(1.6));
    std::vector<FrameRecord> frames;
    for (int f = 0; f < 4; ++f) {
        FrameRecord rec;
        rec.frame_index = f;
        rec.candidates.push_back(stable);
        if (f == 0) rec.candidates.push_back(flash);  // one-frame wonder
        frames.push_back(std::move(rec));
    }
    PipelineConfig cfg;
    cfg.min_tracklet_length = 2;
    const PipelineResult res = run_sequential(frames, cfg);
    CHECK(res.tracklets.size() == 2);
    REQUIRE(res.frames[0].size() == 1);  // the flash row is gone
    CHECK(same_box(res.frames[0][0].box, Box{0, 0, 10, 10}));
    for (int f = 1; f < 4; ++f) CHECK(res.frames[f].size() == 1);
}

TEST_CASE("matched boxes bypass the spawn threshold") {
    const Detection mid = make_det(Box{0, 0, 10, 10}, {0.4, 0.6}, at_angle(0.0));
    PipelineConfig cfg;
    cfg.min_output_score = 0.8;  // spawn 0.4 < 0.6: spawns, rows all dropped
    const PipelineResult res = run_sequential(constant_frames({0, 1, 2}, mid), cfg);
    REQUIRE(res.tracklets.size() == 1);
    CHECK(res.tracklets[0].length() == 3);
    for (const auto& rows : res.frames) CHECK(rows.empty());

    PipelineConfig blocked;
    blocked.spawn_threshold = 0.7;  // 0.6 never clears it
    const PipelineResult none = run_sequential(constant_frames({0, 1, 2}, mid), blocked);
    CHECK(none.tracklets.empty());
    for (const auto& rows : none.frames) CHECK(rows.empty());
}

TEST_CASE("frames must arrive strictly ordered") {
    const Detection det = make_det(Box{0, 0, 10, 10}, {0.2, 0.8}, at_angle(0.0));
    PipelineConfig cfg;
    CHECK_THROWS_AS(run_integrated(constant_frames({1, 0}, det), cfg),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_integrated(constant_frames({1, 1}, det), cfg),
                    std::invalid_argument);
}

TEST_CASE("candidates are validated before use") {
    PipelineConfig cfg;
    FrameRecord rec;
    rec.frame_index = 0;
    rec.candidates.push_back(make_det(Box{10, 0, 0, 10}, {0.2, 0.8}, at_angle(0.0)));
    CHECK_THROWS_AS(run_integrated({rec}, cfg), std::invalid_argument);
    rec.candidates[0] = make_det(Box{0, 0, 10, 10}, {0.2, 0.3, 0.5}, at_angle(0.0));
    CHECK_THROWS_AS(run_integrated({rec}, cfg), std::invalid_argument);  // C mismatch
    rec.candidates[0] = make_det(Box{0, 0, 10, 10}, {0.2, 0.8}, Embedding());
    CHECK_THROWS_AS(run_integrated({rec}, cfg), std::invalid_argument);
}

TEST_CASE("the proposal filter trims the least track-consistent candidates") {
    const Box box_a{0, 0, 10, 10};
    const Box box_b{30, 0, 40, 10};
    const Box box_c{60, 0, 70, 10};
    FrameRecord f0;
    f0.frame_index = 0;
    f0.candidates.push_back(make_det(box_a, {0.1, 0.9}, at_angle(0.0)));
    FrameRecord f1;
    f1.frame_index = 1;
    f1.candidates.push_back(make_det(box_a, {0.15, 0.85}, at_angle(std::acos(0.98))));
    f1.candidates.push_back(make_det(box_b, {0.10, 0.90}, at_angle(std::acos(-0.5))));
    f1.candidates.push_back(make_det(box_c, {0.05, 0.95}, at_angle(std::acos(0.98))));

    PipelineConfig plain;
    const PipelineResult full = run_integrated({f0, f1}, plain);
    CHECK(full.frames[1].size() == 3);  // disjoint boxes all survive NMS

    PipelineConfig trimmed = plain;
    trimmed.condition_proposals = true;
    trimmed.proposal_budget = 2;
    const PipelineResult cut = run_integrated({f0, f1}, trimmed);
    REQUIRE(cut.frames[1].size() == 2);
    // rows come out in suppression order: best conditioned score first
    CHECK(same_box(cut.frames[1][0].box, box_c));
    CHECK(same_box(cut.frames[1][1].box, box_a));

    PipelineConfig roomy = trimmed;
    roomy.proposal_budget = 3;  // budget >= candidates: no-op
    const PipelineResult kept = run_integrated({f0, f1}, roomy);
    CHECK(kept.frames[1].size() == 3);
    PipelineConfig unlimited = trimmed;
    unlimited.proposal_budget = 0;  // zero budget means keep all
    CHECK(run_integrated({f0, f1}, unlimited).frames[1].size() == 3);
}

TEST_CASE("tracklet bookkeeping invariants hold on a busy scene") {
    std::mt19937 rng(74);
    std::uniform_real_distribution<double> pos(0.0, 80.0);
    std::uniform_real_distribution<double> ang(0.0, 6.28);
    std::uniform_int_distribution<int> cnt(0, 5);
    std::vector<FrameRecord> frames;
    for (int f = 0; f < 12; ++f) {
        FrameRecord rec;
        rec.frame_index = f;
        const int n = cnt(rng);
        for (int i = 0; i < n; ++i) {
            const double x = pos(rng), y = pos(rng);
            rec.candidates.push_back(make_det(Box{x, y, x + 14, y + 14},
                                              random_distribution(rng, 3),
                                              at_angle(ang(rng))));
        }
        frames.push_back(std::move(rec));
    }
    PipelineConfig cfg;
    cfg.fusion.num_classes = 2;
    cfg.max_inactive = 2;
    const PipelineResult res = run_integrated(frames, cfg);

    std::set<int> ids;
    for (const Tracklet& t : res.tracklets) {
        CHECK(ids.insert(t.id).second);  // unique ids
        REQUIRE(t.length() >= 1);
        for (int k = 1; k < t.length(); ++k)
            CHECK(t.entries[k].frame > t.entries[k - 1].frame);
    }
    for (const auto& rows : res.frames)
        for (const OutputBox& r : rows) CHECK(ids.count(r.track_id) == 1);
}

}  // TEST_SUITE
