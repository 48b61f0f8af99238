#include "tcdet/ablate.hpp"

#include <stdexcept>

namespace tcdet {

std::vector<Variant> all_variants() {
    return {Variant::kSequentialBare, Variant::kSequentialPropagate, Variant::kSequentialLate,
            Variant::kIntegratedScoring, Variant::kIntegratedFull};
}

std::string to_string(Variant v) {
    switch (v) {
        case Variant::kSequentialBare: return "sequential";
        case Variant::kSequentialPropagate: return "sequential+propagate";
        case Variant::kSequentialLate: return "sequential+propagate+rescore";
        case Variant::kIntegratedScoring: return "integrated-scoring";
        case Variant::kIntegratedFull: return "integrated-full";
    }
    throw std::invalid_argument("unknown variant");
}

PipelineConfig variant_config(const PipelineConfig& base, Variant v) {
    PipelineConfig pc = base;
    pc.propagate_boxes = false;
    pc.rescore_boxes = false;
    pc.condition_proposals = false;
    switch (v) {
        case Variant::kSequentialBare:
            pc.mode = PipelineMode::sequential;
            break;
        case Variant::kSequentialPropagate:
            pc.mode = PipelineMode::sequential;
            pc.propagate_boxes = true;
            break;
        case Variant::kSequentialLate:
            pc.mode = PipelineMode::sequential;
            pc.propagate_boxes = true;
            pc.rescore_boxes = true;
            break;
        case Variant::kIntegratedScoring:
            pc.mode = PipelineMode::integrated;
            break;
        case Variant::kIntegratedFull:
            pc.mode = PipelineMode::integrated;
            pc.condition_proposals = pc.proposal_budget > 0;
            break;
    }
    return pc;
}

PipelineResult run_pipeline(const std::vector<FrameRecord>& frames,
                            const PipelineConfig& config) {
    if (config.mode == PipelineMode::integrated) return run_integrated(frames, config);
    return run_sequential(frames, config);
}

RunMetrics metrics_from_rows(const std::vector<TrackRow>& pred_rows,
                             const std::vector<TrackRow>& truth_rows,
                             const EvalConfig& ecfg) {
    RunMetrics m;
    m.map_det = map_det(pred_rows, truth_rows, ecfg);

    const std::vector<EvalTracklet> pred = build_tracklets(pred_rows);
    const std::vector<EvalTracklet> truth = build_tracklets(truth_rows);
    m.map_track = map_track(pred, truth, ecfg);

    const auto try_split = [&](MotionSpeed split, double* value, bool* present) {
        try {
            *value = map_track_split(pred, truth, ecfg, split);
            *present = true;
        } catch (const std::domain_error&) {
            *present = false;
        }
    };
    try_split(MotionSpeed::slow, &m.map_track_slow, &m.has_slow);
    try_split(MotionSpeed::medium, &m.map_track_medium, &m.has_medium);
    try_split(MotionSpeed::fast, &m.map_track_fast, &m.has_fast);

    m.stability = stability(pred, truth, ecfg);
    return m;
}

RunMetrics evaluate_run(const PipelineResult& result,
                        const std::vector<FrameRecord>& frames,
                        const EvalConfig& ecfg) {
    return metrics_from_rows(to_rows(result), gt_rows(frames), ecfg);
}

RunMetrics run_variant(const SceneConfig& scene, const PipelineConfig& base,
                       Variant v, const EvalConfig& ecfg) {
    const SyntheticSequence seq = generate(scene);
    PipelineConfig pc = variant_config(base, v);
    pc.fusion.num_classes = scene.num_classes;
    const PipelineResult result = run_pipeline(seq.frames, pc);
    return evaluate_run(result, seq.frames, ecfg);
}

namespace {

void accumulate_split(const SplitStability& in, SplitStability* sum, int* count) {
    if (in.gt_count == 0) return;
    sum->fragment += in.fragment;
    sum->center += in.center;
    sum->aspect += in.aspect;
    sum->gt_count += in.gt_count;
    ++*count;
}

void finalize_split(SplitStability* sum, int count) {
    if (count == 0) return;
    sum->fragment /= count;
    sum->center /= count;
    sum->aspect /= count;
}

}  // namespace

RunMetrics mean_over_seeds(const SceneConfig& scene, const PipelineConfig& base,
                           Variant v, const EvalConfig& ecfg, int num_seeds) {
    if (num_seeds < 1) throw std::invalid_argument("mean_over_seeds: num_seeds must be >= 1");
    RunMetrics mean;
    int slow_n = 0, medium_n = 0, fast_n = 0;
    int st_overall_n = 0, st_slow_n = 0, st_medium_n = 0, st_fast_n = 0;
    for (int k = 0; k < num_seeds; ++k) {
        SceneConfig sc = scene;
        sc.seed = scene.seed + static_cast<std::uint64_t>(k);
        const RunMetrics one = run_variant(sc, base, v, ecfg);
        mean.map_det += one.map_det;
        mean.map_track += one.map_track;
        if (one.has_slow) {
            mean.map_track_slow += one.map_track_slow;
            ++slow_n;
        }
        if (one.has_medium) {
            mean.map_track_medium += one.map_track_medium;
            ++medium_n;
        }
        if (one.has_fast) {
            mean.map_track_fast += one.map_track_fast;
            ++fast_n;
        }
        accumulate_split(one.stability.overall, &mean.stability.overall, &st_overall_n);
        accumulate_split(one.stability.slow, &mean.stability.slow, &st_slow_n);
        accumulate_split(one.stability.medium, &mean.stability.medium, &st_medium_n);
        accumulate_split(one.stability.fast, &mean.stability.fast, &st_fast_n);
    }
    mean.map_det /= num_seeds;
    mean.map_track /= num_seeds;
    if (slow_n > 0) {
        mean.map_track_slow /= slow_n;
        mean.has_slow = true;
    }
    if (medium_n > 0) {
        mean.map_track_medium /= medium_n;
        mean.has_medium = true;
    }
    if (fast_n > 0) {
        mean.map_track_fast /= fast_n;
        mean.has_fast = true;
    }
    finalize_split(&mean.stability.overall, st_overall_n);
    finalize_split(&mean.stability.slow, st_slow_n);
    finalize_split(&mean.stability.medium, st_medium_n);
    finalize_split(&mean.stability.fast, st_fast_n);
    return mean;
}

}  // namespace tcdet
