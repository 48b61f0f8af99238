#pragma once

#include <string>
#include <vector>

#include "tcdet/evaluation.hpp"
#include "tcdet/pipeline.hpp"
#include "tcdet/simulator.hpp"

namespace tcdet {

// ablation ladder: each sequential rung adds one late-integration component;
// the integrated rungs condition scoring alone, then proposals too
enum class Variant {
    kSequentialBare,
    kSequentialPropagate,
    kSequentialLate,
    kIntegratedScoring,
    kIntegratedFull,
};

std::vector<Variant> all_variants();
std::string to_string(Variant v);

PipelineConfig variant_config(const PipelineConfig& base, Variant v);

struct RunMetrics {
    double map_det = 0.0;
    double map_track = 0.0;
    double map_track_slow = 0.0;
    double map_track_medium = 0.0;
    double map_track_fast = 0.0;
    bool has_slow = false;
    bool has_medium = false;
    bool has_fast = false;
    StabilityReport stability;
};

RunMetrics metrics_from_rows(const std::vector<TrackRow>& pred_rows,
                             const std::vector<TrackRow>& truth_rows,
                             const EvalConfig& ecfg);

RunMetrics evaluate_run(const PipelineResult& result,
                        const std::vector<FrameRecord>& frames,
                        const EvalConfig& ecfg);

PipelineResult run_pipeline(const std::vector<FrameRecord>& frames,
                            const PipelineConfig& config);

RunMetrics run_variant(const SceneConfig& scene, const PipelineConfig& base,
                       Variant v, const EvalConfig& ecfg);

// means over scenes seeded scene.seed + k for k in [0, num_seeds); split
// metrics average only the seeds where the split holds ground truth
RunMetrics mean_over_seeds(const SceneConfig& scene, const PipelineConfig& base,
                           Variant v, const EvalConfig& ecfg, int num_seeds);

}  // namespace tcdet
