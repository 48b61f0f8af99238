#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tcdet/ablate.hpp"
#include "tcdet/evaluation.hpp"
#include "tcdet/io.hpp"
#include "tcdet/pipeline.hpp"
#include "tcdet/simulator.hpp"

namespace {

using nlohmann::json;

int log_level() {
    const char* v = std::getenv("TCDET_LOG");
    return v == nullptr ? 0 : std::atoi(v);
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[tcdet] " << msg << "\n";
}

std::string fmt_full(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string fmt_fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path) {
    tcdet::Config cfg = tcdet::Config::parse_file(config_path);
    const tcdet::SceneConfig scene = tcdet::scene_config_from(cfg);
    cfg.finish();
    const tcdet::SyntheticSequence seq = tcdet::generate(scene);
    log_info("generated " + std::to_string(seq.frames.size()) + " frames, " +
             std::to_string(seq.objects.size()) + " objects");
    tcdet::write_stream_file(out_path, tcdet::to_stream(seq));
    log_info("wrote " + out_path);
    return 0;
}

int cmd_track(const std::string& in_path, const std::string& out_path,
              const std::string& mode, bool propagate, bool rescore,
              int proposals, const std::string& config_path) {
    tcdet::PipelineConfig pc;
    if (mode == "integrated") {
        pc.mode = tcdet::PipelineMode::integrated;
    } else if (mode == "sequential") {
        pc.mode = tcdet::PipelineMode::sequential;
    } else {
        throw tcdet::ConfigError("--mode must be integrated or sequential");
    }
    if (!config_path.empty()) {
        tcdet::Config cfg = tcdet::Config::parse_file(config_path);
        tcdet::apply_pipeline_config(cfg, &pc);
        cfg.finish();
    }
    pc.propagate_boxes = propagate;
    pc.rescore_boxes = rescore;
    if (proposals > 0) {
        if (pc.mode != tcdet::PipelineMode::integrated)
            throw tcdet::ConfigError("--proposals requires --mode integrated");
        pc.condition_proposals = true;
        pc.proposal_budget = proposals;
    }

    const tcdet::DetectionStream stream = tcdet::read_stream_file(in_path);
    pc.fusion.num_classes = stream.header.num_classes;
    pc.validate();
    log_info("read " + std::to_string(stream.frames.size()) + " frames from " + in_path);

    const tcdet::PipelineResult result = tcdet::run_pipeline(stream.frames, pc);
    const std::vector<tcdet::TrackRow> rows = tcdet::to_rows(result);
    log_info("tracked " + std::to_string(result.tracklets.size()) + " tracklets, " +
             std::to_string(rows.size()) + " output boxes");
    tcdet::write_tracks_file(out_path, rows);
    log_info("wrote " + out_path);
    return 0;
}

// accepts either a track CSV or a detection stream (uses its gt rows)
std::vector<tcdet::TrackRow> read_rows_any(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw std::runtime_error("cannot open " + path);
    char first = 0;
    while (probe.get(first) && (first == ' ' || first == '\t' || first == '\r' || first == '\n')) {
    }
    probe.close();
    if (first == '{') return tcdet::gt_rows(tcdet::read_stream_file(path).frames);
    return tcdet::read_tracks_file(path);
}

void emit_split(std::ostream& os, const std::string& name,
                const tcdet::SplitStability& s, json* report) {
    if (s.gt_count == 0) return;
    os << "stability_" << name << "_fragment=" << fmt_full(s.fragment) << "\n";
    os << "stability_" << name << "_center=" << fmt_full(s.center) << "\n";
    os << "stability_" << name << "_aspect=" << fmt_full(s.aspect) << "\n";
    if (report != nullptr) {
        (*report)["stability"][name] = {{"fragment", s.fragment},
                                        {"center", s.center},
                                        {"aspect", s.aspect},
                                        {"gt_count", s.gt_count}};
    }
}

int cmd_eval(const std::string& pred_path, const std::string& gt_path,
             const std::string& json_path, const std::string& config_path) {
    tcdet::EvalConfig ecfg;
    if (!config_path.empty()) {
        tcdet::Config cfg = tcdet::Config::parse_file(config_path);
        ecfg = tcdet::eval_config_from(cfg);
        cfg.finish();
    }
    const std::vector<tcdet::TrackRow> pred_rows = read_rows_any(pred_path);
    const std::vector<tcdet::TrackRow> truth_rows = read_rows_any(gt_path);
    log_info("evaluating " + std::to_string(pred_rows.size()) + " prediction rows vs " +
             std::to_string(truth_rows.size()) + " gt rows");
    const tcdet::RunMetrics m = tcdet::metrics_from_rows(pred_rows, truth_rows, ecfg);

    json report;
    report["map_det"] = m.map_det;
    report["map_track"] = m.map_track;

    std::ostringstream out;
    out << "map_det=" << fmt_full(m.map_det) << "\n";
    out << "map_track=" << fmt_full(m.map_track) << "\n";
    if (m.has_slow) {
        out << "map_track_slow=" << fmt_full(m.map_track_slow) << "\n";
        report["map_track_slow"] = m.map_track_slow;
    }
    if (m.has_medium) {
        out << "map_track_medium=" << fmt_full(m.map_track_medium) << "\n";
        report["map_track_medium"] = m.map_track_medium;
    }
    if (m.has_fast) {
        out << "map_track_fast=" << fmt_full(m.map_track_fast) << "\n";
        report["map_track_fast"] = m.map_track_fast;
    }
    emit_split(out, "overall", m.stability.overall, &report);
    emit_split(out, "slow", m.stability.slow, &report);
    emit_split(out, "medium", m.stability.medium, &report);
    emit_split(out, "fast", m.stability.fast, &report);
    std::cout << out.str();

    if (!json_path.empty()) {
        std::ofstream os(json_path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open " + json_path + " for writing");
        os << report.dump(2) << "\n";
        if (!os.good()) throw std::runtime_error("report write failed");
        log_info("wrote " + json_path);
    }
    return 0;
}

void set_sweep_param(tcdet::PipelineConfig* pc, const std::string& name, double value) {
    if (name == "alpha") pc->fusion.alpha = value;
    else if (name == "beta") pc->fusion.beta = value;
    else if (name == "gamma") pc->fusion.gamma = value;
    else if (name == "eta") pc->fusion.eta = value;
    else if (name == "r_null") pc->fusion.r_null = value;
    else throw tcdet::ConfigError("sweep_param must be one of alpha, beta, gamma, eta, r_null");
}

void print_table(std::ostream& os, const std::vector<std::vector<std::string>>& rows) {
    std::vector<size_t> widths;
    for (const auto& row : rows) {
        if (widths.size() < row.size()) widths.resize(row.size(), 0);
        for (size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
    }
    for (const auto& row : rows) {
        for (size_t c = 0; c < row.size(); ++c) {
            os << row[c];
            if (c + 1 < row.size()) os << std::string(widths[c] - row[c].size() + 2, ' ');
        }
        os << "\n";
    }
}

int cmd_ablate(const std::string& config_path) {
    tcdet::Config cfg = tcdet::Config::parse_file(config_path);
    const tcdet::SceneConfig scene = tcdet::scene_config_from(cfg);
    tcdet::PipelineConfig base;
    tcdet::apply_pipeline_config(cfg, &base);
    const tcdet::EvalConfig ecfg = tcdet::eval_config_from(cfg);
    const int num_seeds = cfg.get_int("num_seeds", 1);
    const std::string sweep_param = cfg.get_string("sweep_param", "");
    const std::vector<double> sweep_values = cfg.get_double_list("sweep_values", {});
    cfg.finish();
    if (num_seeds < 1) throw tcdet::ConfigError("num_seeds must be >= 1");
    if (!sweep_param.empty() && sweep_values.empty())
        throw tcdet::ConfigError("sweep_param needs a non-empty sweep_values list");
    if (sweep_param.empty() && !sweep_values.empty())
        throw tcdet::ConfigError("sweep_values needs sweep_param");
    if (!sweep_param.empty()) {
        tcdet::PipelineConfig probe = base;  // validate the name before running
        set_sweep_param(&probe, sweep_param, sweep_values.front());
    }

    const auto split_cell = [](bool has, double v) { return has ? fmt_fixed(v) : std::string("-"); };
    const auto stab_cell = [](const tcdet::SplitStability& s, double v) {
        return s.gt_count > 0 ? fmt_fixed(v) : std::string("-");
    };

    std::vector<std::vector<std::string>> rows;
    rows.push_back({"variant", "map_det", "map_track", "slow", "medium", "fast",
                    "fragment", "center", "aspect", "frag_fast"});
    for (tcdet::Variant v : tcdet::all_variants()) {
        log_info("running " + tcdet::to_string(v) + " over " + std::to_string(num_seeds) +
                 " seed(s)");
        const tcdet::RunMetrics m = tcdet::mean_over_seeds(scene, base, v, ecfg, num_seeds);
        rows.push_back({tcdet::to_string(v), fmt_fixed(m.map_det), fmt_fixed(m.map_track),
                        split_cell(m.has_slow, m.map_track_slow),
                        split_cell(m.has_medium, m.map_track_medium),
                        split_cell(m.has_fast, m.map_track_fast),
                        stab_cell(m.stability.overall, m.stability.overall.fragment),
                        stab_cell(m.stability.overall, m.stability.overall.center),
                        stab_cell(m.stability.overall, m.stability.overall.aspect),
                        stab_cell(m.stability.fast, m.stability.fast.fragment)});
    }
    print_table(std::cout, rows);

    if (!sweep_param.empty()) {
        std::cout << "\n";
        std::vector<std::vector<std::string>> sweep_rows;
        sweep_rows.push_back({sweep_param, "map_det", "map_track"});
        for (double value : sweep_values) {
            log_info("sweep " + sweep_param + "=" + fmt_full(value));
            tcdet::PipelineConfig pc = base;
            set_sweep_param(&pc, sweep_param, value);
            const tcdet::RunMetrics m = tcdet::mean_over_seeds(
                scene, pc, tcdet::Variant::kIntegratedFull, ecfg, num_seeds);
            sweep_rows.push_back({fmt_full(value), fmt_fixed(m.map_det), fmt_fixed(m.map_track)});
        }
        print_table(std::cout, sweep_rows);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tracklet-conditioned detection toolkit"};
    app.require_subcommand(1);

    std::string sim_config, sim_out;
    CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic detection stream");
    sim->add_option("--config", sim_config, "scene config file")->required();
    sim->add_option("--out", sim_out, "output stream path")->required();

    std::string trk_in, trk_out, trk_mode, trk_config;
    bool trk_propagate = false;
    bool trk_rescore = false;
    int trk_proposals = 0;
    CLI::App* trk = app.add_subcommand("track", "run the tracking pipeline over a stream");
    trk->add_option("--in", trk_in, "detection stream path")->required();
    trk->add_option("--out", trk_out, "track CSV path")->required();
    trk->add_option("--mode", trk_mode, "integrated | sequential")->required();
    trk->add_flag("--propagate", trk_propagate, "propagate boxes of unmatched tracklets");
    trk->add_flag("--rescore", trk_rescore, "average scores along each tracklet");
    trk->add_option("--proposals", trk_proposals, "conditioned proposal budget (integrated only)");
    trk->add_option("--config", trk_config, "pipeline config file");

    std::string ev_pred, ev_gt, ev_json, ev_config;
    CLI::App* ev = app.add_subcommand("eval", "score predictions against ground truth");
    ev->add_option("--pred", ev_pred, "predictions: track CSV or stream")->required();
    ev->add_option("--gt", ev_gt, "ground truth: track CSV or stream")->required();
    ev->add_option("--json", ev_json, "also write a JSON report here");
    ev->add_option("--config", ev_config, "evaluation config file");

    std::string ab_config;
    CLI::App* ab = app.add_subcommand("ablate", "variant table on a seeded scene");
    ab->add_option("--config", ab_config, "scene/pipeline/eval config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_config, sim_out);
        if (trk->parsed())
            return cmd_track(trk_in, trk_out, trk_mode, trk_propagate, trk_rescore,
                             trk_proposals, trk_config);
        if (ev->parsed()) return cmd_eval(ev_pred, ev_gt, ev_json, ev_config);
        if (ab->parsed()) return cmd_ablate(ab_config);
    } catch (const std::invalid_argument& e) {  // ConfigError included
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
