#include "tcdet/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace tcdet {
namespace {

using nlohmann::json;

std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

json box_to_json(const Box& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

Box box_from_json(const json& j) {
    if (!j.is_array() || j.size() != 4) throw std::runtime_error("box must be [x1,y1,x2,y2]");
    Box b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
    if (!box_valid(b)) throw std::runtime_error("invalid box");
    return b;
}

std::vector<double> doubles_from_json(const json& j, const char* what) {
    if (!j.is_array()) throw std::runtime_error(std::string(what) + " must be an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) out.push_back(v.get<double>());
    return out;
}

[[noreturn]] void line_error(int lineno, const std::string& what) {
    throw std::runtime_error("stream line " + std::to_string(lineno) + ": " + what);
}

std::string trim(const std::string& s) {
    size_t begin = 0;
    size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

}  // namespace

DetectionStream to_stream(const SyntheticSequence& seq) {
    DetectionStream stream;
    stream.header.version = kStreamVersion;
    stream.header.num_classes = seq.config.num_classes;
    stream.header.embedding_dim = seq.config.embedding_dim;
    stream.header.image_width = seq.config.image_width;
    stream.header.image_height = seq.config.image_height;
    stream.frames = seq.frames;
    return stream;
}

void write_stream(std::ostream& os, const DetectionStream& stream) {
    json header;
    header["version"] = stream.header.version;
    header["num_classes"] = stream.header.num_classes;
    header["embedding_dim"] = stream.header.embedding_dim;
    header["image_width"] = stream.header.image_width;
    header["image_height"] = stream.header.image_height;
    os << header.dump() << '\n';
    for (const FrameRecord& f : stream.frames) {
        json line;
        line["frame"] = f.frame_index;
        json cands = json::array();
        for (const Detection& d : f.candidates) {
            json c;
            c["box"] = box_to_json(d.box);
            c["scores"] = d.scores.probs();
            c["embedding"] = d.embedding.values();
            if (d.has_motion)
                c["motion"] = json::array({d.motion[0], d.motion[1], d.motion[2], d.motion[3]});
            cands.push_back(std::move(c));
        }
        line["candidates"] = std::move(cands);
        if (!f.ground_truth.empty()) {
            json gts = json::array();
            for (const GroundTruthBox& g : f.ground_truth) {
                json e;
                e["track_id"] = g.track_id;
                e["class"] = g.class_id;
                e["box"] = box_to_json(g.box);
                gts.push_back(std::move(e));
            }
            line["gt"] = std::move(gts);
        }
        os << line.dump() << '\n';
    }
    if (!os.good()) throw std::runtime_error("stream write failed");
}

DetectionStream read_stream(std::istream& is) {
    DetectionStream stream;
    std::string raw;
    int lineno = 0;
    bool seen_header = false;
    while (std::getline(is, raw)) {
        ++lineno;
        const std::string text = trim(raw);
        if (text.empty()) continue;
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            line_error(lineno, e.what());
        }
        try {
            if (!seen_header) {
                if (!j.contains("version")) throw std::runtime_error("missing header line");
                stream.header.version = j.at("version").get<int>();
                if (stream.header.version != kStreamVersion)
                    throw std::runtime_error("unsupported stream version " +
                                             std::to_string(stream.header.version));
                stream.header.num_classes = j.at("num_classes").get<int>();
                stream.header.embedding_dim = j.at("embedding_dim").get<int>();
                stream.header.image_width = j.at("image_width").get<double>();
                stream.header.image_height = j.at("image_height").get<double>();
                if (stream.header.num_classes < 1) throw std::runtime_error("num_classes < 1");
                if (stream.header.embedding_dim < 1) throw std::runtime_error("embedding_dim < 1");
                seen_header = true;
                continue;
            }
            const int frame = j.at("frame").get<int>();
            if (!stream.frames.empty() && frame < stream.frames.back().frame_index)
                throw std::runtime_error("frame indices must be non-decreasing");
            if (stream.frames.empty() || frame != stream.frames.back().frame_index) {
                FrameRecord rec;
                rec.frame_index = frame;
                stream.frames.push_back(std::move(rec));
            }
            FrameRecord& rec = stream.frames.back();
            for (const json& c : j.value("candidates", json::array())) {
                Detection d;
                d.box = box_from_json(c.at("box"));
                std::vector<double> scores = doubles_from_json(c.at("scores"), "scores");
                if (static_cast<int>(scores.size()) != stream.header.num_classes + 1)
                    throw std::runtime_error("scores length disagrees with header");
                d.scores = ClassDistribution(std::move(scores));
                std::vector<double> emb = doubles_from_json(c.at("embedding"), "embedding");
                if (static_cast<int>(emb.size()) != stream.header.embedding_dim)
                    throw std::runtime_error("embedding length disagrees with header");
                d.embedding = Embedding(std::move(emb));
                if (c.contains("motion")) {
                    std::vector<double> m = doubles_from_json(c.at("motion"), "motion");
                    if (m.size() != 4) throw std::runtime_error("motion must have 4 entries");
                    d.has_motion = true;
                    d.motion = {m[0], m[1], m[2], m[3]};
                }
                rec.candidates.push_back(std::move(d));
            }
            for (const json& gj : j.value("gt", json::array())) {
                GroundTruthBox g;
                g.track_id = gj.at("track_id").get<int>();
                g.class_id = gj.at("class").get<int>();
                if (g.class_id < 1 || g.class_id > stream.header.num_classes)
                    throw std::runtime_error("gt class out of range");
                g.box = box_from_json(gj.at("box"));
                rec.ground_truth.push_back(g);
            }
        } catch (const std::exception& e) {
            line_error(lineno, e.what());
        }
    }
    if (!seen_header) throw std::runtime_error("stream has no header line");
    return stream;
}

void write_stream_file(const std::string& path, const DetectionStream& stream) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_stream(os, stream);
}

DetectionStream read_stream_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    return read_stream(is);
}

void write_tracks(std::ostream& os, const std::vector<TrackRow>& rows) {
    std::set<std::pair<int, int>> seen;
    for (const TrackRow& r : rows) {
        if (!box_valid(r.box) || !(r.box.width() > 0.0) || !(r.box.height() > 0.0))
            throw std::runtime_error("track row has a degenerate box");
        if (!seen.insert({r.frame, r.track_id}).second)
            throw std::runtime_error("duplicate (frame, track_id) pair");
        os << r.frame << ',' << r.track_id << ',' << fmt_double(r.box.x1) << ','
           << fmt_double(r.box.y1) << ',' << fmt_double(r.box.width()) << ','
           << fmt_double(r.box.height()) << ',' << fmt_double(r.confidence) << ','
           << r.class_id << '\n';
    }
    if (!os.good()) throw std::runtime_error("track write failed");
}

namespace {

double parse_csv_double(const std::string& field, int lineno) {
    const std::string t = trim(field);
    double out = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw std::runtime_error("tracks line " + std::to_string(lineno) +
                                 ": bad number '" + field + "'");
    return out;
}

int parse_csv_int(const std::string& field, int lineno) {
    const std::string t = trim(field);
    int out = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw std::runtime_error("tracks line " + std::to_string(lineno) +
                                 ": bad integer '" + field + "'");
    return out;
}

}  // namespace

std::vector<TrackRow> read_tracks(std::istream& is) {
    std::vector<TrackRow> rows;
    std::set<std::pair<int, int>> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 8)
            throw std::runtime_error("tracks line " + std::to_string(lineno) +
                                     ": expected 8 comma-separated fields");
        TrackRow r;
        r.frame = parse_csv_int(fields[0], lineno);
        r.track_id = parse_csv_int(fields[1], lineno);
        const double x = parse_csv_double(fields[2], lineno);
        const double y = parse_csv_double(fields[3], lineno);
        const double w = parse_csv_double(fields[4], lineno);
        const double h = parse_csv_double(fields[5], lineno);
        r.confidence = parse_csv_double(fields[6], lineno);
        r.class_id = parse_csv_int(fields[7], lineno);
        if (!(w > 0.0) || !(h > 0.0))
            throw std::runtime_error("tracks line " + std::to_string(lineno) +
                                     ": width and height must be positive");
        r.box = {x, y, x + w, y + h};
        if (!box_valid(r.box) || !std::isfinite(r.confidence))
            throw std::runtime_error("tracks line " + std::to_string(lineno) + ": invalid values");
        if (!seen.insert({r.frame, r.track_id}).second)
            throw std::runtime_error("tracks line " + std::to_string(lineno) +
                                     ": duplicate (frame, track_id) pair");
        rows.push_back(r);
    }
    return rows;
}

void write_tracks_file(const std::string& path, const std::vector<TrackRow>& rows) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_tracks(os, rows);
}

std::vector<TrackRow> read_tracks_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    return read_tracks(is);
}

Config Config::parse(std::istream& is) {
    Config cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string text = trim(line);
        if (text.empty()) continue;
        const size_t eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        if (!cfg.values_.emplace(key, value).second)
            throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" +
                              key + "'");
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    return parse(is);
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

const std::string* Config::raw(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
}

double Config::get_double(const std::string& key, double fallback) {
    const std::string* v = raw(key);
    if (v == nullptr) return fallback;
    double out = 0.0;
    const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
    if (res.ec != std::errc() || res.ptr != v->data() + v->size())
        throw ConfigError("config key '" + key + "': bad number '" + *v + "'");
    return out;
}

int Config::get_int(const std::string& key, int fallback) {
    const std::string* v = raw(key);
    if (v == nullptr) return fallback;
    int out = 0;
    const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
    if (res.ec != std::errc() || res.ptr != v->data() + v->size())
        throw ConfigError("config key '" + key + "': bad integer '" + *v + "'");
    return out;
}

std::uint64_t Config::get_uint64(const std::string& key, std::uint64_t fallback) {
    const std::string* v = raw(key);
    if (v == nullptr) return fallback;
    std::uint64_t out = 0;
    const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
    if (res.ec != std::errc() || res.ptr != v->data() + v->size())
        throw ConfigError("config key '" + key + "': bad unsigned integer '" + *v + "'");
    return out;
}

bool Config::get_bool(const std::string& key, bool fallback) {
    const std::string* v = raw(key);
    if (v == nullptr) return fallback;
    if (*v == "true" || *v == "1") return true;
    if (*v == "false" || *v == "0") return false;
    throw ConfigError("config key '" + key + "': expected true/false, got '" + *v + "'");
}

std::string Config::get_string(const std::string& key, const std::string& fallback) {
    const std::string* v = raw(key);
    return v == nullptr ? fallback : *v;
}

std::vector<double> Config::get_double_list(const std::string& key,
                                            const std::vector<double>& fallback) {
    const std::string* v = raw(key);
    if (v == nullptr) return fallback;
    std::vector<double> out;
    std::stringstream ss(*v);
    std::string field;
    while (std::getline(ss, field, ',')) {
        const std::string t = trim(field);
        if (t.empty()) throw ConfigError("config key '" + key + "': empty list entry");
        double d = 0.0;
        const auto res = std::from_chars(t.data(), t.data() + t.size(), d);
        if (res.ec != std::errc() || res.ptr != t.data() + t.size())
            throw ConfigError("config key '" + key + "': bad number '" + t + "'");
        out.push_back(d);
    }
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
}

void Config::finish() const {
    std::string unknown;
    for (const auto& [key, value] : values_) {
        if (used_.count(key) != 0) continue;
        if (!unknown.empty()) unknown += ", ";
        unknown += key;
    }
    if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
}

SceneConfig scene_config_from(Config& cfg) {
    SceneConfig sc;
    sc.num_objects = cfg.get_int("num_objects", sc.num_objects);
    sc.num_frames = cfg.get_int("num_frames", sc.num_frames);
    sc.image_width = cfg.get_double("image_width", sc.image_width);
    sc.image_height = cfg.get_double("image_height", sc.image_height);
    sc.num_classes = cfg.get_int("num_classes", sc.num_classes);
    sc.min_speed = cfg.get_double("min_speed", sc.min_speed);
    sc.max_speed = cfg.get_double("max_speed", sc.max_speed);
    sc.min_size = cfg.get_double("min_size", sc.min_size);
    sc.max_size = cfg.get_double("max_size", sc.max_size);
    sc.jitter_sigma = cfg.get_double("jitter_sigma", sc.jitter_sigma);
    sc.duplicates = cfg.get_int("duplicates", sc.duplicates);
    sc.embedding_dim = cfg.get_int("embedding_dim", sc.embedding_dim);
    sc.embedding_noise = cfg.get_double("embedding_noise", sc.embedding_noise);
    sc.score_confusion = cfg.get_double("score_confusion", sc.score_confusion);
    sc.distractor_rate = cfg.get_double("distractor_rate", sc.distractor_rate);
    sc.motion_noise = cfg.get_double("motion_noise", sc.motion_noise);
    sc.dropout = cfg.get_double("dropout", sc.dropout);
    sc.seed = cfg.get_uint64("seed", sc.seed);
    sc.validate();
    return sc;
}

void apply_pipeline_config(Config& cfg, PipelineConfig* pc) {
    FusionParams& fp = pc->fusion;
    fp.alpha = cfg.get_double("alpha", fp.alpha);
    fp.beta = cfg.get_double("beta", fp.beta);
    fp.gamma = cfg.get_double("gamma", fp.gamma);
    fp.eta = cfg.get_double("eta", fp.eta);
    fp.r_null = cfg.get_double("r_null", fp.r_null);
    fp.nms_iou = cfg.get_double("nms_iou", fp.nms_iou);
    fp.edge_min_iou = cfg.get_double("edge_min_iou", fp.edge_min_iou);
    pc->max_inactive = cfg.get_int("max_inactive", pc->max_inactive);
    pc->min_output_score = cfg.get_double("min_output_score", pc->min_output_score);
    pc->min_tracklet_length = cfg.get_int("min_tracklet_length", pc->min_tracklet_length);
    pc->spawn_threshold = cfg.get_double("spawn_threshold", pc->spawn_threshold);
    pc->proposal_budget = cfg.get_int("proposal_budget", pc->proposal_budget);
}

EvalConfig eval_config_from(Config& cfg) {
    EvalConfig ec;
    ec.box_iou_threshold = cfg.get_double("box_iou_threshold", ec.box_iou_threshold);
    ec.temporal_thresholds = cfg.get_double_list("temporal_thresholds", ec.temporal_thresholds);
    ec.validate();
    return ec;
}

}  // namespace tcdet
