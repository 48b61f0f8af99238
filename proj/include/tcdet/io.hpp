#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcdet/evaluation.hpp"
#include "tcdet/frame.hpp"
#include "tcdet/pipeline.hpp"
#include "tcdet/simulator.hpp"

namespace tcdet {

// configuration mistakes: maps to CLI exit code 2
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

constexpr int kStreamVersion = 1;

struct StreamHeader {
    int version = kStreamVersion;
    int num_classes = 0;    // foreground classes C
    int embedding_dim = 0;  // D
    double image_width = 0.0;
    double image_height = 0.0;
};

struct DetectionStream {
    StreamHeader header;
    std::vector<FrameRecord> frames;
};

DetectionStream to_stream(const SyntheticSequence& seq);

// JSON-Lines: a header object first, then one object per frame
void write_stream(std::ostream& os, const DetectionStream& stream);
DetectionStream read_stream(std::istream& is);  // throws std::runtime_error
void write_stream_file(const std::string& path, const DetectionStream& stream);
DetectionStream read_stream_file(const std::string& path);

// CSV rows frame,track_id,x,y,w,h,confidence,class; no header line
void write_tracks(std::ostream& os, const std::vector<TrackRow>& rows);
std::vector<TrackRow> read_tracks(std::istream& is);  // throws std::runtime_error
void write_tracks_file(const std::string& path, const std::vector<TrackRow>& rows);
std::vector<TrackRow> read_tracks_file(const std::string& path);

// flat key=value text; '#' starts a comment; unknown keys are rejected once
// every consumer has claimed its own via finish()
class Config {
  public:
    static Config parse(std::istream& is);
    static Config parse_file(const std::string& path);

    bool has(const std::string& key) const;
    double get_double(const std::string& key, double fallback);
    int get_int(const std::string& key, int fallback);
    std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback);
    bool get_bool(const std::string& key, bool fallback);
    std::string get_string(const std::string& key, const std::string& fallback);
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback);

    void finish() const;  // throws ConfigError if any key was never read

  private:
    std::map<std::string, std::string> values_;
    std::set<std::string> used_;

    const std::string* raw(const std::string& key);
};

SceneConfig scene_config_from(Config& cfg);
void apply_pipeline_config(Config& cfg, PipelineConfig* pc);
EvalConfig eval_config_from(Config& cfg);

}  // namespace tcdet
