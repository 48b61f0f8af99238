#include "tcdet/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace tcdet {

namespace {

constexpr double kTargetLogit = 4.0;       // peak logit of a true-class score
constexpr double kDistractorBgLogit = 2.0;
constexpr double kAccelSigma = 0.02;       // px/frame^2 velocity drift
constexpr double kMinSide = 1.0;           // floor on jittered candidate sides

double normal(std::mt19937_64& rng, double sigma) {
    std::normal_distribution<double> d(0.0, sigma);
    return d(rng);
}

double uni(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(rng);
}

int uni_int(std::mt19937_64& rng, int lo, int hi) {
    std::uniform_int_distribution<int> d(lo, hi);
    return d(rng);
}

int poisson(std::mt19937_64& rng, double rate) {
    if (rate <= 0.0) return 0;
    std::poisson_distribution<int> d(rate);
    return d(rng);
}

std::vector<double> random_unit(std::mt19937_64& rng, int dim) {
    std::vector<double> v(dim);
    double sq = 0.0;
    do {
        sq = 0.0;
        for (double& x : v) {
            x = normal(rng, 1.0);
            sq += x * x;
        }
    } while (sq < 1e-12);
    const double inv = 1.0 / std::sqrt(sq);
    for (double& x : v) x *= inv;
    return v;
}

ClassDistribution softmax(const std::vector<double>& logits) {
    const double top = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(logits[i] - top);
        sum += p[i];
    }
    for (double& x : p) x /= sum;
    return ClassDistribution(std::move(p));
}

struct ObjectState {
    double cx = 0, cy = 0, w = 0, h = 0, vx = 0, vy = 0;
    int class_id = 0;
    std::vector<double> identity;
};

Box box_of(const ObjectState& o) {
    return {o.cx - 0.5 * o.w, o.cy - 0.5 * o.h, o.cx + 0.5 * o.w, o.cy + 0.5 * o.h};
}

void reflect(double& pos, double& vel, double lo, double hi) {
    if (pos < lo) {
        pos = 2.0 * lo - pos;
        vel = -vel;
    } else if (pos > hi) {
        pos = 2.0 * hi - pos;
        vel = -vel;
    }
    pos = std::clamp(pos, lo, hi);
}

}  // namespace

void SceneConfig::validate() const {
    if (num_objects < 0)
        throw std::invalid_argument("SceneConfig: num_objects must be >= 0");
    if (num_frames < 1)
        throw std::invalid_argument("SceneConfig: num_frames must be >= 1");
    if (!(std::isfinite(image_width) && std::isfinite(image_height) &&
          image_width > 0.0 && image_height > 0.0))
        throw std::invalid_argument("SceneConfig: image dimensions must be positive");
    if (num_classes < 1)
        throw std::invalid_argument("SceneConfig: num_classes must be >= 1");
    if (!(std::isfinite(min_speed) && std::isfinite(max_speed) && min_speed >= 0.0 &&
          max_speed >= min_speed))
        throw std::invalid_argument("SceneConfig: bad speed range");
    if (!(std::isfinite(min_size) && std::isfinite(max_size) && min_size > 0.0 &&
          max_size >= min_size))
        throw std::invalid_argument("SceneConfig: bad size range");
    if (max_size * 1.2 > std::min(image_width, image_height) / 2.0)
        throw std::invalid_argument("SceneConfig: objects too large for the image");
    if (!(jitter_sigma >= 0.0) || !(embedding_noise >= 0.0) ||
        !(score_confusion >= 0.0) || !(distractor_rate >= 0.0) ||
        !(motion_noise >= 0.0))
        throw std::invalid_argument("SceneConfig: noise parameters must be >= 0");
    if (duplicates < 0)
        throw std::invalid_argument("SceneConfig: duplicates must be >= 0");
    if (embedding_dim < 2)
        throw std::invalid_argument("SceneConfig: embedding_dim must be >= 2");
    if (!(dropout >= 0.0 && dropout < 1.0))
        throw std::invalid_argument("SceneConfig: dropout must be in [0,1)");
}

SyntheticSequence generate(const SceneConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    const double W = config.image_width;
    const double H = config.image_height;
    const int N = config.num_objects;

    SyntheticSequence seq;
    seq.config = config;

    std::vector<ObjectState> objects(N);
    for (int o = 0; o < N; ++o) {
        ObjectState& s = objects[o];
        s.class_id = uni_int(rng, 1, config.num_classes);
        // Speeds stratified ascending and sizes descending across objects, so
        // the fastest object is also the smallest: this keeps every motion
        // split populated regardless of seed.
        const double frac = (o + uni(rng, 0.0, 1.0)) / N;
        const double speed =
            config.min_speed + (config.max_speed - config.min_speed) * frac;
        const double base = config.max_size - (config.max_size - config.min_size) * frac;
        s.w = base * uni(rng, 0.9, 1.1);
        s.h = base * uni(rng, 0.9, 1.1);
        const double theta = uni(rng, 0.0, 2.0 * std::numbers::pi);
        s.vx = speed * std::cos(theta);
        s.vy = speed * std::sin(theta);
        s.cx = uni(rng, s.w / 2.0, W - s.w / 2.0);
        s.cy = uni(rng, s.h / 2.0, H - s.h / 2.0);

        for (int attempt = 0;; ++attempt) {
            if (attempt >= 1000)
                throw std::runtime_error("generate: could not draw distinct identities");
            s.identity = random_unit(rng, config.embedding_dim);
            bool distinct = true;
            for (int p = 0; p < o && distinct; ++p) {
                double dot = 0.0;
                for (int i = 0; i < config.embedding_dim; ++i)
                    dot += s.identity[i] * objects[p].identity[i];
                distinct = dot < 0.5;
            }
            if (distinct) break;
        }
        seq.objects.push_back({o, s.class_id, Embedding(s.identity)});
    }

    std::vector<Box> prev_box(N), cur_box(N);
    seq.frames.reserve(config.num_frames);
    for (int t = 0; t < config.num_frames; ++t) {
        for (int o = 0; o < N; ++o) {
            ObjectState& s = objects[o];
            if (t > 0) {
                s.vx += normal(rng, kAccelSigma);
                s.vy += normal(rng, kAccelSigma);
                s.cx += s.vx;
                s.cy += s.vy;
                reflect(s.cx, s.vx, s.w / 2.0, W - s.w / 2.0);
                reflect(s.cy, s.vy, s.h / 2.0, H - s.h / 2.0);
            }
            cur_box[o] = box_of(s);
        }

        std::vector<char> visible(N, 1);
        for (int o = 0; o < N; ++o)
            visible[o] = uni(rng, 0.0, 1.0) >= config.dropout;

        FrameRecord rec;
        rec.frame_index = t;
        for (int o = 0; o < N; ++o)
            if (visible[o])
                rec.ground_truth.push_back({o, objects[o].class_id, cur_box[o]});

        for (int o = 0; o < N; ++o) {
            if (!visible[o]) continue;
            const ObjectState& s = objects[o];
            Motion true_motion{0.0, 0.0, 0.0, 0.0};
            if (t > 0)
                true_motion = {cur_box[o].x1 - prev_box[o].x1,
                               cur_box[o].y1 - prev_box[o].y1,
                               cur_box[o].width() - prev_box[o].width(),
                               cur_box[o].height() - prev_box[o].height()};

            for (int dup = 0; dup < config.duplicates; ++dup) {
                Detection d;
                Box b = cur_box[o];
                if (config.jitter_sigma > 0.0) {
                    b.x1 += normal(rng, config.jitter_sigma);
                    b.y1 += normal(rng, config.jitter_sigma);
                    b.x2 += normal(rng, config.jitter_sigma);
                    b.y2 += normal(rng, config.jitter_sigma);
                    b.x2 = std::max(b.x2, b.x1 + kMinSide);
                    b.y2 = std::max(b.y2, b.y1 + kMinSide);
                }
                d.box = b;

                const double quality = iou(b, cur_box[o]);
                if (config.embedding_noise > 0.0) {
                    // appearance degrades with box quality: a badly-placed
                    // candidate also looks less like the object
                    const double sigma_eff =
                        config.embedding_noise * (1.0 + 4.0 * (1.0 - quality));
                    std::vector<double> noise = random_unit(rng, config.embedding_dim);
                    std::vector<double> v(s.identity);
                    for (int i = 0; i < config.embedding_dim; ++i)
                        v[i] += sigma_eff * noise[i];
                    d.embedding = Embedding(std::move(v));
                } else {
                    d.embedding = Embedding(s.identity);
                }

                std::vector<double> logits(config.num_classes + 1, 0.0);
                logits[s.class_id] = kTargetLogit;
                if (config.score_confusion > 0.0)
                    for (double& l : logits) l += normal(rng, config.score_confusion);
                d.scores = softmax(logits);

                if (t > 0) {
                    d.has_motion = true;
                    d.motion = true_motion;
                    if (config.motion_noise > 0.0)
                        for (double& m : d.motion) m += normal(rng, config.motion_noise);
                }
                rec.candidates.push_back(std::move(d));
            }
        }

        const int extras = poisson(rng, config.distractor_rate);
        for (int k = 0; k < extras; ++k) {
            Detection d;
            const double w = uni(rng, config.min_size, config.max_size);
            const double h = uni(rng, config.min_size, config.max_size);
            const double cx = uni(rng, w / 2.0, W - w / 2.0);
            const double cy = uni(rng, h / 2.0, H - h / 2.0);
            d.box = {cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0};
            std::vector<double> logits(config.num_classes + 1, 0.0);
            logits[0] = kDistractorBgLogit;
            logits[uni_int(rng, 1, config.num_classes)] = uni(rng, 0.0, kTargetLogit);
            if (config.score_confusion > 0.0)
                for (double& l : logits) l += normal(rng, config.score_confusion);
            d.scores = softmax(logits);
            d.embedding = Embedding(random_unit(rng, config.embedding_dim));
            rec.candidates.push_back(std::move(d));
        }

        seq.frames.push_back(std::move(rec));
        prev_box = cur_box;
    }
    return seq;
}

MotionSpeed motion_speed_of(const std::vector<Box>& boxes) {
    if (boxes.size() < 2)
        throw std::domain_error("motion_speed_of: need at least two boxes");
    double sum = 0.0;
    for (std::size_t i = 1; i < boxes.size(); ++i) sum += iou(boxes[i - 1], boxes[i]);
    const double mean = sum / static_cast<double>(boxes.size() - 1);
    if (mean > 0.8) return MotionSpeed::slow;
    if (mean >= 0.6) return MotionSpeed::medium;
    return MotionSpeed::fast;
}

const char* to_string(MotionSpeed s) {
    switch (s) {
        case MotionSpeed::slow: return "slow";
        case MotionSpeed::medium: return "medium";
        default: return "fast";
    }
}

}  // namespace tcdet
