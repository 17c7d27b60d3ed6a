#include "bboxlab/motion_tokens.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bboxlab/rng.hpp"

namespace bboxlab {

using nlohmann::json;

namespace {

// Direction bin centers as unit vectors. Axis-aligned entries are written
// exactly so that dequantizing a 0/90/180/270-degree token is bit-exact.
const std::array<std::pair<double, double>, kDirectionBins>& direction_table() {
    static const auto table = [] {
        std::array<std::pair<double, double>, kDirectionBins> t{};
        for (int k = 0; k < kDirectionBins; ++k) {
            const double rad = k * kDirectionStepDeg * M_PI / 180.0;
            t[static_cast<std::size_t>(k)] = {std::cos(rad), std::sin(rad)};
        }
        t[0] = {1.0, 0.0};
        t[6] = {0.0, 1.0};
        t[12] = {-1.0, 0.0};
        t[18] = {0.0, -1.0};
        return t;
    }();
    return table;
}

int snap_direction(double dx, double dy) {
    double deg = std::atan2(dy, dx) * 180.0 / M_PI;
    if (deg < 0.0) deg += 360.0;
    const int k0 = std::min(static_cast<int>(std::floor(deg / kDirectionStepDeg)),
                            kDirectionBins - 1);
    const double frac = deg - k0 * kDirectionStepDeg;
    const int k1 = (k0 + 1) % kDirectionBins;
    if (frac < kDirectionStepDeg / 2.0) return k0;
    if (frac > kDirectionStepDeg / 2.0) return k1;
    return std::max(k0, k1);  // exact tie: larger bin index (23 beats 0)
}

}  // namespace

ActionToken ActionToken::from_id(int id) {
    if (id < 0 || id >= kVocabularySize) {
        throw ValidationError("token id outside [0, 384): " + std::to_string(id));
    }
    return ActionToken{id / kDirectionBins, id % kDirectionBins};
}

ActionToken quantize_displacement(double dx, double dy) {
    if (!std::isfinite(dx) || !std::isfinite(dy)) {
        throw ValidationError("displacement must be finite");
    }
    const double m = std::min(std::hypot(dx, dy), kMaxMagnitude);
    // Nearest grid value, exact half-steps rounding up.
    int mag_bin = static_cast<int>(std::floor(m / kMagnitudeStep + 0.5));
    mag_bin = std::clamp(mag_bin, 0, kMagnitudeBins - 1);
    if (mag_bin == 0) return ActionToken{0, 0};  // zero magnitude forces direction 0
    return ActionToken{mag_bin, snap_direction(dx, dy)};
}

std::pair<double, double> dequantize(const ActionToken& token) {
    if (token.magnitude_bin < 0 || token.magnitude_bin >= kMagnitudeBins ||
        token.direction_bin < 0 || token.direction_bin >= kDirectionBins) {
        throw ValidationError("invalid action token");
    }
    const double m = token.magnitude_bin * kMagnitudeStep;
    const auto& [c, s] = direction_table()[static_cast<std::size_t>(token.direction_bin)];
    return {m * c, m * s};
}

TokenizedTrajectory tokenize_track(const std::vector<Box2D>& boxes, int width,
                                   int height, std::int64_t track_id, int first_frame,
                                   const std::string& class_label) {
    if (boxes.size() < 2) {
        throw ValidationError("tokenizing a track needs at least 2 frames");
    }
    if (width <= 0 || height <= 0) throw ValidationError("image dims must be positive");

    const double w = width, h = height;
    TokenizedTrajectory traj;
    traj.track_id = track_id;
    traj.class_label = class_label;
    traj.first_frame = first_frame;
    traj.last_frame = first_frame + static_cast<int>(boxes.size()) - 1;
    traj.initial_box = Box2D{boxes[0].x1 / w, boxes[0].y1 / h, boxes[0].x2 / w,
                             boxes[0].y2 / h};
    traj.steps.reserve(boxes.size() - 1);
    for (std::size_t i = 0; i + 1 < boxes.size(); ++i) {
        const Box2D& a = boxes[i];
        const Box2D& b = boxes[i + 1];
        BoxActionPair pair;
        pair.top_left = quantize_displacement((b.x1 - a.x1) / w, (b.y1 - a.y1) / h);
        pair.bottom_right = quantize_displacement((b.x2 - a.x2) / w, (b.y2 - a.y2) / h);
        traj.steps.push_back(pair);
    }
    return traj;
}

std::vector<Box2D> rollout(const TokenizedTrajectory& traj, int width, int height) {
    if (width <= 0 || height <= 0) throw ValidationError("image dims must be positive");
    const double w = width, h = height;

    double x1 = traj.initial_box.x1, y1 = traj.initial_box.y1;
    double x2 = traj.initial_box.x2, y2 = traj.initial_box.y2;
    std::vector<Box2D> boxes;
    boxes.reserve(traj.steps.size() + 1);
    boxes.push_back(Box2D{x1 * w, y1 * h, x2 * w, y2 * h});
    for (const BoxActionPair& pair : traj.steps) {
        const auto [tdx, tdy] = dequantize(pair.top_left);
        const auto [bdx, bdy] = dequantize(pair.bottom_right);
        x1 += tdx;
        y1 += tdy;
        x2 += bdx;
        y2 += bdy;
        if (x1 > x2) x1 = x2;
        if (y1 > y2) y1 = y2;
        boxes.push_back(Box2D{x1 * w, y1 * h, x2 * w, y2 * h});
    }
    return boxes;
}

std::vector<TokenizedTrajectory> tokenize_clip(const ClipAnnotation& clip) {
    // Gather per-track contiguous runs.
    std::map<std::int64_t, std::vector<std::pair<int, const ObjectState*>>> by_track;
    for (const auto& frame : clip.frames) {
        for (const auto& obj : frame.objects) {
            by_track[obj.track_id].emplace_back(frame.frame_index, &obj);
        }
    }
    std::vector<TokenizedTrajectory> out;
    for (auto& [track_id, states] : by_track) {
        std::sort(states.begin(), states.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::size_t run_start = 0;
        for (std::size_t i = 1; i <= states.size(); ++i) {
            const bool contiguous =
                i < states.size() && states[i].first == states[i - 1].first + 1;
            if (contiguous) continue;
            const std::size_t run_len = i - run_start;
            if (run_len >= 2) {
                std::vector<Box2D> boxes;
                boxes.reserve(run_len);
                for (std::size_t j = run_start; j < i; ++j) {
                    boxes.push_back(states[j].second->box2d);
                }
                out.push_back(tokenize_track(boxes, clip.width, clip.height, track_id,
                                             states[run_start].first,
                                             states[run_start].second->class_label));
            }
            run_start = i;
        }
    }
    return out;
}

std::string write_token_corpus(const std::vector<TokenizedTrajectory>& trajectories,
                               int width, int height, double fps, int n_frames) {
    std::ostringstream out;
    out << json{{"width", width}, {"height", height}, {"fps", fps},
                {"frames", n_frames}}
               .dump()
        << "\n";
    for (const auto& t : trajectories) {
        json steps = json::array();
        for (const auto& s : t.steps) {
            steps.push_back({s.top_left.id(), s.bottom_right.id()});
        }
        out << json{{"track_id", t.track_id},
                    {"class", t.class_label},
                    {"first_frame", t.first_frame},
                    {"last_frame", t.last_frame},
                    {"initial_box",
                     {t.initial_box.x1, t.initial_box.y1, t.initial_box.x2,
                      t.initial_box.y2}},
                    {"steps", steps}}
                   .dump()
            << "\n";
    }
    return out.str();
}

TokenCorpus parse_token_corpus(const std::string& text) {
    TokenCorpus corpus;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("bad JSON: ") + e.what(), line_no);
        }
        if (!j.contains("track_id")) {
            corpus.width = j.value("width", corpus.width);
            corpus.height = j.value("height", corpus.height);
            corpus.fps = j.value("fps", corpus.fps);
            corpus.n_frames = j.value("frames", corpus.n_frames);
            continue;
        }
        TokenizedTrajectory t;
        t.track_id = j.at("track_id").get<std::int64_t>();
        t.class_label = j.value("class", std::string("car"));
        t.first_frame = j.at("first_frame").get<int>();
        t.last_frame = j.at("last_frame").get<int>();
        const auto& box = j.at("initial_box");
        if (!box.is_array() || box.size() != 4) {
            throw ParseError("initial_box must be [x1,y1,x2,y2]", line_no);
        }
        t.initial_box = Box2D{box[0].get<double>(), box[1].get<double>(),
                              box[2].get<double>(), box[3].get<double>()};
        for (const auto& s : j.at("steps")) {
            if (!s.is_array() || s.size() != 2) {
                throw ParseError("each step must be [tl_id, br_id]", line_no);
            }
            t.steps.push_back(BoxActionPair{ActionToken::from_id(s[0].get<int>()),
                                            ActionToken::from_id(s[1].get<int>())});
        }
        if (t.first_frame < 0 || t.last_frame != t.first_frame +
                                                     static_cast<int>(t.steps.size())) {
            throw ValidationError("presence interval inconsistent with steps at line " +
                                  std::to_string(line_no));
        }
        corpus.trajectories.push_back(std::move(t));
    }
    return corpus;
}

ClipAnnotation rollout_clip(const TokenCorpus& corpus) {
    ClipAnnotation clip;
    clip.width = corpus.width;
    clip.height = corpus.height;
    clip.fps = corpus.fps;
    clip.frames.resize(static_cast<std::size_t>(corpus.n_frames));
    for (int i = 0; i < corpus.n_frames; ++i) {
        clip.frames[static_cast<std::size_t>(i)].frame_index = i;
    }
    for (const auto& traj : corpus.trajectories) {
        if (traj.first_frame < 0 || traj.last_frame >= corpus.n_frames) {
            throw ValidationError("trajectory presence outside clip");
        }
        const std::vector<Box2D> boxes = rollout(traj, clip.width, clip.height);
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            ObjectState obj;
            obj.track_id = traj.track_id;
            obj.class_label = traj.class_label;
            obj.box2d = boxes[i];
            clip.frames[static_cast<std::size_t>(traj.first_frame) + i].objects.push_back(
                std::move(obj));
        }
    }
    for (auto& frame : clip.frames) {
        std::sort(frame.objects.begin(), frame.objects.end(),
                  [](const ObjectState& a, const ObjectState& b) {
                      return a.track_id < b.track_id;
                  });
    }
    return clip;
}

namespace {

Box2D lerp_box(const Box2D& a, const Box2D& b, double t) {
    return Box2D{a.x1 + t * (b.x1 - a.x1), a.y1 + t * (b.y1 - a.y1),
                 a.x2 + t * (b.x2 - a.x2), a.y2 + t * (b.y2 - a.y2)};
}

Box2D clamp_box(const Box2D& b, int width, int height) {
    const double w = width, h = height;
    Box2D out;
    out.x1 = std::clamp(b.x1, 0.0, w);
    out.x2 = std::clamp(b.x2, 0.0, w);
    out.y1 = std::clamp(b.y1, 0.0, h);
    out.y2 = std::clamp(b.y2, 0.0, h);
    return out;
}

Box2D scale_about_center(const Box2D& b, double factor) {
    const double cx = b.mid_x(), cy = b.mid_y();
    return Box2D{cx + (b.x1 - cx) * factor, cy + (b.y1 - cy) * factor,
                 cx + (b.x2 - cx) * factor, cy + (b.y2 - cy) * factor};
}

struct ConditioningInfo {
    int m = 0;          // number of initial frames
    int n = 0;          // clip length
    int onset = 0;      // first generated frame for final-frame-only tracks

    // Tracks alive in the latest initial frame, with that anchor state and
    // an optional per-frame velocity from the previous initial frame.
    struct ActiveTrack {
        const ObjectState* anchor = nullptr;
        const ObjectState* previous = nullptr;  // in frame m-2, if present
        const ObjectState* final = nullptr;     // in the last frame, if present
    };
    std::map<std::int64_t, ActiveTrack> active;
    std::vector<const ObjectState*> final_only;
};

void validate_no_duplicate_tracks(const FrameAnnotation& frame) {
    std::set<std::int64_t> seen;
    for (const auto& obj : frame.objects) {
        if (!seen.insert(obj.track_id).second) {
            throw ValidationError("duplicate track_id " + std::to_string(obj.track_id) +
                                  " in conditioning frame");
        }
    }
}

ConditioningInfo analyze_conditioning(const std::vector<FrameAnnotation>& first_frames,
                                      const FrameAnnotation& last_frame, int n_frames) {
    if (first_frames.empty()) {
        throw ValidationError("conditioning needs at least one initial frame");
    }
    const int m = static_cast<int>(first_frames.size());
    if (n_frames < m + 1) {
        throw ValidationError("clip length " + std::to_string(n_frames) +
                              " too small for " + std::to_string(m) +
                              " initial frames plus a final frame");
    }
    for (const auto& f : first_frames) validate_no_duplicate_tracks(f);
    validate_no_duplicate_tracks(last_frame);

    ConditioningInfo info;
    info.m = m;
    info.n = n_frames;
    info.onset = std::max((n_frames + 1) / 2, m);

    const FrameAnnotation& latest = first_frames[static_cast<std::size_t>(m - 1)];
    for (const auto& obj : latest.objects) {
        ConditioningInfo::ActiveTrack track;
        track.anchor = &obj;
        if (m >= 2) {
            track.previous =
                first_frames[static_cast<std::size_t>(m - 2)].find_track(obj.track_id);
        }
        track.final = last_frame.find_track(obj.track_id);
        info.active[obj.track_id] = track;
    }
    for (const auto& obj : last_frame.objects) {
        if (!info.active.count(obj.track_id)) info.final_only.push_back(&obj);
    }
    return info;
}

ClipAnnotation conditioning_skeleton(const std::vector<FrameAnnotation>& first_frames,
                                     int n_frames, int width, int height, double fps) {
    ClipAnnotation clip;
    clip.width = width;
    clip.height = height;
    clip.fps = fps;
    clip.frames.resize(static_cast<std::size_t>(n_frames));
    for (int i = 0; i < n_frames; ++i) {
        clip.frames[static_cast<std::size_t>(i)].frame_index = i;
    }
    for (std::size_t i = 0; i < first_frames.size(); ++i) {
        clip.frames[i].objects = first_frames[i].objects;
    }
    return clip;
}

void inject_final_only(ClipAnnotation& clip, const ConditioningInfo& info,
                       bool include_final_frame) {
    for (const ObjectState* obj : info.final_only) {
        const Box2D onset_box = scale_about_center(obj->box2d, 0.5);
        for (int j = info.onset; j <= info.n - 2; ++j) {
            const double t =
                info.n - 1 == info.onset
                    ? 1.0
                    : static_cast<double>(j - info.onset) /
                          static_cast<double>(info.n - 1 - info.onset);
            ObjectState placed = *obj;
            placed.box2d = lerp_box(onset_box, obj->box2d, t);
            placed.box3d.reset();  // only 2D geometry is generated
            clip.frames[static_cast<std::size_t>(j)].objects.push_back(std::move(placed));
        }
        if (include_final_frame) {
            clip.frames[static_cast<std::size_t>(info.n - 1)].objects.push_back(*obj);
        }
    }
}

void sort_frame_objects(ClipAnnotation& clip) {
    for (auto& frame : clip.frames) {
        std::sort(frame.objects.begin(), frame.objects.end(),
                  [](const ObjectState& a, const ObjectState& b) {
                      return a.track_id < b.track_id;
                  });
    }
}

}  // namespace

ClipAnnotation interpolate_baseline(const std::vector<FrameAnnotation>& first_frames,
                                    const FrameAnnotation& last_frame, int n_frames,
                                    int width, int height, double fps) {
    const ConditioningInfo info = analyze_conditioning(first_frames, last_frame,
                                                       n_frames);
    ClipAnnotation clip = conditioning_skeleton(first_frames, n_frames, width, height,
                                                fps);
    clip.frames[static_cast<std::size_t>(n_frames - 1)].objects = last_frame.objects;

    const int anchor_frame = info.m - 1;
    for (const auto& [track_id, track] : info.active) {
        for (int j = info.m; j <= info.n - 2; ++j) {
            ObjectState placed = *track.anchor;
            if (track.final) {
                const double t = static_cast<double>(j - anchor_frame) /
                                 static_cast<double>(info.n - 1 - anchor_frame);
                placed.box2d = lerp_box(track.anchor->box2d, track.final->box2d, t);
            } else {
                // Constant velocity from the last two observations; the track
                // ends at N-2 so the final frame stays conditioning-exact.
                Box2D v{0, 0, 0, 0};
                if (track.previous) {
                    v = Box2D{track.anchor->box2d.x1 - track.previous->box2d.x1,
                              track.anchor->box2d.y1 - track.previous->box2d.y1,
                              track.anchor->box2d.x2 - track.previous->box2d.x2,
                              track.anchor->box2d.y2 - track.previous->box2d.y2};
                }
                const double steps = j - anchor_frame;
                placed.box2d = clamp_box(Box2D{track.anchor->box2d.x1 + steps * v.x1,
                                               track.anchor->box2d.y1 + steps * v.y1,
                                               track.anchor->box2d.x2 + steps * v.x2,
                                               track.anchor->box2d.y2 + steps * v.y2},
                                         width, height);
            }
            placed.box3d.reset();
            clip.frames[static_cast<std::size_t>(j)].objects.push_back(std::move(placed));
        }
    }
    inject_final_only(clip, info, /*include_final_frame=*/false);
    sort_frame_objects(clip);
    return clip;
}

ClipAnnotation interpolate_baseline(const TrajectoryConditioning& cond) {
    return interpolate_baseline(cond.first_frames, cond.last_frame, cond.n_frames,
                                cond.width, cond.height, cond.fps);
}

MarkovModel::MarkovModel() {
    for (auto& c : initial_counts) c.assign(kVocabularySize, 0);
    for (auto& c : transition_counts) {
        c.assign(static_cast<std::size_t>(kVocabularySize) * kVocabularySize, 0);
    }
}

MarkovModel markov_fit(const std::vector<TokenizedTrajectory>& corpus,
                       double smoothing) {
    if (corpus.empty()) throw ValidationError("markov_fit needs a non-empty corpus");
    if (smoothing <= 0.0) throw ValidationError("smoothing must be positive");

    MarkovModel model;
    model.smoothing = smoothing;
    for (const auto& traj : corpus) {
        const int roles = 2;
        for (int role = 0; role < roles; ++role) {
            int prev = -1;
            for (const auto& step : traj.steps) {
                const int id = role == 0 ? step.top_left.id() : step.bottom_right.id();
                if (prev < 0) {
                    ++model.initial_counts[static_cast<std::size_t>(role)]
                                          [static_cast<std::size_t>(id)];
                } else {
                    ++model.transition_counts[static_cast<std::size_t>(role)]
                                             [static_cast<std::size_t>(prev) *
                                                  kVocabularySize +
                                              static_cast<std::size_t>(id)];
                }
                prev = id;
            }
        }
    }
    return model;
}

std::string write_markov_model(const MarkovModel& model) {
    json roles = json::array();
    for (int role = 0; role < 2; ++role) {
        json initial = json::array();
        const auto& init = model.initial_counts[static_cast<std::size_t>(role)];
        for (int i = 0; i < kVocabularySize; ++i) {
            if (init[static_cast<std::size_t>(i)]) {
                initial.push_back({i, init[static_cast<std::size_t>(i)]});
            }
        }
        json transitions = json::array();
        const auto& trans = model.transition_counts[static_cast<std::size_t>(role)];
        for (int from = 0; from < kVocabularySize; ++from) {
            for (int to = 0; to < kVocabularySize; ++to) {
                const std::uint64_t c =
                    trans[static_cast<std::size_t>(from) * kVocabularySize +
                          static_cast<std::size_t>(to)];
                if (c) transitions.push_back({from, to, c});
            }
        }
        roles.push_back({{"initial", initial}, {"transitions", transitions}});
    }
    return json{{"smoothing", model.smoothing}, {"roles", roles}}.dump(2);
}

MarkovModel parse_markov_model(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("bad model JSON: ") + e.what());
    }
    MarkovModel model;
    model.smoothing = j.value("smoothing", 0.1);
    if (model.smoothing <= 0.0) throw ValidationError("smoothing must be positive");
    const auto& roles = j.at("roles");
    if (!roles.is_array() || roles.size() != 2) {
        throw ParseError("model needs exactly 2 corner roles");
    }
    for (int role = 0; role < 2; ++role) {
        for (const auto& entry : roles[static_cast<std::size_t>(role)].at("initial")) {
            const int id = entry.at(0).get<int>();
            ActionToken::from_id(id);  // range check
            model.initial_counts[static_cast<std::size_t>(role)]
                                [static_cast<std::size_t>(id)] =
                entry.at(1).get<std::uint64_t>();
        }
        for (const auto& entry :
             roles[static_cast<std::size_t>(role)].at("transitions")) {
            const int from = entry.at(0).get<int>();
            const int to = entry.at(1).get<int>();
            ActionToken::from_id(from);
            ActionToken::from_id(to);
            model.transition_counts[static_cast<std::size_t>(role)]
                                   [static_cast<std::size_t>(from) * kVocabularySize +
                                    static_cast<std::size_t>(to)] =
                entry.at(2).get<std::uint64_t>();
        }
    }
    return model;
}

namespace {

int sample_token(SplitMix64& rng, const std::uint64_t* counts, double smoothing,
                 double temperature) {
    if (temperature == 0.0) {
        int best = 0;
        std::uint64_t best_count = counts[0];
        for (int i = 1; i < kVocabularySize; ++i) {
            if (counts[static_cast<std::size_t>(i)] > best_count) {
                best_count = counts[static_cast<std::size_t>(i)];
                best = i;
            }
        }
        return best;
    }
    // p_i proportional to (count_i + alpha)^(1/T), computed in log space.
    std::array<double, kVocabularySize> logits{};
    double max_logit = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < kVocabularySize; ++i) {
        logits[static_cast<std::size_t>(i)] =
            std::log(static_cast<double>(counts[static_cast<std::size_t>(i)]) +
                     smoothing) /
            temperature;
        max_logit = std::max(max_logit, logits[static_cast<std::size_t>(i)]);
    }
    std::array<double, kVocabularySize> probs{};
    double total = 0.0;
    for (int i = 0; i < kVocabularySize; ++i) {
        probs[static_cast<std::size_t>(i)] =
            std::exp(logits[static_cast<std::size_t>(i)] - max_logit);
        total += probs[static_cast<std::size_t>(i)];
    }
    const double u = rng.next_unit() * total;
    double cum = 0.0;
    for (int i = 0; i < kVocabularySize; ++i) {
        cum += probs[static_cast<std::size_t>(i)];
        if (u < cum) return i;
    }
    return kVocabularySize - 1;
}

}  // namespace

std::vector<ClipAnnotation> markov_sample(const MarkovModel& model,
                                          const TrajectoryConditioning& cond,
                                          double temperature, std::uint64_t seed,
                                          int k) {
    if (k < 1) throw ValidationError("k must be at least 1");
    if (temperature < 0.0) throw ValidationError("temperature must be non-negative");
    const ConditioningInfo info = analyze_conditioning(cond.first_frames,
                                                       cond.last_frame, cond.n_frames);
    const double w = cond.width, h = cond.height;

    std::vector<ClipAnnotation> candidates;
    candidates.reserve(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
        SplitMix64 rng(mix_seed(seed, static_cast<std::uint64_t>(c)));
        ClipAnnotation clip = conditioning_skeleton(cond.first_frames, cond.n_frames,
                                                    cond.width, cond.height, cond.fps);
        // Tracks in ascending id order so generator consumption is frozen.
        for (const auto& [track_id, track] : info.active) {
            // Chain state from the observed conditioning step when available.
            int tl_state = -1, br_state = -1;
            if (track.previous) {
                tl_state = quantize_displacement(
                               (track.anchor->box2d.x1 - track.previous->box2d.x1) / w,
                               (track.anchor->box2d.y1 - track.previous->box2d.y1) / h)
                               .id();
                br_state = quantize_displacement(
                               (track.anchor->box2d.x2 - track.previous->box2d.x2) / w,
                               (track.anchor->box2d.y2 - track.previous->box2d.y2) / h)
                               .id();
            }
            // Pixel-space accumulation keeps a static chain bit-identical to
            // the anchor box.
            double x1 = track.anchor->box2d.x1, y1 = track.anchor->box2d.y1;
            double x2 = track.anchor->box2d.x2, y2 = track.anchor->box2d.y2;
            const auto pick = [&](std::size_t role, int state) {
                const std::uint64_t* counts =
                    state < 0 ? model.initial_counts[role].data()
                              : model.transition_counts[role].data() +
                                    static_cast<std::size_t>(state) * kVocabularySize;
                return sample_token(rng, counts, model.smoothing, temperature);
            };
            for (int j = info.m; j <= info.n - 1; ++j) {
                tl_state = pick(0, tl_state);
                br_state = pick(1, br_state);
                const auto [tdx, tdy] = dequantize(ActionToken::from_id(tl_state));
                const auto [bdx, bdy] = dequantize(ActionToken::from_id(br_state));
                x1 += tdx * w;
                y1 += tdy * h;
                x2 += bdx * w;
                y2 += bdy * h;
                if (x1 > x2) x1 = x2;
                if (y1 > y2) y1 = y2;
                ObjectState placed = *track.anchor;
                placed.box2d = Box2D{x1, y1, x2, y2};
                placed.box3d.reset();
                clip.frames[static_cast<std::size_t>(j)].objects.push_back(
                    std::move(placed));
            }
        }
        inject_final_only(clip, info, /*include_final_frame=*/true);
        sort_frame_objects(clip);
        candidates.push_back(std::move(clip));
    }
    return candidates;
}

BestOfK best_of_k(const std::vector<std::vector<Rgb8Frame>>& candidates,
                  const std::vector<Rgb8Frame>& reference) {
    if (candidates.empty()) throw ValidationError("best_of_k needs candidates");

    BestOfK best;
    best.index = -1;
    double best_iou = -1.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const MaskScoreReport report =
            score_clip(candidates[i], reference, /*pred_is_generated=*/false);
        if (report.mask_iou > best_iou) {
            best_iou = report.mask_iou;
            best.index = static_cast<int>(i);
            best.report = report;
        }
    }
    return best;
}

}  // namespace bboxlab
