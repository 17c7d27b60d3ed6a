#include "bboxlab/detection_eval.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace bboxlab {

using nlohmann::json;

namespace {

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

using LabelMap = std::map<std::string, std::string>;

const LabelMap& kitti_map() {
    static const LabelMap m = {
        {"car", "car"},          {"van", "car"},       {"truck", "truck"},
        {"pedestrian", "person"}, {"person", "person"}, {"cyclist", "person"},
        {"tram", "train"},
    };
    return m;
}

const LabelMap& vkitti_map() {
    static const LabelMap m = {
        {"car", "car"}, {"van", "car"}, {"truck", "truck"}, {"tram", "train"},
    };
    return m;
}

const LabelMap& bdd_map() {
    static const LabelMap m = {
        {"pedestrian", "person"}, {"rider", "person"}, {"car", "car"},
        {"truck", "truck"},       {"bus", "bus"},      {"train", "train"},
    };
    return m;
}

const LabelMap& nuscenes_map() {
    static const LabelMap m = {
        {"human.adult", "person"},
        {"human.child", "person"},
        {"human.construction_worker", "person"},
        {"human.personal_mobility", "person"},
        {"human.police_officer", "person"},
        {"human.wheelchair", "person"},
        {"vehicle.bicycle", "person"},
        {"vehicle.motorcycle", "person"},
        {"vehicle.bus", "truck"},
        {"vehicle.construction", "truck"},
        {"vehicle.ambulance", "truck"},
        {"vehicle.police", "truck"},
        {"vehicle.trailer", "truck"},
        {"vehicle.truck", "truck"},
        {"car", "car"},
    };
    return m;
}

const LabelMap& map_for(Dataset dataset) {
    switch (dataset) {
        case Dataset::kKitti: return kitti_map();
        case Dataset::kVKitti: return vkitti_map();
        case Dataset::kBdd: return bdd_map();
        case Dataset::kNuScenes: return nuscenes_map();
    }
    return kitti_map();
}

// Prediction processing order: descending score, larger area first on ties,
// then input order.
std::vector<int> pred_order(const std::vector<Detection>& preds) {
    std::vector<int> order(preds.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const Detection& da = preds[static_cast<std::size_t>(a)];
        const Detection& db = preds[static_cast<std::size_t>(b)];
        if (da.score != db.score) return da.score > db.score;
        return da.bbox.area() > db.bbox.area();
    });
    return order;
}

struct TpEntry {
    double score;
    double area;
    bool tp;
};

// Per-frame matching, then one pooled list of detections with TP flags in
// the global processing order.
std::vector<TpEntry> pooled_tp_entries(const std::vector<Detection>& preds,
                                       const std::vector<Detection>& refs,
                                       double iou_threshold) {
    // Ordered grouping keeps the pooled order (and thus tie resolution in the
    // global sort) independent of hash-table layout.
    std::map<int, std::vector<Detection>> preds_by_frame;
    std::map<int, std::vector<Detection>> refs_by_frame;
    for (const auto& d : preds) preds_by_frame[d.frame_index].push_back(d);
    for (const auto& d : refs) refs_by_frame[d.frame_index].push_back(d);

    std::vector<TpEntry> entries;
    entries.reserve(preds.size());
    for (auto& [frame, frame_preds] : preds_by_frame) {
        static const std::vector<Detection> kEmpty;
        const auto rit = refs_by_frame.find(frame);
        const std::vector<Detection>& frame_refs =
            rit != refs_by_frame.end() ? rit->second : kEmpty;
        const FrameMatchResult result = match_frame(frame_preds, frame_refs,
                                                    iou_threshold);
        std::vector<bool> tp(frame_preds.size(), false);
        for (const auto& [p, r] : result.matches) tp[static_cast<std::size_t>(p)] = true;
        for (std::size_t i = 0; i < frame_preds.size(); ++i) {
            entries.push_back(TpEntry{frame_preds[i].score, frame_preds[i].bbox.area(),
                                      tp[i]});
        }
    }
    std::stable_sort(entries.begin(), entries.end(), [](const TpEntry& a, const TpEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.area > b.area;
    });
    return entries;
}

}  // namespace

Dataset dataset_from_string(const std::string& name) {
    const std::string n = to_lower(name);
    if (n == "kitti") return Dataset::kKitti;
    if (n == "vkitti") return Dataset::kVKitti;
    if (n == "bdd") return Dataset::kBdd;
    if (n == "nuscenes") return Dataset::kNuScenes;
    throw ValidationError("unknown dataset: " + name);
}

std::string to_string(Dataset dataset) {
    switch (dataset) {
        case Dataset::kKitti: return "kitti";
        case Dataset::kVKitti: return "vkitti";
        case Dataset::kBdd: return "bdd";
        case Dataset::kNuScenes: return "nuscenes";
    }
    return "kitti";
}

std::optional<std::string> map_class_to_coco(Dataset dataset, const std::string& label) {
    const LabelMap& m = map_for(dataset);
    const auto it = m.find(to_lower(label));
    if (it == m.end()) return std::nullopt;
    return it->second;
}

DetectionSet map_detections_to_coco(const DetectionSet& set, Dataset dataset) {
    DetectionSet out = set;
    out.detections.clear();
    for (const auto& d : set.detections) {
        if (auto mapped = map_class_to_coco(dataset, d.class_label)) {
            Detection kept = d;
            kept.class_label = *mapped;
            out.detections.push_back(std::move(kept));
        }
    }
    return out;
}

DetectionSet filter_gt_detections(const DetectionSet& set, double cutoff) {
    DetectionSet out = set;
    out.detections.clear();
    for (const auto& d : set.detections) {
        if (d.score >= cutoff) out.detections.push_back(d);
    }
    return out;
}

FrameMatchResult match_frame(const std::vector<Detection>& preds,
                             const std::vector<Detection>& refs,
                             double iou_threshold) {
    FrameMatchResult result;
    std::vector<bool> ref_taken(refs.size(), false);
    std::vector<bool> pred_matched(preds.size(), false);
    for (int p : pred_order(preds)) {
        const Detection& pred = preds[static_cast<std::size_t>(p)];
        int best_ref = -1;
        double best_iou = 0.0;
        for (std::size_t r = 0; r < refs.size(); ++r) {
            if (ref_taken[r]) continue;
            const double iou = box_iou(pred.bbox, refs[r].bbox);
            if (iou >= iou_threshold && iou > best_iou) {
                best_iou = iou;
                best_ref = static_cast<int>(r);
            }
        }
        if (best_ref >= 0) {
            ref_taken[static_cast<std::size_t>(best_ref)] = true;
            pred_matched[static_cast<std::size_t>(p)] = true;
            result.matches.emplace_back(p, best_ref);
        }
    }
    for (std::size_t p = 0; p < preds.size(); ++p) {
        if (!pred_matched[p]) result.unmatched_preds.push_back(static_cast<int>(p));
    }
    for (std::size_t r = 0; r < refs.size(); ++r) {
        if (!ref_taken[r]) result.unmatched_refs.push_back(static_cast<int>(r));
    }
    return result;
}

double average_precision(const std::vector<Detection>& preds,
                         const std::vector<Detection>& refs, double iou_threshold) {
    if (refs.empty()) return preds.empty() ? 1.0 : 0.0;

    const std::vector<TpEntry> entries = pooled_tp_entries(preds, refs, iou_threshold);
    const double n_refs = static_cast<double>(refs.size());
    std::vector<double> precisions(entries.size());
    std::vector<double> recalls(entries.size());
    std::size_t tp = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].tp) ++tp;
        precisions[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
        recalls[i] = static_cast<double>(tp) / n_refs;
    }
    // Interpolated precision: max precision at any recall >= the grid point.
    std::vector<double> max_from(entries.size() + 1, 0.0);
    for (std::size_t i = entries.size(); i-- > 0;) {
        max_from[i] = std::max(precisions[i], max_from[i + 1]);
    }
    double ap_sum = 0.0;
    for (int k = 0; k <= 100; ++k) {
        const double grid = static_cast<double>(k) / 100.0;
        const std::size_t first =
            static_cast<std::size_t>(std::lower_bound(recalls.begin(), recalls.end(), grid) -
                                     recalls.begin());
        ap_sum += max_from[first];
    }
    return ap_sum / 101.0;
}

APReport evaluate_coco(const std::vector<Detection>& preds,
                       const std::vector<Detection>& refs) {
    APReport report;
    const auto thresholds = APReport::thresholds();
    double sum = 0.0;
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        report.ap_by_threshold[i] = average_precision(preds, refs, thresholds[i]);
        sum += report.ap_by_threshold[i];
    }
    report.map = sum / static_cast<double>(thresholds.size());
    return report;
}

PRCurve pr_curve(const std::vector<Detection>& preds,
                 const std::vector<Detection>& refs, double iou_threshold) {
    if (refs.empty()) throw ValidationError("PR curve undefined for empty references");

    PRCurve curve;
    curve.iou_threshold = iou_threshold;
    curve.points.reserve(100);
    const double n_refs = static_cast<double>(refs.size());
    std::map<int, std::vector<Detection>> refs_by_frame;
    for (const auto& d : refs) refs_by_frame[d.frame_index].push_back(d);
    for (int k = 1; k <= 100; ++k) {
        const double cutoff = static_cast<double>(k) / 100.0;
        std::vector<Detection> retained;
        for (const auto& d : preds) {
            if (d.score >= cutoff) retained.push_back(d);
        }
        std::size_t tp = 0;
        if (!retained.empty()) {
            std::map<int, std::vector<Detection>> by_frame;
            for (const auto& d : retained) by_frame[d.frame_index].push_back(d);
            for (const auto& [frame, frame_preds] : by_frame) {
                static const std::vector<Detection> kEmpty;
                const auto rit = refs_by_frame.find(frame);
                const std::vector<Detection>& frame_refs =
                    rit != refs_by_frame.end() ? rit->second : kEmpty;
                tp += match_frame(frame_preds, frame_refs, iou_threshold).matches.size();
            }
        }
        PRPoint point;
        point.confidence_cutoff = cutoff;
        point.precision = retained.empty()
                              ? 1.0
                              : static_cast<double>(tp) /
                                    static_cast<double>(retained.size());
        point.recall = static_cast<double>(tp) / n_refs;
        curve.points.push_back(point);
    }
    return curve;
}

PooledDetections pool_detection_sets(const std::vector<DetectionSet>& preds,
                                     const std::vector<DetectionSet>& refs) {
    // Stable clip ordering: refs first, then pred-only clips.
    std::vector<std::string> clip_order;
    std::unordered_map<std::string, int> clip_base;
    auto add_clip = [&](const std::string& id) {
        if (!clip_base.count(id)) {
            clip_base[id] = static_cast<int>(clip_order.size());
            clip_order.push_back(id);
        }
    };
    for (const auto& s : refs) add_clip(s.clip_id);
    for (const auto& s : preds) add_clip(s.clip_id);

    // Frame keys must stay unique across clips; clips are far shorter than
    // this stride.
    constexpr int kStride = 1 << 20;
    PooledDetections pool;
    auto append = [&](const std::vector<DetectionSet>& sets,
                      std::vector<Detection>& out) {
        for (const auto& s : sets) {
            const int base = clip_base[s.clip_id] * kStride;
            for (const auto& d : s.detections) {
                if (d.frame_index < 0 || d.frame_index >= kStride) {
                    throw ValidationError("frame index out of range: " +
                                          std::to_string(d.frame_index));
                }
                Detection keyed = d;
                keyed.frame_index += base;
                out.push_back(std::move(keyed));
            }
        }
    };
    append(preds, pool.preds);
    append(refs, pool.refs);
    return pool;
}

std::vector<DetectionSet> parse_detection_json(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("bad detection JSON: ") + e.what());
    }
    std::vector<json> items;
    if (root.is_array()) {
        items.assign(root.begin(), root.end());
    } else {
        items.push_back(root);
    }
    std::vector<DetectionSet> sets;
    for (const json& item : items) {
        DetectionSet set;
        set.clip_id = item.value("clip_id", std::string("clip"));
        set.width = item.value("width", 0);
        set.height = item.value("height", 0);
        for (const json& frame : item.value("frames", json::array())) {
            const int index = frame.at("index").get<int>();
            if (index < 0) throw ValidationError("negative frame index");
            for (const json& det : frame.value("detections", json::array())) {
                Detection d;
                d.frame_index = index;
                const auto& bbox = det.at("bbox");
                if (!bbox.is_array() || bbox.size() != 4) {
                    throw ParseError("detection bbox must be [x1,y1,x2,y2]");
                }
                d.bbox = Box2D{bbox[0].get<double>(), bbox[1].get<double>(),
                               bbox[2].get<double>(), bbox[3].get<double>()};
                if (!box_is_valid(d.bbox)) throw ValidationError("invalid detection bbox");
                d.score = det.value("score", 1.0);
                if (d.score < 0.0 || d.score > 1.0) {
                    throw ValidationError("detection score outside [0,1]");
                }
                d.class_label = det.value("class", std::string());
                set.detections.push_back(std::move(d));
            }
        }
        sets.push_back(std::move(set));
    }
    return sets;
}

std::string write_detection_json(const std::vector<DetectionSet>& sets) {
    json arr = json::array();
    for (const auto& set : sets) {
        std::map<int, json> frames;
        for (const auto& d : set.detections) {
            json det = {{"bbox", {d.bbox.x1, d.bbox.y1, d.bbox.x2, d.bbox.y2}},
                        {"score", d.score},
                        {"class", d.class_label}};
            if (!frames.count(d.frame_index)) {
                frames[d.frame_index] = json{{"index", d.frame_index},
                                             {"detections", json::array()}};
            }
            frames[d.frame_index]["detections"].push_back(det);
        }
        json obj = {{"clip_id", set.clip_id},
                    {"width", set.width},
                    {"height", set.height},
                    {"frames", json::array()}};
        for (auto& [index, frame] : frames) obj["frames"].push_back(std::move(frame));
        arr.push_back(std::move(obj));
    }
    return arr.size() == 1 ? arr[0].dump(2) : arr.dump(2);
}

}  // namespace bboxlab
