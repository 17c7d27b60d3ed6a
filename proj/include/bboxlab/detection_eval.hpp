#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "bboxlab/geometry.hpp"

namespace bboxlab {

enum class Dataset { kKitti, kVKitti, kBdd, kNuScenes };

Dataset dataset_from_string(const std::string& name);
std::string to_string(Dataset dataset);

struct Detection {
    int frame_index = 0;
    Box2D bbox;
    double score = 1.0;
    std::string class_label;
};

struct DetectionSet {
    std::string clip_id;
    int width = 0;
    int height = 0;
    std::vector<Detection> detections;
};

// Default confidence cutoff applied to detector outputs on ground-truth
// frames when they serve as reference labels.
inline constexpr double kGtConfidenceCutoff = 0.6;

// AP at the 10 COCO IoU thresholds 0.50..0.95 (step 0.05) and their mean.
struct APReport {
    double map = 0.0;
    std::array<double, 10> ap_by_threshold{};

    double ap50() const { return ap_by_threshold[0]; }
    double ap75() const { return ap_by_threshold[5]; }
    double ap90() const { return ap_by_threshold[8]; }

    static constexpr std::array<double, 10> thresholds() {
        return {0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95};
    }
};

struct PRPoint {
    double confidence_cutoff = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

// Precision/recall at the 100 confidence cutoffs 0.01..1.00 for one fixed
// IoU threshold.
struct PRCurve {
    double iou_threshold = 0.5;
    std::vector<PRPoint> points;
};

// Dataset label -> MS COCO label. Unmapped labels return nullopt and are
// excluded from evaluation. Lookup is case-insensitive.
std::optional<std::string> map_class_to_coco(Dataset dataset, const std::string& label);

// Applies the label mapping to every detection, dropping unmapped ones.
DetectionSet map_detections_to_coco(const DetectionSet& set, Dataset dataset);

// Keeps detections with score >= cutoff (inclusive).
DetectionSet filter_gt_detections(const DetectionSet& set,
                                  double cutoff = kGtConfidenceCutoff);

struct FrameMatchResult {
    std::vector<std::pair<int, int>> matches;  // (pred index, ref index)
    std::vector<int> unmatched_preds;
    std::vector<int> unmatched_refs;
};

// Greedy class-agnostic matching within one frame. Predictions are processed
// in descending score (ties: larger box area, then input order); each takes
// the still-unmatched reference with the highest IoU if that IoU reaches the
// threshold (ties: lowest reference index).
FrameMatchResult match_frame(const std::vector<Detection>& preds,
                             const std::vector<Detection>& refs,
                             double iou_threshold);

// COCO-style AP over detections pooled across frames (grouped by
// frame_index): 101-point interpolated area under the precision-recall
// curve. With no references this is 1.0 for no predictions, else 0.0.
double average_precision(const std::vector<Detection>& preds,
                         const std::vector<Detection>& refs, double iou_threshold);

APReport evaluate_coco(const std::vector<Detection>& preds,
                       const std::vector<Detection>& refs);

PRCurve pr_curve(const std::vector<Detection>& preds,
                 const std::vector<Detection>& refs, double iou_threshold);

// Merges per-clip sets into one pool for global evaluation, re-keying frame
// indices so frames from different clips never mix. Sets are paired by
// clip_id; a clip missing on one side contributes an empty group.
struct PooledDetections {
    std::vector<Detection> preds;
    std::vector<Detection> refs;
};
PooledDetections pool_detection_sets(const std::vector<DetectionSet>& preds,
                                     const std::vector<DetectionSet>& refs);

// JSON interchange for detector outputs:
//   {"clip_id": "...", "width": w, "height": h,
//    "frames": [{"index": i, "detections":
//                 [{"bbox": [x1,y1,x2,y2], "score": s, "class": "car"}]}]}
// A file may hold one such object or an array of them.
std::vector<DetectionSet> parse_detection_json(const std::string& text);
std::string write_detection_json(const std::vector<DetectionSet>& sets);

}  // namespace bboxlab
