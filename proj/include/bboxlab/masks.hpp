#pragma once

#include <cstdint>
#include <vector>

#include "bboxlab/renderer_types.hpp"

namespace bboxlab {

struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;  // row major, 0 or 1

    BinaryMask() = default;
    BinaryMask(int w, int h)
        : width(w), height(h),
          bits(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0) {
        if (w <= 0 || h <= 0) throw ValidationError("mask dimensions must be positive");
    }

    bool get(int x, int y) const {
        return bits[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                    static_cast<std::size_t>(x)] != 0;
    }
    void set(int x, int y, bool v) {
        bits[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
             static_cast<std::size_t>(x)] = v ? 1 : 0;
    }

    std::size_t count() const;

    bool operator==(const BinaryMask&) const = default;
};

// Mask scores averaged over a clip; the firstlast_* fields restrict the
// average to frames 0 and N-1 (conditioning-fidelity view).
struct MaskScoreReport {
    double mask_iou = 0.0;
    double mask_p = 0.0;
    double mask_r = 0.0;
    double firstlast_mask_iou = 0.0;
    double firstlast_mask_p = 0.0;
    double firstlast_mask_r = 0.0;
};

// Ground-truth conversion: every non-black pixel (r+g+b > 0) is foreground.
BinaryMask gt_frame_to_mask(const Rgb8Frame& frame);

// Generated-frame conversion: pixels whose channel sum is below 50 count as
// black; the rest are foreground (r+g+b >= 50).
BinaryMask gen_frame_to_mask(const Rgb8Frame& frame);

// |a ∩ b| / |a ∪ b|; defined as 1.0 when both masks are empty.
double mask_iou(const BinaryMask& a, const BinaryMask& b);

// |pred ∩ gt| / |pred|. Empty pred scores 1.0 against an empty gt, else 0.0.
double mask_precision(const BinaryMask& pred, const BinaryMask& gt);

// |pred ∩ gt| / |gt|. Empty gt scores 1.0 against an empty pred, else 0.0.
double mask_recall(const BinaryMask& pred, const BinaryMask& gt);

// Frame-wise scores averaged over the clip. Predictions go through the
// generated-frame conversion when `pred_is_generated` is set (network
// outputs); ground truth always uses the non-black rule.
MaskScoreReport score_clip(const std::vector<Rgb8Frame>& pred_frames,
                           const std::vector<Rgb8Frame>& gt_frames,
                           bool pred_is_generated);

}  // namespace bboxlab
