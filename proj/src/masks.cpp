#include "bboxlab/masks.hpp"

#include <numeric>

namespace bboxlab {

namespace {

void require_same_dims(const BinaryMask& a, const BinaryMask& b) {
    if (a.width != b.width || a.height != b.height) {
        throw ValidationError("mask dimension mismatch: " + std::to_string(a.width) +
                              "x" + std::to_string(a.height) + " vs " +
                              std::to_string(b.width) + "x" + std::to_string(b.height));
    }
}

struct Overlap {
    std::size_t inter = 0;
    std::size_t count_a = 0;
    std::size_t count_b = 0;
};

Overlap overlap_counts(const BinaryMask& a, const BinaryMask& b) {
    require_same_dims(a, b);
    Overlap o;
    const std::size_t n = a.bits.size();
    for (std::size_t i = 0; i < n; ++i) {
        o.inter += static_cast<std::size_t>(a.bits[i] & b.bits[i]);
        o.count_a += a.bits[i];
        o.count_b += b.bits[i];
    }
    return o;
}

BinaryMask threshold_sum(const Rgb8Frame& frame, int min_sum) {
    BinaryMask mask(frame.width, frame.height);
    const std::size_t n = mask.bits.size();
    for (std::size_t i = 0; i < n; ++i) {
        const int sum = frame.pixels[i * 3] + frame.pixels[i * 3 + 1] +
                        frame.pixels[i * 3 + 2];
        mask.bits[i] = sum >= min_sum ? 1 : 0;
    }
    return mask;
}

}  // namespace

std::size_t BinaryMask::count() const {
    return std::accumulate(bits.begin(), bits.end(), std::size_t{0});
}

BinaryMask gt_frame_to_mask(const Rgb8Frame& frame) { return threshold_sum(frame, 1); }

BinaryMask gen_frame_to_mask(const Rgb8Frame& frame) { return threshold_sum(frame, 50); }

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
    const Overlap o = overlap_counts(a, b);
    const std::size_t uni = o.count_a + o.count_b - o.inter;
    if (uni == 0) return 1.0;
    return static_cast<double>(o.inter) / static_cast<double>(uni);
}

double mask_precision(const BinaryMask& pred, const BinaryMask& gt) {
    const Overlap o = overlap_counts(pred, gt);
    if (o.count_a == 0) return o.count_b == 0 ? 1.0 : 0.0;
    return static_cast<double>(o.inter) / static_cast<double>(o.count_a);
}

double mask_recall(const BinaryMask& pred, const BinaryMask& gt) {
    const Overlap o = overlap_counts(pred, gt);
    if (o.count_b == 0) return o.count_a == 0 ? 1.0 : 0.0;
    return static_cast<double>(o.inter) / static_cast<double>(o.count_b);
}

MaskScoreReport score_clip(const std::vector<Rgb8Frame>& pred_frames,
                           const std::vector<Rgb8Frame>& gt_frames,
                           bool pred_is_generated) {
    if (pred_frames.size() != gt_frames.size()) {
        throw ValidationError("frame count mismatch: " +
                              std::to_string(pred_frames.size()) + " vs " +
                              std::to_string(gt_frames.size()));
    }
    const std::size_t n = pred_frames.size();
    if (n < 2) throw ValidationError("clip scoring needs at least 2 frames");

    MaskScoreReport report;
    for (std::size_t i = 0; i < n; ++i) {
        const BinaryMask pred = pred_is_generated ? gen_frame_to_mask(pred_frames[i])
                                                  : gt_frame_to_mask(pred_frames[i]);
        const BinaryMask gt = gt_frame_to_mask(gt_frames[i]);
        const double iou = mask_iou(pred, gt);
        const double p = mask_precision(pred, gt);
        const double r = mask_recall(pred, gt);
        report.mask_iou += iou;
        report.mask_p += p;
        report.mask_r += r;
        if (i == 0 || i == n - 1) {
            report.firstlast_mask_iou += iou;
            report.firstlast_mask_p += p;
            report.firstlast_mask_r += r;
        }
    }
    report.mask_iou /= static_cast<double>(n);
    report.mask_p /= static_cast<double>(n);
    report.mask_r /= static_cast<double>(n);
    report.firstlast_mask_iou /= 2.0;
    report.firstlast_mask_p /= 2.0;
    report.firstlast_mask_r /= 2.0;
    return report;
}

}  // namespace bboxlab
