#pragma once

#include <optional>
#include <vector>

#include "bboxlab/renderer_types.hpp"

namespace bboxlab {

// Frames are reduced to BT.601 luminance (0.299 R + 0.587 G + 0.114 B) before
// SSIM. The SSIM map uses valid-mode Gaussian windowing, so frames must be at
// least window x window.
struct SsimConfig {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 255.0;
};

// Default evaluation size for clip quality, mirroring generation at 520x312
// scored at 410x256.
inline constexpr int kQualityEvalWidth = 410;
inline constexpr int kQualityEvalHeight = 256;

// 10*log10(255^2 / MSE) with the MSE taken over all channels. Identical
// frames return +infinity.
double psnr(const Rgb8Frame& a, const Rgb8Frame& b);

double ssim(const Rgb8Frame& a, const Rgb8Frame& b, const SsimConfig& config = {});

// Bilinear resampling (half-pixel centers, edges clamped, round half up).
Rgb8Frame resize_bilinear(const Rgb8Frame& frame, int target_w, int target_h);

struct ClipQualityReport {
    double psnr_mean = 0.0;  // +inf when every frame pair is identical
    int psnr_inf_count = 0;
    double ssim_mean = 0.0;
};

// Frame-wise PSNR/SSIM averaged over the clip; infinite-PSNR frames are
// excluded from the mean and counted. When `eval_size` is given, both clips
// are bilinearly resampled to that (width, height) first.
ClipQualityReport clip_quality(const std::vector<Rgb8Frame>& pred_frames,
                               const std::vector<Rgb8Frame>& gt_frames,
                               std::optional<std::pair<int, int>> eval_size = {},
                               const SsimConfig& config = {});

}  // namespace bboxlab
