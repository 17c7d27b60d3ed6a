#include "bboxlab/video_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bboxlab {

namespace {

void require_same_dims(const Rgb8Frame& a, const Rgb8Frame& b) {
    if (a.width != b.width || a.height != b.height) {
        throw ValidationError("frame dimension mismatch: " + std::to_string(a.width) +
                              "x" + std::to_string(a.height) + " vs " +
                              std::to_string(b.width) + "x" + std::to_string(b.height));
    }
}

std::vector<double> luminance(const Rgb8Frame& f) {
    std::vector<double> out(static_cast<std::size_t>(f.width) *
                            static_cast<std::size_t>(f.height));
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = 0.299 * f.pixels[i * 3] + 0.587 * f.pixels[i * 3 + 1] +
                 0.114 * f.pixels[i * 3 + 2];
    }
    return out;
}

std::vector<double> gaussian_kernel(int window, double sigma) {
    std::vector<double> k(static_cast<std::size_t>(window));
    const int half = window / 2;
    double sum = 0.0;
    for (int i = 0; i < window; ++i) {
        const double d = i - half;
        k[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += k[static_cast<std::size_t>(i)];
    }
    for (double& v : k) v /= sum;
    return k;
}

// Valid-mode separable convolution: output is (w - win + 1) x (h - win + 1).
std::vector<double> filter_valid(const std::vector<double>& img, int w, int h,
                                 const std::vector<double>& kernel, int& out_w,
                                 int& out_h) {
    const int win = static_cast<int>(kernel.size());
    out_w = w - win + 1;
    out_h = h - win + 1;
    std::vector<double> rows(static_cast<std::size_t>(out_w) *
                             static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            double acc = 0.0;
            for (int k = 0; k < win; ++k) {
                acc += kernel[static_cast<std::size_t>(k)] *
                       img[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) +
                           static_cast<std::size_t>(x + k)];
            }
            rows[static_cast<std::size_t>(y) * static_cast<std::size_t>(out_w) +
                 static_cast<std::size_t>(x)] = acc;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(out_w) *
                            static_cast<std::size_t>(out_h));
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            double acc = 0.0;
            for (int k = 0; k < win; ++k) {
                acc += kernel[static_cast<std::size_t>(k)] *
                       rows[static_cast<std::size_t>(y + k) *
                                static_cast<std::size_t>(out_w) +
                            static_cast<std::size_t>(x)];
            }
            out[static_cast<std::size_t>(y) * static_cast<std::size_t>(out_w) +
                static_cast<std::size_t>(x)] = acc;
        }
    }
    return out;
}

// Deterministic sum: left-to-right per row, then pairwise over row sums.
double pairwise_reduce(std::vector<double>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return v[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_reduce(v, lo, mid) + pairwise_reduce(v, mid, hi);
}

double mean_by_rows(const std::vector<double>& img, int w, int h) {
    std::vector<double> row_sums(static_cast<std::size_t>(h), 0.0);
    for (int y = 0; y < h; ++y) {
        double acc = 0.0;
        for (int x = 0; x < w; ++x) {
            acc += img[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) +
                       static_cast<std::size_t>(x)];
        }
        row_sums[static_cast<std::size_t>(y)] = acc;
    }
    const double total = pairwise_reduce(row_sums, 0, row_sums.size());
    return total / (static_cast<double>(w) * static_cast<double>(h));
}

}  // namespace

double psnr(const Rgb8Frame& a, const Rgb8Frame& b) {
    require_same_dims(a, b);
    // Squared error is integral, so the MSE numerator is exact.
    std::uint64_t sq_sum = 0;
    const std::size_t n = a.pixels.size();
    for (std::size_t i = 0; i < n; ++i) {
        const int d = static_cast<int>(a.pixels[i]) - static_cast<int>(b.pixels[i]);
        sq_sum += static_cast<std::uint64_t>(d * d);
    }
    if (sq_sum == 0) return std::numeric_limits<double>::infinity();
    const double mse = static_cast<double>(sq_sum) / static_cast<double>(n);
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double ssim(const Rgb8Frame& a, const Rgb8Frame& b, const SsimConfig& config) {
    require_same_dims(a, b);
    if (config.window % 2 == 0 || config.window < 1 || config.sigma <= 0.0) {
        throw ValidationError("SSIM window must be odd and sigma positive");
    }
    if (a.width < config.window || a.height < config.window) {
        throw ValidationError("frame smaller than SSIM window");
    }

    const std::vector<double> kernel = gaussian_kernel(config.window, config.sigma);
    const std::vector<double> x = luminance(a);
    const std::vector<double> y = luminance(b);
    const std::size_t n = x.size();
    std::vector<double> xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }

    int ow = 0, oh = 0;
    const std::vector<double> mu_x = filter_valid(x, a.width, a.height, kernel, ow, oh);
    const std::vector<double> mu_y = filter_valid(y, a.width, a.height, kernel, ow, oh);
    const std::vector<double> e_xx = filter_valid(xx, a.width, a.height, kernel, ow, oh);
    const std::vector<double> e_yy = filter_valid(yy, a.width, a.height, kernel, ow, oh);
    const std::vector<double> e_xy = filter_valid(xy, a.width, a.height, kernel, ow, oh);

    const double c1 = (config.k1 * config.dynamic_range) * (config.k1 * config.dynamic_range);
    const double c2 = (config.k2 * config.dynamic_range) * (config.k2 * config.dynamic_range);

    std::vector<double> ssim_map(mu_x.size());
    for (std::size_t i = 0; i < ssim_map.size(); ++i) {
        const double var_x = e_xx[i] - mu_x[i] * mu_x[i];
        const double var_y = e_yy[i] - mu_y[i] * mu_y[i];
        const double cov = e_xy[i] - mu_x[i] * mu_y[i];
        ssim_map[i] = ((2.0 * mu_x[i] * mu_y[i] + c1) * (2.0 * cov + c2)) /
                      ((mu_x[i] * mu_x[i] + mu_y[i] * mu_y[i] + c1) *
                       (var_x + var_y + c2));
    }
    return mean_by_rows(ssim_map, ow, oh);
}

Rgb8Frame resize_bilinear(const Rgb8Frame& frame, int target_w, int target_h) {
    if (target_w <= 0 || target_h <= 0) {
        throw ValidationError("target dimensions must be positive");
    }
    if (frame.width == target_w && frame.height == target_h) return frame;

    Rgb8Frame out(target_w, target_h);
    const double sx = static_cast<double>(frame.width) / target_w;
    const double sy = static_cast<double>(frame.height) / target_h;
    for (int y = 0; y < target_h; ++y) {
        const double src_y = std::clamp((y + 0.5) * sy - 0.5, 0.0,
                                        static_cast<double>(frame.height - 1));
        const int y0 = static_cast<int>(std::floor(src_y));
        const int y1 = std::min(y0 + 1, frame.height - 1);
        const double fy = src_y - y0;
        for (int x = 0; x < target_w; ++x) {
            const double src_x = std::clamp((x + 0.5) * sx - 0.5, 0.0,
                                            static_cast<double>(frame.width - 1));
            const int x0 = static_cast<int>(std::floor(src_x));
            const int x1 = std::min(x0 + 1, frame.width - 1);
            const double fx = src_x - x0;
            for (int c = 0; c < 3; ++c) {
                const double v00 = frame.pixels[frame.offset(x0, y0) + static_cast<std::size_t>(c)];
                const double v10 = frame.pixels[frame.offset(x1, y0) + static_cast<std::size_t>(c)];
                const double v01 = frame.pixels[frame.offset(x0, y1) + static_cast<std::size_t>(c)];
                const double v11 = frame.pixels[frame.offset(x1, y1) + static_cast<std::size_t>(c)];
                const double v = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) +
                                 fy * ((1.0 - fx) * v01 + fx * v11);
                out.pixels[out.offset(x, y) + static_cast<std::size_t>(c)] =
                    static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
            }
        }
    }
    return out;
}

ClipQualityReport clip_quality(const std::vector<Rgb8Frame>& pred_frames,
                               const std::vector<Rgb8Frame>& gt_frames,
                               std::optional<std::pair<int, int>> eval_size,
                               const SsimConfig& config) {
    if (pred_frames.size() != gt_frames.size()) {
        throw ValidationError("frame count mismatch: " +
                              std::to_string(pred_frames.size()) + " vs " +
                              std::to_string(gt_frames.size()));
    }
    if (pred_frames.empty()) throw ValidationError("empty clip");

    ClipQualityReport report;
    double psnr_sum = 0.0;
    double ssim_sum = 0.0;
    for (std::size_t i = 0; i < pred_frames.size(); ++i) {
        Rgb8Frame p = pred_frames[i];
        Rgb8Frame g = gt_frames[i];
        if (eval_size) {
            p = resize_bilinear(p, eval_size->first, eval_size->second);
            g = resize_bilinear(g, eval_size->first, eval_size->second);
        }
        const double frame_psnr = psnr(p, g);
        if (std::isinf(frame_psnr)) {
            ++report.psnr_inf_count;
        } else {
            psnr_sum += frame_psnr;
        }
        ssim_sum += ssim(p, g, config);
    }
    const int finite = static_cast<int>(pred_frames.size()) - report.psnr_inf_count;
    report.psnr_mean = finite > 0 ? psnr_sum / finite
                                  : std::numeric_limits<double>::infinity();
    report.ssim_mean = ssim_sum / static_cast<double>(pred_frames.size());
    return report;
}

}  // namespace bboxlab
