#include <doctest.h>

#include <cmath>
#include <random>

#include "bboxlab/video_metrics.hpp"

using namespace bboxlab;

namespace {

Rgb8Frame solid(int w, int h, std::uint8_t v) {
    Rgb8Frame f(w, h);
    std::fill(f.pixels.begin(), f.pixels.end(), v);
    return f;
}

Rgb8Frame random_frame(int w, int h, std::mt19937& rng) {
    Rgb8Frame f(w, h);
    std::uniform_int_distribution<int> byte(0, 255);
    for (auto& p : f.pixels) p = static_cast<std::uint8_t>(byte(rng));
    return f;
}

// Independent non-separable SSIM for the oracle comparison.
double ssim_reference(const Rgb8Frame& a, const Rgb8Frame& b, const SsimConfig& cfg) {
    const int w = a.width, h = a.height, win = cfg.window, half = win / 2;
    std::vector<double> kernel2d(static_cast<std::size_t>(win) * win);
    double ksum = 0.0;
    for (int dy = 0; dy < win; ++dy) {
        for (int dx = 0; dx < win; ++dx) {
            const double gx = dx - half, gy = dy - half;
            const double v = std::exp(-(gx * gx + gy * gy) / (2 * cfg.sigma * cfg.sigma));
            kernel2d[static_cast<std::size_t>(dy) * win + dx] = v;
            ksum += v;
        }
    }
    for (auto& v : kernel2d) v /= ksum;

    auto luma = [](const Rgb8Frame& f, int x, int y) {
        const Rgb c = f.get(x, y);
        return 0.299 * c.r + 0.587 * c.g + 0.114 * c.b;
    };
    const double c1 = (cfg.k1 * cfg.dynamic_range) * (cfg.k1 * cfg.dynamic_range);
    const double c2 = (cfg.k2 * cfg.dynamic_range) * (cfg.k2 * cfg.dynamic_range);

    double total = 0.0;
    int count = 0;
    for (int y = 0; y + win <= h; ++y) {
        for (int x = 0; x + win <= w; ++x) {
            double mx = 0, my = 0, mxx = 0, myy = 0, mxy = 0;
            for (int dy = 0; dy < win; ++dy) {
                for (int dx = 0; dx < win; ++dx) {
                    const double kw = kernel2d[static_cast<std::size_t>(dy) * win + dx];
                    const double va = luma(a, x + dx, y + dy);
                    const double vb = luma(b, x + dx, y + dy);
                    mx += kw * va;
                    my += kw * vb;
                    mxx += kw * va * va;
                    myy += kw * vb * vb;
                    mxy += kw * va * vb;
                }
            }
            const double vx = mxx - mx * mx, vy = myy - my * my, cov = mxy - mx * my;
            total += ((2 * mx * my + c1) * (2 * cov + c2)) /
                     ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++count;
        }
    }
    return total / count;
}

}  // namespace

TEST_CASE("psnr: identical frames are infinite") {
    const Rgb8Frame f = solid(32, 24, 77);
    CHECK(std::isinf(psnr(f, f)));
}

TEST_CASE("psnr: MSE of exactly 1 gives 20*log10(255)") {
    Rgb8Frame a(16, 16);
    Rgb8Frame b(16, 16);
    // Differ by 1 everywhere: squared error 1 per sample -> MSE exactly 1.
    std::fill(a.pixels.begin(), a.pixels.end(), 100);
    std::fill(b.pixels.begin(), b.pixels.end(), 101);
    CHECK(psnr(a, b) == doctest::Approx(48.130803608679).epsilon(1e-6));
}

TEST_CASE("psnr: maximal error is 0 dB") {
    const Rgb8Frame black = solid(8, 8, 0);
    const Rgb8Frame white = solid(8, 8, 255);
    CHECK(psnr(black, white) == doctest::Approx(0.0));
    CHECK_THROWS_AS(psnr(black, Rgb8Frame(4, 4)), ValidationError);
}

TEST_CASE("psnr strictly decreases with noise amplitude") {
    std::mt19937 rng(17);
    const Rgb8Frame base = random_frame(48, 32, rng);
    double previous = std::numeric_limits<double>::infinity();
    for (const int amplitude : {4, 16, 64}) {
        Rgb8Frame noisy = base;
        std::mt19937 noise_rng(99);
        std::uniform_int_distribution<int> delta(-amplitude, amplitude);
        for (auto& p : noisy.pixels) {
            p = static_cast<std::uint8_t>(std::clamp(p + delta(noise_rng), 0, 255));
        }
        const double value = psnr(noisy, base);
        CHECK(value < previous);
        previous = value;
    }
}

TEST_CASE("ssim: identical frames score 1") {
    std::mt19937 rng(3);
    const Rgb8Frame f = random_frame(32, 24, rng);
    CHECK(ssim(f, f) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ssim: inverted pattern scores low") {
    // Checkerboard of black/white patches vs its inversion.
    Rgb8Frame a(48, 48);
    for (int y = 0; y < 48; ++y) {
        for (int x = 0; x < 48; ++x) {
            const bool on = ((x / 8) + (y / 8)) % 2 == 0;
            a.set(x, y, on ? Rgb{255, 255, 255} : Rgb{0, 0, 0});
        }
    }
    Rgb8Frame b = a;
    for (auto& p : b.pixels) p = static_cast<std::uint8_t>(255 - p);
    CHECK(ssim(a, b) < 0.5);
}

TEST_CASE("ssim: constant frames reduce to the luminance term") {
    const double mu1 = 100.0, mu2 = 150.0;
    const Rgb8Frame a = solid(24, 24, 100);
    const Rgb8Frame b = solid(24, 24, 150);
    const double c1 = (0.01 * 255) * (0.01 * 255);
    const double expected = (2 * mu1 * mu2 + c1) / (mu1 * mu1 + mu2 * mu2 + c1);
    CHECK(ssim(a, b) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("ssim: matches the non-separable reference implementation") {
    std::mt19937 rng(8);
    const Rgb8Frame a = random_frame(36, 28, rng);
    Rgb8Frame b = a;
    std::uniform_int_distribution<int> delta(-30, 30);
    for (auto& p : b.pixels) {
        p = static_cast<std::uint8_t>(std::clamp(p + delta(rng), 0, 255));
    }
    const SsimConfig cfg;
    CHECK(ssim(a, b, cfg) == doctest::Approx(ssim_reference(a, b, cfg)).epsilon(1e-9));
}

TEST_CASE("ssim: symmetry and window preconditions") {
    std::mt19937 rng(21);
    const Rgb8Frame a = random_frame(20, 20, rng);
    const Rgb8Frame b = random_frame(20, 20, rng);
    CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-9));
    CHECK_THROWS_AS(ssim(Rgb8Frame(8, 8), Rgb8Frame(8, 8)), ValidationError);
}

TEST_CASE("ssim: invariant to a shared constant shift away from clipping") {
    // The contrast/structure terms are exactly shift-invariant; the
    // luminance term is only invariant when the windowed means of the two
    // images stay close, so the perturbation is kept sparse and small.
    std::mt19937 rng(5);
    Rgb8Frame a(24, 24);
    std::uniform_int_distribution<int> mid(80, 160);
    for (auto& p : a.pixels) p = static_cast<std::uint8_t>(mid(rng));
    Rgb8Frame b = a;
    std::bernoulli_distribution sparse(0.05);
    std::bernoulli_distribution sign(0.5);
    for (auto& p : b.pixels) {
        if (sparse(rng)) p = static_cast<std::uint8_t>(p + (sign(rng) ? 1 : -1));
    }
    Rgb8Frame a_shift = a, b_shift = b;
    for (auto& p : a_shift.pixels) p = static_cast<std::uint8_t>(p + 40);
    for (auto& p : b_shift.pixels) p = static_cast<std::uint8_t>(p + 40);
    CHECK(ssim(a_shift, b_shift) == doctest::Approx(ssim(a, b)).epsilon(1e-6));
}

TEST_CASE("clip_quality: identical clips report all-infinite PSNR") {
    std::mt19937 rng(31);
    std::vector<Rgb8Frame> clip;
    for (int i = 0; i < 4; ++i) clip.push_back(random_frame(24, 20, rng));
    const ClipQualityReport r = clip_quality(clip, clip);
    CHECK(std::isinf(r.psnr_mean));
    CHECK(r.psnr_inf_count == 4);
    CHECK(r.ssim_mean == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("clip_quality: one corrupted frame among identical ones") {
    std::mt19937 rng(33);
    const int n = 5;
    std::vector<Rgb8Frame> gt;
    for (int i = 0; i < n; ++i) gt.push_back(random_frame(24, 20, rng));
    std::vector<Rgb8Frame> pred = gt;
    for (auto& p : pred[2].pixels) p = static_cast<std::uint8_t>(255 - p);

    const double s = ssim(pred[2], gt[2]);
    const ClipQualityReport r = clip_quality(pred, gt);
    CHECK(r.psnr_inf_count == n - 1);
    CHECK(r.psnr_mean == doctest::Approx(psnr(pred[2], gt[2])));
    CHECK(r.ssim_mean == doctest::Approx((4.0 * 1.0 + s) / 5.0).epsilon(1e-9));

    CHECK_THROWS_AS(clip_quality(pred, std::vector<Rgb8Frame>(gt.begin(), gt.end() - 1)),
                    ValidationError);
}

TEST_CASE("clip_quality: evaluation resize path") {
    std::mt19937 rng(35);
    std::vector<Rgb8Frame> gt;
    for (int i = 0; i < 2; ++i) gt.push_back(random_frame(52, 31, rng));
    std::vector<Rgb8Frame> pred = gt;
    const ClipQualityReport r = clip_quality(pred, gt, {{41, 25}});
    CHECK(r.psnr_inf_count == 2);  // identical stays identical after resize
    CHECK(r.ssim_mean == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("resize_bilinear: identity size and constant preservation") {
    const Rgb8Frame f = solid(40, 30, 99);
    const Rgb8Frame same = resize_bilinear(f, 40, 30);
    CHECK(same == f);
    const Rgb8Frame small = resize_bilinear(f, 13, 7);
    for (const auto v : small.pixels) CHECK(v == 99);
    CHECK_THROWS_AS(resize_bilinear(f, 0, 10), ValidationError);
}
