#include <doctest.h>

#include <random>

#include "bboxlab/masks.hpp"

using namespace bboxlab;

namespace {

Rgb8Frame solid_frame(int w, int h, Rgb color) {
    Rgb8Frame f(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) f.set(x, y, color);
    }
    return f;
}

BinaryMask filled_rect(int w, int h, int x1, int y1, int x2, int y2) {
    BinaryMask m(w, h);
    for (int y = y1; y < y2; ++y) {
        for (int x = x1; x < x2; ++x) m.set(x, y, true);
    }
    return m;
}

BinaryMask random_mask(int w, int h, std::mt19937& rng, double density) {
    BinaryMask m(w, h);
    std::bernoulli_distribution bit(density);
    for (auto& b : m.bits) b = bit(rng) ? 1 : 0;
    return m;
}

}  // namespace

TEST_CASE("gt_frame_to_mask: any non-black pixel is foreground") {
    Rgb8Frame f(8, 8);
    CHECK(gt_frame_to_mask(f).count() == 0);
    f.set(3, 4, Rgb{0, 0, 1});
    const BinaryMask m = gt_frame_to_mask(f);
    CHECK(m.count() == 1);
    CHECK(m.get(3, 4));
}

TEST_CASE("gen_frame_to_mask: channel sum below 50 counts as black") {
    Rgb8Frame f(4, 4);
    f.set(0, 0, Rgb{16, 16, 17});  // sum 49
    f.set(1, 0, Rgb{16, 17, 17});  // sum 50
    const BinaryMask m = gen_frame_to_mask(f);
    CHECK_FALSE(m.get(0, 0));
    CHECK(m.get(1, 0));

    const Rgb8Frame dim = solid_frame(4, 4, Rgb{10, 10, 10});  // sum 30
    CHECK(gen_frame_to_mask(dim).count() == 0);
}

TEST_CASE("mask_iou: identity, disjoint, strip overlap, dimension check") {
    const BinaryMask a = filled_rect(30, 20, 0, 0, 10, 10);
    CHECK(mask_iou(a, a) == 1.0);

    const BinaryMask b = filled_rect(30, 20, 15, 0, 25, 10);
    CHECK(mask_iou(a, b) == 0.0);

    // Two 10x10 squares overlapping in a 5x10 strip: 50 / 150.
    const BinaryMask c = filled_rect(30, 20, 5, 0, 15, 10);
    CHECK(mask_iou(a, c) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    const BinaryMask empty1(30, 20), empty2(30, 20);
    CHECK(mask_iou(empty1, empty2) == 1.0);
    CHECK_THROWS_AS(mask_iou(a, BinaryMask(10, 10)), ValidationError);
}

TEST_CASE("mask_precision / mask_recall: subsets and conventions") {
    const BinaryMask pred = filled_rect(40, 20, 0, 0, 10, 10);
    const BinaryMask gt = filled_rect(40, 20, 0, 0, 20, 10);
    CHECK(mask_precision(pred, gt) == 1.0);
    CHECK(mask_recall(pred, gt) == 0.5);
    CHECK(mask_recall(pred, pred) == 1.0);
    CHECK(mask_precision(pred, pred) == 1.0);

    const BinaryMask empty(40, 20);
    CHECK(mask_precision(empty, empty) == 1.0);
    CHECK(mask_precision(empty, gt) == 0.0);
    CHECK(mask_recall(pred, empty) == 0.0);
}

TEST_CASE("score_clip: self-comparison is perfect in all six fields") {
    std::vector<Rgb8Frame> clip;
    for (int i = 0; i < 5; ++i) {
        Rgb8Frame f(20, 16);
        for (int x = 2 + i; x < 10 + i; ++x) {
            for (int y = 3; y < 12; ++y) f.set(x, y, Rgb{120, 80, 200});
        }
        clip.push_back(f);
    }
    const MaskScoreReport r = score_clip(clip, clip, /*pred_is_generated=*/false);
    CHECK(r.mask_iou == 1.0);
    CHECK(r.mask_p == 1.0);
    CHECK(r.mask_r == 1.0);
    CHECK(r.firstlast_mask_iou == 1.0);
    CHECK(r.firstlast_mask_p == 1.0);
    CHECK(r.firstlast_mask_r == 1.0);
}

TEST_CASE("score_clip: matching endpoints with empty middles") {
    std::vector<Rgb8Frame> gt;
    for (int i = 0; i < 5; ++i) {
        Rgb8Frame f(20, 16);
        for (int x = 2; x < 10; ++x) {
            for (int y = 3; y < 12; ++y) f.set(x, y, Rgb{255, 255, 255});
        }
        gt.push_back(f);
    }
    std::vector<Rgb8Frame> pred = gt;
    for (int i = 1; i < 4; ++i) pred[static_cast<std::size_t>(i)] = Rgb8Frame(20, 16);

    const MaskScoreReport r = score_clip(pred, gt, false);
    CHECK(r.firstlast_mask_iou == 1.0);
    // Frames 0 and 4 score 1, the three empty middles score 0.
    CHECK(r.mask_iou == doctest::Approx(2.0 / 5.0).epsilon(1e-12));
    CHECK(r.mask_r == doctest::Approx(2.0 / 5.0).epsilon(1e-12));
}

TEST_CASE("score_clip: all-black prediction against non-empty gt") {
    const Rgb8Frame gt_frame = solid_frame(16, 16, Rgb{200, 0, 0});
    const std::vector<Rgb8Frame> gt(3, gt_frame);
    const std::vector<Rgb8Frame> pred(3, Rgb8Frame(16, 16));
    const MaskScoreReport r = score_clip(pred, gt, true);
    CHECK(r.mask_iou == 0.0);
    CHECK(r.mask_r == 0.0);

    CHECK_THROWS_AS(score_clip(pred, std::vector<Rgb8Frame>(2, gt_frame), true),
                    ValidationError);
    CHECK_THROWS_AS(score_clip({gt_frame}, {gt_frame}, true), ValidationError);
}

TEST_CASE("score_clip: generated conversion is applied to predictions only") {
    // Frame content below the sum-50 threshold disappears for generated
    // predictions but stays for ground truth.
    const Rgb8Frame dim = solid_frame(8, 8, Rgb{10, 10, 10});
    const std::vector<Rgb8Frame> pred(2, dim), gt(2, dim);
    const MaskScoreReport as_generated = score_clip(pred, gt, true);
    CHECK(as_generated.mask_iou == 0.0);  // empty pred vs full gt
    const MaskScoreReport as_render = score_clip(pred, gt, false);
    CHECK(as_render.mask_iou == 1.0);
}

TEST_CASE("mask metric identities on random pairs") {
    std::mt19937 rng(123);
    for (int trial = 0; trial < 200; ++trial) {
        const BinaryMask a = random_mask(24, 18, rng, 0.3 + 0.4 * (trial % 3) / 2.0);
        const BinaryMask b = random_mask(24, 18, rng, 0.5);
        const double iou = mask_iou(a, b);
        const double p = mask_precision(a, b);
        const double r = mask_recall(a, b);

        CHECK(iou <= p + 1e-15);
        CHECK(iou <= r + 1e-15);
        CHECK(mask_iou(b, a) == iou);
        CHECK(mask_precision(a, b) == mask_recall(b, a));
        if (p > 0.0 && r > 0.0) {
            CHECK(std::abs(1.0 / iou - (1.0 / p + 1.0 / r - 1.0)) < 1e-12);
        }
    }
}

TEST_CASE("mask_iou grows when pred gains gt pixels") {
    std::mt19937 rng(321);
    for (int trial = 0; trial < 50; ++trial) {
        const BinaryMask gt = random_mask(16, 12, rng, 0.5);
        BinaryMask pred = random_mask(16, 12, rng, 0.3);
        const double before = mask_iou(pred, gt);
        // Add a handful of gt pixels into pred.
        BinaryMask grown = pred;
        int added = 0;
        for (std::size_t i = 0; i < gt.bits.size() && added < 5; ++i) {
            if (gt.bits[i] && !grown.bits[i]) {
                grown.bits[i] = 1;
                ++added;
            }
        }
        CHECK(mask_iou(grown, gt) >= before - 1e-15);
    }
}
