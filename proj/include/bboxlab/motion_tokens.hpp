#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bboxlab/annotations.hpp"
#include "bboxlab/masks.hpp"
#include "bboxlab/renderer_types.hpp"

namespace bboxlab {

// Discrete corner-displacement vocabulary: 16 magnitude grid values spanning
// [0, 0.1] of the image size (step 1/150) x 24 direction bins at 15-degree
// centers = 384 tokens. Quantization snaps to the nearest grid value / bin
// center; exact ties go to the larger bin index (for direction this includes
// the wrap tie between bins 23 and 0, which resolves to 23). Displacements
// that snap to magnitude bin 0 map to token id 0, so quantization never emits
// the degenerate zero-magnitude tokens with a nonzero direction (those
// dequantize to (0,0) like id 0 does).
inline constexpr int kMagnitudeBins = 16;
inline constexpr int kDirectionBins = 24;
inline constexpr int kVocabularySize = kMagnitudeBins * kDirectionBins;  // 384
inline constexpr double kMaxMagnitude = 0.1;
inline constexpr double kMagnitudeStep = kMaxMagnitude / (kMagnitudeBins - 1);  // 1/150
inline constexpr double kDirectionStepDeg = 360.0 / kDirectionBins;  // 15 degrees

struct ActionToken {
    int magnitude_bin = 0;  // 0..15
    int direction_bin = 0;  // 0..23

    int id() const { return magnitude_bin * kDirectionBins + direction_bin; }
    static ActionToken from_id(int id);

    bool operator==(const ActionToken&) const = default;
};

struct BoxActionPair {
    ActionToken top_left;
    ActionToken bottom_right;

    bool operator==(const BoxActionPair&) const = default;
};

// One tracked box as an absolute (image-fraction) starting box plus a
// discrete action sequence. Entry/exit is carried by the presence interval,
// not by special tokens. `class_label` rides along so clips can be rebuilt.
struct TokenizedTrajectory {
    std::int64_t track_id = 0;
    std::string class_label;
    Box2D initial_box;  // normalized: x in [0,1] of width, y of height
    int first_frame = 0;
    int last_frame = 0;  // inclusive; steps.size() == last_frame - first_frame
    std::vector<BoxActionPair> steps;
};

// (dx, dy) as fractions of image width/height respectively.
ActionToken quantize_displacement(double dx, double dy);
std::pair<double, double> dequantize(const ActionToken& token);

// Tokenizes a contiguous per-frame box sequence (>= 2 frames). Displacements
// of the top-left and bottom-right corners are normalized per axis and
// quantized independently.
TokenizedTrajectory tokenize_track(const std::vector<Box2D>& boxes, int width,
                                   int height, std::int64_t track_id = 0,
                                   int first_frame = 0,
                                   const std::string& class_label = "car");

// Cumulative rollout from the initial box, in pixels. If a step makes
// x1 > x2 (or y1 > y2) the top-left coordinate is clamped to the
// bottom-right one. Boxes may leave the image.
std::vector<Box2D> rollout(const TokenizedTrajectory& traj, int width, int height);

// One TokenizedTrajectory per maximal contiguous presence run of each track.
std::vector<TokenizedTrajectory> tokenize_clip(const ClipAnnotation& clip);

// JSONL corpus: a header line {"width","height","fps","frames"} followed by
// one trajectory object per line.
std::string write_token_corpus(const std::vector<TokenizedTrajectory>& trajectories,
                               int width, int height, double fps, int n_frames);
struct TokenCorpus {
    int width = kDefaultClipWidth;
    int height = kDefaultClipHeight;
    double fps = kDefaultClipFps;
    int n_frames = kDefaultClipLength;
    std::vector<TokenizedTrajectory> trajectories;
};
TokenCorpus parse_token_corpus(const std::string& text);

// Rebuilds a clip from trajectories by rolling each one out.
ClipAnnotation rollout_clip(const TokenCorpus& corpus);

// n-to-1 conditioning: 1..3 initial frames plus one final frame at N-1.
struct TrajectoryConditioning {
    std::vector<FrameAnnotation> first_frames;
    FrameAnnotation last_frame;
    int n_frames = kDefaultClipLength;
    int width = kDefaultClipWidth;
    int height = kDefaultClipHeight;
    double fps = kDefaultClipFps;
};

// Deterministic reference generator. Conditioning frames are copied verbatim
// into the output (frames 0..m-1 and N-1), which makes the rendered first and
// last frames match the conditioning exactly. In between:
//   * tracks present in the latest initial frame and the final frame are
//     linearly interpolated corner-wise;
//   * tracks present only in the initial frames continue at constant velocity
//     (zero if only one observation), clamped to the image, and end at frame
//     N-2 so the final frame stays untouched;
//   * tracks present only in the final frame appear at frame max(ceil(N/2), m)
//     at half size around their final center and grow into place.
ClipAnnotation interpolate_baseline(const std::vector<FrameAnnotation>& first_frames,
                                    const FrameAnnotation& last_frame, int n_frames,
                                    int width, int height,
                                    double fps = kDefaultClipFps);
ClipAnnotation interpolate_baseline(const TrajectoryConditioning& cond);

// Order-1 transition counts over token ids, one table per corner role
// (0 = top-left, 1 = bottom-right), plus initial-token counts. Rows are
// add-alpha smoothed at sampling time.
struct MarkovModel {
    double smoothing = 0.1;
    std::array<std::vector<std::uint64_t>, 2> initial_counts;     // [role][token]
    std::array<std::vector<std::uint64_t>, 2> transition_counts;  // [role][from*384+to]

    MarkovModel();
};

MarkovModel markov_fit(const std::vector<TokenizedTrajectory>& corpus,
                       double smoothing = 0.1);

std::string write_markov_model(const MarkovModel& model);
MarkovModel parse_markov_model(const std::string& text);

// Draws K candidate clips. Conditioning frames are copied verbatim; tracks
// alive in the latest initial frame continue with sampled token sequences
// (chain state seeded from the observed conditioning step when available),
// and final-frame-only tracks are injected with the deterministic onset rule
// above. Temperature scales transition probabilities (T -> 0 is argmax,
// ties to the lowest token id). One SplitMix64 generator per candidate,
// keyed by mix_seed(seed, candidate).
std::vector<ClipAnnotation> markov_sample(const MarkovModel& model,
                                          const TrajectoryConditioning& cond,
                                          double temperature, std::uint64_t seed,
                                          int k);

struct BestOfK {
    int index = 0;
    MaskScoreReport report;
};

// Index of the rendered candidate clip with the highest maskIoU against the
// rendered reference (ties: lowest index). Candidates here are true renders,
// so both sides use the ground-truth mask conversion.
BestOfK best_of_k(const std::vector<std::vector<Rgb8Frame>>& candidates,
                  const std::vector<Rgb8Frame>& reference);

}  // namespace bboxlab
