#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bboxlab/annotations.hpp"
#include "bboxlab/geometry.hpp"
#include "bboxlab/renderer_types.hpp"

namespace bboxlab {

// All rasterization in this module follows frozen lattice rules so that
// outputs are bit-exact and independently recomputable:
//   * box fill: pixel (ix,iy) is inside [x1,y1,x2,y2] iff x1<=ix<=x2 and
//     y1<=iy<=y2 (real-valued comparisons, no half-pixel offset);
//   * box outline: `width` pixels extending inward from the fill boundary
//     (fill region minus the fill region of the box shrunk by `width`);
//   * line stroke: pixel (ix,iy) is on a segment of width w iff its distance
//     to the segment is <= w/2;
//   * disc: pixel (ix,iy) is in a disc of diameter d at (cx,cy) iff
//     (ix-cx)^2 + (iy-cy)^2 <= (d/2)^2;
//   * alpha compositing: out = round(a*fill + (1-a)*under), round half up.
// Everything is clipped to the image; drawing is in ascending track_id order.

inline constexpr std::uint64_t kDefaultRenderSeed = 1729;

struct RenderConfig {
    std::uint64_t seed = kDefaultRenderSeed;
    double fill_alpha = 0.25;   // "75% transparency"
    int outline_width = 2;      // 2D outlines and 3D wireframe edges
    int x_mark_width = 2;       // rear-face X strokes
    int traj_outer_diameter = 10;
    int traj_inner_diameter = 5;
    std::map<std::string, Rgb> class_palette;  // empty -> default palette

    RenderConfig();
};

struct ColorAssignment {
    std::map<std::int64_t, Rgb> track_colors;
    std::map<std::string, Rgb> class_colors;
};

enum class RenderMode {
    kBbox,
    kTrajectory,
    kBboxFinalTrajectory,  // bbox frames with the last frame as a trajectory plot
};

RenderMode render_mode_from_string(const std::string& name);
std::string to_string(RenderMode mode);

// Fixed class palette: Car, Van, Truck, Pedestrian, Person, Cyclist, Tram,
// Bus, Train, Rider, Other. Lookup is case-insensitive; labels outside the
// palette fall back to white.
const std::map<std::string, Rgb>& default_class_palette();
inline constexpr Rgb kFallbackClassColor{255, 255, 255};

// Deterministic per-track color: a SplitMix64 stream keyed by
// mix_seed(seed, track_id) is drawn (low three bytes of each output) and
// rejection-sampled until every channel exceeds 50.
Rgb assign_track_color(std::uint64_t seed, std::int64_t track_id);

Rgb class_color(const std::string& class_label,
                const std::map<std::string, Rgb>& palette);

// One color per track and per class, computed once for the whole clip.
// Labels missing from the palette are appended to `unknown_labels` if given.
ColorAssignment make_color_assignment(const ClipAnnotation& clip,
                                      const RenderConfig& config,
                                      std::vector<std::string>* unknown_labels = nullptr);

struct ProjectedBox3D {
    // Canonical corner order: bottom face 0..3 then top face 4..7, both
    // counter-clockwise seen from above, corner 0 at rear-left-bottom. The
    // rear face sits at -length/2 along the object's forward axis.
    std::array<double, 8> u{};
    std::array<double, 8> v{};
    std::array<int, 4> rear_face{0, 1, 5, 4};
};

// Pinhole projection of all 8 corners. Throws BehindCameraError if any corner
// has non-positive depth.
ProjectedBox3D project_box3d(const Box3D& box, const CameraCalib& calib);

// The 12 cuboid edges in the canonical corner order above.
const std::array<std::pair<int, int>, 12>& box3d_edges();

Rgb8Frame render_bbox_frame(const FrameAnnotation& frame, int width, int height,
                            const std::optional<CameraCalib>& calib,
                            const ColorAssignment& colors, const RenderConfig& config);

Rgb8Frame render_trajectory_frame(const FrameAnnotation& frame, int width, int height,
                                  const ColorAssignment& colors,
                                  const RenderConfig& config);

std::vector<Rgb8Frame> render_clip(const ClipAnnotation& clip, RenderMode mode,
                                   const std::optional<CameraCalib>& calib,
                                   const RenderConfig& config);

}  // namespace bboxlab
