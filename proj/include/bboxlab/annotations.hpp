#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bboxlab/geometry.hpp"

namespace bboxlab {

// Defaults shared across the project: 25-frame clips at 520x312, 7 fps.
inline constexpr int kDefaultClipLength = 25;
inline constexpr int kDefaultClipWidth = 520;
inline constexpr int kDefaultClipHeight = 312;
inline constexpr double kDefaultClipFps = 7.0;
inline constexpr int kMaxObjectsPerFrame = 15;

struct ObjectState {
    std::int64_t track_id = 0;
    std::string class_label;
    Box2D box2d;
    std::optional<Box3D> box3d;
};

struct FrameAnnotation {
    int frame_index = 0;
    std::vector<ObjectState> objects;

    const ObjectState* find_track(std::int64_t track_id) const;
};

// Fixed-length window of per-frame object states, frame_index running 0..N-1.
struct ClipAnnotation {
    int width = kDefaultClipWidth;
    int height = kDefaultClipHeight;
    double fps = kDefaultClipFps;
    std::vector<FrameAnnotation> frames;

    int frame_count() const { return static_cast<int>(frames.size()); }
};

// Unwindowed per-sequence stream as parsed from dataset label files. Frames
// are dense from index 0; empty frames are materialized as empty entries.
struct AnnotationStream {
    int width = kDefaultClipWidth;
    int height = kDefaultClipHeight;
    double fps = kDefaultClipFps;
    std::vector<FrameAnnotation> frames;
    std::optional<CameraCalib> calib;
};

// KITTI tracking label text: one object per line,
//   frame track_id type truncated occluded alpha x1 y1 x2 y2 h w l x y z rot_y [score]
// "DontCare" entries are dropped. The 3D location (bottom-face center in
// KITTI) is converted to a geometric center.
AnnotationStream parse_kitti_tracking(const std::string& label_text,
                                      const std::string& calib_text = "");

// Parses a named 3x4 projection ("P2: v0 .. v11") from KITTI-style calib text.
CameraCalib parse_kitti_calib(const std::string& calib_text,
                              const std::string& matrix_name = "P2");

// Canonical interchange format: one JSON object per line,
//   {"frame": i, "track_id": t, "class": "car", "bbox": [x1,y1,x2,y2],
//    "box3d": {"center": [x,y,z], "dims": [h,w,l], "yaw": r}}   (box3d optional)
// An optional leading header line {"width": w, "height": h, "fps": f} sets the
// image geometry; defaults are 520x312 @ 7 fps.
ClipAnnotation parse_generic_jsonl(const std::string& text);

std::string write_generic_jsonl(const ClipAnnotation& clip);

// Cuts frames [start, start+length) out of the stream and re-indexes them
// 0..length-1. Frames holding more than 15 objects keep the 15 with the
// largest 2D area (ties keep the smaller track_id); every track dropped this
// way is removed from all frames of the window so ids stay consistent.
ClipAnnotation window_clip(const AnnotationStream& stream, int start,
                           int length = kDefaultClipLength);

// Scales all 2D boxes by (target_w/width, target_h/height). 3D boxes are left
// untouched; rendering them at a new size requires a matching projection.
ClipAnnotation rescale_annotation(const ClipAnnotation& clip, int target_w,
                                  int target_h);

}  // namespace bboxlab
