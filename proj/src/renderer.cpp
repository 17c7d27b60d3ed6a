#include "bboxlab/renderer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "bboxlab/rng.hpp"

namespace bboxlab {

RenderConfig::RenderConfig() : class_palette(default_class_palette()) {}

namespace {

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::uint8_t round_half_up(double v) {
    const double r = std::floor(v + 0.5);
    return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

// Integer pixel range covered by a closed real interval [lo, hi], clipped.
struct PixelSpan {
    int lo;
    int hi;  // inclusive; empty when lo > hi
};

PixelSpan span_for(double lo, double hi, int limit) {
    PixelSpan s;
    s.lo = std::max(0, static_cast<int>(std::ceil(lo)));
    s.hi = std::min(limit - 1, static_cast<int>(std::floor(hi)));
    return s;
}

void composite_fill(Rgb8Frame& img, const Box2D& box, Rgb color, double alpha) {
    const PixelSpan xs = span_for(box.x1, box.x2, img.width);
    const PixelSpan ys = span_for(box.y1, box.y2, img.height);
    for (int y = ys.lo; y <= ys.hi; ++y) {
        for (int x = xs.lo; x <= xs.hi; ++x) {
            const Rgb under = img.get(x, y);
            img.set(x, y,
                    Rgb{round_half_up(alpha * color.r + (1.0 - alpha) * under.r),
                        round_half_up(alpha * color.g + (1.0 - alpha) * under.g),
                        round_half_up(alpha * color.b + (1.0 - alpha) * under.b)});
        }
    }
}

void draw_box_outline(Rgb8Frame& img, const Box2D& box, Rgb color, int width) {
    const PixelSpan xs = span_for(box.x1, box.x2, img.width);
    const PixelSpan ys = span_for(box.y1, box.y2, img.height);
    const double ix1 = box.x1 + width, ix2 = box.x2 - width;
    const double iy1 = box.y1 + width, iy2 = box.y2 - width;
    for (int y = ys.lo; y <= ys.hi; ++y) {
        for (int x = xs.lo; x <= xs.hi; ++x) {
            const bool interior = x >= ix1 && x <= ix2 && y >= iy1 && y <= iy2;
            if (!interior) img.set(x, y, color);
        }
    }
}

void draw_segment(Rgb8Frame& img, double x0, double y0, double x1, double y1,
                  Rgb color, int width) {
    const double half = width / 2.0;
    const PixelSpan xs = span_for(std::min(x0, x1) - half, std::max(x0, x1) + half,
                                  img.width);
    const PixelSpan ys = span_for(std::min(y0, y1) - half, std::max(y0, y1) + half,
                                  img.height);
    const double dx = x1 - x0, dy = y1 - y0;
    const double len2 = dx * dx + dy * dy;
    const double half2 = half * half;
    for (int y = ys.lo; y <= ys.hi; ++y) {
        for (int x = xs.lo; x <= xs.hi; ++x) {
            double px = x - x0, py = y - y0;
            if (len2 > 0.0) {
                const double t = std::clamp((px * dx + py * dy) / len2, 0.0, 1.0);
                px -= t * dx;
                py -= t * dy;
            }
            if (px * px + py * py <= half2) img.set(x, y, color);
        }
    }
}

void draw_disc(Rgb8Frame& img, double cx, double cy, double diameter, Rgb color) {
    const double r = diameter / 2.0;
    const double r2 = r * r;
    const PixelSpan xs = span_for(cx - r, cx + r, img.width);
    const PixelSpan ys = span_for(cy - r, cy + r, img.height);
    for (int y = ys.lo; y <= ys.hi; ++y) {
        for (int x = xs.lo; x <= xs.hi; ++x) {
            const double dx = x - cx, dy = y - cy;
            if (dx * dx + dy * dy <= r2) img.set(x, y, color);
        }
    }
}

std::vector<const ObjectState*> objects_by_track_id(const FrameAnnotation& frame) {
    std::vector<const ObjectState*> out;
    out.reserve(frame.objects.size());
    for (const auto& obj : frame.objects) out.push_back(&obj);
    std::sort(out.begin(), out.end(), [](const ObjectState* a, const ObjectState* b) {
        return a->track_id < b->track_id;
    });
    return out;
}

Rgb lookup_color(const std::map<std::int64_t, Rgb>& colors, std::int64_t id) {
    const auto it = colors.find(id);
    return it != colors.end() ? it->second : kFallbackClassColor;
}

}  // namespace

const std::map<std::string, Rgb>& default_class_palette() {
    static const std::map<std::string, Rgb> palette = {
        {"car", Rgb{66, 135, 245}},     {"van", Rgb{96, 205, 255}},
        {"truck", Rgb{255, 140, 0}},    {"pedestrian", Rgb{255, 64, 64}},
        {"person", Rgb{255, 128, 192}}, {"cyclist", Rgb{64, 255, 64}},
        {"tram", Rgb{255, 255, 0}},     {"bus", Rgb{160, 32, 240}},
        {"train", Rgb{0, 255, 255}},    {"rider", Rgb{255, 0, 255}},
        {"other", Rgb{192, 192, 192}},
    };
    return palette;
}

Rgb assign_track_color(std::uint64_t seed, std::int64_t track_id) {
    SplitMix64 gen(mix_seed(seed, static_cast<std::uint64_t>(track_id)));
    for (;;) {
        const std::uint64_t x = gen.next();
        const auto r = static_cast<std::uint8_t>(x & 0xFF);
        const auto g = static_cast<std::uint8_t>((x >> 8) & 0xFF);
        const auto b = static_cast<std::uint8_t>((x >> 16) & 0xFF);
        if (r > 50 && g > 50 && b > 50) return Rgb{r, g, b};
    }
}

Rgb class_color(const std::string& class_label,
                const std::map<std::string, Rgb>& palette) {
    const auto it = palette.find(to_lower(class_label));
    return it != palette.end() ? it->second : kFallbackClassColor;
}

ColorAssignment make_color_assignment(const ClipAnnotation& clip,
                                      const RenderConfig& config,
                                      std::vector<std::string>* unknown_labels) {
    ColorAssignment colors;
    std::set<std::string> unknown;
    for (const auto& frame : clip.frames) {
        for (const auto& obj : frame.objects) {
            if (!colors.track_colors.count(obj.track_id)) {
                colors.track_colors[obj.track_id] =
                    assign_track_color(config.seed, obj.track_id);
            }
            if (!colors.class_colors.count(obj.class_label)) {
                colors.class_colors[obj.class_label] =
                    class_color(obj.class_label, config.class_palette);
                if (!config.class_palette.count(to_lower(obj.class_label))) {
                    unknown.insert(obj.class_label);
                }
            }
        }
    }
    if (unknown_labels) {
        unknown_labels->assign(unknown.begin(), unknown.end());
    }
    return colors;
}

ProjectedBox3D project_box3d(const Box3D& box, const CameraCalib& calib) {
    // Object axes in camera coordinates (x right, y down, z forward):
    // forward along the length axis, left along the width axis, up = -y.
    const double c = std::cos(box.yaw), s = std::sin(box.yaw);
    const Vec3 fwd{c, 0.0, -s};
    const Vec3 left{s, 0.0, c};
    const Vec3 up{0.0, -1.0, 0.0};

    // Bottom face then top face, CCW from above, corner 0 rear-left-bottom.
    static constexpr std::array<std::array<double, 3>, 8> kSigns = {{
        {-1, +1, -1}, {-1, -1, -1}, {+1, -1, -1}, {+1, +1, -1},
        {-1, +1, +1}, {-1, -1, +1}, {+1, -1, +1}, {+1, +1, +1},
    }};

    ProjectedBox3D out;
    for (int i = 0; i < 8; ++i) {
        const double a = kSigns[static_cast<std::size_t>(i)][0] * box.length / 2.0;
        const double b = kSigns[static_cast<std::size_t>(i)][1] * box.width / 2.0;
        const double h = kSigns[static_cast<std::size_t>(i)][2] * box.height / 2.0;
        const Vec3 p{box.center.x + a * fwd.x + b * left.x + h * up.x,
                     box.center.y + a * fwd.y + b * left.y + h * up.y,
                     box.center.z + a * fwd.z + b * left.z + h * up.z};
        const Vec3 hom = calib.project_homogeneous(p);
        if (hom.z <= 0.0) {
            throw BehindCameraError("box corner " + std::to_string(i) +
                                    " has non-positive depth");
        }
        out.u[static_cast<std::size_t>(i)] = hom.x / hom.z;
        out.v[static_cast<std::size_t>(i)] = hom.y / hom.z;
    }
    return out;
}

const std::array<std::pair<int, int>, 12>& box3d_edges() {
    static const std::array<std::pair<int, int>, 12> edges = {{
        {0, 1}, {1, 2}, {2, 3}, {3, 0},  // bottom
        {4, 5}, {5, 6}, {6, 7}, {7, 4},  // top
        {0, 4}, {1, 5}, {2, 6}, {3, 7},  // verticals
    }};
    return edges;
}

Rgb8Frame render_bbox_frame(const FrameAnnotation& frame, int width, int height,
                            const std::optional<CameraCalib>& calib,
                            const ColorAssignment& colors, const RenderConfig& config) {
    Rgb8Frame img(width, height);
    for (const ObjectState* obj : objects_by_track_id(frame)) {
        const Rgb track = lookup_color(colors.track_colors, obj->track_id);
        const auto cit = colors.class_colors.find(obj->class_label);
        const Rgb cls = cit != colors.class_colors.end() ? cit->second
                                                         : kFallbackClassColor;

        composite_fill(img, obj->box2d, track, config.fill_alpha);

        bool drew_wireframe = false;
        if (obj->box3d && calib) {
            try {
                const ProjectedBox3D proj = project_box3d(*obj->box3d, *calib);
                for (const auto& [a, b] : box3d_edges()) {
                    draw_segment(img, proj.u[static_cast<std::size_t>(a)],
                                 proj.v[static_cast<std::size_t>(a)],
                                 proj.u[static_cast<std::size_t>(b)],
                                 proj.v[static_cast<std::size_t>(b)], cls,
                                 config.outline_width);
                }
                // X across the rear face marks the object's orientation.
                const auto& rf = proj.rear_face;
                draw_segment(img, proj.u[static_cast<std::size_t>(rf[0])],
                             proj.v[static_cast<std::size_t>(rf[0])],
                             proj.u[static_cast<std::size_t>(rf[2])],
                             proj.v[static_cast<std::size_t>(rf[2])], cls,
                             config.x_mark_width);
                draw_segment(img, proj.u[static_cast<std::size_t>(rf[1])],
                             proj.v[static_cast<std::size_t>(rf[1])],
                             proj.u[static_cast<std::size_t>(rf[3])],
                             proj.v[static_cast<std::size_t>(rf[3])], cls,
                             config.x_mark_width);
                drew_wireframe = true;
            } catch (const BehindCameraError&) {
                // Treated as "3D unavailable"; falls back to the 2D outline.
            }
        }
        if (!drew_wireframe) {
            draw_box_outline(img, obj->box2d, cls, config.outline_width);
        }
    }
    return img;
}

Rgb8Frame render_trajectory_frame(const FrameAnnotation& frame, int width, int height,
                                  const ColorAssignment& colors,
                                  const RenderConfig& config) {
    Rgb8Frame img(width, height);
    for (const ObjectState* obj : objects_by_track_id(frame)) {
        const Rgb track = lookup_color(colors.track_colors, obj->track_id);
        const auto cit = colors.class_colors.find(obj->class_label);
        const Rgb cls = cit != colors.class_colors.end() ? cit->second
                                                         : kFallbackClassColor;
        const double cx = obj->box2d.mid_x();
        const double cy = obj->box2d.mid_y();
        draw_disc(img, cx, cy, config.traj_outer_diameter, track);
        draw_disc(img, cx, cy, config.traj_inner_diameter, cls);
    }
    return img;
}

std::vector<Rgb8Frame> render_clip(const ClipAnnotation& clip, RenderMode mode,
                                   const std::optional<CameraCalib>& calib,
                                   const RenderConfig& config) {
    const ColorAssignment colors = make_color_assignment(clip, config);
    std::vector<Rgb8Frame> frames;
    frames.reserve(clip.frames.size());
    const int n = clip.frame_count();
    for (int i = 0; i < n; ++i) {
        const FrameAnnotation& frame = clip.frames[static_cast<std::size_t>(i)];
        const bool trajectory =
            mode == RenderMode::kTrajectory ||
            (mode == RenderMode::kBboxFinalTrajectory && i == n - 1);
        if (trajectory) {
            frames.push_back(
                render_trajectory_frame(frame, clip.width, clip.height, colors, config));
        } else {
            frames.push_back(render_bbox_frame(frame, clip.width, clip.height, calib,
                                               colors, config));
        }
    }
    return frames;
}

RenderMode render_mode_from_string(const std::string& name) {
    if (name == "bbox") return RenderMode::kBbox;
    if (name == "trajectory") return RenderMode::kTrajectory;
    if (name == "bbox-final-trajectory") return RenderMode::kBboxFinalTrajectory;
    throw ValidationError("unknown render mode: " + name);
}

std::string to_string(RenderMode mode) {
    switch (mode) {
        case RenderMode::kBbox: return "bbox";
        case RenderMode::kTrajectory: return "trajectory";
        case RenderMode::kBboxFinalTrajectory: return "bbox-final-trajectory";
    }
    return "bbox";
}

}  // namespace bboxlab
