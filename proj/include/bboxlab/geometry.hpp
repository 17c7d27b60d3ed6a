#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "bboxlab/errors.hpp"

namespace bboxlab {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

// Axis-aligned 2D box in image space, sub-pixel precision, x1<=x2 and y1<=y2.
// Boxes may extend beyond the image; clipping happens at raster time only.
struct Box2D {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const { return width() * height(); }

    double mid_x() const { return 0.5 * (x1 + x2); }
    double mid_y() const { return 0.5 * (y1 + y2); }

    bool operator==(const Box2D&) const = default;
};

inline bool box_is_valid(const Box2D& b) {
    return std::isfinite(b.x1) && std::isfinite(b.y1) && std::isfinite(b.x2) &&
           std::isfinite(b.y2) && b.x1 <= b.x2 && b.y1 <= b.y2;
}

// area(a ∩ b) / area(a ∪ b); 0 when the union is degenerate.
inline double box_iou(const Box2D& a, const Box2D& b) {
    const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

// Cuboid in camera coordinates (x right, y down, z forward), meters.
// `center` is the geometric center. `yaw` follows the KITTI rotation_y
// convention: rotation about the camera y axis, zero when the length axis
// points along +x, so forward(yaw) = (cos yaw, 0, -sin yaw).
struct Box3D {
    Vec3 center;
    double height = 0.0;
    double width = 0.0;
    double length = 0.0;
    double yaw = 0.0;
};

inline bool box3d_is_valid(const Box3D& b) {
    return b.height > 0.0 && b.width > 0.0 && b.length > 0.0 &&
           b.yaw > -M_PI - 1e-12 && b.yaw <= M_PI + 1e-12 && std::isfinite(b.center.x) &&
           std::isfinite(b.center.y) && std::isfinite(b.center.z);
}

// 3x4 projection from homogeneous camera-space points to homogeneous image
// points (KITTI "P2"-style matrix), row major.
struct CameraCalib {
    std::array<double, 12> projection{};

    double at(int row, int col) const { return projection[row * 4 + col]; }

    // Returns the homogeneous image point (u*w, v*w, w).
    Vec3 project_homogeneous(const Vec3& p) const {
        Vec3 out;
        out.x = at(0, 0) * p.x + at(0, 1) * p.y + at(0, 2) * p.z + at(0, 3);
        out.y = at(1, 0) * p.x + at(1, 1) * p.y + at(1, 2) * p.z + at(1, 3);
        out.z = at(2, 0) * p.x + at(2, 1) * p.y + at(2, 2) * p.z + at(2, 3);
        return out;
    }

    bool has_positive_focal() const { return at(0, 0) > 0.0 && at(1, 1) > 0.0; }
};

inline CameraCalib make_pinhole_calib(double fx, double fy, double cx, double cy) {
    CameraCalib c;
    c.projection = {fx, 0, cx, 0, 0, fy, cy, 0, 0, 0, 1, 0};
    return c;
}

}  // namespace bboxlab
