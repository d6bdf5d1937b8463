// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#ifndef TWINLINK_GEOMETRY_HPP
#define TWINLINK_GEOMETRY_HPP

#include <cmath>
#include <string>

namespace twinlink {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const {
        const double n = norm();
        return {x / n, y / n, z / n};
    }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

// Axis-aligned obstacle. Degenerate boxes (zero extent along an axis) act as
// thin reflective/occluding planes.
struct Blocker {
    Vec3 min_corner;
    Vec3 max_corner;
    double reflection_loss_db = 6.0;  // per bounce, >= 0
    std::string id;
};

// True iff the open segment (a, b) passes through the box. Contacts at the
// segment endpoints do not count; a thin (degenerate) box crossed mid-segment
// does. Slab method.
bool segment_intersects_box(const Vec3& a, const Vec3& b, const Blocker& box);

// Mirror image of point p across the plane through `origin` with unit normal
// `normal`.
Vec3 mirror_across_plane(const Vec3& p, const Vec3& origin, const Vec3& normal);

}  // namespace twinlink

#endif  // TWINLINK_GEOMETRY_HPP
