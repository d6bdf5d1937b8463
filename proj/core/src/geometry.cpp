// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#include "twinlink/geometry.hpp"

#include <algorithm>
#include <limits>

namespace twinlink {

namespace {

// Parameter interval of points whose `axis` coordinate lies inside
// [lo, hi] along a(1-t) + b*t. Returns false when the interval is empty.
bool slab_interval(double a, double d, double lo, double hi, double& t0, double& t1) {
    if (d == 0.0) {
        if (a < lo || a > hi) return false;
        t0 = -std::numeric_limits<double>::infinity();
        t1 = std::numeric_limits<double>::infinity();
        return true;
    }
    double ta = (lo - a) / d;
    double tb = (hi - a) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = ta;
    t1 = tb;
    return true;
}

}  // namespace

bool segment_intersects_box(const Vec3& a, const Vec3& b, const Blocker& box) {
    const Vec3 d = b - a;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    const double av[3] = {a.x, a.y, a.z};
    const double dv[3] = {d.x, d.y, d.z};
    const double mn[3] = {box.min_corner.x, box.min_corner.y, box.min_corner.z};
    const double mx[3] = {box.max_corner.x, box.max_corner.y, box.max_corner.z};

    for (int k = 0; k < 3; ++k) {
        double t0, t1;
        if (!slab_interval(av[k], dv[k], mn[k], mx[k], t0, t1)) return false;
        lo = std::max(lo, t0);
        hi = std::min(hi, t1);
        if (lo > hi) return false;
    }
    // Contact interval [lo, hi] must reach strictly inside the open (0, 1)
    // parameter range; endpoint or pre/post-segment grazes do not block.
    return hi > 0.0 && lo < 1.0;
}

Vec3 mirror_across_plane(const Vec3& p, const Vec3& origin, const Vec3& normal) {
    const double dist = (p - origin).dot(normal);
    return p - 2.0 * dist * normal;
}

}  // namespace twinlink
