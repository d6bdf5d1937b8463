// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#include "twinlink/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace twinlink::scene {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::uint64_t kGridStreamTag = 0x47;       // 'G'
constexpr std::uint64_t kVehicularStreamTag = 0x56;  // 'V'

double wrap_azimuth(double a) {
    while (a <= -kPi) a += 2.0 * kPi;
    while (a > kPi) a -= 2.0 * kPi;
    return a;
}

}  // namespace

Vec3 Trajectory::position_at(double t) const {
    const double t0 = waypoints.front().t;
    const double t1 = waypoints.back().t;
    if (periodic && t1 > t0) {
        t = t0 + std::fmod(t - t0, t1 - t0);
        if (t < t0) t += t1 - t0;
    } else {
        t = std::clamp(t, t0, t1);
    }
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        if (t <= waypoints[i].t) {
            const auto& a = waypoints[i - 1];
            const auto& b = waypoints[i];
            const double span = b.t - a.t;
            const double u = span > 0.0 ? (t - a.t) / span : 0.0;
            return a.position + u * (b.position - a.position);
        }
    }
    return waypoints.back().position;
}

void SceneConfig::validate() const {
    if (grid_cell <= 0.0) throw std::invalid_argument("scene: grid_cell must be > 0");
    if (sample_period <= 0.0) throw std::invalid_argument("scene: sample_period must be > 0");
    if (los_dropout_prob < 0.0 || los_dropout_prob > 1.0)
        throw std::invalid_argument("scene: los_dropout_prob must be in [0, 1]");
    if (max_paths < 1) throw std::invalid_argument("scene: max_paths must be >= 1");
    if (carrier_hz <= 0.0) throw std::invalid_argument("scene: carrier_hz must be > 0");
    if (!bs_position.finite()) throw std::invalid_argument("scene: bs_position not finite");
    for (const auto& b : static_blockers) {
        if (b.min_corner.x > b.max_corner.x || b.min_corner.y > b.max_corner.y ||
            b.min_corner.z > b.max_corner.z)
            throw std::invalid_argument("scene: blocker '" + b.id + "' has min_corner > max_corner");
        if (!(b.reflection_loss_db >= 0.0) || !std::isfinite(b.reflection_loss_db))
            throw std::invalid_argument("scene: blocker '" + b.id + "' reflection_loss_db invalid");
    }
    for (const auto& lane : lanes) {
        if (lane.waypoints.size() < 2)
            throw std::invalid_argument("scene: lane needs at least 2 waypoints");
        for (std::size_t i = 1; i < lane.waypoints.size(); ++i)
            if (!(lane.waypoints[i].t > lane.waypoints[i - 1].t))
                throw std::invalid_argument("scene: lane waypoint times must be strictly increasing");
    }
}

bool SceneConfig::inside_extent(const Vec3& p) const {
    return p.x >= 0.0 && p.x < extent_width && p.y >= 0.0 && p.y < extent_depth;
}

BsFrame BsFrame::from(double boresight_azimuth, double downtilt) {
    BsFrame f;
    f.forward = Vec3{std::cos(downtilt) * std::cos(boresight_azimuth),
                     std::cos(downtilt) * std::sin(boresight_azimuth), -std::sin(downtilt)};
    const Vec3 world_up{0.0, 0.0, 1.0};
    f.left = world_up.cross(f.forward);
    if (f.left.norm() < 1e-12) f.left = Vec3{0.0, 1.0, 0.0};  // boresight straight up/down
    f.left = f.left.normalized();
    f.up = f.forward.cross(f.left);
    return f;
}

void BsFrame::local_angles(const Vec3& dir, double& azimuth, double& elevation) const {
    const Vec3 d = dir.normalized();
    const double x = d.dot(forward);
    const double y = d.dot(left);
    const double z = d.dot(up);
    azimuth = wrap_azimuth(std::atan2(y, x));
    elevation = std::asin(std::clamp(z, -1.0, 1.0));
}

bool los_blocked(const Vec3& bs, const Vec3& ue, const std::vector<Blocker>& blockers) {
    for (const auto& b : blockers)
        if (segment_intersects_box(bs, ue, b)) return true;
    return false;
}

namespace {

PathRecord make_path(const SceneConfig& scene, const BsFrame& frame, const Vec3& first_leg_dir,
                     double total_distance, double extra_loss_db, PathKind kind) {
    PathRecord p;
    const double lambda = kSpeedOfLight / scene.carrier_hz;
    const double magnitude =
        lambda / (4.0 * kPi * total_distance) * std::pow(10.0, -extra_loss_db / 20.0);
    p.delay = total_distance / kSpeedOfLight;
    const double phase = -2.0 * kPi * scene.carrier_hz * p.delay;
    p.gain = std::polar(magnitude, phase);
    frame.local_angles(first_leg_dir, p.azimuth, p.elevation);
    p.kind = kind;
    return p;
}

// First-order image-method reflections off every blocker face, occlusion
// checked on both legs against the full blocker set.
void append_reflections(const SceneConfig& scene, const BsFrame& frame, const Vec3& ue,
                        const std::vector<Blocker>& blockers, std::vector<PathRecord>& out) {
    const Vec3& bs = scene.bs_position;
    for (const auto& b : blockers) {
        const double mn[3] = {b.min_corner.x, b.min_corner.y, b.min_corner.z};
        const double mx[3] = {b.max_corner.x, b.max_corner.y, b.max_corner.z};
        const double bsv[3] = {bs.x, bs.y, bs.z};
        const double uev[3] = {ue.x, ue.y, ue.z};
        for (int axis = 0; axis < 3; ++axis) {
            for (int side = 0; side < 2; ++side) {
                const double plane = side == 0 ? mn[axis] : mx[axis];
                const double sign = side == 0 ? -1.0 : 1.0;
                // Both endpoints strictly on the lit side of the face.
                if (sign * (bsv[axis] - plane) <= 0.0) continue;
                if (sign * (uev[axis] - plane) <= 0.0) continue;

                double img[3] = {bsv[0], bsv[1], bsv[2]};
                img[axis] = 2.0 * plane - bsv[axis];
                const double denom = uev[axis] - img[axis];
                if (denom == 0.0) continue;
                const double t = (plane - img[axis]) / denom;
                if (t <= 0.0 || t >= 1.0) continue;

                double rp[3];
                bool on_face = true;
                for (int k = 0; k < 3; ++k) {
                    rp[k] = img[k] + t * (uev[k] - img[k]);
                    if (k != axis && (rp[k] < mn[k] || rp[k] > mx[k])) on_face = false;
                }
                // Pin the reflection point onto the face plane so the leg
                // occlusion checks see an exact endpoint contact.
                rp[axis] = plane;
                if (!on_face) continue;

                const Vec3 refl{rp[0], rp[1], rp[2]};
                if (los_blocked(bs, refl, blockers)) continue;
                if (los_blocked(refl, ue, blockers)) continue;

                const Vec3 image{img[0], img[1], img[2]};
                const double d_total = (ue - image).norm();
                out.push_back(make_path(scene, frame, refl - bs, d_total, b.reflection_loss_db,
                                        PathKind::Reflected));
            }
        }
    }
}

}  // namespace

std::vector<PathRecord> trace_paths(const SceneConfig& scene, const Vec3& ue,
                                    const std::vector<Blocker>& blockers_at_t, Rng& rng) {
    const Vec3& bs = scene.bs_position;
    if (bs == ue) throw std::invalid_argument("trace_paths: bs == ue");
    const BsFrame frame = BsFrame::from(scene.bs_boresight_azimuth, scene.bs_downtilt);

    std::vector<PathRecord> paths;
    if (!los_blocked(bs, ue, blockers_at_t)) {
        const bool removed =
            scene.los_dropout_prob > 0.0 && rng.uniform() < scene.los_dropout_prob;
        if (!removed)
            paths.push_back(
                make_path(scene, frame, ue - bs, (ue - bs).norm(), 0.0, PathKind::LoS));
    }
    append_reflections(scene, frame, ue, blockers_at_t, paths);

    std::stable_sort(paths.begin(), paths.end(), [](const PathRecord& a, const PathRecord& b) {
        return std::abs(a.gain) > std::abs(b.gain);
    });
    if (paths.size() > static_cast<std::size_t>(scene.max_paths))
        paths.resize(static_cast<std::size_t>(scene.max_paths));
    return paths;
}

int label_from_paths(const std::vector<PathRecord>& paths) {
    for (const auto& p : paths)
        if (p.kind == PathKind::LoS) return 0;
    return 1;
}

GenResult generate_grid_dataset(const SceneConfig& scene) {
    scene.validate();
    GenResult res;
    const std::uint64_t base = mix_seed(scene.rng_seed, kGridStreamTag);
    const int nx = static_cast<int>(std::floor(scene.extent_width / scene.grid_cell));
    const int ny = static_cast<int>(std::floor(scene.extent_depth / scene.grid_cell));
    std::size_t index = 0;
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix, ++index) {
            const Vec3 ue{(ix + 0.5) * scene.grid_cell, (iy + 0.5) * scene.grid_cell,
                          scene.ue_height};
            Rng rng(mix_seed(base, index));
            auto paths = trace_paths(scene, ue, scene.static_blockers, rng);
            if (paths.empty()) {
                ++res.dropped_no_paths;
                continue;
            }
            Sample s;
            char buf[32];
            std::snprintf(buf, sizeof buf, "g%06zu", index);
            s.id = buf;
            s.label = label_from_paths(paths);
            s.paths = std::move(paths);
            s.timestamp = 0.0;
            s.source = Source::Grid;
            res.samples.push_back(std::move(s));
        }
    }
    return res;
}

GenResult generate_vehicular_dataset(const SceneConfig& scene) {
    scene.validate();
    if (scene.lanes.empty())
        throw std::invalid_argument("generate_vehicular_dataset: no lanes configured");
    GenResult res;
    const std::uint64_t base = mix_seed(scene.rng_seed, kVehicularStreamTag);
    const std::size_t n_lanes = scene.lanes.size();
    const auto n_steps =
        static_cast<std::size_t>(std::floor(scene.sim_duration / scene.sample_period + 1e-9)) + 1;

    std::vector<Vec3> centers(n_lanes);
    std::vector<Blocker> boxes(n_lanes);
    for (std::size_t step = 0; step < n_steps; ++step) {
        const double t = static_cast<double>(step) * scene.sample_period;
        for (std::size_t i = 0; i < n_lanes; ++i) {
            const auto& lane = scene.lanes[i];
            centers[i] = lane.position_at(t);
            const Vec3& dims = lane.vehicle_blocker_dims;
            boxes[i].min_corner = centers[i] - Vec3{dims.x / 2.0, dims.y / 2.0, 0.0};
            boxes[i].max_corner = centers[i] + Vec3{dims.x / 2.0, dims.y / 2.0, 0.0} +
                                  Vec3{0.0, 0.0, dims.z};
            boxes[i].reflection_loss_db = 0.0;
            boxes[i].id = "veh" + std::to_string(i);
        }
        for (std::size_t i = 0; i < n_lanes; ++i) {
            if (!scene.inside_extent(centers[i])) {
                ++res.skipped_outside_extent;
                continue;
            }
            const Vec3 antenna =
                centers[i] + Vec3{0.0, 0.0, scene.lanes[i].vehicle_blocker_dims.z};
            std::vector<Blocker> blockers = scene.static_blockers;
            for (std::size_t j = 0; j < n_lanes; ++j)
                if (j != i && scene.inside_extent(centers[j])) blockers.push_back(boxes[j]);

            Rng rng(mix_seed(base, step * n_lanes + i));
            auto paths = trace_paths(scene, antenna, blockers, rng);
            if (paths.empty()) {
                ++res.dropped_no_paths;
                continue;
            }
            Sample s;
            char buf[32];
            std::snprintf(buf, sizeof buf, "v%06u-%u", static_cast<unsigned>(step),
                          static_cast<unsigned>(i));
            s.id = buf;
            s.label = label_from_paths(paths);
            s.paths = std::move(paths);
            s.timestamp = t;
            s.source = Source::Vehicular;
            res.samples.push_back(std::move(s));
        }
    }
    return res;
}

}  // namespace twinlink::scene
