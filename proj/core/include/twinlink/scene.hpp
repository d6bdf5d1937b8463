// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 twinlink contributors

#ifndef TWINLINK_SCENE_HPP
#define TWINLINK_SCENE_HPP

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "twinlink/geometry.hpp"
#include "twinlink/rng.hpp"

namespace twinlink::scene {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

enum class PathKind { LoS, Reflected };

// One propagation path between the BS and a user position.
struct PathRecord {
    std::complex<double> gain;  // linear amplitude, phase -2*pi*f_c*tau
    double delay = 0.0;         // s
    double azimuth = 0.0;       // rad, (-pi, pi], BS-local frame
    double elevation = 0.0;     // rad, [-pi/2, pi/2], BS-local frame
    PathKind kind = PathKind::LoS;
};

enum class Source { Grid, Vehicular };

// Labeled, timestamped channel observation.
struct Sample {
    std::string id;
    std::vector<PathRecord> paths;
    int label = 0;           // 1 = NLoS (no LoS path present), 0 = LoS
    double timestamp = 0.0;  // generation time u_i, s
    Source source = Source::Grid;
};

// Piecewise-linear vehicle trajectory. `periodic` wraps time modulo the
// waypoint span so a short loop can cover a long simulation.
struct Trajectory {
    struct Waypoint {
        double t = 0.0;
        Vec3 position;  // footprint center at ground level
    };
    std::vector<Waypoint> waypoints;
    Vec3 vehicle_blocker_dims{4.5, 1.8, 1.6};  // (x, y, z) box extents, m
    bool periodic = false;

    // Footprint center at time t (clamped to the waypoint span when not
    // periodic).
    Vec3 position_at(double t) const;
};

struct SceneConfig {
    Vec3 bs_position{0.0, 0.0, 21.7};
    double bs_boresight_azimuth = 0.0;              // rad, from +x axis
    double bs_downtilt = 2.0 * 3.14159265358979323846 / 180.0;  // rad
    double extent_width = 100.0;                    // m, UE area [0, width)
    double extent_depth = 100.0;                    // m, UE area [0, depth)
    double grid_cell = 2.0;                         // m
    double ue_height = 1.5;                         // m
    double carrier_hz = 28e9;
    std::vector<Blocker> static_blockers;
    std::vector<Trajectory> lanes;
    double sim_duration = 300.0;   // s
    double sample_period = 0.1;    // s
    double los_dropout_prob = 0.1;
    int max_paths = 6;
    std::uint64_t rng_seed = 1;

    void validate() const;  // throws std::invalid_argument
    bool inside_extent(const Vec3& p) const;
};

// Orthonormal BS-local frame derived from boresight azimuth and downtilt;
// angles of arrival are reported in this frame.
struct BsFrame {
    Vec3 forward, left, up;

    static BsFrame from(double boresight_azimuth, double downtilt);
    // (azimuth, elevation) of unit direction `dir` given in world coordinates.
    void local_angles(const Vec3& dir, double& azimuth, double& elevation) const;
};

// True iff the open segment (bs, ue) passes through any blocker.
bool los_blocked(const Vec3& bs, const Vec3& ue, const std::vector<Blocker>& blockers);

// LoS (subject to dropout) plus first-order specular reflections off blocker
// faces via the image method. Paths are sorted by descending |gain| and
// truncated to max_paths. An empty result means the sample is dropped.
std::vector<PathRecord> trace_paths(const SceneConfig& scene, const Vec3& ue,
                                    const std::vector<Blocker>& blockers_at_t, Rng& rng);

struct GenResult {
    std::vector<Sample> samples;
    std::size_t dropped_no_paths = 0;      // zero surviving paths
    std::size_t skipped_outside_extent = 0;  // vehicular only
};

// One sample per grid-cell center at ue_height, timestamp 0.
GenResult generate_grid_dataset(const SceneConfig& scene);

// One sample per (timestep, lane); timestep t = k * sample_period up to
// sim_duration. Vehicles block each other; a vehicle's own box is excluded
// from its trace since the antenna sits on its roof.
GenResult generate_vehicular_dataset(const SceneConfig& scene);

// Label from path list: 1 iff no LoS-kind path present.
int label_from_paths(const std::vector<PathRecord>& paths);

}  // namespace twinlink::scene

#endif  // TWINLINK_SCENE_HPP
