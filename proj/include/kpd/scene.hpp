#pragma once

#include <cstdint>
#include <vector>

#include "kpd/geometry.hpp"

namespace kpd {

struct Pose {
    Mat3 rotation;     // camera-to-world
    Vec3 translation;  // camera center in world coordinates
};

// Camera-to-world pose looking from `eye` toward `target` (camera +z forward,
// +y down in world terms consistent with image rows).
Pose look_at(const Vec3& eye, const Vec3& target);

struct Box {
    Vec3 lo, hi;  // axis-aligned
};

// Textured ground plane (z = 0) plus axis-aligned boxes, ray-cast with exact
// analytic depth. One trajectory reused across lighting settings.
struct SceneSpec {
    int width = 128, height = 128;
    std::vector<Box> boxes;
    std::vector<Pose> trajectory;
    std::vector<double> lighting;  // per-frame brightness multiplier
    DepthKind depth_kind = DepthKind::planar_z;
    uint64_t texture_seed = 0;
};

// A small default world: ground plane, a few boxes, a lateral arc of poses.
SceneSpec default_scene(uint64_t seed, int frames, int W, int H);

CameraFrame render_frame(const SceneSpec& spec, size_t frame_index);
std::vector<CameraFrame> gen_scene(const SceneSpec& spec);

}  // namespace kpd
