#include "kpd/scene.hpp"

#include <cmath>
#include <stdexcept>

namespace kpd {

namespace {

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

Vec3 normalize(const Vec3& v) {
    const double n = v.norm();
    if (n < 1e-12) throw std::invalid_argument("cannot normalize zero vector");
    return v * (1.0 / n);
}

uint64_t splitmix(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

double lattice(uint64_t seed, int64_t xi, int64_t yi, int octave) {
    uint64_t h = splitmix(seed ^ (static_cast<uint64_t>(octave) * 0x1357fd9b));
    h = splitmix(h ^ static_cast<uint64_t>(xi) * 0x100000001b3ull);
    h = splitmix(h ^ static_cast<uint64_t>(yi) * 0xc6a4a7935bd1e995ull);
    return static_cast<double>(h >> 11) / static_cast<double>(1ull << 53);
}

double value_noise(uint64_t seed, double u, double v, int octave) {
    const auto xi = static_cast<int64_t>(std::floor(u));
    const auto yi = static_cast<int64_t>(std::floor(v));
    const double fu = u - std::floor(u), fv = v - std::floor(v);
    const double a = lattice(seed, xi, yi, octave), b = lattice(seed, xi + 1, yi, octave);
    const double c = lattice(seed, xi, yi + 1, octave), d = lattice(seed, xi + 1, yi + 1, octave);
    return (1 - fu) * (1 - fv) * a + fu * (1 - fv) * b + (1 - fu) * fv * c + fu * fv * d;
}

// checker + two octaves of value noise, so surfaces carry corners and texture
double surface_texture(uint64_t seed, double u, double v) {
    const int checker =
        (static_cast<int64_t>(std::floor(u)) + static_cast<int64_t>(std::floor(v))) & 1;
    double t = 0.3 + 0.4 * checker;
    t += 0.2 * value_noise(seed, u * 0.5, v * 0.5, 1);
    t += 0.1 * value_noise(seed, u * 4.0, v * 4.0, 2);
    return t;
}

struct Hit {
    double t = -1;       // ray parameter (camera Z, since dir has z scaled)
    int surface = -1;    // 0 = plane, 1+k = box k
    Vec3 point;          // world coordinates
};

// slab intersection, returns entry parameter or -1
double intersect_box(const Vec3& o, const Vec3& d, const Box& box) {
    double tmin = -1e30, tmax = 1e30;
    const double ov[3] = {o.x, o.y, o.z};
    const double dv[3] = {d.x, d.y, d.z};
    const double lo[3] = {box.lo.x, box.lo.y, box.lo.z};
    const double hi[3] = {box.hi.x, box.hi.y, box.hi.z};
    for (int i = 0; i < 3; ++i) {
        if (std::fabs(dv[i]) < 1e-12) {
            if (ov[i] < lo[i] || ov[i] > hi[i]) return -1;
            continue;
        }
        double t0 = (lo[i] - ov[i]) / dv[i];
        double t1 = (hi[i] - ov[i]) / dv[i];
        if (t0 > t1) std::swap(t0, t1);
        tmin = std::max(tmin, t0);
        tmax = std::min(tmax, t1);
        if (tmin > tmax) return -1;
    }
    return tmin > 1e-9 ? tmin : -1;
}

}  // namespace

Pose look_at(const Vec3& eye, const Vec3& target) {
    const Vec3 forward = normalize(target - eye);
    const Vec3 world_up{0, 0, 1};
    Vec3 right = cross(world_up, forward);
    if (right.norm() < 1e-9) right = {1, 0, 0};  // looking straight up/down
    right = normalize(right);
    const Vec3 down = cross(forward, right);
    Pose p;
    // columns are camera axes expressed in world coordinates
    p.rotation.m = {right.x, down.x, forward.x, right.y, down.y,
                    forward.y, right.z, down.z, forward.z};
    p.translation = eye;
    return p;
}

SceneSpec default_scene(uint64_t seed, int frames, int W, int H) {
    SceneSpec spec;
    spec.width = W;
    spec.height = H;
    spec.texture_seed = seed;
    spec.boxes = {
        {{-1.5, -1.0, 0.0}, {-0.5, 0.0, 0.8}},
        {{0.6, -0.4, 0.0}, {1.6, 0.6, 1.2}},
        {{-0.3, 1.0, 0.0}, {0.7, 1.8, 0.5}},
    };
    for (int i = 0; i < frames; ++i) {
        const double s = frames > 1 ? static_cast<double>(i) / (frames - 1) : 0.0;
        const double angle = -0.35 + 0.7 * s;
        const Vec3 eye{4.5 * std::sin(angle), -4.5 * std::cos(angle), 3.2};
        spec.trajectory.push_back(look_at(eye, {0.0, 0.0, 0.3}));
        spec.lighting.push_back(1.0);
    }
    return spec;
}

CameraFrame render_frame(const SceneSpec& spec, size_t frame_index) {
    if (frame_index >= spec.trajectory.size())
        throw std::invalid_argument("render_frame: frame index out of range");
    const Pose& pose = spec.trajectory[frame_index];
    const double lighting =
        spec.lighting.empty() ? 1.0
                              : spec.lighting[std::min(frame_index, spec.lighting.size() - 1)];
    for (const auto& box : spec.boxes) {
        const Vec3& e = pose.translation;
        if (e.x >= box.lo.x && e.x <= box.hi.x && e.y >= box.lo.y && e.y <= box.hi.y &&
            e.z >= box.lo.z && e.z <= box.hi.z)
            throw std::invalid_argument("render_frame: camera is inside a box");
    }

    const int W = spec.width, H = spec.height;
    CameraFrame frame;
    frame.intrinsics = default_intrinsics(W, H);
    frame.rotation = pose.rotation;
    frame.translation = pose.translation;
    frame.depth_kind = spec.depth_kind;
    frame.image.width = W;
    frame.image.height = H;
    frame.image.pixels.assign(static_cast<size_t>(W) * H, 0);
    frame.depth.assign(static_cast<size_t>(W) * H, -1.f);

    const auto& K = frame.intrinsics;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            // camera-space direction with z = 1, so the hit parameter is camera Z
            const Vec3 dir_cam{(x - K.cx) / K.fx, (y - K.cy) / K.fy, 1.0};
            const Vec3 dir = pose.rotation * dir_cam;
            const Vec3& org = pose.translation;

            Hit hit;
            if (dir.z < -1e-12) {  // ground plane z = 0
                const double t = -org.z / dir.z;
                if (t > 1e-9) {
                    hit.t = t;
                    hit.surface = 0;
                    hit.point = org + dir * t;
                }
            }
            for (size_t k = 0; k < spec.boxes.size(); ++k) {
                const double t = intersect_box(org, dir, spec.boxes[k]);
                if (t > 0 && (hit.t < 0 || t < hit.t)) {
                    hit.t = t;
                    hit.surface = static_cast<int>(k) + 1;
                    hit.point = org + dir * t;
                }
            }
            if (hit.surface < 0) continue;  // sky: invalid depth, black pixel

            double shade;
            if (hit.surface == 0) {
                shade = surface_texture(spec.texture_seed, hit.point.x, hit.point.y);
            } else {
                const auto& box = spec.boxes[static_cast<size_t>(hit.surface - 1)];
                // face-local coordinates pick the two non-normal axes
                const double ex = std::min(std::fabs(hit.point.x - box.lo.x),
                                           std::fabs(hit.point.x - box.hi.x));
                const double ey = std::min(std::fabs(hit.point.y - box.lo.y),
                                           std::fabs(hit.point.y - box.hi.y));
                const double ez = std::min(std::fabs(hit.point.z - box.lo.z),
                                           std::fabs(hit.point.z - box.hi.z));
                double u, v;
                double face_tint;
                if (ex <= ey && ex <= ez) {
                    u = hit.point.y;
                    v = hit.point.z;
                    face_tint = 0.15;
                } else if (ey <= ez) {
                    u = hit.point.x;
                    v = hit.point.z;
                    face_tint = 0.0;
                } else {
                    u = hit.point.x;
                    v = hit.point.y;
                    face_tint = 0.25;
                }
                shade = surface_texture(spec.texture_seed + 17 * hit.surface, u * 3, v * 3) +
                        face_tint;
            }
            const double value = std::clamp(shade * lighting, 0.0, 1.0);
            const size_t idx = static_cast<size_t>(y) * W + x;
            frame.image.pixels[idx] = static_cast<uint8_t>(std::lround(value * 255.0));
            const double z = hit.t;  // camera Z by construction
            frame.depth[idx] = static_cast<float>(
                spec.depth_kind == DepthKind::ray_distance ? z * dir_cam.norm() : z);
        }
    return frame;
}

std::vector<CameraFrame> gen_scene(const SceneSpec& spec) {
    std::vector<CameraFrame> frames;
    frames.reserve(spec.trajectory.size());
    for (size_t i = 0; i < spec.trajectory.size(); ++i) frames.push_back(render_frame(spec, i));
    return frames;
}

}  // namespace kpd
