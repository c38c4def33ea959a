#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace kpd {

struct Vec3 {
    double x = 0, y = 0, z = 0;
    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const;
};

// Row-major 3x3.
struct Mat3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};
    static Mat3 identity() { return {}; }
    Vec3 operator*(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }
    Mat3 operator*(const Mat3& o) const;
    Mat3 transpose() const;
    double det() const;
};

struct CameraIntrinsics {
    double fx = 1, fy = 1, cx = 0, cy = 0;
    Mat3 K() const { return Mat3{{fx, 0, cx, 0, fy, cy, 0, 0, 1}}; }
};

// The fixed simulator intrinsics: fx = fy = cx = W/2, cy = H/2.
CameraIntrinsics default_intrinsics(int W, int H);

enum class DepthKind : uint8_t { planar_z = 0, ray_distance = 1 };

struct GrayImage {
    int width = 0, height = 0;
    std::vector<uint8_t> pixels;  // row-major
    uint8_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
};

// One evaluation frame: image, depth map, intrinsics, camera-to-world pose
// (x_world = R * x_cam + t).
struct CameraFrame {
    GrayImage image;
    std::vector<float> depth;  // row-major, H*W; <= 0 marks invalid
    DepthKind depth_kind = DepthKind::planar_z;
    CameraIntrinsics intrinsics;
    Mat3 rotation;
    Vec3 translation;

    int width() const { return image.width; }
    int height() const { return image.height; }
    float depth_at(int x, int y) const {
        return depth[static_cast<size_t>(y) * image.width + x];
    }
    // throws when R is not a proper rotation or sizes disagree
    void validate() const;
};

// Z component of the point at distance r along the ray through pixel (u, v).
double ray_distance_to_z(double r, double u, double v, const CameraIntrinsics& K);

// (X, Y, Z) = Z * ((u-cx)/fx, (v-cy)/fy, 1); throws on Z <= 0.
Vec3 unproject(double u, double v, double Z, const CameraIntrinsics& K);

// Pixel coordinates of a camera-space point with z > 0.
std::array<double, 2> project(const Vec3& p, const CameraIntrinsics& K);

enum class ReprojStatus : uint8_t { ok, out_of_bounds, behind_camera, invalid_depth, occluded };

struct Correspondence {
    double x = 0, y = 0;    // source pixel
    double xp = 0, yp = 0;  // projected pixel in the target image
    ReprojStatus status = ReprojStatus::ok;
    bool valid() const { return status == ReprojStatus::ok; }
};

// Bilinear depth sample; negative when any neighbor is invalid or out of range.
double sample_depth(const CameraFrame& frame, double x, double y);

// Map source pixels of frame_i into frame_j via depth + relative pose.
// With occlusion_check, a projected point deeper than frame_j's depth by more
// than 5% relative is marked occluded.
std::vector<Correspondence> reproject(const CameraFrame& frame_i, const CameraFrame& frame_j,
                                      const std::vector<std::array<double, 2>>& points,
                                      bool occlusion_check = true);

// Projective warp; ok=false when the homogeneous divisor vanishes.
std::array<double, 2> warp_homography_point(const std::array<double, 9>& h, double x, double y,
                                            bool* ok = nullptr);
std::vector<Correspondence> warp_homography(const std::array<double, 9>& h,
                                            const std::vector<std::array<double, 2>>& points,
                                            int width = 0, int height = 0);

std::array<double, 9> invert_homography(const std::array<double, 9>& h);

}  // namespace kpd
