#include "kpd/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace kpd {

double Vec3::norm() const { return std::sqrt(x * x + y * y + z * z); }

Mat3 Mat3::operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double acc = 0;
            for (int k = 0; k < 3; ++k) acc += m[3 * i + k] * o.m[3 * k + j];
            r.m[3 * i + j] = acc;
        }
    return r;
}

Mat3 Mat3::transpose() const {
    return Mat3{{m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]}};
}

double Mat3::det() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
}

CameraIntrinsics default_intrinsics(int W, int H) {
    if (W <= 0 || H <= 0) throw std::invalid_argument("default_intrinsics: bad image size");
    // fy is W/2 as well, not H/2 -- square pixels
    return {W / 2.0, W / 2.0, W / 2.0, H / 2.0};
}

void CameraFrame::validate() const {
    if (static_cast<size_t>(image.width) * image.height != depth.size())
        throw std::runtime_error("frame depth size does not match image size");
    const Mat3 rtr = rotation.transpose() * rotation;
    for (int i = 0; i < 9; ++i) {
        const double expect = (i % 4 == 0) ? 1.0 : 0.0;
        if (std::fabs(rtr.m[i] - expect) > 1e-6)
            throw std::runtime_error("frame rotation is not orthonormal");
    }
    if (std::fabs(rotation.det() - 1.0) > 1e-6)
        throw std::runtime_error("frame rotation has det != +1");
}

double ray_distance_to_z(double r, double u, double v, const CameraIntrinsics& K) {
    if (r <= 0) throw std::invalid_argument("ray_distance_to_z: r must be positive");
    const double a = (u - K.cx) / K.fx;
    const double b = (v - K.cy) / K.fy;
    return r / std::sqrt(1.0 + a * a + b * b);
}

Vec3 unproject(double u, double v, double Z, const CameraIntrinsics& K) {
    if (Z <= 0) throw std::invalid_argument("unproject: Z must be positive");
    return {Z * (u - K.cx) / K.fx, Z * (v - K.cy) / K.fy, Z};
}

std::array<double, 2> project(const Vec3& p, const CameraIntrinsics& K) {
    return {K.fx * p.x / p.z + K.cx, K.fy * p.y / p.z + K.cy};
}

double sample_depth(const CameraFrame& frame, double x, double y) {
    const int W = frame.width(), H = frame.height();
    if (x < 0 || y < 0 || x > W - 1 || y > H - 1) return -1.0;
    int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
    if (x0 >= W - 1) x0 = W - 2 >= 0 ? W - 2 : 0;
    if (y0 >= H - 1) y0 = H - 2 >= 0 ? H - 2 : 0;
    const int x1 = std::min(x0 + 1, W - 1), y1 = std::min(y0 + 1, H - 1);
    const double fx = x - x0, fy = y - y0;
    const double d00 = frame.depth_at(x0, y0), d10 = frame.depth_at(x1, y0);
    const double d01 = frame.depth_at(x0, y1), d11 = frame.depth_at(x1, y1);
    if (d00 <= 0 || d10 <= 0 || d01 <= 0 || d11 <= 0) return -1.0;
    return (1 - fx) * (1 - fy) * d00 + fx * (1 - fy) * d10 + (1 - fx) * fy * d01 + fx * fy * d11;
}

std::vector<Correspondence> reproject(const CameraFrame& frame_i, const CameraFrame& frame_j,
                                      const std::vector<std::array<double, 2>>& points,
                                      bool occlusion_check) {
    if (frame_i.width() != frame_j.width() || frame_i.height() != frame_j.height())
        throw std::invalid_argument("reproject: frame sizes differ");
    const int W = frame_j.width(), H = frame_j.height();
    const Mat3 rjt = frame_j.rotation.transpose();

    std::vector<Correspondence> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        Correspondence c;
        c.x = p[0];
        c.y = p[1];
        double d = sample_depth(frame_i, p[0], p[1]);
        if (d <= 0) {
            c.status = ReprojStatus::invalid_depth;
            out.push_back(c);
            continue;
        }
        const double Z = frame_i.depth_kind == DepthKind::ray_distance
                             ? ray_distance_to_z(d, p[0], p[1], frame_i.intrinsics)
                             : d;
        const Vec3 cam_i = unproject(p[0], p[1], Z, frame_i.intrinsics);
        const Vec3 world = frame_i.rotation * cam_i + frame_i.translation;
        const Vec3 cam_j = rjt * (world - frame_j.translation);
        if (cam_j.z <= 0) {
            c.status = ReprojStatus::behind_camera;
            out.push_back(c);
            continue;
        }
        const auto q = project(cam_j, frame_j.intrinsics);
        c.xp = q[0];
        c.yp = q[1];
        if (q[0] < 0 || q[0] >= W || q[1] < 0 || q[1] >= H) {
            c.status = ReprojStatus::out_of_bounds;
            out.push_back(c);
            continue;
        }
        if (occlusion_check) {
            const double dj = sample_depth(frame_j, q[0], q[1]);
            if (dj > 0) {
                const double zj = frame_j.depth_kind == DepthKind::ray_distance
                                      ? ray_distance_to_z(dj, q[0], q[1], frame_j.intrinsics)
                                      : dj;
                if (cam_j.z > zj * 1.05) {
                    c.status = ReprojStatus::occluded;
                    out.push_back(c);
                    continue;
                }
            }
        }
        c.status = ReprojStatus::ok;
        out.push_back(c);
    }
    return out;
}

std::array<double, 2> warp_homography_point(const std::array<double, 9>& h, double x, double y,
                                            bool* ok) {
    const double d = h[6] * x + h[7] * y + h[8];
    if (std::fabs(d) < 1e-12) {
        if (ok) *ok = false;
        return {0, 0};
    }
    if (ok) *ok = true;
    return {(h[0] * x + h[1] * y + h[2]) / d, (h[3] * x + h[4] * y + h[5]) / d};
}

std::vector<Correspondence> warp_homography(const std::array<double, 9>& h,
                                            const std::vector<std::array<double, 2>>& points,
                                            int width, int height) {
    std::vector<Correspondence> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        Correspondence c;
        c.x = p[0];
        c.y = p[1];
        bool ok = true;
        const auto q = warp_homography_point(h, p[0], p[1], &ok);
        if (!ok) {
            c.status = ReprojStatus::invalid_depth;
            out.push_back(c);
            continue;
        }
        c.xp = q[0];
        c.yp = q[1];
        c.status = (width > 0 && height > 0 &&
                    (q[0] < 0 || q[0] >= width || q[1] < 0 || q[1] >= height))
                       ? ReprojStatus::out_of_bounds
                       : ReprojStatus::ok;
        out.push_back(c);
    }
    return out;
}

std::array<double, 9> invert_homography(const std::array<double, 9>& h) {
    const double det = h[0] * (h[4] * h[8] - h[5] * h[7]) - h[1] * (h[3] * h[8] - h[5] * h[6]) +
                       h[2] * (h[3] * h[7] - h[4] * h[6]);
    if (std::fabs(det) < 1e-12) throw std::invalid_argument("homography is singular");
    const double inv = 1.0 / det;
    return {(h[4] * h[8] - h[5] * h[7]) * inv, (h[2] * h[7] - h[1] * h[8]) * inv,
            (h[1] * h[5] - h[2] * h[4]) * inv, (h[5] * h[6] - h[3] * h[8]) * inv,
            (h[0] * h[8] - h[2] * h[6]) * inv, (h[2] * h[3] - h[0] * h[5]) * inv,
            (h[3] * h[7] - h[4] * h[6]) * inv, (h[1] * h[6] - h[0] * h[7]) * inv,
            (h[0] * h[4] - h[1] * h[3]) * inv};
}

}  // namespace kpd
