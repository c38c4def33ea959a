#include "kpd/shapes.hpp"

#include <algorithm>
#include <cmath>

#include "kpd/geometry.hpp"

namespace kpd {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Quad {
    std::array<std::array<double, 2>, 4> v;  // convex, counter-clockwise
    bool contains(double x, double y) const {
        for (int i = 0; i < 4; ++i) {
            const auto& a = v[static_cast<size_t>(i)];
            const auto& b = v[static_cast<size_t>((i + 1) % 4)];
            const double cross = (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]);
            if (cross < 0) return false;
        }
        return true;
    }
};

struct Tri {
    std::array<std::array<double, 2>, 3> v;
    bool contains(double x, double y) const {
        double sign = 0;
        for (int i = 0; i < 3; ++i) {
            const auto& a = v[static_cast<size_t>(i)];
            const auto& b = v[static_cast<size_t>((i + 1) % 3)];
            const double cross = (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]);
            if (i == 0)
                sign = cross;
            else if (cross * sign < 0)
                return false;
        }
        return true;
    }
};

struct Segment {
    double x0, y0, x1, y1, halfwidth;
    bool contains(double x, double y) const {
        const double dx = x1 - x0, dy = y1 - y0;
        const double len2 = dx * dx + dy * dy;
        double t = len2 > 0 ? ((x - x0) * dx + (y - y0) * dy) / len2 : 0;
        t = std::clamp(t, 0.0, 1.0);
        const double px = x0 + t * dx - x, py = y0 + t * dy - y;
        return px * px + py * py <= halfwidth * halfwidth;
    }
};

struct Ellipse {
    double cx, cy, rx, ry, angle;
    bool contains(double x, double y) const {
        const double ca = std::cos(angle), sa = std::sin(angle);
        const double u = ((x - cx) * ca + (y - cy) * sa) / rx;
        const double v = (-(x - cx) * sa + (y - cy) * ca) / ry;
        return u * u + v * v <= 1.0;
    }
};

struct Checker {
    double x0, y0, cellsz;
    int nx, ny;
    double x1() const { return x0 + nx * cellsz; }
    double y1() const { return y0 + ny * cellsz; }
    bool contains(double x, double y) const {
        return x >= x0 && x < x1() && y >= y0 && y < y1();
    }
    int parity(double x, double y) const {
        const int ix = static_cast<int>((x - x0) / cellsz);
        const int iy = static_cast<int>((y - y0) / cellsz);
        return (ix + iy) & 1;
    }
};

struct Shape {
    enum Kind { kQuad, kTri, kSegment, kEllipse, kChecker } kind;
    Quad quad{};
    Tri tri{};
    Segment seg{};
    Ellipse ell{};
    Checker chk{};
    float color = 0.5f, color2 = 0.5f;

    bool contains(double x, double y) const {
        switch (kind) {
            case kQuad: return quad.contains(x, y);
            case kTri: return tri.contains(x, y);
            case kSegment: return seg.contains(x, y);
            case kEllipse: return ell.contains(x, y);
            case kChecker: return chk.contains(x, y);
        }
        return false;
    }
    float shade(double x, double y) const {
        if (kind == kChecker) return chk.parity(x, y) ? color : color2;
        return color;
    }
};

double urand(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::array<double, 9> mat_mul3(const std::array<double, 9>& a, const std::array<double, 9>& b) {
    std::array<double, 9> r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) r[3 * i + j] += a[3 * i + k] * b[3 * k + j];
    return r;
}

}  // namespace

RenderedScene render_shape_scene(std::mt19937_64& rng, int W, int H) {
    RenderedScene scene;
    scene.background = static_cast<float>(urand(rng, 0.35, 0.65));
    const double margin = 4.0;

    std::vector<Shape> shapes;
    std::vector<std::vector<std::array<double, 2>>> shape_corners;

    auto far_color = [&](float bg) {
        // contrastive fill so corners are visible
        float c = static_cast<float>(urand(rng, 0.0, 1.0));
        while (std::fabs(c - bg) < 0.2f) c = static_cast<float>(urand(rng, 0.0, 1.0));
        return c;
    };

    const int n_shapes = 4 + static_cast<int>(rng() % 4);
    for (int s = 0; s < n_shapes; ++s) {
        Shape sh{};
        sh.color = far_color(scene.background);
        std::vector<std::array<double, 2>> corners;
        const int kind = static_cast<int>(rng() % 5);
        if (kind == 0) {  // convex quad
            const double cx = urand(rng, margin * 4, W - margin * 4);
            const double cy = urand(rng, margin * 4, H - margin * 4);
            std::array<double, 4> angles;
            for (auto& a : angles) a = urand(rng, 0, 2 * kPi);
            std::sort(angles.begin(), angles.end());
            sh.kind = Shape::kQuad;
            for (int i = 0; i < 4; ++i) {
                const double r = urand(rng, 0.08, 0.22) * std::min(W, H);
                sh.quad.v[static_cast<size_t>(i)] = {cx + r * std::cos(angles[static_cast<size_t>(i)]),
                                                     cy + r * std::sin(angles[static_cast<size_t>(i)])};
                corners.push_back(sh.quad.v[static_cast<size_t>(i)]);
            }
        } else if (kind == 1) {  // triangle
            sh.kind = Shape::kTri;
            const double cx = urand(rng, margin * 4, W - margin * 4);
            const double cy = urand(rng, margin * 4, H - margin * 4);
            for (int i = 0; i < 3; ++i) {
                const double a = urand(rng, 0, 2 * kPi);
                const double r = urand(rng, 0.08, 0.2) * std::min(W, H);
                sh.tri.v[static_cast<size_t>(i)] = {cx + r * std::cos(a), cy + r * std::sin(a)};
                corners.push_back(sh.tri.v[static_cast<size_t>(i)]);
            }
        } else if (kind == 2) {  // thick segment
            sh.kind = Shape::kSegment;
            sh.seg = {urand(rng, margin, W - margin), urand(rng, margin, H - margin),
                      urand(rng, margin, W - margin), urand(rng, margin, H - margin),
                      urand(rng, 1.0, 2.0)};
            corners.push_back({sh.seg.x0, sh.seg.y0});
            corners.push_back({sh.seg.x1, sh.seg.y1});
        } else if (kind == 3) {  // ellipse, no corners
            sh.kind = Shape::kEllipse;
            sh.ell = {urand(rng, margin * 4, W - margin * 4), urand(rng, margin * 4, H - margin * 4),
                      urand(rng, 0.04, 0.12) * W, urand(rng, 0.04, 0.12) * H,
                      urand(rng, 0, kPi)};
        } else {  // checkerboard
            sh.kind = Shape::kChecker;
            sh.color2 = far_color(sh.color);
            const int nx = 2 + static_cast<int>(rng() % 3);
            const int ny = 2 + static_cast<int>(rng() % 3);
            const double cellsz = urand(rng, 8.0, 16.0);
            sh.chk = {urand(rng, margin, std::max(margin + 1.0, W - margin - nx * cellsz)),
                      urand(rng, margin, std::max(margin + 1.0, H - margin - ny * cellsz)),
                      cellsz, nx, ny};
            // interior junctions only
            for (int iy = 1; iy < ny; ++iy)
                for (int ix = 1; ix < nx; ++ix)
                    corners.push_back({sh.chk.x0 + ix * cellsz, sh.chk.y0 + iy * cellsz});
        }
        shapes.push_back(sh);
        shape_corners.push_back(std::move(corners));
    }

    // raster: later shapes overdraw earlier ones
    TensorF img(1, 1, H, W);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            float v = scene.background + static_cast<float>(urand(rng, -0.03, 0.03));
            const double px = x + 0.5, py = y + 0.5;
            for (const auto& sh : shapes)
                if (sh.contains(px, py)) v = sh.shade(px, py);
            img.at(0, 0, y, x) = std::clamp(v, 0.f, 1.f);
        }
    scene.image = std::move(img);

    // a corner survives if no later shape covers it
    for (size_t s = 0; s < shapes.size(); ++s)
        for (const auto& c : shape_corners[s]) {
            if (c[0] < 1 || c[0] >= W - 1 || c[1] < 1 || c[1] >= H - 1) continue;
            bool covered = false;
            for (size_t later = s + 1; later < shapes.size(); ++later)
                if (shapes[later].contains(c[0], c[1])) {
                    covered = true;
                    break;
                }
            if (!covered) scene.corners.push_back(c);
        }
    return scene;
}

std::array<double, 9> sample_homography(std::mt19937_64& rng, int W, int H) {
    const double cx = W / 2.0, cy = H / 2.0;
    const double angle = urand(rng, -15.0, 15.0) * kPi / 180.0;
    const double scale = urand(rng, 0.8, 1.2);
    const double tx = urand(rng, -0.1, 0.1) * W;
    const double ty = urand(rng, -0.1, 0.1) * H;
    const double pmag = 0.1 / std::max(W, H);
    const double px = urand(rng, -pmag, pmag);
    const double py = urand(rng, -pmag, pmag);

    const std::array<double, 9> to_center{1, 0, -cx, 0, 1, -cy, 0, 0, 1};
    const std::array<double, 9> rot_scale{scale * std::cos(angle), -scale * std::sin(angle), 0,
                                          scale * std::sin(angle), scale * std::cos(angle), 0,
                                          0, 0, 1};
    const std::array<double, 9> persp{1, 0, 0, 0, 1, 0, px, py, 1};
    const std::array<double, 9> back{1, 0, cx + tx, 0, 1, cy + ty, 0, 0, 1};
    return mat_mul3(back, mat_mul3(persp, mat_mul3(rot_scale, to_center)));
}

std::vector<int> labels_from_corners(const std::vector<std::array<double, 2>>& corners, int W,
                                     int H, int cell) {
    const int wc = W / cell, hc = H / cell;
    const int dustbin = cell * cell;
    std::vector<int> labels(static_cast<size_t>(wc) * hc, dustbin);
    std::vector<double> best(static_cast<size_t>(wc) * hc, 1e30);
    for (const auto& c : corners) {
        if (c[0] < 0 || c[0] >= W || c[1] < 0 || c[1] >= H) continue;
        const int x = static_cast<int>(c[0]), y = static_cast<int>(c[1]);
        const int ci = (y / cell) * wc + (x / cell);
        const double ccx = (x / cell) * cell + cell / 2.0;
        const double ccy = (y / cell) * cell + cell / 2.0;
        const double d = (c[0] - ccx) * (c[0] - ccx) + (c[1] - ccy) * (c[1] - ccy);
        if (d < best[static_cast<size_t>(ci)]) {
            best[static_cast<size_t>(ci)] = d;
            labels[static_cast<size_t>(ci)] = (y % cell) * cell + (x % cell);
        }
    }
    return labels;
}

TensorF warp_image(const TensorF& image, const std::array<double, 9>& h_ab, float background) {
    const int H = image.h(), W = image.w();
    const auto h_inv = invert_homography(h_ab);
    TensorF out(1, 1, H, W);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            bool ok = true;
            const auto src = warp_homography_point(h_inv, x, y, &ok);
            float v = background;
            if (ok && src[0] >= 0 && src[0] <= W - 1 && src[1] >= 0 && src[1] <= H - 1) {
                const int x0 = std::min(static_cast<int>(src[0]), W - 2);
                const int y0 = std::min(static_cast<int>(src[1]), H - 2);
                const double fx = src[0] - x0, fy = src[1] - y0;
                v = static_cast<float>(
                    (1 - fx) * (1 - fy) * image.at(0, 0, y0, x0) +
                    fx * (1 - fy) * image.at(0, 0, y0, x0 + 1) +
                    (1 - fx) * fy * image.at(0, 0, y0 + 1, x0) +
                    fx * fy * image.at(0, 0, y0 + 1, x0 + 1));
            }
            out.at(0, 0, y, x) = v;
        }
    return out;
}

std::vector<HomographyPair> gen_shapes(uint64_t seed, int count, int W, int H) {
    if (W % 8 != 0 || H % 8 != 0)
        throw std::invalid_argument("gen_shapes: W and H must be multiples of 8");
    std::mt19937_64 rng(seed);
    std::vector<HomographyPair> out;
    out.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        const RenderedScene scene = render_shape_scene(rng, W, H);
        HomographyPair p;
        p.h_ab = sample_homography(rng, W, H);
        p.image_a = scene.image;
        p.image_b = warp_image(scene.image, p.h_ab, scene.background);
        p.labels_a = labels_from_corners(scene.corners, W, H);
        std::vector<std::array<double, 2>> warped;
        for (const auto& c : scene.corners) {
            bool ok = true;
            const auto q = warp_homography_point(p.h_ab, c[0], c[1], &ok);
            if (ok && q[0] >= 0 && q[0] < W && q[1] >= 0 && q[1] < H) warped.push_back(q);
        }
        p.labels_b = labels_from_corners(warped, W, H);
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace kpd
