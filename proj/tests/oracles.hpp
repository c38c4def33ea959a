#pragma once

// Brute-force reference implementations, kept independent of the library's
// forward/backward code paths.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "kpd/tensor.hpp"

namespace oracle {

template <typename T>
kpd::Tensor<T> conv2d(const kpd::Tensor<T>& x, const kpd::Tensor<T>& w,
                      const std::vector<T>& bias, int stride, int pad) {
    const int oh = (x.h() + 2 * pad - w.h()) / stride + 1;
    const int ow = (x.w() + 2 * pad - w.w()) / stride + 1;
    kpd::Tensor<T> y(x.n(), w.n(), oh, ow);
    for (int n = 0; n < x.n(); ++n)
        for (int oc = 0; oc < w.n(); ++oc)
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    double acc = bias[static_cast<size_t>(oc)];
                    for (int ic = 0; ic < x.c(); ++ic)
                        for (int ky = 0; ky < w.h(); ++ky)
                            for (int kx = 0; kx < w.w(); ++kx) {
                                const int iy = oy * stride - pad + ky;
                                const int ix = ox * stride - pad + kx;
                                if (iy < 0 || iy >= x.h() || ix < 0 || ix >= x.w()) continue;
                                acc += static_cast<double>(x.at(n, ic, iy, ix)) *
                                       w.at(oc, ic, ky, kx);
                            }
                    y.at(n, oc, oy, ox) = static_cast<T>(acc);
                }
    return y;
}

template <typename T>
kpd::Tensor<T> maxpool2(const kpd::Tensor<T>& x) {
    kpd::Tensor<T> y(x.n(), x.c(), x.h() / 2, x.w() / 2);
    for (int n = 0; n < x.n(); ++n)
        for (int c = 0; c < x.c(); ++c)
            for (int oy = 0; oy < y.h(); ++oy)
                for (int ox = 0; ox < y.w(); ++ox)
                    y.at(n, c, oy, ox) = std::max(
                        std::max(x.at(n, c, 2 * oy, 2 * ox), x.at(n, c, 2 * oy, 2 * ox + 1)),
                        std::max(x.at(n, c, 2 * oy + 1, 2 * ox), x.at(n, c, 2 * oy + 1, 2 * ox + 1)));
    return y;
}

template <typename T>
double mse(const kpd::Tensor<T>& a, const kpd::Tensor<T>& b) {
    double acc = 0;
    for (int64_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - b.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

template <typename T>
kpd::Tensor<T> sobel(const kpd::Tensor<T>& x) {
    const int kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
    const int ky[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
    kpd::Tensor<T> y(x.n(), 2 * x.c(), x.h(), x.w());
    for (int n = 0; n < x.n(); ++n)
        for (int c = 0; c < x.c(); ++c)
            for (int iy = 0; iy < x.h(); ++iy)
                for (int ix = 0; ix < x.w(); ++ix) {
                    double gx = 0, gy = 0;
                    for (int a = 0; a < 3; ++a)
                        for (int b = 0; b < 3; ++b) {
                            const int sy = std::clamp(iy + a - 1, 0, x.h() - 1);
                            const int sx = std::clamp(ix + b - 1, 0, x.w() - 1);
                            gx += kx[a][b] * static_cast<double>(x.at(n, c, sy, sx));
                            gy += ky[a][b] * static_cast<double>(x.at(n, c, sy, sx));
                        }
                    y.at(n, 2 * c, iy, ix) = static_cast<T>(gx);
                    y.at(n, 2 * c + 1, iy, ix) = static_cast<T>(gy);
                }
    return y;
}

// greedy NMS over a score map: sort all pixels, scan, suppress
struct NmsPoint {
    int x, y;
    float score;
};
inline std::vector<NmsPoint> nms(const kpd::TensorF& scores, float threshold, int radius,
                                 int max_points) {
    const int H = scores.h(), W = scores.w();
    std::vector<NmsPoint> all;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            if (scores.at(0, 0, y, x) >= threshold) all.push_back({x, y, scores.at(0, 0, y, x)});
    std::sort(all.begin(), all.end(), [W](const NmsPoint& a, const NmsPoint& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.y * W + a.x < b.y * W + b.x;
    });
    std::vector<NmsPoint> kept;
    for (const auto& p : all) {
        bool ok = true;
        for (const auto& k : kept)
            if (std::abs(k.x - p.x) <= radius && std::abs(k.y - p.y) <= radius) {
                ok = false;
                break;
            }
        if (ok) {
            kept.push_back(p);
            if (static_cast<int>(kept.size()) >= max_points) break;
        }
    }
    return kept;
}

template <typename T, typename Rng>
kpd::Tensor<T> random_tensor(Rng& rng, int n, int c, int h, int w, double lo = -1, double hi = 1) {
    std::uniform_real_distribution<double> dist(lo, hi);
    kpd::Tensor<T> t(n, c, h, w);
    for (auto& v : t.data) v = static_cast<T>(dist(rng));
    return t;
}

}  // namespace oracle
