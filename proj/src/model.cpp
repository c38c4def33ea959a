#include "kpd/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace kpd {

TensorF score_map(const TensorF& det_raw, int cell) {
    const int nclass = cell * cell + 1;
    if (det_raw.c() != nclass)
        throw std::invalid_argument("score_map expects " + std::to_string(nclass) +
                                    " channels, got " + det_raw.shape_str());
    if (det_raw.n() != 1) throw std::invalid_argument("score_map expects batch 1");
    const int hc = det_raw.h(), wc = det_raw.w();
    TensorF out(1, 1, hc * cell, wc * cell);
    std::vector<float> probs(static_cast<size_t>(nclass));
    for (int cy = 0; cy < hc; ++cy)
        for (int cx = 0; cx < wc; ++cx) {
            float mx = det_raw.at(0, 0, cy, cx);
            for (int k = 1; k < nclass; ++k) mx = std::max(mx, det_raw.at(0, k, cy, cx));
            float sum = 0.f;
            for (int k = 0; k < nclass; ++k) {
                probs[static_cast<size_t>(k)] = std::exp(det_raw.at(0, k, cy, cx) - mx);
                sum += probs[static_cast<size_t>(k)];
            }
            // channel k of cell (cy,cx) -> pixel (cell*cy + k/cell, cell*cx + k%cell)
            for (int k = 0; k < nclass - 1; ++k)
                out.at(0, 0, cell * cy + k / cell, cell * cx + k % cell) =
                    probs[static_cast<size_t>(k)] / sum;
        }
    return out;
}

KeypointSet detect(const TensorF& det_raw, float score_threshold, int nms_radius, int max_points,
                   int cell) {
    const TensorF scores = score_map(det_raw, cell);
    const int H = scores.h(), W = scores.w();

    struct Cand {
        float score;
        int x, y;
    };
    std::vector<Cand> cands;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const float s = scores.at(0, 0, y, x);
            if (s >= score_threshold) cands.push_back({s, x, y});
        }
    // descending score; ties by row-major pixel order for determinism
    std::sort(cands.begin(), cands.end(), [W](const Cand& a, const Cand& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.y * W + a.x < b.y * W + b.x;
    });

    KeypointSet out;
    std::vector<uint8_t> suppressed(static_cast<size_t>(H) * W, 0);
    for (const auto& c : cands) {
        if (suppressed[static_cast<size_t>(c.y) * W + c.x]) continue;
        out.points.push_back({static_cast<float>(c.x), static_cast<float>(c.y)});
        out.scores.push_back(c.score);
        if (static_cast<int>(out.points.size()) >= max_points) break;
        for (int dy = -nms_radius; dy <= nms_radius; ++dy) {
            const int yy = c.y + dy;
            if (yy < 0 || yy >= H) continue;
            for (int dx = -nms_radius; dx <= nms_radius; ++dx) {
                const int xx = c.x + dx;
                if (xx < 0 || xx >= W) continue;
                suppressed[static_cast<size_t>(yy) * W + xx] = 1;
            }
        }
    }
    return out;
}

std::vector<std::vector<float>> sample_descriptors(const TensorF& desc_raw,
                                                   const std::vector<std::array<float, 2>>& points,
                                                   int cell) {
    if (desc_raw.n() != 1) throw std::invalid_argument("sample_descriptors expects batch 1");
    const int D = desc_raw.c(), hc = desc_raw.h(), wc = desc_raw.w();
    std::vector<std::vector<float>> out;
    out.reserve(points.size());
    auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };
    for (const auto& p : points) {
        // pixel center -> descriptor grid coordinates
        const float gx = (p[0] + 0.5f) / static_cast<float>(cell) - 0.5f;
        const float gy = (p[1] + 0.5f) / static_cast<float>(cell) - 0.5f;
        const int x0 = static_cast<int>(std::floor(gx));
        const int y0 = static_cast<int>(std::floor(gy));
        const float fx = gx - static_cast<float>(x0);
        const float fy = gy - static_cast<float>(y0);
        const int xa = clampi(x0, 0, wc - 1), xb = clampi(x0 + 1, 0, wc - 1);
        const int ya = clampi(y0, 0, hc - 1), yb = clampi(y0 + 1, 0, hc - 1);
        std::vector<float> v(static_cast<size_t>(D));
        double norm2 = 0.0;
        for (int d = 0; d < D; ++d) {
            const float val = (1 - fx) * (1 - fy) * desc_raw.at(0, d, ya, xa) +
                              fx * (1 - fy) * desc_raw.at(0, d, ya, xb) +
                              (1 - fx) * fy * desc_raw.at(0, d, yb, xa) +
                              fx * fy * desc_raw.at(0, d, yb, xb);
            v[static_cast<size_t>(d)] = val;
            norm2 += static_cast<double>(val) * val;
        }
        const float inv = norm2 > 0 ? static_cast<float>(1.0 / std::sqrt(norm2)) : 0.f;
        for (auto& x : v) x *= inv;
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace kpd
