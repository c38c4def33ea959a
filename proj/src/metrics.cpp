#include "kpd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kpd {

namespace {

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
    double acc = 0;
    for (size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * b[i];
    return acc;
}

int nearest(const std::vector<std::vector<float>>& from_one,
            const std::vector<std::vector<float>>& pool, const std::vector<float>& query,
            double* best_sim) {
    (void)from_one;
    int best = -1;
    double bs = -2;
    for (size_t j = 0; j < pool.size(); ++j) {
        const double s = cosine(query, pool[j]);
        if (s > bs) {  // strict: first (lowest) index wins ties
            bs = s;
            best = static_cast<int>(j);
        }
    }
    if (best_sim) *best_sim = bs;
    return best;
}

}  // namespace

MatchSet match_descriptors(const std::vector<std::vector<float>>& desc_a,
                           const std::vector<std::vector<float>>& desc_b, bool mutual) {
    MatchSet out;
    out.mutual = mutual;
    if (desc_a.empty() || desc_b.empty()) return out;
    for (size_t i = 0; i < desc_a.size(); ++i) {
        if (desc_a[i].size() != desc_b[0].size())
            throw std::invalid_argument("match_descriptors: descriptor length mismatch");
        double sim = 0;
        const int j = nearest(desc_a, desc_b, desc_a[i], &sim);
        if (mutual) {
            const int back = nearest(desc_b, desc_a, desc_b[static_cast<size_t>(j)], nullptr);
            if (back != static_cast<int>(i)) continue;
        }
        out.pairs.emplace_back(static_cast<int>(i), j, sim);
    }
    return out;
}

PrecisionResult precision(const MatchSet& matches,
                          const std::vector<std::array<float, 2>>& points_b,
                          const std::vector<Correspondence>& correspondences_ab,
                          double threshold_px) {
    PrecisionResult res;
    for (const auto& [ia, ib, sim] : matches.pairs) {
        if (ia < 0 || static_cast<size_t>(ia) >= correspondences_ab.size())
            throw std::invalid_argument("precision: match index without a reprojection");
        const auto& c = correspondences_ab[static_cast<size_t>(ia)];
        if (!c.valid()) {
            ++res.skipped;
            continue;
        }
        const auto& pb = points_b[static_cast<size_t>(ib)];
        const double dx = c.xp - pb[0], dy = c.yp - pb[1];
        if (std::sqrt(dx * dx + dy * dy) <= threshold_px)
            ++res.tp;
        else
            ++res.fp;
    }
    if (res.tp + res.fp == 0) {
        res.degenerate = true;
        res.precision = 0;
    } else {
        res.precision = static_cast<double>(res.tp) / (res.tp + res.fp);
    }
    return res;
}

namespace {

// Fraction of target points covered by reprojected source points, greedy
// one-to-one by ascending distance. Denominator: target points with a valid
// reprojection of their own (the shared-view set).
double directed_repeatability(const std::vector<Correspondence>& src_in_target,
                              const std::vector<std::array<float, 2>>& target_points,
                              const std::vector<Correspondence>& target_validity,
                              double threshold_px, bool* degenerate) {
    int denom = 0;
    std::vector<uint8_t> counted(target_points.size(), 0);
    for (size_t j = 0; j < target_points.size(); ++j)
        if (target_validity[j].valid()) {
            counted[j] = 1;
            ++denom;
        }
    if (denom == 0) {
        if (degenerate) *degenerate = true;
        return 0;
    }
    struct Cand {
        double dist;
        int i, j;
    };
    std::vector<Cand> cands;
    for (size_t i = 0; i < src_in_target.size(); ++i) {
        if (!src_in_target[i].valid()) continue;
        for (size_t j = 0; j < target_points.size(); ++j) {
            if (!counted[j]) continue;
            const double dx = src_in_target[i].xp - target_points[j][0];
            const double dy = src_in_target[i].yp - target_points[j][1];
            const double d = std::sqrt(dx * dx + dy * dy);
            if (d <= threshold_px) cands.push_back({d, static_cast<int>(i), static_cast<int>(j)});
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    std::vector<uint8_t> used_i(src_in_target.size(), 0), used_j(target_points.size(), 0);
    int hits = 0;
    for (const auto& c : cands) {
        if (used_i[static_cast<size_t>(c.i)] || used_j[static_cast<size_t>(c.j)]) continue;
        used_i[static_cast<size_t>(c.i)] = used_j[static_cast<size_t>(c.j)] = 1;
        ++hits;
    }
    return static_cast<double>(hits) / denom;
}

}  // namespace

RepeatabilityResult repeatability(const std::vector<std::array<float, 2>>& points_a,
                                  const std::vector<std::array<float, 2>>& points_b,
                                  const std::vector<Correspondence>& reproject_ab,
                                  const std::vector<Correspondence>& reproject_ba,
                                  double threshold_px) {
    RepeatabilityResult res;
    bool deg_ab = false, deg_ba = false;
    res.r_ab = directed_repeatability(reproject_ab, points_b, reproject_ba, threshold_px, &deg_ab);
    res.r_ba = directed_repeatability(reproject_ba, points_a, reproject_ab, threshold_px, &deg_ba);
    res.degenerate = deg_ab || deg_ba;
    res.mean = (res.r_ab + res.r_ba) / 2.0;
    return res;
}

double f1(double precision, double recall) {
    const double s = precision + recall;
    if (s <= 0) return 0;
    return 2.0 * precision * recall / s;
}

PairMetrics evaluate_pair(const KeypointSet& kps_a, const KeypointSet& kps_b,
                          const std::vector<Correspondence>& reproject_ab,
                          const std::vector<Correspondence>& reproject_ba, double threshold_px,
                          bool mutual) {
    PairMetrics m;
    m.threshold_px = threshold_px;

    const MatchSet ab = match_descriptors(kps_a.descriptors, kps_b.descriptors, mutual);
    const MatchSet ba = match_descriptors(kps_b.descriptors, kps_a.descriptors, mutual);

    const auto p_ab = precision(ab, kps_b.points, reproject_ab, threshold_px);
    const auto p_ba = precision(ba, kps_a.points, reproject_ba, threshold_px);
    m.precision_ab = p_ab.precision;
    m.precision_ba = p_ba.precision;
    m.precision_mean = (m.precision_ab + m.precision_ba) / 2.0;
    m.tp_ab = p_ab.tp;
    m.fp_ab = p_ab.fp;
    m.tp_ba = p_ba.tp;
    m.fp_ba = p_ba.fp;

    const auto rep =
        repeatability(kps_a.points, kps_b.points, reproject_ab, reproject_ba, threshold_px);
    m.repeatability_ab = rep.r_ab;
    m.repeatability_ba = rep.r_ba;
    m.repeatability_mean = rep.mean;

    m.f1_score = f1(m.precision_mean, m.repeatability_mean);
    m.degenerate = p_ab.degenerate || p_ba.degenerate || rep.degenerate;
    return m;
}

}  // namespace kpd
