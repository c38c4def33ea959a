#include "kpd/eval.hpp"

#include <cmath>
#include <random>

namespace kpd {

namespace {

void randomize_descriptors(KeypointSet& kps, uint64_t seed, int dim) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& d : kps.descriptors) {
        d.assign(static_cast<size_t>(dim), 0.f);
        double norm2 = 0;
        for (auto& v : d) {
            v = static_cast<float>(gauss(rng));
            norm2 += static_cast<double>(v) * v;
        }
        const float inv = static_cast<float>(1.0 / std::sqrt(std::max(norm2, 1e-12)));
        for (auto& v : d) v *= inv;
    }
}

std::vector<std::array<double, 2>> as_double_points(const KeypointSet& kps) {
    std::vector<std::array<double, 2>> pts;
    pts.reserve(kps.points.size());
    for (const auto& p : kps.points) pts.push_back({p[0], p[1]});
    return pts;
}

void accumulate(EvalResult& res) {
    double p = 0, r = 0;
    for (const auto& m : res.per_pair) {
        p += m.precision_mean;
        r += m.repeatability_mean;
    }
    const double n = res.per_pair.empty() ? 1.0 : static_cast<double>(res.per_pair.size());
    res.precision = p / n;
    res.repeatability = r / n;
    res.harmonic_mean = f1(res.precision, res.repeatability);
}

}  // namespace

KeypointSet detect_and_describe(const ModelWeights& weights, const TensorF& image,
                                const EvalConfig& cfg) {
    auto [det_raw, desc_raw] = forward(weights, image);
    KeypointSet kps = detect(det_raw, cfg.score_threshold, cfg.nms_radius, cfg.max_points,
                             weights.config.cell);
    kps.descriptors = sample_descriptors(desc_raw, kps.points, weights.config.cell);
    if (cfg.random_descriptors)
        randomize_descriptors(kps, cfg.rng_seed + kps.points.size(),
                              weights.config.desc_dim());
    return kps;
}

EvalResult evaluate_sequence(const ModelWeights& weights, const std::vector<CameraFrame>& frames,
                             const EvalConfig& cfg) {
    if (frames.size() < 2)
        throw std::invalid_argument("evaluate_sequence: need at least 2 frames");
    EvalResult res;
    std::vector<KeypointSet> detections;
    detections.reserve(frames.size());
    for (const auto& f : frames)
        detections.push_back(detect_and_describe(weights, image_to_tensor(f.image), cfg));

    for (size_t i = 0; i + 1 < frames.size(); ++i) {
        const auto& a = detections[i];
        const auto& b = detections[i + 1];
        const auto corr_ab =
            reproject(frames[i], frames[i + 1], as_double_points(a), cfg.occlusion);
        const auto corr_ba =
            reproject(frames[i + 1], frames[i], as_double_points(b), cfg.occlusion);
        res.per_pair.push_back(
            evaluate_pair(a, b, corr_ab, corr_ba, cfg.threshold_px, cfg.mutual));
    }
    accumulate(res);
    return res;
}

EvalResult evaluate_pairs_dataset(const ModelWeights& weights,
                                  const std::vector<HomographyPair>& pairs,
                                  const EvalConfig& cfg) {
    EvalResult res;
    for (const auto& pair : pairs) {
        const int W = pair.image_a.w(), H = pair.image_a.h();
        KeypointSet a = detect_and_describe(weights, pair.image_a, cfg);
        KeypointSet b = detect_and_describe(weights, pair.image_b, cfg);
        const auto corr_ab = warp_homography(pair.h_ab, as_double_points(a), W, H);
        const auto corr_ba =
            warp_homography(invert_homography(pair.h_ab), as_double_points(b), W, H);
        res.per_pair.push_back(
            evaluate_pair(a, b, corr_ab, corr_ba, cfg.threshold_px, cfg.mutual));
    }
    accumulate(res);
    return res;
}

}  // namespace kpd
