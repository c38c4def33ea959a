#pragma once

#include <cstdint>
#include <vector>

#include "kpd/dataset.hpp"
#include "kpd/metrics.hpp"
#include "kpd/model.hpp"

namespace kpd {

struct EvalConfig {
    float score_threshold = 0.015f;
    int nms_radius = 4;
    int max_points = 500;
    double threshold_px = 3.0;
    bool mutual = true;
    bool occlusion = true;
    // keep detections but replace descriptors with seeded random unit vectors
    bool random_descriptors = false;
    uint64_t rng_seed = 0;
};

struct EvalResult {
    std::vector<PairMetrics> per_pair;
    double precision = 0, repeatability = 0, harmonic_mean = 0;
};

KeypointSet detect_and_describe(const ModelWeights& weights, const TensorF& image,
                                const EvalConfig& cfg);

// Depth/pose reprojection protocol over consecutive frames of a sequence.
EvalResult evaluate_sequence(const ModelWeights& weights, const std::vector<CameraFrame>& frames,
                             const EvalConfig& cfg);

// Homography-pair protocol: ground truth from h_ab instead of depth.
EvalResult evaluate_pairs_dataset(const ModelWeights& weights,
                                  const std::vector<HomographyPair>& pairs,
                                  const EvalConfig& cfg);

}  // namespace kpd
