#pragma once

#include <array>
#include <tuple>
#include <vector>

#include "kpd/geometry.hpp"
#include "kpd/model.hpp"

namespace kpd {

struct MatchSet {
    // (index_a, index_b, cosine similarity); index_a unique, index_b unique when mutual
    std::vector<std::tuple<int, int, double>> pairs;
    bool mutual = false;
};

// Nearest neighbor by cosine similarity; mutual keeps (i, j) only when i is
// also j's nearest neighbor. Ties break toward the lowest index.
MatchSet match_descriptors(const std::vector<std::vector<float>>& desc_a,
                           const std::vector<std::vector<float>>& desc_b, bool mutual);

struct PrecisionResult {
    int tp = 0, fp = 0;
    int skipped = 0;  // matches whose source point had no valid reprojection
    double precision = 0;
    bool degenerate = false;  // 0/0, reported as 0
};

// A match is correct when the matched target point lies within threshold_px
// of the reprojected source point. correspondences[i] belongs to point i of a.
PrecisionResult precision(const MatchSet& matches,
                          const std::vector<std::array<float, 2>>& points_b,
                          const std::vector<Correspondence>& correspondences_ab,
                          double threshold_px);

struct RepeatabilityResult {
    double r_ab = 0, r_ba = 0, mean = 0;
    bool degenerate = false;
};

// Fraction of points of one image reproduced in the other under the
// ground-truth mapping; greedy one-to-one assignment by ascending distance.
// reproject_ab maps points_a into image b and reproject_ba the reverse.
RepeatabilityResult repeatability(const std::vector<std::array<float, 2>>& points_a,
                                  const std::vector<std::array<float, 2>>& points_b,
                                  const std::vector<Correspondence>& reproject_ab,
                                  const std::vector<Correspondence>& reproject_ba,
                                  double threshold_px);

// Harmonic mean; 0 when p + r = 0.
double f1(double precision, double recall);

struct PairMetrics {
    double precision_ab = 0, precision_ba = 0, precision_mean = 0;
    double repeatability_ab = 0, repeatability_ba = 0, repeatability_mean = 0;
    double f1_score = 0;
    int tp_ab = 0, fp_ab = 0, tp_ba = 0, fp_ba = 0;
    double threshold_px = 3.0;
    bool degenerate = false;
};

// Full per-pair evaluation: both match directions, symmetric precision and
// repeatability means, F1 of the two means.
PairMetrics evaluate_pair(const KeypointSet& kps_a, const KeypointSet& kps_b,
                          const std::vector<Correspondence>& reproject_ab,
                          const std::vector<Correspondence>& reproject_ba, double threshold_px,
                          bool mutual);

}  // namespace kpd
