#pragma once

#include <string>

#include "kpd/model.hpp"

namespace kpd {

// Checkpoint file: u64 little-endian manifest length, JSON manifest (config,
// layer names, shapes, dtype, byte offsets), then concatenated tensor blobs
// in the KPT1 serialization format.
void save_weights(const std::string& path, const ModelWeights& weights);
ModelWeights load_weights(const std::string& path);

}  // namespace kpd
