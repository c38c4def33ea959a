#include "kpd/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace kpd {

using nlohmann::json;

namespace {

json config_to_json(const ModelConfig& c) {
    return json{{"cell", c.cell},
                {"width_multiplier", c.width_multiplier},
                {"base_channels", c.base_channels},
                {"head_channels", c.head_channels},
                {"descriptor_dim", c.descriptor_dim},
                {"descriptor_dim_override", c.descriptor_dim_override}};
}

ModelConfig config_from_json(const json& j) {
    ModelConfig c;
    c.cell = j.at("cell").get<int>();
    c.width_multiplier = j.at("width_multiplier").get<double>();
    auto bc = j.at("base_channels").get<std::vector<int>>();
    if (bc.size() != 4) throw std::runtime_error("checkpoint: base_channels must have 4 entries");
    std::copy(bc.begin(), bc.end(), c.base_channels.begin());
    c.head_channels = j.at("head_channels").get<int>();
    c.descriptor_dim = j.at("descriptor_dim").get<int>();
    c.descriptor_dim_override = j.value("descriptor_dim_override", 0);
    return c;
}

void write_u64(std::ostream& os, uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

uint64_t read_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw std::runtime_error("checkpoint truncated");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}

}  // namespace

void save_weights(const std::string& path, const ModelWeights& weights) {
    // serialize blobs first so offsets are known
    std::ostringstream blobs;
    json layers = json::array();
    for (const auto& [name, t] : weights.params) {
        const auto offset = static_cast<uint64_t>(blobs.tellp());
        write_tensor(blobs, t);
        layers.push_back(json{{"name", name},
                              {"shape", t.shape},
                              {"dtype", "f32"},
                              {"offset", offset}});
    }
    json manifest{{"format", "kpd-checkpoint-v1"},
                  {"config", config_to_json(weights.config)},
                  {"layers", layers}};
    const std::string mtext = manifest.dump();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write checkpoint: " + path);
    write_u64(os, mtext.size());
    os.write(mtext.data(), static_cast<std::streamsize>(mtext.size()));
    const std::string blob = blobs.str();
    os.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

ModelWeights load_weights(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
    const uint64_t mlen = read_u64(is);
    std::string mtext(mlen, '\0');
    is.read(mtext.data(), static_cast<std::streamsize>(mlen));
    if (!is) throw std::runtime_error("checkpoint truncated: " + path);
    const json manifest = json::parse(mtext);
    if (manifest.value("format", "") != "kpd-checkpoint-v1")
        throw std::runtime_error("unknown checkpoint format in " + path);

    ModelWeights w;
    w.config = config_from_json(manifest.at("config"));
    const auto blob_start = is.tellg();
    for (const auto& layer : manifest.at("layers")) {
        is.seekg(blob_start + static_cast<std::streamoff>(layer.at("offset").get<uint64_t>()));
        TensorF t = read_tensor<float>(is);
        const auto shape = layer.at("shape").get<std::array<int, 4>>();
        if (t.shape != shape)
            throw std::runtime_error("checkpoint layer " + layer.at("name").get<std::string>() +
                                     " shape mismatch");
        w.params.emplace_back(layer.at("name").get<std::string>(), std::move(t));
    }

    // shapes must agree with the stored config
    const auto specs = layer_specs(w.config);
    if (w.params.size() != specs.size() * 2)
        throw std::runtime_error("checkpoint layer count inconsistent with config");
    for (size_t i = 0; i < specs.size(); ++i) {
        const auto& wt = w.params[2 * i].second;
        if (wt.n() != specs[i].out_ch || wt.c() != specs[i].in_ch || wt.h() != specs[i].ksize)
            throw std::runtime_error("checkpoint layer " + specs[i].name +
                                     " inconsistent with config");
    }
    return w;
}

}  // namespace kpd
