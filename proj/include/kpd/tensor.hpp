#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace kpd {

// Dense 4-axis array (batch, channels, height, width), row-major.
// Lower-rank data uses size-1 axes.
template <typename T>
struct Tensor {
    std::array<int, 4> shape{1, 1, 1, 1};
    std::vector<T> data;

    Tensor() = default;
    Tensor(int n, int c, int h, int w, T fill = T(0))
        : shape{n, c, h, w}, data(static_cast<size_t>(n) * c * h * w, fill) {
        if (n <= 0 || c <= 0 || h <= 0 || w <= 0)
            throw std::invalid_argument("tensor dims must be positive");
    }

    static Tensor zeros(int n, int c, int h, int w) { return Tensor(n, c, h, w, T(0)); }
    static Tensor full(int n, int c, int h, int w, T v) { return Tensor(n, c, h, w, v); }
    static Tensor scalar(T v) { return Tensor(1, 1, 1, 1, v); }

    static Tensor from_vector(const std::vector<T>& v) {
        Tensor t(1, 1, 1, static_cast<int>(v.size()));
        t.data = v;
        return t;
    }

    int64_t size() const { return static_cast<int64_t>(data.size()); }
    int n() const { return shape[0]; }
    int c() const { return shape[1]; }
    int h() const { return shape[2]; }
    int w() const { return shape[3]; }

    int64_t index(int in, int ic, int iy, int ix) const {
        return ((static_cast<int64_t>(in) * shape[1] + ic) * shape[2] + iy) * shape[3] + ix;
    }
    T& at(int in, int ic, int iy, int ix) { return data[index(in, ic, iy, ix)]; }
    T at(int in, int ic, int iy, int ix) const { return data[index(in, ic, iy, ix)]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    std::string shape_str() const {
        std::ostringstream os;
        os << shape[0] << "x" << shape[1] << "x" << shape[2] << "x" << shape[3];
        return os.str();
    }

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out(shape[0], shape[1], shape[2], shape[3]);
        for (int64_t i = 0; i < size(); ++i) out.data[i] = static_cast<U>(data[i]);
        return out;
    }
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

namespace detail {
inline void write_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}
inline uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw std::runtime_error("tensor stream truncated");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}
}  // namespace detail

// Binary layout: magic "KPT1", rank u32, dims u32 each, dtype u8 (0=f32, 1=f64),
// then the flat little-endian buffer.
template <typename T>
void write_tensor(std::ostream& os, const Tensor<T>& t) {
    static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>);
    os.write("KPT1", 4);
    detail::write_u32(os, 4);
    for (int d : t.shape) detail::write_u32(os, static_cast<uint32_t>(d));
    const uint8_t tag = std::is_same_v<T, float> ? 0 : 1;
    os.put(static_cast<char>(tag));
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(T)));
}

template <typename T>
Tensor<T> read_tensor(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "KPT1", 4) != 0)
        throw std::runtime_error("bad tensor magic, expected KPT1");
    const uint32_t rank = detail::read_u32(is);
    if (rank == 0 || rank > 4) throw std::runtime_error("unsupported tensor rank");
    std::array<int, 4> dims{1, 1, 1, 1};
    for (uint32_t i = 0; i < rank; ++i) {
        // pad leading axes with 1 when rank < 4
        dims[4 - rank + i] = static_cast<int>(detail::read_u32(is));
    }
    const int tag = is.get();
    if (tag != 0 && tag != 1) throw std::runtime_error("unsupported tensor dtype tag");
    Tensor<T> t(dims[0], dims[1], dims[2], dims[3]);
    if ((tag == 0) == std::is_same_v<T, float>) {
        is.read(reinterpret_cast<char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * sizeof(T)));
        if (!is) throw std::runtime_error("tensor stream truncated");
    } else if (tag == 0) {
        std::vector<float> buf(t.data.size());
        is.read(reinterpret_cast<char*>(buf.data()),
                static_cast<std::streamsize>(buf.size() * sizeof(float)));
        if (!is) throw std::runtime_error("tensor stream truncated");
        for (size_t i = 0; i < buf.size(); ++i) t.data[i] = static_cast<T>(buf[i]);
    } else {
        std::vector<double> buf(t.data.size());
        is.read(reinterpret_cast<char*>(buf.data()),
                static_cast<std::streamsize>(buf.size() * sizeof(double)));
        if (!is) throw std::runtime_error("tensor stream truncated");
        for (size_t i = 0; i < buf.size(); ++i) t.data[i] = static_cast<T>(buf[i]);
    }
    return t;
}

}  // namespace kpd
