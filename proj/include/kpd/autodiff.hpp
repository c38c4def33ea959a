#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <utility>
#include <vector>

#include "kpd/tensor.hpp"

namespace kpd {

template <typename T>
struct Node {
    Tensor<T> value;
    Tensor<T> grad;  // allocated lazily, same shape as value
    bool requires_grad = false;

    void ensure_grad() {
        if (grad.data.empty())
            grad = Tensor<T>::zeros(value.shape[0], value.shape[1], value.shape[2], value.shape[3]);
    }
};

template <typename T>
using Var = std::shared_ptr<Node<T>>;

// Tape-based reverse mode over the fixed operation set the model needs.
// Single-threaded within one tape; separate tapes share nothing.
template <typename T>
class Tape {
public:
    Var<T> leaf(Tensor<T> v, bool requires_grad = false) {
        auto n = std::make_shared<Node<T>>();
        n->value = std::move(v);
        n->requires_grad = requires_grad;
        if (requires_grad) n->ensure_grad();
        return n;
    }

    Var<T> constant(Tensor<T> v) { return leaf(std::move(v), false); }

    // Cross-correlation, zero padding. weight (oc, ic, kh, kw).
    Var<T> conv2d(const Var<T>& input, const Var<T>& weight, const Var<T>& bias, int stride,
                  int padding) {
        const auto& x = input->value;
        const auto& w = weight->value;
        if (x.c() != w.c())
            throw std::invalid_argument("conv2d channel mismatch: input " + x.shape_str() +
                                        " vs weight " + w.shape_str());
        if (bias->value.size() != w.n())
            throw std::invalid_argument("conv2d bias size mismatch: weight " + w.shape_str() +
                                        " vs bias " + bias->value.shape_str());
        if (stride < 1 || padding < 0) throw std::invalid_argument("conv2d bad stride/padding");
        const int oh = (x.h() + 2 * padding - w.h()) / stride + 1;
        const int ow = (x.w() + 2 * padding - w.w()) / stride + 1;
        if (oh <= 0 || ow <= 0)
            throw std::invalid_argument("conv2d kernel larger than padded input");
        Tensor<T> y(x.n(), w.n(), oh, ow);
        for (int n = 0; n < x.n(); ++n)
            for (int oc = 0; oc < w.n(); ++oc) {
                const T b = bias->value.data[oc];
                for (int oy = 0; oy < oh; ++oy)
                    for (int ox = 0; ox < ow; ++ox) {
                        T acc = b;
                        for (int ic = 0; ic < x.c(); ++ic)
                            for (int ky = 0; ky < w.h(); ++ky) {
                                const int iy = oy * stride - padding + ky;
                                if (iy < 0 || iy >= x.h()) continue;
                                for (int kx = 0; kx < w.w(); ++kx) {
                                    const int ix = ox * stride - padding + kx;
                                    if (ix < 0 || ix >= x.w()) continue;
                                    acc += x.at(n, ic, iy, ix) * w.at(oc, ic, ky, kx);
                                }
                            }
                        y.at(n, oc, oy, ox) = acc;
                    }
            }
        auto out = make(std::move(y),
                        input->requires_grad || weight->requires_grad || bias->requires_grad);
        if (out->requires_grad) {
            record([input, weight, bias, out, stride, padding] {
                const auto& x = input->value;
                const auto& w = weight->value;
                const auto& gy = out->grad;
                if (input->requires_grad) input->ensure_grad();
                if (weight->requires_grad) weight->ensure_grad();
                if (bias->requires_grad) bias->ensure_grad();
                for (int n = 0; n < x.n(); ++n)
                    for (int oc = 0; oc < w.n(); ++oc)
                        for (int oy = 0; oy < gy.h(); ++oy)
                            for (int ox = 0; ox < gy.w(); ++ox) {
                                const T g = gy.at(n, oc, oy, ox);
                                if (bias->requires_grad) bias->grad.data[oc] += g;
                                for (int ic = 0; ic < x.c(); ++ic)
                                    for (int ky = 0; ky < w.h(); ++ky) {
                                        const int iy = oy * stride - padding + ky;
                                        if (iy < 0 || iy >= x.h()) continue;
                                        for (int kx = 0; kx < w.w(); ++kx) {
                                            const int ix = ox * stride - padding + kx;
                                            if (ix < 0 || ix >= x.w()) continue;
                                            if (input->requires_grad)
                                                input->grad.at(n, ic, iy, ix) +=
                                                    g * w.at(oc, ic, ky, kx);
                                            if (weight->requires_grad)
                                                weight->grad.at(oc, ic, ky, kx) +=
                                                    g * x.at(n, ic, iy, ix);
                                        }
                                    }
                            }
            });
        }
        return out;
    }

    Var<T> relu(const Var<T>& input) {
        Tensor<T> y = input->value;
        for (auto& v : y.data) v = std::max(v, T(0));
        auto out = make(std::move(y), input->requires_grad);
        if (out->requires_grad) {
            record([input, out] {
                input->ensure_grad();
                for (int64_t i = 0; i < out->grad.size(); ++i)
                    if (input->value.data[i] > T(0)) input->grad.data[i] += out->grad.data[i];
            });
        }
        return out;
    }

    // 2x2 window, stride 2. Gradient routes to the argmax, first index wins ties.
    Var<T> maxpool2(const Var<T>& input) {
        const auto& x = input->value;
        if (x.h() % 2 != 0 || x.w() % 2 != 0)
            throw std::invalid_argument("maxpool2 requires even spatial dims, got " +
                                        x.shape_str());
        Tensor<T> y(x.n(), x.c(), x.h() / 2, x.w() / 2);
        auto argmax = std::make_shared<std::vector<int64_t>>(y.data.size());
        for (int n = 0; n < x.n(); ++n)
            for (int c = 0; c < x.c(); ++c)
                for (int oy = 0; oy < y.h(); ++oy)
                    for (int ox = 0; ox < y.w(); ++ox) {
                        int64_t best_i = x.index(n, c, 2 * oy, 2 * ox);
                        T best = x.data[best_i];
                        for (int dy = 0; dy < 2; ++dy)
                            for (int dx = 0; dx < 2; ++dx) {
                                const int64_t i = x.index(n, c, 2 * oy + dy, 2 * ox + dx);
                                if (x.data[i] > best) {
                                    best = x.data[i];
                                    best_i = i;
                                }
                            }
                        y.at(n, c, oy, ox) = best;
                        (*argmax)[y.index(n, c, oy, ox)] = best_i;
                    }
        auto out = make(std::move(y), input->requires_grad);
        if (out->requires_grad) {
            record([input, out, argmax] {
                input->ensure_grad();
                for (size_t i = 0; i < argmax->size(); ++i)
                    input->grad.data[(*argmax)[i]] += out->grad.data[i];
            });
        }
        return out;
    }

    // Softmax across the channel axis, independently per (batch, y, x).
    Var<T> softmax_channels(const Var<T>& input) {
        const auto& x = input->value;
        if (x.c() < 2) throw std::invalid_argument("softmax_channels needs >= 2 channels");
        Tensor<T> y(x.n(), x.c(), x.h(), x.w());
        for (int n = 0; n < x.n(); ++n)
            for (int iy = 0; iy < x.h(); ++iy)
                for (int ix = 0; ix < x.w(); ++ix) {
                    T mx = x.at(n, 0, iy, ix);
                    for (int c = 1; c < x.c(); ++c) mx = std::max(mx, x.at(n, c, iy, ix));
                    T sum = 0;
                    for (int c = 0; c < x.c(); ++c) {
                        const T e = std::exp(x.at(n, c, iy, ix) - mx);
                        y.at(n, c, iy, ix) = e;
                        sum += e;
                    }
                    for (int c = 0; c < x.c(); ++c) y.at(n, c, iy, ix) /= sum;
                }
        auto out = make(std::move(y), input->requires_grad);
        if (out->requires_grad) {
            record([input, out] {
                input->ensure_grad();
                const auto& y = out->value;
                const auto& gy = out->grad;
                for (int n = 0; n < y.n(); ++n)
                    for (int iy = 0; iy < y.h(); ++iy)
                        for (int ix = 0; ix < y.w(); ++ix) {
                            T dot = 0;
                            for (int c = 0; c < y.c(); ++c)
                                dot += gy.at(n, c, iy, ix) * y.at(n, c, iy, ix);
                            for (int c = 0; c < y.c(); ++c)
                                input->grad.at(n, c, iy, ix) +=
                                    y.at(n, c, iy, ix) * (gy.at(n, c, iy, ix) - dot);
                        }
            });
        }
        return out;
    }

    // Mean over all elements of (a-b)^2; scalar output.
    Var<T> mse(const Var<T>& a, const Var<T>& b) {
        if (!a->value.same_shape(b->value))
            throw std::invalid_argument("mse shape mismatch: " + a->value.shape_str() + " vs " +
                                        b->value.shape_str());
        T acc = 0;
        for (int64_t i = 0; i < a->value.size(); ++i) {
            const T d = a->value.data[i] - b->value.data[i];
            acc += d * d;
        }
        acc /= static_cast<T>(a->value.size());
        auto out = make(Tensor<T>::scalar(acc), a->requires_grad || b->requires_grad);
        if (out->requires_grad) {
            record([a, b, out] {
                const T g = out->grad.data[0] * T(2) / static_cast<T>(a->value.size());
                if (a->requires_grad) a->ensure_grad();
                if (b->requires_grad) b->ensure_grad();
                for (int64_t i = 0; i < a->value.size(); ++i) {
                    const T d = a->value.data[i] - b->value.data[i];
                    if (a->requires_grad) a->grad.data[i] += g * d;
                    if (b->requires_grad) b->grad.data[i] -= g * d;
                }
            });
        }
        return out;
    }

    // Per-channel Sobel, replicate padding. Output has 2*C channels:
    // channel 2c = horizontal response, 2c+1 = vertical.
    Var<T> sobel(const Var<T>& input) {
        static const int KX[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
        const auto& x = input->value;
        Tensor<T> y(x.n(), 2 * x.c(), x.h(), x.w());
        auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };
        for (int n = 0; n < x.n(); ++n)
            for (int c = 0; c < x.c(); ++c)
                for (int iy = 0; iy < x.h(); ++iy)
                    for (int ix = 0; ix < x.w(); ++ix) {
                        T gx = 0, gv = 0;
                        for (int ky = 0; ky < 3; ++ky)
                            for (int kx = 0; kx < 3; ++kx) {
                                const int sy = clampi(iy + ky - 1, 0, x.h() - 1);
                                const int sx = clampi(ix + kx - 1, 0, x.w() - 1);
                                const T v = x.at(n, c, sy, sx);
                                gx += static_cast<T>(KX[ky][kx]) * v;
                                gv += static_cast<T>(KX[kx][ky]) * v;  // transpose
                            }
                        y.at(n, 2 * c, iy, ix) = gx;
                        y.at(n, 2 * c + 1, iy, ix) = gv;
                    }
        auto out = make(std::move(y), input->requires_grad);
        if (out->requires_grad) {
            record([input, out] {
                input->ensure_grad();
                const auto& x = input->value;
                const auto& gy = out->grad;
                auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };
                for (int n = 0; n < x.n(); ++n)
                    for (int c = 0; c < x.c(); ++c)
                        for (int iy = 0; iy < x.h(); ++iy)
                            for (int ix = 0; ix < x.w(); ++ix) {
                                const T gh = gy.at(n, 2 * c, iy, ix);
                                const T gvv = gy.at(n, 2 * c + 1, iy, ix);
                                for (int ky = 0; ky < 3; ++ky)
                                    for (int kx = 0; kx < 3; ++kx) {
                                        const int sy = clampi(iy + ky - 1, 0, x.h() - 1);
                                        const int sx = clampi(ix + kx - 1, 0, x.w() - 1);
                                        input->grad.at(n, c, sy, sx) +=
                                            static_cast<T>(KX[ky][kx]) * gh +
                                            static_cast<T>(KX[kx][ky]) * gvv;
                                    }
                            }
            });
        }
        return out;
    }

    Var<T> add(const Var<T>& a, const Var<T>& b) {
        if (!a->value.same_shape(b->value))
            throw std::invalid_argument("add shape mismatch: " + a->value.shape_str() + " vs " +
                                        b->value.shape_str());
        Tensor<T> y = a->value;
        for (int64_t i = 0; i < y.size(); ++i) y.data[i] += b->value.data[i];
        auto out = make(std::move(y), a->requires_grad || b->requires_grad);
        if (out->requires_grad) {
            record([a, b, out] {
                if (a->requires_grad) {
                    a->ensure_grad();
                    for (int64_t i = 0; i < out->grad.size(); ++i)
                        a->grad.data[i] += out->grad.data[i];
                }
                if (b->requires_grad) {
                    b->ensure_grad();
                    for (int64_t i = 0; i < out->grad.size(); ++i)
                        b->grad.data[i] += out->grad.data[i];
                }
            });
        }
        return out;
    }

    Var<T> scale(const Var<T>& a, T s) {
        Tensor<T> y = a->value;
        for (auto& v : y.data) v *= s;
        auto out = make(std::move(y), a->requires_grad);
        if (out->requires_grad) {
            record([a, out, s] {
                a->ensure_grad();
                for (int64_t i = 0; i < out->grad.size(); ++i)
                    a->grad.data[i] += s * out->grad.data[i];
            });
        }
        return out;
    }

    Var<T> sum(const Var<T>& a) {
        T acc = 0;
        for (const auto& v : a->value.data) acc += v;
        auto out = make(Tensor<T>::scalar(acc), a->requires_grad);
        if (out->requires_grad) {
            record([a, out] {
                a->ensure_grad();
                const T g = out->grad.data[0];
                for (auto& v : a->grad.data) v += g;
            });
        }
        return out;
    }

    Var<T> mul(const Var<T>& a, const Var<T>& b) {
        if (!a->value.same_shape(b->value))
            throw std::invalid_argument("mul shape mismatch");
        Tensor<T> y = a->value;
        for (int64_t i = 0; i < y.size(); ++i) y.data[i] *= b->value.data[i];
        auto out = make(std::move(y), a->requires_grad || b->requires_grad);
        if (out->requires_grad) {
            record([a, b, out] {
                if (a->requires_grad) {
                    a->ensure_grad();
                    for (int64_t i = 0; i < out->grad.size(); ++i)
                        a->grad.data[i] += b->value.data[i] * out->grad.data[i];
                }
                if (b->requires_grad) {
                    b->ensure_grad();
                    for (int64_t i = 0; i < out->grad.size(); ++i)
                        b->grad.data[i] += a->value.data[i] * out->grad.data[i];
                }
            });
        }
        return out;
    }

    // Mean cross-entropy between softmax over channels and integer labels,
    // one label per (batch, y, x) position. Labels live in {0 .. C-1}.
    Var<T> cross_entropy_cells(const Var<T>& logits, const std::vector<int>& labels) {
        const auto& x = logits->value;
        const int64_t cells = static_cast<int64_t>(x.n()) * x.h() * x.w();
        if (static_cast<int64_t>(labels.size()) != cells)
            throw std::invalid_argument("cross_entropy_cells: label count mismatch");
        for (int l : labels)
            if (l < 0 || l >= x.c())
                throw std::invalid_argument("cross_entropy_cells: label out of range: " +
                                            std::to_string(l));
        auto probs = std::make_shared<Tensor<T>>(x.n(), x.c(), x.h(), x.w());
        T loss = 0;
        int64_t cell = 0;
        for (int n = 0; n < x.n(); ++n)
            for (int iy = 0; iy < x.h(); ++iy)
                for (int ix = 0; ix < x.w(); ++ix, ++cell) {
                    T mx = x.at(n, 0, iy, ix);
                    for (int c = 1; c < x.c(); ++c) mx = std::max(mx, x.at(n, c, iy, ix));
                    T sum = 0;
                    for (int c = 0; c < x.c(); ++c) {
                        const T e = std::exp(x.at(n, c, iy, ix) - mx);
                        probs->at(n, c, iy, ix) = e;
                        sum += e;
                    }
                    for (int c = 0; c < x.c(); ++c) probs->at(n, c, iy, ix) /= sum;
                    loss -= std::log(std::max(probs->at(n, labels[cell], iy, ix),
                                              std::numeric_limits<T>::min()));
                }
        loss /= static_cast<T>(cells);
        auto out = make(Tensor<T>::scalar(loss), logits->requires_grad);
        if (out->requires_grad) {
            auto lab = std::make_shared<std::vector<int>>(labels);
            record([logits, out, probs, lab, cells] {
                logits->ensure_grad();
                const T g = out->grad.data[0] / static_cast<T>(cells);
                const auto& p = *probs;
                int64_t cell = 0;
                for (int n = 0; n < p.n(); ++n)
                    for (int iy = 0; iy < p.h(); ++iy)
                        for (int ix = 0; ix < p.w(); ++ix, ++cell)
                            for (int c = 0; c < p.c(); ++c) {
                                const T onehot = (c == (*lab)[cell]) ? T(1) : T(0);
                                logits->grad.at(n, c, iy, ix) +=
                                    g * (p.at(n, c, iy, ix) - onehot);
                            }
            });
        }
        return out;
    }

    void backward(const Var<T>& loss) {
        if (loss->value.size() != 1)
            throw std::invalid_argument("backward expects a scalar loss");
        loss->ensure_grad();
        loss->grad.data[0] = T(1);
        for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
    }

    size_t recorded_ops() const { return ops_.size(); }

    // Exposed for fused losses that supply their own backward rule.
    Var<T> make(Tensor<T> value, bool requires_grad) {
        auto n = std::make_shared<Node<T>>();
        n->value = std::move(value);
        n->requires_grad = requires_grad;
        if (requires_grad) n->ensure_grad();
        return n;
    }
    void record(std::function<void()> op) { ops_.push_back(std::move(op)); }

private:
    std::vector<std::function<void()>> ops_;
};

}  // namespace kpd
