#pragma once

// Forward + reverse rules for every operation the network, heads and losses
// need. Each op computes eagerly and, when a tape is active and some input
// requires grad, records a closure that scatters output gradients back into
// its inputs. Broadcasting is scalar-with-tensor only; anything else is a
// shape error.

#include <algorithm>
#include <cmath>
#include <limits>

#include "poselab/ad/tensor.hpp"

namespace poselab::ad {

namespace detail {

inline bool should_record(const Tensor& out) {
    return Tape::active() != nullptr && out.requires_grad();
}

template <typename Fn>
inline void record_op(Tensor& out, Fn&& fn) {
    if (should_record(out)) {
        Tape* t = Tape::active();
        out.node()->tape = t;
        out.node()->tape_generation = t->generation();
        t->record(out.node_ptr(), std::forward<Fn>(fn));
    }
}

}  // namespace detail

// ---- elementwise: binary -------------------------------------------------

namespace detail {

enum class BinKind { add, sub, mul };

inline Tensor binary_op(BinKind kind, const Tensor& a, const Tensor& b,
                        const char* name) {
    const bool a_scalar = a.is_scalar();
    const bool b_scalar = b.is_scalar();
    if (!a_scalar && !b_scalar && a.shape() != b.shape())
        throw std::invalid_argument(std::string(name) + ": shape mismatch " +
                                    shape_str(a.shape()) + " vs " +
                                    shape_str(b.shape()));
    const Shape& out_shape = a_scalar ? b.shape() : a.shape();
    const std::size_t n = shape_numel(out_shape);

    std::vector<double> v(n);
    const auto& av = a.data();
    const auto& bv = b.data();
    for (std::size_t i = 0; i < n; ++i) {
        const double x = av[a_scalar ? 0 : i];
        const double y = bv[b_scalar ? 0 : i];
        switch (kind) {
            case BinKind::add: v[i] = x + y; break;
            case BinKind::sub: v[i] = x - y; break;
            case BinKind::mul: v[i] = x * y; break;
        }
    }
    Tensor out(out_shape, std::move(v), a.requires_grad() || b.requires_grad());
    record_op(out, [kind, an = a.node_ptr(), bn = b.node_ptr(),
                    on = out.node_ptr(), a_scalar, b_scalar, n] {
        const auto& g = on->grad;
        if (an->requires_grad) {
            ensure_grad(an.get());
            for (std::size_t i = 0; i < n; ++i) {
                double d = g[i];
                if (kind == BinKind::mul) d *= bn->value[b_scalar ? 0 : i];
                an->grad[a_scalar ? 0 : i] += d;
            }
        }
        if (bn->requires_grad) {
            ensure_grad(bn.get());
            for (std::size_t i = 0; i < n; ++i) {
                double d = g[i];
                switch (kind) {
                    case BinKind::add: break;
                    case BinKind::sub: d = -d; break;
                    case BinKind::mul: d *= an->value[a_scalar ? 0 : i]; break;
                }
                bn->grad[b_scalar ? 0 : i] += d;
            }
        }
    });
    return out;
}

}  // namespace detail

inline Tensor add(const Tensor& a, const Tensor& b) {
    return detail::binary_op(detail::BinKind::add, a, b, "add");
}
inline Tensor sub(const Tensor& a, const Tensor& b) {
    return detail::binary_op(detail::BinKind::sub, a, b, "sub");
}
inline Tensor mul(const Tensor& a, const Tensor& b) {
    return detail::binary_op(detail::BinKind::mul, a, b, "mul");
}

// ---- elementwise: unary ----------------------------------------------------

namespace detail {

// dy/dx expressed in terms of input x and output y, so each activation states
// its own rule once.
template <typename FwdFn, typename BwdFn>
inline Tensor unary_op(const Tensor& a, FwdFn fwd, BwdFn dydx) {
    const std::size_t n = a.numel();
    std::vector<double> v(n);
    const auto& av = a.data();
    for (std::size_t i = 0; i < n; ++i) v[i] = fwd(av[i]);
    Tensor out(a.shape(), std::move(v), a.requires_grad());
    record_op(out, [an = a.node_ptr(), on = out.node_ptr(), dydx, n] {
        if (!an->requires_grad) return;
        ensure_grad(an.get());
        for (std::size_t i = 0; i < n; ++i)
            an->grad[i] += on->grad[i] * dydx(an->value[i], on->value[i]);
    });
    return out;
}

}  // namespace detail

inline Tensor relu(const Tensor& a) {
    return detail::unary_op(
        a, [](double x) { return x > 0.0 ? x : 0.0; },
        [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

inline Tensor sigmoid(const Tensor& a) {
    return detail::unary_op(
        a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
        [](double, double y) { return y * (1.0 - y); });
}

inline Tensor tanh(const Tensor& a) {
    return detail::unary_op(
        a, [](double x) { return std::tanh(x); },
        [](double, double y) { return 1.0 - y * y; });
}

inline Tensor exp(const Tensor& a) {
    return detail::unary_op(
        a, [](double x) { return std::exp(x); },
        [](double, double y) { return y; });
}

// Multiply by a plain constant.
inline Tensor scale(const Tensor& a, double c) {
    return detail::unary_op(
        a, [c](double x) { return c * x; },
        [c](double, double) { return c; });
}

// ---- matmul ----------------------------------------------------------------

// A[MxK] * B[KxN] -> [MxN]; a 1-D right operand [K] is treated as a column
// and yields a 1-D result [M].
inline Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.shape().size() != 2)
        throw std::invalid_argument("matmul: left operand must be 2-D, got " +
                                    shape_str(a.shape()));
    const bool vec = b.shape().size() == 1;
    if (!vec && b.shape().size() != 2)
        throw std::invalid_argument("matmul: right operand must be 1-D or 2-D, got " +
                                    shape_str(b.shape()));
    const int m = a.shape()[0];
    const int k = a.shape()[1];
    const int k2 = b.shape()[0];
    const int n = vec ? 1 : b.shape()[1];
    if (k != k2)
        throw std::invalid_argument("matmul: inner dimensions disagree, " +
                                    shape_str(a.shape()) + " vs " +
                                    shape_str(b.shape()));

    std::vector<double> v(static_cast<std::size_t>(m) * n, 0.0);
    const auto& av = a.data();
    const auto& bv = b.data();
    for (int i = 0; i < m; ++i)
        for (int p = 0; p < k; ++p) {
            const double aip = av[static_cast<std::size_t>(i) * k + p];
            if (aip == 0.0) continue;
            for (int j = 0; j < n; ++j)
                v[static_cast<std::size_t>(i) * n + j] +=
                    aip * bv[static_cast<std::size_t>(p) * n + j];
        }

    Shape out_shape = vec ? Shape{m} : Shape{m, n};
    Tensor out(std::move(out_shape), std::move(v),
               a.requires_grad() || b.requires_grad());
    detail::record_op(out, [an = a.node_ptr(), bn = b.node_ptr(),
                            on = out.node_ptr(), m, k, n] {
        const auto& g = on->grad;
        if (an->requires_grad) {
            ensure_grad(an.get());
            // dA = G * B^T
            for (int i = 0; i < m; ++i)
                for (int p = 0; p < k; ++p) {
                    double acc = 0.0;
                    for (int j = 0; j < n; ++j)
                        acc += g[static_cast<std::size_t>(i) * n + j] *
                               bn->value[static_cast<std::size_t>(p) * n + j];
                    an->grad[static_cast<std::size_t>(i) * k + p] += acc;
                }
        }
        if (bn->requires_grad) {
            ensure_grad(bn.get());
            // dB = A^T * G
            for (int p = 0; p < k; ++p)
                for (int j = 0; j < n; ++j) {
                    double acc = 0.0;
                    for (int i = 0; i < m; ++i)
                        acc += an->value[static_cast<std::size_t>(i) * k + p] *
                               g[static_cast<std::size_t>(i) * n + j];
                    bn->grad[static_cast<std::size_t>(p) * n + j] += acc;
                }
        }
    });
    return out;
}

// ---- conv2d ----------------------------------------------------------------

// input [Cin x H x W], kernel [Cout x Cin x k x k], optional bias [Cout].
// Output spatial size floor((H + 2p - k)/stride) + 1.
inline Tensor conv2d(const Tensor& input, const Tensor& kernel,
                     const Tensor& bias, int stride, int padding) {
    if (input.shape().size() != 3)
        throw std::invalid_argument("conv2d: input must be CxHxW, got " +
                                    shape_str(input.shape()));
    if (kernel.shape().size() != 4 || kernel.shape()[2] != kernel.shape()[3])
        throw std::invalid_argument("conv2d: kernel must be CoutxCinxkxk, got " +
                                    shape_str(kernel.shape()));
    if (stride < 1) throw std::invalid_argument("conv2d: stride must be >= 1");
    if (padding < 0) throw std::invalid_argument("conv2d: negative padding");
    const int cin = input.shape()[0];
    const int h = input.shape()[1];
    const int w = input.shape()[2];
    const int cout = kernel.shape()[0];
    const int k = kernel.shape()[2];
    if (kernel.shape()[1] != cin)
        throw std::invalid_argument("conv2d: kernel channels " +
                                    shape_str(kernel.shape()) +
                                    " do not match input " +
                                    shape_str(input.shape()));
    if (k > h + 2 * padding || k > w + 2 * padding)
        throw std::invalid_argument(
            "conv2d: kernel size " + std::to_string(k) +
            " exceeds padded input " + std::to_string(h + 2 * padding) + "x" +
            std::to_string(w + 2 * padding));
    if (bias.defined() && bias.shape() != Shape{cout})
        throw std::invalid_argument("conv2d: bias must be [Cout], got " +
                                    shape_str(bias.shape()));

    const int oh = (h + 2 * padding - k) / stride + 1;
    const int ow = (w + 2 * padding - k) / stride + 1;

    std::vector<double> v(static_cast<std::size_t>(cout) * oh * ow, 0.0);
    const auto& in = input.data();
    const auto& ker = kernel.data();
    for (int co = 0; co < cout; ++co) {
        const double b0 = bias.defined() ? bias.data()[co] : 0.0;
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                double acc = b0;
                for (int ci = 0; ci < cin; ++ci)
                    for (int ky = 0; ky < k; ++ky) {
                        const int iy = oy * stride - padding + ky;
                        if (iy < 0 || iy >= h) continue;
                        const std::size_t in_row =
                            (static_cast<std::size_t>(ci) * h + iy) * w;
                        const std::size_t ker_row =
                            ((static_cast<std::size_t>(co) * cin + ci) * k + ky) * k;
                        for (int kx = 0; kx < k; ++kx) {
                            const int ix = ox * stride - padding + kx;
                            if (ix < 0 || ix >= w) continue;
                            acc += in[in_row + ix] * ker[ker_row + kx];
                        }
                    }
                v[(static_cast<std::size_t>(co) * oh + oy) * ow + ox] = acc;
            }
    }

    bool rg = input.requires_grad() || kernel.requires_grad() ||
              (bias.defined() && bias.requires_grad());
    Tensor out({cout, oh, ow}, std::move(v), rg);
    detail::record_op(out, [in_n = input.node_ptr(), ker_n = kernel.node_ptr(),
                            b_n = bias.defined() ? bias.node_ptr() : nullptr,
                            on = out.node_ptr(), cin, h, w, cout, k, stride,
                            padding, oh, ow] {
        const auto& g = on->grad;
        const bool di = in_n->requires_grad;
        const bool dk = ker_n->requires_grad;
        const bool db = b_n && b_n->requires_grad;
        if (di) ensure_grad(in_n.get());
        if (dk) ensure_grad(ker_n.get());
        if (db) ensure_grad(b_n.get());
        for (int co = 0; co < cout; ++co)
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    const double go =
                        g[(static_cast<std::size_t>(co) * oh + oy) * ow + ox];
                    if (go == 0.0) continue;
                    if (db) b_n->grad[co] += go;
                    if (!di && !dk) continue;
                    for (int ci = 0; ci < cin; ++ci)
                        for (int ky = 0; ky < k; ++ky) {
                            const int iy = oy * stride - padding + ky;
                            if (iy < 0 || iy >= h) continue;
                            const std::size_t in_row =
                                (static_cast<std::size_t>(ci) * h + iy) * w;
                            const std::size_t ker_row =
                                ((static_cast<std::size_t>(co) * cin + ci) * k +
                                 ky) * k;
                            for (int kx = 0; kx < k; ++kx) {
                                const int ix = ox * stride - padding + kx;
                                if (ix < 0 || ix >= w) continue;
                                if (di)
                                    in_n->grad[in_row + ix] +=
                                        go * ker_n->value[ker_row + kx];
                                if (dk)
                                    ker_n->grad[ker_row + kx] +=
                                        go * in_n->value[in_row + ix];
                            }
                        }
                }
    });
    return out;
}

inline Tensor conv2d(const Tensor& input, const Tensor& kernel, int stride,
                     int padding) {
    return conv2d(input, kernel, Tensor(), stride, padding);
}

// ---- reductions ------------------------------------------------------------

inline Tensor reduce_sum(const Tensor& a) {
    if (a.numel() == 0) throw std::invalid_argument("reduce: empty tensor");
    double s = 0.0;
    for (double x : a.data()) s += x;
    Tensor out = Tensor::scalar(s, a.requires_grad());
    detail::record_op(out, [an = a.node_ptr(), on = out.node_ptr()] {
        if (!an->requires_grad) return;
        ensure_grad(an.get());
        const double g = on->grad[0];
        for (auto& d : an->grad) d += g;
    });
    return out;
}

inline Tensor reduce_mean(const Tensor& a) {
    if (a.numel() == 0) throw std::invalid_argument("reduce: empty tensor");
    const double n = static_cast<double>(a.numel());
    double s = 0.0;
    for (double x : a.data()) s += x;
    Tensor out = Tensor::scalar(s / n, a.requires_grad());
    detail::record_op(out, [an = a.node_ptr(), on = out.node_ptr(), n] {
        if (!an->requires_grad) return;
        ensure_grad(an.get());
        const double g = on->grad[0] / n;
        for (auto& d : an->grad) d += g;
    });
    return out;
}

// Euclidean norm stabilized at the 1e-12 scale: sqrt(sum x^2 + eps^2), so
// the gradient x / norm is defined even at a zero residual while the value
// error stays below ~1e-12.
inline constexpr double kNormEpsilon = 1e-24;  // squared scale

inline Tensor l2norm(const Tensor& a) {
    if (a.numel() == 0) throw std::invalid_argument("reduce: empty tensor");
    double s = kNormEpsilon;
    for (double x : a.data()) s += x * x;
    const double norm = std::sqrt(s);
    Tensor out = Tensor::scalar(norm, a.requires_grad());
    detail::record_op(out, [an = a.node_ptr(), on = out.node_ptr()] {
        if (!an->requires_grad) return;
        ensure_grad(an.get());
        const double g = on->grad[0] / on->value[0];
        for (std::size_t i = 0; i < an->value.size(); ++i)
            an->grad[i] += g * an->value[i];
    });
    return out;
}

// ---- structural ------------------------------------------------------------

inline Tensor concat(const std::vector<Tensor>& parts, int axis) {
    if (parts.empty()) throw std::invalid_argument("concat: no inputs");
    const Shape& base = parts[0].shape();
    const int rank = static_cast<int>(base.size());
    if (axis < 0 || axis >= rank)
        throw std::invalid_argument("concat: axis " + std::to_string(axis) +
                                    " out of range for rank " +
                                    std::to_string(rank));
    Shape out_shape = base;
    out_shape[axis] = 0;
    for (const Tensor& p : parts) {
        if (static_cast<int>(p.shape().size()) != rank)
            throw std::invalid_argument("concat: rank mismatch " +
                                        shape_str(base) + " vs " +
                                        shape_str(p.shape()));
        for (int d = 0; d < rank; ++d)
            if (d != axis && p.shape()[d] != base[d])
                throw std::invalid_argument("concat: non-axis dims differ, " +
                                            shape_str(base) + " vs " +
                                            shape_str(p.shape()));
        out_shape[axis] += p.shape()[axis];
    }

    // outer x axis x inner layout
    std::size_t inner = 1, outer = 1;
    for (int d = axis + 1; d < rank; ++d) inner *= base[d];
    for (int d = 0; d < axis; ++d) outer *= base[d];

    std::vector<double> v(shape_numel(out_shape));
    bool rg = false;
    const std::size_t out_axis_inner = static_cast<std::size_t>(out_shape[axis]) * inner;
    std::size_t axis_offset = 0;
    for (const Tensor& p : parts) {
        rg = rg || p.requires_grad();
        const std::size_t p_axis_inner =
            static_cast<std::size_t>(p.shape()[axis]) * inner;
        for (std::size_t o = 0; o < outer; ++o)
            std::copy_n(p.data().begin() + o * p_axis_inner, p_axis_inner,
                        v.begin() + o * out_axis_inner + axis_offset * inner);
        axis_offset += p.shape()[axis];
    }

    Tensor out(std::move(out_shape), std::move(v), rg);
    std::vector<std::shared_ptr<TensorNode>> nodes;
    std::vector<int> axis_sizes;
    for (const Tensor& p : parts) {
        nodes.push_back(p.node_ptr());
        axis_sizes.push_back(p.shape()[axis]);
    }
    detail::record_op(out, [nodes, axis_sizes, on = out.node_ptr(), inner, outer,
                            out_axis_inner] {
        std::size_t axis_offset = 0;
        for (std::size_t pi = 0; pi < nodes.size(); ++pi) {
            auto& n = nodes[pi];
            const std::size_t p_axis_inner =
                static_cast<std::size_t>(axis_sizes[pi]) * inner;
            if (n->requires_grad) {
                ensure_grad(n.get());
                for (std::size_t o = 0; o < outer; ++o) {
                    const double* src =
                        on->grad.data() + o * out_axis_inner + axis_offset * inner;
                    double* dst = n->grad.data() + o * p_axis_inner;
                    for (std::size_t i = 0; i < p_axis_inner; ++i) dst[i] += src[i];
                }
            }
            axis_offset += axis_sizes[pi];
        }
    });
    return out;
}

inline Tensor slice(const Tensor& a, int axis, int start, int len) {
    const int rank = static_cast<int>(a.shape().size());
    if (axis < 0 || axis >= rank)
        throw std::invalid_argument("slice: axis out of range");
    if (len <= 0 || start < 0 || start + len > a.shape()[axis])
        throw std::invalid_argument(
            "slice: range [" + std::to_string(start) + ", " +
            std::to_string(start + len) + ") invalid for axis size " +
            std::to_string(a.shape()[axis]));

    Shape out_shape = a.shape();
    out_shape[axis] = len;
    std::size_t inner = 1, outer = 1;
    for (int d = axis + 1; d < rank; ++d) inner *= a.shape()[d];
    for (int d = 0; d < axis; ++d) outer *= a.shape()[d];
    const std::size_t in_axis_inner =
        static_cast<std::size_t>(a.shape()[axis]) * inner;
    const std::size_t out_axis_inner = static_cast<std::size_t>(len) * inner;

    std::vector<double> v(shape_numel(out_shape));
    for (std::size_t o = 0; o < outer; ++o)
        std::copy_n(a.data().begin() + o * in_axis_inner + start * inner,
                    out_axis_inner, v.begin() + o * out_axis_inner);

    Tensor out(std::move(out_shape), std::move(v), a.requires_grad());
    detail::record_op(out, [an = a.node_ptr(), on = out.node_ptr(), outer, inner,
                            in_axis_inner, out_axis_inner, start] {
        if (!an->requires_grad) return;
        ensure_grad(an.get());
        for (std::size_t o = 0; o < outer; ++o) {
            const double* src = on->grad.data() + o * out_axis_inner;
            double* dst = an->grad.data() + o * in_axis_inner + start * inner;
            for (std::size_t i = 0; i < out_axis_inner; ++i) dst[i] += src[i];
        }
    });
    return out;
}

inline Tensor reshape(const Tensor& a, Shape new_shape) {
    if (shape_numel(new_shape) != a.numel())
        throw std::invalid_argument("reshape: cannot view " +
                                    shape_str(a.shape()) + " as " +
                                    shape_str(new_shape));
    Tensor out(std::move(new_shape), a.data(), a.requires_grad());
    detail::record_op(out, [an = a.node_ptr(), on = out.node_ptr()] {
        if (!an->requires_grad) return;
        ensure_grad(an.get());
        for (std::size_t i = 0; i < an->grad.size(); ++i)
            an->grad[i] += on->grad[i];
    });
    return out;
}

namespace detail {

inline void check_pool_args(const Tensor& a, int window, int stride,
                            int padding, const char* name) {
    if (a.shape().size() != 3)
        throw std::invalid_argument(std::string(name) + ": input must be CxHxW, got " +
                                    shape_str(a.shape()));
    if (window < 1 || stride < 1 || padding < 0)
        throw std::invalid_argument(std::string(name) + ": bad window/stride/padding");
    if (window > a.shape()[1] + 2 * padding || window > a.shape()[2] + 2 * padding)
        throw std::invalid_argument(
            std::string(name) + ": window " + std::to_string(window) +
            " does not fit input " + shape_str(a.shape()) + " with padding " +
            std::to_string(padding));
}

}  // namespace detail

// Max pooling; gradient routes to the first (row-major) maximal element of
// each window. Padded positions never win.
inline Tensor max_pool2d(const Tensor& a, int window, int stride, int padding = 0) {
    detail::check_pool_args(a, window, stride, padding, "max_pool2d");
    const int c = a.shape()[0], h = a.shape()[1], w = a.shape()[2];
    const int oh = (h + 2 * padding - window) / stride + 1;
    const int ow = (w + 2 * padding - window) / stride + 1;

    std::vector<double> v(static_cast<std::size_t>(c) * oh * ow);
    std::vector<std::size_t> argmax(v.size());
    const auto& in = a.data();
    for (int ci = 0; ci < c; ++ci)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                double best = -std::numeric_limits<double>::infinity();
                std::size_t best_idx = 0;
                for (int ky = 0; ky < window; ++ky) {
                    const int iy = oy * stride - padding + ky;
                    if (iy < 0 || iy >= h) continue;
                    for (int kx = 0; kx < window; ++kx) {
                        const int ix = ox * stride - padding + kx;
                        if (ix < 0 || ix >= w) continue;
                        const std::size_t idx =
                            (static_cast<std::size_t>(ci) * h + iy) * w + ix;
                        if (in[idx] > best) {
                            best = in[idx];
                            best_idx = idx;
                        }
                    }
                }
                const std::size_t oidx =
                    (static_cast<std::size_t>(ci) * oh + oy) * ow + ox;
                v[oidx] = best;
                argmax[oidx] = best_idx;
            }

    Tensor out({c, oh, ow}, std::move(v), a.requires_grad());
    detail::record_op(out, [an = a.node_ptr(), on = out.node_ptr(),
                            argmax = std::move(argmax)] {
        if (!an->requires_grad) return;
        ensure_grad(an.get());
        for (std::size_t i = 0; i < on->grad.size(); ++i)
            an->grad[argmax[i]] += on->grad[i];
    });
    return out;
}

// Average pooling; divisor is the full window area (padded positions count
// as zeros).
inline Tensor avg_pool2d(const Tensor& a, int window, int stride, int padding = 0) {
    detail::check_pool_args(a, window, stride, padding, "avg_pool2d");
    const int c = a.shape()[0], h = a.shape()[1], w = a.shape()[2];
    const int oh = (h + 2 * padding - window) / stride + 1;
    const int ow = (w + 2 * padding - window) / stride + 1;
    const double inv_area = 1.0 / (static_cast<double>(window) * window);

    std::vector<double> v(static_cast<std::size_t>(c) * oh * ow);
    const auto& in = a.data();
    for (int ci = 0; ci < c; ++ci)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                double acc = 0.0;
                for (int ky = 0; ky < window; ++ky) {
                    const int iy = oy * stride - padding + ky;
                    if (iy < 0 || iy >= h) continue;
                    for (int kx = 0; kx < window; ++kx) {
                        const int ix = ox * stride - padding + kx;
                        if (ix < 0 || ix >= w) continue;
                        acc += in[(static_cast<std::size_t>(ci) * h + iy) * w + ix];
                    }
                }
                v[(static_cast<std::size_t>(ci) * oh + oy) * ow + ox] =
                    acc * inv_area;
            }

    Tensor out({c, oh, ow}, std::move(v), a.requires_grad());
    detail::record_op(out, [an = a.node_ptr(), on = out.node_ptr(), c, h, w, oh,
                            ow, window, stride, padding, inv_area] {
        if (!an->requires_grad) return;
        ensure_grad(an.get());
        for (int ci = 0; ci < c; ++ci)
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    const double g =
                        on->grad[(static_cast<std::size_t>(ci) * oh + oy) * ow + ox] *
                        inv_area;
                    if (g == 0.0) continue;
                    for (int ky = 0; ky < window; ++ky) {
                        const int iy = oy * stride - padding + ky;
                        if (iy < 0 || iy >= h) continue;
                        for (int kx = 0; kx < window; ++kx) {
                            const int ix = ox * stride - padding + kx;
                            if (ix < 0 || ix >= w) continue;
                            an->grad[(static_cast<std::size_t>(ci) * h + iy) * w +
                                     ix] += g;
                        }
                    }
                }
    });
    return out;
}

}  // namespace poselab::ad
