#include "xda/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>
#include <utility>

#include "xda/error.hpp"

namespace xda {

namespace {

// ---------------------------------------------------------------------------
// GEMM kernels, row-major. C += A*B with optional transposes. Work is split
// across worker threads by output rows; each element is produced by exactly
// one thread with a fixed summation order, so results do not depend on the
// thread count.
// ---------------------------------------------------------------------------

void gemm_nn_range(int i0, int i1, int K, int N, const double* A, const double* B, double* C) {
    for (int i = i0; i < i1; ++i) {
        const double* a = A + static_cast<std::size_t>(i) * K;
        double* c = C + static_cast<std::size_t>(i) * N;
        for (int k = 0; k < K; ++k) {
            const double av = a[k];
            const double* b = B + static_cast<std::size_t>(k) * N;
            for (int j = 0; j < N; ++j) c[j] += av * b[j];
        }
    }
}

// C[M x N] += A[M x K] * B'[N x K]^T
void gemm_nt_range(int i0, int i1, int K, int N, const double* A, const double* Bt, double* C) {
    for (int i = i0; i < i1; ++i) {
        const double* a = A + static_cast<std::size_t>(i) * K;
        double* c = C + static_cast<std::size_t>(i) * N;
        for (int j = 0; j < N; ++j) {
            const double* b = Bt + static_cast<std::size_t>(j) * K;
            double acc = 0.0;
            for (int k = 0; k < K; ++k) acc += a[k] * b[k];
            c[j] += acc;
        }
    }
}

// C[M x N] += A'[K x M]^T * B[K x N]
void gemm_tn_range(int i0, int i1, int M, int K, int N, const double* At, const double* B,
                   double* C) {
    for (int i = i0; i < i1; ++i) {
        double* c = C + static_cast<std::size_t>(i) * N;
        for (int k = 0; k < K; ++k) {
            const double av = At[static_cast<std::size_t>(k) * M + i];
            const double* b = B + static_cast<std::size_t>(k) * N;
            for (int j = 0; j < N; ++j) c[j] += av * b[j];
        }
    }
}

template <typename RangeFn>
void run_rows(int M, std::int64_t flops, RangeFn fn) {
    const int workers = worker_count();
    if (workers <= 1 || M < 2 * workers || flops < (1 << 18)) {
        fn(0, M);
        return;
    }
    const int t = std::min(workers, M);
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(t));
    const int chunk = (M + t - 1) / t;
    for (int w = 0; w < t; ++w) {
        const int i0 = w * chunk;
        const int i1 = std::min(M, i0 + chunk);
        if (i0 >= i1) break;
        threads.emplace_back([=] { fn(i0, i1); });
    }
    for (auto& th : threads) th.join();
}

void gemm_nn(int M, int K, int N, const double* A, const double* B, double* C) {
    run_rows(M, static_cast<std::int64_t>(M) * K * N,
             [&](int i0, int i1) { gemm_nn_range(i0, i1, K, N, A, B, C); });
}

void gemm_nt(int M, int K, int N, const double* A, const double* Bt, double* C) {
    run_rows(M, static_cast<std::int64_t>(M) * K * N,
             [&](int i0, int i1) { gemm_nt_range(i0, i1, K, N, A, Bt, C); });
}

void gemm_tn(int M, int K, int N, const double* At, const double* B, double* C) {
    run_rows(M, static_cast<std::int64_t>(M) * K * N,
             [&](int i0, int i1) { gemm_tn_range(i0, i1, M, K, N, At, B, C); });
}

// Recording helpers: an op calls one of these after computing its forward
// value; nothing is recorded unless a tape is active and at least one input
// is live on it.

using Back1 = std::function<Tensor(const Tensor&)>;

void record_unary(Tensor& out, const Tensor& a, Back1 da) {
    const int na = live_node(a);
    if (na < 0) return;
    Tape::active()->record(out, {na}, [da = std::move(da)](const Tensor& g) {
        std::vector<Tensor> r(1);
        r[0] = da(g);
        return r;
    });
}

void record_binary(Tensor& out, const Tensor& a, const Tensor& b, Back1 da, Back1 db) {
    const int na = live_node(a);
    const int nb = live_node(b);
    if (na < 0 && nb < 0) return;
    Tape::active()->record(out, {na, nb},
                           [na, nb, da = std::move(da), db = std::move(db)](const Tensor& g) {
                               std::vector<Tensor> r(2);
                               if (na >= 0) r[0] = da(g);
                               if (nb >= 0) r[1] = db(g);
                               return r;
                           });
}

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                             " vs " + shape_str(b.shape()));
    }
}

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

struct ConvDims {
    int c_in, h, w;
    int c_out, k;
    int out_h, out_w;
};

ConvDims conv_dims(const Tensor& input, const Tensor& weight, int stride, int padding) {
    if (input.rank() != 3) {
        throw DimensionError("conv2d: input must be CxHxW, got " + shape_str(input.shape()));
    }
    if (weight.rank() != 4 || weight.dim(2) != weight.dim(3)) {
        throw DimensionError("conv2d: weight must be OxIxkxk, got " + shape_str(weight.shape()));
    }
    if (weight.dim(1) != input.dim(0)) {
        throw DimensionError("conv2d: weight " + shape_str(weight.shape()) +
                             " does not accept input " + shape_str(input.shape()));
    }
    if (stride < 1) throw ContractError("conv2d: stride must be positive");
    if (padding < 0) throw ContractError("conv2d: padding must be non-negative");
    ConvDims d;
    d.c_in = input.dim(0);
    d.h = input.dim(1);
    d.w = input.dim(2);
    d.c_out = weight.dim(0);
    d.k = weight.dim(2);
    if (d.k > d.h + 2 * padding || d.k > d.w + 2 * padding) {
        throw DimensionError("conv2d: kernel " + std::to_string(d.k) + " larger than padded input " +
                             shape_str(input.shape()) + " with padding " + std::to_string(padding));
    }
    d.out_h = (d.h + 2 * padding - d.k) / stride + 1;
    d.out_w = (d.w + 2 * padding - d.k) / stride + 1;
    return d;
}

// col[(ic*k*k + ky*k + kx), (oy*out_w + ox)] = input[ic, oy*s-p+ky, ox*s-p+kx]
std::vector<double> im2col(const Tensor& input, const ConvDims& d, int stride, int padding) {
    const std::size_t rows = static_cast<std::size_t>(d.c_in) * d.k * d.k;
    const std::size_t cols = static_cast<std::size_t>(d.out_h) * d.out_w;
    std::vector<double> col(rows * cols, 0.0);
    const double* in = input.data();
    for (int ic = 0; ic < d.c_in; ++ic) {
        const double* plane = in + static_cast<std::size_t>(ic) * d.h * d.w;
        for (int ky = 0; ky < d.k; ++ky) {
            for (int kx = 0; kx < d.k; ++kx) {
                double* row =
                    col.data() + (static_cast<std::size_t>(ic) * d.k * d.k + ky * d.k + kx) * cols;
                for (int oy = 0; oy < d.out_h; ++oy) {
                    const int iy = oy * stride - padding + ky;
                    if (iy < 0 || iy >= d.h) continue;
                    const double* src = plane + static_cast<std::size_t>(iy) * d.w;
                    double* dst = row + static_cast<std::size_t>(oy) * d.out_w;
                    for (int ox = 0; ox < d.out_w; ++ox) {
                        const int ix = ox * stride - padding + kx;
                        if (ix >= 0 && ix < d.w) dst[ox] = src[ix];
                    }
                }
            }
        }
    }
    return col;
}

void col2im_add(const std::vector<double>& col, const ConvDims& d, int stride, int padding,
                Tensor& grad_input) {
    const std::size_t cols = static_cast<std::size_t>(d.out_h) * d.out_w;
    double* out = grad_input.data();
    for (int ic = 0; ic < d.c_in; ++ic) {
        double* plane = out + static_cast<std::size_t>(ic) * d.h * d.w;
        for (int ky = 0; ky < d.k; ++ky) {
            for (int kx = 0; kx < d.k; ++kx) {
                const double* row =
                    col.data() + (static_cast<std::size_t>(ic) * d.k * d.k + ky * d.k + kx) * cols;
                for (int oy = 0; oy < d.out_h; ++oy) {
                    const int iy = oy * stride - padding + ky;
                    if (iy < 0 || iy >= d.h) continue;
                    double* dst = plane + static_cast<std::size_t>(iy) * d.w;
                    const double* src = row + static_cast<std::size_t>(oy) * d.out_w;
                    for (int ox = 0; ox < d.out_w; ++ox) {
                        const int ix = ox * stride - padding + kx;
                        if (ix >= 0 && ix < d.w) dst[ix] += src[ox];
                    }
                }
            }
        }
    }
}

struct ResizeAxis {
    std::vector<int> lo, hi;
    std::vector<double> frac;
};

// align-corners-false sampling grid, edge-clamped
ResizeAxis resize_axis(int in_len, int out_len) {
    ResizeAxis ax;
    ax.lo.resize(static_cast<std::size_t>(out_len));
    ax.hi.resize(static_cast<std::size_t>(out_len));
    ax.frac.resize(static_cast<std::size_t>(out_len));
    const double scale = static_cast<double>(in_len) / out_len;
    for (int o = 0; o < out_len; ++o) {
        double s = (o + 0.5) * scale - 0.5;
        s = std::clamp(s, 0.0, static_cast<double>(in_len - 1));
        const int lo = static_cast<int>(s);
        ax.lo[static_cast<std::size_t>(o)] = lo;
        ax.hi[static_cast<std::size_t>(o)] = std::min(lo + 1, in_len - 1);
        ax.frac[static_cast<std::size_t>(o)] = s - lo;
    }
    return ax;
}

}  // namespace

int worker_count() {
    static const int count = [] {
        if (const char* env = std::getenv("XATTN_THREADS")) {
            const long v = std::strtol(env, nullptr, 10);
            if (v >= 1) return static_cast<int>(std::min(v, 64L));
        }
        const unsigned hw = std::thread::hardware_concurrency();
        return static_cast<int>(std::clamp(hw, 1u, 8u));
    }();
    return count;
}

// ---------------------------------------------------------------------------
// Elementwise ops
// ---------------------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape("add", a, b);
    Tensor out = Tensor::zeros(a.shape());
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
    record_binary(
        out, a, b, [](const Tensor& g) { return g; }, [](const Tensor& g) { return g; });
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape("sub", a, b);
    Tensor out = Tensor::zeros(a.shape());
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
    record_binary(
        out, a, b, [](const Tensor& g) { return g; }, [](const Tensor& g) { return scale(g, -1.0); });
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape("mul", a, b);
    Tensor out = Tensor::zeros(a.shape());
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
    const Tensor av = a.detached();
    const Tensor bv = b.detached();
    record_binary(
        out, a, b,
        [bv](const Tensor& g) {
            Tensor r = Tensor::zeros(bv.shape());
            for (std::size_t i = 0; i < r.size(); ++i) r[i] = g[i] * bv[i];
            return r;
        },
        [av](const Tensor& g) {
            Tensor r = Tensor::zeros(av.shape());
            for (std::size_t i = 0; i < r.size(); ++i) r[i] = g[i] * av[i];
            return r;
        });
    return out;
}

Tensor scale(const Tensor& a, double s) {
    Tensor out = Tensor::zeros(a.shape());
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * s;
    record_unary(out, a, [s](const Tensor& g) { return scale(g, s); });
    return out;
}

Tensor log(const Tensor& a) {
    Tensor out = Tensor::zeros(a.shape());
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) out[i] = std::log(a[i]);
    const Tensor av = a.detached();
    record_unary(out, a, [av](const Tensor& g) {
        Tensor r = Tensor::zeros(av.shape());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = g[i] / av[i];
        return r;
    });
    return out;
}

Tensor softplus(const Tensor& a) {
    Tensor out = Tensor::zeros(a.shape());
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double x = a[i];
        out[i] = x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    }
    const Tensor av = a.detached();
    record_unary(out, a, [av](const Tensor& g) {
        Tensor r = Tensor::zeros(av.shape());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = g[i] * stable_sigmoid(av[i]);
        return r;
    });
    return out;
}

Tensor leaky_relu(const Tensor& a, double alpha) {
    Tensor out = Tensor::zeros(a.shape());
    const std::size_t n = out.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double x = a[i];
        out[i] = x >= 0.0 ? x : alpha * x;
    }
    const Tensor av = a.detached();
    record_unary(out, a, [av, alpha](const Tensor& g) {
        Tensor r = Tensor::zeros(av.shape());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = g[i] * (av[i] >= 0.0 ? 1.0 : alpha);
        return r;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Shape ops
// ---------------------------------------------------------------------------

Tensor reshape(const Tensor& a, Shape shape) {
    if (numel(shape) != static_cast<std::int64_t>(a.size())) {
        throw DimensionError("reshape: " + shape_str(a.shape()) + " has " +
                             std::to_string(a.size()) + " elements, target " + shape_str(shape) +
                             " needs " + std::to_string(numel(shape)));
    }
    Tensor out = Tensor::from(std::move(shape), a.values());
    const Shape original = a.shape();
    record_unary(out, a, [original](const Tensor& g) { return reshape(g, original); });
    return out;
}

Tensor transpose(const Tensor& a) {
    if (a.rank() != 2) {
        throw DimensionError("transpose: expected rank-2 tensor, got " + shape_str(a.shape()));
    }
    const int m = a.dim(0), n = a.dim(1);
    Tensor out = Tensor::zeros({n, m});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out.at(j, i) = a.at(i, j);
    record_unary(out, a, [](const Tensor& g) { return transpose(g); });
    return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    if (a.rank() != 3 || b.rank() != 3) {
        throw DimensionError("concat_channels: expected CxHxW tensors, got " +
                             shape_str(a.shape()) + " and " + shape_str(b.shape()));
    }
    if (a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2)) {
        throw DimensionError("concat_channels: spatial mismatch " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
    }
    const int c1 = a.dim(0), c2 = b.dim(0), h = a.dim(1), w = a.dim(2);
    Tensor out = Tensor::zeros({c1 + c2, h, w});
    std::copy(a.data(), a.data() + a.size(), out.data());
    std::copy(b.data(), b.data() + b.size(), out.data() + a.size());
    const std::size_t na = a.size();
    const Shape sa = a.shape(), sb = b.shape();
    record_binary(
        out, a, b,
        [sa, na](const Tensor& g) {
            Tensor r = Tensor::zeros(sa);
            std::copy(g.data(), g.data() + na, r.data());
            return r;
        },
        [sb, na](const Tensor& g) {
            Tensor r = Tensor::zeros(sb);
            std::copy(g.data() + na, g.data() + g.size(), r.data());
            return r;
        });
    return out;
}

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

Tensor sum(const Tensor& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i];
    Tensor out = Tensor::scalar(acc);
    const Shape sa = a.shape();
    record_unary(out, a, [sa](const Tensor& g) { return Tensor::full(sa, g[0]); });
    return out;
}

Tensor mean(const Tensor& a) {
    if (a.size() == 0) throw ContractError("mean of an empty tensor");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i];
    const double inv = 1.0 / static_cast<double>(a.size());
    Tensor out = Tensor::scalar(acc * inv);
    const Shape sa = a.shape();
    record_unary(out, a, [sa, inv](const Tensor& g) { return Tensor::full(sa, g[0] * inv); });
    return out;
}

// ---------------------------------------------------------------------------
// matmul / softmax / conv2d / bilinear_resize
// ---------------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
        throw DimensionError("matmul: incompatible shapes " + shape_str(a.shape()) + " and " +
                             shape_str(b.shape()));
    }
    const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
    Tensor out = Tensor::zeros({m, n});
    gemm_nn(m, k, n, a.data(), b.data(), out.data());
    const Tensor av = a.detached();
    const Tensor bv = b.detached();
    record_binary(
        out, a, b,
        [bv, m, k, n](const Tensor& g) {
            Tensor r = Tensor::zeros({m, k});  // g * b^T
            gemm_nt(m, n, k, g.data(), bv.data(), r.data());
            return r;
        },
        [av, m, k, n](const Tensor& g) {
            Tensor r = Tensor::zeros({k, n});  // a^T * g
            gemm_tn(k, m, n, av.data(), g.data(), r.data());
            return r;
        });
    return out;
}

Tensor softmax(const Tensor& a, int axis) {
    if (axis < 0 || axis >= a.rank()) {
        throw ContractError("softmax: axis " + std::to_string(axis) + " out of bounds for shape " +
                            shape_str(a.shape()));
    }
    const int len = a.dim(axis);
    std::size_t outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i) outer *= static_cast<std::size_t>(a.dim(i));
    for (int i = axis + 1; i < a.rank(); ++i) inner *= static_cast<std::size_t>(a.dim(i));

    Tensor out = Tensor::zeros(a.shape());
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = o * static_cast<std::size_t>(len) * inner + in;
            double mx = a[base];
            for (int l = 1; l < len; ++l) mx = std::max(mx, a[base + static_cast<std::size_t>(l) * inner]);
            double denom = 0.0;
            for (int l = 0; l < len; ++l) {
                const std::size_t idx = base + static_cast<std::size_t>(l) * inner;
                const double e = std::exp(a[idx] - mx);
                out[idx] = e;
                denom += e;
            }
            const double inv = 1.0 / denom;
            for (int l = 0; l < len; ++l) out[base + static_cast<std::size_t>(l) * inner] *= inv;
        }
    }

    const Tensor y = out.detached();
    record_unary(out, a, [y, len, outer, inner](const Tensor& g) {
        Tensor r = Tensor::zeros(y.shape());
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t in = 0; in < inner; ++in) {
                const std::size_t base = o * static_cast<std::size_t>(len) * inner + in;
                double dot = 0.0;
                for (int l = 0; l < len; ++l) {
                    const std::size_t idx = base + static_cast<std::size_t>(l) * inner;
                    dot += y[idx] * g[idx];
                }
                for (int l = 0; l < len; ++l) {
                    const std::size_t idx = base + static_cast<std::size_t>(l) * inner;
                    r[idx] = y[idx] * (g[idx] - dot);
                }
            }
        }
        return r;
    });
    return out;
}

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride,
              int padding) {
    const ConvDims d = conv_dims(input, weight, stride, padding);
    if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != d.c_out)) {
        throw DimensionError("conv2d: bias " + shape_str(bias.shape()) + " does not match " +
                             std::to_string(d.c_out) + " output channels");
    }

    const std::vector<double> col = im2col(input, d, stride, padding);
    const int krows = d.c_in * d.k * d.k;
    const int cols = d.out_h * d.out_w;

    Tensor out = Tensor::zeros({d.c_out, d.out_h, d.out_w});
    if (bias.defined()) {
        for (int oc = 0; oc < d.c_out; ++oc) {
            double* row = out.data() + static_cast<std::size_t>(oc) * cols;
            std::fill(row, row + cols, bias[static_cast<std::size_t>(oc)]);
        }
    }
    gemm_nn(d.c_out, krows, cols, weight.data(), col.data(), out.data());

    const int ni = live_node(input);
    const int nw = live_node(weight);
    const int nb = bias.defined() ? live_node(bias) : -1;
    if (ni < 0 && nw < 0 && nb < 0) return out;

    const Tensor in_saved = input.detached();
    const Tensor w_saved = weight.detached();
    Tape::active()->record(
        out, {ni, nw, nb},
        [=](const Tensor& g) {
            std::vector<Tensor> r(3);
            if (nw >= 0 || ni >= 0) {
                const std::vector<double> col_b = im2col(in_saved, d, stride, padding);
                if (nw >= 0) {
                    Tensor gw = Tensor::zeros(w_saved.shape());  // g_mat * col^T
                    gemm_nt(d.c_out, cols, krows, g.data(), col_b.data(), gw.data());
                    r[1] = std::move(gw);
                }
                if (ni >= 0) {
                    std::vector<double> col_g(static_cast<std::size_t>(krows) * cols, 0.0);
                    gemm_tn(krows, d.c_out, cols, w_saved.data(), g.data(), col_g.data());
                    Tensor gi = Tensor::zeros(in_saved.shape());
                    col2im_add(col_g, d, stride, padding, gi);
                    r[0] = std::move(gi);
                }
            }
            if (nb >= 0) {
                Tensor gb = Tensor::zeros({d.c_out});
                for (int oc = 0; oc < d.c_out; ++oc) {
                    const double* row = g.data() + static_cast<std::size_t>(oc) * cols;
                    double acc = 0.0;
                    for (int i = 0; i < cols; ++i) acc += row[i];
                    gb[static_cast<std::size_t>(oc)] = acc;
                }
                r[2] = std::move(gb);
            }
            return r;
        });
    return out;
}

Tensor bilinear_resize(const Tensor& input, int out_h, int out_w) {
    if (input.rank() != 3) {
        throw DimensionError("bilinear_resize: input must be CxHxW, got " +
                             shape_str(input.shape()));
    }
    if (out_h < 1 || out_w < 1) throw ContractError("bilinear_resize: output size must be >= 1");
    const int c = input.dim(0), h = input.dim(1), w = input.dim(2);
    if (out_h == h && out_w == w) {
        Tensor out = Tensor::from(input.shape(), input.values());
        record_unary(out, input, [](const Tensor& g) { return g; });
        return out;
    }

    const ResizeAxis ay = resize_axis(h, out_h);
    const ResizeAxis ax = resize_axis(w, out_w);
    Tensor out = Tensor::zeros({c, out_h, out_w});
    for (int ch = 0; ch < c; ++ch) {
        const double* plane = input.data() + static_cast<std::size_t>(ch) * h * w;
        double* dst = out.data() + static_cast<std::size_t>(ch) * out_h * out_w;
        for (int oy = 0; oy < out_h; ++oy) {
            const int y0 = ay.lo[static_cast<std::size_t>(oy)];
            const int y1 = ay.hi[static_cast<std::size_t>(oy)];
            const double fy = ay.frac[static_cast<std::size_t>(oy)];
            const double* r0 = plane + static_cast<std::size_t>(y0) * w;
            const double* r1 = plane + static_cast<std::size_t>(y1) * w;
            for (int ox = 0; ox < out_w; ++ox) {
                const int x0 = ax.lo[static_cast<std::size_t>(ox)];
                const int x1 = ax.hi[static_cast<std::size_t>(ox)];
                const double fx = ax.frac[static_cast<std::size_t>(ox)];
                const double top = r0[x0] * (1.0 - fx) + r0[x1] * fx;
                const double bot = r1[x0] * (1.0 - fx) + r1[x1] * fx;
                dst[static_cast<std::size_t>(oy) * out_w + ox] = top * (1.0 - fy) + bot * fy;
            }
        }
    }

    const Shape in_shape = input.shape();
    record_unary(out, input, [in_shape, ay, ax, c, h, w, out_h, out_w](const Tensor& g) {
        Tensor r = Tensor::zeros(in_shape);
        for (int ch = 0; ch < c; ++ch) {
            double* plane = r.data() + static_cast<std::size_t>(ch) * h * w;
            const double* src = g.data() + static_cast<std::size_t>(ch) * out_h * out_w;
            for (int oy = 0; oy < out_h; ++oy) {
                const int y0 = ay.lo[static_cast<std::size_t>(oy)];
                const int y1 = ay.hi[static_cast<std::size_t>(oy)];
                const double fy = ay.frac[static_cast<std::size_t>(oy)];
                for (int ox = 0; ox < out_w; ++ox) {
                    const int x0 = ax.lo[static_cast<std::size_t>(ox)];
                    const int x1 = ax.hi[static_cast<std::size_t>(ox)];
                    const double fx = ax.frac[static_cast<std::size_t>(ox)];
                    const double gv = src[static_cast<std::size_t>(oy) * out_w + ox];
                    plane[static_cast<std::size_t>(y0) * w + x0] += gv * (1.0 - fy) * (1.0 - fx);
                    plane[static_cast<std::size_t>(y0) * w + x1] += gv * (1.0 - fy) * fx;
                    plane[static_cast<std::size_t>(y1) * w + x0] += gv * fy * (1.0 - fx);
                    plane[static_cast<std::size_t>(y1) * w + x1] += gv * fy * fx;
                }
            }
        }
        return r;
    });
    return out;
}

}  // namespace xda
