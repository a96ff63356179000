#pragma once

#include "xda/tape.hpp"
#include "xda/tensor.hpp"

namespace xda {

// Elementwise / scalar ops.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor log(const Tensor& a);
Tensor softplus(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double alpha);

// Shape ops.
Tensor reshape(const Tensor& a, Shape shape);
Tensor transpose(const Tensor& a);  // rank-2 only
Tensor concat_channels(const Tensor& a, const Tensor& b);

// Reductions.
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

// Linear algebra and neural-net ops.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor softmax(const Tensor& a, int axis);
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride,
              int padding);
Tensor bilinear_resize(const Tensor& input, int out_h, int out_w);

/// Worker cap for the blocked matmul kernels; reads XATTN_THREADS once.
int worker_count();

}  // namespace xda
