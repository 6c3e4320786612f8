#pragma once

#include "med/graph.hpp"

// Differentiable layer vocabulary. Every op records a node on the graph that
// owns its first operand; all operands must belong to the same graph.
namespace med::ad {

/// 2-D convolution with zero "same" padding (k-1)/2.
/// x: (1, Cin, H, W); w: (Cout, Cin, k, k) with odd k; b: (1, Cout, 1, 1).
/// Stride 2 yields ceil(H/2) x ceil(W/2).
template <class T>
Var<T> conv2d(Var<T> x, Var<T> w, Var<T> b, int stride);

/// Per-channel normalization with statistics over H x W of the single
/// batch element. gamma, beta: (1, C, 1, 1).
template <class T>
Var<T> batch_norm(Var<T> x, Var<T> gamma, Var<T> beta, double eps = 1e-5);

/// max(x, slope * x); the derivative at 0 is `slope`.
template <class T>
Var<T> leaky_relu(Var<T> x, double slope);

template <class T>
Var<T> sigmoid(Var<T> x);

/// Bilinear x2 upsampling, half-pixel (align_corners = false) sampling with
/// edge clamping.
template <class T>
Var<T> upsample_bilinear(Var<T> x, int factor = 2);

/// Non-overlapping block average; H and W must be divisible by `factor`.
template <class T>
Var<T> downsample_area(Var<T> x, int factor);

/// Channel concatenation. An empty `b` returns `a` unchanged.
template <class T>
Var<T> concat_channels(Var<T> a, Var<T> b, std::string label = "");

/// Mean of squared differences; returns a (1,1,1,1) tensor.
template <class T>
Var<T> mse(Var<T> a, Var<T> b);

/// mean(((a - b) * mask)^2) over all elements; `mask` is a constant.
template <class T>
Var<T> masked_mse(Var<T> a, Var<T> b, const BasicTensor<T>& mask);

template <class T>
Var<T> add(Var<T> a, Var<T> b);

template <class T>
Var<T> scale(Var<T> a, double s);

template <class T>
Var<T> mul(Var<T> a, Var<T> b);

template <class T>
Var<T> sum(Var<T> a);

}  // namespace med::ad
