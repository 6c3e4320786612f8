#include "med/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <memory>

#include "med/error.hpp"

namespace med::ad {

namespace {

template <class T>
using MatR = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class T>
Graph<T>& graph_of(Var<T> v, const char* op) {
  if (!v.valid()) {
    throw ShapeError(std::string(op) + ": empty operand");
  }
  return *v.graph;
}

template <class T>
void same_graph(Var<T> a, Var<T> b, const char* op) {
  if (a.graph != b.graph) {
    throw GraphError(std::string(op) + ": operands belong to different graphs");
  }
}

template <class T>
void same_shape(const BasicTensor<T>& a, const BasicTensor<T>& b,
                const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape().str() +
                     " vs " + b.shape().str());
  }
}

struct ConvGeometry {
  int cin, h, w;
  int cout, kh, kw;
  int stride, pad_y, pad_x;
  int ho, wo;

  std::size_t k() const { return static_cast<std::size_t>(cin) * kh * kw; }
  std::size_t n() const { return static_cast<std::size_t>(ho) * wo; }
  bool pointwise() const { return kh == 1 && kw == 1 && stride == 1; }
};

template <class T>
void im2col(const T* x, const ConvGeometry& g, T* col) {
  for (int ci = 0; ci < g.cin; ++ci) {
    const T* plane = x + static_cast<std::size_t>(ci) * g.h * g.w;
    for (int ky = 0; ky < g.kh; ++ky) {
      for (int kx = 0; kx < g.kw; ++kx) {
        T* row = col + ((static_cast<std::size_t>(ci) * g.kh + ky) * g.kw + kx) *
                           g.n();
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride + ky - g.pad_y;
          T* dst = row + static_cast<std::size_t>(oy) * g.wo;
          if (iy < 0 || iy >= g.h) {
            std::fill(dst, dst + g.wo, T{0});
            continue;
          }
          const T* src = plane + static_cast<std::size_t>(iy) * g.w;
          for (int ox = 0; ox < g.wo; ++ox) {
            const int ix = ox * g.stride + kx - g.pad_x;
            dst[ox] = (ix >= 0 && ix < g.w) ? src[ix] : T{0};
          }
        }
      }
    }
  }
}

template <class T>
void col2im_add(const T* col, const ConvGeometry& g, T* x) {
  for (int ci = 0; ci < g.cin; ++ci) {
    T* plane = x + static_cast<std::size_t>(ci) * g.h * g.w;
    for (int ky = 0; ky < g.kh; ++ky) {
      for (int kx = 0; kx < g.kw; ++kx) {
        const T* row =
            col + ((static_cast<std::size_t>(ci) * g.kh + ky) * g.kw + kx) *
                      g.n();
        for (int oy = 0; oy < g.ho; ++oy) {
          const int iy = oy * g.stride + ky - g.pad_y;
          if (iy < 0 || iy >= g.h) continue;
          const T* src = row + static_cast<std::size_t>(oy) * g.wo;
          T* dst = plane + static_cast<std::size_t>(iy) * g.w;
          for (int ox = 0; ox < g.wo; ++ox) {
            const int ix = ox * g.stride + kx - g.pad_x;
            if (ix >= 0 && ix < g.w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

// Per-axis linear interpolation taps for x2 half-pixel upsampling.
struct Taps {
  std::vector<int> i0, i1;
  std::vector<double> w0, w1;
};

Taps bilinear_taps(int in, int factor) {
  const int out = in * factor;
  Taps t;
  t.i0.resize(out);
  t.i1.resize(out);
  t.w0.resize(out);
  t.w1.resize(out);
  for (int o = 0; o < out; ++o) {
    double src = (o + 0.5) / factor - 0.5;
    if (src < 0.0) src = 0.0;
    int i0 = static_cast<int>(std::floor(src));
    if (i0 > in - 1) i0 = in - 1;
    const int i1 = std::min(i0 + 1, in - 1);
    const double lambda = src - i0;
    t.i0[o] = i0;
    t.i1[o] = i1;
    t.w0[o] = 1.0 - lambda;
    t.w1[o] = lambda;
  }
  return t;
}

}  // namespace

template <class T>
Var<T> conv2d(Var<T> x, Var<T> w, Var<T> b, int stride) {
  Graph<T>& graph = graph_of(x, "conv2d");
  same_graph(x, w, "conv2d");
  same_graph(x, b, "conv2d");
  const auto& xs = x.shape();
  const auto& ws = w.shape();
  if (stride != 1 && stride != 2) {
    throw ShapeError("conv2d: stride must be 1 or 2");
  }
  if (ws.h % 2 == 0 || ws.w % 2 == 0) {
    throw ShapeError("conv2d: kernel extents must be odd, got " + ws.str());
  }
  if (xs.n != 1) throw ShapeError("conv2d: batch must be 1");
  if (xs.c != ws.c) {
    throw ShapeError("conv2d: input has " + std::to_string(xs.c) +
                     " channels, kernel expects " + std::to_string(ws.c));
  }
  if (b.value().numel() != static_cast<std::size_t>(ws.n)) {
    throw ShapeError("conv2d: bias length must equal output channels");
  }

  ConvGeometry g{xs.c, xs.h, xs.w, ws.n, ws.h, ws.w, stride,
                 (ws.h - 1) / 2, (ws.w - 1) / 2, 0, 0};
  g.ho = (g.h + 2 * g.pad_y - g.kh) / stride + 1;
  g.wo = (g.w + 2 * g.pad_x - g.kw) / stride + 1;

  BasicTensor<T> out(Shape{1, g.cout, g.ho, g.wo});
  {
    AlignedVector<T> col;
    const T* col_ptr = x.value().raw();
    if (!g.pointwise()) {
      col.resize(g.k() * g.n());
      im2col(x.value().raw(), g, col.data());
      col_ptr = col.data();
    }
    Eigen::Map<const MatR<T>> wm(w.value().raw(), g.cout, g.k());
    Eigen::Map<const MatR<T>> cm(col_ptr, g.k(), g.n());
    Eigen::Map<MatR<T>> om(out.raw(), g.cout, g.n());
    om.noalias() = wm * cm;
    const T* bias = b.value().raw();
    for (int co = 0; co < g.cout; ++co) om.row(co).array() += bias[co];
  }

  auto backward = [g](const typename Graph<T>::BackwardArgs& a) {
    const BasicTensor<T>& xv = *a.inputs[0];
    const BasicTensor<T>& wv = *a.inputs[1];
    Eigen::Map<const MatR<T>> go(a.grad_output.raw(), g.cout, g.n());
    AlignedVector<T> col;
    const T* col_ptr = xv.raw();
    if (a.grad_inputs[1] != nullptr && !g.pointwise()) {
      col.resize(g.k() * g.n());
      im2col(xv.raw(), g, col.data());
      col_ptr = col.data();
    }
    if (BasicTensor<T>* gw = a.grad_inputs[1]) {
      Eigen::Map<const MatR<T>> cm(col_ptr, g.k(), g.n());
      Eigen::Map<MatR<T>> gwm(gw->raw(), g.cout, g.k());
      gwm.noalias() += go * cm.transpose();
    }
    if (BasicTensor<T>* gb = a.grad_inputs[2]) {
      for (int co = 0; co < g.cout; ++co) (*gb)[co] += go.row(co).sum();
    }
    if (BasicTensor<T>* gx = a.grad_inputs[0]) {
      Eigen::Map<const MatR<T>> wm(wv.raw(), g.cout, g.k());
      if (g.pointwise()) {
        Eigen::Map<MatR<T>> gxm(gx->raw(), g.k(), g.n());
        gxm.noalias() += wm.transpose() * go;
      } else {
        MatR<T> dcol = wm.transpose() * go;
        col2im_add(dcol.data(), g, gx->raw());
      }
    }
  };
  return graph.record("conv2d", {x, w, b}, std::move(out), backward);
}

template <class T>
Var<T> batch_norm(Var<T> x, Var<T> gamma, Var<T> beta, double eps) {
  Graph<T>& graph = graph_of(x, "batch_norm");
  same_graph(x, gamma, "batch_norm");
  same_graph(x, beta, "batch_norm");
  if (!(eps > 0.0)) throw ShapeError("batch_norm: eps must be positive");
  const auto& xs = x.shape();
  const auto C = static_cast<std::size_t>(xs.c);
  if (gamma.value().numel() != C || beta.value().numel() != C) {
    throw ShapeError("batch_norm: gamma/beta length must equal channels (" +
                     std::to_string(C) + ")");
  }
  if (xs.n != 1) throw ShapeError("batch_norm: batch must be 1");
  const std::size_t plane = xs.plane();

  auto mean = std::make_shared<std::vector<double>>(C);
  auto inv_std = std::make_shared<std::vector<double>>(C);
  BasicTensor<T> out(xs);
  const T* xv = x.value().raw();
  const T* gv = gamma.value().raw();
  const T* bv = beta.value().raw();
  for (std::size_t c = 0; c < C; ++c) {
    const T* p = xv + c * plane;
    double s = 0.0;
    for (std::size_t i = 0; i < plane; ++i) s += p[i];
    const double m = s / static_cast<double>(plane);
    double ss = 0.0;
    for (std::size_t i = 0; i < plane; ++i) {
      const double d = p[i] - m;
      ss += d * d;
    }
    const double var = ss / static_cast<double>(plane);
    const double inv = 1.0 / std::sqrt(var + eps);
    (*mean)[c] = m;
    (*inv_std)[c] = inv;
    T* o = out.raw() + c * plane;
    const double ga = gv[c];
    const double be = bv[c];
    for (std::size_t i = 0; i < plane; ++i) {
      o[i] = static_cast<T>((p[i] - m) * inv * ga + be);
    }
  }

  auto backward = [mean, inv_std, C,
                   plane](const typename Graph<T>::BackwardArgs& a) {
    const T* xv = a.inputs[0]->raw();
    const T* gv = a.inputs[1]->raw();
    const T* go = a.grad_output.raw();
    const double n = static_cast<double>(plane);
    for (std::size_t c = 0; c < C; ++c) {
      const T* p = xv + c * plane;
      const T* d = go + c * plane;
      const double m = (*mean)[c];
      const double inv = (*inv_std)[c];
      double sum_dy = 0.0;
      double sum_dy_xhat = 0.0;
      for (std::size_t i = 0; i < plane; ++i) {
        sum_dy += d[i];
        sum_dy_xhat += d[i] * (p[i] - m) * inv;
      }
      if (auto* gg = a.grad_inputs[1]) (*gg)[c] += static_cast<T>(sum_dy_xhat);
      if (auto* gb = a.grad_inputs[2]) (*gb)[c] += static_cast<T>(sum_dy);
      if (auto* gx = a.grad_inputs[0]) {
        const double ga = gv[c];
        T* dx = gx->raw() + c * plane;
        for (std::size_t i = 0; i < plane; ++i) {
          const double xhat = (p[i] - m) * inv;
          dx[i] += static_cast<T>(ga * inv / n *
                                  (n * d[i] - sum_dy - xhat * sum_dy_xhat));
        }
      }
    }
  };
  return graph.record("batch_norm", {x, gamma, beta}, std::move(out), backward);
}

template <class T>
Var<T> leaky_relu(Var<T> x, double slope) {
  Graph<T>& graph = graph_of(x, "leaky_relu");
  if (!(slope >= 0.0 && slope < 1.0)) {
    throw ShapeError("leaky_relu: slope must lie in [0, 1)");
  }
  const T s = static_cast<T>(slope);
  BasicTensor<T> out(x.shape());
  const T* xv = x.value().raw();
  for (std::size_t i = 0; i < out.numel(); ++i) {
    out[i] = xv[i] > T{0} ? xv[i] : s * xv[i];
  }
  auto backward = [s](const typename Graph<T>::BackwardArgs& a) {
    const T* xv = a.inputs[0]->raw();
    const T* go = a.grad_output.raw();
    T* gx = a.grad_inputs[0]->raw();
    for (std::size_t i = 0; i < a.grad_output.numel(); ++i) {
      gx[i] += xv[i] > T{0} ? go[i] : s * go[i];
    }
  };
  return graph.record("leaky_relu", {x}, std::move(out), backward);
}

template <class T>
Var<T> sigmoid(Var<T> x) {
  Graph<T>& graph = graph_of(x, "sigmoid");
  BasicTensor<T> out(x.shape());
  const T* xv = x.value().raw();
  for (std::size_t i = 0; i < out.numel(); ++i) {
    const T v = xv[i];
    if (v >= T{0}) {
      out[i] = T{1} / (T{1} + std::exp(-v));
    } else {
      const T e = std::exp(v);
      out[i] = e / (T{1} + e);
    }
  }
  auto backward = [](const typename Graph<T>::BackwardArgs& a) {
    const T* y = a.output.raw();
    const T* go = a.grad_output.raw();
    T* gx = a.grad_inputs[0]->raw();
    for (std::size_t i = 0; i < a.output.numel(); ++i) {
      gx[i] += go[i] * y[i] * (T{1} - y[i]);
    }
  };
  return graph.record("sigmoid", {x}, std::move(out), backward);
}

template <class T>
Var<T> upsample_bilinear(Var<T> x, int factor) {
  Graph<T>& graph = graph_of(x, "upsample_bilinear");
  if (factor != 2) throw ShapeError("upsample_bilinear: factor must be 2");
  const Shape xs = x.shape();
  const Shape os{1, xs.c, xs.h * factor, xs.w * factor};
  auto ty = std::make_shared<Taps>(bilinear_taps(xs.h, factor));
  auto tx = std::make_shared<Taps>(bilinear_taps(xs.w, factor));

  BasicTensor<T> out(os);
  const auto& in = x.value();
  for (int c = 0; c < os.c; ++c) {
    for (int oy = 0; oy < os.h; ++oy) {
      const int y0 = ty->i0[oy], y1 = ty->i1[oy];
      const double wy0 = ty->w0[oy], wy1 = ty->w1[oy];
      for (int ox = 0; ox < os.w; ++ox) {
        const int x0 = tx->i0[ox], x1 = tx->i1[ox];
        const double wx0 = tx->w0[ox], wx1 = tx->w1[ox];
        const double v = wy0 * (wx0 * in.at(c, y0, x0) + wx1 * in.at(c, y0, x1)) +
                         wy1 * (wx0 * in.at(c, y1, x0) + wx1 * in.at(c, y1, x1));
        out.at(c, oy, ox) = static_cast<T>(v);
      }
    }
  }
  auto backward = [ty, tx, os](const typename Graph<T>::BackwardArgs& a) {
    BasicTensor<T>& gx = *a.grad_inputs[0];
    const auto& go = a.grad_output;
    for (int c = 0; c < os.c; ++c) {
      for (int oy = 0; oy < os.h; ++oy) {
        const int y0 = ty->i0[oy], y1 = ty->i1[oy];
        const double wy0 = ty->w0[oy], wy1 = ty->w1[oy];
        for (int ox = 0; ox < os.w; ++ox) {
          const int x0 = tx->i0[ox], x1 = tx->i1[ox];
          const double wx0 = tx->w0[ox], wx1 = tx->w1[ox];
          const double g = go.at(c, oy, ox);
          gx.at(c, y0, x0) += static_cast<T>(g * wy0 * wx0);
          gx.at(c, y0, x1) += static_cast<T>(g * wy0 * wx1);
          gx.at(c, y1, x0) += static_cast<T>(g * wy1 * wx0);
          gx.at(c, y1, x1) += static_cast<T>(g * wy1 * wx1);
        }
      }
    }
  };
  return graph.record("upsample_bilinear", {x}, std::move(out), backward);
}

template <class T>
Var<T> downsample_area(Var<T> x, int factor) {
  Graph<T>& graph = graph_of(x, "downsample_area");
  if (factor < 1) throw ShapeError("downsample_area: factor must be >= 1");
  const Shape xs = x.shape();
  if (xs.h % factor != 0 || xs.w % factor != 0) {
    throw ShapeError("downsample_area: extents " + xs.str() +
                     " not divisible by " + std::to_string(factor));
  }
  const Shape os{1, xs.c, xs.h / factor, xs.w / factor};
  const double norm = 1.0 / (static_cast<double>(factor) * factor);
  BasicTensor<T> out(os);
  const auto& in = x.value();
  for (int c = 0; c < os.c; ++c) {
    for (int oy = 0; oy < os.h; ++oy) {
      for (int ox = 0; ox < os.w; ++ox) {
        double s = 0.0;
        for (int dy = 0; dy < factor; ++dy) {
          for (int dx = 0; dx < factor; ++dx) {
            s += in.at(c, oy * factor + dy, ox * factor + dx);
          }
        }
        out.at(c, oy, ox) = static_cast<T>(s * norm);
      }
    }
  }
  auto backward = [factor, norm, os](const typename Graph<T>::BackwardArgs& a) {
    BasicTensor<T>& gx = *a.grad_inputs[0];
    const auto& go = a.grad_output;
    for (int c = 0; c < os.c; ++c) {
      for (int oy = 0; oy < os.h; ++oy) {
        for (int ox = 0; ox < os.w; ++ox) {
          const T g = static_cast<T>(go.at(c, oy, ox) * norm);
          for (int dy = 0; dy < factor; ++dy) {
            for (int dx = 0; dx < factor; ++dx) {
              gx.at(c, oy * factor + dy, ox * factor + dx) += g;
            }
          }
        }
      }
    }
  };
  return graph.record("downsample_area", {x}, std::move(out), backward);
}

template <class T>
Var<T> concat_channels(Var<T> a, Var<T> b, std::string label) {
  Graph<T>& graph = graph_of(a, "concat_channels");
  if (!b.valid()) return a;
  same_graph(a, b, "concat_channels");
  const Shape as = a.shape();
  const Shape bs = b.shape();
  if (as.n != bs.n || as.h != bs.h || as.w != bs.w) {
    throw ShapeError("concat_channels: spatial mismatch " + as.str() + " vs " +
                     bs.str());
  }
  BasicTensor<T> out(Shape{as.n, as.c + bs.c, as.h, as.w});
  const std::size_t na = a.value().numel();
  std::copy_n(a.value().raw(), na, out.raw());
  std::copy_n(b.value().raw(), b.value().numel(), out.raw() + na);
  auto backward = [na](const typename Graph<T>::BackwardArgs& args) {
    const T* go = args.grad_output.raw();
    if (auto* ga = args.grad_inputs[0]) {
      for (std::size_t i = 0; i < na; ++i) (*ga)[i] += go[i];
    }
    if (auto* gb = args.grad_inputs[1]) {
      for (std::size_t i = 0; i < gb->numel(); ++i) (*gb)[i] += go[na + i];
    }
  };
  return graph.record("concat", {a, b}, std::move(out), backward,
                      std::move(label));
}

template <class T>
Var<T> mse(Var<T> a, Var<T> b) {
  Graph<T>& graph = graph_of(a, "mse");
  same_graph(a, b, "mse");
  same_shape(a.value(), b.value(), "mse");
  const T* av = a.value().raw();
  const T* bv = b.value().raw();
  const std::size_t n = a.value().numel();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(av[i]) - bv[i];
    s += d * d;
  }
  auto out = BasicTensor<T>::scalar(static_cast<T>(s / static_cast<double>(n)));
  auto backward = [n](const typename Graph<T>::BackwardArgs& args) {
    const T* av = args.inputs[0]->raw();
    const T* bv = args.inputs[1]->raw();
    const double k = 2.0 * args.grad_output[0] / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = static_cast<double>(av[i]) - bv[i];
      if (auto* ga = args.grad_inputs[0]) (*ga)[i] += static_cast<T>(k * d);
      if (auto* gb = args.grad_inputs[1]) (*gb)[i] -= static_cast<T>(k * d);
    }
  };
  return graph.record("mse", {a, b}, std::move(out), backward);
}

template <class T>
Var<T> masked_mse(Var<T> a, Var<T> b, const BasicTensor<T>& mask) {
  Graph<T>& graph = graph_of(a, "masked_mse");
  same_graph(a, b, "masked_mse");
  same_shape(a.value(), b.value(), "masked_mse");
  same_shape(a.value(), mask, "masked_mse");
  auto m = std::make_shared<BasicTensor<T>>(mask);
  const T* av = a.value().raw();
  const T* bv = b.value().raw();
  const std::size_t n = a.value().numel();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (static_cast<double>(av[i]) - bv[i]) * (*m)[i];
    s += d * d;
  }
  auto out = BasicTensor<T>::scalar(static_cast<T>(s / static_cast<double>(n)));
  auto backward = [n, m](const typename Graph<T>::BackwardArgs& args) {
    const T* av = args.inputs[0]->raw();
    const T* bv = args.inputs[1]->raw();
    const double k = 2.0 * args.grad_output[0] / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double mi = (*m)[i];
      const double d = (static_cast<double>(av[i]) - bv[i]) * mi * mi;
      if (auto* ga = args.grad_inputs[0]) (*ga)[i] += static_cast<T>(k * d);
      if (auto* gb = args.grad_inputs[1]) (*gb)[i] -= static_cast<T>(k * d);
    }
  };
  return graph.record("masked_mse", {a, b}, std::move(out), backward);
}

template <class T>
Var<T> add(Var<T> a, Var<T> b) {
  Graph<T>& graph = graph_of(a, "add");
  same_graph(a, b, "add");
  same_shape(a.value(), b.value(), "add");
  BasicTensor<T> out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) {
    out[i] = a.value()[i] + b.value()[i];
  }
  auto backward = [](const typename Graph<T>::BackwardArgs& args) {
    for (auto* g : args.grad_inputs) {
      if (g == nullptr) continue;
      for (std::size_t i = 0; i < g->numel(); ++i) (*g)[i] += args.grad_output[i];
    }
  };
  return graph.record("add", {a, b}, std::move(out), backward);
}

template <class T>
Var<T> scale(Var<T> a, double s) {
  Graph<T>& graph = graph_of(a, "scale");
  BasicTensor<T> out(a.shape());
  const T k = static_cast<T>(s);
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = k * a.value()[i];
  auto backward = [k](const typename Graph<T>::BackwardArgs& args) {
    auto& g = *args.grad_inputs[0];
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += k * args.grad_output[i];
  };
  return graph.record("scale", {a}, std::move(out), backward);
}

template <class T>
Var<T> mul(Var<T> a, Var<T> b) {
  Graph<T>& graph = graph_of(a, "mul");
  same_graph(a, b, "mul");
  same_shape(a.value(), b.value(), "mul");
  BasicTensor<T> out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) {
    out[i] = a.value()[i] * b.value()[i];
  }
  auto backward = [](const typename Graph<T>::BackwardArgs& args) {
    const auto& av = *args.inputs[0];
    const auto& bv = *args.inputs[1];
    for (std::size_t i = 0; i < av.numel(); ++i) {
      if (auto* ga = args.grad_inputs[0]) (*ga)[i] += args.grad_output[i] * bv[i];
      if (auto* gb = args.grad_inputs[1]) (*gb)[i] += args.grad_output[i] * av[i];
    }
  };
  return graph.record("mul", {a, b}, std::move(out), backward);
}

template <class T>
Var<T> sum(Var<T> a) {
  Graph<T>& graph = graph_of(a, "sum");
  double s = 0.0;
  for (T v : a.value().data()) s += v;
  auto backward = [](const typename Graph<T>::BackwardArgs& args) {
    auto& g = *args.grad_inputs[0];
    const T go = args.grad_output[0];
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += go;
  };
  return graph.record("sum", {a}, BasicTensor<T>::scalar(static_cast<T>(s)),
                      backward);
}

#define MED_INSTANTIATE_OPS(T)                                              \
  template Var<T> conv2d(Var<T>, Var<T>, Var<T>, int);                      \
  template Var<T> batch_norm(Var<T>, Var<T>, Var<T>, double);               \
  template Var<T> leaky_relu(Var<T>, double);                               \
  template Var<T> sigmoid(Var<T>);                                          \
  template Var<T> upsample_bilinear(Var<T>, int);                           \
  template Var<T> downsample_area(Var<T>, int);                             \
  template Var<T> concat_channels(Var<T>, Var<T>, std::string);             \
  template Var<T> mse(Var<T>, Var<T>);                                      \
  template Var<T> masked_mse(Var<T>, Var<T>, const BasicTensor<T>&);        \
  template Var<T> add(Var<T>, Var<T>);                                      \
  template Var<T> scale(Var<T>, double);                                    \
  template Var<T> mul(Var<T>, Var<T>);                                      \
  template Var<T> sum(Var<T>);

MED_INSTANTIATE_OPS(float)
MED_INSTANTIATE_OPS(double)

#undef MED_INSTANTIATE_OPS

}  // namespace med::ad
