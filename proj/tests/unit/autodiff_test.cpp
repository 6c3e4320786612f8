#include <gtest/gtest.h>

#include <cmath>

#include "med/error.hpp"
#include "med/gradcheck.hpp"
#include "med/ops.hpp"
#include "med/rng.hpp"

namespace {

using med::Rng;
using med::ad::Graph;
using med::ad::Shape;
using med::ad::Tensor;
using med::ad::Tensor64;
using med::ad::Var;

Tensor random_tensor(Shape s, Rng& rng) {
  Tensor t(s);
  for (auto& v : t.data()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return t;
}

// Direct "same"-padded convolution.
Tensor conv_oracle(const Tensor& x, const Tensor& w, const Tensor& b, int stride) {
  const int cin = x.channels(), h = x.height(), wd = x.width();
  const int cout = w.shape().n, k = w.shape().h, pad = (k - 1) / 2;
  const int oh = (h + stride - 1) / stride, ow = (wd + stride - 1) / stride;
  Tensor out({1, cout, oh, ow});
  for (int o = 0; o < cout; ++o) {
    for (int y = 0; y < oh; ++y) {
      for (int xx = 0; xx < ow; ++xx) {
        double acc = b[o];
        for (int i = 0; i < cin; ++i) {
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              const int sy = y * stride + ky - pad, sx = xx * stride + kx - pad;
              if (sy < 0 || sy >= h || sx < 0 || sx >= wd) continue;
              acc += static_cast<double>(w[((o * cin + i) * k + ky) * k + kx]) * x.at(i, sy, sx);
            }
          }
        }
        out.at(o, y, xx) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

TEST(Conv2d, IdentityKernel) {
  Graph<float> g;
  Tensor x({1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  auto y = med::ad::conv2d(g.constant(x), g.constant(Tensor({1, 1, 1, 1}, 1.0f)),
                           g.constant(Tensor({1, 1, 1, 1})), 1);
  EXPECT_EQ(y.value(), x);
}

TEST(Conv2d, ConstantImageInterior) {
  Graph<float> g;
  const float c = 0.37f;
  auto y = med::ad::conv2d(g.constant(Tensor({1, 1, 5, 5}, c)),
                           g.constant(Tensor({1, 1, 3, 3}, 1.0f)),
                           g.constant(Tensor({1, 1, 1, 1})), 1);
  for (int r = 1; r < 4; ++r) {
    for (int q = 1; q < 4; ++q) EXPECT_FLOAT_EQ(y.value().at(0, r, q), 9 * c);
  }
  EXPECT_FLOAT_EQ(y.value().at(0, 0, 0), 4 * c);
}

TEST(Conv2d, MatchesNestedLoopOracle) {
  Rng rng(3);
  Graph<float> g;
  Tensor x = random_tensor({1, 4, 5, 5}, rng);
  Tensor w = random_tensor({2, 4, 3, 3}, rng);
  Tensor b = random_tensor({1, 2, 1, 1}, rng);
  auto y = med::ad::conv2d(g.constant(x), g.constant(w), g.constant(b), 1);
  const Tensor ref = conv_oracle(x, w, b, 1);
  for (std::size_t i = 0; i < ref.numel(); ++i) EXPECT_NEAR(y.value()[i], ref[i], 1e-5);
}

TEST(Conv2d, OracleOnAllSmallShapes) {
  Rng rng(4);
  for (int cout = 1; cout <= 2; ++cout) {
    for (int cin = 1; cin <= 3; ++cin) {
      for (int h = 1; h <= 6; ++h) {
        for (int w = 1; w <= 6; ++w) {
          for (int k : {1, 3}) {
            for (int stride : {1, 2}) {
              Graph<float> g;
              Tensor x = random_tensor({1, cin, h, w}, rng);
              Tensor wt = random_tensor({cout, cin, k, k}, rng);
              Tensor b = random_tensor({1, cout, 1, 1}, rng);
              auto y = med::ad::conv2d(g.constant(x), g.constant(wt), g.constant(b), stride);
              const Tensor ref = conv_oracle(x, wt, b, stride);
              ASSERT_EQ(y.shape(), ref.shape());
              for (std::size_t i = 0; i < ref.numel(); ++i) {
                ASSERT_NEAR(y.value()[i], ref[i], 1e-5)
                    << cout << "x" << cin << "x" << h << "x" << w << " k" << k << " s" << stride;
              }
            }
          }
        }
      }
    }
  }
}

TEST(BatchNorm, ConstantChannelIsZero) {
  Graph<float> g;
  auto y = med::ad::batch_norm(g.constant(Tensor({1, 2, 3, 3}, 0.8f)),
                               g.constant(Tensor({1, 2, 1, 1}, 1.0f)),
                               g.constant(Tensor({1, 2, 1, 1})));
  for (float v : y.value().data()) EXPECT_EQ(v, 0.0f);
}

TEST(BatchNorm, ZeroGammaGivesBeta) {
  Rng rng(5);
  Graph<float> g;
  Tensor beta({1, 3, 1, 1}, {0.5f, -1.0f, 2.0f});
  auto y = med::ad::batch_norm(g.constant(random_tensor({1, 3, 4, 4}, rng)),
                               g.constant(Tensor({1, 3, 1, 1})), g.constant(beta));
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 16; ++i) EXPECT_EQ(y.value()[c * 16 + i], beta[c]);
  }
}

TEST(BatchNorm, NormalizedMoments) {
  Rng rng(6);
  Graph<double> g;
  Tensor64 x({1, 3, 8, 8});
  for (auto& v : x.data()) v = rng.uniform(-2.0, 5.0);
  auto y = med::ad::batch_norm(g.constant(x), g.constant(Tensor64({1, 3, 1, 1}, 1.0)),
                               g.constant(Tensor64({1, 3, 1, 1})), 1e-5);
  for (int c = 0; c < 3; ++c) {
    double mean = 0.0, var = 0.0;
    for (int i = 0; i < 64; ++i) mean += y.value()[c * 64 + i];
    mean /= 64;
    for (int i = 0; i < 64; ++i) var += std::pow(y.value()[c * 64 + i] - mean, 2);
    var /= 64;
    EXPECT_LT(std::abs(mean), 1e-6);
    EXPECT_LT(std::abs(var - 1.0), 1e-3);
  }
}

TEST(LeakyRelu, Values) {
  Graph<float> g;
  auto pos = med::ad::leaky_relu(g.constant(Tensor({1, 1, 1, 3}, {0.0f, 1.5f, 3.0f})), 0.2);
  EXPECT_EQ(pos.value(), Tensor({1, 1, 1, 3}, {0.0f, 1.5f, 3.0f}));
  auto zero_slope = med::ad::leaky_relu(g.constant(Tensor({1, 1, 1, 1}, -1.0f)), 0.0);
  EXPECT_EQ(zero_slope.value().item(), 0.0f);
  auto neg = med::ad::leaky_relu(g.constant(Tensor({1, 1, 1, 1}, -2.0f)), 0.2);
  EXPECT_FLOAT_EQ(neg.value().item(), -0.4f);
}

TEST(UpsampleBilinear, ConstantAndSinglePixel) {
  Graph<float> g;
  auto c = med::ad::upsample_bilinear(g.constant(Tensor({1, 2, 3, 2}, 0.3f)));
  EXPECT_EQ(c.shape(), (Shape{1, 2, 6, 4}));
  for (float v : c.value().data()) EXPECT_FLOAT_EQ(v, 0.3f);
  auto s = med::ad::upsample_bilinear(g.constant(Tensor({1, 1, 1, 1}, 0.7f)));
  EXPECT_EQ(s.value(), Tensor({1, 1, 2, 2}, 0.7f));
}

TEST(UpsampleBilinear, RampHandValues) {
  // Source [[0,1],[2,3]]; output sample X maps to (X + 0.5) / 2 - 0.5, clamped
  // to [0, 1], so the interpolation weights per axis are 0, 1/4, 3/4, 1.
  Graph<float> g;
  auto y = med::ad::upsample_bilinear(g.constant(Tensor({1, 1, 2, 2}, {0, 1, 2, 3})));
  const float f[4] = {0.0f, 0.25f, 0.75f, 1.0f};
  for (int r = 0; r < 4; ++r) {
    for (int q = 0; q < 4; ++q) EXPECT_FLOAT_EQ(y.value().at(0, r, q), f[q] + 2.0f * f[r]);
  }
}

TEST(DownsampleArea, Values) {
  Graph<float> g;
  auto c = med::ad::downsample_area(g.constant(Tensor({1, 3, 8, 4}, 0.6f)), 2);
  EXPECT_EQ(c.value(), Tensor({1, 3, 4, 2}, 0.6f));
  auto b = med::ad::downsample_area(g.constant(Tensor({1, 1, 2, 2}, {0, 1, 2, 3})), 2);
  EXPECT_FLOAT_EQ(b.value().item(), 1.5f);
}

TEST(DownsampleArea, FactorFourIsTwoFactorTwo) {
  Rng rng(7);
  Graph<double> g;
  Tensor64 x({1, 2, 8, 12});
  for (auto& v : x.data()) v = rng.uniform();
  auto once = med::ad::downsample_area(g.constant(x), 4);
  auto twice = med::ad::downsample_area(med::ad::downsample_area(g.constant(x), 2), 2);
  for (std::size_t i = 0; i < once.value().numel(); ++i) {
    EXPECT_NEAR(once.value()[i], twice.value()[i], 1e-12);
  }
}

TEST(DownsampleArea, InvertsBilinearOnConstants) {
  Graph<float> g;
  auto x = g.constant(Tensor({1, 3, 4, 4}, 0.42f));
  auto y = med::ad::downsample_area(med::ad::upsample_bilinear(x), 2);
  for (float v : y.value().data()) EXPECT_FLOAT_EQ(v, 0.42f);
}

TEST(Concat, ShapesAndEmpty) {
  Graph<float> g;
  auto a = g.constant(Tensor({1, 3, 4, 4}, 1.0f));
  auto b = g.constant(Tensor({1, 2, 4, 4}, 2.0f));
  EXPECT_EQ(med::ad::concat_channels(a, b).shape(), (Shape{1, 5, 4, 4}));
  const auto before = g.size();
  auto same = med::ad::concat_channels(a, Var<float>{});
  EXPECT_EQ(same.id, a.id);
  EXPECT_EQ(g.size(), before);
}

TEST(Concat, SumBackwardGivesOnes) {
  Graph<double> g;
  auto a = g.leaf(Tensor64({1, 2, 3, 3}, 0.5), true);
  auto b = g.leaf(Tensor64({1, 1, 3, 3}, -0.5), true);
  g.backward(med::ad::sum(med::ad::concat_channels(a, b)));
  for (double v : g.grad(a).data()) EXPECT_EQ(v, 1.0);
  for (double v : g.grad(b).data()) EXPECT_EQ(v, 1.0);
}

TEST(Mse, Values) {
  Graph<double> g;
  auto a = g.constant(Tensor64({1, 1, 1, 1}, 1.0));
  EXPECT_EQ(med::ad::mse(a, a).value().item(), 0.0);
  auto b = g.constant(Tensor64({1, 1, 1, 1}, 0.5));
  EXPECT_EQ(med::ad::mse(a, b).value().item(), 0.25);

  Rng rng(8);
  Tensor64 x({1, 3, 5, 7}), y({1, 3, 5, 7});
  for (auto& v : x.data()) v = rng.uniform();
  for (auto& v : y.data()) v = rng.uniform();
  std::vector<double> d;
  for (std::size_t i = 0; i < x.numel(); ++i) d.push_back(x[i] - y[i]);
  double s = 0.0;
  for (double v : d) s += v * v;
  EXPECT_NEAR(med::ad::mse(g.constant(x), g.constant(y)).value().item(), s / d.size(), 1e-15);
}

TEST(Backward, SquareSum) {
  Graph<double> g;
  Tensor64 x({1, 1, 2, 3}, {1, -2, 3, 0.5, -0.25, 4});
  auto v = g.leaf(x, true);
  g.backward(med::ad::sum(med::ad::mul(v, v)));
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_EQ(g.grad(v)[i], 2 * x[i]);
}

TEST(Backward, LeafOffPathHasZeroGrad) {
  Graph<double> g;
  auto on = g.leaf(Tensor64({1, 1, 2, 2}, 1.0), true);
  auto off = g.leaf(Tensor64({1, 1, 2, 2}, 3.0), true);
  g.backward(med::ad::sum(on));
  for (double v : g.grad(off).data()) EXPECT_EQ(v, 0.0);
}

TEST(Backward, RejectsNonScalarRootAndRepeat) {
  Graph<double> g;
  auto v = g.leaf(Tensor64({1, 1, 2, 2}, 1.0), true);
  EXPECT_THROW(g.backward(v), med::GraphError);
  auto s = med::ad::sum(v);
  g.backward(s);
  EXPECT_THROW(g.backward(s), med::GraphError);
}

TEST(Backward, NonFiniteForwardThrows) {
  Graph<float> g;
  auto x = g.constant(Tensor({1, 1, 1, 1}, 3e38f));
  EXPECT_THROW(med::ad::scale(x, 10.0), med::NumericalError);
}

TEST(Backward, Linearity) {
  Rng rng(9);
  Tensor64 x({1, 2, 4, 4}), w({3, 2, 3, 3}), b({1, 3, 1, 1});
  for (auto* t : {&x, &w, &b}) {
    for (auto& v : t->data()) v = rng.uniform(-1, 1);
  }
  auto grads = [&](double alpha) {
    Graph<double> g;
    auto vx = g.leaf(x, true), vw = g.leaf(w, true), vb = g.leaf(b, true);
    auto y = med::ad::sigmoid(med::ad::conv2d(vx, vw, vb, 2));
    g.backward(med::ad::scale(med::ad::sum(med::ad::mul(y, y)), alpha));
    return std::vector<Tensor64>{g.grad(vx), g.grad(vw), g.grad(vb)};
  };
  const auto base = grads(1.0);
  const auto scaled = grads(-2.5);
  for (std::size_t k = 0; k < base.size(); ++k) {
    for (std::size_t i = 0; i < base[k].numel(); ++i) {
      EXPECT_NEAR(scaled[k][i], -2.5 * base[k][i], 1e-12);
    }
  }
}

TEST(Backward, Deterministic) {
  auto run = [] {
    Rng rng(10);
    Graph<float> g;
    auto x = g.leaf(random_tensor({1, 3, 8, 8}, rng), true);
    auto w = g.leaf(random_tensor({4, 3, 3, 3}, rng), true);
    auto b = g.leaf(random_tensor({1, 4, 1, 1}, rng), true);
    auto y = med::ad::upsample_bilinear(med::ad::leaky_relu(med::ad::conv2d(x, w, b, 2), 0.2));
    g.backward(med::ad::sum(med::ad::mul(y, y)));
    return std::make_pair(y.value(), g.grad(w));
  };
  EXPECT_EQ(run(), run());
}

TEST(Gradcheck, EveryOpPasses) {
  for (const auto& c : med::op_cases(1)) {
    const auto r = med::check_gradients(c);
    EXPECT_TRUE(r.passed) << r.name << " " << r.max_rel_error;
    EXPECT_EQ(r.skipped, 0u) << r.name;
  }
}

TEST(Gradcheck, DetectsWrongGradient) {
  auto c = med::graph_case("bad_square", {Tensor64({1, 1, 2, 2}, {0.3, -0.7, 1.1, 0.2})},
                           [](Graph<double>& g, const std::vector<Var<double>>& v) {
                             const Tensor64 x = v[0].value();
                             Tensor64 y = x;
                             for (auto& e : y.data()) e = e * e;
                             // Backward claims d(x^2)/dx = x.
                             auto out = g.record(
                                 "bad_square", {v[0]}, y,
                                 [x](const Graph<double>::BackwardArgs& a) {
                                   for (std::size_t i = 0; i < x.numel(); ++i) {
                                     (*a.grad_inputs[0])[i] += a.grad_output[i] * x[i];
                                   }
                                 });
                             return med::ad::sum(out);
                           });
  const auto r = med::check_gradients(c);
  EXPECT_FALSE(r.passed);
  EXPECT_GT(r.max_rel_error, 0.1);
}

}  // namespace
