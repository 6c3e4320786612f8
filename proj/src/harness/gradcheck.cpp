#include "med/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>

#include "med/med_network.hpp"
#include "med/ops.hpp"
#include "med/rng.hpp"
#include "med/task.hpp"

namespace med {

namespace {

using ad::Graph;
using ad::Shape;
using ad::Tensor64;
using ad::Var;

Tensor64 random_tensor(Shape s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor64 t(s);
  for (auto& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

// Values bounded away from zero so finite differences never straddle a kink.
Tensor64 off_zero(Shape s, Rng& rng) {
  Tensor64 t(s);
  for (auto& v : t.data()) {
    const double m = rng.uniform(0.1, 1.0);
    v = rng.uniform() < 0.5 ? -m : m;
  }
  return t;
}

// Reduces a tensor to a scalar with fixed random weights so every output
// element carries a distinct gradient.
Var<double> project(Graph<double>& g, Var<double> y, std::uint64_t seed) {
  Rng rng(seed);
  return ad::sum(ad::mul(y, g.constant(random_tensor(y.shape(), rng))));
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

KinkPattern kink_pattern(const Graph<double>& graph) {
  KinkPattern pattern;
  for (int id = 0; id < static_cast<int>(graph.size()); ++id) {
    if (graph.op(id) != "leaky_relu") continue;
    const auto& x = graph.value(graph.inputs(id)[0]);
    for (double v : x.data()) pattern.push_back(v > 0.0);
  }
  return pattern;
}

GradcheckCase graph_case(
    std::string name, std::vector<Tensor64> leaves,
    std::function<Var<double>(Graph<double>&, const std::vector<Var<double>>&)> build) {
  GradcheckCase c;
  c.name = std::move(name);
  c.leaves = std::move(leaves);
  c.evaluate = [build](const std::vector<Tensor64>& values, std::vector<Tensor64>* grads,
                       KinkPattern* kinks) {
    Graph<double> g;
    std::vector<Var<double>> vars;
    for (const auto& v : values) vars.push_back(g.leaf(v, grads != nullptr));
    Var<double> loss = build(g, vars);
    const double out = loss.value().item();
    if (kinks) *kinks = kink_pattern(g);
    if (grads) {
      g.backward(loss);
      grads->clear();
      for (const auto& v : vars) grads->push_back(g.grad(v));
    }
    return out;
  };
  return c;
}

GradcheckResult check_gradients(const GradcheckCase& c, const GradcheckOptions& options) {
  GradcheckResult r;
  r.name = c.name;
  std::vector<Tensor64> analytic;
  KinkPattern base;
  c.evaluate(c.leaves, &analytic, &base);

  std::vector<Tensor64> probe = c.leaves;
  KinkPattern kinks;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    std::vector<double> ad_vals, fd_vals, diff;
    for (std::size_t i = 0; i < probe[k].numel(); ++i) {
      const double saved = probe[k][i];
      double h = options.step;
      std::optional<double> fd;
      for (int attempt = 0; attempt <= options.max_halvings; ++attempt, h *= 0.5) {
        probe[k][i] = saved + h;
        const double up = c.evaluate(probe, nullptr, &kinks);
        bool crossed = kinks != base;
        probe[k][i] = saved - h;
        const double down = c.evaluate(probe, nullptr, &kinks);
        crossed = crossed || kinks != base;
        if (!crossed) {
          fd = (up - down) / (2.0 * h);
          break;
        }
      }
      probe[k][i] = saved;
      if (h != options.step) ++r.reduced;
      if (!fd) {
        ++r.skipped;
        continue;
      }
      ad_vals.push_back(analytic[k][i]);
      fd_vals.push_back(*fd);
      diff.push_back(analytic[k][i] - *fd);
    }
    const double scale = std::max({norm(ad_vals), norm(fd_vals), 1e-8});
    r.max_rel_error = std::max(r.max_rel_error, norm(diff) / scale);
    r.entries += probe[k].numel();
  }
  r.passed = r.max_rel_error < options.tolerance;
  return r;
}

std::vector<GradcheckCase> op_cases(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<GradcheckCase> cases;

  for (int stride : {1, 2}) {
    cases.push_back(graph_case(
        "conv2d/stride" + std::to_string(stride),
        {random_tensor({1, 3, 6, 5}, rng), random_tensor({2, 3, 3, 3}, rng),
         random_tensor({1, 2, 1, 1}, rng)},
        [stride](Graph<double>& g, const std::vector<Var<double>>& v) {
          return project(g, ad::conv2d(v[0], v[1], v[2], stride), 11);
        }));
  }
  cases.push_back(graph_case(
      "batch_norm",
      {random_tensor({1, 3, 4, 5}, rng), random_tensor({1, 3, 1, 1}, rng, 0.5, 1.5),
       random_tensor({1, 3, 1, 1}, rng)},
      [](Graph<double>& g, const std::vector<Var<double>>& v) {
        return project(g, ad::batch_norm(v[0], v[1], v[2], 1e-5), 12);
      }));
  cases.push_back(graph_case("leaky_relu", {off_zero({1, 2, 4, 4}, rng)},
                             [](Graph<double>& g, const std::vector<Var<double>>& v) {
                               return project(g, ad::leaky_relu(v[0], 0.2), 13);
                             }));
  cases.push_back(graph_case("sigmoid", {random_tensor({1, 2, 4, 4}, rng, -3.0, 3.0)},
                             [](Graph<double>& g, const std::vector<Var<double>>& v) {
                               return project(g, ad::sigmoid(v[0]), 14);
                             }));
  cases.push_back(graph_case("upsample_bilinear", {random_tensor({1, 2, 3, 4}, rng)},
                             [](Graph<double>& g, const std::vector<Var<double>>& v) {
                               return project(g, ad::upsample_bilinear(v[0], 2), 15);
                             }));
  for (int factor : {2, 4}) {
    cases.push_back(graph_case("downsample_area/x" + std::to_string(factor),
                               {random_tensor({1, 2, 8, 8}, rng)},
                               [factor](Graph<double>& g, const std::vector<Var<double>>& v) {
                                 return project(g, ad::downsample_area(v[0], factor), 16);
                               }));
  }
  cases.push_back(graph_case(
      "concat", {random_tensor({1, 2, 3, 3}, rng), random_tensor({1, 3, 3, 3}, rng)},
      [](Graph<double>& g, const std::vector<Var<double>>& v) {
        return project(g, ad::concat_channels(v[0], v[1]), 17);
      }));
  cases.push_back(graph_case(
      "mse", {random_tensor({1, 3, 4, 4}, rng), random_tensor({1, 3, 4, 4}, rng)},
      [](Graph<double>&, const std::vector<Var<double>>& v) { return ad::mse(v[0], v[1]); }));
  Tensor64 mask({1, 3, 4, 4});
  for (auto& m : mask.data()) m = rng.uniform() < 0.5 ? 0.0 : 1.0;
  cases.push_back(graph_case(
      "masked_mse", {random_tensor({1, 3, 4, 4}, rng), random_tensor({1, 3, 4, 4}, rng)},
      [mask](Graph<double>&, const std::vector<Var<double>>& v) {
        return ad::masked_mse(v[0], v[1], mask);
      }));
  cases.push_back(graph_case(
      "add", {random_tensor({1, 2, 3, 3}, rng), random_tensor({1, 2, 3, 3}, rng)},
      [](Graph<double>& g, const std::vector<Var<double>>& v) {
        return project(g, ad::add(v[0], v[1]), 18);
      }));
  cases.push_back(graph_case("scale", {random_tensor({1, 2, 3, 3}, rng)},
                             [](Graph<double>& g, const std::vector<Var<double>>& v) {
                               return project(g, ad::scale(v[0], -1.7), 19);
                             }));
  cases.push_back(graph_case(
      "mul", {random_tensor({1, 2, 3, 3}, rng), random_tensor({1, 2, 3, 3}, rng)},
      [](Graph<double>& g, const std::vector<Var<double>>& v) {
        return project(g, ad::mul(v[0], v[1]), 20);
      }));
  cases.push_back(graph_case("sum", {random_tensor({1, 2, 3, 3}, rng)},
                             [](Graph<double>&, const std::vector<Var<double>>& v) {
                               return ad::sum(v[0]);
                             }));
  return cases;
}

std::vector<GradcheckCase> network_cases(const MedSpec& spec_in, int size) {
  MedSpec spec = spec_in;
  auto net = std::make_shared<MedNetwork>(MedNetwork::build(spec));
  const auto params = net->parameters_as<double>();
  std::vector<Tensor64> leaves;
  for (const auto& p : params) leaves.push_back(p.value);

  Rng rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  auto image = [&](int s) {
    ImageBuffer img(s, s);
    for (auto& v : img.data()) v = static_cast<float>(rng.uniform());
    return img;
  };
  auto z = std::make_shared<Tensor64>(
      random_tensor({1, spec.input_channels, size, size}, rng, 0.0, 0.1));

  struct TaskCase {
    const char* name;
    TaskSpec task;
  };
  std::vector<TaskCase> tasks;
  {
    TaskSpec t;
    t.kind = TaskKind::kDenoise;
    t.corrupted = image(size);
    tasks.push_back({"network:loss_denoise", t});
  }
  {
    TaskSpec t;
    t.kind = TaskKind::kSuperResolve;
    t.scale = 2;
    t.corrupted = image(size / 2);
    tasks.push_back({"network:loss_sr", t});
  }
  {
    TaskSpec t;
    t.kind = TaskKind::kInpaint;
    t.corrupted = image(size);
    t.mask = Mask(size, size);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) t.mask.at(y, x) = rng.uniform() < 0.3 ? 0 : 1;
    }
    tasks.push_back({"network:loss_inpaint", t});
  }
  {
    TaskSpec t;
    t.kind = TaskKind::kFlash;
    t.corrupted = image(size);
    t.flash = image(size);
    t.lambda = {0.7, 0.3, 0.0};
    tasks.push_back({"network:loss_flash", t});
  }

  std::vector<GradcheckCase> cases;
  for (auto& tc : tasks) {
    auto task = std::make_shared<TaskSpec>(tc.task);
    auto targets = std::make_shared<PyramidTargets>(build_targets(*task, spec.levels()));
    GradcheckCase c;
    c.name = tc.name;
    c.leaves = leaves;
    c.evaluate = [net, z, task, targets](const std::vector<Tensor64>& values,
                                         std::vector<Tensor64>* grads, KinkPattern* kinks) {
      auto ps = net->parameters_as<double>();
      for (std::size_t k = 0; k < ps.size(); ++k) {
        ps[k].value = values[k];
        ps[k].zero_grad();
      }
      Graph<double> g;
      Heads<double> heads = net->forward(g, ps, g.constant(*z));
      Var<double> loss = task_loss(*task, heads, *targets);
      const double out = loss.value().item();
      if (kinks) *kinks = kink_pattern(g);
      if (grads) {
        g.backward(loss);
        grads->clear();
        for (const auto& p : ps) grads->push_back(p.grad);
      }
      return out;
    };
    cases.push_back(std::move(c));
  }
  return cases;
}

MedSpec default_gradcheck_spec() {
  MedSpec s;
  s.generator = {3, 4};
  s.enhancers = {{2, 4}, {2, 4}};
  s.skip = SkipMode::kIntra;
  s.input_channels = 3;
  s.seed = 7;
  return s;
}

}  // namespace med
