#include <string>

#include "med/error.hpp"
#include "med/ops.hpp"
#include "med/task.hpp"

namespace med {

namespace {

using ad::Var;

template <class T>
void require_heads(const Heads<T>& heads, const PyramidTargets& targets, const char* loss) {
  if (heads.size() == 0 || heads.size() > 3) {
    throw ShapeError(std::string(loss) + ": expected 1-3 heads");
  }
  if (targets.targets.size() < heads.size()) {
    throw ShapeError(std::string(loss) + ": fewer targets than heads");
  }
}

template <class T>
Var<T> constant(const Heads<T>& heads, const ad::Tensor& t, const char* label) {
  return heads[0].graph->constant(t.template cast<T>(), label);
}

template <class T>
Var<T> accumulate(Var<T> total, Var<T> term) {
  return total.valid() ? ad::add(total, term) : term;
}

template <class T>
Var<T> weighted_sum(const Heads<T>& heads, const PyramidTargets& targets,
                    const std::array<double, 3>& lambda, const char* name) {
  require_heads(heads, targets, name);
  Var<T> total;
  for (std::size_t l = 0; l < heads.size(); ++l) {
    Var<T> term = ad::mse(heads[l], constant(heads, targets.targets[l], "target"));
    total = accumulate(total, ad::scale(term, lambda[l]));
  }
  return total;
}

}  // namespace

template <class T>
Var<T> loss_denoise(const Heads<T>& heads, const PyramidTargets& targets,
                    const std::array<double, 3>& lambda) {
  return weighted_sum(heads, targets, lambda, "loss_denoise");
}

template <class T>
Var<T> loss_sr(const Heads<T>& heads, const PyramidTargets& targets,
               const std::array<double, 3>& lambda) {
  return weighted_sum(heads, targets, lambda, "loss_sr");
}

template <class T>
Var<T> loss_inpaint(const Heads<T>& heads, const PyramidTargets& targets,
                    const std::array<double, 3>& lambda) {
  require_heads(heads, targets, "loss_inpaint");
  if (targets.masks.size() < heads.size()) {
    throw ShapeError("loss_inpaint: fewer masks than heads");
  }
  Var<T> total;
  for (std::size_t l = 0; l < heads.size(); ++l) {
    Var<T> term = ad::masked_mse(heads[l], constant(heads, targets.targets[l], "target"),
                                 targets.masks[l].template cast<T>());
    total = accumulate(total, ad::scale(term, lambda[l]));
  }
  return total;
}

template <class T>
Var<T> loss_flash(const Heads<T>& heads, const PyramidTargets& targets, double lambda1,
                  double lambda2) {
  Var<T> pyramid = weighted_sum(heads, targets, {1.0, 1.0, 1.0}, "loss_flash");
  Var<T> flash = ad::mse(heads[0], constant(heads, targets.flash, "flash"));
  return ad::add(ad::scale(pyramid, lambda1), ad::scale(flash, lambda2));
}

template <class T>
Var<T> task_loss(const TaskSpec& task, const Heads<T>& heads, const PyramidTargets& targets) {
  switch (task.kind) {
    case TaskKind::kDenoise:
      return loss_denoise(heads, targets, task.lambda);
    case TaskKind::kSuperResolve:
      return loss_sr(heads, targets, task.lambda);
    case TaskKind::kInpaint:
      return loss_inpaint(heads, targets, task.lambda);
    case TaskKind::kFlash:
      return loss_flash(heads, targets, task.lambda[0], task.lambda[1]);
  }
  throw ShapeError("task_loss: unknown task kind");
}

#define MED_INSTANTIATE_LOSSES(T)                                                      \
  template Var<T> loss_denoise(const Heads<T>&, const PyramidTargets&,                 \
                               const std::array<double, 3>&);                          \
  template Var<T> loss_sr(const Heads<T>&, const PyramidTargets&,                      \
                          const std::array<double, 3>&);                               \
  template Var<T> loss_inpaint(const Heads<T>&, const PyramidTargets&,                 \
                               const std::array<double, 3>&);                          \
  template Var<T> loss_flash(const Heads<T>&, const PyramidTargets&, double, double);  \
  template Var<T> task_loss(const TaskSpec&, const Heads<T>&, const PyramidTargets&);

MED_INSTANTIATE_LOSSES(float)
MED_INSTANTIATE_LOSSES(double)

#undef MED_INSTANTIATE_LOSSES

}  // namespace med
