#include "sfd/core/autograd.hpp"

#include <algorithm>
#include <fmt/format.h>

#include "sfd/core/error.hpp"

namespace sfd {
namespace {
thread_local GradTape* t_active = nullptr;
}

GradTape* active_tape() { return t_active; }

TapeScope::TapeScope(GradTape& tape) : previous_(t_active) { t_active = &tape; }
TapeScope::~TapeScope() { t_active = previous_; }

NoGradScope::NoGradScope() : previous_(t_active) { t_active = nullptr; }
NoGradScope::~NoGradScope() { t_active = previous_; }

void GradTape::record(Entry entry) { entries_.push_back(std::move(entry)); }

void GradTape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw ContractError(fmt::format("backward needs a scalar loss, got shape {}",
                                    loss.defined() ? shape_str(loss.shape()) : "undefined"));
  }
  const auto& root = loss.impl();
  if (!root->requires_grad) throw ContractError("backward on a loss that does not depend on any parameter");
  auto seed = root->grad_buffer();
  seed[0] += 1.0f;

  visits_.clear();
  for (std::size_t k = entries_.size(); k-- > 0;) {
    auto& e = entries_[k];
    visits_.push_back(k);
    bool any = std::any_of(e.outputs.begin(), e.outputs.end(), [](const auto& o) { return !o->grad.empty(); });
    if (!any) continue;
    for (auto& o : e.outputs) o->grad_buffer();
    e.backward();
    for (auto& in : e.inputs) {
      if (in->requires_grad && in->is_leaf) {
        in->grad_buffer();
        check_finite(in->grad, e.name);
      }
    }
  }
  // Leaves that appeared on the tape but received no contribution still get a zero buffer.
  for (auto& e : entries_) {
    for (auto& in : e.inputs) {
      if (in->requires_grad && in->is_leaf) in->grad_buffer();
    }
  }
  entries_.clear();
}

void backward(const Tensor& loss) {
  if (!t_active) throw ContractError("backward() without an active tape");
  t_active->backward(loss);
}

namespace detail {

Tensor make_result(Shape shape, std::vector<Real> values, const char* op) {
  check_finite(values, op);
  auto impl = std::make_shared<TensorImpl>();
  if (shape_numel(shape) != static_cast<std::int64_t>(values.size())) {
    throw DimensionError(fmt::format("{}: shape {} does not hold {} values", op, shape_str(shape), values.size()));
  }
  impl->shape = std::move(shape);
  impl->data = std::move(values);
  return Tensor::wrap(std::move(impl));
}

bool record_op(const char* name, const std::vector<Tensor>& inputs, const std::vector<Tensor>& outputs,
               std::function<void()> backward) {
  GradTape* tape = t_active;
  if (!tape) return false;
  bool any = std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
  if (!any) return false;
  GradTape::Entry e;
  e.name = name;
  for (const auto& t : inputs) e.inputs.push_back(t.impl());
  for (const auto& t : outputs) {
    t.impl()->requires_grad = true;
    t.impl()->is_leaf = false;
    e.outputs.push_back(t.impl());
  }
  e.backward = std::move(backward);
  tape->record(std::move(e));
  return true;
}

}  // namespace detail
}  // namespace sfd
