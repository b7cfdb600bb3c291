#pragma once

#include <functional>
#include <vector>

#include "sfd/core/tensor.hpp"

namespace sfd {

/// Ordered record of differentiable operations executed while the tape is
/// active. backward() walks the record once, newest entry first.
class GradTape {
 public:
  struct Entry {
    const char* name;
    std::vector<detail::TensorImplPtr> inputs;
    std::vector<detail::TensorImplPtr> outputs;
    // Reads output grads, accumulates into inputs that require grad.
    std::function<void()> backward;
  };

  GradTape() = default;
  GradTape(const GradTape&) = delete;
  GradTape& operator=(const GradTape&) = delete;

  void record(Entry entry);
  std::size_t size() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }
  void clear() { entries_.clear(); }

  /// Seeds d(loss)/d(loss) = 1 and propagates to every reachable leaf.
  /// The loss must be a single-element tensor recorded on this tape.
  /// The record is consumed.
  void backward(const Tensor& loss);

  /// Entries visited by the most recent backward(), in visit order.
  const std::vector<std::size_t>& last_visit_order() const { return visits_; }

 private:
  std::vector<Entry> entries_;
  std::vector<std::size_t> visits_;
};

/// Makes a tape the active recorder on this thread for the scope lifetime.
class TapeScope {
 public:
  explicit TapeScope(GradTape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  GradTape* previous_;
};

/// Suspends recording on this thread.
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  GradTape* previous_;
};

GradTape* active_tape();

/// backward() on the active tape.
void backward(const Tensor& loss);

namespace detail {

/// Builds an op output; values are checked for finiteness.
Tensor make_result(Shape shape, std::vector<Real> values, const char* op);

/// Records an op if a tape is active and any input requires grad. Marks the
/// outputs as tracked when recorded. Returns whether recording happened.
bool record_op(const char* name, const std::vector<Tensor>& inputs,
               const std::vector<Tensor>& outputs,
               std::function<void()> backward);

/// Output gradient during backward; always allocated by the tape first.
inline std::span<const Real> grad_of(const TensorImplPtr& t) {
  return {t->grad.data(), t->grad.size()};
}

}  // namespace detail
}  // namespace sfd
