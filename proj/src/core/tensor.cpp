#include "sfd/core/tensor.hpp"

#include <cmath>
#include <fmt/format.h>

#include "sfd/core/error.hpp"

namespace sfd {

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto d : shape) {
    if (d < 0) throw DimensionError("negative dimension in shape " + shape_str(shape));
    n *= d;
  }
  return n;
}

std::string shape_str(const Shape& shape) {
  return fmt::format("[{}]", fmt::join(shape, "x"));
}

void check_finite(std::span<const Real> values, const char* where) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericError(fmt::format("non-finite value {} at flat index {} in {}", values[i], i, where));
    }
  }
}

namespace detail {

std::span<Real> TensorImpl::grad_buffer() {
  if (grad.empty()) grad.assign(data.size(), 0.0f);
  return grad;
}

void TensorImpl::accumulate_grad(std::span<const Real> g) {
  if (g.size() != data.size()) {
    throw DimensionError(fmt::format("gradient size {} does not match tensor {}", g.size(), shape_str(shape)));
  }
  auto buf = grad_buffer();
  for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i];
}

}  // namespace detail

Tensor::Tensor(Shape shape) : Tensor(shape, std::vector<Real>(shape_numel(shape), 0.0f)) {}

Tensor::Tensor(Shape shape, std::vector<Real> values) : impl_(std::make_shared<detail::TensorImpl>()) {
  if (shape_numel(shape) != static_cast<std::int64_t>(values.size())) {
    throw DimensionError(fmt::format("shape {} needs {} values, got {}", shape_str(shape), shape_numel(shape),
                                     values.size()));
  }
  check_finite(values, "tensor construction");
  impl_->shape = std::move(shape);
  impl_->data = std::move(values);
}

Tensor Tensor::full(Shape shape, Real value) {
  auto n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<Real>(n, value));
}

Tensor Tensor::scalar(Real value) { return Tensor(Shape{}, {value}); }

Tensor Tensor::parameter(Shape shape, std::vector<Real> values) {
  Tensor t(std::move(shape), std::move(values));
  t.impl_->requires_grad = true;
  return t;
}

Tensor Tensor::wrap(detail::TensorImplPtr impl) {
  Tensor t;
  t.impl_ = std::move(impl);
  return t;
}

const Shape& Tensor::shape() const {
  if (!impl_) throw ContractError("use of undefined tensor");
  return impl_->shape;
}

std::int64_t Tensor::dim(int i) const {
  const auto& s = shape();
  int r = static_cast<int>(s.size());
  int k = i < 0 ? r + i : i;
  if (k < 0 || k >= r) throw DimensionError(fmt::format("dim {} out of range for shape {}", i, shape_str(s)));
  return s[k];
}

std::int64_t Tensor::numel() const { return static_cast<std::int64_t>(data().size()); }

std::span<const Real> Tensor::data() const {
  if (!impl_) throw ContractError("use of undefined tensor");
  return impl_->data;
}

std::span<Real> Tensor::mutable_data() {
  if (!impl_) throw ContractError("use of undefined tensor");
  if (!impl_->is_leaf) throw ContractError("only leaf tensors are mutable");
  return impl_->data;
}

Real Tensor::item() const {
  auto d = data();
  if (d.size() != 1) throw ContractError(fmt::format("item() on tensor of shape {}", shape_str(shape())));
  return d[0];
}

Real Tensor::at(std::int64_t c, std::int64_t h, std::int64_t w) const {
  if (rank() != 3) throw DimensionError("at(c,h,w) needs a rank-3 tensor");
  const auto& s = shape();
  return impl_->data[(c * s[1] + h) * s[2] + w];
}

bool Tensor::requires_grad() const { return impl_ && impl_->requires_grad; }
bool Tensor::is_leaf() const { return !impl_ || impl_->is_leaf; }

void Tensor::set_requires_grad(bool flag) {
  if (!impl_) throw ContractError("use of undefined tensor");
  if (!impl_->is_leaf) throw ContractError("requires_grad can only be set on leaves");
  impl_->requires_grad = flag;
}

bool Tensor::has_grad() const { return impl_ && !impl_->grad.empty(); }

std::span<const Real> Tensor::grad() const {
  if (!has_grad()) throw ContractError("tensor has no gradient");
  return impl_->grad;
}

void Tensor::zero_grad() {
  if (impl_) impl_->grad.clear();
}

Tensor Tensor::clone() const { return Tensor(shape(), impl_->data); }

}  // namespace sfd
