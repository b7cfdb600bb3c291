#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sfd/core/real.hpp"

namespace sfd {

/// Dimension sizes, outermost first. Images are C x H x W.
using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct TensorImpl {
  Shape shape;
  std::vector<Real> data;
  // Empty until the first gradient contribution arrives.
  std::vector<Real> grad;
  bool requires_grad = false;
  bool is_leaf = true;

  std::span<Real> grad_buffer();
  void accumulate_grad(std::span<const Real> g);
};

using TensorImplPtr = std::shared_ptr<TensorImpl>;

}  // namespace detail

/// Dense row-major f32 array with optional gradient tracking.
///
/// Tensors produced by operations are immutable. Only leaf tensors (those
/// created directly, such as network parameters) expose mutable storage.
/// Copies share storage; use clone() for a deep copy.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<Real> values);

  static Tensor full(Shape shape, Real value);
  static Tensor scalar(Real value);
  /// A leaf that participates in gradient tracking.
  static Tensor parameter(Shape shape, std::vector<Real> values);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  /// Size of dimension i; negative i counts from the end.
  std::int64_t dim(int i) const;
  std::int64_t numel() const;

  std::span<const Real> data() const;
  std::span<Real> mutable_data();
  Real item() const;
  Real at(std::int64_t c, std::int64_t h, std::int64_t w) const;

  bool requires_grad() const;
  bool is_leaf() const;
  void set_requires_grad(bool flag);
  bool has_grad() const;
  std::span<const Real> grad() const;
  void zero_grad();

  /// Deep copy without any gradient state.
  Tensor clone() const;
  /// Same values, detached from gradient tracking (deep copy).
  Tensor detach() const { return clone(); }

  const detail::TensorImplPtr& impl() const { return impl_; }
  static Tensor wrap(detail::TensorImplPtr impl);

 private:
  detail::TensorImplPtr impl_;
};

/// Throws NumericError naming `where` if any value is NaN or Inf.
void check_finite(std::span<const Real> values, const char* where);

}  // namespace sfd
