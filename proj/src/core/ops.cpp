#include "sfd/core/ops.hpp"

#include <cmath>
#include <fmt/format.h>

#include "sfd/core/autograd.hpp"
#include "sfd/core/error.hpp"
#include "sfd/core/kinks.hpp"

namespace sfd::ops {
namespace {

using detail::TensorImplPtr;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(fmt::format("{}: shape mismatch {} vs {}", op, shape_str(a.shape()), shape_str(b.shape())));
  }
}

// y = f(x) with dy/dx = df(x, y).
template <class F, class DF>
Tensor unary(const Tensor& a, const char* name, F f, DF df) {
  auto x = a.data();
  std::vector<Real> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  Tensor out = detail::make_result(a.shape(), std::move(y), name);
  TensorImplPtr ai = a.impl(), oi = out.impl();
  std::weak_ptr<detail::TensorImpl> ow = oi;
  detail::record_op(name, {a}, {out}, [ai, ow, df]() {
    auto o = ow.lock();
    auto g = detail::grad_of(o);
    std::vector<Real> gi(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) gi[i] = g[i] * df(ai->data[i], o->data[i]);
    ai->accumulate_grad(gi);
  });
  return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  auto x = a.data(), y = b.data();
  std::vector<Real> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] + y[i];
  Tensor out = detail::make_result(a.shape(), std::move(r), "add");
  TensorImplPtr ai = a.impl(), bi = b.impl(), oi = out.impl();
  detail::record_op("add", {a, b}, {out}, [ai, bi, oi = std::weak_ptr(oi)]() {
    auto g = detail::grad_of(oi.lock());
    if (ai->requires_grad) ai->accumulate_grad(g);
    if (bi->requires_grad) bi->accumulate_grad(g);
  });
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  auto x = a.data(), y = b.data();
  std::vector<Real> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
  Tensor out = detail::make_result(a.shape(), std::move(r), "sub");
  TensorImplPtr ai = a.impl(), bi = b.impl(), oi = out.impl();
  detail::record_op("sub", {a, b}, {out}, [ai, bi, oi = std::weak_ptr(oi)]() {
    auto g = detail::grad_of(oi.lock());
    if (ai->requires_grad) ai->accumulate_grad(g);
    if (bi->requires_grad) {
      std::vector<Real> n(g.begin(), g.end());
      for (auto& v : n) v = -v;
      bi->accumulate_grad(n);
    }
  });
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  auto x = a.data(), y = b.data();
  std::vector<Real> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] * y[i];
  Tensor out = detail::make_result(a.shape(), std::move(r), "mul");
  TensorImplPtr ai = a.impl(), bi = b.impl(), oi = out.impl();
  detail::record_op("mul", {a, b}, {out}, [ai, bi, oi = std::weak_ptr(oi)]() {
    auto g = detail::grad_of(oi.lock());
    std::vector<Real> t(g.size());
    if (ai->requires_grad) {
      for (std::size_t i = 0; i < g.size(); ++i) t[i] = g[i] * bi->data[i];
      ai->accumulate_grad(t);
    }
    if (bi->requires_grad) {
      for (std::size_t i = 0; i < g.size(); ++i) t[i] = g[i] * ai->data[i];
      bi->accumulate_grad(t);
    }
  });
  return out;
}

Tensor div(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "div");
  auto x = a.data(), y = b.data();
  std::vector<Real> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] / y[i];
  Tensor out = detail::make_result(a.shape(), std::move(r), "div");
  TensorImplPtr ai = a.impl(), bi = b.impl(), oi = out.impl();
  detail::record_op("div", {a, b}, {out}, [ai, bi, ow = std::weak_ptr(oi)]() {
    auto o = ow.lock();
    auto g = detail::grad_of(o);
    std::vector<Real> t(g.size());
    if (ai->requires_grad) {
      for (std::size_t i = 0; i < g.size(); ++i) t[i] = g[i] / bi->data[i];
      ai->accumulate_grad(t);
    }
    if (bi->requires_grad) {
      for (std::size_t i = 0; i < g.size(); ++i) t[i] = -g[i] * o->data[i] / bi->data[i];
      bi->accumulate_grad(t);
    }
  });
  return out;
}

Tensor maximum(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "maximum");
  auto x = a.data(), y = b.data();
  std::vector<Real> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] >= y[i] ? x[i] : y[i];
  kinks::record(x.size(), [&](std::size_t i) { return x[i] >= y[i] ? 1 : 0; });
  Tensor out = detail::make_result(a.shape(), std::move(r), "maximum");
  TensorImplPtr ai = a.impl(), bi = b.impl(), oi = out.impl();
  detail::record_op("maximum", {a, b}, {out}, [ai, bi, oi = std::weak_ptr(oi)]() {
    auto g = detail::grad_of(oi.lock());
    std::vector<Real> ga(g.size(), 0.0f), gb(g.size(), 0.0f);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (ai->data[i] >= bi->data[i]) ga[i] = g[i];
      else gb[i] = g[i];
    }
    if (ai->requires_grad) ai->accumulate_grad(ga);
    if (bi->requires_grad) bi->accumulate_grad(gb);
  });
  return out;
}

Tensor scale(const Tensor& a, Real s) {
  return unary(a, "scale", [s](Real x) { return x * s; }, [s](Real, Real) { return s; });
}

Tensor add_scalar(const Tensor& a, Real s) {
  return unary(a, "add_scalar", [s](Real x) { return x + s; }, [](Real, Real) { return 1.0f; });
}

namespace {
void record_sign_sides(const Tensor& a) {
  auto x = a.data();
  kinks::record(x.size(), [&](std::size_t i) { return x[i] > 0.0f ? 2 : (x[i] < 0.0f ? 0 : 1); });
}
}  // namespace

Tensor abs(const Tensor& a) {
  record_sign_sides(a);
  return unary(
      a, "abs", [](Real x) { return std::fabs(x); },
      [](Real x, Real) { return x > 0.0f ? 1.0f : (x < 0.0f ? -1.0f : 0.0f); });
}

Tensor square(const Tensor& a) {
  return unary(a, "square", [](Real x) { return x * x; }, [](Real x, Real) { return 2.0f * x; });
}

Tensor relu(const Tensor& a) {
  record_sign_sides(a);
  return unary(
      a, "relu", [](Real x) { return x > 0.0f ? x : 0.0f; }, [](Real x, Real) { return x > 0.0f ? 1.0f : 0.0f; });
}

Tensor leaky_relu(const Tensor& a, Real negative_slope) {
  record_sign_sides(a);
  return unary(
      a, "leaky_relu", [negative_slope](Real x) { return x > 0.0f ? x : negative_slope * x; },
      [negative_slope](Real x, Real) { return x > 0.0f ? 1.0f : negative_slope; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(
      a, "sigmoid",
      [](Real x) {
        // Split on sign so exp never overflows.
        if (x >= 0.0f) return 1.0f / (1.0f + std::exp(-x));
        Real e = std::exp(x);
        return e / (1.0f + e);
      },
      [](Real, Real y) { return y * (1.0f - y); });
}

Tensor exp(const Tensor& a) {
  return unary(a, "exp", [](Real x) { return std::exp(x); }, [](Real, Real y) { return y; });
}

Tensor log1p(const Tensor& a) {
  for (Real v : a.data()) {
    if (v <= -1.0f) throw NumericError("log1p: argument <= -1");
  }
  return unary(a, "log1p", [](Real x) { return std::log1p(x); }, [](Real x, Real) { return 1.0f / (1.0f + x); });
}

Tensor expm1(const Tensor& a) {
  return unary(a, "expm1", [](Real x) { return std::expm1(x); }, [](Real, Real y) { return y + 1.0f; });
}

Tensor sum(const Tensor& a) {
  double acc = 0.0;
  for (Real v : a.data()) acc += v;
  Tensor out = detail::make_result(Shape{}, {static_cast<Real>(acc)}, "sum");
  TensorImplPtr ai = a.impl(), oi = out.impl();
  detail::record_op("sum", {a}, {out}, [ai, oi = std::weak_ptr(oi)]() {
    Real g = oi.lock()->grad[0];
    std::vector<Real> gi(ai->data.size(), g);
    ai->accumulate_grad(gi);
  });
  return out;
}

Tensor mean(const Tensor& a) {
  if (a.numel() == 0) throw ContractError("mean of an empty tensor");
  double acc = 0.0;
  for (Real v : a.data()) acc += v;
  const double n = static_cast<double>(a.numel());
  Tensor out = detail::make_result(Shape{}, {static_cast<Real>(acc / n)}, "mean");
  TensorImplPtr ai = a.impl(), oi = out.impl();
  detail::record_op("mean", {a}, {out}, [ai, n, oi = std::weak_ptr(oi)]() {
    Real g = static_cast<Real>(oi.lock()->grad[0] / n);
    std::vector<Real> gi(ai->data.size(), g);
    ai->accumulate_grad(gi);
  });
  return out;
}

Tensor concat_channels(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ContractError("concat_channels: no inputs");
  const auto h = parts[0].dim(-2), w = parts[0].dim(-1);
  std::int64_t c_total = 0;
  for (const auto& p : parts) {
    if (p.rank() != 3 || p.dim(1) != h || p.dim(2) != w) {
      throw DimensionError(fmt::format("concat_channels: incompatible part {}", shape_str(p.shape())));
    }
    c_total += p.dim(0);
  }
  std::vector<Real> r;
  r.reserve(static_cast<std::size_t>(c_total * h * w));
  for (const auto& p : parts) r.insert(r.end(), p.data().begin(), p.data().end());
  Tensor out = detail::make_result(Shape{c_total, h, w}, std::move(r), "concat_channels");
  std::vector<TensorImplPtr> impls;
  for (const auto& p : parts) impls.push_back(p.impl());
  detail::record_op("concat_channels", parts, {out}, [impls, oi = std::weak_ptr(out.impl())]() {
    auto g = detail::grad_of(oi.lock());
    std::size_t off = 0;
    for (const auto& p : impls) {
      const auto n = p->data.size();
      if (p->requires_grad) p->accumulate_grad(g.subspan(off, n));
      off += n;
    }
  });
  return out;
}

Tensor channel_max(const Tensor& x) {
  if (x.rank() != 3) throw DimensionError("channel_max expects C x H x W");
  const auto c = x.dim(0), hw = x.dim(1) * x.dim(2);
  auto d = x.data();
  std::vector<Real> r(hw);
  std::vector<std::int64_t> arg(hw, 0);
  for (std::int64_t i = 0; i < hw; ++i) {
    Real best = d[i];
    for (std::int64_t k = 1; k < c; ++k) {
      if (d[k * hw + i] > best) {
        best = d[k * hw + i];
        arg[i] = k;
      }
    }
    r[i] = best;
  }
  kinks::record(arg.size(), [&](std::size_t i) { return arg[i]; });
  Tensor out = detail::make_result(Shape{1, x.dim(1), x.dim(2)}, std::move(r), "channel_max");
  TensorImplPtr xi = x.impl();
  detail::record_op("channel_max", {x}, {out}, [xi, arg, hw, oi = std::weak_ptr(out.impl())]() {
    auto g = detail::grad_of(oi.lock());
    std::vector<Real> gi(xi->data.size(), 0.0f);
    for (std::int64_t i = 0; i < hw; ++i) gi[arg[i] * hw + i] = g[i];
    xi->accumulate_grad(gi);
  });
  return out;
}

Tensor channel_mean(const Tensor& x) {
  if (x.rank() != 3) throw DimensionError("channel_mean expects C x H x W");
  const auto c = x.dim(0), hw = x.dim(1) * x.dim(2);
  auto d = x.data();
  std::vector<Real> r(hw);
  for (std::int64_t i = 0; i < hw; ++i) {
    Real acc = 0.0f;
    for (std::int64_t k = 0; k < c; ++k) acc += d[k * hw + i];
    r[i] = acc / static_cast<Real>(c);
  }
  Tensor out = detail::make_result(Shape{1, x.dim(1), x.dim(2)}, std::move(r), "channel_mean");
  TensorImplPtr xi = x.impl();
  detail::record_op("channel_mean", {x}, {out}, [xi, c, hw, oi = std::weak_ptr(out.impl())]() {
    auto g = detail::grad_of(oi.lock());
    std::vector<Real> gi(xi->data.size());
    const Real inv = 1.0f / static_cast<Real>(c);
    for (std::int64_t k = 0; k < c; ++k)
      for (std::int64_t i = 0; i < hw; ++i) gi[k * hw + i] = g[i] * inv;
    xi->accumulate_grad(gi);
  });
  return out;
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) {
    throw DimensionError(fmt::format("reshape {} -> {}", shape_str(a.shape()), shape_str(shape)));
  }
  std::vector<Real> r(a.data().begin(), a.data().end());
  Tensor out = detail::make_result(std::move(shape), std::move(r), "reshape");
  TensorImplPtr ai = a.impl();
  detail::record_op("reshape", {a}, {out}, [ai, oi = std::weak_ptr(out.impl())]() {
    ai->accumulate_grad(detail::grad_of(oi.lock()));
  });
  return out;
}

}  // namespace sfd::ops
