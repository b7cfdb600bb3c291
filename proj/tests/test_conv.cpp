#include "doctest.h"

#include "sfd/core/autograd.hpp"
#include "sfd/core/conv.hpp"
#include "sfd/core/error.hpp"
#include "sfd/core/ops.hpp"
#include "sfd/selftest/oracles.hpp"
#include "test_util.hpp"

using namespace sfd;

TEST_CASE("ones convolution counts the receptive field") {
  Tensor x = Tensor::full({1, 3, 3}, 1.0f);
  Tensor w = Tensor::full({1, 1, 3, 3}, 1.0f);
  Tensor b(Shape{1});
  Tensor y = ops::conv2d(x, w, b, 1);
  CHECK(y.shape() == Shape{1, 3, 3});
  CHECK(y.at(0, 1, 1) == 9.0f);
  CHECK(y.at(0, 0, 0) == 4.0f);
  CHECK(y.at(0, 0, 1) == 6.0f);
}

TEST_CASE("identity kernel is bit-exact identity") {
  Rng rng(1);
  Tensor x = test::random_tensor(rng, {3, 7, 5}, -3, 3);
  std::vector<Real> wv(3 * 3 * 9, 0.0f);
  for (int c = 0; c < 3; ++c) wv[(c * 3 + c) * 9 + 4] = 1.0f;
  Tensor y = ops::conv2d(x, Tensor({3, 3, 3, 3}, wv), Tensor(Shape{3}), 1);
  for (std::size_t i = 0; i < x.data().size(); ++i) CHECK(y.data()[i] == x.data()[i]);
}

TEST_CASE("conv2d matches the loop oracle") {
  Rng rng(2);
  Tensor x = test::random_tensor(rng, {2, 4, 4}, -1, 1);
  Tensor w = test::random_tensor(rng, {3, 2, 3, 3}, -1, 1);
  Tensor b = test::random_tensor(rng, {3}, -1, 1);
  Tensor y = ops::conv2d(x, w, b, 1);
  auto ref = oracle::conv2d({x.data().begin(), x.data().end()}, 2, 4, 4, {w.data().begin(), w.data().end()}, 3, 3,
                            {b.data().begin(), b.data().end()}, 1);
  CHECK(test::max_abs_diff(y.data(), ref) < 1e-6);

  Tensor big = test::random_tensor(rng, {5, 13, 9}, -1, 1);
  Tensor wb = test::random_tensor(rng, {4, 5, 3, 3}, -1, 1);
  Tensor yb = ops::conv2d(big, wb, Tensor(), 1);
  auto refb = oracle::conv2d({big.data().begin(), big.data().end()}, 5, 13, 9, {wb.data().begin(), wb.data().end()}, 4,
                             3, {}, 1);
  CHECK(test::max_abs_diff(yb.data(), refb) < 1e-5);
}

TEST_CASE("conv2d rejects channel mismatch") {
  CHECK_THROWS_AS(ops::conv2d(Tensor(Shape{2, 4, 4}), Tensor(Shape{1, 3, 3, 3}), Tensor(), 1), DimensionError);
  CHECK_THROWS_AS(ops::conv2d(Tensor(Shape{4, 4}), Tensor(Shape{1, 1, 3, 3}), Tensor(), 1), DimensionError);
}

TEST_CASE("conv2d gradients match finite differences") {
  Rng rng(3);
  Tensor x = test::random_param(rng, {2, 6, 5}, -1, 1);
  Tensor w = test::random_param(rng, {3, 2, 3, 3}, -1, 1);
  Tensor b = test::random_param(rng, {3}, -1, 1);
  Tensor probe = test::random_tensor(rng, {3, 6, 5}, -1, 1);
  auto loss = [&]() { return ops::sum(ops::mul(ops::conv2d(x, w, b, 1), probe)); };
  auto r = oracle::grad_check(loss, {{"x", x}, {"w", w}, {"b", b}}, {.max_samples = 60});
  INFO("worst " << r.worst_name << " " << r.worst_rel_error);
  CHECK(r.ok);
}

TEST_CASE("sobel on flat and ramp images") {
  auto [fx, fy] = ops::sobel_xy(Tensor::full({1, 5, 5}, 0.3f));
  // replicated borders: zero everywhere, edges included
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      CHECK(std::abs(fx.at(0, i, j)) < 1e-6);
      CHECK(std::abs(fy.at(0, i, j)) < 1e-6);
    }
  std::vector<Real> ramp(6 * 7);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 7; ++j) ramp[i * 7 + j] = static_cast<Real>(j);
  auto [gx, gy] = ops::sobel_xy(Tensor({1, 6, 7}, ramp));
  for (int i = 1; i < 5; ++i)
    for (int j = 1; j < 6; ++j) {
      CHECK(gx.at(0, i, j) == 8.0f);
      CHECK(gy.at(0, i, j) == 0.0f);
    }
}

TEST_CASE("sobel matches the direct oracle and its gradient checks") {
  Rng rng(4);
  Tensor x = test::random_param(rng, {2, 6, 6}, 0, 1);
  auto [gx, gy] = ops::sobel_xy(x);
  auto [rx, ry] = oracle::sobel({x.data().begin(), x.data().end()}, 2, 6, 6);
  CHECK(test::max_abs_diff(gx.data(), rx) < 1e-6);
  CHECK(test::max_abs_diff(gy.data(), ry) < 1e-6);
  Tensor p = test::random_tensor(rng, {2, 6, 6}, -1, 1);
  auto loss = [&]() {
    auto [a, b] = ops::sobel_xy(x);
    return ops::sum(ops::mul(ops::add(a, ops::scale(b, 2.0f)), p));
  };
  auto r = oracle::grad_check(loss, {{"x", x}}, {.max_samples = 72});
  CHECK(r.ok);
}

TEST_CASE("injected sobel fault breaks the gradient check") {
  Rng rng(5);
  Tensor x = test::random_param(rng, {1, 6, 6}, 0, 1);
  Tensor p = test::random_tensor(rng, {1, 6, 6}, -1, 1);
  auto loss = [&]() { return ops::sum(ops::mul(ops::gradient_magnitude(x), p)); };
  ops::testing::set_sobel_backward_fault(true);
  auto r = oracle::grad_check(loss, {{"x", x}}, {.max_samples = 36});
  ops::testing::set_sobel_backward_fault(false);
  CHECK_FALSE(r.ok);
  CHECK(oracle::grad_check(loss, {{"x", x}}, {.max_samples = 36}).ok);
}

TEST_CASE("separable valid filter matches direct window sums and checks gradients") {
  Rng rng(6);
  Tensor x = test::random_param(rng, {2, 14, 13}, 0, 1);
  auto k = ops::gaussian_kernel1d(11, 1.5);
  Tensor y = ops::separable_filter_valid(x, k);
  REQUIRE(y.shape() == Shape{2, 4, 3});
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 3; ++j) {
        double acc = 0;
        for (int a = 0; a < 11; ++a)
          for (int b = 0; b < 11; ++b) acc += double(k[a]) * k[b] * x.at(c, i + a, j + b);
        CHECK(std::abs(y.at(c, i, j) - acc) < 1e-6);
      }
  Tensor p = test::random_tensor(rng, {2, 4, 3}, -1, 1);
  auto loss = [&]() { return ops::sum(ops::mul(ops::separable_filter_valid(x, k), p)); };
  CHECK(oracle::grad_check(loss, {{"x", x}}, {.max_samples = 40}).ok);
  CHECK_THROWS_AS(ops::separable_filter_valid(Tensor(Shape{1, 10, 20}), k), ContractError);
}
