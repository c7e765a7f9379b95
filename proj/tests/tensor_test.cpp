#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "support/test_support.hpp"
#include "videoqg/gradcheck.hpp"
#include "videoqg/tensor.hpp"

using namespace videoqg;

TEST_CASE("matmul identity leaves the operand unchanged") {
  std::mt19937_64 rng(7);
  Tensor a = uniform_init({3, 3}, -2.0, 2.0, rng);
  Tensor eye = Tensor::from({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Tensor out = matmul(eye, a);
  CHECK(test::approx_equal(out.values(), {a.values().begin(), a.values().end()}));
}

TEST_CASE("matmul hand-computed 2x2 by 2x1") {
  Tensor a = Tensor::from({2, 2}, {1, 2, 3, 4});
  Tensor b = Tensor::from({2, 1}, {0, 1});
  Tensor out = matmul(a, b);
  CHECK(out.shape() == Shape{2, 1});
  CHECK(out.at(0) == doctest::Approx(2.0));
  CHECK(out.at(1) == doctest::Approx(4.0));
}

TEST_CASE("grad of sum(A*B) wrt A equals ones x B^T and matches finite differences") {
  std::mt19937_64 rng(11);
  Tensor a = uniform_init({2, 3}, -1.0, 1.0, rng);
  a.set_requires_grad(true);
  Tensor b = uniform_init({3, 4}, -1.0, 1.0, rng);

  SUBCASE("closed form") {
    Tensor loss = sum_all(matmul(a, b));
    loss.backward();
    // d/dA sum(AB) = ones(2x4) B^T: entry (i,k) = sum_j B[k][j]... row sums of B
    auto bv = b.values();
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t k = 0; k < 3; ++k) {
        double expected = 0.0;
        for (std::size_t j = 0; j < 4; ++j) expected += bv[k * 4 + j];
        CHECK(a.grad()[i * 3 + k] == doctest::Approx(expected).epsilon(1e-12));
      }
    }
  }
  SUBCASE("finite differences at rel err < 1e-6") {
    auto report = check_gradients([&] { return sum_all(matmul(a, b)); }, {{"A", a}}, 1e-6);
    CHECK(report.ok());
    CHECK(report.coordinates_checked == 6);
  }
}

TEST_CASE("matmul shape mismatch names both shapes") {
  Tensor a = Tensor::zeros({2, 3});
  Tensor b = Tensor::zeros({4, 5});
  try {
    matmul(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    std::string what = e.what();
    CHECK(what.find("[2x3]") != std::string::npos);
    CHECK(what.find("[4x5]") != std::string::npos);
  }
}

TEST_CASE("softmax basics") {
  SUBCASE("symmetry") {
    Tensor out = softmax_lastdim(Tensor::from({2}, {0.0, 0.0}));
    CHECK(out.at(0) == doctest::Approx(0.5));
    CHECK(out.at(1) == doctest::Approx(0.5));
  }
  SUBCASE("stability at large magnitude") {
    Tensor out = softmax_lastdim(Tensor::from({2}, {1000.0, 0.0}));
    CHECK(all_finite(out));
    CHECK(out.at(0) == doctest::Approx(1.0));
    CHECK(out.at(1) == doctest::Approx(0.0));
  }
  SUBCASE("closed form on log inputs") {
    Tensor out = softmax_lastdim(
        Tensor::from({3}, {std::log(1.0), std::log(2.0), std::log(3.0)}));
    CHECK(out.at(0) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(out.at(1) == doctest::Approx(2.0 / 6.0).epsilon(1e-12));
    CHECK(out.at(2) == doctest::Approx(3.0 / 6.0).epsilon(1e-12));
  }
}

TEST_CASE("softmax rows sum to 1 within 1e-12 on wide-range inputs") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor x = uniform_init({4, 7}, -50.0, 50.0, rng);
    Tensor y = softmax_lastdim(x);
    for (std::size_t r = 0; r < 4; ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < 7; ++c) sum += y.at(r, c);
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("elementwise op examples") {
  std::mt19937_64 rng(5);
  Tensor x = uniform_init({2, 3}, -2.0, 2.0, rng);
  SUBCASE("multiplicative identity") {
    Tensor out = mul(x, Tensor::full({2, 3}, 1.0));
    CHECK(test::approx_equal(out.values(), {x.values().begin(), x.values().end()}, 0.0));
  }
  SUBCASE("sigmoid at zero") {
    CHECK(sigmoid(Tensor::scalar(0.0)).item() == doctest::Approx(0.5));
  }
  SUBCASE("tanh gradient at zero matches finite differences") {
    Tensor z = Tensor::zeros({1});
    z.set_requires_grad(true);
    auto report = check_gradients([&] { return sum_all(tanh(z)); }, {{"z", z}}, 1e-6);
    CHECK(report.ok());
    tanh(z).backward();
    CHECK(z.grad()[0] == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("shape mismatch throws") {
    CHECK_THROWS_AS(add(x, Tensor::zeros({3, 2})), ShapeError);
    CHECK_THROWS_AS(mul(x, Tensor::zeros({2, 4})), ShapeError);
  }
  SUBCASE("leading 1-dim broadcast") {
    Tensor bias = Tensor::from({1, 3}, {10, 20, 30});
    Tensor out = add(x, bias);
    CHECK(out.at(0, 0) == doctest::Approx(x.at(0, 0) + 10));
    CHECK(out.at(1, 2) == doctest::Approx(x.at(1, 2) + 30));
  }
}

TEST_CASE("mean, layer_norm and embedding examples") {
  SUBCASE("mean of a vector") {
    CHECK(mean_over_axis(Tensor::from({3}, {2, 4, 6}), 0).item() == doctest::Approx(4.0));
  }
  SUBCASE("layer_norm rows have mean 0 and variance 1 before gain/bias") {
    std::mt19937_64 rng(9);
    Tensor x = uniform_init({3, 16}, -3.0, 3.0, rng);
    Tensor out = layer_norm(x, Tensor::full({1, 16}, 1.0), Tensor::zeros({1, 16}));
    for (std::size_t r = 0; r < 3; ++r) {
      double mean = 0.0;
      for (std::size_t c = 0; c < 16; ++c) mean += out.at(r, c);
      mean /= 16.0;
      double var = 0.0;
      for (std::size_t c = 0; c < 16; ++c) {
        var += (out.at(r, c) - mean) * (out.at(r, c) - mean);
      }
      var /= 16.0;
      CHECK(std::abs(mean) < 1e-9);
      CHECK(var == doctest::Approx(1.0).epsilon(1e-4));
    }
  }
  SUBCASE("repeated lookup rows are identical and grads accumulate") {
    std::mt19937_64 rng(13);
    Tensor table = uniform_init({4, 3}, -1.0, 1.0, rng);
    table.set_requires_grad(true);
    Tensor out = embedding_lookup(table, {0, 0});
    for (std::size_t c = 0; c < 3; ++c) CHECK(out.at(0, c) == out.at(1, c));
    sum_all(out).backward();
    for (std::size_t c = 0; c < 3; ++c) CHECK(table.grad()[c] == doctest::Approx(2.0));
    auto report =
        check_gradients([&] { return sum_all(embedding_lookup(table, {0, 0})); },
                        {{"table", table}}, 1e-6);
    CHECK(report.ok());
  }
  SUBCASE("out-of-vocabulary id is named in the error") {
    Tensor table = Tensor::zeros({4, 3});
    try {
      embedding_lookup(table, {7});
      FAIL("expected IndexError");
    } catch (const IndexError& e) {
      CHECK(std::string(e.what()).find("7") != std::string::npos);
    }
  }
}

TEST_CASE("backward contract") {
  SUBCASE("sum gradient is ones") {
    Tensor x = Tensor::from({2, 2}, {1, 2, 3, 4});
    x.set_requires_grad(true);
    sum_all(x).backward();
    CHECK(test::approx_equal(x.grad(), {1, 1, 1, 1}, 0.0));
  }
  SUBCASE("composite tanh(Wx) matches central finite differences") {
    std::mt19937_64 rng(17);
    Tensor w = uniform_init({3, 3}, -1.0, 1.0, rng);
    w.set_requires_grad(true);
    Tensor x = uniform_init({3, 2}, -1.0, 1.0, rng);
    x.set_requires_grad(true);
    auto report = check_gradients([&] { return sum_all(tanh(matmul(w, x))); },
                                  {{"W", w}, {"x", x}}, 1e-4);
    CHECK(report.ok());
  }
  SUBCASE("repeated backward accumulates") {
    Tensor x = Tensor::from({3}, {1, 2, 3});
    x.set_requires_grad(true);
    Tensor loss = sum_all(x);
    loss.backward();
    loss.backward();
    CHECK(test::approx_equal(x.grad(), {2, 2, 2}, 0.0));
    x.zero_grad();
    loss.backward();
    CHECK(test::approx_equal(x.grad(), {1, 1, 1}, 0.0));
  }
  SUBCASE("non-scalar loss is rejected") {
    Tensor x = Tensor::zeros({2});
    x.set_requires_grad(true);
    CHECK_THROWS_AS(add(x, x).backward(), ShapeError);
  }
}

TEST_CASE("every op matches central finite differences on random inputs") {
  auto report = check_op_gradients(/*seed=*/1234, /*trials_per_op=*/20, /*tol=*/1e-4);
  INFO("worst rel err ", report.worst_rel_err, " over ", report.coordinates_checked,
       " coordinates");
  for (const auto& f : report.failures) {
    INFO(f.where, ": analytic ", f.analytic, " numeric ", f.numeric, " rel ", f.rel_err);
  }
  CHECK(report.ok());
  CHECK(report.coordinates_checked > 1000);
}

TEST_CASE("forward results are deterministic bit-for-bit") {
  auto run = [] {
    std::mt19937_64 rng(21);
    Tensor x = uniform_init({4, 5}, -2.0, 2.0, rng);
    Tensor w = uniform_init({5, 3}, -2.0, 2.0, rng);
    Tensor g = Tensor::full({1, 3}, 1.0);
    Tensor b = Tensor::zeros({1, 3});
    Tensor out = layer_norm(softmax_lastdim(matmul(x, w)), g, b);
    return std::vector<double>(out.values().begin(), out.values().end());
  };
  CHECK(run() == run());
}

TEST_CASE("forward ops keep finite values on bounded inputs") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor x = uniform_init({3, 6}, -40.0, 40.0, rng);
    Tensor w = uniform_init({6, 6}, -5.0, 5.0, rng);
    CHECK(all_finite(softmax_lastdim(matmul(x, w))));
    CHECK(all_finite(tanh(x)));
    CHECK(all_finite(sigmoid(x)));
    CHECK(all_finite(layer_norm(x, Tensor::full({1, 6}, 1.0), Tensor::zeros({1, 6}))));
    CHECK(all_finite(log_softmax_lastdim(x)));
  }
}

TEST_CASE("no-grad guard prunes the tape") {
  Tensor x = Tensor::from({2}, {1, 2});
  x.set_requires_grad(true);
  NoGradGuard guard;
  Tensor y = scale(x, 2.0);
  CHECK_FALSE(y.requires_grad());
}
