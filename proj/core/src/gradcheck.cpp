#include "videoqg/gradcheck.hpp"

#include <cmath>

#include "videoqg/train.hpp"

namespace videoqg {

double fd_relative_error(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  if (scale < 1e-8) return 0.0;
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport check_gradients(const std::function<Tensor()>& forward,
                                const std::vector<std::pair<std::string, Tensor>>& leaves,
                                double tol, double h) {
  GradCheckReport report;
  for (auto& [name, leaf] : leaves) {
    Tensor handle = leaf;
    handle.zero_grad();
  }
  Tensor loss = forward();
  loss.backward();
  std::vector<std::vector<double>> analytic;
  for (const auto& [name, leaf] : leaves) {
    auto g = leaf.grad();
    analytic.emplace_back(g.begin(), g.end());
  }

  NoGradGuard no_grad;
  for (std::size_t li = 0; li < leaves.size(); ++li) {
    Tensor handle = leaves[li].second;
    auto values = handle.mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = forward().item();
      values[i] = saved - h;
      const double down = forward().item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double rel = fd_relative_error(analytic[li][i], numeric);
      ++report.coordinates_checked;
      report.worst_rel_err = std::max(report.worst_rel_err, rel);
      if (rel >= tol) {
        report.failures.push_back({leaves[li].first + "[" + std::to_string(i) + "]",
                                   analytic[li][i], numeric, rel});
      }
    }
  }
  return report;
}

namespace {

void merge(GradCheckReport& into, const GradCheckReport& from) {
  into.coordinates_checked += from.coordinates_checked;
  into.worst_rel_err = std::max(into.worst_rel_err, from.worst_rel_err);
  into.failures.insert(into.failures.end(), from.failures.begin(), from.failures.end());
}

Tensor random_leaf(const Shape& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t = uniform_init(shape, lo, hi, rng);
  t.set_requires_grad(true);
  return t;
}

// Uniform magnitudes in [0.1, 1] with random signs keep relu and |x| kinks
// far away from the finite-difference step.
Tensor random_leaf_off_kink(const Shape& shape, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mag(0.1, 1.0);
  std::bernoulli_distribution sign(0.5);
  std::vector<double> v;
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  v.reserve(n);
  for (std::size_t i = 0; i < n; ++i) v.push_back(sign(rng) ? mag(rng) : -mag(rng));
  Tensor t = Tensor::from(shape, std::move(v));
  t.set_requires_grad(true);
  return t;
}

}  // namespace

GradCheckReport check_op_gradients(std::uint64_t seed, std::size_t trials_per_op, double tol) {
  GradCheckReport report;
  std::mt19937_64 rng(seed);
  auto dim = [&rng](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };

  for (std::size_t trial = 0; trial < trials_per_op; ++trial) {
    const std::size_t m = dim(1, 4), k = dim(1, 4), n = dim(1, 4);

    {
      Tensor a = random_leaf({m, k}, rng), b = random_leaf({k, n}, rng);
      merge(report, check_gradients([&] { return sum_all(matmul(a, b)); },
                                    {{"matmul.a", a}, {"matmul.b", b}}, tol));
    }
    {
      Tensor x = random_leaf({m, n}, rng);
      merge(report,
            check_gradients([&] { return sum_all(transpose(x)); }, {{"transpose.x", x}}, tol));
    }
    {
      Tensor a = random_leaf({m, n}, rng), b = random_leaf({m, n}, rng);
      Tensor w = random_leaf({m, n}, rng);
      merge(report, check_gradients([&] { return sum_all(mul(add(a, b), w)); },
                                    {{"add.a", a}, {"add.b", b}, {"add.w", w}}, tol));
    }
    {
      Tensor bias = random_leaf({1, n}, rng);
      Tensor x = random_leaf({m, n}, rng);
      Tensor w = random_leaf({m, n}, rng);
      merge(report, check_gradients([&] { return sum_all(mul(add(bias, x), w)); },
                                    {{"add_bcast.bias", bias}, {"add_bcast.x", x}}, tol));
      merge(report, check_gradients([&] { return sum_all(mul(x, bias)); },
                                    {{"mul_bcast.x", x}, {"mul_bcast.bias", bias}}, tol));
    }
    {
      Tensor x = random_leaf({m, n}, rng);
      merge(report,
            check_gradients([&] { return sum_all(scale(x, 1.7)); }, {{"scale.x", x}}, tol));
      merge(report, check_gradients([&] { return sum_all(tanh(x)); }, {{"tanh.x", x}}, tol));
      merge(report,
            check_gradients([&] { return sum_all(sigmoid(x)); }, {{"sigmoid.x", x}}, tol));
    }
    {
      Tensor x = random_leaf_off_kink({m, n}, rng);
      merge(report, check_gradients([&] { return sum_all(relu(x)); }, {{"relu.x", x}}, tol));
    }
    {
      // weighted sums expose the full softmax Jacobian
      Tensor x = random_leaf({m, n}, rng);
      Tensor w = random_leaf({m, n}, rng);
      merge(report, check_gradients([&] { return sum_all(mul(softmax_lastdim(x), w)); },
                                    {{"softmax.x", x}}, tol));
      merge(report, check_gradients([&] { return sum_all(mul(log_softmax_lastdim(x), w)); },
                                    {{"log_softmax.x", x}}, tol));
    }
    {
      Tensor x = random_leaf({m, k, n}, rng);
      const std::size_t axis = dim(0, 2);
      Tensor w = random_leaf({1, 1}, rng);
      merge(report, check_gradients(
                        [&] { return sum_all(scale(mean_over_axis(x, axis), 0.9)); },
                        {{"mean_over_axis.x", x}}, tol));
      (void)w;
    }
    {
      Tensor a = random_leaf({m, k}, rng), b = random_leaf({m, n}, rng);
      Tensor w = random_leaf({m, k + n}, rng);
      merge(report, check_gradients([&] { return sum_all(mul(concat_lastdim({a, b}), w)); },
                                    {{"concat_lastdim.a", a}, {"concat_lastdim.b", b}}, tol));
    }
    {
      Tensor a = random_leaf({m, n}, rng), b = random_leaf({k, n}, rng);
      merge(report, check_gradients([&] { return sum_all(concat_rows({a, b})); },
                                    {{"concat_rows.a", a}, {"concat_rows.b", b}}, tol));
    }
    {
      Tensor x = random_leaf({m + 2, n}, rng);
      merge(report, check_gradients([&] { return sum_all(slice_rows(x, 1, m)); },
                                    {{"slice_rows.x", x}}, tol));
      merge(report, check_gradients([&] { return sum_all(reshape(x, {n, m + 2})); },
                                    {{"reshape.x", x}}, tol));
    }
    {
      const std::size_t vocab = dim(3, 6);
      Tensor table = random_leaf({vocab, n}, rng);
      std::vector<int> ids;
      for (std::size_t i = 0; i < m + 1; ++i) {
        ids.push_back(static_cast<int>(dim(0, vocab - 1)));
      }
      // repeated ids exercise gradient accumulation into shared rows
      ids.push_back(ids.front());
      merge(report, check_gradients([&] { return sum_all(embedding_lookup(table, ids)); },
                                    {{"embedding_lookup.table", table}}, tol));
    }
    {
      Tensor x = random_leaf({m, 4}, rng);
      Tensor gain = random_leaf({1, 4}, rng, 0.5, 1.5);
      Tensor bias = random_leaf({1, 4}, rng);
      Tensor w = random_leaf({m, 4}, rng);
      merge(report,
            check_gradients([&] { return sum_all(mul(layer_norm(x, gain, bias), w)); },
                            {{"layer_norm.x", x}, {"layer_norm.gain", gain},
                             {"layer_norm.bias", bias}},
                            tol));
    }
    {
      Tensor x = random_leaf({m, n}, rng);
      std::vector<int> ids;
      for (std::size_t i = 0; i < m; ++i) ids.push_back(static_cast<int>(dim(0, n - 1)));
      merge(report, check_gradients([&] { return sum_all(pick_per_row(x, ids)); },
                                    {{"pick_per_row.x", x}}, tol));
    }
  }
  return report;
}

GradCheckReport check_model_gradients(QgModel& model, const MultimodalClip& clip, double tol) {
  std::vector<int> targets = clip.question;
  targets.push_back(Vocabulary::kEos);
  auto forward = [&]() {
    Tensor logits = teacher_forced_logits(model, clip);
    return cross_entropy_loss(logits, targets);
  };
  std::vector<std::pair<std::string, Tensor>> leaves;
  for (const auto& [name, tensor] : model.params().items()) leaves.emplace_back(name, tensor);
  return check_gradients(forward, leaves, tol);
}

}  // namespace videoqg
