#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "videoqg/errors.hpp"

namespace videoqg {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& shape);

namespace detail {

struct Node;
using NodePtr = std::shared_ptr<Node>;

// One tape node. The graph is the tape: ops link results to their inputs and
// capture a closure that routes the incoming gradient to the parents.
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // allocated when requires_grad (leaves) or on backward
  bool requires_grad = false;
  std::vector<NodePtr> parents;
  std::function<void(Node&)> backward_fn;

  std::size_t numel() const { return value.size(); }
  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  }
};

bool grad_enabled();
bool set_grad_enabled(bool on);  // returns previous value

}  // namespace detail

// Disables tape construction for its lifetime (current thread). Inference
// paths use this so decode loops do not accumulate graph nodes.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool saved_;
};

// Dense row-major tensor of doubles with reverse-mode autodiff. Copies are
// cheap handles onto a shared node; values of non-leaf tensors are treated as
// immutable once created. A graph must stay within one thread; detached
// tensors are freely shareable.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const Shape& shape);
  static Tensor full(const Shape& shape, double fill);
  static Tensor from(const Shape& shape, std::vector<double> values);
  static Tensor scalar(double v);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;
  bool is_scalar() const { return numel() == 1; }

  std::span<const double> values() const;
  double at(std::size_t flat) const;
  double at(std::size_t row, std::size_t col) const;  // rank-2 convenience
  double item() const;                                // scalar only

  // In-place access to a leaf's storage (parameter updates, test nudges).
  std::span<double> mutable_values();

  bool requires_grad() const;
  Tensor& set_requires_grad(bool on);  // leaves only
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // Reverse-mode sweep from a scalar. Gradients accumulate across calls
  // until zeroed by the caller.
  void backward() const;

  Tensor detach() const;  // value copy with no graph attachment

  detail::NodePtr node() const { return node_; }
  explicit Tensor(detail::NodePtr node) : node_(std::move(node)) {}

 private:
  detail::NodePtr node_;
};

// --- autodiff ops -----------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& x);

// Binary elementwise ops accept equal shapes or a 1-length leading dim on one
// side broadcast against the other (the only broadcast rule supported).
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double c);

Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor relu(const Tensor& x);

Tensor softmax_lastdim(const Tensor& x);
Tensor log_softmax_lastdim(const Tensor& x);

Tensor mean_over_axis(const Tensor& x, std::size_t axis);
Tensor sum_all(const Tensor& x);

Tensor concat_lastdim(const std::vector<Tensor>& parts);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& x, std::size_t start, std::size_t count);
Tensor reshape(const Tensor& x, const Shape& shape);

Tensor embedding_lookup(const Tensor& table, const std::vector<int>& ids);
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias);

// out[t] = x[t, ids[t]] for a [T x V] tensor; building block for NLL losses.
Tensor pick_per_row(const Tensor& x, const std::vector<int>& ids);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }

// --- construction helpers ---------------------------------------------------

Tensor uniform_init(const Shape& shape, double lo, double hi, std::mt19937_64& rng);
Tensor normal_init(const Shape& shape, double mean, double stddev, std::mt19937_64& rng);
// Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
Tensor xavier_init(const Shape& shape, std::size_t fan_in, std::size_t fan_out,
                   std::mt19937_64& rng);

bool all_finite(const Tensor& x);

}  // namespace videoqg
