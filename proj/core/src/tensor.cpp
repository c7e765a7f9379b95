#include "videoqg/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace videoqg {

using detail::Node;
using detail::NodePtr;

using EigenRowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<EigenRowMat>;
using ConstMatMap = Eigen::Map<const EigenRowMat>;

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace detail {

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

bool set_grad_enabled(bool on) {
  bool prev = g_grad_enabled;
  g_grad_enabled = on;
  return prev;
}

}  // namespace detail

NoGradGuard::NoGradGuard() : saved_(detail::set_grad_enabled(false)) {}

NoGradGuard::~NoGradGuard() { detail::set_grad_enabled(saved_); }

namespace {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

NodePtr make_leaf(Shape shape, std::vector<double> value) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  return node;
}

// Result node for an op. Grad tracking is attached only when enabled and at
// least one parent participates, so inference builds no tape.
Tensor make_op(Shape shape, std::vector<double> value, std::vector<Tensor> inputs,
               std::function<void(Node&)> backward_fn) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  bool track = detail::grad_enabled();
  bool any = false;
  if (track) {
    for (const auto& t : inputs) {
      if (t.defined() && t.node()->requires_grad) {
        any = true;
        break;
      }
    }
  }
  if (track && any) {
    node->requires_grad = true;
    for (const auto& t : inputs) node->parents.push_back(t.node());
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor(node);
}

void check_defined(const Tensor& t, const char* op) {
  if (!t.defined()) throw ShapeError(std::string(op) + ": undefined tensor");
}

}  // namespace

// --- Tensor basics ----------------------------------------------------------

Tensor Tensor::zeros(const Shape& shape) {
  return Tensor(make_leaf(shape, std::vector<double>(shape_numel(shape), 0.0)));
}

Tensor Tensor::full(const Shape& shape, double fill) {
  return Tensor(make_leaf(shape, std::vector<double>(shape_numel(shape), fill)));
}

Tensor Tensor::from(const Shape& shape, std::vector<double> values) {
  if (shape_numel(shape) != values.size()) {
    throw ShapeError("from: " + shape_str(shape) + " does not hold " +
                     std::to_string(values.size()) + " values");
  }
  return Tensor(make_leaf(shape, std::move(values)));
}

Tensor Tensor::scalar(double v) { return Tensor(make_leaf({}, {v})); }

const Shape& Tensor::shape() const {
  static const Shape kEmpty;
  return node_ ? node_->shape : kEmpty;
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape().size()) {
    throw ShapeError("dim: axis " + std::to_string(axis) + " out of range for " +
                     shape_str(shape()));
  }
  return shape()[axis];
}

std::size_t Tensor::numel() const { return node_ ? node_->value.size() : 0; }

std::span<const double> Tensor::values() const {
  check_defined(*this, "values");
  return node_->value;
}

double Tensor::at(std::size_t flat) const {
  check_defined(*this, "at");
  if (flat >= node_->value.size()) {
    throw IndexError("at: flat index " + std::to_string(flat) + " out of range");
  }
  return node_->value[flat];
}

double Tensor::at(std::size_t row, std::size_t col) const {
  if (rank() != 2) throw ShapeError("at(row,col): tensor is " + shape_str(shape()));
  return at(row * shape()[1] + col);
}

double Tensor::item() const {
  check_defined(*this, "item");
  if (!is_scalar()) throw ShapeError("item: tensor " + shape_str(shape()) + " is not scalar");
  return node_->value[0];
}

std::span<double> Tensor::mutable_values() {
  check_defined(*this, "mutable_values");
  return node_->value;
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool on) {
  check_defined(*this, "set_requires_grad");
  if (!node_->parents.empty()) {
    throw ShapeError("set_requires_grad: only leaf tensors can change grad tracking");
  }
  node_->requires_grad = on;
  if (on) node_->ensure_grad();
  return *this;
}

std::span<const double> Tensor::grad() const {
  check_defined(*this, "grad");
  return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
  check_defined(*this, "mutable_grad");
  node_->ensure_grad();
  return node_->grad;
}

void Tensor::zero_grad() {
  check_defined(*this, "zero_grad");
  node_->ensure_grad();
  std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach() const {
  check_defined(*this, "detach");
  return Tensor(make_leaf(node_->shape, node_->value));
}

void Tensor::backward() const {
  check_defined(*this, "backward");
  if (!is_scalar()) {
    throw ShapeError("backward: loss must be scalar, got " + shape_str(shape()));
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS; graphs from long decode loops can be deep.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  struct Frame {
    Node* node;
    std::size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({node_.get(), 0});
  visited.insert(node_.get());
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next_parent < top.node->parents.size()) {
      Node* parent = top.node->parents[top.next_parent++].get();
      if (parent->requires_grad && !visited.count(parent)) {
        visited.insert(parent);
        stack.push_back({parent, 0});
      }
    } else {
      order.push_back(top.node);
      stack.pop_back();
    }
  }

  node_->ensure_grad();
  node_->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn) {
      n->ensure_grad();
      n->backward_fn(*n);
    }
  }
}

// --- op helpers ---------------------------------------------------------------

namespace {

enum class Broadcast { kNone, kA, kB };

// Equal shapes, or one side has a 1-length leading dim against the other's
// n-length leading dim with identical trailing dims.
Broadcast binary_broadcast(const char* op, const Shape& a, const Shape& b) {
  if (a == b) return Broadcast::kNone;
  auto mismatch = [&] {
    return ShapeError(std::string(op) + ": shapes " + shape_str(a) + " and " +
                      shape_str(b) + " do not match");
  };
  if (a.size() != b.size() || a.empty()) throw mismatch();
  for (std::size_t i = 1; i < a.size(); ++i) {
    if (a[i] != b[i]) throw mismatch();
  }
  if (a[0] == 1) return Broadcast::kA;
  if (b[0] == 1) return Broadcast::kB;
  throw mismatch();
}

}  // namespace

// --- matmul / transpose -----------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_defined(a, "matmul");
  check_defined(b, "matmul");
  if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0]) {
    throw ShapeError("matmul: incompatible shapes " + shape_str(a.shape()) + " and " +
                     shape_str(b.shape()));
  }
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  std::vector<double> out(m * n, 0.0);
  if (m && k && n) {
    ConstMatMap ma(a.values().data(), m, k);
    ConstMatMap mb(b.values().data(), k, n);
    MatMap mo(out.data(), m, n);
    mo.noalias() = ma * mb;
  }
  auto an = a.node();
  auto bn = b.node();
  return make_op({m, n}, std::move(out), {a, b}, [an, bn, m, k, n](Node& node) {
    ConstMatMap dout(node.grad.data(), m, n);
    if (an->requires_grad && m && k && n) {
      an->ensure_grad();
      MatMap da(an->grad.data(), m, k);
      ConstMatMap vb(bn->value.data(), k, n);
      da.noalias() += dout * vb.transpose();
    }
    if (bn->requires_grad && m && k && n) {
      bn->ensure_grad();
      MatMap db(bn->grad.data(), k, n);
      ConstMatMap va(an->value.data(), m, k);
      db.noalias() += va.transpose() * dout;
    }
  });
}

Tensor transpose(const Tensor& x) {
  check_defined(x, "transpose");
  if (x.rank() != 2) throw ShapeError("transpose: expected rank 2, got " + shape_str(x.shape()));
  const std::size_t m = x.shape()[0], n = x.shape()[1];
  std::vector<double> out(m * n);
  auto v = x.values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = v[i * n + j];
  auto xn = x.node();
  return make_op({n, m}, std::move(out), {x}, [xn, m, n](Node& node) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) xn->grad[i * n + j] += node.grad[j * m + i];
  });
}

// --- elementwise binary -------------------------------------------------------

namespace {

template <typename Fwd, typename BackA, typename BackB>
Tensor binary_op(const char* name, const Tensor& a, const Tensor& b, Fwd fwd, BackA back_a,
                 BackB back_b) {
  check_defined(a, name);
  check_defined(b, name);
  Broadcast bc = binary_broadcast(name, a.shape(), b.shape());
  const Shape& out_shape = (bc == Broadcast::kA) ? b.shape() : a.shape();
  const std::size_t total = shape_numel(out_shape);
  const std::size_t na = a.numel(), nb = b.numel();
  auto av = a.values();
  auto bv = b.values();
  std::vector<double> out(total);
  for (std::size_t i = 0; i < total; ++i) {
    out[i] = fwd(av[bc == Broadcast::kA ? i % na : i], bv[bc == Broadcast::kB ? i % nb : i]);
  }
  auto an = a.node();
  auto bn = b.node();
  return make_op(out_shape, std::move(out), {a, b},
                 [an, bn, bc, na, nb, total, back_a, back_b](Node& node) {
                   if (an->requires_grad) {
                     an->ensure_grad();
                     for (std::size_t i = 0; i < total; ++i) {
                       std::size_t ia = (bc == Broadcast::kA) ? i % na : i;
                       std::size_t ib = (bc == Broadcast::kB) ? i % nb : i;
                       an->grad[ia] += back_a(node.grad[i], an->value[ia], bn->value[ib]);
                     }
                   }
                   if (bn->requires_grad) {
                     bn->ensure_grad();
                     for (std::size_t i = 0; i < total; ++i) {
                       std::size_t ia = (bc == Broadcast::kA) ? i % na : i;
                       std::size_t ib = (bc == Broadcast::kB) ? i % nb : i;
                       bn->grad[ib] += back_b(node.grad[i], an->value[ia], bn->value[ib]);
                     }
                   }
                 });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_op(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double g, double, double) { return g; }, [](double g, double, double) { return g; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_op(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](double g, double, double y) { return g * y; },
      [](double g, double x, double) { return g * x; });
}

Tensor scale(const Tensor& x, double c) {
  check_defined(x, "scale");
  auto v = x.values();
  std::vector<double> out(v.begin(), v.end());
  for (auto& e : out) e *= c;
  auto xn = x.node();
  return make_op(x.shape(), std::move(out), {x}, [xn, c](Node& node) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (std::size_t i = 0; i < node.grad.size(); ++i) xn->grad[i] += c * node.grad[i];
  });
}

// --- elementwise unary --------------------------------------------------------

namespace {

// backward receives (upstream grad, input value, output value)
template <typename Fwd, typename Back>
Tensor unary_op(const char* name, const Tensor& x, Fwd fwd, Back back) {
  check_defined(x, name);
  auto v = x.values();
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = fwd(v[i]);
  auto xn = x.node();
  // keep a value copy of the output for the backward closure
  auto out_copy = std::make_shared<std::vector<double>>(out);
  return make_op(x.shape(), std::move(out), {x}, [xn, back, out_copy](Node& node) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (std::size_t i = 0; i < node.grad.size(); ++i) {
      xn->grad[i] += back(node.grad[i], xn->value[i], (*out_copy)[i]);
    }
  });
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor tanh(const Tensor& x) {
  return unary_op(
      "tanh", x, [](double v) { return std::tanh(v); },
      [](double g, double, double y) { return g * (1.0 - y * y); });
}

Tensor sigmoid(const Tensor& x) {
  return unary_op(
      "sigmoid", x, [](double v) { return stable_sigmoid(v); },
      [](double g, double, double y) { return g * y * (1.0 - y); });
}

Tensor relu(const Tensor& x) {
  return unary_op(
      "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double g, double v, double) { return v > 0.0 ? g : 0.0; });
}

// --- softmax family -----------------------------------------------------------

namespace {

void check_lastdim(const char* op, const Tensor& x) {
  if (x.rank() == 0 || x.shape().back() == 0) {
    throw ShapeError(std::string(op) + ": needs a last dimension of size >= 1, got " +
                     shape_str(x.shape()));
  }
}

}  // namespace

Tensor softmax_lastdim(const Tensor& x) {
  check_defined(x, "softmax_lastdim");
  check_lastdim("softmax_lastdim", x);
  const std::size_t last = x.shape().back();
  const std::size_t rows = x.numel() / last;
  auto v = x.values();
  std::vector<double> out(v.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = v.data() + r * last;
    double* o = out.data() + r * last;
    double mx = in[0];
    for (std::size_t j = 1; j < last; ++j) mx = std::max(mx, in[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < last; ++j) {
      o[j] = std::exp(in[j] - mx);
      sum += o[j];
    }
    for (std::size_t j = 0; j < last; ++j) o[j] /= sum;
  }
  auto xn = x.node();
  auto out_copy = std::make_shared<std::vector<double>>(out);
  return make_op(x.shape(), std::move(out), {x}, [xn, last, rows, out_copy](Node& node) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    const auto& y = *out_copy;
    for (std::size_t r = 0; r < rows; ++r) {
      const double* dy = node.grad.data() + r * last;
      const double* yr = y.data() + r * last;
      double dot = 0.0;
      for (std::size_t j = 0; j < last; ++j) dot += dy[j] * yr[j];
      double* dx = xn->grad.data() + r * last;
      for (std::size_t j = 0; j < last; ++j) dx[j] += yr[j] * (dy[j] - dot);
    }
  });
}

Tensor log_softmax_lastdim(const Tensor& x) {
  check_defined(x, "log_softmax_lastdim");
  check_lastdim("log_softmax_lastdim", x);
  const std::size_t last = x.shape().back();
  const std::size_t rows = x.numel() / last;
  auto v = x.values();
  std::vector<double> out(v.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = v.data() + r * last;
    double* o = out.data() + r * last;
    double mx = in[0];
    for (std::size_t j = 1; j < last; ++j) mx = std::max(mx, in[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < last; ++j) sum += std::exp(in[j] - mx);
    double lse = mx + std::log(sum);
    for (std::size_t j = 0; j < last; ++j) o[j] = in[j] - lse;
  }
  auto xn = x.node();
  auto out_copy = std::make_shared<std::vector<double>>(out);
  return make_op(x.shape(), std::move(out), {x}, [xn, last, rows, out_copy](Node& node) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    const auto& y = *out_copy;
    for (std::size_t r = 0; r < rows; ++r) {
      const double* dy = node.grad.data() + r * last;
      const double* yr = y.data() + r * last;
      double total = 0.0;
      for (std::size_t j = 0; j < last; ++j) total += dy[j];
      double* dx = xn->grad.data() + r * last;
      for (std::size_t j = 0; j < last; ++j) dx[j] += dy[j] - std::exp(yr[j]) * total;
    }
  });
}

// --- reductions ----------------------------------------------------------------

Tensor mean_over_axis(const Tensor& x, std::size_t axis) {
  check_defined(x, "mean_over_axis");
  if (axis >= x.rank()) {
    throw ShapeError("mean_over_axis: axis " + std::to_string(axis) + " out of range for " +
                     shape_str(x.shape()));
  }
  const Shape& s = x.shape();
  if (s[axis] == 0) throw ShapeError("mean_over_axis: axis has zero length");
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
  const std::size_t len = s[axis];
  Shape out_shape;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (i != axis) out_shape.push_back(s[i]);
  std::vector<double> out(outer * inner, 0.0);
  auto v = x.values();
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t a = 0; a < len; ++a)
      for (std::size_t i = 0; i < inner; ++i)
        out[o * inner + i] += v[(o * len + a) * inner + i];
  for (auto& e : out) e /= static_cast<double>(len);
  auto xn = x.node();
  return make_op(out_shape, std::move(out), {x}, [xn, outer, inner, len](Node& node) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    const double inv = 1.0 / static_cast<double>(len);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t a = 0; a < len; ++a)
        for (std::size_t i = 0; i < inner; ++i)
          xn->grad[(o * len + a) * inner + i] += node.grad[o * inner + i] * inv;
  });
}

Tensor sum_all(const Tensor& x) {
  check_defined(x, "sum_all");
  double total = 0.0;
  for (double v : x.values()) total += v;
  auto xn = x.node();
  return make_op({}, {total}, {x}, [xn](Node& node) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (auto& g : xn->grad) g += node.grad[0];
  });
}

// --- shape ops -------------------------------------------------------------------

Tensor concat_lastdim(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_lastdim: no inputs");
  for (const auto& p : parts) check_defined(p, "concat_lastdim");
  const Shape& first = parts[0].shape();
  if (first.empty()) throw ShapeError("concat_lastdim: rank-0 inputs unsupported");
  std::size_t total_last = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    if (s.size() != first.size()) {
      throw ShapeError("concat_lastdim: rank mismatch " + shape_str(first) + " vs " +
                       shape_str(s));
    }
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      if (s[i] != first[i]) {
        throw ShapeError("concat_lastdim: leading dims differ " + shape_str(first) + " vs " +
                         shape_str(s));
      }
    }
    total_last += s.back();
  }
  Shape out_shape = first;
  out_shape.back() = total_last;
  std::size_t rows = shape_numel(out_shape) / std::max<std::size_t>(total_last, 1);
  std::vector<double> out(shape_numel(out_shape));
  std::size_t col_off = 0;
  for (const auto& p : parts) {
    const std::size_t w = p.shape().back();
    auto v = p.values();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < w; ++j) out[r * total_last + col_off + j] = v[r * w + j];
    col_off += w;
  }
  std::vector<detail::NodePtr> nodes;
  std::vector<std::size_t> widths;
  for (const auto& p : parts) {
    nodes.push_back(p.node());
    widths.push_back(p.shape().back());
  }
  return make_op(out_shape, std::move(out), parts,
                 [nodes, widths, rows, total_last](Node& node) {
                   std::size_t off = 0;
                   for (std::size_t k = 0; k < nodes.size(); ++k) {
                     const std::size_t w = widths[k];
                     if (nodes[k]->requires_grad) {
                       nodes[k]->ensure_grad();
                       for (std::size_t r = 0; r < rows; ++r)
                         for (std::size_t j = 0; j < w; ++j)
                           nodes[k]->grad[r * w + j] += node.grad[r * total_last + off + j];
                     }
                     off += w;
                   }
                 });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  for (const auto& p : parts) check_defined(p, "concat_rows");
  std::size_t cols = 0, rows = 0;
  for (const auto& p : parts) {
    if (p.rank() != 2) throw ShapeError("concat_rows: expected rank 2, got " + shape_str(p.shape()));
    if (cols == 0) cols = p.shape()[1];
    if (p.shape()[1] != cols) {
      throw ShapeError("concat_rows: column counts differ (" + std::to_string(cols) + " vs " +
                       std::to_string(p.shape()[1]) + ")");
    }
    rows += p.shape()[0];
  }
  std::vector<double> out;
  out.reserve(rows * cols);
  for (const auto& p : parts) {
    auto v = p.values();
    out.insert(out.end(), v.begin(), v.end());
  }
  std::vector<detail::NodePtr> nodes;
  std::vector<std::size_t> counts;
  for (const auto& p : parts) {
    nodes.push_back(p.node());
    counts.push_back(p.numel());
  }
  return make_op({rows, cols}, std::move(out), parts, [nodes, counts](Node& node) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (nodes[k]->requires_grad) {
        nodes[k]->ensure_grad();
        for (std::size_t i = 0; i < counts[k]; ++i) nodes[k]->grad[i] += node.grad[off + i];
      }
      off += counts[k];
    }
  });
}

Tensor slice_rows(const Tensor& x, std::size_t start, std::size_t count) {
  check_defined(x, "slice_rows");
  if (x.rank() != 2) throw ShapeError("slice_rows: expected rank 2, got " + shape_str(x.shape()));
  const std::size_t rows = x.shape()[0], cols = x.shape()[1];
  if (start + count > rows) {
    throw ShapeError("slice_rows: [" + std::to_string(start) + ", " +
                     std::to_string(start + count) + ") out of range for " +
                     shape_str(x.shape()));
  }
  auto v = x.values();
  std::vector<double> out(v.begin() + static_cast<std::ptrdiff_t>(start * cols),
                          v.begin() + static_cast<std::ptrdiff_t>((start + count) * cols));
  auto xn = x.node();
  return make_op({count, cols}, std::move(out), {x}, [xn, start, cols](Node& node) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (std::size_t i = 0; i < node.grad.size(); ++i) xn->grad[start * cols + i] += node.grad[i];
  });
}

Tensor reshape(const Tensor& x, const Shape& shape) {
  check_defined(x, "reshape");
  if (shape_numel(shape) != x.numel()) {
    throw ShapeError("reshape: " + shape_str(x.shape()) + " cannot become " + shape_str(shape));
  }
  auto v = x.values();
  auto xn = x.node();
  return make_op(shape, std::vector<double>(v.begin(), v.end()), {x}, [xn](Node& node) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (std::size_t i = 0; i < node.grad.size(); ++i) xn->grad[i] += node.grad[i];
  });
}

Tensor embedding_lookup(const Tensor& table, const std::vector<int>& ids) {
  check_defined(table, "embedding_lookup");
  if (table.rank() != 2) {
    throw ShapeError("embedding_lookup: table must be rank 2, got " + shape_str(table.shape()));
  }
  const std::size_t vocab = table.shape()[0], dim = table.shape()[1];
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      throw IndexError("embedding_lookup: id " + std::to_string(id) + " out of range [0, " +
                       std::to_string(vocab) + ")");
    }
  }
  std::vector<double> out(ids.size() * dim);
  auto v = table.values();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const double* row = v.data() + static_cast<std::size_t>(ids[i]) * dim;
    std::copy(row, row + dim, out.data() + i * dim);
  }
  auto tn = table.node();
  auto ids_copy = std::make_shared<std::vector<int>>(ids);
  return make_op({ids.size(), dim}, std::move(out), {table}, [tn, dim, ids_copy](Node& node) {
    if (!tn->requires_grad) return;
    tn->ensure_grad();
    for (std::size_t i = 0; i < ids_copy->size(); ++i) {
      double* dst = tn->grad.data() + static_cast<std::size_t>((*ids_copy)[i]) * dim;
      const double* src = node.grad.data() + i * dim;
      for (std::size_t j = 0; j < dim; ++j) dst[j] += src[j];
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias) {
  check_defined(x, "layer_norm");
  check_defined(gain, "layer_norm");
  check_defined(bias, "layer_norm");
  check_lastdim("layer_norm", x);
  const std::size_t d = x.shape().back();
  if (gain.numel() != d || bias.numel() != d) {
    throw ShapeError("layer_norm: gain/bias must have " + std::to_string(d) + " elements, got " +
                     shape_str(gain.shape()) + " and " + shape_str(bias.shape()));
  }
  constexpr double kEps = 1e-5;
  const std::size_t rows = x.numel() / d;
  auto xv = x.values();
  auto gv = gain.values();
  auto bv = bias.values();
  std::vector<double> out(x.numel());
  auto xhat = std::make_shared<std::vector<double>>(x.numel());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xv.data() + r * d;
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += in[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      double c = in[j] - mean;
      var += c * c;
    }
    var /= static_cast<double>(d);
    const double istd = 1.0 / std::sqrt(var + kEps);
    (*inv_std)[r] = istd;
    for (std::size_t j = 0; j < d; ++j) {
      double h = (in[j] - mean) * istd;
      (*xhat)[r * d + j] = h;
      out[r * d + j] = gv[j] * h + bv[j];
    }
  }
  auto xnode = x.node();
  auto gnode = gain.node();
  auto bnode = bias.node();
  return make_op(x.shape(), std::move(out), {x, gain, bias},
                 [xnode, gnode, bnode, d, rows, xhat, inv_std](Node& node) {
                   for (std::size_t r = 0; r < rows; ++r) {
                     const double* dy = node.grad.data() + r * d;
                     const double* h = xhat->data() + r * d;
                     const double istd = (*inv_std)[r];
                     if (gnode->requires_grad) {
                       gnode->ensure_grad();
                       for (std::size_t j = 0; j < d; ++j) gnode->grad[j] += dy[j] * h[j];
                     }
                     if (bnode->requires_grad) {
                       bnode->ensure_grad();
                       for (std::size_t j = 0; j < d; ++j) bnode->grad[j] += dy[j];
                     }
                     if (xnode->requires_grad) {
                       xnode->ensure_grad();
                       // dl/dx = istd/d * (d*dh - sum(dh) - h * sum(dh*h))
                       double sum_dh = 0.0, sum_dh_h = 0.0;
                       const auto& gval = gnode->value;
                       for (std::size_t j = 0; j < d; ++j) {
                         double dh = dy[j] * gval[j];
                         sum_dh += dh;
                         sum_dh_h += dh * h[j];
                       }
                       double* dx = xnode->grad.data() + r * d;
                       const double dd = static_cast<double>(d);
                       for (std::size_t j = 0; j < d; ++j) {
                         double dh = dy[j] * gval[j];
                         dx[j] += istd * (dh - sum_dh / dd - h[j] * sum_dh_h / dd);
                       }
                     }
                   }
                 });
}

Tensor pick_per_row(const Tensor& x, const std::vector<int>& ids) {
  check_defined(x, "pick_per_row");
  if (x.rank() != 2) throw ShapeError("pick_per_row: expected rank 2, got " + shape_str(x.shape()));
  const std::size_t rows = x.shape()[0], cols = x.shape()[1];
  if (ids.size() != rows) {
    throw ShapeError("pick_per_row: " + std::to_string(ids.size()) + " ids for " +
                     std::to_string(rows) + " rows");
  }
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= cols) {
      throw IndexError("pick_per_row: id " + std::to_string(id) + " out of range [0, " +
                       std::to_string(cols) + ")");
    }
  }
  std::vector<double> out(rows);
  auto v = x.values();
  for (std::size_t r = 0; r < rows; ++r) out[r] = v[r * cols + static_cast<std::size_t>(ids[r])];
  auto xn = x.node();
  auto ids_copy = std::make_shared<std::vector<int>>(ids);
  return make_op({rows}, std::move(out), {x}, [xn, cols, ids_copy](Node& node) {
    if (!xn->requires_grad) return;
    xn->ensure_grad();
    for (std::size_t r = 0; r < ids_copy->size(); ++r) {
      xn->grad[r * cols + static_cast<std::size_t>((*ids_copy)[r])] += node.grad[r];
    }
  });
}

// --- init helpers ----------------------------------------------------------------

Tensor uniform_init(const Shape& shape, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(shape_numel(shape));
  for (auto& e : v) e = dist(rng);
  return Tensor::from(shape, std::move(v));
}

Tensor normal_init(const Shape& shape, double mean, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(mean, stddev);
  std::vector<double> v(shape_numel(shape));
  for (auto& e : v) e = dist(rng);
  return Tensor::from(shape, std::move(v));
}

Tensor xavier_init(const Shape& shape, std::size_t fan_in, std::size_t fan_out,
                   std::mt19937_64& rng) {
  double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return uniform_init(shape, -a, a, rng);
}

bool all_finite(const Tensor& x) {
  for (double v : x.values()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace videoqg
