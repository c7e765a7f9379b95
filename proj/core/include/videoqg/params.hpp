#pragma once

#include <map>
#include <string>
#include <vector>

#include "videoqg/tensor.hpp"

namespace videoqg {

// Named trainable tensor. The name is a dotted path into the owning model
// ("encoder.video.layer0.attn.head2.Wq") and fixes serialization order.
struct Parameter {
  std::string name;
  Tensor tensor;
};

class ParameterStore {
 public:
  // Registers a leaf tensor as trainable. Throws on duplicate names.
  Tensor add(const std::string& name, Tensor tensor);

  const Tensor& at(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.count(name) > 0; }
  std::size_t size() const { return params_.size(); }
  std::size_t total_elements() const;

  // Name-sorted view (std::map keeps it ordered).
  const std::map<std::string, Tensor>& items() const { return params_; }
  std::vector<std::string> names() const;

  void zero_grads();

 private:
  std::map<std::string, Tensor> params_;
};

// y = x W + b with W [in x out], b [1 x out].
struct Affine {
  Tensor W;
  Tensor b;

  static Affine create(ParameterStore& store, const std::string& prefix, std::size_t in,
                       std::size_t out, std::mt19937_64& rng);
  Tensor operator()(const Tensor& x) const { return add(matmul(x, W), b); }
};

}  // namespace videoqg
