#include "videoqg/params.hpp"

namespace videoqg {

Tensor ParameterStore::add(const std::string& name, Tensor tensor) {
  if (params_.count(name)) {
    throw ConfigError("duplicate parameter name '" + name + "'");
  }
  tensor.set_requires_grad(true);
  params_.emplace(name, tensor);
  return tensor;
}

const Tensor& ParameterStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second;
}

std::size_t ParameterStore::total_elements() const {
  std::size_t n = 0;
  for (const auto& [name, t] : params_) n += t.numel();
  return n;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, t] : params_) out.push_back(name);
  return out;
}

void ParameterStore::zero_grads() {
  for (auto& [name, t] : params_) t.zero_grad();
}

Affine Affine::create(ParameterStore& store, const std::string& prefix, std::size_t in,
                      std::size_t out, std::mt19937_64& rng) {
  Affine a;
  a.W = store.add(prefix + ".W", xavier_init({in, out}, in, out, rng));
  a.b = store.add(prefix + ".b", Tensor::zeros({1, out}));
  return a;
}

}  // namespace videoqg
