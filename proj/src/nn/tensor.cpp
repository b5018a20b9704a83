#include "ccorl/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "ccorl/common.hpp"

namespace ccorl::nn {

Tensor::Tensor(int rows, int cols, double fill)
    : shape_{rows, cols}, data_(static_cast<std::size_t>(rows) * cols, fill) {}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  std::size_t n = 1;
  for (int d : shape_) {
    if (d < 0) throw ValidationError("negative tensor dimension");
    n *= static_cast<std::size_t>(d);
  }
  if (n != data_.size())
    throw ValidationError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                          shape_string(shape_));
}

Tensor Tensor::row(std::vector<double> values) {
  const int n = static_cast<int>(values.size());
  return Tensor({1, n}, std::move(values));
}

double Tensor::item() const {
  if (data_.size() != 1) throw ContractViolation("item() on a tensor of shape " + shape_string(shape_));
  return data_[0];
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string shape_string(const std::vector<int>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

ParamId ParamStore::add(std::string name, Tensor init) {
  if (find(name) >= 0) throw ContractViolation("duplicate parameter name '" + name + "'");
  names_.push_back(std::move(name));
  grads_.emplace_back(init.shape(), std::vector<double>(init.size(), 0.0));
  values_.push_back(std::move(init));
  return static_cast<ParamId>(values_.size() - 1);
}

ParamId ParamStore::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return static_cast<ParamId>(i);
  return -1;
}

ParamId ParamStore::at(std::string_view name) const {
  const ParamId id = find(name);
  if (id < 0) throw ValidationError("unknown parameter '" + std::string(name) + "'");
  return id;
}

std::size_t ParamStore::num_scalars() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& g : grads_) g.fill(0.0);
}

Gradients::Gradients(const ParamStore& params) {
  grads_.reserve(params.size());
  for (ParamId i = 0; i < params.size(); ++i)
    grads_.emplace_back(params.value(i).shape(), std::vector<double>(params.value(i).size(), 0.0));
}

void Gradients::zero() {
  for (auto& g : grads_) g.fill(0.0);
}

void Gradients::add(const Gradients& other) {
  if (other.grads_.size() != grads_.size()) throw ContractViolation("gradient buffers do not match");
  for (std::size_t i = 0; i < grads_.size(); ++i) {
    auto dst = grads_[i].values();
    auto src = other.grads_[i].values();
    if (dst.size() != src.size()) throw ContractViolation("gradient shapes do not match");
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
}

void Gradients::scale(double s) {
  for (auto& g : grads_)
    for (double& v : g.values()) v *= s;
}

double Gradients::norm() const {
  double sq = 0;
  for (const auto& g : grads_)
    for (double v : g.values()) sq += v * v;
  return std::sqrt(sq);
}

void Gradients::add_into(ParamStore& params) const {
  if (params.size() != size()) throw ContractViolation("gradient buffer does not match parameter store");
  for (ParamId i = 0; i < params.size(); ++i) {
    auto dst = params.grad(i).values();
    auto src = grads_[i].values();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
}

double clip_global_norm(ParamStore& params, double max_norm) {
  double sq = 0;
  for (ParamId i = 0; i < params.size(); ++i)
    for (double v : params.grad(i).values()) sq += v * v;
  const double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (ParamId i = 0; i < params.size(); ++i)
      for (double& v : params.grad(i).values()) v *= s;
  }
  return norm;
}

}  // namespace ccorl::nn
