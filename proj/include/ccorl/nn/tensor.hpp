#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ccorl::nn {

// Dense row-major tensor of doubles. Layer code works on rank-2 tensors;
// a scalar is 1x1.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int rows, int cols, double fill = 0.0);
  Tensor(std::vector<int> shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor(1, 1, v); }
  static Tensor row(std::vector<double> values);

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int rows() const { return shape_.empty() ? 0 : shape_[0]; }
  int cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }
  std::size_t size() const { return data_.size(); }
  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols() + c]; }
  double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols() + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  double item() const;
  void fill(double v);
  bool all_finite() const;

  bool operator==(const Tensor&) const = default;

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

std::string shape_string(const std::vector<int>& shape);

using ParamId = int;

// Named parameters with matching gradient accumulators.
class ParamStore {
 public:
  ParamId add(std::string name, Tensor init);
  // -1 when absent.
  ParamId find(std::string_view name) const;
  ParamId at(std::string_view name) const;

  Tensor& value(ParamId id) { return values_[id]; }
  const Tensor& value(ParamId id) const { return values_[id]; }
  Tensor& grad(ParamId id) { return grads_[id]; }
  const Tensor& grad(ParamId id) const { return grads_[id]; }
  const std::string& name(ParamId id) const { return names_[id]; }

  int size() const { return static_cast<int>(values_.size()); }
  std::size_t num_scalars() const;
  void zero_grad();

  bool operator==(const ParamStore& o) const { return names_ == o.names_ && values_ == o.values_; }

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::vector<Tensor> grads_;
};

// Gradient buffer shaped like a ParamStore; used by workers that must not
// touch the shared store.
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParamStore& params);

  Tensor& operator[](ParamId id) { return grads_[id]; }
  const Tensor& operator[](ParamId id) const { return grads_[id]; }
  int size() const { return static_cast<int>(grads_.size()); }

  void zero();
  void add(const Gradients& other);
  void scale(double s);
  double norm() const;
  void add_into(ParamStore& params) const;

 private:
  std::vector<Tensor> grads_;
};

// Global-norm clipping; returns the norm before clipping.
double clip_global_norm(ParamStore& params, double max_norm);

}  // namespace ccorl::nn
