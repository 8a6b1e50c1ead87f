#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace ralm::nn {

// Dense row-major double tensor. Shapes are (B, C, H, W) for feature maps
// and (B, F) for dense stages; double precision throughout so gradient
// checks run in reference mode.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

  const std::vector<int>& shape() const { return shape_; }
  int dim(int i) const { return shape_[i]; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  size_t numel() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  double& at4(int b, int c, int h, int w) {
    return data_[((static_cast<size_t>(b) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }
  double at4(int b, int c, int h, int w) const {
    return data_[((static_cast<size_t>(b) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }
  double& at2(int b, int f) { return data_[static_cast<size_t>(b) * shape_[1] + f]; }
  double at2(int b, int f) const { return data_[static_cast<size_t>(b) * shape_[1] + f]; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  bool all_finite() const;

  std::string shape_str() const;

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

void check_same_shape(const Tensor& a, const Tensor& b, const char* where);

}  // namespace ralm::nn
