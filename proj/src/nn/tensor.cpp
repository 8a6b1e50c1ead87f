#include "ralm/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ralm::nn {

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
  size_t n = 1;
  for (int d : shape_) {
    if (d <= 0) throw std::invalid_argument("tensor dims must be positive");
    n *= static_cast<size_t>(d);
  }
  data_.assign(n, 0.0);
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Tensor::shape_str() const {
  std::string s = "(";
  for (size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape_[i]);
  }
  return s + ")";
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* where) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(where) + ": shape mismatch " + a.shape_str() +
                                " vs " + b.shape_str());
  }
}

}  // namespace ralm::nn
