#include "plma/tensor_set.hpp"

#include <stdexcept>

namespace plma {

std::size_t TensorSet::add(std::string name, Matrix value) {
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return values_.size() - 1;
}

std::size_t TensorSet::index(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  throw std::out_of_range("no tensor named '" + name + "'");
}

TensorSet TensorSet::zeros_like() const {
  TensorSet out;
  for (std::size_t i = 0; i < size(); ++i)
    out.add(names_[i], Matrix::Zero(values_[i].rows(), values_[i].cols()));
  return out;
}

void TensorSet::set_zero() {
  for (auto& v : values_) v.setZero();
}

bool TensorSet::same_layout(const TensorSet& other) const {
  if (size() != other.size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (names_[i] != other.names_[i] || values_[i].rows() != other.values_[i].rows() ||
        values_[i].cols() != other.values_[i].cols()) {
      return false;
    }
  }
  return true;
}

std::size_t TensorSet::total_size() const {
  std::size_t total = 0;
  for (const auto& v : values_) total += static_cast<std::size_t>(v.size());
  return total;
}

void TensorSet::axpy(double scale, const TensorSet& other) {
  if (!same_layout(other)) throw std::invalid_argument("tensor set layouts differ");
  for (std::size_t i = 0; i < size(); ++i) values_[i] += scale * other.values_[i];
}

bool operator==(const TensorSet& a, const TensorSet& b) {
  if (!a.same_layout(b)) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.values_[i] != b.values_[i]) return false;
  return true;
}

}  // namespace plma
