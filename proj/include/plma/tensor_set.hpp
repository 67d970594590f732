#pragma once

#include <string>
#include <vector>

#include "plma/instances.hpp"

namespace plma {

// Ordered collection of named real tensors. Parameters, gradients and
// optimizer moments all share this layout so they can be walked in lockstep.
class TensorSet {
 public:
  std::size_t add(std::string name, Matrix value);

  std::size_t size() const { return values_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  Matrix& operator[](std::size_t i) { return values_[i]; }
  const Matrix& operator[](std::size_t i) const { return values_[i]; }

  // Throws std::out_of_range for unknown names.
  std::size_t index(const std::string& name) const;
  Matrix& at(const std::string& name) { return values_[index(name)]; }
  const Matrix& at(const std::string& name) const { return values_[index(name)]; }

  TensorSet zeros_like() const;
  void set_zero();
  bool same_layout(const TensorSet& other) const;
  std::size_t total_size() const;

  // this += scale * other (layouts must match)
  void axpy(double scale, const TensorSet& other);

  friend bool operator==(const TensorSet& a, const TensorSet& b);

 private:
  std::vector<std::string> names_;
  std::vector<Matrix> values_;
};

}  // namespace plma
