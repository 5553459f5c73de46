#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "hmnet/rng.hpp"
#include "hmnet/tensor.hpp"

namespace hmnet {

/// Named parameter tensors with matching same-shaped gradient slots.
/// Declaration order is preserved and is the iteration order everywhere
/// (optimizer steps, serialization), which keeps training deterministic.
class ParamStore {
 public:
  std::size_t declare(const std::string& name, std::vector<std::size_t> shape);

  /// Declare and fill with the uniform fan-in initialization
  /// U[-1/sqrt(fan_in), +1/sqrt(fan_in)].
  std::size_t declare_init(const std::string& name, std::vector<std::size_t> shape,
                           std::size_t fan_in, Rng& rng);

  bool has(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t index_of(const std::string& name) const;

  Tensor& value(const std::string& name) { return values_[index_of(name)]; }
  const Tensor& value(const std::string& name) const { return values_[index_of(name)]; }
  Tensor& grad(const std::string& name) { return grads_[index_of(name)]; }
  const Tensor& grad(const std::string& name) const { return grads_[index_of(name)]; }

  Tensor& value_at(std::size_t i) { return values_[i]; }
  const Tensor& value_at(std::size_t i) const { return values_[i]; }
  Tensor& grad_at(std::size_t i) { return grads_[i]; }
  const Tensor& grad_at(std::size_t i) const { return grads_[i]; }

  const std::vector<std::string>& names() const { return names_; }
  std::size_t count() const { return names_.size(); }

  /// Total scalar parameter count.
  std::size_t scalar_count() const;

  void zero_grads();

  /// FNV-1a hash over the raw value bytes; used by tests to detect mutation.
  std::uint64_t value_hash() const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Tensor> values_;
  std::vector<Tensor> grads_;
};

}  // namespace hmnet
