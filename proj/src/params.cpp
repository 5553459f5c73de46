#include "hmnet/params.hpp"

#include <cmath>
#include <cstring>

#include "hmnet/error.hpp"

namespace hmnet {

std::size_t ParamStore::declare(const std::string& name, std::vector<std::size_t> shape) {
  if (index_.count(name)) raise(ErrorKind::Config, "duplicate parameter name: " + name);
  const std::size_t i = names_.size();
  names_.push_back(name);
  index_[name] = i;
  values_.push_back(Tensor::zeros(shape));
  grads_.push_back(Tensor::zeros(std::move(shape)));
  return i;
}

std::size_t ParamStore::declare_init(const std::string& name, std::vector<std::size_t> shape,
                                     std::size_t fan_in, Rng& rng) {
  const std::size_t i = declare(name, std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in > 0 ? fan_in : 1));
  for (double& v : values_[i].data) v = rng.uniform(-bound, bound);
  return i;
}

std::size_t ParamStore::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) raise(ErrorKind::Config, "unknown parameter: " + name);
  return it->second;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const Tensor& t : values_) n += t.size();
  return n;
}

void ParamStore::zero_grads() {
  for (Tensor& g : grads_)
    for (double& v : g.data) v = 0.0;
}

std::uint64_t ParamStore::value_hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (const Tensor& t : values_) {
    for (double v : t.data) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      for (int b = 0; b < 8; ++b) {
        h ^= (bits >> (8 * b)) & 0xff;
        h *= 1099511628211ull;
      }
    }
  }
  return h;
}

}  // namespace hmnet
