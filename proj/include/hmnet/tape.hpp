#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "hmnet/params.hpp"
#include "hmnet/tensor.hpp"

namespace hmnet {

/// Handle to a node on a Tape. Only valid for the tape that produced it.
struct Value {
  std::uint32_t idx = UINT32_MAX;
  bool valid() const { return idx != UINT32_MAX; }
};

/// Recorded computation for reverse-mode differentiation. Operations append
/// nodes; backward() walks them in reverse and accumulates into the bound
/// ParamStore's gradient slots. One tape per forward pass, single-threaded.
class Tape {
 public:
  explicit Tape(ParamStore* store = nullptr) : store_(store) {}

  /// Constant input; gradients do not flow into it.
  Value input(Tensor t);

  /// Leaf bound to a named parameter of the bound store. Memoized so every
  /// use of a parameter on this tape shares one node (and one grad slot).
  Value param(const std::string& name);

  // Elementwise arithmetic (operands must share a shape).
  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  Value mul(Value a, Value b);
  Value div(Value a, Value b);
  Value scale(Value a, double c);
  Value add_const(Value a, double c);

  // Nonlinearities.
  Value sigmoid(Value a);
  Value tanh(Value a);
  Value exp(Value a);
  Value log(Value a);
  Value leaky_relu(Value a, double negative_slope);

  // Linear algebra and tensor ops.
  Value matvec(Value w, Value x);
  Value concat(const std::vector<Value>& parts);
  Value slice(Value a, std::size_t offset, std::size_t len);
  Value sum(Value a);
  Value mean(Value a);

  /// Valid cross-correlation, stride 1. input C x H x W, kernels O x C x Kh x Kw.
  Value conv2d(Value input, Value kernels, Value bias);

  /// Non-overlapping max pooling; extents must divide exactly.
  Value maxpool2d(Value input, std::size_t pool_h, std::size_t pool_w);

  /// Zero grid of shape channels x rows x cols with the given fibers written
  /// at their cells. Fibers must be vectors of length `channels`.
  Value scatter_grid(std::size_t channels, std::size_t rows, std::size_t cols,
                     const std::vector<std::tuple<std::size_t, std::size_t, Value>>& fibers);

  const Tensor& value(Value v) const { return nodes_[v.idx].value; }
  const Tensor& grad(Value v) const { return nodes_[v.idx].grad; }

  /// Scalar value of a size-1 node.
  double scalar(Value v) const;

  /// Reverse sweep from a scalar root; adds parameter gradients into the
  /// bound store (slots accumulate; callers zero between steps).
  void backward(Value root);

  std::size_t node_count() const { return nodes_.size(); }
  ParamStore* store() const { return store_; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::function<void(Tape&, std::uint32_t)> back;  // nullptr for constants
    std::int32_t param_index = -1;
  };

  Value push(Tensor value, std::function<void(Tape&, std::uint32_t)> back);
  Tensor& grad_mut(Value v) { return nodes_[v.idx].grad; }
  void require_same_shape(Value a, Value b, const char* op) const;

  std::vector<Node> nodes_;
  ParamStore* store_;
  std::unordered_map<std::string, Value> param_cache_;
};

}  // namespace hmnet
