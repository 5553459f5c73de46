#include "hmnet/tape.hpp"

#include <cmath>
#include <memory>
#include <tuple>

#include "hmnet/error.hpp"

namespace hmnet {

Value Tape::push(Tensor value, std::function<void(Tape&, std::uint32_t)> back) {
  Node n;
  n.grad = Tensor::zeros(value.shape);
  n.value = std::move(value);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Value{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

void Tape::require_same_shape(Value a, Value b, const char* op) const {
  if (!value(a).same_shape(value(b)))
    raise(ErrorKind::Dimension, std::string(op) + ": operand shapes " + value(a).shape_str() +
                                    " and " + value(b).shape_str() + " differ");
}

Value Tape::input(Tensor t) { return push(std::move(t), nullptr); }

Value Tape::param(const std::string& name) {
  auto it = param_cache_.find(name);
  if (it != param_cache_.end()) return it->second;
  if (!store_) raise(ErrorKind::Config, "tape has no parameter store bound");
  const std::size_t pi = store_->index_of(name);
  Value v = push(store_->value_at(pi), nullptr);
  nodes_[v.idx].param_index = static_cast<std::int32_t>(pi);
  param_cache_[name] = v;
  return v;
}

Value Tape::add(Value a, Value b) {
  require_same_shape(a, b, "add");
  Tensor out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += value(b)[i];
  return push(std::move(out), [a, b](Tape& t, std::uint32_t self) {
    const Tensor& g = t.nodes_[self].grad;
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i];
      gb[i] += g[i];
    }
  });
}

Value Tape::sub(Value a, Value b) {
  require_same_shape(a, b, "sub");
  Tensor out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= value(b)[i];
  return push(std::move(out), [a, b](Tape& t, std::uint32_t self) {
    const Tensor& g = t.nodes_[self].grad;
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i];
      gb[i] -= g[i];
    }
  });
}

Value Tape::mul(Value a, Value b) {
  require_same_shape(a, b, "mul");
  Tensor out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= value(b)[i];
  return push(std::move(out), [a, b](Tape& t, std::uint32_t self) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& va = t.value(a);
    const Tensor& vb = t.value(b);
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i] * vb[i];
      gb[i] += g[i] * va[i];
    }
  });
}

Value Tape::div(Value a, Value b) {
  require_same_shape(a, b, "div");
  Tensor out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= value(b)[i];
  return push(std::move(out), [a, b](Tape& t, std::uint32_t self) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& va = t.value(a);
    const Tensor& vb = t.value(b);
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i] / vb[i];
      gb[i] -= g[i] * va[i] / (vb[i] * vb[i]);
    }
  });
}

Value Tape::scale(Value a, double c) {
  Tensor out = value(a);
  for (double& v : out.data) v *= c;
  return push(std::move(out), [a, c](Tape& t, std::uint32_t self) {
    const Tensor& g = t.nodes_[self].grad;
    Tensor& ga = t.grad_mut(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += c * g[i];
  });
}

Value Tape::add_const(Value a, double c) {
  Tensor out = value(a);
  for (double& v : out.data) v += c;
  return push(std::move(out), [a](Tape& t, std::uint32_t self) {
    const Tensor& g = t.nodes_[self].grad;
    Tensor& ga = t.grad_mut(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

Value Tape::sigmoid(Value a) {
  Tensor out = value(a);
  for (double& v : out.data) {
    if (v >= 0.0) {
      v = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      v = e / (1.0 + e);
    }
  }
  return push(std::move(out), [a](Tape& t, std::uint32_t self) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& y = t.nodes_[self].value;
    Tensor& ga = t.grad_mut(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Value Tape::tanh(Value a) {
  Tensor out = value(a);
  for (double& v : out.data) v = std::tanh(v);
  return push(std::move(out), [a](Tape& t, std::uint32_t self) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& y = t.nodes_[self].value;
    Tensor& ga = t.grad_mut(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Value Tape::exp(Value a) {
  Tensor out = value(a);
  for (double& v : out.data) v = std::exp(v);
  return push(std::move(out), [a](Tape& t, std::uint32_t self) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& y = t.nodes_[self].value;
    Tensor& ga = t.grad_mut(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i];
  });
}

Value Tape::log(Value a) {
  Tensor out = value(a);
  for (double& v : out.data) {
    if (v <= 0.0) raise(ErrorKind::Validity, "log of non-positive value");
    v = std::log(v);
  }
  return push(std::move(out), [a](Tape& t, std::uint32_t self) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& x = t.value(a);
    Tensor& ga = t.grad_mut(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / x[i];
  });
}

Value Tape::leaky_relu(Value a, double negative_slope) {
  Tensor out = value(a);
  for (double& v : out.data) v = v > 0.0 ? v : negative_slope * v;
  return push(std::move(out), [a, negative_slope](Tape& t, std::uint32_t self) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& x = t.value(a);
    Tensor& ga = t.grad_mut(a);
    for (std::size_t i = 0; i < g.size(); ++i)
      ga[i] += g[i] * (x[i] > 0.0 ? 1.0 : negative_slope);
  });
}

Value Tape::matvec(Value w, Value x) {
  const Tensor& W = value(w);
  const Tensor& X = value(x);
  if (W.rank() != 2 || X.rank() != 1 || W.shape[1] != X.shape[0])
    raise(ErrorKind::Dimension,
          "matvec: matrix " + W.shape_str() + " incompatible with vector " + X.shape_str());
  const std::size_t m = W.shape[0], n = W.shape[1];
  Tensor out = Tensor::zeros({m});
  for (std::size_t r = 0; r < m; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < n; ++c) acc += W.data[r * n + c] * X[c];
    out[r] = acc;
  }
  return push(std::move(out), [w, x, m, n](Tape& t, std::uint32_t self) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& W = t.value(w);
    const Tensor& X = t.value(x);
    Tensor& gw = t.grad_mut(w);
    Tensor& gx = t.grad_mut(x);
    for (std::size_t r = 0; r < m; ++r) {
      const double gr = g[r];
      for (std::size_t c = 0; c < n; ++c) {
        gw.data[r * n + c] += gr * X[c];
        gx[c] += gr * W.data[r * n + c];
      }
    }
  });
}

Value Tape::concat(const std::vector<Value>& parts) {
  std::size_t total = 0;
  for (Value p : parts) {
    if (value(p).rank() != 1) raise(ErrorKind::Dimension, "concat expects vectors");
    total += value(p).size();
  }
  Tensor out = Tensor::zeros({total});
  std::size_t off = 0;
  for (Value p : parts) {
    const Tensor& v = value(p);
    for (std::size_t i = 0; i < v.size(); ++i) out[off + i] = v[i];
    off += v.size();
  }
  return push(std::move(out), [parts](Tape& t, std::uint32_t self) {
    const Tensor& g = t.nodes_[self].grad;
    std::size_t off = 0;
    for (Value p : parts) {
      Tensor& gp = t.grad_mut(p);
      for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[off + i];
      off += gp.size();
    }
  });
}

Value Tape::slice(Value a, std::size_t offset, std::size_t len) {
  const Tensor& v = value(a);
  if (v.rank() != 1 || offset + len > v.size())
    raise(ErrorKind::Dimension, "slice [" + std::to_string(offset) + ", " +
                                    std::to_string(offset + len) + ") out of range for " +
                                    v.shape_str());
  Tensor out = Tensor::zeros({len});
  for (std::size_t i = 0; i < len; ++i) out[i] = v[offset + i];
  return push(std::move(out), [a, offset, len](Tape& t, std::uint32_t self) {
    const Tensor& g = t.nodes_[self].grad;
    Tensor& ga = t.grad_mut(a);
    for (std::size_t i = 0; i < len; ++i) ga[offset + i] += g[i];
  });
}

Value Tape::sum(Value a) {
  double acc = 0.0;
  for (double v : value(a).data) acc += v;
  return push(Tensor::scalar(acc), [a](Tape& t, std::uint32_t self) {
    const double g = t.nodes_[self].grad[0];
    Tensor& ga = t.grad_mut(a);
    for (double& v : ga.data) v += g;
  });
}

Value Tape::mean(Value a) {
  const std::size_t n = value(a).size();
  double acc = 0.0;
  for (double v : value(a).data) acc += v;
  return push(Tensor::scalar(acc / static_cast<double>(n)), [a, n](Tape& t, std::uint32_t self) {
    const double g = t.nodes_[self].grad[0] / static_cast<double>(n);
    Tensor& ga = t.grad_mut(a);
    for (double& v : ga.data) v += g;
  });
}

Value Tape::conv2d(Value input, Value kernels, Value bias) {
  const Tensor& in = value(input);
  const Tensor& k = value(kernels);
  const Tensor& b = value(bias);
  if (in.rank() != 3 || k.rank() != 4)
    raise(ErrorKind::Dimension, "conv2d: input " + in.shape_str() + ", kernels " + k.shape_str());
  const std::size_t C = in.shape[0], H = in.shape[1], W = in.shape[2];
  const std::size_t O = k.shape[0], Kh = k.shape[2], Kw = k.shape[3];
  if (k.shape[1] != C)
    raise(ErrorKind::Dimension, "conv2d: kernel channels " + k.shape_str() +
                                    " do not match input " + in.shape_str());
  if (Kh > H || Kw > W)
    raise(ErrorKind::Dimension,
          "conv2d: kernel " + k.shape_str() + " larger than input " + in.shape_str());
  if (b.rank() != 1 || b.shape[0] != O)
    raise(ErrorKind::Dimension, "conv2d: bias " + b.shape_str() + " does not match " +
                                    std::to_string(O) + " kernels");
  const std::size_t Ho = H - Kh + 1, Wo = W - Kw + 1;
  Tensor out = Tensor::zeros({O, Ho, Wo});
  for (std::size_t o = 0; o < O; ++o)
    for (std::size_t i = 0; i < Ho; ++i)
      for (std::size_t j = 0; j < Wo; ++j) {
        double acc = b[o];
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t u = 0; u < Kh; ++u)
            for (std::size_t v = 0; v < Kw; ++v)
              acc += in.at(c, i + u, j + v) * k.data[((o * C + c) * Kh + u) * Kw + v];
        out.at(o, i, j) = acc;
      }
  return push(std::move(out), [input, kernels, bias, C, O, Kh, Kw, Ho, Wo](Tape& t,
                                                                           std::uint32_t self) {
    const Tensor& g = t.nodes_[self].grad;
    const Tensor& in = t.value(input);
    const Tensor& k = t.value(kernels);
    Tensor& gin = t.grad_mut(input);
    Tensor& gk = t.grad_mut(kernels);
    Tensor& gb = t.grad_mut(bias);
    for (std::size_t o = 0; o < O; ++o)
      for (std::size_t i = 0; i < Ho; ++i)
        for (std::size_t j = 0; j < Wo; ++j) {
          const double go = g.at(o, i, j);
          gb[o] += go;
          for (std::size_t c = 0; c < C; ++c)
            for (std::size_t u = 0; u < Kh; ++u)
              for (std::size_t v = 0; v < Kw; ++v) {
                const std::size_t ki = ((o * C + c) * Kh + u) * Kw + v;
                gin.at(c, i + u, j + v) += go * k.data[ki];
                gk.data[ki] += go * in.at(c, i + u, j + v);
              }
        }
  });
}

Value Tape::maxpool2d(Value input, std::size_t pool_h, std::size_t pool_w) {
  const Tensor& in = value(input);
  if (in.rank() != 3) raise(ErrorKind::Dimension, "maxpool2d: input " + in.shape_str());
  const std::size_t C = in.shape[0], H = in.shape[1], W = in.shape[2];
  if (pool_h == 0 || pool_w == 0 || H % pool_h != 0 || W % pool_w != 0)
    raise(ErrorKind::Dimension, "maxpool2d: window " + std::to_string(pool_h) + "x" +
                                    std::to_string(pool_w) + " does not divide input " +
                                    in.shape_str());
  const std::size_t Ho = H / pool_h, Wo = W / pool_w;
  Tensor out = Tensor::zeros({C, Ho, Wo});
  auto argmax = std::make_shared<std::vector<std::size_t>>(C * Ho * Wo);
  std::size_t oi = 0;
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t i = 0; i < Ho; ++i)
      for (std::size_t j = 0; j < Wo; ++j, ++oi) {
        double best = in.at(c, i * pool_h, j * pool_w);
        std::size_t best_at = (c * H + i * pool_h) * W + j * pool_w;
        for (std::size_t u = 0; u < pool_h; ++u)
          for (std::size_t v = 0; v < pool_w; ++v) {
            const double x = in.at(c, i * pool_h + u, j * pool_w + v);
            if (x > best) {
              best = x;
              best_at = (c * H + i * pool_h + u) * W + j * pool_w + v;
            }
          }
        out.at(c, i, j) = best;
        (*argmax)[oi] = best_at;
      }
  return push(std::move(out), [input, argmax](Tape& t, std::uint32_t self) {
    const Tensor& g = t.nodes_[self].grad;
    Tensor& gin = t.grad_mut(input);
    for (std::size_t i = 0; i < g.size(); ++i) gin.data[(*argmax)[i]] += g[i];
  });
}

Value Tape::scatter_grid(std::size_t channels, std::size_t rows, std::size_t cols,
                         const std::vector<std::tuple<std::size_t, std::size_t, Value>>& fibers) {
  Tensor out = Tensor::zeros({channels, rows, cols});
  for (const auto& [r, c, fiber] : fibers) {
    const Tensor& f = value(fiber);
    if (f.rank() != 1 || f.shape[0] != channels)
      raise(ErrorKind::Dimension,
            "scatter_grid: fiber " + f.shape_str() + " does not match channel count " +
                std::to_string(channels));
    if (r >= rows || c >= cols) raise(ErrorKind::Dimension, "scatter_grid: cell out of range");
    for (std::size_t ch = 0; ch < channels; ++ch) out.at(ch, r, c) = f[ch];
  }
  return push(std::move(out), [fibers, rows, cols](Tape& t, std::uint32_t self) {
    const Tensor& g = t.nodes_[self].grad;
    for (const auto& [r, c, fiber] : fibers) {
      Tensor& gf = t.grad_mut(fiber);
      for (std::size_t ch = 0; ch < gf.size(); ++ch) gf[ch] += g.data[(ch * rows + r) * cols + c];
    }
  });
}

double Tape::scalar(Value v) const {
  const Tensor& t = value(v);
  if (t.size() != 1) raise(ErrorKind::Dimension, "scalar() on tensor " + t.shape_str());
  return t[0];
}

void Tape::backward(Value root) {
  const Tensor& rv = value(root);
  if (rv.size() != 1) raise(ErrorKind::Dimension, "backward root must be scalar, got " + rv.shape_str());
  nodes_[root.idx].grad[0] = 1.0;
  for (std::uint32_t i = root.idx + 1; i-- > 0;) {
    if (nodes_[i].back) nodes_[i].back(*this, i);
  }
  if (store_) {
    for (const Node& n : nodes_) {
      if (n.param_index < 0) continue;
      Tensor& g = store_->grad_at(static_cast<std::size_t>(n.param_index));
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    }
  }
}

}  // namespace hmnet
