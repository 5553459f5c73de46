#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "hmnet/error.hpp"

namespace hmnet {

/// Dense row-major tensor of doubles. Rank is dynamic; most of the engine
/// uses rank 1 (vectors), rank 2 (matrices) and rank 3 (C x H x W grids).
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<std::size_t> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
    if (numel(shape) != data.size()) raise(ErrorKind::Dimension, "tensor data does not fill its shape");
  }

  static std::size_t numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
  }

  static Tensor zeros(std::vector<std::size_t> shape) {
    const std::size_t n = numel(shape);
    return Tensor{std::move(shape), std::vector<double>(n, 0.0)};
  }

  static Tensor vector(std::vector<double> values) {
    std::vector<std::size_t> s{values.size()};
    return Tensor{std::move(s), std::move(values)};
  }

  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
    return Tensor{{rows, cols}, std::move(values)};
  }

  static Tensor scalar(double v) { return Tensor{{1}, {v}}; }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  /// Rank-2 accessor.
  double& at(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }

  /// Rank-3 accessor (channel, row, col).
  double& at(std::size_t ch, std::size_t r, std::size_t c) {
    return data[(ch * shape[1] + r) * shape[2] + c];
  }
  double at(std::size_t ch, std::size_t r, std::size_t c) const {
    return data[(ch * shape[1] + r) * shape[2] + c];
  }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }

  std::string shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(shape[i]);
    }
    return s + "]";
  }
};

/// 2-D point/vector in meters (or m/s, m/s^2 depending on context).
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend Vec2 operator*(double s, Vec2 a) { return a * s; }
  friend Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
  friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }
};

inline double norm(Vec2 v) { return std::sqrt(v.x * v.x + v.y * v.y); }
inline double squared_norm(Vec2 v) { return v.x * v.x + v.y * v.y; }

}  // namespace hmnet
