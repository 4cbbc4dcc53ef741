#pragma once

#include <json.hpp>

#include "swarmnav/nn.hpp"

namespace swarmnav::nn {

/// Adam with bias correction.
struct Adam {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  Vector m;
  Vector v;
  std::int64_t t = 0;

  Adam() = default;
  explicit Adam(Index size) : m(Vector::Zero(size)), v(Vector::Zero(size)) {}

  /// params -= lr * mhat / (sqrt(vhat) + eps).
  void step(Vector& params, const Vector& grad, double learning_rate);

  bool operator==(const Adam& o) const { return t == o.t && m == o.m && v == o.v; }
};

/// Clips the gradient to a maximum global L2 norm; returns the pre-clip norm.
double clip_grad_norm(Vector& grad, double max_norm);

void to_json(nlohmann::json& j, const Adam& a);
void from_json(const nlohmann::json& j, Adam& a);

nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

}  // namespace swarmnav::nn
