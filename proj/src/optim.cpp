#include "swarmnav/optim.hpp"

#include <cmath>

#include "swarmnav/error.hpp"

namespace swarmnav::nn {

using nlohmann::json;

void Adam::step(Vector& params, const Vector& grad, double learning_rate) {
  if (grad.size() != params.size() || m.size() != params.size()) throw ContractError("Adam: size mismatch");
  if (!grad.allFinite()) throw Error("non-finite gradient");
  ++t;
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  params.array() -= learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + epsilon);
}

double clip_grad_norm(Vector& grad, double max_norm) {
  const double norm = grad.norm();
  if (max_norm > 0.0 && norm > max_norm) grad *= max_norm / norm;
  return norm;
}

json vector_to_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

void to_json(json& j, const Adam& a) {
  j = json{{"beta1", a.beta1}, {"beta2", a.beta2}, {"epsilon", a.epsilon},
           {"t", a.t},         {"m", vector_to_json(a.m)}, {"v", vector_to_json(a.v)}};
}

void from_json(const json& j, Adam& a) {
  a.beta1 = j.at("beta1").get<double>();
  a.beta2 = j.at("beta2").get<double>();
  a.epsilon = j.at("epsilon").get<double>();
  a.t = j.at("t").get<std::int64_t>();
  a.m = vector_from_json(j.at("m"));
  a.v = vector_from_json(j.at("v"));
}

}  // namespace swarmnav::nn
