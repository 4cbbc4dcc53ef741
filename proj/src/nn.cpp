#include "swarmnav/nn.hpp"

#include <cmath>
#include <numbers>

#include "swarmnav/error.hpp"

namespace swarmnav::nn {

using nlohmann::json;

namespace {

using ConstMap = Eigen::Map<const Matrix>;
using MutMap = Eigen::Map<Matrix>;

ConstMap weight(const Vector& p, const DenseSlot& s) { return ConstMap(p.data() + s.weight, s.out, s.in); }
Eigen::Map<const Vector> bias(const Vector& p, const DenseSlot& s) {
  return Eigen::Map<const Vector>(p.data() + s.bias, s.out);
}

Matrix logistic(const Matrix& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

void orthogonal_fill(Rng& rng, double gain, double* data, int rows, int cols) {
  const int big = std::max(rows, cols);
  const int small = std::min(rows, cols);
  Matrix a(big, small);
  for (Index c = 0; c < small; ++c) {
    for (Index r = 0; r < big; ++r) a(r, c) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(big, small);
  const Matrix r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
  for (Index c = 0; c < small; ++c) {
    if (r(c, c) < 0.0) q.col(c) *= -1.0;
  }
  MutMap w(data, rows, cols);
  w = rows >= cols ? Matrix(q * gain) : Matrix(q.transpose() * gain);
}

}  // namespace

NetworkSpec NetworkSpec::preset(const std::string& name, Head head, int input_width) {
  NetworkSpec s;
  s.head = head;
  s.input_width = input_width;
  std::string base = name;
  bool memory = false;
  if (const auto pos = name.find("+memory"); pos != std::string::npos) {
    base = name.substr(0, pos);
    memory = true;
  }
  if (base == "default") {
    s.hidden = {64, 64};
  } else if (base == "customized-ppo") {
    s.hidden = {128, 128, 128};
  } else if (base == "customized-sac") {
    s.hidden = {128, 128};
  } else if (base == "wide-sac") {
    s.hidden = {256, 256};
  } else {
    throw ConfigError("unknown network preset '" + name + "'");
  }
  if (memory) s.memory_width = s.hidden.back();
  return s;
}

void to_json(json& j, const NetworkSpec& s) {
  const char* head = s.head == Head::policy ? "policy" : (s.head == Head::value ? "value" : "q");
  j = json{{"input_width", s.input_width},
           {"hidden", s.hidden},
           {"memory_width", s.memory_width},
           {"head", head},
           {"action_dim", s.action_dim}};
}

void from_json(const json& j, NetworkSpec& s) {
  s.input_width = j.at("input_width").get<int>();
  s.hidden = j.at("hidden").get<std::vector<int>>();
  s.memory_width = j.value("memory_width", 0);
  s.action_dim = j.value("action_dim", 3);
  const auto head = j.at("head").get<std::string>();
  if (head == "policy") {
    s.head = Head::policy;
  } else if (head == "value") {
    s.head = Head::value;
  } else if (head == "q") {
    s.head = Head::q;
  } else {
    throw ConfigError("unknown network head '" + head + "'");
  }
}

Network::Network(NetworkSpec spec) : spec_(std::move(spec)) {
  if (spec_.hidden.empty()) throw ConfigError("network needs at least one hidden layer");
  if (spec_.input_width <= 0) throw ConfigError("network input width must be positive");
  Index offset = 0;
  int in = spec_.trunk_input_width();
  for (int width : spec_.hidden) {
    if (width <= 0) throw ConfigError("hidden widths must be positive");
    DenseSlot d{offset, offset + static_cast<Index>(width) * in, in, width};
    offset = d.bias + width;
    layout_.trunk.push_back(d);
    in = width;
  }
  if (spec_.recurrent()) {
    const int m = spec_.memory_width;
    LstmSlot l{offset, offset + static_cast<Index>(4 * m) * (in + m), in, m};
    offset = l.bias + 4 * m;
    layout_.lstm = l;
    in = m;
  }
  const int out = spec_.output_width();
  layout_.head = DenseSlot{offset, offset + static_cast<Index>(out) * in, in, out};
  offset = layout_.head.bias + out;
  if (spec_.head == Head::policy) {
    layout_.log_std = offset;
    offset += spec_.action_dim;
  }
  layout_.total = offset;
}

Vector Network::initialize(Rng& rng) const {
  Vector p = Vector::Zero(layout_.total);
  for (const auto& d : layout_.trunk) orthogonal_fill(rng, std::sqrt(2.0), p.data() + d.weight, d.out, d.in);
  if (layout_.lstm) {
    const auto& l = *layout_.lstm;
    orthogonal_fill(rng, 1.0, p.data() + l.weight, 4 * l.width, l.in + l.width);
    p.segment(l.bias + l.width, l.width).setOnes();  // forget gate
  }
  const double head_gain = spec_.head == Head::policy ? 0.01 : 1.0;
  orthogonal_fill(rng, head_gain, p.data() + layout_.head.weight, layout_.head.out, layout_.head.in);
  return p;
}

Memory Network::zero_memory(Index batch) const {
  const int m = spec_.memory_width;
  return {Matrix::Zero(m, batch), Matrix::Zero(m, batch)};
}

std::vector<Matrix> Network::forward(const Vector& params, const std::vector<Matrix>& inputs, Memory* memory,
                                     Trace* trace) const {
  if (params.size() != layout_.total) throw ContractError("parameter vector has wrong length");
  std::vector<Matrix> outputs;
  outputs.reserve(inputs.size());
  if (trace) trace->steps.clear();
  if (inputs.empty()) return outputs;
  const Index batch = inputs.front().cols();

  Memory state;
  if (spec_.recurrent()) {
    state = memory ? *memory : zero_memory(batch);
    if (state.h.rows() != spec_.memory_width || state.h.cols() != batch) {
      throw ContractError("memory state does not match network width or batch size");
    }
  }

  for (const Matrix& x : inputs) {
    if (x.rows() != spec_.trunk_input_width() || x.cols() != batch) {
      throw ContractError("input width " + std::to_string(x.rows()) + " does not match network input " +
                          std::to_string(spec_.trunk_input_width()));
    }
    StepCache cache;
    Matrix a = x;
    if (trace) cache.input = x;
    for (const auto& d : layout_.trunk) {
      Matrix z(d.out, batch);
      z.noalias() = weight(params, d) * a;
      z.colwise() += bias(params, d);
      a = z.array().tanh().matrix();
      if (trace) cache.activations.push_back(a);
    }
    if (layout_.lstm) {
      const auto& l = *layout_.lstm;
      const int m = l.width;
      ConstMap w(params.data() + l.weight, 4 * m, l.in + m);
      Eigen::Map<const Vector> b(params.data() + l.bias, 4 * m);
      Matrix z(4 * m, batch);
      z.noalias() = w.leftCols(l.in) * a;
      z.noalias() += w.rightCols(m) * state.h;
      z.colwise() += b;
      Matrix gates(4 * m, batch);
      gates.topRows(2 * m) = logistic(z.topRows(2 * m));
      gates.middleRows(2 * m, m) = z.middleRows(2 * m, m).array().tanh().matrix();
      gates.bottomRows(m) = logistic(z.bottomRows(m));
      Matrix c = (gates.middleRows(m, m).array() * state.c.array() +
                  gates.topRows(m).array() * gates.middleRows(2 * m, m).array())
                     .matrix();
      Matrix h = (gates.bottomRows(m).array() * c.array().tanh()).matrix();
      if (trace) {
        cache.gates = gates;
        cache.h_prev = state.h;
        cache.c_prev = state.c;
        cache.c = c;
      }
      state.h = h;
      state.c = std::move(c);
      a = std::move(h);
    }
    if (trace) cache.head_input = a;
    Matrix out(layout_.head.out, batch);
    out.noalias() = weight(params, layout_.head) * a;
    out.colwise() += bias(params, layout_.head);
    outputs.push_back(std::move(out));
    if (trace) trace->steps.push_back(std::move(cache));
  }
  if (memory && spec_.recurrent()) *memory = std::move(state);
  return outputs;
}

Matrix Network::forward(const Vector& params, const Matrix& input, Trace* trace) const {
  auto out = forward(params, std::vector<Matrix>{input}, nullptr, trace);
  return std::move(out.front());
}

void Network::backward(const Vector& params, const Trace& trace, const std::vector<Matrix>& d_outputs, Vector& grad,
                       std::vector<Matrix>* d_inputs) const {
  if (grad.size() != layout_.total) throw ContractError("gradient vector has wrong length");
  if (d_outputs.size() != trace.steps.size()) throw ContractError("one output gradient per traced step is required");
  if (d_inputs) d_inputs->assign(trace.steps.size(), Matrix());

  Matrix dh_next, dc_next;
  for (Index t = static_cast<Index>(trace.steps.size()) - 1; t >= 0; --t) {
    const StepCache& s = trace.steps[static_cast<std::size_t>(t)];
    const Matrix& d_out = d_outputs[static_cast<std::size_t>(t)];
    const Index batch = s.head_input.cols();

    const auto& hd = layout_.head;
    MutMap(grad.data() + hd.weight, hd.out, hd.in).noalias() += d_out * s.head_input.transpose();
    grad.segment(hd.bias, hd.out) += d_out.rowwise().sum();
    Matrix d_a(hd.in, batch);
    d_a.noalias() = weight(params, hd).transpose() * d_out;

    if (layout_.lstm) {
      const auto& l = *layout_.lstm;
      const int m = l.width;
      if (dh_next.size() == 0) {
        dh_next = Matrix::Zero(m, batch);
        dc_next = Matrix::Zero(m, batch);
      }
      const auto i = s.gates.topRows(m).array();
      const auto f = s.gates.middleRows(m, m).array();
      const auto g = s.gates.middleRows(2 * m, m).array();
      const auto o = s.gates.bottomRows(m).array();
      const Eigen::ArrayXXd tanh_c = s.c.array().tanh();
      const Eigen::ArrayXXd dh = (d_a + dh_next).array();
      const Eigen::ArrayXXd dc = dh * o * (1.0 - tanh_c.square()) + dc_next.array();
      Matrix dz(4 * m, batch);
      dz.topRows(m) = (dc * g * i * (1.0 - i)).matrix();
      dz.middleRows(m, m) = (dc * s.c_prev.array() * f * (1.0 - f)).matrix();
      dz.middleRows(2 * m, m) = (dc * i * (1.0 - g.square())).matrix();
      dz.bottomRows(m) = (dh * tanh_c * o * (1.0 - o)).matrix();
      dc_next = (dc * f).matrix();

      const Matrix& lstm_in = s.activations.empty() ? s.input : s.activations.back();
      MutMap gw(grad.data() + l.weight, 4 * m, l.in + m);
      gw.leftCols(l.in).noalias() += dz * lstm_in.transpose();
      gw.rightCols(m).noalias() += dz * s.h_prev.transpose();
      grad.segment(l.bias, 4 * m) += dz.rowwise().sum();
      ConstMap w(params.data() + l.weight, 4 * m, l.in + m);
      dh_next.noalias() = w.rightCols(m).transpose() * dz;
      d_a.resize(l.in, batch);
      d_a.noalias() = w.leftCols(l.in).transpose() * dz;
    }

    for (Index k = static_cast<Index>(layout_.trunk.size()) - 1; k >= 0; --k) {
      const auto& d = layout_.trunk[static_cast<std::size_t>(k)];
      const Matrix& act = s.activations[static_cast<std::size_t>(k)];
      const Matrix& in = k == 0 ? s.input : s.activations[static_cast<std::size_t>(k - 1)];
      const Matrix d_pre = (d_a.array() * (1.0 - act.array().square())).matrix();
      MutMap(grad.data() + d.weight, d.out, d.in).noalias() += d_pre * in.transpose();
      grad.segment(d.bias, d.out) += d_pre.rowwise().sum();
      if (k > 0 || d_inputs) {
        Matrix next(d.in, batch);
        next.noalias() = weight(params, d).transpose() * d_pre;
        d_a = std::move(next);
      }
    }
    if (d_inputs) (*d_inputs)[static_cast<std::size_t>(t)] = std::move(d_a);
  }
}

Vector Network::log_std(const Vector& params) const {
  if (!layout_.log_std) throw ContractError("only policy heads have a log_std");
  return params.segment(*layout_.log_std, spec_.action_dim).cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

void Network::clamp_parameters(Vector& params) const {
  if (!layout_.log_std) return;
  auto seg = params.segment(*layout_.log_std, spec_.action_dim);
  seg = seg.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

double gaussian_log_prob(const Eigen::Ref<const Vector>& mean, const Eigen::Ref<const Vector>& log_std,
                         const Eigen::Ref<const Vector>& action) {
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  double lp = 0.0;
  for (Index d = 0; d < mean.size(); ++d) {
    const double z = (action[d] - mean[d]) / std::exp(log_std[d]);
    lp += -0.5 * z * z - log_std[d] - half_log_2pi;
  }
  return lp;
}

double gaussian_entropy(const Eigen::Ref<const Vector>& log_std) {
  const double per_dim = 0.5 * (1.0 + std::log(2.0 * std::numbers::pi));
  return log_std.sum() + per_dim * static_cast<double>(log_std.size());
}

Sample sample_action(const Eigen::Ref<const Vector>& mean, const Eigen::Ref<const Vector>& log_std, Rng& rng) {
  Sample s;
  s.action.resize(mean.size());
  for (Index d = 0; d < mean.size(); ++d) s.action[d] = mean[d] + std::exp(log_std[d]) * rng.normal();
  s.log_prob = gaussian_log_prob(mean, log_std, s.action);
  return s;
}

}  // namespace swarmnav::nn
