#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "swarmnav/rng.hpp"

namespace swarmnav::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class Head { policy, value, q };

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

/// Dense tanh trunk, optional LSTM memory after the trunk, linear head.
/// Policy heads also own a state-independent log_std vector.
struct NetworkSpec {
  int input_width = 0;
  std::vector<int> hidden{64, 64};
  int memory_width = 0;  // 0 disables the recurrent cell
  Head head = Head::policy;
  int action_dim = 3;

  /// Width of the tensor fed to the first layer (q heads append the action).
  int trunk_input_width() const { return head == Head::q ? input_width + action_dim : input_width; }
  int output_width() const { return head == Head::policy ? action_dim : 1; }
  bool recurrent() const { return memory_width > 0; }

  /// "default" (2x64), "customized-ppo" (3x128), "customized-sac" (2x128),
  /// "wide-sac" (2x256);
  /// a "+memory" suffix adds an LSTM as wide as the last hidden layer.
  static NetworkSpec preset(const std::string& name, Head head, int input_width);

  bool operator==(const NetworkSpec&) const = default;
};

void to_json(nlohmann::json& j, const NetworkSpec& s);
void from_json(const nlohmann::json& j, NetworkSpec& s);

struct DenseSlot {
  Index weight = 0;  // out x in, column-major
  Index bias = 0;
  int in = 0;
  int out = 0;
};

struct LstmSlot {
  Index weight = 0;  // 4m x (in + m), gate order i, f, g, o
  Index bias = 0;
  int in = 0;
  int width = 0;
};

struct Layout {
  std::vector<DenseSlot> trunk;
  std::optional<LstmSlot> lstm;
  DenseSlot head;
  std::optional<Index> log_std;
  Index total = 0;
};

/// Recurrent state, one column per sequence in the batch.
struct Memory {
  Matrix h;
  Matrix c;
};

/// Activations kept by forward() for the reverse pass.
struct StepCache {
  Matrix input;
  std::vector<Matrix> activations;  // tanh output per trunk layer
  Matrix gates;                     // 4m x B post-nonlinearity (i, f, g, o)
  Matrix h_prev, c_prev, c;
  Matrix head_input;
};

struct Trace {
  std::vector<StepCache> steps;
};

class Network {
 public:
  explicit Network(NetworkSpec spec);

  const NetworkSpec& spec() const { return spec_; }
  const Layout& layout() const { return layout_; }
  Index parameter_count() const { return layout_.total; }

  /// Orthogonal weights with gain sqrt(2) for trunk layers, 1 for the LSTM,
  /// 0.01 for policy heads and 1 for value/q heads; zero biases, LSTM forget
  /// bias 1, log_std 0.
  Vector initialize(Rng& rng) const;

  Memory zero_memory(Index batch) const;

  /// Runs a sequence of batches (each trunk_input_width x B). For recurrent
  /// networks `memory` is read as the initial state and overwritten with the
  /// final state; pass nullptr to start from zeros. Non-recurrent networks
  /// treat steps independently.
  std::vector<Matrix> forward(const Vector& params, const std::vector<Matrix>& inputs, Memory* memory,
                              Trace* trace) const;

  /// Single step from a zero memory (or no memory).
  Matrix forward(const Vector& params, const Matrix& input, Trace* trace = nullptr) const;

  /// Reverse pass for a traced forward(). Adds parameter gradients into
  /// `grad` and, when requested, writes the gradient w.r.t. each step input.
  void backward(const Vector& params, const Trace& trace, const std::vector<Matrix>& d_outputs, Vector& grad,
                std::vector<Matrix>* d_inputs = nullptr) const;

  /// Clamped log standard deviation of a policy head.
  Vector log_std(const Vector& params) const;
  /// Re-clamps log_std parameters in place after an optimizer step.
  void clamp_parameters(Vector& params) const;

 private:
  NetworkSpec spec_;
  Layout layout_;
};

/// Gaussian policy utilities (diagonal covariance).
double gaussian_log_prob(const Eigen::Ref<const Vector>& mean, const Eigen::Ref<const Vector>& log_std,
                         const Eigen::Ref<const Vector>& action);
double gaussian_entropy(const Eigen::Ref<const Vector>& log_std);

struct Sample {
  Vector action;
  double log_prob = 0.0;
};

Sample sample_action(const Eigen::Ref<const Vector>& mean, const Eigen::Ref<const Vector>& log_std, Rng& rng);

}  // namespace swarmnav::nn
