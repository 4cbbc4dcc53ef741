#include "swarmnav/losses.hpp"

#include <algorithm>
#include <cmath>

#include "swarmnav/error.hpp"

namespace swarmnav::nn {

double clipped_objective(double ratio, double advantage, double clip_epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

PolicyLossGrad clipped_surrogate(const Matrix& mean, const Vector& log_std, const Matrix& actions,
                                 const Vector& old_log_prob, const Vector& advantages, double clip_epsilon) {
  const Index b = mean.cols();
  const Index d = mean.rows();
  if (actions.cols() != b || old_log_prob.size() != b || advantages.size() != b || log_std.size() != d) {
    throw ContractError("clipped_surrogate: inconsistent batch shapes");
  }
  PolicyLossGrad g;
  g.d_mean = Matrix::Zero(d, b);
  g.d_log_std = Vector::Zero(d);
  const Vector inv_var = (-2.0 * log_std.array()).exp().matrix();
  const double scale = 1.0 / static_cast<double>(b);
  for (Index j = 0; j < b; ++j) {
    const double lp = gaussian_log_prob(mean.col(j), log_std, actions.col(j));
    const double ratio = std::exp(lp - old_log_prob[j]);
    const double a = advantages[j];
    const double unclipped = ratio * a;
    const double clipped = std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon) * a;
    g.loss -= std::min(unclipped, clipped) * scale;
    // Gradient flows only through the unclipped branch when it is the minimum.
    if (unclipped <= clipped) {
      const double w = -scale * a * ratio;  // d loss / d logp
      for (Index k = 0; k < d; ++k) {
        const double diff = actions(k, j) - mean(k, j);
        g.d_mean(k, j) = w * diff * inv_var[k];
        g.d_log_std[k] += w * (diff * diff * inv_var[k] - 1.0);
      }
    }
  }
  if (!std::isfinite(g.loss)) throw Error("policy loss is not finite");
  return g;
}

PolicyLossGrad negative_entropy(const Vector& log_std, Index batch, int action_dim) {
  PolicyLossGrad g;
  const double d = static_cast<double>(log_std.size());
  g.loss = -gaussian_entropy(log_std) / d;
  g.d_mean = Matrix::Zero(action_dim, batch);
  g.d_log_std = Vector::Constant(log_std.size(), -1.0 / d);
  return g;
}

ValueLossGrad value_mse(const Matrix& value, const Vector& target) {
  const Index b = value.cols();
  if (value.rows() != 1 || target.size() != b) throw ContractError("value_mse: inconsistent batch shapes");
  ValueLossGrad g;
  const Eigen::RowVectorXd diff = value.row(0) - target.transpose();
  g.loss = diff.squaredNorm() / static_cast<double>(b);
  g.d_value = (2.0 / static_cast<double>(b)) * diff;
  if (!std::isfinite(g.loss)) throw Error("value loss is not finite");
  return g;
}

}  // namespace swarmnav::nn
