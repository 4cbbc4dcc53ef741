#pragma once

#include "swarmnav/nn.hpp"

namespace swarmnav::nn {

/// Gradients of a scalar loss with respect to a policy head's outputs.
struct PolicyLossGrad {
  double loss = 0.0;
  Matrix d_mean;   // action_dim x B
  Vector d_log_std;
};

/// Clipped surrogate: -mean_b min(rho*A, clip(rho, 1-eps, 1+eps)*A) with
/// rho = exp(logp_new - logp_old). Columns of `mean` and `actions` are samples.
PolicyLossGrad clipped_surrogate(const Matrix& mean, const Vector& log_std, const Matrix& actions,
                                 const Vector& old_log_prob, const Vector& advantages, double clip_epsilon);

/// Per-sample surrogate value min(rho*A, clip(rho)*A).
double clipped_objective(double ratio, double advantage, double clip_epsilon);

/// Negative entropy of the diagonal Gaussian averaged over action dimensions.
PolicyLossGrad negative_entropy(const Vector& log_std, Index batch, int action_dim);

struct ValueLossGrad {
  double loss = 0.0;
  Matrix d_value;  // 1 x B
};

/// mean (v - target)^2.
ValueLossGrad value_mse(const Matrix& value, const Vector& target);

}  // namespace swarmnav::nn
