#pragma once

#include <string>

#include <json.hpp>

#include "swarmnav/policy.hpp"

namespace swarmnav {

/// Checkpoints are JSON documents tagged {"format": "swarmnav-checkpoint",
/// "version": 1, "algo": "ppo"|"sac"}. Doubles round-trip exactly.
void save_checkpoint(const nlohmann::json& checkpoint, const std::string& path);
nlohmann::json load_checkpoint(const std::string& path);

/// Policy network and action transform stored in a checkpoint.
PolicyModel policy_model_from_checkpoint(const nlohmann::json& checkpoint);

}  // namespace swarmnav
