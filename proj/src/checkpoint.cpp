#include "swarmnav/checkpoint.hpp"

#include <cstdio>
#include <fstream>

#include "swarmnav/error.hpp"

namespace swarmnav {

using nlohmann::json;

void save_checkpoint(const json& checkpoint, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error("cannot write checkpoint " + path);
    out << checkpoint.dump() << '\n';
    if (!out) throw Error("failed writing checkpoint " + path);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error("cannot move checkpoint into place: " + path);
}

json load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("checkpoint " + path + " is not valid JSON: " + e.what());
  }
  if (j.value("format", std::string()) != "swarmnav-checkpoint") throw ConfigError(path + " is not a checkpoint");
  if (j.value("version", 0) != 1) throw ConfigError("unsupported checkpoint version in " + path);
  return j;
}

PolicyModel policy_model_from_checkpoint(const json& checkpoint) {
  try {
    return checkpoint.at("policy").get<PolicyModel>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint has no usable policy: ") + e.what());
  }
}

}  // namespace swarmnav
