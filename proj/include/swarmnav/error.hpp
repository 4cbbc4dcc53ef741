#pragma once

#include <stdexcept>
#include <string>

namespace swarmnav {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or scenario content.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// No free position could be found for an entity.
class PlacementError : public Error {
 public:
  using Error::Error;
};

/// Caller violated an operation's precondition (sizes, ids, widths).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A steering command could not be applied (unknown id, bad position).
class CommandError : public Error {
 public:
  using Error::Error;
};

}  // namespace swarmnav
