#pragma once

#include <stdexcept>
#include <string>

namespace eventq {

// Invalid construction arguments or parameters. The CLI maps it to exit 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A queue kind was asked to do something it cannot (heterogeneous delays on a
// FIFO, gradients on a bit array, ...). `capability()` names the feature.
class CapabilityError : public ConfigError {
 public:
  CapabilityError(std::string capability, const std::string& what)
      : ConfigError(what), capability_(std::move(capability)) {}

  const std::string& capability() const noexcept { return capability_; }

 private:
  std::string capability_;
};

// Event scheduled at or before the queue's current step.
class CausalityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Threshold crossed with a slope below the floor; the spike-time derivative
// is undefined there.
class GrazingCrossingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace eventq
