#pragma once

#include <stdexcept>
#include <string>

namespace pimdc {

// Malformed network specs, manifests, or zoo names. The CLI maps this to
// exit code 2 (usage/spec error); everything else is a runtime error.
class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pimdc
