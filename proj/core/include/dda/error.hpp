#pragma once

#include <stdexcept>
#include <string>

namespace dda {

// Domain error: invalid inputs, violated invariants, failed numeric contracts.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dda
