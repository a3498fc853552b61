#pragma once

#include <stdexcept>
#include <string>

namespace geophase {

// Single exception type for contract violations and invalid input across the
// library. Messages are meant to be shown to the user as-is.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace geophase
