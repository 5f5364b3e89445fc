#pragma once

#include <stdexcept>
#include <string>

namespace regsmith {

// Thrown when an enumeration or retry budget is exhausted. The message names
// the bound that was hit so callers can raise it deliberately.
struct CapacityError : std::runtime_error {
    explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid inputs use std::invalid_argument throughout.

}  // namespace regsmith
