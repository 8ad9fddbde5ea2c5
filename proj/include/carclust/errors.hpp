#pragma once

#include <stdexcept>

namespace carclust {

// Malformed user input: bad indices, unreadable or inconsistent files.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A numerical routine failed on inputs that should have been well posed
// (e.g. the factorization of a cluster block that is SPD by construction).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace carclust
