#pragma once

#include <stdexcept>
#include <string>

namespace nol {

/// Bad caller input: malformed files, out-of-range parameters, empty sets.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal invariant did not hold (e.g. a rotation left SO(3)).
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace nol
