#pragma once

#include <stdexcept>
#include <string>

namespace divopt {

// Caller broke a documented precondition.
class contract_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Configuration could not be parsed or violates an invariant.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input is valid but outside what the exact algorithms support (d > 3, n > 18).
class unsupported_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A domain could not produce gate-passing individuals within its budget.
class initialization_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// TSP instance whose optimal tour has zero length.
class degenerate_instance_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace divopt
