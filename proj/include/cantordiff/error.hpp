#pragma once

#include <stdexcept>
#include <string>

namespace cantordiff {

/// Raised when a search or sampling run would exceed its configured budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when two independent routes to the same fact disagree.
class InconsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace cantordiff
