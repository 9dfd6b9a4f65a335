#pragma once

#include <stdexcept>
#include <string>

namespace hsw {

// Exit-code contract: input_error -> 2, budget_error -> 1, internal_error -> 3.
// A successful run that reports a negative verdict (fail / distinct) still
// exits 0; exit 1 is reserved for runs that could not decide.

struct InputError : std::runtime_error {
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a certified computation cannot reach the requested width within
// its work budget. Carries the best enclosure found so far (as canonical
// rational strings) and a human-readable cost estimate.
struct BudgetError : std::runtime_error {
  std::string best_lo, best_hi;  // empty when no partial result exists
  std::string estimate;
  BudgetError(const std::string& msg, std::string lo, std::string hi,
              std::string est)
      : std::runtime_error(msg),
        best_lo(std::move(lo)),
        best_hi(std::move(hi)),
        estimate(std::move(est)) {}
  explicit BudgetError(const std::string& msg)
      : std::runtime_error(msg) {}
};

struct InternalError : std::logic_error {
  explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace hsw
