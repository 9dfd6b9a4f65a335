#pragma once

#include <json.hpp>

#include "hsw/formula.hpp"
#include "hsw/model.hpp"

namespace hsw {

// Result of evaluating a closed formula on a model. Certified mode
// guarantees the true value lies inside `value` with width <= the requested
// eps (or throws BudgetError). Heuristic mode guarantees one-sided
// soundness: for an outermost sup, value.lo is attained by a concrete
// witness; dually for inf.
struct EvalResult {
  Interval value{Rat(0), Rat(0)};
  std::string mode;
  long cost = 0;  // formula-node interval evaluations consumed
  nlohmann::json witnesses = nlohmann::json::object();
};

inline constexpr long kDefaultEvalBudget = 10000000;

EvalResult eval_certified(const FormulaPtr& f, const Model& m, const Rat& eps,
                          long budget = kDefaultEvalBudget);
EvalResult eval_heuristic(const FormulaPtr& f, const Model& m,
                          long budget = 100000);

// Validates that every constant, operator, and marked-sort use in f is
// backed by the model; throws InputError otherwise.
void check_formula_against_model(const FormulaPtr& f, const Model& m);

}  // namespace hsw
