#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hsw/eval.hpp"
#include "hsw/formula.hpp"
#include "hsw/model.hpp"

namespace hsw {

// One improvement step pulled from a bound stream: the new bound, the step
// cost consumed producing it, and a human-readable witness describing where
// the bound came from.
struct BoundPull {
  Rat value;
  long long cost = 0;
  std::string witness;
};

// Pull-based producer of rational bounds on a degree of truth. A lower
// stream's values never decrease, an upper stream's never increase; next()
// returns nullopt once the stream has no further improvement to offer.
struct BoundStream {
  std::function<std::optional<BoundPull>()> next;
};

struct DegreeResult {
  Interval value{Rat(0), Rat(0)};
  long long steps = 0;   // total step cost consumed across both streams
  bool success = false;  // width <= eps was certified within budget
  std::string lower_witness;
  std::string upper_witness;
  std::string note;  // failure reason when !success
};

// Alternates pulling the lower and upper streams until hi - lo <= eps, the
// budget is consumed, or both streams are exhausted; the last two return
// the best interval so far with success = false and a note. A lower bound
// crossing an upper bound is an invariant violation (InternalError).
DegreeResult ershov_sandwich(BoundStream& lower, BoundStream& upper,
                             const Rat& eps, long long budget);

inline constexpr long long kDefaultDegreeBudget = 20000000;
inline constexpr int kDefaultDegreeParamGate = 6;

// Exact rational points on the unit circle covering it with chord radius
// <= 2^(1-level): stereographic points ((1-t^2)/(1+t^2), 2t/(1+t^2)) for t
// on a dyadic grid in [-1,1] (right half) plus their x-reflections (left
// half). Grids are nested across levels; level k holds 2^(k+1) points.
std::vector<std::pair<Rat, Rat>> circle_grid(int level);

// Number of circle-point parameters for one unitary of the given
// dimension: dim diagonal phases plus two angles (rotation and phase) per
// Givens pair, dim^2 in total.
int unitary_param_count(int dim);

// The unitary D(phases) * prod_{i<j lex} G_ij(rot, phase) built from one
// parameter tuple of exact circle points, ordered as the count above. Every
// unitary factors this way, so nets in the parameters cover the whole
// group. Entries are exact Gaussian rationals.
FMat unitary_from_params(int dim, const std::vector<std::pair<Rat, Rat>>& params);

// Lower and upper bound streams for the degree of truth of f over all
// dynamical models of the given dimension with operators U1..Uops. Both
// streams sweep a shared refining net of exact unitary tuples, evaluating f
// at eval_eps on each: the lower stream emits the best certified lo seen,
// the upper stream emits max hi plus the net's covering slack (first pull:
// the static range bound). The shared budget counts evaluator node costs;
// once it is consumed the streams end.
std::pair<BoundStream, BoundStream> degree_streams(const FormulaPtr& f,
                                                   int dim, int ops,
                                                   const Rat& eval_eps,
                                                   long long budget);

// Certified degree of truth at fixed dimension: feeds the two streams to
// ershov_sandwich with eps split evenly between evaluation error and net
// slack. Throws BudgetError up front when the parameter count ops * dim^2
// exceeds the gate (the net is exponential in it), InputError when f is
// not closed over U1..Uops.
DegreeResult degree_ndim(const FormulaPtr& f, int dim, int ops,
                         const Rat& eps,
                         long long budget = kDefaultDegreeBudget,
                         int param_gate = kDefaultDegreeParamGate);

struct ProfileEntry {
  int dim = 0;
  Rat lower;
  long long cost = 0;
  std::string witness;
};

// Monotone lower-bound profile for the degree over the class of all
// finite-dimensional models: runs the lower stream at each dimension
// 1..max_dim on an even budget split and emits the running maximum (any
// dimension's witness bounds the class supremum from below). Never
// certified from above and never throws on exhaustion; entries just stop
// improving. The operator count is inferred from the formula.
std::vector<ProfileEntry> degree_fd_lower(const FormulaPtr& f, int max_dim,
                                          const Rat& eps, long long budget);

}  // namespace hsw
