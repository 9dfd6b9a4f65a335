#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hsw/field.hpp"
#include "hsw/model.hpp"
#include "hsw/rational.hpp"

namespace hsw {

// Measure-once quantum finite automaton built on a dynamical model. The
// alphabet is 1..t where letter k acts by the model's k-th operator in
// sorted name order (the same resolution `#k` uses elsewhere). Runs start
// at the first standard basis vector and are measured once, at the end,
// against the diagonal 0/1 projection `proj`.
//
// A word w = i1 i2 .. ik is read left to right, so U_{i1} is applied
// first and the acceptance value is
//
//   acc(w) = || P . U_{ik} ... U_{i1} . e_0 ||^2,
//
// an exact element of Q(sqrt 2). The word is accepted when acc(w) exceeds
// the threshold strictly; acc(w) == lambda counts as rejection. Note the
// application order is the reverse of the formula sugar `w[i1..ik](v)`,
// which denotes the operator product U_{i1} o ... o U_{ik} applied to v.
struct AutomatonSpec {
  Model model;
  std::vector<int> proj;  // one 0/1 entry per dimension
  Rat lambda;
};

// Assembles and validates a spec. `proj_bits` is a string of '0'/'1'
// characters, one per dimension, most significant qubit first (matching
// the basis order used by gate()). Throws InputError on length or
// character mismatches.
AutomatonSpec make_automaton(Model model, const std::string& proj_bits,
                             const Rat& lambda);

// Exact acceptance value of one word. Letters outside 1..t throw
// InputError. The empty word measures the start vector itself.
FieldReal acc_value(const AutomatonSpec& a, const std::vector<int>& word);

inline constexpr long long kDefaultAutomatonNodes = 1 << 20;

// Breadth-first search outcome over all words of length <= max_len, in
// length order and lexicographically within a length. `explored` counts
// every prefix visited, the empty word included.
struct WordSearch {
  std::optional<std::vector<int>> word;  // shortest accepted, lex-least
  FieldReal value;                       // acc of that word when found
  int max_len = 0;
  long long explored = 0;
};

// Finds the first accepted word in BFS order, or reports that none exists
// up to max_len. Exceeding `node_budget` prefixes throws BudgetError.
WordSearch exists_accepted(const AutomatonSpec& a, int max_len,
                           long long node_budget = kDefaultAutomatonNodes);

// Minimum of |acc(w) - lambda| over all words of length <= max_len,
// together with the first word attaining it in BFS order. The margin is
// non-increasing in max_len since longer bounds only add candidates.
struct IsolationMargin {
  FieldReal margin;
  std::vector<int> word;  // first attaining word in BFS order
  FieldReal value;        // its acceptance value
  int max_len = 0;
  long long explored = 0;
};

IsolationMargin isolation_margin(const AutomatonSpec& a, int max_len,
                                 long long node_budget = kDefaultAutomatonNodes);

// Renders a word as comma-separated letters, "(empty)" for the empty word.
std::string word_to_string(const std::vector<int>& word);

}  // namespace hsw
