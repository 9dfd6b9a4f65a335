#include "hsw/automaton.hpp"

#include <deque>
#include <functional>
#include <utility>

#include "hsw/errors.hpp"
#include "hsw/matrix.hpp"

namespace hsw {

namespace {

// Letters resolved once per walk; letter k applies ops[k-1].
std::vector<const FMat*> letter_table(const AutomatonSpec& a) {
  std::vector<const FMat*> ops;
  for (const auto& name : sorted_operator_names(a.model)) {
    ops.push_back(&a.model.operators.at(name));
  }
  return ops;
}

FVec start_vector(int dim) {
  FVec v(static_cast<size_t>(dim), FieldScalar::zero());
  v[0] = FieldScalar::one();
  return v;
}

FieldReal measure(const std::vector<int>& proj, const FVec& state) {
  FieldReal out;
  for (size_t i = 0; i < state.size(); ++i) {
    if (proj[i] == 1) out = out + state[i].abs2();
  }
  return out;
}

// Visits every word of length <= max_len in BFS order (level by level,
// letters ascending within a level) with its exact end state. Each level
// is derived from the previous level's memoized states, so a prefix is
// never re-run. The visitor returns true to stop the walk early.
long long bfs_walk(
    const AutomatonSpec& a, int max_len, long long node_budget,
    const std::function<bool(const std::vector<int>&, const FVec&)>& visit) {
  if (max_len < 0) throw InputError("maximum word length must be nonnegative");
  if (node_budget < 1) throw InputError("node budget must be positive");
  auto ops = letter_table(a);
  std::deque<std::pair<std::vector<int>, FVec>> level;
  level.emplace_back(std::vector<int>{}, start_vector(a.model.dim));
  long long explored = 0;
  for (int len = 0; len <= max_len; ++len) {
    for (auto& [word, state] : level) {
      if (explored >= node_budget) {
        throw BudgetError("word search exceeded " +
                          std::to_string(node_budget) + " prefixes at length " +
                          std::to_string(len));
      }
      ++explored;
      if (visit(word, state)) return explored;
    }
    if (len == max_len || ops.empty()) break;
    std::deque<std::pair<std::vector<int>, FVec>> next;
    for (auto& [word, state] : level) {
      for (size_t k = 0; k < ops.size(); ++k) {
        auto extended = word;
        extended.push_back(static_cast<int>(k) + 1);
        next.emplace_back(std::move(extended), fmat_apply(*ops[k], state));
      }
    }
    level = std::move(next);
  }
  return explored;
}

}  // namespace

AutomatonSpec make_automaton(Model model, const std::string& proj_bits,
                             const Rat& lambda) {
  if (static_cast<int>(proj_bits.size()) != model.dim) {
    throw InputError("projection string has " +
                     std::to_string(proj_bits.size()) + " bits, model has " +
                     std::to_string(model.dim) + " dimensions");
  }
  AutomatonSpec a;
  a.proj.reserve(proj_bits.size());
  for (char c : proj_bits) {
    if (c != '0' && c != '1') {
      throw InputError("projection string must contain only 0 and 1");
    }
    a.proj.push_back(c - '0');
  }
  a.model = std::move(model);
  a.lambda = lambda;
  return a;
}

FieldReal acc_value(const AutomatonSpec& a, const std::vector<int>& word) {
  auto ops = letter_table(a);
  FVec state = start_vector(a.model.dim);
  for (int letter : word) {
    if (letter < 1 || letter > static_cast<int>(ops.size())) {
      throw InputError("letter " + std::to_string(letter) +
                       " outside alphabet 1.." + std::to_string(ops.size()));
    }
    state = fmat_apply(*ops[letter - 1], state);
  }
  return measure(a.proj, state);
}

WordSearch exists_accepted(const AutomatonSpec& a, int max_len,
                           long long node_budget) {
  WordSearch out;
  out.max_len = max_len;
  FieldReal threshold = FieldReal::from_rat(a.lambda);
  out.explored = bfs_walk(
      a, max_len, node_budget,
      [&](const std::vector<int>& word, const FVec& state) {
        FieldReal acc = measure(a.proj, state);
        if (acc > threshold) {
          out.word = word;
          out.value = acc;
          return true;
        }
        return false;
      });
  return out;
}

IsolationMargin isolation_margin(const AutomatonSpec& a, int max_len,
                                 long long node_budget) {
  IsolationMargin out;
  out.max_len = max_len;
  FieldReal threshold = FieldReal::from_rat(a.lambda);
  bool seeded = false;
  out.explored = bfs_walk(
      a, max_len, node_budget,
      [&](const std::vector<int>& word, const FVec& state) {
        FieldReal acc = measure(a.proj, state);
        FieldReal gap = (acc - threshold).abs();
        if (!seeded || gap < out.margin) {
          seeded = true;
          out.margin = gap;
          out.word = word;
          out.value = acc;
        }
        return false;
      });
  return out;
}

std::string word_to_string(const std::vector<int>& word) {
  if (word.empty()) return "(empty)";
  std::string out;
  for (size_t i = 0; i < word.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(word[i]);
  }
  return out;
}

}  // namespace hsw
