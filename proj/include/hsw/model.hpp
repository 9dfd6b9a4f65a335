#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsw/matrix.hpp"

namespace hsw {

// A finite-dimensional dynamical (optionally marked) Hilbert space: named
// exactly-unitary operators, optional marked basis labels (label k maps to
// the standard basis vector e_k), and named constant vectors in the unit
// ball. Immutable after loading; all reads are parallel-safe.
struct Model {
  int dim = 0;
  std::map<std::string, FMat> operators;
  std::vector<std::string> marked;
  std::map<std::string, FVec> constants;
  nlohmann::json meta;  // optional construction annotations, round-tripped

  bool has_marked() const { return !marked.empty(); }
  // Index of a marked label, or -1.
  int marked_index(const std::string& label) const;
};

// Validates every invariant: unitarity (naming the first offending cell of
// U*U - I), marked label count and uniqueness, constant norms <= 1.
Model model_from_json(const nlohmann::json& j);
Model load_model(const std::string& path);
nlohmann::json model_to_json(const Model& m);
void save_model(const Model& m, const std::string& path);

// Operator lookup; resolves "#k" to the model's k-th operator in
// lexicographic name order (1-based), as used by the word sugar.
const FMat& model_operator(const Model& m, const std::string& name);
std::vector<std::string> sorted_operator_names(const Model& m);

// The named gate acting on the given 1-based qubit registers of a
// 2^total_qubits dimensional space, identity elsewhere. Qubit 1 is the most
// significant bit of the basis index. Names: X, K, H, CNOT, TOFFOLI.
FMat gate(const std::string& name, const std::vector<int>& registers,
          int total_qubits);

// Finite structure carrying two equivalence relations on {1..size}, each
// stored as a partition into classes.
struct EqStructure {
  int size = 0;
  std::vector<std::vector<int>> e1, e2;
};

EqStructure structure_from_json(const nlohmann::json& j);
EqStructure load_structure(const std::string& path);
nlohmann::json structure_to_json(const EqStructure& s);

// Class index of element x (1-based) in a partition; throws if absent.
int partition_class_of(const std::vector<std::vector<int>>& classes, int x);
bool partition_related(const std::vector<std::vector<int>>& classes, int a, int b);

}  // namespace hsw
