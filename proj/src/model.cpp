#include "hsw/model.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <set>

#include "hsw/errors.hpp"

namespace hsw {

namespace {

using nlohmann::json;

// Names the term grammar claims for itself; everything else is fair game
// because operators and constants only ever appear in term position.
const std::set<std::string>& reserved_names() {
  static const std::set<std::string> r = {"add", "sub", "scale", "qu", "w", "i"};
  return r;
}

void check_name(const std::string& name, const char* what) {
  if (name.empty()) throw InputError(std::string(what) + " name must be nonempty");
  if (name[0] == '#')
    throw InputError(std::string(what) + " name '" + name +
                     "' may not start with '#'");
  if (reserved_names().count(name))
    throw InputError(std::string(what) + " name '" + name +
                     "' collides with a grammar keyword");
  for (char c : name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
      throw InputError(std::string(what) + " name '" + name +
                       "' must be alphanumeric");
  if (std::isdigit(static_cast<unsigned char>(name[0])))
    throw InputError(std::string(what) + " name '" + name +
                     "' may not start with a digit");
}

FMat matrix_from_json(const json& rows, int dim, const std::string& op) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != dim)
    throw InputError("operator '" + op + "' must have " + std::to_string(dim) +
                     " rows");
  FMat m(dim, std::vector<FieldScalar>(dim));
  for (int r = 0; r < dim; ++r) {
    const json& row = rows[r];
    if (!row.is_array() || static_cast<int>(row.size()) != dim)
      throw InputError("operator '" + op + "' row " + std::to_string(r + 1) +
                       " must have " + std::to_string(dim) + " entries");
    for (int c = 0; c < dim; ++c) {
      if (!row[c].is_string())
        throw InputError("operator '" + op + "' entries must be strings");
      m[r][c] = FieldScalar::decode(row[c].get<std::string>());
    }
  }
  return m;
}

json matrix_to_json(const FMat& m) {
  json rows = json::array();
  for (const auto& r : m) {
    json row = json::array();
    for (const auto& e : r) row.push_back(e.encode());
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

int Model::marked_index(const std::string& label) const {
  for (size_t k = 0; k < marked.size(); ++k)
    if (marked[k] == label) return static_cast<int>(k);
  return -1;
}

Model model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("model file must hold a JSON object");
  Model m;
  if (!j.contains("dim") || !j["dim"].is_number_integer())
    throw InputError("model requires an integer 'dim' field");
  m.dim = j["dim"].get<int>();
  if (m.dim < 1) throw InputError("model dimension must be positive");

  if (j.contains("operators")) {
    if (!j["operators"].is_object())
      throw InputError("'operators' must map names to matrices");
    for (const auto& [name, rows] : j["operators"].items()) {
      check_name(name, "operator");
      FMat u = matrix_from_json(rows, m.dim, name);
      if (auto cell = fmat_unitary_defect(u))
        throw InputError("operator '" + name + "' is not unitary: (U*U - I) at cell (" +
                         std::to_string(cell->first) + "," +
                         std::to_string(cell->second) + ") is nonzero");
      m.operators[name] = std::move(u);
    }
  }

  if (j.contains("marked")) {
    if (!j["marked"].is_array())
      throw InputError("'marked' must be a list of labels");
    std::set<std::string> seen;
    for (const auto& lbl : j["marked"]) {
      if (!lbl.is_string()) throw InputError("marked labels must be strings");
      std::string s = lbl.get<std::string>();
      if (s.empty()) throw InputError("marked labels must be nonempty");
      if (!seen.insert(s).second)
        throw InputError("duplicate marked label '" + s + "'");
      m.marked.push_back(s);
    }
    if (static_cast<int>(m.marked.size()) != m.dim)
      throw InputError("marked label count " + std::to_string(m.marked.size()) +
                       " does not match dim " + std::to_string(m.dim));
  }

  if (j.contains("constants")) {
    if (!j["constants"].is_object())
      throw InputError("'constants' must map names to vectors");
    for (const auto& [name, vec] : j["constants"].items()) {
      check_name(name, "constant");
      if (!vec.is_array() || static_cast<int>(vec.size()) != m.dim)
        throw InputError("constant '" + name + "' must have " +
                         std::to_string(m.dim) + " entries");
      FVec v(m.dim);
      for (int k = 0; k < m.dim; ++k) {
        if (!vec[k].is_string())
          throw InputError("constant '" + name + "' entries must be strings");
        v[k] = FieldScalar::decode(vec[k].get<std::string>());
      }
      FieldReal n2 = fvec_norm2(v);
      if (FieldReal(Rat(1), Rat(0)) < n2)
        throw InputError("constant '" + name + "' has norm above 1");
      m.constants[name] = std::move(v);
    }
  }

  if (j.contains("meta")) m.meta = j["meta"];

  for (const auto& [key, _] : j.items()) {
    (void)_;
    if (key != "dim" && key != "operators" && key != "marked" &&
        key != "constants" && key != "meta")
      throw InputError("unknown model field '" + key + "'");
  }
  return m;
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("model file '" + path + "' is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

nlohmann::json model_to_json(const Model& m) {
  json j;
  j["dim"] = m.dim;
  if (!m.operators.empty()) {
    json ops = json::object();
    for (const auto& [name, mat] : m.operators) ops[name] = matrix_to_json(mat);
    j["operators"] = ops;
  }
  if (!m.marked.empty()) j["marked"] = m.marked;
  if (!m.constants.empty()) {
    json cs = json::object();
    for (const auto& [name, v] : m.constants) {
      json arr = json::array();
      for (const auto& e : v) arr.push_back(e.encode());
      cs[name] = arr;
    }
    j["constants"] = cs;
  }
  if (!m.meta.is_null()) j["meta"] = m.meta;
  return j;
}

void save_model(const Model& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write model file '" + path + "'");
  out << model_to_json(m).dump(2) << "\n";
}

std::vector<std::string> sorted_operator_names(const Model& m) {
  std::vector<std::string> names;
  for (const auto& [name, _] : m.operators) {
    (void)_;
    names.push_back(name);  // std::map iterates in lexicographic order
  }
  return names;
}

const FMat& model_operator(const Model& m, const std::string& name) {
  if (!name.empty() && name[0] == '#') {
    size_t k = 0;
    try {
      k = std::stoul(name.substr(1));
    } catch (...) {
      throw InputError("bad operator index '" + name + "'");
    }
    if (k < 1 || k > m.operators.size())
      throw InputError("word index " + std::to_string(k) + " exceeds the " +
                       std::to_string(m.operators.size()) + " model operators");
    auto it = m.operators.begin();
    std::advance(it, k - 1);
    return it->second;
  }
  auto it = m.operators.find(name);
  if (it == m.operators.end())
    throw InputError("model has no operator named '" + name + "'");
  return it->second;
}

FMat gate(const std::string& name, const std::vector<int>& registers,
          int total_qubits) {
  if (total_qubits < 1 || total_qubits > 12)
    throw InputError("total qubit count must be between 1 and 12");
  std::set<int> seen;
  for (int r : registers) {
    if (r < 1 || r > total_qubits)
      throw InputError("register " + std::to_string(r) + " outside 1.." +
                       std::to_string(total_qubits));
    if (!seen.insert(r).second)
      throw InputError("register " + std::to_string(r) + " repeated");
  }

  // Small gate matrix over its own registers.
  FMat g;
  size_t arity = 0;
  const FieldScalar one = FieldScalar::one();
  const FieldScalar zero = FieldScalar::zero();
  if (name == "X") {
    arity = 1;
    g = {{zero, one}, {one, zero}};
  } else if (name == "K") {
    arity = 1;
    g = {{one, zero}, {zero, FieldScalar::i()}};
  } else if (name == "H") {
    arity = 1;
    FieldScalar h(Rat(0), Rat(0), rat_frac(1, 2), Rat(0));  // sqrt(2)/2
    g = {{h, h}, {h, -h}};
  } else if (name == "CNOT") {
    arity = 2;
    g = fmat_zero(4, 4);
    // |c t> -> |c, t xor c>
    g[0][0] = one;
    g[1][1] = one;
    g[3][2] = one;
    g[2][3] = one;
  } else if (name == "TOFFOLI") {
    arity = 3;
    g = fmat_zero(8, 8);
    for (int s = 0; s < 8; ++s) {
      int c1 = (s >> 2) & 1, c2 = (s >> 1) & 1, t = s & 1;
      int out = (c1 << 2) | (c2 << 1) | (t ^ (c1 & c2));
      g[out][s] = one;
    }
  } else {
    throw InputError("unknown gate '" + name + "'");
  }
  if (registers.size() != arity)
    throw InputError("gate " + name + " takes " + std::to_string(arity) +
                     " registers, got " + std::to_string(registers.size()));

  // Embed: qubit 1 is the most significant bit of the basis index.
  int n = total_qubits;
  size_t dim = size_t{1} << n;
  FMat m = fmat_zero(dim, dim);
  size_t gdim = size_t{1} << arity;
  for (size_t col = 0; col < dim; ++col) {
    size_t gin = 0;
    for (size_t j = 0; j < arity; ++j) {
      int bit = static_cast<int>((col >> (n - registers[j])) & 1);
      gin = (gin << 1) | static_cast<size_t>(bit);
    }
    for (size_t gout = 0; gout < gdim; ++gout) {
      if (g[gout][gin].is_zero()) continue;
      size_t row = col;
      for (size_t j = 0; j < arity; ++j) {
        size_t bit = (gout >> (arity - 1 - j)) & 1;
        size_t mask = size_t{1} << (n - registers[j]);
        row = (row & ~mask) | (bit ? mask : 0);
      }
      m[row][col] = g[gout][gin];
    }
  }
  return m;
}

EqStructure structure_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("structure file must hold a JSON object");
  EqStructure s;
  if (!j.contains("size") || !j["size"].is_number_integer())
    throw InputError("structure requires an integer 'size' field");
  s.size = j["size"].get<int>();
  if (s.size < 1) throw InputError("structure size must be positive");

  auto read_partition = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_array())
      throw InputError(std::string("structure requires a '") + key +
                       "' partition list");
    std::vector<std::vector<int>> classes;
    std::set<int> seen;
    for (const auto& cls : j[key]) {
      if (!cls.is_array() || cls.empty())
        throw InputError(std::string(key) + " classes must be nonempty lists");
      std::vector<int> c;
      for (const auto& e : cls) {
        if (!e.is_number_integer())
          throw InputError(std::string(key) + " elements must be integers");
        int x = e.get<int>();
        if (x < 1 || x > s.size)
          throw InputError(std::string(key) + " element " + std::to_string(x) +
                           " outside 1.." + std::to_string(s.size));
        if (!seen.insert(x).second)
          throw InputError(std::string(key) + " element " + std::to_string(x) +
                           " appears twice");
        c.push_back(x);
      }
      classes.push_back(c);
    }
    if (static_cast<int>(seen.size()) != s.size)
      throw InputError(std::string(key) + " does not cover 1.." +
                       std::to_string(s.size));
    return classes;
  };
  s.e1 = read_partition("E1");
  s.e2 = read_partition("E2");
  return s;
}

EqStructure load_structure(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open structure file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("structure file '" + path + "' is not valid JSON: " + e.what());
  }
  return structure_from_json(j);
}

nlohmann::json structure_to_json(const EqStructure& s) {
  nlohmann::json j;
  j["size"] = s.size;
  j["E1"] = s.e1;
  j["E2"] = s.e2;
  return j;
}

int partition_class_of(const std::vector<std::vector<int>>& classes, int x) {
  for (size_t k = 0; k < classes.size(); ++k)
    for (int e : classes[k])
      if (e == x) return static_cast<int>(k);
  throw InternalError("element " + std::to_string(x) + " not in partition");
}

bool partition_related(const std::vector<std::vector<int>>& classes, int a, int b) {
  return partition_class_of(classes, a) == partition_class_of(classes, b);
}

}  // namespace hsw
