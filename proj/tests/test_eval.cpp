#include <doctest.h>

#include <string>
#include <vector>

#include "hsw/errors.hpp"
#include "hsw/eval.hpp"
#include "hsw/linalg.hpp"
#include "hsw/parser.hpp"
#include "hsw/sentences.hpp"

using namespace hsw;

namespace {

Model plain_model(int dim) {
  Model m;
  m.dim = dim;
  return m;
}

Model op_model(int dim, const std::string& name, FMat u) {
  Model m;
  m.dim = dim;
  m.operators[name] = std::move(u);
  return m;
}

// dim-2 model with u = diag(1, i), marked labels, and the constant a = e1
Model rich_model() {
  Model m;
  m.dim = 2;
  m.operators["u"] = gate("K", {1}, 1);
  m.operators["x"] = gate("X", {1}, 1);
  m.marked = {"q0", "q1"};
  FVec a(2);
  a[0] = FieldScalar::one();
  m.constants["a"] = a;
  return m;
}

FMat reflection2() {
  FMat u = fmat_identity(2);
  u[1][1] = -FieldScalar::one();
  return u;
}

EvalResult cert(const std::string& text, const Model& m, const Rat& eps,
                long budget = kDefaultEvalBudget) {
  return eval_certified(parse_formula_text(text), m, eps, budget);
}

// Enclosure of max over the spectrum of |1 - lambda|, computed from the
// certified eigenvalue clusters; an independent route to the displacement.
Interval spectral_displacement(const FMat& u) {
  Interval acc(Rat(0), Rat(0));
  bool first = true;
  for (const auto& cl : unitary_eigs(u, rat_frac(1, 4096))) {
    FieldScalar gap = FieldScalar::one() - cl.center;
    Interval s = field_real_sqrt(gap.abs2(), 96);
    Interval with_rad(rat_max(Rat(0), s.lo - cl.radius), s.hi + cl.radius);
    acc = first ? with_rad : imax(acc, with_rad);
    first = false;
  }
  return acc;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("identity displacement is zero") {
  auto r = cert("sup v:B1. d(v, v)", plain_model(2), rat_frac(1, 100));
  CHECK(r.value.lo == 0);
  CHECK(r.value.hi <= rat_frac(1, 100));
  CHECK(r.mode == "certified");
  CHECK(r.cost > 0);
}

TEST_CASE("reflection displacement reaches the far eigenvalue") {
  Model m = op_model(2, "u", reflection2());
  auto r = cert("sup v:B1. d(u(v), v)", m, rat_frac(1, 20));
  CHECK(r.value.contains(Rat(2)));
  CHECK(r.value.width() <= rat_frac(1, 20));
}

TEST_CASE("norm infimum over the ball is zero") {
  auto r = cert("inf v:B1. reip(v, v)", plain_model(3), rat_frac(1, 100));
  CHECK(r.value.contains(Rat(0)));
  CHECK(r.value.width() <= rat_frac(1, 100));
}

TEST_CASE("rational constants evaluate to points") {
  auto r = cert("1/2", plain_model(1), rat_frac(1, 1000));
  CHECK(r.value.lo == rat_frac(1, 2));
  CHECK(r.value.hi == rat_frac(1, 2));
}

TEST_CASE("connective arithmetic stays exact on constants") {
  auto r = cert("half(plus[1](1/4, not[1](min(1/2, 3/4))))", plain_model(1),
                rat_frac(1, 1000));
  // half(min(1, 1/4 + (1 - 1/2))) = 3/8
  CHECK(r.value.lo == rat_frac(3, 8));
  CHECK(r.value.hi == rat_frac(3, 8));
}

TEST_CASE("dimension sentence vanishes at matching dimension") {
  auto f = dimension_sentence(2);
  auto r = eval_certified(f, plain_model(2), rat_frac(1, 50));
  CHECK(r.value.lo >= 0);
  CHECK(r.value.hi <= rat_frac(1, 50));
}

TEST_CASE("dimension sentence separates a higher dimension") {
  auto f = dimension_sentence(2);
  auto r = eval_certified(f, plain_model(3), rat_frac(1, 4));
  CHECK(r.value.lo >= rat_frac(1, 4));
  CHECK(r.value.hi <= Rat(1));
  CHECK(r.witnesses.contains("y1"));
  CHECK(r.witnesses.contains("y2"));
}

TEST_CASE("heuristic mode pins the Hadamard displacement from below") {
  Model m = op_model(2, "h", gate("H", {1}, 1));
  auto f = displacement_formula("h");
  auto r = eval_heuristic(f, m, 10000);
  CHECK(r.mode == "heuristic");
  CHECK(r.value.lo >= Rat(2) - rat_frac(1, 100));
  CHECK(r.value.hi <= Rat(2));
  CHECK_FALSE(r.witnesses.empty());
}

TEST_CASE("heuristic mode accepts the matching-dimension witness") {
  auto f = dimension_sentence(2);
  auto r = eval_heuristic(f, plain_model(2), 20000);
  CHECK(r.value.hi <= rat_frac(1, 1000));
  CHECK(r.value.lo == 0);
}

TEST_CASE("certified displacement agrees with the eigenvalue route") {
  std::vector<FMat> ops = {gate("X", {1}, 1), gate("H", {1}, 1),
                           gate("K", {1}, 1), gate("CNOT", {1, 2}, 2),
                           reflection2()};
  for (const auto& u : ops) {
    Model m = op_model(static_cast<int>(u.size()), "u", u);
    auto r = eval_certified(displacement_formula("u"), m, rat_frac(1, 50));
    Interval spec = spectral_displacement(u);
    CAPTURE(spec.str());
    CAPTURE(r.value.str());
    CHECK(r.value.intersects(spec));
    CHECK(r.value.width() <= rat_frac(1, 50));
  }
}

TEST_CASE("conjugated models evaluate sentences identically") {
  FMat k = gate("K", {1}, 1);
  FMat h = gate("H", {1}, 1);
  FMat conj = fmat_mul(fmat_mul(h, k), h);  // same spectrum, rotated basis
  Model m1 = op_model(2, "u", k);
  Model m2 = op_model(2, "u", conj);
  std::vector<std::string> sentences = {
      "sup v:B1. d(u(v), v)",
      "inf v:B1. d(u(v), v)",
      "sup v:B1. adiff(imip(v, u(v)), 0)",
  };
  for (const auto& s : sentences) {
    auto r1 = cert(s, m1, rat_frac(1, 32));
    auto r2 = cert(s, m2, rat_frac(1, 32));
    CAPTURE(s);
    CHECK(r1.value.intersects(r2.value));
  }
}

TEST_CASE("marked quantifiers enumerate exactly") {
  Model m = rich_model();
  auto r1 = cert("inf y:Q. d(y, y)", m, rat_frac(1, 1000));
  CHECK(r1.value.lo == 0);
  CHECK(r1.value.hi == 0);

  auto r2 = cert("inf y1:Q. sup y2:Q. d(y1, y2)", m, rat_frac(1, 1000));
  CHECK(r2.value.lo == 1);
  CHECK(r2.value.hi == 1);

  auto r3 = cert("sup y:Q. reip(qu(y), a)", m, rat_frac(1, 1000));
  CHECK(r3.value.lo == 1);
  CHECK(r3.value.hi == 1);
  CHECK(r3.witnesses["y"] == "q0");
}

TEST_CASE("marked labels feed exact spectral values through qu") {
  Model m = rich_model();
  // max over basis labels of |1 - lambda| for u = diag(1, i)
  auto r = cert("sup y:Q. d(u(qu(y)), qu(y))", m, rat_frac(1, 1000));
  FieldScalar gap = FieldScalar::one() - FieldScalar::i();
  Interval expect = field_real_sqrt(gap.abs2(), 96);
  CHECK(r.value.intersects(expect));
  CHECK(r.witnesses["y"] == "q1");
}

TEST_CASE("ball and marked quantifiers nest") {
  Model m = rich_model();
  auto r = cert("sup v:B1. inf y:Q. d(v, qu(y))", m, rat_frac(1, 8));
  // the far point from both basis vectors is at distance > 1
  CHECK(r.value.lo >= Rat(1));
  CHECK(r.value.hi <= Rat(2));
  CHECK(r.value.width() <= rat_frac(1, 8));
}

TEST_CASE("alternating ball quantifiers converge via copy candidates") {
  auto r = cert("sup x:B1. inf y:B1. d(x, y)", plain_model(2), rat_frac(1, 4));
  CHECK(r.value.lo == 0);
  CHECK(r.value.hi <= rat_frac(1, 4));
}

TEST_CASE("certified and heuristic enclosures intersect across a battery") {
  Model rich = rich_model();
  Model p3 = plain_model(3);
  struct Case {
    const char* text;
    const Model* m;
  };
  std::vector<Case> cases = {
      {"sup x:B1. d(u(x), x)", &rich},
      {"inf x:B1. d(u(x), x)", &rich},
      {"sup v:B1. d(x(v), v)", &rich},
      {"sup x:B1. half(d(x, 0:B1))", &rich},
      {"sup x:B1. adiff(reip(x, x), 1/2)", &rich},
      {"sup x:B1. min(d(x, 0:B1), 1/2)", &rich},
      {"sup x:B1. max(d(x, 0:B1), reip(x, x))", &rich},
      {"sup x:B1. plus[2](d(x, 0:B1), d(x, 0:B1))", &rich},
      {"inf x:B1. plus[1](reip(x, x), reip(x, x))", &rich},
      {"1/2 -. (inf x:B1. reip(x, x))", &rich},
      {"sup x:B1. imip(x, u(x))", &rich},
      {"inf x:B1. imip(x, u(x))", &rich},
      {"sup x:B1. not[1](reip(x, x))", &rich},
      {"sup x:B1. reip(x, a)", &rich},
      {"sup x:B1. imip(x, a)", &rich},
      {"inf v:B1. max(d(v, a), d(v, x(a)))", &rich},
      {"sup x:B1. reip(u(x), a) -. 1/2", &rich},
      {"sup x:B1. d(u(x), a)", &rich},
      {"sup x:B1. half(adiff(reip(x, u(x)), imip(x, u(x))))", &rich},
      {"sup y:Q. inf x:B1. d(x, qu(y))", &rich},
      {"inf y:Q. adiff(reip(qu(y), a), 1)", &rich},
      {"sup y1:Q. sup y2:Q. adiff(d(y1, y2), reip(qu(y1), qu(y2)))", &rich},
      {"sup x:B1. d(w[1](x), x)", &rich},
      {"sup x:B1. d(w[1,2](x), w[2,1](x))", &rich},
      {"sup x:B1. d(u~(u(x)), x)", &rich},
      {"sup x:B1. d(x, 0:B1)", &p3},
      {"inf x:B1. adiff(reip(x, x), 1/2)", &p3},
      {"sup x:B1. sup y:B1. adiff(reip(x, y), 0)", &p3},
      {"inf x:B1. sup y:B1. reip(x, y)", &p3},
      {"sup x:B1. plus[1](imip(x, x), reip(x, x))", &p3},
  };
  for (const auto& c : cases) {
    CAPTURE(c.text);
    auto rc = cert(c.text, *c.m, rat_frac(1, 8), 4000000);
    CHECK(rc.value.width() <= rat_frac(1, 8));
    auto rh = eval_heuristic(parse_formula_text(c.text), *c.m, 30000);
    CAPTURE(rc.value.str());
    CAPTURE(rh.value.str());
    CHECK(rc.value.intersects(rh.value));
  }
}

TEST_CASE("unknown names are rejected against the model") {
  Model m = plain_model(2);
  CHECK_THROWS_AS(cert("sup v:B1. d(u(v), v)", m, rat_frac(1, 4)), InputError);
  CHECK_THROWS_AS(cert("d(a, 0:B1)", m, rat_frac(1, 4)), InputError);
  CHECK_THROWS_AS(cert("sup y:Q. d(y, y)", m, rat_frac(1, 4)), InputError);
  CHECK_THROWS_AS(cert("sup v:B1. d(w[3](v), v)", rich_model(), rat_frac(1, 4)),
                  InputError);
  CHECK_THROWS_AS(cert("1/2", m, Rat(0)), InputError);
}

TEST_CASE("exhausted budgets raise instead of degrading") {
  auto f = dimension_sentence(2);
  CHECK_THROWS_AS(eval_certified(f, plain_model(3), rat_frac(1, 100), 200),
                  BudgetError);
  // refinement to width 1/1000 on an alternating pair needs far more than
  // the granted budget; the error must carry the bounds reached so far
  auto g = parse_formula_text("sup x:B1. inf y:B1. d(x, y)");
  try {
    eval_certified(g, plain_model(2), rat_frac(1, 1000), 60000);
    CHECK(false);
  } catch (const BudgetError& e) {
    CHECK(std::string(e.what()).find("budget") != std::string::npos);
    CHECK_FALSE(e.best_lo.empty());
    CHECK_FALSE(e.best_hi.empty());
  }
}

TEST_CASE("deterministic across repeated runs") {
  Model m = rich_model();
  auto a = cert("sup x:B1. d(u(x), a)", m, rat_frac(1, 16));
  auto b = cert("sup x:B1. d(u(x), a)", m, rat_frac(1, 16));
  CHECK(a.value.lo == b.value.lo);
  CHECK(a.value.hi == b.value.hi);
  CHECK(a.cost == b.cost);
  CHECK(a.witnesses == b.witnesses);
}

}  // TEST_SUITE
