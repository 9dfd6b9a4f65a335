#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "hsw/errors.hpp"
#include "hsw/formula.hpp"
#include "hsw/parser.hpp"
#include "hsw/sentences.hpp"

using namespace hsw;

namespace {

// Random closed formulas built through the validating constructors; the
// top-level wrapper binds the shared variable pool so every variable use
// round-trips with its declared sort.
struct Gen {
  std::mt19937_64 rng;
  explicit Gen(uint64_t seed) : rng(seed) {}

  int pick(int n) { return static_cast<int>(rng() % static_cast<uint64_t>(n)); }

  TermPtr marked_var() { return t_var(pick(2) ? "y0" : "y1", Sort::marked()); }

  TermPtr leaf1() {
    switch (pick(5)) {
      case 0: return t_var("x0", Sort::ball(1));
      case 1: return t_var("x1", Sort::ball(1));
      case 2: return t_var("x2", Sort::ball(1));
      case 3: return t_zero(Sort::ball(1));
      default: return t_const(pick(2) ? "a" : "b");
    }
  }

  TermPtr ball1(int depth) {
    if (depth <= 0) return leaf1();
    switch (pick(7)) {
      case 0: return leaf1();
      case 1: return t_apply("U", ball1(depth - 1));
      case 2: return t_apply_inv("V", ball1(depth - 1));
      case 3:
        return t_apply("#" + std::to_string(1 + pick(3)), ball1(depth - 1));
      case 4: return t_qu(marked_var());
      case 5: return t_scale(rat_frac(3, 5), rat_frac(4, 5), ball1(depth - 1));
      default: return t_scale(Rat(0), Rat(pick(2) ? 1 : -1), ball1(depth - 1));
    }
  }

  TermPtr ball_any(int depth) {
    if (depth <= 0) return ball1(0);
    switch (pick(5)) {
      case 0: return ball1(depth - 1);
      case 1: return t_add(ball_any(depth - 1), ball_any(depth - 1));
      case 2: return t_sub(ball_any(depth - 1), ball_any(depth - 1));
      case 3: return t_scale(Rat(1 + pick(2)), Rat(pick(3) - 1), ball_any(depth - 1));
      default: return t_zero(Sort::ball(1 + pick(2)));
    }
  }

  FormulaPtr atom(int depth) {
    switch (pick(5)) {
      case 0: return mk_rat(rat_frac(pick(9) - 4, 1 + pick(4)));
      case 1: return mk_d(ball_any(depth), ball_any(depth));
      case 2: return mk_d(marked_var(), marked_var());
      case 3: return mk_reip(ball_any(depth), ball_any(depth));
      default: return mk_imip(ball1(depth), ball_any(depth));
    }
  }

  FormulaPtr gen(int depth) {
    if (depth <= 0) return atom(1);
    switch (pick(10)) {
      case 0: return atom(depth);
      case 1: return mk_half(gen(depth - 1));
      case 2: return mk_truncsub(gen(depth - 1), gen(depth - 1));
      case 3: return mk_min(gen(depth - 1), gen(depth - 1));
      case 4: return mk_max(gen(depth - 1), gen(depth - 1));
      case 5: return mk_absdiff(gen(depth - 1), gen(depth - 1));
      case 6: {
        auto f = gen(depth - 1);
        return mk_neg(f->range.hi + pick(2), f);
      }
      case 7:
        return mk_truncadd(Rat(pick(3)), gen(depth - 1), gen(depth - 1));
      case 8: {
        auto a = gen(depth - 1);
        auto b = gen(depth - 1);
        if (a->range.lo >= 0 && b->range.lo >= 0) return mk_prod(a, b);
        return mk_min(a, b);
      }
      default: {
        std::string v = "z" + std::to_string(pick(3));
        Sort s = pick(4) ? Sort::ball(1 + pick(2)) : Sort::marked();
        auto body = gen(depth - 1);
        return pick(2) ? mk_sup(v, s, body) : mk_inf(v, s, body);
      }
    }
  }

  FormulaPtr closed(int depth) {
    auto body = gen(depth);
    body = mk_inf("y1", Sort::marked(), body);
    body = mk_sup("y0", Sort::marked(), body);
    body = mk_sup("x2", Sort::ball(1), body);
    body = mk_inf("x1", Sort::ball(1), body);
    return mk_sup("x0", Sort::ball(1), body);
  }
};

}  // namespace

TEST_SUITE("parser") {

TEST_CASE("basic round trips canonicalize whitespace") {
  CHECK(print_formula(parse_formula_text("d(a, b)")) == "d(a, b)");
  CHECK(print_formula(parse_formula_text("d(a,b)")) == "d(a, b)");
  CHECK(print_formula(parse_formula_text("  d( a ,\n\t b )  # tail comment")) ==
        "d(a, b)");
  CHECK(print_formula(parse_formula_text("reip(U(a), V~(b))")) ==
        "reip(U(a), V~(b))");
}

TEST_CASE("quantifier bodies extend maximally to the right") {
  auto f = parse_formula_text("sup v:B1. d(v, 0:B1) -. 1/2");
  REQUIRE(f->kind == Formula::Sup);
  CHECK(f->f1->kind == Formula::TruncSub);
  CHECK(print_formula(f) == "sup v:B1. d(v, 0:B1) -. 1/2");

  auto g = parse_formula_text("1 -. (sup v:B1. d(v, 0:B1) -. 1/2)");
  REQUIRE(g->kind == Formula::TruncSub);
  CHECK(g->f2->kind == Formula::Sup);
  CHECK(print_formula(g) == "1 -. (sup v:B1. d(v, 0:B1) -. 1/2)");
}

TEST_CASE("product binds tighter than truncated subtraction") {
  auto f = parse_formula_text("1 -. 1/2 * 1/4");
  REQUIRE(f->kind == Formula::TruncSub);
  CHECK(f->f2->kind == Formula::Prod);

  auto g = parse_formula_text("(1 -. 1/2) * 1/4");
  REQUIRE(g->kind == Formula::Prod);
  CHECK(g->f1->kind == Formula::TruncSub);
  CHECK(print_formula(g) == "(1 -. 1/2) * 1/4");

  auto h = parse_formula_text("1 -. 1/2 -. 1/4");
  REQUIRE(h->kind == Formula::TruncSub);
  CHECK(h->f1->kind == Formula::TruncSub);  // left associative
}

TEST_CASE("word sugar expands to index applications and prints back") {
  auto f = parse_formula_text("sup v:B1. d(w[1,2,1](v), v)");
  const Formula* body = f->f1.get();
  REQUIRE(body->kind == Formula::D);
  const Term* t = body->t1.get();
  REQUIRE(t->kind == Term::Apply);
  CHECK(t->name == "#1");
  CHECK(t->lhs->name == "#2");
  CHECK(t->lhs->lhs->name == "#1");
  CHECK(t->lhs->lhs->lhs->kind == Term::Var);
  CHECK(print_formula(f) == "sup v:B1. d(w[1,2,1](v), v)");
}

TEST_CASE("marked sorts flow through qu and the discrete metric") {
  auto f = parse_formula_text("sup y1:Q. inf y2:Q. d(qu(y1), qu(y2)) -. d(y1, y2)");
  CHECK(print_formula(f) ==
        "sup y1:Q. inf y2:Q. d(qu(y1), qu(y2)) -. d(y1, y2)");
  CHECK(f->range.lo == 0);
}

TEST_CASE("gaussian literal forms") {
  for (const char* s : {"scale(2, a)", "scale(-1/3, a)", "scale(i, a)",
                        "scale(-i, a)", "scale(2i, a)", "scale(1/2+3/4i, a)",
                        "scale(1-i, a)", "scale(-3/5-4/5i, a)"}) {
    auto f = parse_formula_text("d(" + std::string(s) + ", 0:B2)");
    CHECK(print_formula(f) == "d(" + std::string(s) + ", 0:B2)");
  }
}

TEST_CASE("unbound identifiers become constants, bound ones variables") {
  auto f = parse_formula_text("sup x:B1. d(x, c)");
  const Formula* body = f->f1.get();
  CHECK(body->t1->kind == Term::Var);
  CHECK(body->t2->kind == Term::Const);
  CHECK(formula_constants(f).count("c") == 1);
  CHECK(formula_constants(f).count("x") == 0);
}

TEST_CASE("random print parse print fixpoint") {
  Gen gen(20260816);
  for (int iter = 0; iter < 400; ++iter) {
    FormulaPtr f = gen.closed(3 + gen.pick(3));
    std::string s1 = print_formula(f);
    CAPTURE(s1);
    FormulaPtr g = parse_formula_text(s1);
    CHECK(print_formula(g) == s1);
    CHECK(g->range.lo == f->range.lo);
    CHECK(g->range.hi == f->range.hi);
    CHECK(g->opsens == f->opsens);
  }
}

TEST_CASE("built sentences are closed and round-trip") {
  for (int n : {1, 2, 3}) {
    auto f = dimension_sentence(n);
    CHECK(f->lip.empty());
    CHECK(f->range.lo <= 0);
    std::string s = print_formula(f);
    CHECK(print_formula(parse_formula_text(s)) == s);
  }
  auto g = displacement_formula("U");
  CHECK(print_formula(g) == "sup v:B1. d(U(v), v)");
  CHECK(g->opsens.at("U") == 1);
}

TEST_CASE("malformed inputs are rejected with positions") {
  const std::vector<std::string> bad = {
      "",
      "d(x",
      "d(x,)",
      "d(x, y",
      "d(x, y))",
      "(d(x, y)",
      "min(1)",
      "min(1,)",
      "max(, 1)",
      "adiff(1 2)",
      "half()",
      "half(d(x, y)",
      "not[1/4](d(x, y))",
      "not[2]",
      "not 2 (1)",
      "plus[-1](1, 2)",
      "plus[1](1)",
      "plus(1, 2)",
      "1 -.",
      "-. 1",
      "* 3",
      "3 *",
      "3 * reip(x, y)",
      "x -. 1",
      "d(x, y) extra",
      "sup v. d(v, v)",
      "sup v:B0. d(v, v)",
      "sup v:R3. d(v, v)",
      "sup :B1. d(x, x)",
      "sup v:B1 d(v, v)",
      "inf v:Q. reip(v, v)",
      "a -. sup v:B1. 1",
      "w[0](v)",
      "w[1/2](v)",
      "w[](v)",
      "w[1,](v)",
      "w[1] v",
      "qu(x)",
      "sup y:Q. qu(qu(y))",
      "sup y:Q. d(qu(y), y)",
      "sup y:Q. add(y, y)",
      "sup y:Q. U(y)",
      "sup v:B1. v(x)",
      "scale(, a)",
      "scale(1+, a)",
      "scale(1+2, a)",
      "scale(i+i, a)",
      "d(0:B1, 0)",
      "d(1:B1, x)",
      "d(0:Q, x)",
      "unknownhead(1, 2)",
      "1/0",
      "d(x, y) $",
  };
  for (const std::string& s : bad) {
    CAPTURE(s);
    bool threw = false;
    try {
      parse_formula_text(s);
    } catch (const InputError& e) {
      threw = true;
      CHECK(std::string(e.what()).find("at line") != std::string::npos);
    }
    CHECK(threw);
  }
}

}  // TEST_SUITE
