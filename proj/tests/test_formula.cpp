#include <doctest.h>

#include "hsw/errors.hpp"
#include "hsw/formula.hpp"

using namespace hsw;

namespace {

TermPtr v1(const char* n) { return t_var(n, Sort::ball(1)); }
TermPtr mv(const char* n) { return t_var(n, Sort::marked()); }

}  // namespace

TEST_SUITE("formula") {

TEST_CASE("distance range and Lipschitz data") {
  auto f = mk_d(v1("v"), v1("v"));
  CHECK(f->range.lo == 0);
  CHECK(f->range.hi == 2);
  CHECK(f->lip.at("v") == 2);

  auto g = mk_d(t_var("u", Sort::ball(2)), t_var("w", Sort::ball(3)));
  CHECK(g->range.hi == 5);
  CHECK(g->lip.at("u") == 1);
  CHECK(g->lip.at("w") == 1);
}

TEST_CASE("displacement modulus: variable and operator sensitivity") {
  auto f = mk_d(t_apply("U", v1("v")), v1("v"));
  CHECK(f->lip.at("v") == 2);
  CHECK(f->opsens.at("U") == 1);
  CHECK(f->range.lo == 0);
  CHECK(f->range.hi == 2);

  auto g = mk_d(t_apply("U", t_apply("U", v1("v"))), v1("v"));
  CHECK(g->opsens.at("U") == 2);
}

TEST_CASE("inner product cross rule") {
  auto f = mk_reip(t_var("u", Sort::ball(2)), t_var("w", Sort::ball(3)));
  CHECK(f->range.lo == -6);
  CHECK(f->range.hi == 6);
  CHECK(f->lip.at("u") == 3);
  CHECK(f->lip.at("w") == 2);

  auto h = mk_half(mk_reip(v1("u"), v1("w")));
  CHECK(h->range.lo == rat_frac(-1, 2));
  CHECK(h->range.hi == rat_frac(1, 2));
  CHECK(h->lip.at("u") == rat_frac(1, 2));
}

TEST_CASE("truncated subtraction clamps ranges") {
  auto f = mk_truncsub(mk_rat(rat_frac(1, 4)), mk_d(v1("v"), v1("v")));
  CHECK(f->range.lo == 0);
  CHECK(f->range.hi == rat_frac(1, 4));

  auto zero = mk_truncsub(mk_d(v1("u"), v1("v")), mk_rat(Rat(3)));
  CHECK(zero->range.lo == 0);
  CHECK(zero->range.hi == 0);
}

TEST_CASE("min and max take the pointwise modulus maximum") {
  auto f = mk_min(mk_d(v1("u"), t_zero(Sort::ball(1))),
                  mk_d(v1("v"), t_zero(Sort::ball(1))));
  CHECK(f->lip.at("u") == 1);
  CHECK(f->lip.at("v") == 1);
  CHECK(f->range.lo == 0);
  CHECK(f->range.hi == 1);

  auto g = mk_max(mk_d(v1("u"), v1("v")), mk_d(v1("u"), t_zero(Sort::ball(1))));
  CHECK(g->lip.at("u") == 1);
  CHECK(g->range.hi == 2);
}

TEST_CASE("product validates signs and weights moduli") {
  CHECK_THROWS_AS(mk_prod(mk_reip(v1("u"), v1("v")), mk_rat(Rat(1))), InputError);

  auto a = mk_d(v1("u"), t_zero(Sort::ball(1)));   // range [0,1]
  auto b = mk_d(v1("u"), v1("v"));                 // range [0,2]
  auto p = mk_prod(a, b);
  CHECK(p->range.lo == 0);
  CHECK(p->range.hi == 2);
  CHECK(p->lip.at("u") == 3);  // 2*1 + 1*1
  CHECK(p->lip.at("v") == 1);  // 1*1
}

TEST_CASE("negation cap must dominate the operand range") {
  auto f = mk_d(v1("u"), v1("v"));
  CHECK_THROWS_AS(mk_neg(Rat(1), f), InputError);
  auto g = mk_neg(Rat(2), f);
  CHECK(g->range.lo == 0);
  CHECK(g->range.hi == 2);
  CHECK(g->lip.at("u") == 1);
}

TEST_CASE("capped addition") {
  auto f = mk_truncadd(Rat(1), mk_rat(rat_frac(3, 4)), mk_rat(rat_frac(3, 4)));
  CHECK(f->range.lo == 1);
  CHECK(f->range.hi == 1);
  CHECK_THROWS_AS(mk_truncadd(Rat(-1), mk_rat(Rat(0)), mk_rat(Rat(0))), InputError);
}

TEST_CASE("quantifiers drop their own variable from the modulus map") {
  auto body = mk_d(v1("u"), v1("v"));
  auto f = mk_sup("v", Sort::ball(1), body);
  CHECK(f->lip.count("v") == 0);
  CHECK(f->lip.at("u") == 1);
  CHECK(f->range.hi == 2);

  auto g = mk_inf("u", Sort::ball(1), f);
  CHECK(g->lip.empty());
}

TEST_CASE("scaling widens sorts by the modulus ceiling") {
  auto s1 = t_scale(rat_frac(1, 2), rat_frac(1, 2), v1("v"));
  CHECK(s1->sort == Sort::ball(1));  // |c|^2 = 1/2

  auto s2 = t_scale(Rat(0), Rat(2), v1("v"));
  CHECK(s2->sort == Sort::ball(2));
  CHECK(s2->lip.at("v") == 2);

  auto s3 = t_scale(Rat(1), Rat(1), v1("v"));  // |c| = sqrt(2)
  CHECK(s3->sort == Sort::ball(2));
  CHECK(s3->lip.at("v") > rat_frac(14142, 10000));
  CHECK(s3->lip.at("v") < rat_frac(141422, 100000));
}

TEST_CASE("sort violations are rejected") {
  CHECK_THROWS_AS(t_apply("U", t_var("x", Sort::ball(2))), InputError);
  CHECK_THROWS_AS(t_qu(v1("x")), InputError);
  CHECK_THROWS_AS(t_zero(Sort::marked()), InputError);
  CHECK_THROWS_AS(mk_d(v1("x"), mv("y")), InputError);
  CHECK_THROWS_AS(mk_reip(t_qu(mv("y")), mv("y")), InputError);
  CHECK_THROWS_AS(t_apply_inv("#1", v1("x")), InputError);
}

TEST_CASE("marked distance is the discrete metric range") {
  auto f = mk_d(mv("y1"), mv("y2"));
  CHECK(f->range.lo == 0);
  CHECK(f->range.hi == 1);
  CHECK(f->lip.empty());
}

TEST_CASE("canonical printing with minimal parentheses") {
  auto a = mk_rat(Rat(1));
  auto b = mk_rat(rat_frac(1, 2));
  auto c = mk_rat(rat_frac(1, 4));
  CHECK(print_formula(mk_truncsub(mk_truncsub(a, b), c)) == "1 -. 1/2 -. 1/4");
  CHECK(print_formula(mk_truncsub(a, mk_truncsub(b, c))) == "1 -. (1/2 -. 1/4)");
  CHECK(print_formula(mk_truncsub(a, mk_prod(b, c))) == "1 -. 1/2 * 1/4");
  CHECK(print_formula(mk_prod(mk_truncsub(a, b), c)) == "(1 -. 1/2) * 1/4");
  CHECK(print_formula(mk_prod(b, mk_prod(c, a))) == "1/2 * (1/4 * 1)");

  auto q = mk_sup("v", Sort::ball(1),
                  mk_truncsub(mk_d(v1("v"), t_zero(Sort::ball(1))), b));
  CHECK(print_formula(q) == "sup v:B1. d(v, 0:B1) -. 1/2");
  CHECK(print_formula(mk_truncsub(mk_rat(Rat(1)), q)) ==
        "1 -. (sup v:B1. d(v, 0:B1) -. 1/2)");
}

TEST_CASE("word sugar prints from index application chains") {
  auto t = t_apply("#1", t_apply("#2", t_apply("#1", v1("v"))));
  CHECK(print_term(t) == "w[1,2,1](v)");
  auto u = t_apply("U", t_apply("#2", v1("v")));
  CHECK(print_term(u) == "U(w[2](v))");
}

TEST_CASE("gaussian coefficients print canonically") {
  CHECK(print_term(t_scale(rat_frac(1, 2), rat_frac(3, 4), v1("v"))) ==
        "scale(1/2+3/4i, v)");
  CHECK(print_term(t_scale(Rat(0), Rat(-1), v1("v"))) == "scale(-i, v)");
  CHECK(print_term(t_scale(Rat(1), Rat(-1), v1("v"))) == "scale(1-i, v)");
  CHECK(print_term(t_scale(rat_frac(-2, 3), Rat(0), v1("v"))) ==
        "scale(-2/3, v)");
  CHECK(print_term(t_scale(Rat(0), Rat(1), v1("v"))) == "scale(i, v)");
}

TEST_CASE("annotation rebuild is stable") {
  auto f = mk_sup(
      "v", Sort::ball(1),
      mk_min(mk_truncsub(mk_rat(rat_frac(1, 4)),
                         mk_d(t_apply("U", v1("v")), v1("v"))),
             mk_half(mk_reip(v1("v"), t_const("a")))));
  auto g = infer_ranges(f);
  CHECK(print_formula(f) == print_formula(g));
  CHECK(g->range.lo == f->range.lo);
  CHECK(g->range.hi == f->range.hi);
  CHECK(formula_constants(f).count("a") == 1);
}

}  // TEST_SUITE
