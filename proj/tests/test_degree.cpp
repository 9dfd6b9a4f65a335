#include <doctest.h>

#include <optional>
#include <set>
#include <vector>

#include "hsw/degree.hpp"
#include "hsw/errors.hpp"
#include "hsw/eval.hpp"
#include "hsw/parser.hpp"
#include "hsw/sentences.hpp"

using namespace hsw;

namespace {

// A synthetic stream emitting f(1), f(2), ... at unit cost per pull.
BoundStream seq_stream(std::function<Rat(int)> f) {
  auto k = std::make_shared<int>(0);
  BoundStream s;
  s.next = [k, f]() -> std::optional<BoundPull> {
    ++*k;
    return BoundPull{f(*k), 1, "step " + std::to_string(*k)};
  };
  return s;
}

FormulaPtr displacement1() {
  return parse_formula_text("sup v:B1. d(U1(v), v)");
}

// (disp/2) * ((2 - disp)/2) peaks at 1/4 over U(1); its degree needs the
// net genuinely (the static range bound is 1).
FormulaPtr peak_formula() {
  FormulaPtr disp = displacement1();
  return mk_prod(mk_half(disp),
                 mk_half(mk_truncsub(mk_rat(Rat(2)), disp)));
}

Model phase_model(const Rat& c, const Rat& s) {
  Model m;
  m.dim = 1;
  m.operators["U1"] = unitary_from_params(1, {{c, s}});
  return m;
}

}  // namespace

TEST_SUITE("degree") {
  TEST_CASE("sandwich encloses synthetic limits") {
    // lower 37/100 - 1/k, upper 37/100 + 1/k
    Rat target = rat_frac(37, 100);
    auto lower =
        seq_stream([&](int k) -> Rat { return target - rat_frac(1, k); });
    auto upper =
        seq_stream([&](int k) -> Rat { return target + rat_frac(1, k); });
    DegreeResult r = ershov_sandwich(lower, upper, rat_frac(1, 100), 100000);
    CHECK(r.success);
    CHECK(r.value.contains(target));
    CHECK(r.value.width() <= rat_frac(1, 100));
    CHECK(r.steps > 0);

    // both constantly zero: done after one pull each
    auto zl = seq_stream([](int) { return Rat(0); });
    auto zu = seq_stream([](int) { return Rat(0); });
    r = ershov_sandwich(zl, zu, Rat(0), 1000);
    CHECK(r.success);
    CHECK(r.value.lo == Rat(0));
    CHECK(r.value.hi == Rat(0));
    CHECK(r.steps == 2);

    // stuck streams exhaust the budget and report honestly
    auto sl = seq_stream([](int) { return Rat(0); });
    auto su = seq_stream([](int) { return Rat(1); });
    r = ershov_sandwich(sl, su, rat_frac(1, 2), 100);
    CHECK_FALSE(r.success);
    CHECK(r.value.lo == Rat(0));
    CHECK(r.value.hi == Rat(1));
    CHECK(r.steps >= 100);
    CHECK(r.note.find("budget") != std::string::npos);

    // crossed bounds are an internal invariant violation
    auto bl = seq_stream([](int) { return Rat(1); });
    auto bu = seq_stream([](int) { return Rat(0); });
    CHECK_THROWS_AS(ershov_sandwich(bl, bu, rat_frac(1, 2), 100),
                    InternalError);
    CHECK_THROWS_AS(ershov_sandwich(bl, bu, rat_frac(1, 2), 0), InputError);
  }

  TEST_CASE("circle grids are exact nested covers") {
    for (int k = 0; k <= 5; ++k) {
      auto pts = circle_grid(k);
      CHECK(pts.size() == (1u << (k + 1)));
      std::set<std::pair<Rat, Rat>> uniq(pts.begin(), pts.end());
      CHECK(uniq.size() == pts.size());
      for (const auto& [c, s] : pts) CHECK(c * c + s * s == Rat(1));
      if (k > 0) {
        // nesting: every coarser point survives refinement
        for (const auto& p : circle_grid(k - 1)) CHECK(uniq.count(p) == 1);
      }
    }
    // the four gates 1, i, -1, -i appear at level 1
    auto l1 = circle_grid(1);
    std::set<std::pair<Rat, Rat>> s1(l1.begin(), l1.end());
    CHECK(s1.count({Rat(1), Rat(0)}) == 1);
    CHECK(s1.count({Rat(0), Rat(1)}) == 1);
    CHECK(s1.count({Rat(-1), Rat(0)}) == 1);
    CHECK(s1.count({Rat(0), Rat(-1)}) == 1);
    CHECK_THROWS_AS(circle_grid(-1), InputError);
  }

  TEST_CASE("parameter tuples build exact unitaries") {
    CHECK(unitary_param_count(1) == 1);
    CHECK(unitary_param_count(2) == 4);
    CHECK(unitary_param_count(3) == 9);

    // dim 1: the parameter is the eigenvalue itself
    FMat u = unitary_from_params(1, {{rat_frac(3, 5), rat_frac(-4, 5)}});
    CHECK(u[0][0] ==
          FieldScalar::from_gaussian(rat_frac(3, 5), rat_frac(-4, 5)));

    // dim 2 and 3 tuples from mixed grid points stay exactly unitary
    auto pts = circle_grid(2);
    std::vector<std::pair<Rat, Rat>> p2;
    for (int i = 0; i < 4; ++i) p2.push_back(pts[(3 * i + 1) % pts.size()]);
    CHECK_FALSE(fmat_unitary_defect(unitary_from_params(2, p2)).has_value());
    std::vector<std::pair<Rat, Rat>> p3;
    for (int i = 0; i < 9; ++i) p3.push_back(pts[(5 * i + 2) % pts.size()]);
    CHECK_FALSE(fmat_unitary_defect(unitary_from_params(3, p3)).has_value());

    // identity parameters give the identity
    std::vector<std::pair<Rat, Rat>> pid(4, {Rat(1), Rat(0)});
    CHECK(fmat_equal(unitary_from_params(2, pid), fmat_identity(2)));

    CHECK_THROWS_AS(unitary_from_params(2, p3), InputError);
    CHECK_THROWS_AS(
        unitary_from_params(1, {{rat_frac(1, 2), rat_frac(1, 2)}}),
        InputError);
  }

  TEST_CASE("full displacement reaches two at dimension one") {
    DegreeResult r = degree_ndim(displacement1(), 1, 1, rat_frac(1, 20));
    CHECK(r.success);
    CHECK(r.value.contains(Rat(2)));
    CHECK(r.value.width() <= rat_frac(1, 20));
    CHECK(r.lower_witness.find("level") != std::string::npos);
  }

  TEST_CASE("net convergence certifies an interior degree") {
    // sup over U(1) of (x/2)((2-x)/2) at x = |1 - lambda| is 1/4 at x = 1;
    // the upper bound must genuinely come down from the static range 1
    DegreeResult r = degree_ndim(peak_formula(), 1, 1, rat_frac(1, 10));
    CHECK(r.success);
    CHECK(r.value.contains(rat_frac(1, 4)));
    CHECK(r.value.width() <= rat_frac(1, 10));
    CHECK(r.value.hi < rat_frac(1, 2));
    CHECK(r.upper_witness.find("covering slack") != std::string::npos);
  }

  TEST_CASE("constant and model independent formulas converge at once") {
    DegreeResult r =
        degree_ndim(mk_rat(rat_frac(1, 2)), 2, 0, rat_frac(1, 100));
    CHECK(r.success);
    CHECK(r.value.lo == rat_frac(1, 2));
    CHECK(r.value.hi == rat_frac(1, 2));
    CHECK(r.steps == 0);  // static range alone settles it

    FormulaPtr f = parse_formula_text("sup v:B1. not[1](reip(v, v))");
    r = degree_ndim(f, 2, 0, rat_frac(1, 20));
    CHECK(r.success);
    CHECK(r.value.contains(Rat(1)));  // v = 0 attains in every model
  }

  TEST_CASE("dimension defect degrees are exact at small dimension") {
    FormulaPtr def1 = dimension_sentence(1);
    DegreeResult r1 = degree_ndim(def1, 1, 0, rat_frac(1, 8));
    CHECK(r1.success);
    CHECK(r1.value.lo == Rat(0));
    CHECK(r1.value.hi == Rat(0));
    // a unit vector y1 spans every 1-dim space, so the defect vanishes;
    // from dimension two on, a unit vector orthogonal to y1 pins the inner
    // sup at exactly 1 for every choice of y1
    for (int n : {2, 3}) {
      DegreeResult r = degree_ndim(def1, n, 0, rat_frac(1, 8));
      CHECK(r.success);
      CHECK(r.value.lo == Rat(1));
      CHECK(r.value.hi == Rat(1));
    }
  }

  TEST_CASE("class containment bounds explicit models") {
    // any concrete 1-dim model's value sits below the certified degree
    FormulaPtr peak = peak_formula();
    DegreeResult deg = degree_ndim(peak, 1, 1, rat_frac(1, 10));
    for (const auto& [c, s] : circle_grid(2)) {
      EvalResult ev = eval_certified(peak, phase_model(c, s), rat_frac(1, 50));
      CHECK(ev.value.lo - rat_frac(1, 10) <= deg.value.hi);
    }
  }

  TEST_CASE("lower streams improve monotonically") {
    auto streams =
        degree_streams(peak_formula(), 1, 1, rat_frac(1, 40), 1000000);
    std::optional<Rat> prev;
    int pulls = 0;
    while (auto p = streams.first.next()) {
      if (prev) CHECK(p->value >= *prev);
      prev = p->value;
      if (++pulls >= 8) break;
    }
    CHECK(pulls == 8);
    CHECK(*prev >= rat_frac(1, 4) - rat_frac(1, 20));

    // upper side never increases
    auto streams2 =
        degree_streams(peak_formula(), 1, 1, rat_frac(1, 40), 1000000);
    std::optional<Rat> uprev;
    pulls = 0;
    while (auto p = streams2.second.next()) {
      if (uprev) CHECK(p->value <= *uprev);
      uprev = p->value;
      if (++pulls >= 8) break;
    }
    CHECK(*uprev < Rat(1));
  }

  TEST_CASE("profiles are monotone and respect upper bounds") {
    FormulaPtr disp = displacement1();
    auto small = degree_fd_lower(disp, 2, rat_frac(1, 20), 3000);
    auto large = degree_fd_lower(disp, 2, rat_frac(1, 20), 60000);
    REQUIRE(small.size() == 2);
    REQUIRE(large.size() == 2);
    for (size_t i = 0; i < 2; ++i) {
      CHECK(small[i].lower <= large[i].lower);      // budget monotone
      if (i > 0) CHECK(large[i].lower >= large[i - 1].lower);
      // witnessing dimension consistency against the certified upper bound
      DegreeResult up = degree_ndim(disp, static_cast<int>(i) + 1, 1,
                                    rat_frac(1, 20));
      CHECK(large[i].lower <= up.value.hi);
    }
    CHECK(large[0].lower >= Rat(2) - rat_frac(1, 20));

    // constant profile stays flat
    auto flat = degree_fd_lower(mk_rat(rat_frac(1, 3)), 3, rat_frac(1, 20),
                                1000);
    for (const auto& e : flat) CHECK(e.lower == rat_frac(1, 3));

    // the dimension-1 defect jumps at dimension two, then stays put: an
    // orthogonal unit vector caps the inner sup at exactly 1 in every
    // dimension from two on, so the class profile plateaus there
    auto defect = degree_fd_lower(dimension_sentence(1), 3, rat_frac(1, 8),
                                  100000);
    REQUIRE(defect.size() == 3);
    CHECK(defect[0].lower == Rat(0));
    CHECK(defect[1].lower == Rat(1));
    CHECK(defect[2].lower == Rat(1));
  }

  TEST_CASE("word sugar resolves to degree operators") {
    // w[1,1] squares U1; sup_v d(U1^2 v, v) still reaches 2 (at U1 = i)
    FormulaPtr f = parse_formula_text("sup v:B1. d(w[1,1](v), v)");
    DegreeResult r = degree_ndim(f, 1, 1, rat_frac(1, 20));
    CHECK(r.success);
    CHECK(r.value.contains(Rat(2)));
  }

  TEST_CASE("gate and validation failures are loud") {
    FormulaPtr disp = displacement1();
    CHECK_THROWS_AS(degree_ndim(disp, 3, 1, rat_frac(1, 4)), BudgetError);
    CHECK_THROWS_AS(degree_ndim(disp, 2, 2, rat_frac(1, 4)), BudgetError);
    // operator beyond the declared count
    CHECK_THROWS_AS(degree_ndim(disp, 1, 0, rat_frac(1, 4)), InputError);
    // open formula
    FormulaPtr open =
        mk_d(t_var("v", Sort::ball(1)), t_zero(Sort::ball(1)));
    CHECK_THROWS_AS(degree_ndim(open, 1, 0, rat_frac(1, 4)), InputError);
    // constants have no backing in a degree model
    FormulaPtr con = mk_sup("v", Sort::ball(1),
                            mk_d(t_var("v", Sort::ball(1)), t_const("b1")));
    CHECK_THROWS_AS(degree_ndim(con, 1, 0, rat_frac(1, 4)), InputError);
    CHECK_THROWS_AS(degree_ndim(disp, 1, 1, Rat(0)), InputError);
    CHECK_THROWS_AS(degree_fd_lower(con, 2, rat_frac(1, 4), 100),
                    InputError);
  }

  TEST_CASE("budget exhaustion reports the best interval") {
    DegreeResult r =
        degree_ndim(peak_formula(), 1, 1, rat_frac(1, 1000), 60);
    CHECK_FALSE(r.success);
    CHECK_FALSE(r.note.empty());
    CHECK(r.value.lo <= r.value.hi);
    CHECK(r.value.hi <= Rat(1));  // static range still bounds it
    CHECK(r.steps >= 60);
  }
}
