#include <random>

#include "doctest.h"
#include "hsw/errors.hpp"
#include "hsw/icomplex.hpp"
#include "hsw/interval.hpp"

using namespace hsw;

namespace {

Rat rand_rat(std::mt19937_64& rng, int lo = -8, int hi = 8) {
  std::uniform_int_distribution<int> num(lo, hi);
  std::uniform_int_distribution<int> den(1, 6);
  return rat_frac(num(rng), den(rng));
}

Interval rand_interval(std::mt19937_64& rng) {
  Rat a = rand_rat(rng), b = rand_rat(rng);
  return a <= b ? Interval(a, b) : Interval(b, a);
}

Rat rand_point_in(std::mt19937_64& rng, const Interval& v) {
  std::uniform_int_distribution<int> t(0, 16);
  return v.lo + (v.hi - v.lo) * Rat(t(rng), 16);
}

}  // namespace

TEST_SUITE("interval") {
  TEST_CASE("arithmetic contains pointwise images") {
    std::mt19937_64 rng(20260816u);
    for (int k = 0; k < 2000; ++k) {
      Interval a = rand_interval(rng), b = rand_interval(rng);
      Rat x = rand_point_in(rng, a), y = rand_point_in(rng, b);
      CHECK((a + b).contains(x + y));
      CHECK((a - b).contains(x - y));
      CHECK((a * b).contains(x * y));
      CHECK(imin(a, b).contains(rat_min(x, y)));
      CHECK(imax(a, b).contains(rat_max(x, y)));
      CHECK(a.abs().contains(rat_abs(x)));
      CHECK(ihull(a, b).contains(x));
      CHECK(ihull(a, b).contains(y));
    }
  }

  TEST_CASE("sqrt enclosure brackets exact squares") {
    CHECK(rat_sqrt(Rat(4), 30).contains(Rat(2)));
    CHECK(rat_sqrt(Rat(1, 4), 30).contains(Rat(1, 2)));
    CHECK(rat_sqrt(Rat(0), 30).hi == 0);
    Interval r2 = rat_sqrt(Rat(2), 60);
    CHECK(r2.lo * r2.lo <= 2);
    CHECK(r2.hi * r2.hi >= 2);
    CHECK(r2.width() <= rat_pow2(-59));
  }

  TEST_CASE("sqrt enclosure respects requested extra width") {
    std::mt19937_64 rng(4u);
    for (int k = 0; k < 200; ++k) {
      Rat v = rat_abs(rand_rat(rng, 0, 9));
      Interval enc = isqrt_enclosure(Interval(v, v + Rat(1, 100)), Rat(1, 1000));
      CHECK(enc.lo * enc.lo <= v);
      Rat top = v + Rat(1, 100);
      CHECK(enc.hi * enc.hi >= top);
      // Width <= intrinsic image width + requested extra; the image width of
      // sqrt on [v, v+w] is at most sqrt(w).
      Interval wroot = rat_sqrt(Rat(1, 100), 30);
      CHECK(enc.width() <= wroot.hi + Rat(1, 1000));
    }
  }

  TEST_CASE("sqrt2 and pi constants") {
    const Interval& s2 = sqrt2_enclosure();
    CHECK(s2.lo * s2.lo <= 2);
    CHECK(s2.hi * s2.hi >= 2);
    CHECK(s2.width() <= rat_pow2(-95));
    const Interval& pi = pi_enclosure();
    CHECK(pi.lo < rat_from_string("3.14159265358979323846264338327951"));
    CHECK(pi.hi > rat_from_string("3.14159265358979323846264338327950"));
    CHECK(pi.width() < rat_from_string("1e-30"));
  }

  TEST_CASE("field real enclosures and exact sqrt bounds") {
    FieldReal v(Rat(2), Rat(-1));  // 2 - sqrt2 ~ 0.5857
    Interval enc = field_real_enclosure(v);
    CHECK(enc.lo < rat_from_string("0.585786437626905"));
    CHECK(enc.hi > rat_from_string("0.585786437626904"));
    Interval root = field_real_sqrt(v, 50);
    CHECK(root.lo * root.lo <= enc.hi);
    CHECK(root.hi * root.hi >= enc.lo);
    CHECK(root.width() <= rat_pow2(-45));
    CHECK_THROWS_AS(field_real_sqrt(FieldReal(Rat(-1), Rat(0)), 30),
                    InternalError);
  }

  TEST_CASE("atan2 hits reference angles") {
    const Interval& pi = pi_enclosure();
    // atan2(1, 1) = pi/4
    Interval a = rat_atan2(Rat(1), Rat(1), 60);
    Interval quarter = iscale(Rat(1, 4), pi);
    CHECK(a.intersects(quarter));
    CHECK(a.width() < rat_from_string("1e-15"));
    // atan2(1, 0) = pi/2
    Interval b = rat_atan2(Rat(1), Rat(0), 60);
    CHECK(b.intersects(iscale(Rat(1, 2), pi)));
    // atan2(0, -1) = pi
    Interval c = rat_atan2(Rat(0), Rat(-1), 60);
    CHECK(c.intersects(pi));
    // atan2(-1, 1) = -pi/4
    Interval d = rat_atan2(Rat(-1), Rat(1), 60);
    CHECK(d.intersects(-quarter));
    // atan(1/2) + atan(1/3) = pi/4 (Euler-style identity as an oracle)
    Interval e = rat_atan2(Rat(1), Rat(2), 60) + rat_atan2(Rat(1), Rat(3), 60);
    CHECK(e.intersects(quarter));
  }

  TEST_CASE("complex interval modulus") {
    IComplex z = field_to_icomplex(FieldScalar(Rat(0), Rat(0), Rat(1, 2), Rat(1, 2)));
    CHECK(z.abs2().contains(Rat(1)));
    IVec v{IComplex::point(Rat(3, 5), Rat(0)), IComplex::point(Rat(0), Rat(4, 5))};
    CHECK(ivec_norm2(v).contains(Rat(1)));
    IComplex ip = ivec_inner(v, v);
    CHECK(ip.re.contains(Rat(1)));
    CHECK(ip.im.contains(Rat(0)));
  }
}
