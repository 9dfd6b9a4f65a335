#include <random>

#include "doctest.h"
#include "hsw/errors.hpp"
#include "hsw/field.hpp"

using namespace hsw;

namespace {

FieldScalar rand_scalar(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> num(-6, 6);
  std::uniform_int_distribution<int> den(1, 5);
  auto r = [&]() { return rat_frac(num(rng), den(rng)); };
  return FieldScalar(r(), r(), r(), r());
}

}  // namespace

TEST_SUITE("field") {
  TEST_CASE("rational parsing and printing") {
    CHECK(rat_to_string(rat_from_string("3/6")) == "1/2");
    CHECK(rat_to_string(rat_from_string("-4/2")) == "-2");
    CHECK(rat_to_string(rat_from_string("0.25")) == "1/4");
    CHECK(rat_to_string(rat_from_string("1e-3")) == "1/1000");
    CHECK(rat_to_string(rat_from_string("2.5e2")) == "250");
    CHECK(rat_to_string(rat_from_string(".5")) == "1/2");
    CHECK_THROWS_AS(rat_from_string("1/0"), InputError);
    CHECK_THROWS_AS(rat_from_string("abc"), InputError);
    CHECK_THROWS_AS(rat_from_string(""), InputError);
    CHECK_THROWS_AS(rat_from_string("1//2"), InputError);
  }

  TEST_CASE("decimal rendering truncates toward zero") {
    CHECK(rat_to_decimal(Rat(1, 3), 4) == "0.3333");
    CHECK(rat_to_decimal(Rat(-1, 3), 4) == "-0.3333");
    CHECK(rat_to_decimal(Rat(5, 2), 2) == "2.50");
  }

  TEST_CASE("sqrt2 units multiply to one") {
    // (1 + sqrt2)(-1 + sqrt2) = 1, the fundamental unit identity.
    FieldScalar u(Rat(1), Rat(0), Rat(1), Rat(0));
    FieldScalar v(Rat(-1), Rat(0), Rat(1), Rat(0));
    CHECK(u * v == FieldScalar::one());
  }

  TEST_CASE("half sqrt2 squares to half") {
    FieldScalar h(Rat(0), Rat(0), Rat(1, 2), Rat(0));
    CHECK(h * h == FieldScalar::from_rat(Rat(1, 2)));
  }

  TEST_CASE("conjugation and modulus") {
    CHECK(FieldScalar::i().conj() == -FieldScalar::i());
    FieldScalar w(Rat(0), Rat(0), Rat(1, 2), Rat(1, 2));  // e^{i pi/4}
    CHECK(w.abs2() == FieldReal(Rat(1), Rat(0)));
    FieldScalar w2 = w * w;
    CHECK(w2 == FieldScalar::i());
    // |1 - w|^2 = 2 - sqrt2 exactly.
    FieldReal gap = (FieldScalar::one() - w).abs2();
    CHECK(gap == FieldReal(Rat(2), Rat(-1)));
  }

  TEST_CASE("exact sign of x + y sqrt2") {
    CHECK(FieldReal(Rat(3), Rat(-2)).sign() == 1);    // 3 > 2 sqrt2
    CHECK(FieldReal(Rat(-3), Rat(2)).sign() == -1);
    CHECK(FieldReal(Rat(-14, 10), Rat(1)).sign() == 1);   // sqrt2 > 1.4
    CHECK(FieldReal(Rat(-15, 10), Rat(1)).sign() == -1);  // sqrt2 < 1.5
    CHECK(FieldReal(Rat(0), Rat(0)).sign() == 0);
    CHECK(FieldReal(Rat(0), Rat(-1)).sign() == -1);
  }

  TEST_CASE("field inverse and division") {
    std::mt19937_64 rng(20260816u);
    int nonzero = 0;
    while (nonzero < 200) {
      FieldScalar z = rand_scalar(rng);
      if (z.is_zero()) continue;
      ++nonzero;
      CHECK(z * z.inverse() == FieldScalar::one());
    }
    CHECK_THROWS_AS(FieldScalar::zero().inverse(), InternalError);
  }

  TEST_CASE("ring axioms on random samples") {
    std::mt19937_64 rng(7u);
    for (int k = 0; k < 100; ++k) {
      FieldScalar x = rand_scalar(rng), y = rand_scalar(rng), z = rand_scalar(rng);
      CHECK((x * y) * z == x * (y * z));
      CHECK(x * (y + z) == x * y + x * z);
      CHECK(x * y == y * x);
      CHECK((x * y).conj() == x.conj() * y.conj());
      // |xy|^2 = |x|^2 |y|^2 in the real subfield.
      CHECK((x * y).abs2() == x.abs2() * y.abs2());
    }
  }

  TEST_CASE("scalar text encoding round trip") {
    std::mt19937_64 rng(99u);
    for (int k = 0; k < 100; ++k) {
      FieldScalar z = rand_scalar(rng);
      CHECK(FieldScalar::decode(z.encode()) == z);
    }
    CHECK(FieldScalar::decode("1/2,0,-3,4/6").encode() == "1/2,0,-3,2/3");
    CHECK(FieldScalar::decode("5") == FieldScalar::from_rat(Rat(5)));
    CHECK_THROWS_AS(FieldScalar::decode("1,2,3"), InputError);
    CHECK_THROWS_AS(FieldScalar::decode("1,2,3,x"), InputError);
  }

  TEST_CASE("real subfield order and division") {
    FieldReal a(Rat(1, 2), Rat(1, 3));  // 1/2 + sqrt2/3 ~ 0.971
    FieldReal b(Rat(2), Rat(-1));       // 2 - sqrt2 ~ 0.586
    CHECK(b < a);
    CHECK((a / a) == FieldReal(Rat(1), Rat(0)));
    CHECK((a * b) / b == a);
    CHECK(FieldReal(Rat(0), Rat(1)) * FieldReal(Rat(0), Rat(1)) ==
          FieldReal(Rat(2), Rat(0)));
  }
}
