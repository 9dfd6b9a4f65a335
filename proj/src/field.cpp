#include "hsw/field.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <vector>

#include "hsw/errors.hpp"

namespace hsw {

std::string rat_to_string(const Rat& r) {
  Rat c = r;
  c.canonicalize();
  if (c.get_den() == 1) return c.get_num().get_str();
  return c.get_num().get_str() + "/" + c.get_den().get_str();
}

Rat rat_from_string(const std::string& s) {
  std::string t;
  for (char ch : s)
    if (!isspace(static_cast<unsigned char>(ch))) t.push_back(ch);
  if (t.empty()) throw InputError("empty rational literal");

  auto bad = [&]() -> InputError {
    return InputError("malformed rational literal '" + s + "'");
  };

  // Base-10 integer parsing (explicit base: the mpz string constructor
  // would otherwise treat a leading 0 as octal).
  auto parse_int = [&](const std::string& digits) {
    try {
      return Int(digits, 10);
    } catch (const std::invalid_argument&) {
      throw bad();
    }
  };

  // plain p or p/q
  if (t.find_first_of(".eE") == std::string::npos) {
    size_t slash = t.find('/');
    if (slash == std::string::npos) {
      return Rat(parse_int(t));
    }
    std::string num = t.substr(0, slash), den = t.substr(slash + 1);
    if (num.empty() || den.empty() || den.find('/') != std::string::npos)
      throw bad();
    Int deni = parse_int(den);
    if (deni == 0) throw InputError("zero denominator in '" + s + "'");
    Rat r{parse_int(num), deni};
    r.canonicalize();
    return r;
  }

  // decimal / scientific: sign? digits? ('.' digits?)? ([eE] sign? digits)?
  size_t pos = 0;
  bool neg = false;
  if (pos < t.size() && (t[pos] == '+' || t[pos] == '-')) {
    neg = t[pos] == '-';
    ++pos;
  }
  std::string ipart, fpart;
  while (pos < t.size() && isdigit(static_cast<unsigned char>(t[pos])))
    ipart.push_back(t[pos++]);
  if (pos < t.size() && t[pos] == '.') {
    ++pos;
    while (pos < t.size() && isdigit(static_cast<unsigned char>(t[pos])))
      fpart.push_back(t[pos++]);
  }
  if (ipart.empty() && fpart.empty()) throw bad();
  long expo = 0;
  if (pos < t.size() && (t[pos] == 'e' || t[pos] == 'E')) {
    ++pos;
    bool eneg = false;
    if (pos < t.size() && (t[pos] == '+' || t[pos] == '-')) {
      eneg = t[pos] == '-';
      ++pos;
    }
    if (pos == t.size()) throw bad();
    std::string edig;
    while (pos < t.size() && isdigit(static_cast<unsigned char>(t[pos])))
      edig.push_back(t[pos++]);
    if (edig.empty() || edig.size() > 6) throw bad();
    expo = std::strtol(edig.c_str(), nullptr, 10);
    if (eneg) expo = -expo;
  }
  if (pos != t.size()) throw bad();

  Int mant = parse_int((ipart.empty() ? std::string("0") : ipart) + fpart);
  long scale = expo - static_cast<long>(fpart.size());
  Rat r(mant);
  if (scale > 0) {
    Int p10;
    mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(scale));
    r *= Rat(p10);
  } else if (scale < 0) {
    Int p10;
    mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(-scale));
    r /= Rat(p10);
  }
  if (neg) r = -r;
  r.canonicalize();
  return r;
}

Rat rat_pow2(long k) {
  Int p;
  mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(k < 0 ? -k : k));
  if (k >= 0) return Rat(p);
  return Rat(Int(1), p);
}

Int int_isqrt(const Int& n) {
  if (n < 0) throw InternalError("int_isqrt of negative");
  Int r;
  mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
  return r;
}

std::string rat_to_decimal(const Rat& r, int digits) {
  Rat a = abs(r);
  Int p10;
  mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(digits));
  Int scaled = (a.get_num() * p10) / a.get_den();  // floor, a >= 0
  std::string ds = scaled.get_str();
  if (static_cast<int>(ds.size()) <= digits)
    ds = std::string(digits + 1 - ds.size(), '0') + ds;
  std::string out = ds.substr(0, ds.size() - digits) + "." +
                    ds.substr(ds.size() - digits);
  if (sgn(r) < 0) out = "-" + out;
  return out;
}

double rat_to_double(const Rat& r) { return r.get_d(); }

Rat rat_dyadic_round(double x, long k) {
  if (!std::isfinite(x)) throw InternalError("dyadic round of non-finite");
  Rat xr;
  mpq_set_d(xr.get_mpq_t(), x);  // doubles are dyadic, conversion is exact
  Rat scaled = xr * rat_pow2(k) + Rat(1, 2);
  Int n;
  mpz_fdiv_q(n.get_mpz_t(), scaled.get_num().get_mpz_t(),
             scaled.get_den().get_mpz_t());
  return Rat(n) * rat_pow2(-k);
}

int FieldReal::sign() const {
  int sx = sgn(x), sy = sgn(y);
  if (sy == 0) return sx;
  if (sx == 0) return sy;
  if (sx == sy) return sx;
  // Opposite signs: compare x^2 with 2 y^2; the larger magnitude wins.
  Rat x2 = x * x, y2 = 2 * y * y;
  if (x2 == y2) return 0;  // impossible for nonzero parts (sqrt2 irrational)
  return x2 > y2 ? sx : sy;
}

FieldReal FieldReal::inverse() const {
  Rat norm = x * x - 2 * y * y;
  if (norm == 0) {
    if (x == 0 && y == 0) throw InternalError("inverse of zero field real");
    throw InternalError("field real inverse: norm vanished");
  }
  return FieldReal(x / norm, -y / norm);
}

double FieldReal::to_double() const {
  return x.get_d() + y.get_d() * 1.4142135623730951;
}

std::string FieldReal::to_string() const {
  return FieldScalar::from_real(*this).encode();
}

FieldScalar FieldScalar::operator*(const FieldScalar& o) const {
  // (p + q sqrt2)(p' + q' sqrt2) with p, q, p', q' in Q(i).
  // p = a + bi, q = c + di.
  Rat ra = a * o.a - b * o.b + 2 * (c * o.c - d * o.d);
  Rat rb = a * o.b + b * o.a + 2 * (c * o.d + d * o.c);
  Rat rc = a * o.c - b * o.d + c * o.a - d * o.b;
  Rat rd = a * o.d + b * o.c + c * o.b + d * o.a;
  return FieldScalar(ra, rb, rc, rd);
}

FieldScalar FieldScalar::inverse() const {
  if (is_zero()) throw InternalError("inverse of zero field scalar");
  // z = p + q sqrt2, p,q in Q(i). Multiply by (p - q sqrt2):
  // z (p - q sqrt2) = p^2 - 2 q^2 =: w in Q(i), nonzero because sqrt2 is
  // irrational over Q(i). Then z^-1 = (p - q sqrt2) conj(w) / |w|^2.
  // p = a+bi, q = c+di.
  Rat wr = a * a - b * b - 2 * (c * c - d * d);
  Rat wi = 2 * a * b - 4 * c * d;
  Rat w2 = wr * wr + wi * wi;
  if (w2 == 0) throw InternalError("field inverse: norm vanished");
  // (p - q sqrt2) * (wr - wi i) expanded over the basis {1, i, sqrt2, i sqrt2}.
  Rat ra = (a * wr + b * wi) / w2;
  Rat rb = (b * wr - a * wi) / w2;
  Rat rc = (-c * wr - d * wi) / w2;
  Rat rd = (-d * wr + c * wi) / w2;
  return FieldScalar(ra, rb, rc, rd);
}

FieldReal FieldScalar::abs2() const {
  // |z|^2 = (a^2 + b^2 + 2c^2 + 2d^2) + 2(ac + bd) sqrt2.
  return FieldReal(a * a + b * b + 2 * (c * c + d * d), 2 * (a * c + b * d));
}

std::string FieldScalar::encode() const {
  return rat_to_string(a) + "," + rat_to_string(b) + "," + rat_to_string(c) +
         "," + rat_to_string(d);
}

FieldScalar FieldScalar::decode(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  if (parts.size() == 1) {
    // Bare rational is accepted as a scalar with no i or sqrt2 part.
    return FieldScalar::from_rat(rat_from_string(parts[0]));
  }
  if (parts.size() != 4)
    throw InputError("field scalar '" + s +
                     "' must have 4 comma-separated rationals");
  return FieldScalar(rat_from_string(parts[0]), rat_from_string(parts[1]),
                     rat_from_string(parts[2]), rat_from_string(parts[3]));
}

double FieldScalar::re_double() const {
  return a.get_d() + c.get_d() * 1.4142135623730951;
}

double FieldScalar::im_double() const {
  return b.get_d() + d.get_d() * 1.4142135623730951;
}

}  // namespace hsw
