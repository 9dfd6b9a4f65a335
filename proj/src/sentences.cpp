#include "hsw/sentences.hpp"

#include "hsw/errors.hpp"

namespace hsw {

FormulaPtr abs_formula(FormulaPtr f) {
  return mk_absdiff(std::move(f), mk_rat(Rat(0)));
}

FormulaPtr sq_formula(FormulaPtr f) {
  FormulaPtr a = abs_formula(std::move(f));
  return mk_prod(a, a);  // immutable nodes share freely
}

FormulaPtr abs_ip_sq(TermPtr a, TermPtr b) {
  Rat cap = a->norm_bound * a->norm_bound * b->norm_bound * b->norm_bound;
  FormulaPtr re2 = sq_formula(mk_reip(a, b));
  FormulaPtr im2 = sq_formula(mk_imip(a, b));
  // |<a,b>|^2 <= ||a||^2 ||b||^2, so the cap never binds.
  return mk_truncadd(cap, std::move(re2), std::move(im2));
}

FormulaPtr dimension_sentence(int n) {
  if (n < 1) throw InputError("dimension sentence needs n >= 1");
  auto yvar = [](int i) {
    return t_var("y" + std::to_string(i), Sort::ball(1));
  };
  TermPtr x = t_var("x", Sort::ball(1));

  // max_i |<yi,yi> - 1|
  FormulaPtr norms;
  for (int i = 1; i <= n; ++i) {
    FormulaPtr ni = mk_absdiff(mk_reip(yvar(i), yvar(i)), mk_rat(Rat(1)));
    norms = norms ? mk_max(norms, ni) : ni;
  }

  // sum_i |<x,yi>|^2, capped non-bindingly at n
  FormulaPtr sum;
  for (int i = 1; i <= n; ++i) {
    FormulaPtr pi = abs_ip_sq(x, yvar(i));
    sum = sum ? mk_truncadd(Rat(n), sum, pi) : pi;
  }

  FormulaPtr parseval =
      mk_sup("x", Sort::ball(1), mk_absdiff(mk_reip(x, x), sum));
  FormulaPtr body = mk_max(norms, parseval);
  for (int i = n; i >= 1; --i)
    body = mk_inf("y" + std::to_string(i), Sort::ball(1), body);
  return body;
}

FormulaPtr displacement_formula(const std::string& op_name) {
  TermPtr v = t_var("v", Sort::ball(1));
  return mk_sup("v", Sort::ball(1), mk_d(t_apply(op_name, v), v));
}

}  // namespace hsw
