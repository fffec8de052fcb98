// Double-double arithmetic: an unevaluated sum of two doubles giving ~31
// significant digits.  Used where residues sigma(q) z + sigma(p) sink far
// below the double rounding floor and a plain evaluation would return noise.
// Only the operations the project needs; error-free transforms follow
// Dekker/Knuth, products use FMA.
#pragma once

#include <cmath>

namespace badflow {

struct dd {
  double hi = 0.0;
  double lo = 0.0;
  dd() = default;
  dd(double v) : hi(v), lo(0.0) {}
  dd(double h, double l) : hi(h), lo(l) {}
  double value() const { return hi + lo; }
};

inline dd two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

inline dd quick_two_sum(double a, double b) {  // requires |a| >= |b|
  double s = a + b;
  return {s, b - (s - a)};
}

inline dd two_prod(double a, double b) {
  double p = a * b;
  return {p, std::fma(a, b, -p)};
}

inline dd dd_add(dd a, dd b) {
  dd s = two_sum(a.hi, b.hi);
  double lo = s.lo + a.lo + b.lo;
  return quick_two_sum(s.hi, lo);
}

inline dd dd_add(dd a, double b) { return dd_add(a, dd(b)); }

inline dd dd_neg(dd a) { return {-a.hi, -a.lo}; }

inline dd dd_sub(dd a, dd b) { return dd_add(a, dd_neg(b)); }

inline dd dd_mul(dd a, dd b) {
  dd p = two_prod(a.hi, b.hi);
  double lo = p.lo + a.hi * b.lo + a.lo * b.hi;
  return quick_two_sum(p.hi, lo);
}

inline dd dd_mul(dd a, double b) {
  dd p = two_prod(a.hi, b);
  double lo = p.lo + a.lo * b;
  return quick_two_sum(p.hi, lo);
}

inline dd dd_div(dd a, dd b) {
  double q1 = a.hi / b.hi;
  dd r = dd_sub(a, dd_mul(b, q1));
  double q2 = r.hi / b.hi;
  r = dd_sub(r, dd_mul(b, q2));
  double q3 = r.hi / b.hi;
  return dd_add(quick_two_sum(q1, q2), q3);
}

inline dd dd_sqrt(dd a) {
  if (a.hi <= 0.0) return dd(a.hi < 0.0 ? 0.0 : 0.0);
  double s = std::sqrt(a.hi);
  // one Karp refinement: s + (a - s^2) / (2s)
  dd s2 = two_prod(s, s);
  dd diff = dd_sub(a, s2);
  return dd_add(dd(s), diff.hi / (2.0 * s));
}

inline bool dd_less(dd a, dd b) {
  return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo);
}

// complex double-double
struct ddcplx {
  dd re, im;
  ddcplx() = default;
  ddcplx(double r, double i) : re(r), im(i) {}
  ddcplx(dd r, dd i) : re(r), im(i) {}
};

inline ddcplx ddc_add(ddcplx a, ddcplx b) { return {dd_add(a.re, b.re), dd_add(a.im, b.im)}; }
inline ddcplx ddc_sub(ddcplx a, ddcplx b) { return {dd_sub(a.re, b.re), dd_sub(a.im, b.im)}; }

inline ddcplx ddc_mul(ddcplx a, ddcplx b) {
  return {dd_sub(dd_mul(a.re, b.re), dd_mul(a.im, b.im)),
          dd_add(dd_mul(a.re, b.im), dd_mul(a.im, b.re))};
}

inline ddcplx ddc_mul(ddcplx a, double s) { return {dd_mul(a.re, s), dd_mul(a.im, s)}; }

inline ddcplx ddc_conj(ddcplx a) { return {a.re, dd_neg(a.im)}; }

inline dd ddc_abs2(ddcplx a) { return dd_add(dd_mul(a.re, a.re), dd_mul(a.im, a.im)); }

inline ddcplx ddc_div(ddcplx a, ddcplx b) {
  dd d = ddc_abs2(b);
  ddcplx n = ddc_mul(a, ddc_conj(b));
  return {dd_div(n.re, d), dd_div(n.im, d)};
}

}  // namespace badflow
