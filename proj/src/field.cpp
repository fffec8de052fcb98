#include "badflow/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "json.hpp"

namespace badflow {

using json = nlohmann::json;
using i64 = std::int64_t;
using i128 = __int128;

// ---------------------------------------------------------------------------
// checked integer helpers

static i64 narrow_checked(i128 v, const char* what) {
  if (v > i128(std::numeric_limits<i64>::max()) || v < i128(std::numeric_limits<i64>::min()))
    throw OverflowError(std::string("int64 overflow in ") + what);
  return i64(v);
}

static i128 mul_checked(i128 a, i128 b, const char* what) {
  i128 r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError(std::string("int128 overflow in ") + what);
  return r;
}

// Fraction-free (Bareiss) determinant of an n x n integer matrix.
static i128 bareiss_det(std::vector<std::vector<i128>> m, const char* what) {
  const int n = int(m.size());
  if (n == 0) return 1;
  i128 prev = 1;
  int sign = 1;
  for (int k = 0; k + 1 < n; ++k) {
    if (m[k][k] == 0) {
      int piv = -1;
      for (int i = k + 1; i < n; ++i)
        if (m[i][k] != 0) { piv = i; break; }
      if (piv < 0) return 0;
      std::swap(m[k], m[piv]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j) {
        i128 t = mul_checked(m[i][j], m[k][k], what);
        i128 u = mul_checked(m[i][k], m[k][j], what);
        m[i][j] = (t - u) / prev;
      }
      m[i][k] = 0;
    }
    prev = m[k][k];
  }
  return sign > 0 ? m[n - 1][n - 1] : -m[n - 1][n - 1];
}

// ---------------------------------------------------------------------------
// FieldSpec

FieldSpec FieldSpec::quadratic(std::int64_t D) {
  FieldSpec s;
  s.kind = Kind::Quadratic;
  s.D = D;
  return s;
}

FieldSpec FieldSpec::poly(std::vector<std::int64_t> coeffs, bool trusted) {
  FieldSpec s;
  s.kind = Kind::Poly;
  s.coeffs = std::move(coeffs);
  s.trusted = trusted;
  return s;
}

std::string FieldSpec::to_json() const {
  json j;
  if (kind == Kind::Quadratic) {
    j["kind"] = "quadratic";
    j["D"] = D;
  } else {
    j["kind"] = "poly";
    j["coeffs"] = coeffs;
    if (trusted) j["trusted"] = true;
  }
  if (precision != 60) j["precision"] = precision;
  return j.dump();
}

FieldSpec FieldSpec::from_json(const std::string& text) {
  json j = json::parse(text);
  FieldSpec s;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "quadratic") {
    s.kind = Kind::Quadratic;
    s.D = j.at("D").get<i64>();
  } else if (kind == "poly") {
    s.kind = Kind::Poly;
    s.coeffs = j.at("coeffs").get<std::vector<i64>>();
    s.trusted = j.value("trusted", false);
  } else {
    throw FieldError("field spec: unknown kind '" + kind + "'");
  }
  s.precision = j.value("precision", 60);
  return s;
}

// ---------------------------------------------------------------------------
// small polynomial utilities over the integers / doubles

namespace {

bool is_squarefree_int(i64 D) {
  for (i64 p = 2; p * p <= D; ++p)
    if (D % (p * p) == 0) return false;
  return true;
}

// f mod p as coefficient vector (monic degree kept).
std::vector<i64> poly_mod_p(const std::vector<i64>& f, i64 p) {
  std::vector<i64> g(f.size());
  for (size_t i = 0; i < f.size(); ++i) g[i] = ((f[i] % p) + p) % p;
  return g;
}

// Remainder of monic-divisor division over F_p; g monic.
std::vector<i64> poly_rem_mod_p(std::vector<i64> f, const std::vector<i64>& g, i64 p) {
  int dg = int(g.size()) - 1;
  while (int(f.size()) - 1 >= dg) {
    int df = int(f.size()) - 1;
    i64 c = f[df] % p;
    if (c != 0) {
      for (int i = 0; i <= dg; ++i) {
        f[df - dg + i] = ((f[df - dg + i] - c * g[i]) % p + p) % p;
      }
    }
    f.pop_back();
    while (f.size() > 1 && f.back() % p == 0 && int(f.size()) - 1 >= dg) {
      // handled by loop condition; keep trailing zeros trimmed below
      break;
    }
  }
  while (f.size() > 1 && f.back() == 0) f.pop_back();
  return f;
}

bool divides_mod_p(const std::vector<i64>& f, const std::vector<i64>& g, i64 p) {
  auto r = poly_rem_mod_p(f, g, p);
  for (auto c : r)
    if (c % p != 0) return false;
  return true;
}

// Brute-force irreducibility of monic f over F_p (degree <= ~8).
bool irreducible_mod_p(const std::vector<i64>& f0, i64 p) {
  auto f = poly_mod_p(f0, p);
  int n = int(f.size()) - 1;
  for (int d = 1; d <= n / 2; ++d) {
    // all monic degree-d candidates
    std::vector<i64> g(d + 1, 0);
    g[d] = 1;
    long long total = 1;
    for (int i = 0; i < d; ++i) total *= p;
    for (long long code = 0; code < total; ++code) {
      long long c = code;
      for (int i = 0; i < d; ++i) { g[i] = c % p; c /= p; }
      if (divides_mod_p(f, g, p)) return false;
    }
  }
  return true;
}

// Durand-Kerner roots of a monic polynomial with integer coefficients.
std::vector<std::complex<long double>> durand_kerner(const std::vector<i64>& f) {
  const int n = int(f.size()) - 1;
  using C = std::complex<long double>;
  auto eval = [&](C x) {
    C acc(1, 0);
    for (int i = n - 1; i >= 0; --i) acc = acc * x + C((long double)f[i], 0);
    return acc;
  };
  long double bound = 1;
  for (int i = 0; i < n; ++i) bound = std::max(bound, (long double)std::abs((double)f[i]));
  bound += 1;
  std::vector<C> w(n);
  for (int i = 0; i < n; ++i) {
    long double ang = 0.4L + 2.0L * 3.14159265358979323846L * i / n;
    w[i] = std::polar((long double)(0.5L + 0.7L * bound), ang);
  }
  for (int iter = 0; iter < 800; ++iter) {
    long double worst = 0;
    for (int i = 0; i < n; ++i) {
      C num = eval(w[i]);
      C den = 1;
      for (int j = 0; j < n; ++j)
        if (j != i) den *= (w[i] - w[j]);
      C delta = num / den;
      w[i] -= delta;
      worst = std::max(worst, std::abs(delta));
    }
    if (worst < 1e-19L * bound) break;
  }
  // Newton polish (value/derivative via a Horner pair)
  for (int i = 0; i < n; ++i) {
    for (int it = 0; it < 4; ++it) {
      C v = 1, d = 0;
      for (int k = n - 1; k >= 0; --k) {
        d = d * w[i] + v;
        v = v * w[i] + C((long double)f[k], 0);
      }
      if (std::abs(d) == 0) break;
      w[i] -= v / d;
    }
  }
  return w;
}

// two dd-Newton steps to push a root to double-double accuracy
ddcplx polish_root_dd(const std::vector<i64>& f, std::complex<long double> r0) {
  const int n = int(f.size()) - 1;
  ddcplx x{(double)r0.real(), (double)r0.imag()};
  // fold the long-double tail into the dd value
  x.re = dd_add(x.re, dd{(double)(r0.real() - (long double)x.re.hi)});
  x.im = dd_add(x.im, dd{(double)(r0.imag() - (long double)x.im.hi)});
  for (int it = 0; it < 3; ++it) {
    ddcplx v{1.0, 0.0}, d{0.0, 0.0};
    for (int k = n - 1; k >= 0; --k) {
      d = ddc_add(ddc_mul(d, x), v);
      v = ddc_add(ddc_mul(v, x), ddcplx{(double)f[k], 0.0});
    }
    dd dn = ddc_abs2(d);
    if (dn.hi == 0.0) break;
    x = ddc_sub(x, ddc_div(v, d));
  }
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// make_field

static void finish_field(NumberField& K);

NumberField make_field(const FieldSpec& spec) {
  NumberField K;
  K.spec = spec;

  if (spec.kind == FieldSpec::Kind::Quadratic) {
    if (spec.D < 1) throw NotAField("quadratic spec needs D >= 1");
    if (!is_squarefree_int(spec.D)) throw NotAField("D must be square-free");
    K.n = 2;
    const i64 D = spec.D;
    const bool three_mod_four = (D % 4 == 3);

    // omega = (1+sqrt(-D))/2 when D=3 mod 4, else sqrt(-D)
    dd sd = dd_sqrt(dd{(double)D});
    ddcplx omega = three_mod_four ? ddcplx{dd{0.5}, dd_mul(sd, 0.5)} : ddcplx{dd{0.0}, sd};
    K.emb_dd = {{ddcplx{1.0, 0.0}, omega},
                {ddcplx{1.0, 0.0}, ddcplx{omega.re, dd{-omega.im.hi, -omega.im.lo}}}};
    K.conj_perm = {1, 0};
    K.discriminant = three_mod_four ? -D : -4 * D;

    // multiplication table
    K.mult.assign(2, std::vector<std::vector<i64>>(2, std::vector<i64>(2, 0)));
    K.mult[0][0] = {1, 0};
    K.mult[0][1] = {0, 1};
    K.mult[1][0] = {0, 1};
    if (three_mod_four)
      K.mult[1][1] = {-(D + 1) / 4, 1};  // omega^2 = omega - (D+1)/4
    else
      K.mult[1][1] = {-D, 0};            // omega^2 = -D

    K.conj_basis = std::vector<AlgebraicInt>{
        AlgebraicInt({1, 0}),
        three_mod_four ? AlgebraicInt({1, -1}) : AlgebraicInt({0, -1})};

    static const i64 stark[] = {1, 2, 3, 7, 11, 19, 43, 67, 163};
    K.class_number_one = std::find(std::begin(stark), std::end(stark), D) != std::end(stark);
  } else {
    const auto& f = spec.coeffs;
    if (f.size() < 3) throw NotAField("poly spec needs degree >= 2");
    if (f.back() != 1) throw NotAField("poly must be monic (leading coefficient 1)");
    const int n = int(f.size()) - 1;
    if (n % 2 != 0) throw NotTotallyImaginary("odd degree forces a real root");
    K.n = n;

    // cheap reducibility screens: rational roots (integers dividing the constant
    // term, since f is monic), then mod-p certificates
    if (f[0] == 0) throw NotAField("polynomial has root 0");
    {
      i64 a0 = std::abs(f[0]);
      auto try_root = [&](i64 t) {
        i128 v = 1;
        bool ovf = false;
        for (int k = n - 1; k >= 0; --k) {
          if (__builtin_mul_overflow(v, i128(t), &v)) { ovf = true; break; }
          v += f[k];
        }
        if (!ovf && v == 0) throw NotAField("polynomial has an integer root");
      };
      for (i64 d = 1; d * d <= a0; ++d) {
        if (a0 % d != 0) continue;
        for (i64 t : {d, -d, a0 / d, -(a0 / d)}) try_root(t);
      }
    }
    bool certified = false;
    for (i64 p : {2, 3, 5, 7, 11, 13}) {
      double work = std::pow((double)p, n / 2.0 + 1);
      if (work > 5e6) break;
      if (irreducible_mod_p(f, p)) { certified = true; break; }
    }
    if (!certified && !spec.trusted)
      throw NotAField("irreducibility not certified by any small prime; set trusted to accept");

    auto roots = durand_kerner(f);
    // reject real roots
    for (auto& r : roots) {
      if (std::abs((double)r.imag()) < 1e-9 * (1.0 + std::abs((double)r.real())))
        throw NotTotallyImaginary("polynomial has a (numerically) real root");
    }
    // pair conjugates; order pairs by (Re asc, Im asc) of the upper root
    std::vector<int> used(roots.size(), 0);
    std::vector<std::pair<std::complex<long double>, std::complex<long double>>> pairs;
    for (size_t i = 0; i < roots.size(); ++i) {
      if (used[i] || roots[i].imag() < 0) continue;
      long double best = 1e30L;
      int bj = -1;
      for (size_t j = 0; j < roots.size(); ++j) {
        if (used[j] || j == i || roots[j].imag() > 0) continue;
        long double d = std::abs(roots[j] - std::conj(roots[i]));
        if (d < best) { best = d; bj = int(j); }
      }
      if (bj < 0 || best > 1e-6L) throw NotAField("could not pair conjugate roots");
      used[i] = used[bj] = 1;
      pairs.emplace_back(roots[i], roots[bj]);
    }
    if (int(pairs.size()) * 2 != n) throw NotAField("conjugate pairing failed");
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
      if (a.first.real() != b.first.real()) return a.first.real() < b.first.real();
      return a.first.imag() < b.first.imag();
    });

    std::vector<ddcplx> ordered;
    for (auto& pr : pairs) {
      ordered.push_back(polish_root_dd(f, pr.first));
      ordered.push_back(polish_root_dd(f, pr.second));
    }
    K.conj_perm.resize(n);
    for (int j = 0; j < n; j += 2) { K.conj_perm[j] = j + 1; K.conj_perm[j + 1] = j; }

    // power basis embeddings in dd
    K.emb_dd.assign(n, std::vector<ddcplx>(n));
    for (int j = 0; j < n; ++j) {
      ddcplx pw{1.0, 0.0};
      for (int k = 0; k < n; ++k) {
        K.emb_dd[j][k] = pw;
        pw = ddc_mul(pw, ordered[j]);
      }
    }

    // multiplication table via x^m mod f
    std::vector<std::vector<i64>> rep(2 * n - 1, std::vector<i64>(n, 0));
    for (int m = 0; m < n; ++m) rep[m][m] = 1;
    for (int m = n; m <= 2 * n - 2; ++m) {
      // x * rep[m-1], then reduce the x^n term
      std::vector<i128> t(n + 1, 0);
      for (int k = 0; k < n; ++k) t[k + 1] = rep[m - 1][k];
      i128 top = t[n];
      for (int k = 0; k < n; ++k) t[k] -= mul_checked(top, f[k], "power reduction");
      for (int k = 0; k < n; ++k) rep[m][k] = narrow_checked(t[k], "power reduction");
    }
    K.mult.assign(n, std::vector<std::vector<i64>>(n, std::vector<i64>(n, 0)));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) K.mult[i][j] = rep[i + j];

    // discriminant of the order via the trace form; traces from companion powers
    std::vector<std::vector<i128>> comp(n, std::vector<i128>(n, 0));
    for (int i = 0; i + 1 < n; ++i) comp[i + 1][i] = 1;
    for (int i = 0; i < n; ++i) comp[i][n - 1] = -f[i];
    std::vector<i128> traces(2 * n - 1, 0);
    std::vector<std::vector<i128>> pw(n, std::vector<i128>(n, 0));
    for (int i = 0; i < n; ++i) pw[i][i] = 1;
    for (int m = 0; m <= 2 * n - 2; ++m) {
      i128 tr = 0;
      for (int i = 0; i < n; ++i) tr += pw[i][i];
      traces[m] = tr;
      if (m == 2 * n - 2) break;
      std::vector<std::vector<i128>> nx(n, std::vector<i128>(n, 0));
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
          if (pw[i][k] == 0) continue;
          for (int j = 0; j < n; ++j)
            if (comp[k][j] != 0) nx[i][j] += mul_checked(pw[i][k], comp[k][j], "trace power");
        }
      pw = std::move(nx);
    }
    std::vector<std::vector<i128>> tf(n, std::vector<i128>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) tf[i][j] = traces[i + j];
    i128 disc = bareiss_det(tf, "discriminant");
    if (disc == 0) throw NotAField("repeated roots: discriminant vanishes");
    K.discriminant = narrow_checked(disc, "discriminant");
    K.class_number_one = false;
  }

  finish_field(K);
  return K;
}

// Shared post-construction: double copies, inverse, conjugation solve check,
// least-squares data.
static void finish_field(NumberField& K) {
  const int n = K.n;
  K.emb.assign(n, std::vector<cplx>(n));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      K.emb[j][k] = cplx(K.emb_dd[j][k].re.value(), K.emb_dd[j][k].im.value());

  // complex Gaussian inverse of emb
  {
    std::vector<std::vector<cplx>> a(n, std::vector<cplx>(2 * n, cplx(0, 0)));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a[i][j] = K.emb[i][j];
      a[i][n + i] = 1.0;
    }
    for (int c = 0; c < n; ++c) {
      int piv = c;
      for (int r = c + 1; r < n; ++r)
        if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
      if (std::abs(a[piv][c]) < 1e-14) throw NotAField("embedding matrix is singular");
      std::swap(a[c], a[piv]);
      cplx d = a[c][c];
      for (int j = 0; j < 2 * n; ++j) a[c][j] /= d;
      for (int r = 0; r < n; ++r) {
        if (r == c) continue;
        cplx m = a[r][c];
        for (int j = 0; j < 2 * n; ++j) a[r][j] -= m * a[c][j];
      }
    }
    K.emb_inv.assign(n, std::vector<cplx>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) K.emb_inv[i][j] = a[i][n + j];
  }

  // conjugation as a basis-level involution, when the order allows it:
  // the conjugate element's embedding vector is the conj_perm shuffle.
  if (!K.conj_basis) {
    std::vector<AlgebraicInt> cb;
    bool ok = true;
    for (int k = 0; k < n && ok; ++k) {
      std::vector<cplx> target(n);
      for (int j = 0; j < n; ++j) target[j] = K.emb[K.conj_perm[j]][k];
      std::vector<cplx> x(n, cplx(0, 0));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) x[i] += K.emb_inv[i][j] * target[j];
      std::vector<i64> c(n);
      for (int i = 0; i < n; ++i) {
        double re = x[i].real();
        double rd = std::round(re);
        if (std::abs(x[i].imag()) > 1e-8 || std::abs(re - rd) > 1e-8) { ok = false; break; }
        c[i] = (i64)rd;
      }
      if (ok) cb.push_back(AlgebraicInt(std::move(c)));
    }
    if (ok) K.conj_basis = std::move(cb);
  }

  // least-squares data for best_p: A is the realified 2n x n system
  K.lsq_at.assign(n, std::vector<double>(2 * n));
  for (int m = 0; m < n; ++m)
    for (int j = 0; j < n; ++j) {
      K.lsq_at[m][2 * j] = K.emb[j][m].real();
      K.lsq_at[m][2 * j + 1] = K.emb[j][m].imag();
    }
  std::vector<std::vector<double>> ata(n, std::vector<double>(n, 0.0));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int j = 0; j < 2 * n; ++j) ata[a][b] += K.lsq_at[a][j] * K.lsq_at[b][j];
  // Cholesky
  std::vector<std::vector<double>> L(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = ata[i][j];
      for (int k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
      if (i == j) {
        if (s <= 0) throw NotAField("degenerate embedding (Gram not positive)");
        L[i][i] = std::sqrt(s);
      } else {
        L[i][j] = s / L[j][j];
      }
    }
  }
  K.lsq_ata_chol = std::move(L);
  K.effective_digits = std::min(K.spec.precision, 31);
  if (K.spec.precision > 31) {
    static bool warned = false;
    if (!warned) {
      std::fprintf(stderr,
                   "badflow: requested %d embedding digits; evaluation delivers ~31 "
                   "(double-double); tolerances are explicit everywhere\n",
                   K.spec.precision);
      warned = true;
    }
  }
}

AlgebraicInt NumberField::from_coords(std::vector<i64> c) const {
  if (int(c.size()) != n) throw FieldError("coordinate vector has wrong length");
  return AlgebraicInt(std::move(c));
}

// ---------------------------------------------------------------------------
// ring operations

static void check_len(const NumberField& K, const AlgebraicInt& a) {
  if (int(a.coords.size()) != K.n) throw FieldError("element does not belong to this field");
}

AlgebraicInt add(const NumberField& K, const AlgebraicInt& a, const AlgebraicInt& b) {
  check_len(K, a); check_len(K, b);
  std::vector<i64> c(K.n);
  for (int i = 0; i < K.n; ++i) c[i] = narrow_checked(i128(a.coords[i]) + b.coords[i], "add");
  return AlgebraicInt(std::move(c));
}

AlgebraicInt sub(const NumberField& K, const AlgebraicInt& a, const AlgebraicInt& b) {
  check_len(K, a); check_len(K, b);
  std::vector<i64> c(K.n);
  for (int i = 0; i < K.n; ++i) c[i] = narrow_checked(i128(a.coords[i]) - b.coords[i], "sub");
  return AlgebraicInt(std::move(c));
}

AlgebraicInt neg(const NumberField& K, const AlgebraicInt& a) {
  check_len(K, a);
  std::vector<i64> c(K.n);
  for (int i = 0; i < K.n; ++i) c[i] = narrow_checked(-i128(a.coords[i]), "neg");
  return AlgebraicInt(std::move(c));
}

AlgebraicInt mul(const NumberField& K, const AlgebraicInt& a, const AlgebraicInt& b) {
  check_len(K, a); check_len(K, b);
  std::vector<i128> acc(K.n, 0);
  for (int i = 0; i < K.n; ++i) {
    if (a.coords[i] == 0) continue;
    for (int j = 0; j < K.n; ++j) {
      if (b.coords[j] == 0) continue;
      i128 ab = mul_checked(a.coords[i], b.coords[j], "mul");
      for (int k = 0; k < K.n; ++k) {
        i64 c = K.mult[i][j][k];
        if (c != 0) acc[k] += mul_checked(ab, c, "mul");
      }
    }
  }
  std::vector<i64> out(K.n);
  for (int k = 0; k < K.n; ++k) out[k] = narrow_checked(acc[k], "mul");
  return AlgebraicInt(std::move(out));
}

AlgebraicInt mul_int(const NumberField& K, const AlgebraicInt& a, i64 s) {
  check_len(K, a);
  std::vector<i64> c(K.n);
  for (int i = 0; i < K.n; ++i) c[i] = narrow_checked(mul_checked(a.coords[i], s, "mul_int"), "mul_int");
  return AlgebraicInt(std::move(c));
}

AlgebraicInt conj_element(const NumberField& K, const AlgebraicInt& a) {
  check_len(K, a);
  if (!K.conj_basis)
    throw Unsupported("conjugation does not stabilise this order");
  std::vector<i128> acc(K.n, 0);
  for (int k = 0; k < K.n; ++k) {
    if (a.coords[k] == 0) continue;
    for (int i = 0; i < K.n; ++i)
      acc[i] += mul_checked(a.coords[k], (*K.conj_basis)[k].coords[i], "conj");
  }
  std::vector<i64> out(K.n);
  for (int i = 0; i < K.n; ++i) out[i] = narrow_checked(acc[i], "conj");
  return AlgebraicInt(std::move(out));
}

// ---------------------------------------------------------------------------
// embeddings and norms

std::vector<cplx> embed(const NumberField& K, const AlgebraicInt& q) {
  check_len(K, q);
  std::vector<cplx> v(K.n, cplx(0, 0));
  for (int j = 0; j < K.n; ++j)
    for (int k = 0; k < K.n; ++k)
      if (q.coords[k] != 0) v[j] += double(q.coords[k]) * K.emb[j][k];
  return v;
}

std::vector<ddcplx> embed_dd(const NumberField& K, const AlgebraicInt& q) {
  check_len(K, q);
  std::vector<ddcplx> v(K.n, ddcplx{0.0, 0.0});
  for (int j = 0; j < K.n; ++j)
    for (int k = 0; k < K.n; ++k)
      if (q.coords[k] != 0)
        v[j] = ddc_add(v[j], ddc_mul(K.emb_dd[j][k], double(q.coords[k])));
  return v;
}

cplx embed1(const NumberField& K, const AlgebraicInt& q) {
  check_len(K, q);
  cplx v(0, 0);
  for (int k = 0; k < K.n; ++k)
    if (q.coords[k] != 0) v += double(q.coords[k]) * K.emb[0][k];
  return v;
}

std::int64_t field_norm(const NumberField& K, const AlgebraicInt& q) {
  check_len(K, q);
  // multiplication-by-q matrix rows: coords of q * b_i
  std::vector<std::vector<i128>> m(K.n, std::vector<i128>(K.n, 0));
  for (int i = 0; i < K.n; ++i)
    for (int j = 0; j < K.n; ++j) {
      if (q.coords[j] == 0) continue;
      for (int k = 0; k < K.n; ++k) {
        i64 c = K.mult[j][i][k];
        if (c != 0) m[i][k] += mul_checked(q.coords[j], c, "norm");
      }
    }
  return narrow_checked(bareiss_det(std::move(m), "norm"), "norm");
}

// ---------------------------------------------------------------------------
// weights

WeightVector WeightVector::make(std::vector<double> r) {
  WeightVector w;
  double sum = 0.0;
  for (double x : r) {
    if (x < 0.0) throw FieldError("weights must be nonnegative");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw FieldError("weights must sum to 1");
  w.r = std::move(r);
  for (int i = 0; i < int(w.r.size()); ++i) {
    if (w.r[i] > 0.0) w.sigma_plus.push_back(i);
    else w.sigma_zero.push_back(i);
  }
  if (w.sigma_plus.empty()) throw FieldError("weights cannot be all zero");
  w.omega = 0;
  for (int i = 1; i < int(w.r.size()); ++i)
    if (w.r[i] > w.r[w.omega]) w.omega = i;
  w.r_max = w.r[w.omega];
  return w;
}

WeightVector WeightVector::balanced(int n) {
  return make(std::vector<double>(n, 1.0 / double(n)));
}

bool WeightVector::is_balanced(double tol) const {
  for (double x : r)
    if (std::abs(x - 1.0 / double(r.size())) > tol) return false;
  return true;
}

std::optional<std::string> weight_vacuity_note(const NumberField& K, const WeightVector& r) {
  if (int(r.r.size()) != K.n) throw FieldError("weight vector has wrong length");
  for (int s : r.sigma_zero) {
    int partner = K.conj_perm[s];
    if (r.r[partner] > 0.0) {
      return "embedding " + std::to_string(s + 1) + " has weight 0 while its conjugate " +
             std::to_string(partner + 1) +
             " is weighted: conjugate embeddings share moduli, so no nonzero element has "
             "|sigma(q)| <= eps there for eps < 1 (the admissible set is empty)";
    }
  }
  return std::nullopt;
}

double log_weighted_norm(const NumberField& K, const WeightVector& r, const AlgebraicInt& q) {
  if (q.is_zero()) throw ZeroElement("r-norm of 0 is undefined");
  auto v = embed(K, q);
  double best = -std::numeric_limits<double>::infinity();
  for (int s : r.sigma_plus) best = std::max(best, std::log(std::abs(v[s])) / r.r[s]);
  return best;
}

double weighted_norm(const NumberField& K, const WeightVector& r, const AlgebraicInt& q) {
  return std::exp(log_weighted_norm(K, r, q));
}

double height(const NumberField& K, const WeightVector& r, const AlgebraicInt& q) {
  if (q.is_zero()) throw ZeroElement("height of 0 is undefined");
  auto v = embed(K, q);
  double ln = log_weighted_norm(K, r, q);
  double best = -std::numeric_limits<double>::infinity();
  for (int s : r.sigma_plus)
    best = std::max(best, std::log(std::abs(v[s])) + r.r[s] * ln);
  return std::exp(best);
}

bool in_OK_r_eps(const NumberField& K, const WeightVector& r, double eps, const AlgebraicInt& q) {
  if (q.is_zero()) throw ZeroElement("in_OK_r_eps needs q != 0");
  auto v = embed(K, q);
  for (int s : r.sigma_zero)
    if (std::abs(v[s]) > eps) return false;
  return true;
}

// ---------------------------------------------------------------------------
// bounded enumeration

std::vector<AlgebraicInt> enumerate_bounded(const NumberField& K, double M, Exec mode) {
  std::vector<AlgebraicInt> out;
  if (M < 1.0) {
    // |N(q)| >= 1 forces max |sigma(q)| >= 1, so the range is provably empty.
    std::fprintf(stderr, "badflow: enumerate_bounded called with M=%.6g < 1; empty range\n", M);
    return out;
  }

  const int n = K.n;
  std::vector<i64> B(n);
  double total = 1.0;
  for (int k = 0; k < n; ++k) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += std::abs(K.emb_inv[k][j]);
    B[k] = (i64)std::floor(s * M + 1e-9) ;
    total *= double(2 * B[k] + 1);
  }
  if (total > 4e8) throw FieldError("enumeration box too large for this bound");

  const double lim = M + 1e-9;
  auto sweep = [&](i64 a0_lo, i64 a0_hi, std::vector<AlgebraicInt>& sink) {
    std::vector<i64> a(n);
    for (i64 a0 = a0_lo; a0 <= a0_hi; ++a0) {
      a[0] = a0;
      // odometer over remaining coordinates
      std::vector<i64> idx(n, 0);
      for (int k = 1; k < n; ++k) idx[k] = -B[k];
      bool done = false;
      while (!done) {
        for (int k = 1; k < n; ++k) a[k] = idx[k];
        bool zero = true;
        for (int k = 0; k < n; ++k)
          if (a[k] != 0) { zero = false; break; }
        if (!zero) {
          double worst = 0.0;
          for (int j = 0; j < n; ++j) {
            cplx v(0, 0);
            for (int k = 0; k < n; ++k)
              if (a[k] != 0) v += double(a[k]) * K.emb[j][k];
            worst = std::max(worst, std::abs(v));
            if (worst > lim) break;
          }
          if (worst <= lim) sink.push_back(AlgebraicInt(a));
        }
        if (n == 1) break;
        int k = n - 1;
        while (k >= 1) {
          if (++idx[k] <= B[k]) break;
          idx[k] = -B[k];
          --k;
        }
        if (k == 0) done = true;
      }
    }
  };

  if (mode == Exec::Parallel) {
#ifdef _OPENMP
    const i64 lo = -B[0], hi = B[0];
    const int slabs = int(hi - lo + 1);
    std::vector<std::vector<AlgebraicInt>> parts(slabs);
#pragma omp parallel for schedule(dynamic)
    for (int s = 0; s < slabs; ++s) sweep(lo + s, lo + s, parts[s]);
    for (auto& p : parts)
      out.insert(out.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
    return out;
#endif
  }
  sweep(-B[0], B[0], out);
  return out;
}

}  // namespace badflow
