#include "badflow/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace badflow {

using i64 = std::int64_t;
using i128 = __int128;

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Gram-Schmidt data for the current rows: mu (lower triangular) and the
// squared lengths of the orthogonalised rows.
struct Gso {
  std::vector<std::vector<double>> mu;
  std::vector<double> B;
};

Gso gso(const Matrix& b) {
  const int r = int(b.size());
  const int d = r ? int(b[0].size()) : 0;
  Gso g;
  g.mu.assign(r, std::vector<double>(r, 0.0));
  g.B.assign(r, 0.0);
  std::vector<std::vector<double>> star(r, std::vector<double>(d));
  for (int i = 0; i < r; ++i) {
    star[i] = b[i];
    for (int j = 0; j < i; ++j) {
      double m = g.B[j] > 0 ? dot(b[i], star[j]) / g.B[j] : 0.0;
      g.mu[i][j] = m;
      for (int k = 0; k < d; ++k) star[i][k] -= m * star[j][k];
    }
    g.mu[i][i] = 1.0;
    g.B[i] = dot(star[i], star[i]);
  }
  return g;
}

i64 add_mul_checked(i64 acc, i64 a, i64 b) {
  i128 v = i128(acc) + i128(a) * i128(b);
  if (v > i128(std::numeric_limits<i64>::max()) || v < i128(std::numeric_limits<i64>::min()))
    throw ReductionError("transform coefficient overflow");
  return i64(v);
}

}  // namespace

LLLResult lll_reduce(Matrix basis, double delta) {
  const int r = int(basis.size());
  if (r == 0) return {basis, {}};
  const int d = int(basis[0].size());
  if (delta <= 0.25 || delta >= 1.0) throw ReductionError("LLL delta out of range");

  // Dependency floor per row, relative to that row's own length: GSO noise is
  // about 1e-16 * ||b_i|| per entry, while the kernels that feed deliberately
  // skewed bases keep true orthogonal parts above ~1e-14 * ||b_i||.  A single
  // global scale would misread skew as dependency.
  auto check_independent = [&](const Gso& gg, const Matrix& bb) {
    for (std::size_t i = 0; i < bb.size(); ++i) {
      const double n2 = dot(bb[i], bb[i]);
      if (!(n2 > 0.0) || !(gg.B[i] > 1e-30 * n2))
        throw DegenerateLattice("rows are linearly dependent");
    }
  };

  std::vector<std::vector<i64>> U(r, std::vector<i64>(r, 0));
  for (int i = 0; i < r; ++i) U[i][i] = 1;

  auto g = gso(basis);
  check_independent(g, basis);

  int k = 1;
  std::size_t steps = 0;
  while (k < r) {
    if (++steps > 200000) throw ReductionError("LLL failed to converge");
    // size-reduce row k
    bool changed = false;
    for (int j = k - 1; j >= 0; --j) {
      double m = g.mu[k][j];
      if (std::abs(m) > 0.5) {
        double rq = std::round(m);
        if (std::abs(rq) > 9.0e18) throw ReductionError("size-reduction step overflow");
        i64 q = i64(rq);
        for (int t = 0; t < d; ++t) basis[k][t] -= rq * basis[j][t];
        for (int t = 0; t < r; ++t) U[k][t] = add_mul_checked(U[k][t], -q, U[j][t]);
        // keep row k's coefficients current so the smaller j see the reduced
        // row, not the one this step just rewrote
        for (int t = 0; t <= j; ++t) g.mu[k][t] -= rq * g.mu[j][t];
        changed = true;
      }
    }
    if (changed) {
      g = gso(basis);
      check_independent(g, basis);
    }
    // Lovasz condition
    if (g.B[k] >= (delta - g.mu[k][k - 1] * g.mu[k][k - 1]) * g.B[k - 1]) {
      ++k;
    } else {
      std::swap(basis[k], basis[k - 1]);
      std::swap(U[k], U[k - 1]);
      g = gso(basis);
      k = std::max(k - 1, 1);
    }
  }
  return {std::move(basis), std::move(U)};
}

std::int64_t transform_det_abs(const std::vector<std::vector<i64>>& u) {
  // Bareiss on a copy; entries stay small for reduced transforms.
  const int n = int(u.size());
  std::vector<std::vector<i128>> m(n, std::vector<i128>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[i][j] = u[i][j];
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
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j)
        m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
    prev = m[k][k];
  }
  i128 dv = n ? m[n - 1][n - 1] : 1;
  (void)sign;
  if (dv < 0) dv = -dv;
  if (dv > i128(std::numeric_limits<i64>::max())) throw ReductionError("transform det overflow");
  return i64(dv);
}

std::vector<std::vector<i64>> enumerate_short(const Matrix& basis, double radius2,
                                              std::size_t node_cap) {
  auto red = lll_reduce(basis);
  const int r = int(red.basis.size());
  auto g = gso(red.basis);

  std::vector<std::vector<i64>> found;  // coeffs w.r.t. reduced rows
  std::vector<i64> x(r, 0);
  std::vector<double> centers(r, 0.0), partial(r + 1, 0.0);
  std::size_t nodes = 0;

  // depth-first from the last row down; partial[i] = cost committed above level i
  std::vector<i64> lo(r), hi(r);
  int i = r - 1;
  partial[r] = 0.0;
  auto set_range = [&](int lvl) {
    double c = 0.0;
    for (int j = lvl + 1; j < r; ++j) c += g.mu[j][lvl] * double(x[j]);
    centers[lvl] = c;
    double room = radius2 - partial[lvl + 1];
    if (room < 0) { lo[lvl] = 1; hi[lvl] = 0; x[lvl] = 0; return; }
    double w = std::sqrt(room / g.B[lvl]);
    lo[lvl] = i64(std::ceil(-c - w - 1e-12));
    hi[lvl] = i64(std::floor(-c + w + 1e-12));
    x[lvl] = lo[lvl] - 1;
  };
  set_range(i);
  while (true) {
    if (++nodes > node_cap) throw ReductionError("short-vector enumeration exceeded node cap");
    ++x[i];
    if (x[i] > hi[i]) {
      ++i;
      if (i >= r) break;
      continue;
    }
    double t = double(x[i]) + centers[i];
    double cost = partial[i + 1] + g.B[i] * t * t;
    if (cost > radius2 + 1e-12) continue;
    if (i == 0) {
      bool zero = true;
      for (int j = 0; j < r; ++j)
        if (x[j] != 0) { zero = false; break; }
      if (!zero) found.push_back(x);
    } else {
      partial[i] = cost;
      --i;
      set_range(i);
    }
  }

  // map back to original coordinates and canonicalise signs
  std::vector<std::vector<i64>> out;
  out.reserve(found.size());
  for (auto& c : found) {
    std::vector<i64> orig(r, 0);
    for (int a = 0; a < r; ++a) {
      if (c[a] == 0) continue;
      for (int b = 0; b < r; ++b) orig[b] = add_mul_checked(orig[b], c[a], red.transform[a][b]);
    }
    int last = r - 1;
    while (last >= 0 && orig[last] == 0) --last;
    if (last < 0) continue;
    if (orig[last] < 0)
      for (auto& v : orig) v = -v;
    out.push_back(std::move(orig));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SvResult shortest_vector(const Matrix& basis) {
  auto red = lll_reduce(basis);
  double best = std::numeric_limits<double>::infinity();
  for (auto& row : red.basis) best = std::min(best, dot(row, row));
  auto cands = enumerate_short(basis, best * (1.0 + 1e-9));

  SvResult res;
  const int r = int(basis.size());
  const int d = int(basis[0].size());
  double bestn = std::numeric_limits<double>::infinity();
  for (auto& c : cands) {
    std::vector<double> v(d, 0.0);
    for (int a = 0; a < r; ++a)
      if (c[a] != 0)
        for (int t = 0; t < d; ++t) v[t] += double(c[a]) * basis[a][t];
    double n2 = dot(v, v);
    if (n2 < bestn) {
      bestn = n2;
      res.coeffs = c;
      res.vec = std::move(v);
    }
  }
  if (!std::isfinite(bestn)) throw DegenerateLattice("no nonzero vector found");
  res.norm = std::sqrt(bestn);
  return res;
}

double det(Matrix m) {
  const int n = int(m.size());
  double sign = 1.0;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(m[i][k]) > std::abs(m[piv][k])) piv = i;
    if (m[piv][k] == 0.0) return 0.0;
    if (piv != k) { std::swap(m[piv], m[k]); sign = -sign; }
    for (int i = k + 1; i < n; ++i) {
      double f = m[i][k] / m[k][k];
      for (int j = k; j < n; ++j) m[i][j] -= f * m[k][j];
    }
  }
  double dv = sign;
  for (int k = 0; k < n; ++k) dv *= m[k][k];
  return dv;
}

Matrix gram(const Matrix& basis) {
  const int r = int(basis.size());
  Matrix g(r, std::vector<double>(r));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) g[i][j] = dot(basis[i], basis[j]);
  return g;
}

}  // namespace badflow
