#include "badflow/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "badflow/dd.hpp"
#include "badflow/stats.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace badflow {

namespace {

void require_target(const NumberField& K, const ComplexVector& z) {
  if (static_cast<int>(z.size()) != K.n)
    throw std::invalid_argument("target must have one coordinate per embedding");
  for (const cplx& c : z)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw std::invalid_argument("target has a non-finite coordinate");
}

ddcplx embed_coord_dd(const NumberField& K, const AlgebraicInt& x, int j) {
  ddcplx acc;
  for (int k = 0; k < K.n; ++k) {
    if (x.coords[k] == 0) continue;
    acc = ddc_add(acc, ddc_mul(K.emb_dd[j][k], static_cast<double>(x.coords[k])));
  }
  return acc;
}

// Row of the flowed, sheared lattice for the exact pair (p, q), computed in
// double-double and rounded once at the end.
std::vector<double> fresh_row(const NumberField& K, const WeightVector& r,
                              const ComplexVector& z, double t, const PairPQ& pq,
                              double scale) {
  const int n = K.n;
  std::vector<double> row(4 * n, 0.0);
  for (int j = 0; j < n; ++j) {
    const ddcplx sp = embed_coord_dd(K, pq.p, j);
    const ddcplx sq = embed_coord_dd(K, pq.q, j);
    const ddcplx zj(z[j].real(), z[j].imag());
    const ddcplx u = ddc_add(ddc_mul(sq, zj), sp);
    const double grow = std::exp(r.r[j] * t);
    const double shrink = std::exp(-r.r[j] * t);
    row[2 * j] = scale * grow * u.re.value();
    row[2 * j + 1] = scale * grow * u.im.value();
    row[2 * n + 2 * j] = scale * shrink * sq.re.value();
    row[2 * n + 2 * j + 1] = scale * shrink * sq.im.value();
  }
  return row;
}

AlgebraicInt combine(const NumberField& K, const std::vector<PairPQ>& gens,
                     const std::vector<std::int64_t>& c, bool take_p) {
  AlgebraicInt out = K.zero();
  for (std::size_t i = 0; i < gens.size(); ++i) {
    if (c[i] == 0) continue;
    const AlgebraicInt& g = take_p ? gens[i].p : gens[i].q;
    for (int k = 0; k < K.n; ++k) {
      __int128 v = static_cast<__int128>(out.coords[k]) +
                   static_cast<__int128>(c[i]) * static_cast<__int128>(g.coords[k]);
      if (v > std::numeric_limits<std::int64_t>::max() ||
          v < std::numeric_limits<std::int64_t>::min())
        throw OverflowError("orbit generator combination overflows int64");
      out.coords[k] = static_cast<std::int64_t>(v);
    }
  }
  return out;
}

double row_norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

BlockDiag flow_element(const WeightVector& r, double t) {
  BlockDiag g;
  g.g.resize(r.r.size());
  for (std::size_t j = 0; j < r.r.size(); ++j) {
    g.g[j] = {cplx(std::exp(r.r[j] * t), 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0),
              cplx(std::exp(-r.r[j] * t), 0.0)};
  }
  return g;
}

BlockDiag shear_element(const ComplexVector& z) {
  BlockDiag g;
  g.g.resize(z.size());
  for (std::size_t j = 0; j < z.size(); ++j)
    g.g[j] = {cplx(1.0, 0.0), z[j], cplx(0.0, 0.0), cplx(1.0, 0.0)};
  return g;
}

BlockDiag compose(const BlockDiag& a, const BlockDiag& b) {
  if (a.g.size() != b.g.size())
    throw std::invalid_argument("block elements act on different embedding counts");
  BlockDiag out;
  out.g.resize(a.g.size());
  for (std::size_t j = 0; j < a.g.size(); ++j) {
    const auto& x = a.g[j];
    const auto& y = b.g[j];
    out.g[j] = {x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3],
                x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]};
  }
  return out;
}

void check_unimodular(const BlockDiag& g, double tol) {
  for (std::size_t j = 0; j < g.g.size(); ++j) {
    const auto& m = g.g[j];
    const cplx det = m[0] * m[3] - m[1] * m[2];
    if (std::abs(det - cplx(1.0, 0.0)) > tol)
      throw NotUnimodular("block " + std::to_string(j) + " has determinant " +
                          std::to_string(det.real()) + "+" + std::to_string(det.imag()) +
                          "i, not 1");
  }
}

std::vector<cplx> apply_block(const BlockDiag& g, const std::vector<cplx>& uw) {
  const std::size_t n = g.g.size();
  if (uw.size() != 2 * n)
    throw std::invalid_argument("vector length must be twice the embedding count");
  std::vector<cplx> out(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& m = g.g[j];
    out[j] = m[0] * uw[j] + m[1] * uw[n + j];
    out[n + j] = m[2] * uw[j] + m[3] * uw[n + j];
  }
  return out;
}

std::vector<std::vector<cplx>> psi_matrix(const BlockDiag& g) {
  const std::size_t n = g.g.size();
  std::vector<std::vector<cplx>> M(2 * n, std::vector<cplx>(2 * n, cplx(0.0, 0.0)));
  for (std::size_t j = 0; j < n; ++j) {
    M[j][j] = g.g[j][0];
    M[j][n + j] = g.g[j][1];
    M[n + j][j] = g.g[j][2];
    M[n + j][n + j] = g.g[j][3];
  }
  return M;
}

RealifiedLattice build_LK(const NumberField& K) {
  const int n = K.n;
  RealifiedLattice L;
  L.scale = std::pow(std::abs(static_cast<double>(K.discriminant)),
                     -1.0 / (2.0 * static_cast<double>(n)));
  L.gens.reserve(2 * n);
  for (int k = 0; k < n; ++k) {
    PairPQ g{K.from_coords([&] {
               std::vector<std::int64_t> c(n, 0);
               c[k] = 1;
               return c;
             }()),
             K.zero()};
    L.gens.push_back(g);
  }
  for (int k = 0; k < n; ++k) {
    PairPQ g{K.zero(), K.from_coords([&] {
               std::vector<std::int64_t> c(n, 0);
               c[k] = 1;
               return c;
             }())};
    L.gens.push_back(g);
  }
  const ComplexVector z0(n, cplx(0.0, 0.0));
  WeightVector r0 = WeightVector::balanced(n);  // t = 0, so weights are irrelevant
  L.rows.reserve(2 * n);
  for (const PairPQ& g : L.gens) L.rows.push_back(fresh_row(K, r0, z0, 0.0, g, L.scale));
  return L;
}

RealifiedLattice orbit_lattice(const NumberField& K, const WeightVector& r,
                               const ComplexVector& z, double t) {
  require_target(K, z);
  RealifiedLattice L = build_LK(K);
  for (std::size_t i = 0; i < L.gens.size(); ++i)
    L.rows[i] = fresh_row(K, r, z, t, L.gens[i], L.scale);
  return L;
}

OrbitShortest shortest_orbit_vector(const NumberField& K, const WeightVector& r,
                                    const ComplexVector& z, double t, bool exact) {
  RealifiedLattice L = orbit_lattice(K, r, z, t);
  LLLResult red = lll_reduce(L.rows);

  // Exact pair behind each reduced row, via the integer transform.
  std::vector<PairPQ> red_gens;
  red_gens.reserve(red.basis.size());
  for (std::size_t i = 0; i < red.basis.size(); ++i) {
    const std::vector<std::int64_t>& c = red.transform[i];
    red_gens.push_back(PairPQ{combine(K, L.gens, c, true), combine(K, L.gens, c, false)});
  }

  // Enumeration basis: fresh provenance rows in exact mode, the float output of
  // the reduction otherwise.
  Matrix basis = red.basis;
  if (exact)
    for (std::size_t i = 0; i < basis.size(); ++i)
      basis[i] = fresh_row(K, r, z, t, red_gens[i], L.scale);

  double best2 = std::numeric_limits<double>::infinity();
  for (const auto& row : basis) best2 = std::min(best2, row_norm2(row));

  const auto cands = enumerate_short(basis, best2 * (1.0 + 1e-9));
  OrbitShortest out;
  double min2 = std::numeric_limits<double>::infinity();
  for (const auto& c : cands) {
    PairPQ pq{combine(K, red_gens, c, true), combine(K, red_gens, c, false)};
    if (pq.p.is_zero() && pq.q.is_zero()) continue;
    double n2;
    if (exact) {
      n2 = row_norm2(fresh_row(K, r, z, t, pq, L.scale));
    } else {
      std::vector<double> v(basis.front().size(), 0.0);
      for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t d = 0; d < v.size(); ++d)
          v[d] += static_cast<double>(c[i]) * basis[i][d];
      n2 = row_norm2(v);
    }
    if (n2 < min2) {
      min2 = n2;
      out.pair = pq;
    }
  }
  if (!std::isfinite(min2)) throw DegenerateLattice("orbit lattice has no nonzero vector");
  out.norm = std::sqrt(min2);
  return out;
}

OrbitProfile systole_profile(const NumberField& K, const WeightVector& r,
                             const ComplexVector& z, double T, int steps, bool exact,
                             Exec mode) {
  require_target(K, z);
  if (steps < 2) throw std::invalid_argument("systole profile needs at least two steps");
  if (!(T > 0.0) || !std::isfinite(T))
    throw std::invalid_argument("flow horizon must be positive and finite");
  OrbitProfile prof;
  prof.t.resize(steps);
  prof.systole.resize(steps);
  prof.witness.resize(steps, PairPQ{K.zero(), K.zero()});
  for (int i = 0; i < steps; ++i)
    prof.t[i] = T * static_cast<double>(i) / static_cast<double>(steps - 1);

  const int nthreads = worker_count(mode);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(nthreads) if (nthreads > 1)
#endif
  for (int i = 0; i < steps; ++i) {
    OrbitShortest s = shortest_orbit_vector(K, r, z, prof.t[i], exact);
    prof.systole[i] = s.norm;
    prof.witness[i] = s.pair;
  }
  return prof;
}

OrbitVerdict classify_orbit(const OrbitProfile& p, double threshold, double slope_tol) {
  const std::size_t m = p.t.size();
  if (m < 5 || p.systole.size() != m)
    throw std::invalid_argument("orbit profile too short to classify");
  if (!(slope_tol > 0.0)) throw std::invalid_argument("slope tolerance must be positive");
  const std::size_t tail =
      std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(0.4 * m)));
  std::vector<double> xs, ys;
  xs.reserve(tail);
  ys.reserve(tail);
  for (std::size_t i = m - tail; i < m; ++i) {
    if (!(p.systole[i] > 0.0))
      throw std::invalid_argument("orbit profile has a non-positive systole");
    xs.push_back(p.t[i]);
    ys.push_back(std::log(p.systole[i]));
  }
  OrbitVerdict v;
  v.tail_slope = linear_fit(xs, ys).slope;
  v.min_systole = *std::min_element(p.systole.begin(), p.systole.end());
  // A decisive verdict needs both signals to agree: a steep negative tail alone
  // may just be a dip that has not yet crossed the threshold, and a comfortable
  // minimum with a falling tail may be about to lose it.
  if (v.tail_slope <= -slope_tol && v.min_systole < threshold)
    v.cls = OrbitClass::Escaping;
  else if (v.min_systole >= threshold && v.tail_slope > -slope_tol)
    v.cls = OrbitClass::Bounded;
  else
    v.cls = OrbitClass::Inconclusive;
  return v;
}

const char* orbit_class_name(OrbitClass c) {
  switch (c) {
    case OrbitClass::Escaping: return "escaping";
    case OrbitClass::Bounded: return "bounded";
    default: return "inconclusive";
  }
}

}  // namespace badflow
