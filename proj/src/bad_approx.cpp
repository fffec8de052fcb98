#include "badflow/bad_approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "badflow/reduction.hpp"

namespace badflow {

using i64 = std::int64_t;

namespace {

void check_target(const NumberField& K, const ComplexVector& z) {
  if (int(z.size()) != K.n) throw FieldError("target has wrong number of coordinates");
}

// log of the quality, doubles only; used inside refinement loops where the
// residues are far above the rounding floor.
double log_quality_fast(const NumberField& K, const WeightVector& r, const ComplexVector& z,
                        const std::vector<cplx>& vp, const std::vector<cplx>& vq, double logN) {
  double best = -std::numeric_limits<double>::infinity();
  for (int s : r.sigma_plus) {
    double a = std::abs(vq[s] * z[s] + vp[s]);
    double term = (a > 0.0 ? std::log(a) : -std::numeric_limits<double>::infinity()) +
                  r.r[s] * logN;
    best = std::max(best, term);
  }
  return best;
}

// |sigma_j(q) z_j + sigma_j(p)|^2 in double-double.
dd residue_abs2_dd(const NumberField& K, const ComplexVector& z, const AlgebraicInt& p,
                   const AlgebraicInt& q, int j) {
  ddcplx acc(0.0, 0.0);
  ddcplx zj(z[j].real(), z[j].imag());
  for (int k = 0; k < K.n; ++k) {
    if (q.coords[k] != 0)
      acc = ddc_add(acc, ddc_mul(ddc_mul(K.emb_dd[j][k], zj), double(q.coords[k])));
    if (p.coords[k] != 0)
      acc = ddc_add(acc, ddc_mul(K.emb_dd[j][k], double(p.coords[k])));
  }
  return ddc_abs2(acc);
}

}  // namespace

// ---------------------------------------------------------------------------
// quality / best_p / boxes

double quality(const NumberField& K, const WeightVector& r, const ComplexVector& z,
               const AlgebraicInt& p, const AlgebraicInt& q) {
  check_target(K, z);
  if (q.is_zero()) throw ZeroElement("quality needs a nonzero denominator");
  const double logN = log_weighted_norm(K, r, q);
  double best = -std::numeric_limits<double>::infinity();
  for (int s : r.sigma_plus) {
    double a2 = residue_abs2_dd(K, z, p, q, s).value();
    double term = (a2 > 0.0 ? 0.5 * std::log(a2) : -std::numeric_limits<double>::infinity()) +
                  r.r[s] * logN;
    best = std::max(best, term);
  }
  if (!r.sigma_zero.empty()) {
    // Weight-0 embeddings contribute max{|residue|, |sigma(q)|}: the residue
    // unscaled, plus the admissibility floor that keeps q honest there.
    auto vq = embed(K, q);
    for (int s : r.sigma_zero) {
      double a2 = residue_abs2_dd(K, z, p, q, s).value();
      double u = a2 > 0.0 ? 0.5 * std::log(a2) : -std::numeric_limits<double>::infinity();
      best = std::max(best, std::max(u, std::log(std::abs(vq[s]))));
    }
  }
  return std::exp(best);
}

AlgebraicInt best_p(const NumberField& K, const WeightVector& r, const ComplexVector& z,
                    const AlgebraicInt& q) {
  check_target(K, z);
  if (q.is_zero()) throw ZeroElement("best_p needs a nonzero denominator");
  const int n = K.n;
  auto vq = embed(K, q);
  const double logN = log_weighted_norm(K, r, q);

  // least-squares seed: sigma(p) ~ -sigma(q) z
  std::vector<double> b(2 * n);
  for (int j = 0; j < n; ++j) {
    cplx t = -vq[j] * z[j];
    b[2 * j] = t.real();
    b[2 * j + 1] = t.imag();
  }
  std::vector<double> rhs(n, 0.0);
  for (int m = 0; m < n; ++m)
    for (int j = 0; j < 2 * n; ++j) rhs[m] += K.lsq_at[m][j] * b[j];
  const auto& L = K.lsq_ata_chol;
  std::vector<double> y(n), x(n);
  for (int i = 0; i < n; ++i) {
    double s = rhs[i];
    for (int k = 0; k < i; ++k) s -= L[i][k] * y[k];
    y[i] = s / L[i][i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < n; ++k) s -= L[k][i] * x[k];
    x[i] = s / L[i][i];
  }

  std::vector<i64> p0(n);
  for (int i = 0; i < n; ++i) {
    if (!(std::abs(x[i]) < 9.0e18)) throw OverflowError("best_p seed overflows int64");
    p0[i] = (i64)std::llround(x[i]);
  }

  // +-1 box refinement on the true objective
  AlgebraicInt best;
  double bestval = std::numeric_limits<double>::infinity();
  std::vector<int> d(n, -1);
  std::vector<i64> cand(n);
  while (true) {
    for (int i = 0; i < n; ++i) cand[i] = p0[i] + d[i];
    AlgebraicInt pc(cand);
    auto vp = embed(K, pc);
    double val = log_quality_fast(K, r, z, vp, vq, logN);
    if (val < bestval ||
        (val == bestval && !best.coords.empty() && pc.coords < best.coords)) {
      bestval = val;
      best = pc;
    }
    int i = n - 1;
    while (i >= 0 && d[i] == 1) d[i--] = -1;
    if (i < 0) break;
    ++d[i];
  }
  return best;
}

bool DeltaBox::contains(const ComplexVector& z, double slack) const {
  for (std::size_t i = 0; i < sigma.size(); ++i)
    if (std::abs(z[sigma[i]] - center[i]) > radius[i] + slack) return false;
  return true;
}

DeltaBox delta_box(const NumberField& K, const WeightVector& r, double eps,
                   const AlgebraicInt& p, const AlgebraicInt& q) {
  if (!(eps > 0)) throw NotAdmissible("delta_box needs eps > 0");
  if (q.is_zero()) throw ZeroElement("delta_box needs a nonzero denominator");
  if (!in_OK_r_eps(K, r, eps, q))
    throw NotAdmissible("denominator is not admissible at this eps");
  auto vp = embed(K, p);
  auto vq = embed(K, q);
  const double logN = log_weighted_norm(K, r, q);
  DeltaBox box;
  for (int s : r.sigma_plus) {
    box.sigma.push_back(s);
    box.center.push_back(vp[s] / vq[s]);
    box.radius.push_back(eps / (std::abs(vq[s]) * std::exp(r.r[s] * logN)));
  }
  for (int s : r.sigma_zero) {
    box.sigma.push_back(s);
    box.center.push_back(vp[s] / vq[s]);
    box.radius.push_back(eps / std::abs(vq[s]));
  }
  return box;
}

ComplexVector ratio_point(const NumberField& K, const PairPQ& pair) {
  if (pair.q.is_zero()) throw ZeroElement("ratio point needs a nonzero denominator");
  auto vp = embed(K, pair.p);
  auto vq = embed(K, pair.q);
  ComplexVector out(K.n);
  for (int j = 0; j < K.n; ++j) out[j] = vp[j] / vq[j];
  return out;
}

bool same_ratio(const NumberField& K, const PairPQ& a, const PairPQ& b) {
  return mul(K, a.p, b.q) == mul(K, b.p, a.q);
}

// ---------------------------------------------------------------------------
// strategy constants

double GameConstants::H_level(int l) const {
  return eps * std::pow(double(R), double(l)) / rho0;
}

GameConstants pick_constants(const NumberField& K, const WeightVector& r, double beta,
                             double gamma, double rho0) {
  if (int(r.r.size()) != K.n) throw FieldError("weight vector has wrong length");
  if (!(beta > 0.0 && beta < 1.0)) throw NotAdmissible("beta must lie in (0, 1)");
  if (!(gamma > 0.0)) throw NotAdmissible("gamma must be positive");
  if (!(rho0 > 0.0)) throw NotAdmissible("rho0 must be positive");

  const int n = K.n;
  const double budget = std::pow(beta * beta / 2.0, gamma);
  // smallest integer R >= 2 with n / (R^gamma - 1) <= budget
  double target = std::pow(1.0 + double(n) / budget, 1.0 / gamma);
  if (!(target < 1.0e9)) throw NotAdmissible("no admissible contraction ratio below 1e9");
  long long R = std::max(2LL, (long long)std::ceil(target - 1e-9));
  while (double(n) / (std::pow(double(R), gamma) - 1.0) > budget) {
    if (++R > 1'000'000'000LL) throw NotAdmissible("no admissible contraction ratio below 1e9");
  }

  GameConstants C;
  C.beta = beta;
  C.gamma = gamma;
  C.rho0 = rho0;
  C.R = int(R);
  C.n = n;
  C.eps = rho0 / (4.0 * std::pow(double(R), 4.0 * n));
  C.c_K = 1.0;
  if (!(std::pow(4.0, n) * std::pow(C.eps, 2.0 * n) < C.c_K))
    throw NotAdmissible("eps fails the packing constraint");
  return C;
}

std::optional<int> try_ball_class(const GameConstants& C, double rho) {
  if (!(rho > 0.0)) return std::nullopt;
  double t = std::log(C.rho0 / rho) / std::log(double(C.R));
  long l0 = (long)std::floor(t);
  // classes can overlap (beta < 1/R): prefer the largest level, so scan down
  for (long l = l0 + 2; l >= std::max(0L, l0 - 2); --l) {
    double hi = C.rho0 / std::pow(double(C.R), double(l));
    double lo = C.beta * hi;
    if (rho <= hi * (1.0 + 1e-12) && rho > lo) return int(l);
  }
  return std::nullopt;
}

int ball_class(const GameConstants& C, double rho) {
  auto v = try_ball_class(C, rho);
  if (!v) throw NoClass("radius " + std::to_string(rho) + " falls outside every radius class");
  return *v;
}

PartitionIndex partition_index(const GameConstants& C, const NumberField& K,
                               const WeightVector& r, const AlgebraicInt& q) {
  if (q.is_zero()) throw ZeroElement("partition index needs a nonzero denominator");
  const double H = height(K, r, q);
  const double logR = std::log(double(C.R));

  PartitionIndex idx;
  if (H < C.H_level(1)) {
    idx.m = 0;
  } else {
    long m = (long)std::floor(std::log(H * C.rho0 / C.eps) / logR + 1e-12);
    if (m < 1) m = 1;
    while (m > 1 && C.H_level(int(m)) > H) --m;
    while (C.H_level(int(m) + 1) <= H) ++m;
    idx.m = int(m);
  }

  // refinement level against N(q)^{2 r_max}
  const double logq = 2.0 * r.r_max * log_weighted_norm(K, r, q);
  const double logHm = std::log(C.H_level(idx.m));
  const double step = 4.0 * double(K.n) * logR;
  long l = (long)std::floor((logq - logHm) / step + 1e-12) + 1;
  if (l < 1) l = 1;
  while (l > 1 && logHm + double(l - 1) * step > logq) --l;
  while (logHm + double(l) * step <= logq) ++l;
  idx.l = int(l);

  idx.m_dec = idx.m - idx.l;
  idx.orphan = idx.m_dec < 0;
  return idx;
}

// ---------------------------------------------------------------------------
// lattice-backed pair search

std::vector<PairPQ> pairs_in_region(const NumberField& K, const ComplexVector& z,
                                    const std::vector<double>& ubounds,
                                    const std::vector<double>& wbounds) {
  check_target(K, z);
  const int n = K.n;
  if (int(ubounds.size()) != n || int(wbounds.size()) != n)
    throw FieldError("bound vectors have wrong length");
  for (double w : wbounds)
    if (!(w > 0.0)) return {};

  // Effective numerator bounds: never below the double rounding floor of the
  // row arithmetic, so the float search cannot lose pairs whose true residues
  // (checked below in double-double) are smaller than doubles can see.
  std::vector<double> ueff(n);
  for (int j = 0; j < n; ++j) {
    double floor_j = 2e-14 * wbounds[j] * std::max(std::abs(z[j]), 1.0);
    ueff[j] = std::max({ubounds[j], floor_j, 1e-300});
  }

  Matrix rows(2 * n, std::vector<double>(4 * n, 0.0));
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      cplx e = K.emb[j][k];
      // numerator generator: u_j = sigma_j(b_k), w_j = 0
      rows[k][4 * j] = e.real() / ueff[j];
      rows[k][4 * j + 1] = e.imag() / ueff[j];
      // denominator generator: u_j = sigma_j(b_k) z_j, w_j = sigma_j(b_k)
      cplx ez = e * z[j];
      rows[n + k][4 * j] = ez.real() / ueff[j];
      rows[n + k][4 * j + 1] = ez.imag() / ueff[j];
      rows[n + k][4 * j + 2] = e.real() / wbounds[j];
      rows[n + k][4 * j + 3] = e.imag() / wbounds[j];
    }
  }

  const double radius2 = 2.0 * n * 1.001;
  auto coeffs = enumerate_short(rows, radius2);

  std::vector<PairPQ> out;
  std::vector<i64> pc(n), qc(n);
  for (auto& c : coeffs) {
    for (int k = 0; k < n; ++k) { pc[k] = c[k]; qc[k] = c[n + k]; }
    AlgebraicInt q(qc);
    if (q.is_zero()) continue;
    AlgebraicInt p(pc);
    bool ok = true;
    auto vq = embed(K, q);
    for (int j = 0; j < n && ok; ++j) {
      if (std::abs(vq[j]) > wbounds[j] * (1.0 + 1e-9)) { ok = false; break; }
      double lim = ubounds[j] > 0.0
                       ? ubounds[j] * (1.0 + 1e-9)
                       : 1e-28 * std::max(wbounds[j] * std::abs(z[j]), 1.0);
      double a2 = residue_abs2_dd(K, z, p, q, j).value();
      if (a2 > lim * lim) ok = false;
    }
    if (ok) out.push_back(PairPQ{std::move(p), std::move(q)});
  }
  return out;
}

std::vector<PairPQ> resonant_pairs(const NumberField& K, const WeightVector& r,
                                   const GameConstants& C, const ComplexVector& center,
                                   double rho, int band, int refine) {
  check_target(K, center);
  if (!(rho > 0.0)) throw NotAdmissible("resonant_pairs needs a positive radius");
  if (band < 0) throw NotAdmissible("height band must be nonnegative");
  if (refine < 0) throw NotAdmissible("refinement level must be nonnegative");
  const int n = K.n;
  const double Hlo = C.H_level(band);
  const double Hhi = C.H_level(band + 1);

  double rminp = std::numeric_limits<double>::infinity();
  for (int s : r.sigma_plus) rminp = std::min(rminp, r.r[s]);

  // window for W = N(q)^{2 r_max}; every H-band denominator has
  // H <= W <= H^{r_max / min+ r}
  double Wlo, Whi;
  if (refine > 0) {
    Wlo = Hlo * std::pow(double(C.R), 4.0 * n * (refine - 1));
    Whi = Hlo * std::pow(double(C.R), 4.0 * n * refine);
    // a denominator also satisfies H >= W^{rmin+/rmax}; if that already
    // exceeds the band top, the class is empty
    if (std::pow(Wlo, rminp / r.r_max) >= Hhi * (1.0 + 1e-12)) return {};
  } else {
    Wlo = Hlo;
    Whi = std::pow(Hhi, r.r_max / rminp);
  }

  std::vector<double> ub(n), wb(n);
  for (int j = 0; j < n; ++j) {
    if (r.r[j] > 0.0) {
      // |sigma_j(q)| <= N(q)^{r_j} = W^{r_j/(2 r_max)}, and
      // |sigma_j(q)| <= H / N(q)^{r_j} < Hhi / Wlo^{r_j/(2 r_max)}
      double e = r.r[j] / (2.0 * r.r_max);
      wb[j] = std::min(std::pow(Whi, e), Hhi / std::pow(Wlo, e)) * (1.0 + 1e-9);
      ub[j] = wb[j] * rho + C.eps * (1.0 + 1e-9);
    } else {
      int partner = K.conj_perm[j];
      if (r.r[partner] == 0.0)
        throw Unsupported("weight-0 conjugate pair: numerators are unbounded there");
      wb[j] = C.eps * (1.0 + 1e-9);
      ub[j] = C.eps * (1.0 + std::abs(center[j])) + (Hhi * rho + C.eps) +
              Hhi * std::abs(center[partner]);
    }
  }

  auto cands = pairs_in_region(K, center, ub, wb);

  std::vector<PairPQ> out;
  for (auto& pq : cands) {
    // box convention: the pair approximates sigma(p)/sigma(q), so flip the
    // numerator found by the residue search
    PairPQ boxed{neg(K, pq.p), pq.q};
    double H = height(K, r, boxed.q);
    if (!(H >= Hlo && H < Hhi)) continue;
    if (refine > 0) {
      double W = std::exp(2.0 * r.r_max * log_weighted_norm(K, r, boxed.q));
      if (!(W >= Wlo * (1.0 - 1e-9) && W < Whi * (1.0 + 1e-9))) continue;
    }
    if (!r.sigma_zero.empty()) {
      bool adm = true;
      auto vq = embed(K, boxed.q);
      for (int s : r.sigma_zero)
        if (std::abs(vq[s]) > C.eps * (1.0 + 1e-9)) { adm = false; break; }
      if (!adm) continue;
    }
    // exact polydisk-meets-ball test, coordinate by coordinate
    const double logN = log_weighted_norm(K, r, boxed.q);
    auto vq = embed(K, boxed.q);
    bool meets = true;
    for (int j = 0; j < n && meets; ++j) {
      double lim = std::abs(vq[j]) * rho + C.eps * std::exp(-r.r[j] * logN);
      double a2 = residue_abs2_dd(K, center, neg(K, boxed.p), boxed.q, j).value();
      if (a2 > lim * lim * (1.0 + 1e-9)) meets = false;
    }
    if (meets) out.push_back(std::move(boxed));
  }
  return out;
}

// ---------------------------------------------------------------------------
// badness certificates

WitnessReport in_bad_eps(const NumberField& K, const WeightVector& r, const ComplexVector& z,
                         double eps, double Hmax, Exec mode) {
  check_target(K, z);
  if (!(eps > 0.0)) throw NotAdmissible("in_bad_eps needs eps > 0");
  for (int s : r.sigma_zero)
    if (r.r[K.conj_perm[s]] == 0.0)
      throw Unsupported("weight-0 conjugate pair: numerators are unbounded there");

  WitnessReport rep;
  rep.eps = eps;
  rep.Hmax = Hmax;
  rep.bad = true;
  rep.min_quality = std::numeric_limits<double>::infinity();
  if (Hmax < 1.0) return rep;  // no admissible denominator has height below 1

  const double B = 4.0;
  std::vector<std::pair<double, double>> bands;
  for (double lo = 1.0; lo <= Hmax; lo *= B)
    bands.emplace_back(lo, std::min(lo * B, Hmax * (1.0 + 1e-12)));

  const int n = K.n;
  struct BandOut {
    double minq = std::numeric_limits<double>::infinity();
    std::optional<PairPQ> argmin;
    std::size_t checked = 0;
  };
  std::vector<BandOut> outs(bands.size());

  auto run_band = [&](std::size_t bi) {
    auto [lo, hi] = bands[bi];
    // H >= lo forces the r-norm up: H <= N^{2 r_max} gives N >= lo^{1/(2 r_max)}.
    const double Nlo = std::pow(std::max(lo, 1.0), 1.0 / (2.0 * r.r_max));
    std::vector<double> ub(n), wb(n);
    for (int j = 0; j < n; ++j) {
      if (r.r[j] > 0.0) {
        // |s_j(q)|^2 <= |s_j(q)| * N^{r_j} <= H < hi, and quality <= eps needs
        // |u_j| <= eps * N^{-r_j}; both shrink the box as the band climbs.
        wb[j] = std::sqrt(hi) * (1.0 + 1e-12);
        ub[j] = eps * std::pow(Nlo, -r.r[j]) * (1.0 + 1e-9);
      } else {
        int partner = K.conj_perm[j];
        wb[j] = std::min(eps * (1.0 + 1e-9), hi * (1.0 + 1e-12));
        ub[j] = eps * (1.0 + std::abs(z[j]) + std::abs(z[partner])) * (1.0 + 1e-9);
      }
    }
    auto cands = pairs_in_region(K, z, ub, wb);
    BandOut& bo = outs[bi];
    for (auto& pq : cands) {
      double H = height(K, r, pq.q);
      if (!(H >= (bi == 0 ? 0.0 : lo) && H < hi)) continue;
      if (!r.sigma_zero.empty()) {
        bool adm = true;
        for (int s : r.sigma_zero) {
          double a2 = 0.0;
          {
            ddcplx acc(0.0, 0.0);
            for (int k = 0; k < n; ++k)
              if (pq.q.coords[k] != 0)
                acc = ddc_add(acc, ddc_mul(K.emb_dd[s][k], double(pq.q.coords[k])));
            a2 = ddc_abs2(acc).value();
          }
          if (a2 > eps * eps * (1.0 + 1e-9)) { adm = false; break; }
        }
        if (!adm) continue;
      }
      ++bo.checked;
      double qv = quality(K, r, z, pq.p, pq.q);
      if (qv < bo.minq) {
        bo.minq = qv;
        bo.argmin = pq;
      }
    }
  };

  if (mode == Exec::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
    for (std::size_t bi = 0; bi < bands.size(); ++bi) run_band(bi);
#else
    for (std::size_t bi = 0; bi < bands.size(); ++bi) run_band(bi);
#endif
  } else {
    for (std::size_t bi = 0; bi < bands.size(); ++bi) run_band(bi);
  }

  for (auto& bo : outs) {
    rep.pairs_checked += bo.checked;
    if (bo.minq < rep.min_quality) {
      rep.min_quality = bo.minq;
      rep.minimizer = bo.argmin;
    }
  }
  if (rep.min_quality < eps) rep.bad = false;
  return rep;
}

BadConstantResult bad_constant_up_to_height(const NumberField& K, const WeightVector& r,
                                            const ComplexVector& z, double Qmax,
                                            double eps_zero, Exec mode) {
  check_target(K, z);
  BadConstantResult res;
  res.value = std::numeric_limits<double>::infinity();
  if (Qmax < 1.0) return res;

  auto qs = enumerate_bounded(K, Qmax * (1.0 + 1e-12), mode);
  std::vector<const AlgebraicInt*> keep;
  keep.reserve(qs.size());
  for (auto& q : qs) {
    if (!r.sigma_zero.empty() && !in_OK_r_eps(K, r, eps_zero, q)) continue;
    keep.push_back(&q);
  }
  res.denominators = keep.size();
  if (keep.empty()) return res;

  struct Best {
    double val = std::numeric_limits<double>::infinity();
    std::size_t idx = 0;
    AlgebraicInt p;
  };
  const std::size_t nq = keep.size();
  const std::size_t block = 1024;
  const std::size_t nblocks = (nq + block - 1) / block;
  std::vector<Best> bests(nblocks);

  auto run_block = [&](std::size_t b) {
    Best& loc = bests[b];
    for (std::size_t i = b * block; i < std::min(nq, (b + 1) * block); ++i) {
      AlgebraicInt p = best_p(K, r, z, *keep[i]);
      double v = quality(K, r, z, p, *keep[i]);
      if (v < loc.val) {
        loc.val = v;
        loc.idx = i;
        loc.p = std::move(p);
      }
    }
  };

  if (mode == Exec::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
    for (std::size_t b = 0; b < nblocks; ++b) run_block(b);
#else
    for (std::size_t b = 0; b < nblocks; ++b) run_block(b);
#endif
  } else {
    for (std::size_t b = 0; b < nblocks; ++b) run_block(b);
  }

  // merge in block order: ties resolve to the earliest denominator
  Best merged;
  for (auto& bo : bests)
    if (bo.val < merged.val) merged = bo;
  res.value = merged.val;
  res.argmin = PairPQ{merged.p, *keep[merged.idx]};
  return res;
}

}  // namespace badflow
