#include "badflow/dimension.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "badflow/stats.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace badflow {

namespace {

constexpr int kMaxGridLevel = 13;  // 2^26 cells, 8 MiB of mask

bool canonical_sign(const AlgebraicInt& q) {
  for (std::int64_t c : q.coords) {
    if (c > 0) return true;
    if (c < 0) return false;
  }
  return false;  // zero
}

// Does [a, b] meet the middle-thirds Cantor set on [0, 1]?
bool interval_meets_cantor(double a, double b, int depth) {
  if (b < 0.0 || a > 1.0) return false;
  if (depth == 0 || b - a >= 1.0) return true;
  return interval_meets_cantor(3.0 * a, 3.0 * b, depth - 1) ||
         interval_meets_cantor(3.0 * (a - 2.0 / 3.0), 3.0 * (b - 2.0 / 3.0), depth - 1);
}

}  // namespace

bool SurvivorGrid::alive(int ix, int iy) const {
  const std::size_t idx =
      static_cast<std::size_t>(iy) * static_cast<std::size_t>(side()) + ix;
  return (dead[idx >> 6] & (std::uint64_t{1} << (idx & 63))) == 0;
}

std::size_t SurvivorGrid::alive_count() const {
  std::size_t set = 0;
  for (std::uint64_t w : dead) set += static_cast<std::size_t>(std::popcount(w));
  const std::size_t total = static_cast<std::size_t>(side()) * side();
  return total - set;
}

ComplexVector conjugate_diagonal(const NumberField& K, cplx z) {
  if (K.n != 2)
    throw Unsupported("conjugate-diagonal slice is defined for quadratic fields only");
  ComplexVector out(2);
  out[0] = z;
  out[1] = std::conj(z);
  // Respect the stored embedding order: coordinate conj_perm[0] must carry the
  // conjugate of coordinate 0.  For n = 2 that is automatic, but keep the
  // intent explicit.
  if (K.conj_perm[0] != 1) throw Unsupported("unexpected embedding pairing");
  return out;
}

SurvivorGrid survivor_grid(const NumberField& K, const WeightVector& r, const Window& win,
                           double eps, int k, double hmax_factor, Exec mode) {
  if (k < 0 || k > kMaxGridLevel)
    throw std::invalid_argument("grid level out of range [0, 13]");
  if (!(win.half > 0.0) || !std::isfinite(win.half))
    throw std::invalid_argument("window half-size must be positive");
  if (!(eps >= 0.0) || !std::isfinite(eps))
    throw std::invalid_argument("eps must be non-negative");
  if (!(hmax_factor > 0.0)) throw std::invalid_argument("height factor must be positive");
  conjugate_diagonal(K, win.center);  // degree / pairing check

  SurvivorGrid grid;
  grid.k = k;
  grid.win = win;
  grid.eps = eps;
  const int side = grid.side();
  const double cs = grid.cell_size();
  grid.Hmax = hmax_factor * eps / cs;
  const std::size_t words = (static_cast<std::size_t>(side) * side + 63) / 64;
  grid.dead.assign(words, 0);
  if (eps == 0.0) return grid;

  double rmin_plus = 1.0;
  for (int j : r.sigma_plus) rmin_plus = std::min(rmin_plus, r.r[j]);

  // Superset of denominators: |sigma(q)| <= Hmax^{r_max / (2 min_+ r)}.
  const double M = std::pow(grid.Hmax, r.r_max / (2.0 * rmin_plus)) * (1.0 + 1e-9);
  std::vector<AlgebraicInt> qs;
  for (AlgebraicInt& q : enumerate_bounded(K, M)) {
    if (q.is_zero() || !canonical_sign(q)) continue;
    if (height(K, r, q) > grid.Hmax * (1.0 + 1e-9)) continue;
    qs.push_back(std::move(q));
  }

  const double x0 = win.center.real() - win.half;
  const double y0 = win.center.imag() - win.half;
  const double wrad = win.half * std::sqrt(2.0);
  const cplx w1 = K.emb[0][1];  // sigma_1 of the second basis element
  const double iw = w1.imag();

  const int nthreads = worker_count(mode);
#ifdef _OPENMP
#pragma omp parallel num_threads(nthreads) if (nthreads > 1)
#endif
  {
    std::vector<std::uint64_t> local(words, 0);
#ifdef _OPENMP
#pragma omp for schedule(dynamic) nowait
#endif
    for (std::ptrdiff_t qi = 0; qi < static_cast<std::ptrdiff_t>(qs.size()); ++qi) {
      const AlgebraicInt& q = qs[qi];
      const cplx sq = embed1(K, q);
      const double aq = std::abs(sq);
      const double lw = log_weighted_norm(K, r, q);
      const double rad = eps / (aq * std::exp(r.r_max * lw));
      // Numerators whose ratio point can reach the window.
      const cplx pc = sq * win.center;
      const double prad = aq * (wrad + rad * (1.0 + 1e-6)) + 1e-9;
      double blo_f = (pc.imag() - prad) / iw;
      double bhi_f = (pc.imag() + prad) / iw;
      if (blo_f > bhi_f) std::swap(blo_f, bhi_f);
      const long long blo = static_cast<long long>(std::floor(blo_f));
      const long long bhi = static_cast<long long>(std::ceil(bhi_f));
      for (long long b = blo; b <= bhi; ++b) {
        const double dy = static_cast<double>(b) * iw - pc.imag();
        const double rem2 = prad * prad - dy * dy;
        if (rem2 < 0.0) continue;
        const double s = std::sqrt(rem2);
        const double amid = pc.real() - static_cast<double>(b) * w1.real();
        const long long alo = static_cast<long long>(std::floor(amid - s));
        const long long ahi = static_cast<long long>(std::ceil(amid + s));
        for (long long a = alo; a <= ahi; ++a) {
          const cplx sp = cplx(static_cast<double>(a), 0.0) + static_cast<double>(b) * w1;
          const cplx y = sp / sq;
          // Mark every cell within rad (plus slack toward dead) of y.
          const double reach = rad + 1e-12;
          int ix_lo = static_cast<int>(std::floor((y.real() - reach - x0) / cs));
          int ix_hi = static_cast<int>(std::floor((y.real() + reach - x0) / cs));
          int iy_lo = static_cast<int>(std::floor((y.imag() - reach - y0) / cs));
          int iy_hi = static_cast<int>(std::floor((y.imag() + reach - y0) / cs));
          ix_lo = std::max(ix_lo, 0);
          iy_lo = std::max(iy_lo, 0);
          ix_hi = std::min(ix_hi, side - 1);
          iy_hi = std::min(iy_hi, side - 1);
          for (int iy = iy_lo; iy <= iy_hi; ++iy) {
            const double cy = y0 + (iy + 0.5) * cs;
            const double ddy = std::max(0.0, std::abs(y.imag() - cy) - 0.5 * cs);
            for (int ix = ix_lo; ix <= ix_hi; ++ix) {
              const double cx = x0 + (ix + 0.5) * cs;
              const double ddx = std::max(0.0, std::abs(y.real() - cx) - 0.5 * cs);
              if (ddx * ddx + ddy * ddy <= reach * reach) {
                const std::size_t idx =
                    static_cast<std::size_t>(iy) * static_cast<std::size_t>(side) + ix;
                local[idx >> 6] |= std::uint64_t{1} << (idx & 63);
              }
            }
          }
        }
      }
    }
#ifdef _OPENMP
#pragma omp critical(badflow_grid_merge)
#endif
    {
      for (std::size_t w = 0; w < words; ++w) grid.dead[w] |= local[w];
    }
  }
  return grid;
}

std::vector<GridSurvey> dimension_survey(const NumberField& K, const WeightVector& r,
                                         const Window& win, double eps, int k_lo, int k_hi,
                                         double hmax_factor, Exec mode) {
  if (k_lo < 0 || k_hi < k_lo) throw std::invalid_argument("bad level range");
  std::vector<GridSurvey> out;
  for (int k = k_lo; k <= k_hi; ++k) {
    SurvivorGrid g = survivor_grid(K, r, win, eps, k, hmax_factor, mode);
    out.push_back(GridSurvey{k, g.alive_count(), eps, g.Hmax});
  }
  return out;
}

double box_count_dimension(const std::vector<GridSurvey>& levels) {
  if (levels.size() < 3)
    throw InsufficientData("box-counting needs at least three grid levels");
  std::vector<double> xs, ys;
  for (const GridSurvey& g : levels) {
    if (g.alive == 0)
      throw InsufficientData("survivor set empty at level " + std::to_string(g.k));
    xs.push_back(static_cast<double>(g.k) * std::log(2.0));
    ys.push_back(std::log(static_cast<double>(g.alive)));
  }
  return linear_fit(xs, ys).slope;
}

std::optional<std::string> survey_vacuity_note(const NumberField& K, const WeightVector& r,
                                               double eps) {
  std::string note;
  if (auto w = weight_vacuity_note(K, r)) note = *w;
  auto append = [&note](const std::string& s) {
    if (!note.empty()) note += "; ";
    note += s;
  };
  if (eps == 0.0)
    append("eps = 0: no obstructions, every cell survives and the slope is trivially 2");
  else if (eps >= 1.0)
    append("eps >= 1: unit-denominator disks alone cover the plane, expect an empty survey");
  if (note.empty()) return std::nullopt;
  return note;
}

std::size_t full_square_cells(int k) {
  if (k < 0 || k > 25) throw std::invalid_argument("level out of range");
  return std::size_t{1} << (2 * k);
}

std::size_t segment_cells(int k) {
  if (k < 0 || k > 25) throw std::invalid_argument("level out of range");
  const std::size_t side = std::size_t{1} << k;
  // Horizontal segment [0,1] x {1/2}: rows whose closed cell contains y = 1/2.
  std::size_t rows = 0;
  for (std::size_t j = 0; j < side; ++j) {
    const double lo = static_cast<double>(j) / static_cast<double>(side);
    const double hi = static_cast<double>(j + 1) / static_cast<double>(side);
    if (lo <= 0.5 && 0.5 <= hi) ++rows;
  }
  return rows * side;
}

std::size_t cantor_dust_cells(int k) {
  if (k < 0 || k > 25) throw std::invalid_argument("level out of range");
  const std::size_t side = std::size_t{1} << k;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < side; ++i) {
    const double lo = static_cast<double>(i) / static_cast<double>(side);
    const double hi = static_cast<double>(i + 1) / static_cast<double>(side);
    if (interval_meets_cantor(lo, hi, 2 * k + 8)) ++cnt;
  }
  return cnt * cnt;
}

}  // namespace badflow
