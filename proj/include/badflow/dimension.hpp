// Box-counting laboratory for the badly-approximable set, restricted to the
// conjugate-diagonal slice z -> (z, conj z) of a quadratic field.  On that
// slice every obstruction box pulls back to a planar disk, so survivors of a
// dyadic grid refinement can be computed by disk-vs-cell geometry alone.
//
// The obstruction list at grid level k is truncated at heights comparable to
// the cell size (disks much smaller than a cell cannot remove one), which is
// what makes the survey cost scale with the grid rather than with eps^{-2}.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "badflow/bad_approx.hpp"
#include "badflow/field.hpp"
#include "badflow/parallel.hpp"

namespace badflow {

struct InsufficientData : FieldError {
  using FieldError::FieldError;
};

// Axis-aligned square [cx - half, cx + half] x [cy - half, cy + half].
struct Window {
  cplx center{0.0, 0.0};
  double half = 0.5;
};

// Survivor bitmap at one refinement level: 2^k x 2^k cells, row-major, one bit
// per cell (set = dead).
struct SurvivorGrid {
  int k = 0;
  Window win;
  double eps = 0.0;
  double Hmax = 0.0;  // height cutoff actually applied
  std::vector<std::uint64_t> dead;
  int side() const { return 1 << k; }
  double cell_size() const { return 2.0 * win.half / static_cast<double>(side()); }
  bool alive(int ix, int iy) const;
  std::size_t alive_count() const;
};

// Lift a slice point to the full target vector (z, conj z).  Quadratic fields
// only; other degrees need expansion coordinates this lab does not provide.
ComplexVector conjugate_diagonal(const NumberField& K, cplx z);

// Mark every cell touched by an obstruction disk of height at most
// hmax_factor * eps / cell_size as dead.  eps = 0 keeps every cell alive.
SurvivorGrid survivor_grid(const NumberField& K, const WeightVector& r, const Window& win,
                           double eps, int k, double hmax_factor = 8.0,
                           Exec mode = Exec::Serial);

struct GridSurvey {
  int k = 0;
  std::size_t alive = 0;
  double eps = 0.0;
  double Hmax = 0.0;
};

std::vector<GridSurvey> dimension_survey(const NumberField& K, const WeightVector& r,
                                         const Window& win, double eps, int k_lo, int k_hi,
                                         double hmax_factor = 8.0, Exec mode = Exec::Serial);

// Least-squares slope of log N_k against k log 2; the box-counting dimension
// estimate.  Throws InsufficientData on fewer than three levels or an empty
// survivor set.
double box_count_dimension(const std::vector<GridSurvey>& levels);

// Human-readable caveats for a planned survey (degenerate weights, eps so
// large the whole window dies, ...).  Empty when nothing is noteworthy.
std::optional<std::string> survey_vacuity_note(const NumberField& K, const WeightVector& r,
                                               double eps);

// Synthetic calibration sets, counted with the same dyadic grids on [0,1]^2:
// the full square (slope 2), a horizontal segment (slope 1), and the
// middle-thirds Cantor dust C x C (slope log 4 / log 3).
std::size_t full_square_cells(int k);
std::size_t segment_cells(int k);
std::size_t cantor_dust_cells(int k);

}  // namespace badflow
