// End-to-end acceptance gate.  Each numbered block checks one release
// criterion and prints a single [PASS]/[FAIL] line; the process exits 1 if
// any block fails.  Tolerances are pinned here on purpose — if a refactor
// moves a number, this binary is the place that notices.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "badflow/bad_approx.hpp"
#include "badflow/cli.hpp"
#include "badflow/dimension.hpp"
#include "badflow/game.hpp"
#include "badflow/lattice.hpp"
#include "badflow/reduction.hpp"

using namespace badflow;
namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

ComplexVector diag2(cplx z) { return ComplexVector{z, std::conj(z)}; }

// Average-rank Spearman correlation.
std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> out(v.size(), 0.0);
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double mid = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) out[idx[k]] = mid;
    i = j + 1;
  }
  return out;
}

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::vector<double> rx = ranks(xs), ry = ranks(ys);
  const double n = static_cast<double>(rx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) mx += rx[i], my += ry[i];
  mx /= n, my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  return dispatch(args, out, err);
}

struct Gate {
  bool all_ok = true;
  void report(int idx, const std::string& what, bool ok, const std::string& detail) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << idx << ". " << what;
    if (!detail.empty()) std::cout << "  (" << detail << ")";
    std::cout << "\n" << std::flush;
    all_ok = all_ok && ok;
  }
  template <typename Fn>
  void criterion(int idx, const std::string& what, Fn&& fn) {
    try {
      auto [ok, detail] = fn();
      report(idx, what, ok, detail);
    } catch (const std::exception& e) {
      report(idx, what, false, std::string("exception: ") + e.what());
    }
  }
};

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

}  // namespace

int main() {
  Gate gate;
  const std::vector<std::int64_t> Ds{1, 3};

  // 1. Norm-height chain 1 <= ||q||^{1/n} <= H(q) <= ||q||^{2 r_max} for every
  //    denominator with max |sigma(q)| <= 20, both quadratic fields.
  gate.criterion(1, "norm-height chain on Q(i) and Q(sqrt(-3))", [&] {
    const auto t0 = clock_type::now();
    std::size_t checked = 0, violations = 0;
    for (std::int64_t D : Ds) {
      const NumberField K = make_field(FieldSpec::quadratic(D));
      const WeightVector r = WeightVector::balanced(K.n);
      for (const AlgebraicInt& q : enumerate_bounded(K, 20.0)) {
        if (q.is_zero()) continue;
        const double wn = weighted_norm(K, r, q);
        const double H = height(K, r, q);
        const double lo = std::pow(wn, 1.0 / K.n);
        const double hi = std::pow(wn, 2.0 * r.r_max);
        const bool ok = lo >= 1.0 - 1e-9 && lo <= H * (1.0 + 1e-9) + 1e-9 &&
                        H <= hi * (1.0 + 1e-9) + 1e-9;
        if (!ok) ++violations;
        ++checked;
      }
    }
    const double dt = seconds_since(t0);
    return std::pair{violations == 0 && dt < 10.0,
                     std::to_string(checked) + " denominators, " +
                         std::to_string(violations) + " violations, " + fmt(dt) + " s"};
  });

  // 2. Every enumerated denominator lands in exactly one height band with a
  //    positive refinement level: no partition orphans.
  gate.criterion(2, "height-band partition has no orphans", [&] {
    std::size_t checked = 0, orphans = 0;
    for (std::int64_t D : Ds) {
      const NumberField K = make_field(FieldSpec::quadratic(D));
      const WeightVector r = WeightVector::balanced(K.n);
      const GameConstants C = pick_constants(K, r, 0.3, 1.0, 0.9);
      for (const AlgebraicInt& q : enumerate_bounded(K, 20.0)) {
        if (q.is_zero()) continue;
        ++checked;
        try {
          const PartitionIndex pi = partition_index(C, K, r, q);
          const double H = height(K, r, q);
          const bool in_band =
              pi.l >= 1 && H < C.H_level(pi.m + 1) && (pi.m == 0 || H >= C.H_level(pi.m));
          if (!in_band) ++orphans;
        } catch (const FieldError&) {
          ++orphans;
        }
      }
    }
    return std::pair{orphans == 0, std::to_string(checked) + " denominators, " +
                                       std::to_string(orphans) + " orphans"};
  });

  // 3. All resonant pairs of one (ball, band) configuration describe a single
  //    ratio point: p1 q2 == p2 q1 in exact integer arithmetic.
  gate.criterion(3, "resonant pairs per ball share their ratio point", [&] {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> U(-1.0, 1.0), E(-15.0, -13.0);
    std::uniform_int_distribution<std::int64_t> Coord(-4, 4);
    std::size_t configs = 0, nonempty = 0, violations = 0;
    for (std::int64_t D : Ds) {
      const NumberField K = make_field(FieldSpec::quadratic(D));
      const WeightVector r = WeightVector::balanced(K.n);
      const GameConstants C = pick_constants(K, r, 0.3, 1.0, 0.9);
      int c = 0;
      while (c < 50) {
        // half the balls sit exactly on a small ratio point, pinned to band 9
        // where the multiples number in the hundreds; the rest land at random,
        // where the sets are typically (vacuously) empty
        ComplexVector center;
        int band;
        if (c % 2 == 0) {
          const AlgebraicInt p{{Coord(rng), Coord(rng)}}, q{{Coord(rng), Coord(rng)}};
          if (q.is_zero()) continue;
          center = ratio_point(K, PairPQ{p, q});
          band = 9;
        } else {
          center = diag2(cplx(U(rng), U(rng)));
          band = 9 + c % 4;
        }
        const double rho = std::pow(10.0, E(rng));
        const auto pairs = resonant_pairs(K, r, C, center, rho, band, 1);
        ++configs;
        ++c;
        if (pairs.empty()) continue;
        ++nonempty;
        for (std::size_t j = 1; j < pairs.size(); ++j)
          if (!same_ratio(K, pairs[j], pairs[0])) ++violations;
      }
    }
    return std::pair{violations == 0 && nonempty >= 25,
                     std::to_string(configs) + " configs (" + std::to_string(nonempty) +
                         " nonempty), " + std::to_string(violations) + " violations"};
  });

  // 4. Box membership and the quality functional agree: z in Delta_eps(p, q)
  //    iff quality(z, -p, q) <= eps, away from a 1e-12 boundary shell.
  gate.criterion(4, "resonance box <=> quality sign map", [&] {
    const NumberField K = make_field(FieldSpec::quadratic(1));
    const WeightVector r = WeightVector::balanced(2);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> U(-1.5, 1.5), E(0.05, 0.5);
    std::uniform_int_distribution<std::int64_t> C(-6, 6);
    std::size_t checked = 0, disagreements = 0;
    while (checked < 1000) {
      const AlgebraicInt p{{C(rng), C(rng)}}, q{{C(rng), C(rng)}};
      if (q.is_zero()) continue;
      const double eps = E(rng);
      const DeltaBox box = delta_box(K, r, eps, p, q);
      cplx z0;
      if (checked % 2 == 0) {
        std::uniform_real_distribution<double> A(0.0, 2.0 * 3.14159265358979);
        std::uniform_real_distribution<double> Rr(0.0, 2.0);
        z0 = box.center[0] + std::polar(Rr(rng) * box.radius[0], A(rng));
      } else {
        z0 = cplx(U(rng), U(rng));
      }
      const ComplexVector z = diag2(z0);
      const double s = quality(K, r, z, neg(K, p), q);
      if (std::abs(s - eps) <= 1e-12) continue;
      if (box.contains(z) != (s <= eps)) ++disagreements;
      ++checked;
    }
    return std::pair{disagreements == 0, std::to_string(checked) + " samples, " +
                                             std::to_string(disagreements) + " disagreements"};
  });

  // 5. On the conjugate-diagonal slice the weighted quality collapses to the
  //    classical |q| |q z + p|.
  gate.criterion(5, "conjugate-diagonal quality identity", [&] {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    std::uniform_int_distribution<std::int64_t> C(-6, 6);
    std::size_t checked = 0, violations = 0;
    for (std::int64_t D : Ds) {
      const NumberField K = make_field(FieldSpec::quadratic(D));
      const WeightVector r = WeightVector::balanced(K.n);
      int done = 0;
      while (done < 500) {
        const AlgebraicInt p{{C(rng), C(rng)}}, q{{C(rng), C(rng)}};
        if (q.is_zero()) continue;
        const cplx z0(U(rng), U(rng));
        const ComplexVector z = conjugate_diagonal(K, z0);
        const double lhs = quality(K, r, z, p, q);
        const cplx q1 = embed1(K, q), p1 = embed1(K, p);
        const double rhs = std::abs(q1) * std::abs(q1 * z0 + p1);
        if (std::abs(lhs - rhs) > 1e-12 * std::max(1.0, rhs)) ++violations;
        ++checked;
        ++done;
      }
    }
    return std::pair{violations == 0, std::to_string(checked) + " samples, " +
                                          std::to_string(violations) + " violations"};
  });

  // 6. Flow contrast: ratio points escape at rate r_max; the pinned bounded
  //    witness stays above its regression constant; systole depth and the
  //    finite-height bad constant rank the same points.
  gate.criterion(6, "diagonal-flow escape vs boundedness", [&] {
    const NumberField K = make_field(FieldSpec::quadratic(1));
    const WeightVector r = WeightVector::balanced(2);

    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::int64_t> P(-3, 3), Q(-4, 4);
    int done = 0, bad_slopes = 0;
    while (done < 20) {
      const AlgebraicInt p{{P(rng), P(rng)}}, q{{Q(rng), Q(rng)}};
      if (q.is_zero()) continue;
      const ComplexVector z = ratio_point(K, PairPQ{p, q});
      const OrbitProfile prof = systole_profile(K, r, z, 12.0, 49, true, Exec::Parallel);
      const OrbitVerdict v = classify_orbit(prof, 0.05, 0.1);
      if (std::abs(v.tail_slope - (-r.r_max)) > 0.1 * r.r_max) ++bad_slopes;
      ++done;
    }

    // regression pin for z = sqrt(2)/2 + i/2, established once by the
    // denominator-enumeration oracle and frozen since
    const ComplexVector zb = diag2(cplx(0.70710678118654752, 0.5));
    const OrbitProfile pb = systole_profile(K, r, zb, 20.0, 81, true, Exec::Parallel);
    const double min_sys = *std::min_element(pb.systole.begin(), pb.systole.end());
    const double pin = 0.84090957825263291;
    const bool witness_ok = min_sys >= pin - 1e-9;

    std::mt19937_64 rng2(20240817);
    std::uniform_real_distribution<double> U01(0.0, 1.0);
    std::vector<double> xs, ys;
    for (int i = 0; i < 100; ++i) {
      const double re = U01(rng2), im = U01(rng2);
      const ComplexVector z = conjugate_diagonal(K, cplx(re, im));
      const OrbitProfile prof = systole_profile(K, r, z, 8.0, 33, true, Exec::Parallel);
      xs.push_back(*std::min_element(prof.systole.begin(), prof.systole.end()));
      ys.push_back(bad_constant_up_to_height(K, r, z, 40.0, 1.0, Exec::Parallel).value);
    }
    const double rho_s = spearman(xs, ys);

    const bool ok = bad_slopes == 0 && witness_ok && rho_s >= 0.8;
    return std::pair{ok, std::to_string(bad_slopes) + "/20 bad slopes, min systole " +
                             fmt(min_sys) + " vs pin " + fmt(pin) + ", spearman " +
                             fmt(rho_s)};
  });

  // 7. The blocking strategy survives independent audits against 100 seeded
  //    adversaries, and every limit point is certified eps-bad up to the
  //    strategy's own Hmax.
  gate.criterion(7, "game transcripts audit clean, limit points are bad", [&] {
    const NumberField K = make_field(FieldSpec::quadratic(1));
    const WeightVector r = WeightVector::balanced(2);
    std::size_t bad_audits = 0, bad_limits = 0;
    for (int s = 0; s < 50; ++s) {
      for (int kind = 0; kind < 2; ++kind) {
        GameConfig cfg;
        cfg.kind = GameKind::HP;
        cfg.beta = 0.3;
        cfg.gamma = 1.0;
        cfg.rounds = 40;
        cfg.seed = static_cast<std::uint64_t>(s);
        cfg.start = Ball{diag2(cplx(0.41, 0.37)), 0.9};
        StrategyABad A(K, r, 8);
        AdversaryRandom br(cfg.seed);
        AdversaryGreedy bg(cfg.seed);
        StrategyB& B = kind == 0 ? static_cast<StrategyB&>(br) : static_cast<StrategyB&>(bg);
        const Transcript t = run_game(cfg, A, B);
        if (!audit_transcript(t).legal) ++bad_audits;
        const WitnessReport wit =
            in_bad_eps(K, r, t.final_ball.center, A.constants()->eps, A.certificate_Hmax(),
                       Exec::Parallel);
        if (!wit.bad) ++bad_limits;
      }
    }
    return std::pair{bad_audits == 0 && bad_limits == 0,
                     "100 games, " + std::to_string(bad_audits) + " audit failures, " +
                         std::to_string(bad_limits) + " uncertified limits"};
  });

  // 8. LLL against exhaustive enumeration: the reduced first vector is within
  //    2^{3/2} of the true shortest, and the transform is unimodular.
  gate.criterion(8, "lattice reduction within 2^{3/2} of lambda_1", [&] {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> U(-5.0, 5.0);
    std::size_t violations = 0;
    for (int trial = 0; trial < 50; ++trial) {
      Matrix B;
      do {
        B.assign(4, std::vector<double>(4));
        for (auto& row : B)
          for (double& x : row) x = U(rng);
      } while (std::abs(det(B)) < 1e-3);
      const LLLResult red = lll_reduce(B);
      double b1 = 0.0;
      for (double x : red.basis[0]) b1 += x * x;
      b1 = std::sqrt(b1);
      const double lambda1 = shortest_vector(B).norm;
      const bool ok = lambda1 <= b1 * (1.0 + 1e-9) &&
                      b1 <= std::pow(2.0, 1.5) * lambda1 * (1.0 + 1e-9) &&
                      transform_det_abs(red.transform) == 1;
      if (!ok) ++violations;
    }
    return std::pair{violations == 0,
                     "50 lattices, " + std::to_string(violations) + " violations"};
  });

  // 9. Box-counting trend on the unit window: survivor slope decreases with
  //    eps, and the estimator recovers the calibration dimensions.
  gate.criterion(9, "dimension trend and calibration", [&] {
    const NumberField K = make_field(FieldSpec::quadratic(1));
    const WeightVector r = WeightVector::balanced(2);
    const Window win{cplx(0.5, 0.5), 0.5};
    const auto t0 = clock_type::now();
    const double s005 =
        box_count_dimension(dimension_survey(K, r, win, 0.05, 3, 8, 2.0, Exec::Parallel));
    const double s015 =
        box_count_dimension(dimension_survey(K, r, win, 0.15, 3, 8, 2.0, Exec::Parallel));
    const double s030 =
        box_count_dimension(dimension_survey(K, r, win, 0.30, 3, 8, 2.0, Exec::Parallel));
    const double dt = seconds_since(t0);

    // dyadic grids overcount the triadic dust at coarse levels (the estimate
    // converges from above), so the calibration fit starts deeper
    std::vector<GridSurvey> square, dust;
    for (int k = 4; k <= 13; ++k) {
      square.push_back(GridSurvey{k, full_square_cells(k), 0.0, 0.0});
      dust.push_back(GridSurvey{k, cantor_dust_cells(k), 0.0, 0.0});
    }
    const double sq = box_count_dimension(square);
    const double du = box_count_dimension(dust);
    const double dust_dim = std::log(4.0) / std::log(3.0);

    const bool ok = s005 >= s015 - 1e-12 && s015 >= s030 - 1e-12 &&
                    std::abs(sq - 2.0) <= 0.01 && std::abs(du - dust_dim) <= 0.07 &&
                    dt < 300.0;
    return std::pair{ok, "slopes " + fmt(s005) + " >= " + fmt(s015) + " >= " + fmt(s030) +
                             ", square " + fmt(sq) + ", dust " + fmt(du) + ", " + fmt(dt) +
                             " s"};
  });

  // 10. Identical config + seed reproduces byte-identical CSV artifacts.
  gate.criterion(10, "reruns are byte-identical", [&] {
    const fs::path base = fs::temp_directory_path() / "badflow_acceptance";
    fs::remove_all(base);
    const fs::path a = base / "a", b = base / "b";
    fs::create_directories(a);
    fs::create_directories(b);
    std::size_t mismatches = 0, artifacts = 0;
    const std::vector<std::vector<std::string>> jobs = {
        {"boxes", "dump", "--center", "0.5,-0.5", "--rho", "1e-14", "--band", "9",
         "--refine", "1"},
        {"dim", "survey", "--eps", "0.3", "--levels", "3:6", "--factor", "2", "--parallel"},
        {"orbit", "profile", "--z", "0.70710678118654752,0.5", "--exact", "--horizon", "8",
         "--steps", "33"},
        {"game", "run", "--rounds", "12", "--seed", "5", "--adversary", "greedy"},
    };
    for (const auto& job : jobs) {
      for (const fs::path& dir : {a, b}) {
        auto args = job;
        args.insert(args.end(), {"--out", dir.string()});
        if (run_cli(args) != 0) ++mismatches;
      }
    }
    for (const auto& entry : fs::directory_iterator(a)) {
      ++artifacts;
      if (slurp(entry.path()) != slurp(b / entry.path().filename())) ++mismatches;
    }
    fs::remove_all(base);
    return std::pair{mismatches == 0 && artifacts >= 6,
                     std::to_string(artifacts) + " artifacts compared, " +
                         std::to_string(mismatches) + " mismatches"};
  });

  std::cout << (gate.all_ok ? "acceptance: all criteria passed"
                            : "acceptance: FAILURES above")
            << "\n";
  return gate.all_ok ? 0 : 1;
}
