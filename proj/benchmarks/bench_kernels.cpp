// Serial vs OpenMP timings for the data-parallel kernels, on workloads sized
// like the acceptance experiments.  Also cross-checks that both paths return
// identical results, since that is the whole point of keeping the serial
// reference.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "badflow/bad_approx.hpp"
#include "badflow/dimension.hpp"
#include "badflow/field.hpp"
#include "badflow/lattice.hpp"
#include "badflow/parallel.hpp"

using namespace badflow;

namespace {

double time_ms(const std::function<void()>& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void report(const std::string& name, double serial_ms, double parallel_ms, bool same) {
  std::printf("%-28s %10.1f ms %10.1f ms   x%.2f   %s\n", name.c_str(), serial_ms,
              parallel_ms, parallel_ms > 0 ? serial_ms / parallel_ms : 0.0,
              same ? "identical" : "MISMATCH");
}

}  // namespace

int main() {
  const NumberField K = make_field(FieldSpec::quadratic(1));
  const WeightVector r = WeightVector::balanced(2);

  std::printf("%-28s %13s %13s %7s\n", "kernel", "serial", "parallel", "speedup");
  std::printf("workers available: %d\n\n", worker_count(Exec::Parallel));

  {
    std::vector<AlgebraicInt> a, b;
    const double ts = time_ms([&] { a = enumerate_bounded(K, 60.0, Exec::Serial); });
    const double tp = time_ms([&] { b = enumerate_bounded(K, 60.0, Exec::Parallel); });
    report("enumerate_bounded M=60", ts, tp, a == b);
  }

  {
    const ComplexVector z{cplx(0.3181, 0.4142), cplx(0.3181, -0.4142)};
    WitnessReport a, b;
    const double ts = time_ms([&] { a = in_bad_eps(K, r, z, 1e-3, 4000.0, Exec::Serial); });
    const double tp =
        time_ms([&] { b = in_bad_eps(K, r, z, 1e-3, 4000.0, Exec::Parallel); });
    report("in_bad_eps Hmax=4e3", ts, tp,
           a.bad == b.bad && a.min_quality == b.min_quality &&
               a.pairs_checked == b.pairs_checked);
  }

  {
    const ComplexVector z{cplx(0.3181, 0.4142), cplx(0.3181, -0.4142)};
    BadConstantResult a, b;
    const double ts =
        time_ms([&] { a = bad_constant_up_to_height(K, r, z, 70.0, 1.0, Exec::Serial); });
    const double tp =
        time_ms([&] { b = bad_constant_up_to_height(K, r, z, 70.0, 1.0, Exec::Parallel); });
    report("bad_constant Qmax=70", ts, tp,
           a.value == b.value && a.argmin.p == b.argmin.p && a.argmin.q == b.argmin.q);
  }

  {
    const ComplexVector z{cplx(0.707106, 0.5), cplx(0.707106, -0.5)};
    OrbitProfile a, b;
    const double ts = time_ms([&] { a = systole_profile(K, r, z, 12.0, 49, true, Exec::Serial); });
    const double tp =
        time_ms([&] { b = systole_profile(K, r, z, 12.0, 49, true, Exec::Parallel); });
    report("systole_profile 49 steps", ts, tp, a.systole == b.systole);
  }

  {
    const Window win{cplx(0.5, 0.5), 0.5};
    SurvivorGrid a, b;
    const double ts =
        time_ms([&] { a = survivor_grid(K, r, win, 0.15, 8, 8.0, Exec::Serial); });
    const double tp =
        time_ms([&] { b = survivor_grid(K, r, win, 0.15, 8, 8.0, Exec::Parallel); });
    report("survivor_grid level 8", ts, tp, a.dead == b.dead);
  }

  return 0;
}
