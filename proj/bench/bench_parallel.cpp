// Times the serial reference paths against the parallel kernels and checks
// that both produce byte-identical reports. Not run by ctest; invoke the
// `mrd_bench` binary directly.

#include <chrono>
#include <cstdio>

#include "mrd/harness.hpp"
#include "mrd/outcomes.hpp"
#include "mrd/prng.hpp"
#include "mrd/report.hpp"

#ifdef MRD_HAVE_OPENMP
#include <omp.h>
#endif

using namespace mrd;

namespace {

template <typename F>
double time_seconds(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

PotentialOutcomeTable random_table(int rows, int cols, std::uint64_t seed) {
  auto t = make_potential_table(rows, cols);
  Rng rng(seed);
  for (auto& table : t.tables) {
    for (auto& y : table) y = -5.0 + 10.0 * rng.next_double();
  }
  return t;
}

}  // namespace

int main() {
#ifdef MRD_HAVE_OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP disabled; parallel paths run serially\n");
#endif

  {
    const SmrdConfig config{10, 10, 5, 5};  // 63,504 assignments
    const auto table = random_table(10, 10, 3);
    EnumerateOptions serial;
    serial.parallel = false;
    EnumerateOptions parallel;

    std::string a, b;
    const double ts =
        time_seconds([&] { a = to_json(enumerate_smrd(config, table, serial)); });
    const double tp = time_seconds(
        [&] { b = to_json(enumerate_smrd(config, table, parallel)); });
    std::printf("enumerate 10x10/5x5: serial %.3f s, parallel %.3f s, "
                "speedup %.2fx, identical %s\n",
                ts, tp, ts / tp, a == b ? "yes" : "NO");
  }

  {
    const SmrdConfig config{200, 150, 90, 83};
    OutcomeModelConfig model;
    const auto table = generate_potential_outcomes(model, 200, 150, 42);
    McOptions serial;
    serial.replications = 2000;
    serial.seed = 1;
    serial.parallel = false;
    McOptions parallel = serial;
    parallel.parallel = true;

    std::string a, b;
    const double ts = time_seconds([&] {
      a = to_json(rerandomization_study(config, table,
                                        EstimandSpec::presets(), serial));
    });
    const double tp = time_seconds([&] {
      b = to_json(rerandomization_study(config, table,
                                        EstimandSpec::presets(), parallel));
    });
    std::printf("mc 200x150 x2000: serial %.3f s, parallel %.3f s, "
                "speedup %.2fx, identical %s\n",
                ts, tp, ts / tp, a == b ? "yes" : "NO");
  }
  return 0;
}
