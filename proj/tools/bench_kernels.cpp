// Benchmark of the OpenMP kernels against the serial reference.  On a
// single-core host the two columns should read about the same; the point is
// the comparison, not the absolute numbers.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "bbmlab/grid.hpp"
#include "bbmlab/kernels.hpp"
#include "bbmlab/profiles.hpp"

using namespace bbmlab;
using Clock = std::chrono::steady_clock;

namespace {

template <class F>
double time_ms(F&& f, int reps) {
  f();  // warm up
  const auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) f();
  const auto t1 = Clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  int threads = 4;
  if (argc > 1) threads = std::atoi(argv[1]);

  const std::size_t n = 1 << 21;
  std::vector<double> a(n), b(n), w(n), out(n);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = unif(rng);
    b[i] = unif(rng);
    w[i] = unif(rng);
  }

  std::printf("%-22s %12s %12s %8s\n", "kernel", "serial[ms]", "omp[ms]",
              "speedup");
  auto row = [&](const char* name, double ts, double tp) {
    std::printf("%-22s %12.3f %12.3f %8.2f\n", name, ts, tp, ts / tp);
  };

  kernels::set_threads(threads);
  row("sum (2^21)", time_ms([&] { kernels::serial::sum(a); }, 20),
      time_ms([&] { kernels::omp::sum(a); }, 20));
  row("dot (2^21)", time_ms([&] { kernels::serial::dot(a, b); }, 20),
      time_ms([&] { kernels::omp::dot(a, b); }, 20));
  row("dot3 (2^21)", time_ms([&] { kernels::serial::dot3(a, b, w); }, 20),
      time_ms([&] { kernels::omp::dot3(a, b, w); }, 20));
  row("square (2^21)", time_ms([&] { kernels::serial::square(a, out); }, 20),
      time_ms([&] { kernels::omp::square(a, out); }, 20));
  row("stage3 (2^21)",
      time_ms([&] { kernels::serial::stage3(a, 0.3, b, 0.7, w, out); }, 20),
      time_ms([&] { kernels::omp::stage3(a, 0.3, b, 0.7, w, out); }, 20));

  // ansatz assembly at production size (profile interpolation inner loop)
  ProfileFamily fam = build_family(0.5, OperatorConfig{60.0, 2048, 0.0});
  const double Y0 = 10.0;
  const double mu0 = speed_from_apex(Y0, fam.alpha);
  AnsatzState st{{-mu0, mu0, 0.5 * (Y0 + 2), -0.5 * (Y0 + 2)}, Y0};
  GridFunction proto(512.0, 16384);
  auto assemble = [&] { ansatz_cut_grid(fam, st, proto, false); };
  const double t_assemble = time_ms(assemble, 5);
  std::printf("%-22s %12.3f %12s %8s\n", "ansatz (16384)", t_assemble, "-", "-");
  return 0;
}
