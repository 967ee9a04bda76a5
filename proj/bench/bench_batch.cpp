// Times the batched margin kernel: serial reference vs the OpenMP path.
#include <cstdio>
#include <cstdlib>

#include "seaqt/batch.hpp"

int main(int argc, char** argv) {
  using namespace seaqt;
  SampleSpec spec;
  spec.count = argc > 1 ? std::atoi(argv[1]) : 256;
  spec.max_dim = argc > 2 ? std::atoi(argv[2]) : 10;
  spec.min_dim = 4;
  spec.ascent_directions = 128;

  std::printf("batch margin kernel: %d samples, dims %d..%d, %d threads available\n",
              spec.count, spec.min_dim, spec.max_dim, omp_get_max_threads());

  // warm-up keeps first-touch allocation out of the timings
  (void)sample_margins({spec.seed, 8, spec.min_dim, spec.max_dim}, Exec::Serial);

  const double t0 = omp_get_wtime();
  const auto serial = sample_margins(spec, Exec::Serial);
  const double t1 = omp_get_wtime();
  const auto parallel = sample_margins(spec, Exec::Parallel);
  const double t2 = omp_get_wtime();

  double max_diff = 0.0;
  for (std::size_t i = 0; i < serial.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(serial[i].entropy_rate - parallel[i].entropy_rate));
    max_diff = std::max(max_diff, std::abs(serial[i].trace_rate - parallel[i].trace_rate));
  }
  const double ts = t1 - t0, tp = t2 - t1;
  std::printf("serial   %8.3f s\n", ts);
  std::printf("parallel %8.3f s   speedup %.2fx\n", tp, ts / tp);
  std::printf("result difference (must be 0): %g\n", max_diff);
  return max_diff == 0.0 ? 0 : 1;
}
