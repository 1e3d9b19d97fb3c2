// Serial reference vs OpenMP kernels: wall-clock per call and max deviation.
//
// Usage: bench_kernels [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>

#include "jrmpc/kernels.hpp"

using namespace jrmpc;

namespace {

template <typename F>
double best_ms(int repeats, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 5;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);

  std::printf("threads=%d\n", kernel_threads());
  std::printf("%8s %6s %-18s %12s %12s %8s %12s\n", "N", "K", "kernel", "serial_ms", "omp_ms",
              "speedup", "max_abs_diff");
  const std::pair<int, int> sizes[] = {{2000, 200}, {4000, 400}, {8000, 800}, {16000, 800}};
  for (const auto& [n, k] : sizes) {
    Points pts(3, n);
    for (int i = 0; i < n; ++i) pts.col(i) = Vec3(g(rng), g(rng), g(rng));
    Points means(3, k);
    for (int j = 0; j < k; ++j) means.col(j) = Vec3(g(rng), g(rng), g(rng));
    const PointSet set(0, pts);
    const MixtureModel model = MixtureModel::with_uniform_priors(
        means, Eigen::VectorXd::Constant(k, 0.05), 0.1, sphere_volume(0.5), 1e-3);
    const RigidTransform t(axis_angle(Vec3(0, 0, 1), 0.3), Vec3(0.1, -0.2, 0.05));

    ResponsibilityMatrix rs, rp;
    const double es = best_ms(repeats, [&] { rs = serial::e_step(set, t, model); });
    const double ep = best_ms(repeats, [&] { rp = e_step(set, t, model); });
    std::printf("%8d %6d %-18s %12.3f %12.3f %8.2f %12.3e\n", n, k, "e_step", es, ep, es / ep,
                (rs.alpha - rp.alpha).cwiseAbs().maxCoeff());

    SetMoments ms, mp;
    const double as = best_ms(repeats, [&] { ms = serial::accumulate_moments(set, rs); });
    const double ap = best_ms(repeats, [&] { mp = accumulate_moments(set, rs); });
    std::printf("%8d %6d %-18s %12.3f %12.3f %8.2f %12.3e\n", n, k, "accumulate_moments", as, ap,
                as / ap, (ms.weighted_sum - mp.weighted_sum).cwiseAbs().maxCoeff());

    Eigen::VectorXd ss, sp;
    const double ws = best_ms(repeats, [&] { ss = serial::weighted_scatter(set, t, rs, means); });
    const double wp = best_ms(repeats, [&] { sp = weighted_scatter(set, t, rs, means); });
    std::printf("%8d %6d %-18s %12.3f %12.3f %8.2f %12.3e\n", n, k, "weighted_scatter", ws, wp,
                ws / wp, (ss - sp).cwiseAbs().maxCoeff());
  }
  return 0;
}
