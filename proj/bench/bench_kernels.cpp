// Serial reference vs OpenMP kernels: median wall time over repeated calls.

#include <omp.h>

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "tempostyle/kernels.hpp"

namespace k = tempostyle::kernels;

namespace {

double median_ms(int reps, const std::function<void()>& fn) {
  fn();  // warm-up
  std::vector<double> t;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    t.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  std::nth_element(t.begin(), t.begin() + t.size() / 2, t.end());
  return t[t.size() / 2];
}

void report(const std::string& name, double serial, double omp) {
  std::printf("%-20s serial %9.3f ms   omp %9.3f ms   speedup %5.2fx\n", name.c_str(), serial, omp,
              serial / omp);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel benchmark"};
  int reps = 20;
  int threads = 0;
  int res = 128;
  app.add_option("--reps", reps, "Timed repetitions per kernel")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)");
  app.add_option("--res", res, "Frame resolution for the image kernels")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  if (threads > 0) omp_set_num_threads(threads);
  std::printf("openmp threads: %d\n", omp_get_max_threads());

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  // 12-gon centered in the frame.
  std::vector<tempostyle::Point2> poly;
  for (int i = 0; i < 12; ++i) {
    const double a = 2 * M_PI * i / 12;
    poly.push_back({res / 2.0 + 0.35 * res * std::cos(a), res / 2.0 + 0.3 * res * std::sin(a)});
  }
  std::vector<float> cov(static_cast<std::size_t>(res) * res);
  report("rasterize_coverage",
         median_ms(reps, [&] { k::rasterize_coverage_serial(poly, res, res, 8, cov); }),
         median_ms(reps, [&] { k::rasterize_coverage(poly, res, res, 8, cov); }));

  const int64_t n_frames = 64;
  std::vector<float> frames(static_cast<std::size_t>(n_frames) * 3 * res * res);
  for (auto& v : frames) v = static_cast<float>(2 * u(rng) - 1);
  report("coverage_moments",
         median_ms(reps, [&] { k::coverage_moments_serial(frames, n_frames, res, res); }),
         median_ms(reps, [&] { k::coverage_moments(frames, n_frames, res, res); }));

  const int64_t n_series = 100, length = 64;
  std::vector<double> series(static_cast<std::size_t>(n_series * length));
  for (auto& v : series) v = u(rng);
  report("pairwise_pearson",
         median_ms(reps, [&] { k::pairwise_pearson_serial(series, n_series, length); }),
         median_ms(reps, [&] { k::pairwise_pearson(series, n_series, length); }));

  const int64_t n = 1000, dim = 128;
  std::vector<double> x(static_cast<std::size_t>(n * dim));
  for (auto& v : x) v = u(rng);
  report("mean_covariance",
         median_ms(reps, [&] { k::mean_covariance_serial(x, n, dim); }),
         median_ms(reps, [&] { k::mean_covariance(x, n, dim); }));
  return 0;
}
