#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rppg/image.hpp"
#include "rppg/ingest.hpp"
#include "rppg/luminance.hpp"
#include "rppg/pipeline.hpp"
#include "rppg/reference.hpp"
#include "rppg/spectral.hpp"
#include "rppg/vitals.hpp"

using namespace rppg;

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
double time_ms(F&& fn, int reps) {
  // warm-up
  fn();
  const auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = Clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void print_row(const char* name, double serial_ms, double parallel_ms, double max_abs_diff) {
  std::printf("%-28s %12.3f %12.3f %9.2fx %12.3g\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms, max_abs_diff);
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (built without OpenMP)\n");
#endif
  std::printf("%-28s %12s %12s %10s %12s\n", "kernel", "serial ms", "parallel ms", "speedup",
              "max |diff|");

  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const PipelineConfig cfg;

  {  // spectrum of a 20 s trace
    std::vector<double> x(4096);
    for (auto& v : x) v = 120.0 + gauss(rng);
    std::vector<double> a, b;
    const double ts = time_ms([&] { a = ref::dft_magnitude(x); }, 3);
    const double tp = time_ms([&] { b = magnitude_spectrum(x); }, 3);
    print_row("magnitude_spectrum 4096", ts, tp, max_diff(a, b));
  }

  {  // Welch estimate, long recording
    std::vector<double> x(3600);
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = std::sin(2.0 * M_PI * 1.2 * static_cast<double>(i) / 30.0) + 0.3 * gauss(rng);
    Psd a, b;
    const double ts = time_ms([&] { a = ref::welch_naive(x, 30.0, cfg); }, 3);
    const double tp = time_ms([&] { b = welch_psd(x, 30.0, cfg); }, 3);
    print_row("welch_psd 3600", ts, tp, max_diff(a.power, b.power));
  }

  {  // detrend, banded vs dense
    std::vector<double> x(512);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.01 * static_cast<double>(i) + gauss(rng);
    std::vector<double> a, b;
    const double ts = time_ms([&] { a = ref::detrend_dense(x, 10.0); }, 1);
    const double tp = time_ms([&] { b = detrend(x, 10.0); }, 100);
    print_row("detrend 512", ts, tp, max_diff(a, b));
  }

  {  // masked channel means on a 720p frame
    const int w = 1280, h = 720;
    Image frame(w, h);
    std::uniform_int_distribution<int> level(0, 255);
    for (auto& px : frame.pixels) px = static_cast<std::uint8_t>(level(rng));
    Mask mask;
    mask.width = w;
    mask.height = h;
    mask.bits.assign(static_cast<std::size_t>(w) * h, 0);
    for (int y = h / 4; y < 3 * h / 4; ++y)
      for (int x = w / 4; x < 3 * w / 4; ++x)
        mask.bits[static_cast<std::size_t>(y) * w + x] = 1;

    ChannelMeans a{}, b{};
    const double ts = time_ms([&] { a = ref::masked_means_naive(frame, mask); }, 10);
    const double tp = time_ms([&] { b = extract_roi_means(frame, mask); }, 10);
    const double diff =
        std::max({std::abs(a.r - b.r), std::abs(a.g - b.g), std::abs(a.b - b.b)});
    print_row("extract_roi_means 720p", ts, tp, diff);
  }

  {  // per-frame stats over a short clip
    std::vector<Image> frames(60, Image(640, 480));
    std::uniform_int_distribution<int> level(0, 255);
    for (auto& f : frames)
      for (auto& px : f.pixels) px = static_cast<std::uint8_t>(level(rng));

    std::vector<FrameStats> a, b;
    const double ts = time_ms(
        [&] {
          a.clear();
          for (const auto& f : frames) a.push_back(frame_stats(f));
        },
        3);
    const double tp = time_ms([&] { b = frame_stats_batch(frames); }, 3);
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      diff = std::max(diff, std::abs(a[i].mean_gray - b[i].mean_gray));
    print_row("frame_stats 60x480p", ts, tp, diff);
  }

  return 0;
}
