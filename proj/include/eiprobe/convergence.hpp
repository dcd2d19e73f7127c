#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace eiprobe {

struct ConvergencePolicy {
  std::uint64_t start_samples = 100'000;
  std::uint64_t max_samples = 100'000'000;
  double rel_threshold = 0.05;

  // `bins` is the per-node bin count of the measurement; the starting sample
  // count must populate a bins x bins table on average once per cell.
  void validate(std::size_t bins) const;
};

struct TracePoint {
  std::uint64_t samples = 0;
  double value = 0.0;
};

struct ConvergenceResult {
  double value = 0.0;
  std::uint64_t samples_used = 0;
  bool converged = false;
  std::vector<TracePoint> trace; // every evaluation, in order
};

using SampleMeasure = std::function<double(std::uint64_t samples)>;

// Evaluates measure at s, 2s, 4s, ... and stops once the change over the
// last doubling, |v(2s) - v(s)|, is below rel_threshold * |v(2s)|. When the
// next doubling would pass max_samples the last value is returned with
// converged = false.
ConvergenceResult doubling_until_converged(const SampleMeasure& measure,
                                           const ConvergencePolicy& policy);

// Model v(s) = A / s^alpha + C.
struct ExtrapolationFit {
  double A = 0.0;
  double alpha = 0.0;
  double C = 0.0;
  double residual = 0.0; // sum of squared errors over the fitted points
};

inline constexpr std::size_t kAlphaGridSize = 200;
inline constexpr double kAlphaMin = 0.05;
inline constexpr double kAlphaMax = 2.0;

// Least-squares fit of the power-law model. alpha is scanned over a
// log-spaced grid on [kAlphaMin, kAlphaMax], (A, C) are solved linearly at
// each alpha (C clamped at 0), and the best grid cell is refined by a
// golden-section search over its neighbours.
ExtrapolationFit fit_extrapolation(std::span<const TracePoint> points);

double extrapolate(const ExtrapolationFit& fit, double samples);

// 100K, 200K, ..., 2M.
std::vector<std::uint64_t> extrapolation_schedule();

void write_trace_csv(std::ostream& out, std::span<const TracePoint> trace);

} // namespace eiprobe
