#include "eiprobe/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <string>

#include "eiprobe/errors.hpp"
#include "eiprobe/format.hpp"

namespace eiprobe {

void ConvergencePolicy::validate(std::size_t bins) const {
  if (!(rel_threshold > 0.0 && rel_threshold < 1.0)) {
    throw ConfigError("relative threshold must lie in (0,1)");
  }
  if (start_samples < 1 || start_samples < static_cast<std::uint64_t>(bins) * bins) {
    throw ConfigError("start samples must be at least bins^2 = " + std::to_string(bins * bins));
  }
  if (max_samples < start_samples) {
    throw ConfigError("max samples must not be below start samples");
  }
}

ConvergenceResult doubling_until_converged(const SampleMeasure& measure,
                                           const ConvergencePolicy& policy) {
  policy.validate(0);
  ConvergenceResult r;
  std::uint64_t s = policy.start_samples;
  double prev = measure(s);
  r.trace.push_back({s, prev});
  while (true) {
    if (s > policy.max_samples / 2) {
      r.value = prev;
      r.samples_used = s;
      r.converged = false;
      return r;
    }
    const std::uint64_t next = 2 * s;
    const double v = measure(next);
    r.trace.push_back({next, v});
    const double delta = std::abs(v - prev);
    if (delta == 0.0 || delta < policy.rel_threshold * std::abs(v)) {
      r.value = v;
      r.samples_used = next;
      r.converged = true;
      return r;
    }
    prev = v;
    s = next;
  }
}

namespace {

struct LinearFit {
  double A = 0.0;
  double C = 0.0;
  double residual = 0.0;
};

LinearFit fit_at(std::span<const TracePoint> pts, double alpha) {
  const double n = static_cast<double>(pts.size());
  std::vector<double> f(pts.size());
  double fm = 0.0, vm = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    f[k] = std::pow(static_cast<double>(pts[k].samples), -alpha);
    fm += f[k];
    vm += pts[k].value;
  }
  fm /= n;
  vm /= n;
  double sff = 0.0, sfv = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    sff += (f[k] - fm) * (f[k] - fm);
    sfv += (f[k] - fm) * (pts[k].value - vm);
  }
  LinearFit out;
  out.A = sff > 0.0 ? sfv / sff : 0.0;
  out.C = vm - out.A * fm;
  if (out.C < 0.0) {
    double ff = 0.0, fv = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      ff += f[k] * f[k];
      fv += f[k] * pts[k].value;
    }
    out.A = fv / ff;
    out.C = 0.0;
  }
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double e = pts[k].value - (out.A * f[k] + out.C);
    out.residual += e * e;
  }
  return out;
}

double grid_alpha(std::size_t k) {
  return kAlphaMin *
         std::pow(kAlphaMax / kAlphaMin, static_cast<double>(k) / (kAlphaGridSize - 1));
}

} // namespace

ExtrapolationFit fit_extrapolation(std::span<const TracePoint> points) {
  std::set<std::uint64_t> distinct;
  for (const auto& p : points) {
    if (p.samples == 0) {
      throw ConfigError("extrapolation points need positive sample counts");
    }
    if (!std::isfinite(p.value)) {
      throw DomainError("extrapolation point value is not finite");
    }
    distinct.insert(p.samples);
  }
  if (distinct.size() < 4 || distinct.size() != points.size()) {
    throw ConfigError("extrapolation needs at least 4 points with distinct sample counts");
  }

  const bool constant = std::all_of(points.begin(), points.end(), [&](const TracePoint& p) {
    return p.value == points.front().value;
  });
  if (constant) {
    return {0.0, kAlphaMin, points.front().value, 0.0};
  }

  std::size_t best = 0;
  double best_res = fit_at(points, grid_alpha(0)).residual;
  for (std::size_t k = 1; k < kAlphaGridSize; ++k) {
    const double r = fit_at(points, grid_alpha(k)).residual;
    if (r < best_res) {
      best_res = r;
      best = k;
    }
  }

  // Golden-section refinement between the neighbouring grid values.
  double lo = grid_alpha(best == 0 ? 0 : best - 1);
  double hi = grid_alpha(std::min(best + 1, kAlphaGridSize - 1));
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - g * (hi - lo);
  double b = lo + g * (hi - lo);
  double fa = fit_at(points, a).residual;
  double fb = fit_at(points, b).residual;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    if (fa <= fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - g * (hi - lo);
      fa = fit_at(points, a).residual;
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + g * (hi - lo);
      fb = fit_at(points, b).residual;
    }
  }
  double alpha = 0.5 * (lo + hi);
  LinearFit lf = fit_at(points, alpha);
  const LinearFit grid_best = fit_at(points, grid_alpha(best));
  if (grid_best.residual < lf.residual) {
    alpha = grid_alpha(best);
    lf = grid_best;
  }
  return {lf.A, alpha, lf.C, lf.residual};
}

double extrapolate(const ExtrapolationFit& fit, double samples) {
  if (!(samples > 0.0)) {
    throw DomainError("extrapolation point must be positive");
  }
  return fit.A / std::pow(samples, fit.alpha) + fit.C;
}

std::vector<std::uint64_t> extrapolation_schedule() {
  std::vector<std::uint64_t> out;
  for (std::uint64_t k = 1; k <= 20; ++k) {
    out.push_back(k * 100'000);
  }
  return out;
}

void write_trace_csv(std::ostream& out, std::span<const TracePoint> trace) {
  out << schema_comment("convergence-trace") << "\n";
  out << "samples,value\n";
  for (const auto& p : trace) {
    out << p.samples << ',' << format_double(p.value) << '\n';
  }
}

} // namespace eiprobe
