#pragma once

// Test-only reference implementations, kept independent of the library's
// estimators and training code.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

// Plug-in MI in bits of a dense count table, summed directly from the
// definition sum p(x,y) log2(p(x,y) / (p(x) p(y))).
inline double mutual_information(const std::vector<std::vector<std::uint64_t>>& t) {
  double n = 0.0;
  std::vector<double> px(t.size(), 0.0), py(t.empty() ? 0 : t[0].size(), 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < t[i].size(); ++j) {
      n += static_cast<double>(t[i][j]);
      px[i] += static_cast<double>(t[i][j]);
      py[j] += static_cast<double>(t[i][j]);
    }
  }
  long double mi = 0.0L;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < t[i].size(); ++j) {
      if (t[i][j] == 0) {
        continue;
      }
      const long double pxy = static_cast<long double>(t[i][j]) / n;
      mi += pxy * std::log2(pxy / ((px[i] / n) * (py[j] / n)));
    }
  }
  return static_cast<double>(mi);
}

// Central difference of f at x along coordinate k.
inline double central_difference(const std::function<double(const std::vector<double>&)>& f,
                                  std::vector<double> x, std::size_t k, double h) {
  const double x0 = x[k];
  x[k] = x0 + h;
  const double up = f(x);
  x[k] = x0 - h;
  const double down = f(x);
  return (up - down) / (2.0 * h);
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct DenseRef {
  std::size_t rows = 0, cols = 0;
  std::vector<double> w; // row-major
};

// Mean squared error over all rows and outputs of a bias-free network,
// written out from scratch.
inline double mse(const std::vector<DenseRef>& layers, const std::function<double(double)>& act,
                  const std::vector<std::vector<double>>& xs,
                  const std::vector<std::vector<double>>& ys) {
  double sum = 0.0;
  std::size_t terms = 0;
  for (std::size_t r = 0; r < xs.size(); ++r) {
    std::vector<double> a = xs[r];
    for (const auto& l : layers) {
      std::vector<double> next(l.rows, 0.0);
      for (std::size_t i = 0; i < l.rows; ++i) {
        double z = 0.0;
        for (std::size_t j = 0; j < l.cols; ++j) {
          z += l.w[i * l.cols + j] * a[j];
        }
        next[i] = act(z);
      }
      a = std::move(next);
    }
    for (std::size_t k = 0; k < a.size(); ++k) {
      sum += (a[k] - ys[r][k]) * (a[k] - ys[r][k]);
      ++terms;
    }
  }
  return sum / static_cast<double>(terms);
}

} // namespace oracle
