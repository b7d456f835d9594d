#pragma once

// Independent reference implementations used only to check the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "premium/matrix.hpp"
#include "premium/rng.hpp"

namespace premium::testing {

using Fn = std::function<double(std::span<const double>)>;

// Shapley values as the average marginal contribution over all p! feature
// orderings, with the interventional value function evaluated directly.
inline std::vector<double> permutation_shapley(const Fn& f,
                                               std::span<const double> row,
                                               const Matrix& background) {
  const std::size_t p = row.size();
  auto value = [&](const std::vector<bool>& in) {
    double sum = 0.0;
    std::vector<double> z(p);
    for (std::size_t b = 0; b < background.rows(); ++b) {
      for (std::size_t j = 0; j < p; ++j) z[j] = in[j] ? row[j] : background(b, j);
      sum += f(z);
    }
    return sum / static_cast<double>(background.rows());
  };
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> phi(p, 0.0);
  double count = 0.0;
  do {
    std::vector<bool> in(p, false);
    double before = value(in);
    for (const std::size_t j : order) {
      in[j] = true;
      const double after = value(in);
      phi[j] += after - before;
      before = after;
    }
    count += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  for (double& v : phi) v /= count;
  return phi;
}

struct BruteSplit {
  std::size_t feature = 0;
  double threshold = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

// Exhaustive best split by total child SSE over every feature and every
// midpoint between consecutive distinct values. Ties keep the first found,
// scanning features then thresholds in increasing order.
inline BruteSplit brute_force_split(const Matrix& x, std::span<const double> y) {
  BruteSplit best;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    std::vector<double> values = x.column(j);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      const double t = values[k] + (values[k + 1] - values[k]) / 2.0;
      double sl = 0, sr = 0, nl = 0, nr = 0;
      for (std::size_t i = 0; i < x.rows(); ++i) {
        if (x(i, j) <= t) { sl += y[i]; nl += 1; } else { sr += y[i]; nr += 1; }
      }
      const double ml = sl / nl;
      const double mr = sr / nr;
      double sse = 0;
      for (std::size_t i = 0; i < x.rows(); ++i) {
        const double d = y[i] - (x(i, j) <= t ? ml : mr);
        sse += d * d;
      }
      if (sse < best.sse) best = {j, t, sse};
    }
  }
  return best;
}

// Random axis-aligned tree of the given depth over p features in [0, 1).
struct RandomTree {
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    double value = 0.0;
  };
  std::vector<Node> nodes;  // heap layout: children of i at 2i+1, 2i+2
  std::size_t depth = 0;

  static RandomTree make(std::size_t p, std::size_t depth, RandomStream& rng) {
    RandomTree t;
    t.depth = depth;
    const std::size_t count = (std::size_t{1} << (depth + 1)) - 1;
    t.nodes.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      if (2 * i + 1 < count) {
        t.nodes[i].feature = static_cast<int>(rng.uniform_index(p));
        t.nodes[i].threshold = rng.uniform01();
      } else {
        t.nodes[i].value = 20.0 * rng.uniform01() - 10.0;
      }
    }
    return t;
  }

  double operator()(std::span<const double> x) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
      i = x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold ? 2 * i + 1
                                                                             : 2 * i + 2;
    }
    return nodes[i].value;
  }
};

inline Matrix uniform_matrix(std::size_t rows, std::size_t cols, RandomStream& rng) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.uniform01();
  }
  return m;
}

}  // namespace premium::testing
