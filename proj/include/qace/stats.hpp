// Copyright 2026 The QACE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Rank correlation and significance.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qace/error.hpp"

namespace qace::stats {

// Pair counts behind Kendall's tau-b. `score_sum` is C - D.
struct KendallCounts {
  std::int64_t pairs = 0;        // n(n-1)/2
  std::int64_t ties_x = 0;       // pairs tied in x (joint ties included)
  std::int64_t ties_y = 0;       // pairs tied in y (joint ties included)
  std::int64_t score_sum = 0;    // concordant - discordant
};

namespace internal {

inline std::int64_t TiedPairs(std::span<const double> sorted_values) {
  std::int64_t total = 0;
  std::size_t i = 0;
  while (i < sorted_values.size()) {
    std::size_t j = i + 1;
    while (j < sorted_values.size() && sorted_values[j] == sorted_values[i]) ++j;
    const auto t = static_cast<std::int64_t>(j - i);
    total += t * (t - 1) / 2;
    i = j;
  }
  return total;
}

// Sorts `v` ascending and returns the number of inversions removed.
inline std::int64_t MergeSortInversions(std::vector<double>& v,
                                        std::vector<double>& scratch,
                                        std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = MergeSortInversions(v, scratch, lo, mid) +
                       MergeSortInversions(v, scratch, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      scratch[k++] = v[j++];
    } else {
      scratch[k++] = v[i++];
    }
  }
  while (i < mid) scratch[k++] = v[i++];
  while (j < hi) scratch[k++] = v[j++];
  std::copy(scratch.begin() + lo, scratch.begin() + hi, v.begin() + lo);
  return swaps;
}

}  // namespace internal

// Knight's O(n log n) counting.
inline KendallCounts CountKendall(std::span<const double> xs,
                                  std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorKind::kRecordError, "kendall: length mismatch");
  }
  const std::size_t n = xs.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      throw Error(ErrorKind::kRecordError, "kendall: non-finite value");
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return xs[a] != xs[b] ? xs[a] < xs[b] : ys[a] < ys[b];
  });

  KendallCounts c;
  c.pairs = static_cast<std::int64_t>(n) * (static_cast<std::int64_t>(n) - 1) / 2;

  std::vector<double> x_sorted(n), y_by_x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x_sorted[i] = xs[order[i]];
    y_by_x[i] = ys[order[i]];
  }
  c.ties_x = internal::TiedPairs(x_sorted);

  std::int64_t joint = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && x_sorted[j] == x_sorted[i] && y_by_x[j] == y_by_x[i]) ++j;
    const auto t = static_cast<std::int64_t>(j - i);
    joint += t * (t - 1) / 2;
    i = j;
  }

  std::vector<double> scratch(n);
  const std::int64_t swaps = internal::MergeSortInversions(y_by_x, scratch, 0, n);
  c.ties_y = internal::TiedPairs(y_by_x);
  c.score_sum = c.pairs - c.ties_x - c.ties_y + joint - 2 * swaps;
  return c;
}

inline double TauB(const KendallCounts& c) {
  const std::int64_t vx = c.pairs - c.ties_x;
  const std::int64_t vy = c.pairs - c.ties_y;
  if (vx == 0 || vy == 0) {
    throw Error(ErrorKind::kDegenerateVariance,
                "kendall: every pair tied on one side");
  }
  return static_cast<double>(c.score_sum) /
         std::sqrt(static_cast<double>(vx) * static_cast<double>(vy));
}

inline double KendallTauB(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() < 2) {
    throw Error(ErrorKind::kInsufficientSamples, "kendall needs n >= 2");
  }
  return TauB(CountKendall(xs, ys));
}

inline double Pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error(ErrorKind::kRecordError, "pearson: length mismatch");
  if (xs.size() < 2) throw Error(ErrorKind::kInsufficientSamples, "pearson needs n >= 2");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorKind::kDegenerateVariance, "pearson: constant input");
  }
  return sxy / std::sqrt(sxx * syy);
}

// Continued fraction for the regularized incomplete beta (modified Lentz).
inline double BetaContinuedFraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) return h;
  }
  return h;
}

// I_x(a, b) for a, b > 0 and x in [0, 1].
inline double RegularizedIncompleteBeta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * BetaContinuedFraction(a, b, x) / a;
  }
  return 1.0 - front * BetaContinuedFraction(b, a, 1.0 - x) / b;
}

// Two-tailed P(|T| >= |t|) for Student's t with `df` degrees of freedom.
inline double StudentTTwoTailed(double t, double df) {
  if (std::isinf(t)) return 0.0;
  return RegularizedIncompleteBeta(0.5 * df, 0.5, df / (df + t * t));
}

struct TTest {
  double t = 0.0;
  double p = 1.0;
  bool exact = false;  // |r| == 1: p is exactly zero
};

// Significance of a correlation coefficient r over n samples under the null
// of no association: t = r sqrt((n-2)/(1-r^2)), df = n-2.
inline TTest CorrelationTTest(double r, std::size_t n) {
  if (n < 3) throw Error(ErrorKind::kInsufficientSamples, "t-test needs n >= 3");
  if (!(std::fabs(r) <= 1.0)) {
    throw Error(ErrorKind::kRecordError, "correlation outside [-1,1]");
  }
  if (std::fabs(r) == 1.0) {
    return {std::copysign(std::numeric_limits<double>::infinity(), r), 0.0, true};
  }
  const double df = static_cast<double>(n) - 2.0;
  const double t = r * std::sqrt(df / (1.0 - r * r));
  return {t, std::clamp(StudentTTwoTailed(t, df), 0.0, 1.0), false};
}

}  // namespace qace::stats
