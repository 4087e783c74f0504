#pragma once

// Support-interval search for two well-separated components: count samples in
// windows around grid points at doubling scales and look for a clean
// two-cluster split of the heavy points.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hermix/errors.hpp"
#include "hermix/estimator.hpp"

namespace hermix {

struct IntervalSearchConfig {
  double w_min = 0.4;
  double s_min = 0.5;
  double r_hint = 0.0;  // <= 0: max sample - min sample
  double heavy_fraction = 0.5;
  double sample_constant = 50.0;  // c0 in the minimum-n rule
};

struct IntervalPair {
  Interval i1;
  Interval i2;
  int j_star = -1;
  double t = 0.0;
  double s_prime = 0.0;
  std::vector<double> grid_points;  // accepted heavy set Q at j_star
};

using ClusterSplit = std::pair<std::vector<double>, std::vector<double>>;

/// Splits sorted points at the single internal gap exceeding `gap`; both
/// sides must have diameter below `gap`.
inline std::optional<ClusterSplit> cluster_grid(std::span<const double> points, double gap) {
  if (points.size() < 2) return std::nullopt;
  std::optional<std::size_t> cut;
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    if (points[k + 1] - points[k] > gap) {
      if (cut) return std::nullopt;
      cut = k + 1;
    }
  }
  if (!cut) return std::nullopt;
  const std::size_t c = *cut;
  if (!(points[c - 1] - points.front() < gap) || !(points.back() - points[c] < gap)) return std::nullopt;
  return ClusterSplit{std::vector<double>(points.begin(), points.begin() + c),
                      std::vector<double>(points.begin() + c, points.end())};
}

/// Window half-width for scale s'.
inline double window_half_width(double s_prime, double w_min) {
  const double k = 4.0 / (0.4 * std::sqrt(2.0 * M_PI));
  return std::max(s_prime + std::sqrt(2.0 * std::log(k / w_min)), 2.0 * s_prime + std::sqrt(2.0 * std::log(k)));
}

inline std::size_t minimum_interval_samples(const IntervalSearchConfig& cfg, double r_hint) {
  const double ratio = std::max(r_hint / cfg.s_min, M_E * M_E);
  const double lr = std::log(ratio);
  return static_cast<std::size_t>(std::ceil(cfg.sample_constant / cfg.w_min * lr * std::log(lr)));
}

inline IntervalPair find_intervals(std::span<const double> samples, const IntervalSearchConfig& cfg = {}) {
  if (!(cfg.w_min > 0.0 && cfg.w_min <= 0.5)) fail(ErrorCode::InvalidArgument, "w_min must lie in (0, 1/2]");
  if (!(cfg.s_min > 0.0)) fail(ErrorCode::InvalidArgument, "s_min must be positive");
  if (samples.empty()) fail(ErrorCode::EmptySample, "no samples");
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double r_hint = cfg.r_hint > 0.0 ? cfg.r_hint : std::max(*hi_it - *lo_it, cfg.s_min);
  const std::size_t need = minimum_interval_samples(cfg, r_hint);
  if (samples.size() < need)
    fail(ErrorCode::InsufficientSamples,
         "need at least " + std::to_string(need) + " samples, got " + std::to_string(samples.size()));

  const int m = static_cast<int>(std::ceil(std::log2(r_hint / cfg.s_min))) + 2;
  const std::size_t batch = samples.size() / static_cast<std::size_t>(m + 1);
  if (batch == 0) fail(ErrorCode::InsufficientSamples, "too few samples for the number of scales");

  std::optional<IntervalPair> best;
  for (int j = 0; j <= m; ++j) {
    std::vector<double> part(samples.begin() + j * batch, samples.begin() + (j + 1) * batch);
    std::sort(part.begin(), part.end());
    const double sp = std::ldexp(cfg.s_min, j);
    const double t = window_half_width(sp, cfg.w_min);
    const double threshold = cfg.heavy_fraction * cfg.w_min * static_cast<double>(part.size());
    // grid points whose window can contain any sample
    const long k_lo = static_cast<long>(std::floor((part.front() - t) / sp));
    const long k_hi = static_cast<long>(std::ceil((part.back() + t) / sp));
    std::vector<double> q;
    for (long k = k_lo; k <= k_hi; ++k) {
      const double y = k * sp;
      const auto a = std::lower_bound(part.begin(), part.end(), y - t);
      const auto b = std::upper_bound(part.begin(), part.end(), y + t);
      if (static_cast<double>(b - a) > threshold) q.push_back(y);
    }
    const auto split = cluster_grid(q, 4.0 * t);
    if (!split) continue;
    IntervalPair out;
    out.i1 = {split->first.front() - sp, split->first.back() + sp};
    out.i2 = {split->second.front() - sp, split->second.back() + sp};
    out.j_star = j;
    out.t = t;
    out.s_prime = sp;
    out.grid_points = std::move(q);
    const double len = std::max(out.i1.length(), out.i2.length());
    if (!(out.i2.center() - out.i1.center() > 4.0 * len)) continue;
    best = std::move(out);
  }
  if (!best) fail(ErrorCode::NoValidPartition, "no scale admits a two-cluster split of the heavy grid points");
  return *best;
}

}  // namespace hermix
