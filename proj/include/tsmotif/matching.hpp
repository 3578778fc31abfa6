#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "tsmotif/distance.hpp"
#include "tsmotif/errors.hpp"
#include "tsmotif/recording.hpp"

namespace tsmotif {

/// Occurrences of a motif in one series, each no farther than the
/// adaptive threshold f(D). The closest match always qualifies.
struct MatchSet {
  std::vector<std::pair<std::size_t, double>> entries;  // (start, distance), ascending distance
  double threshold = 0.0;
};

/// f(D) = max(mean(D) - 2 std(D), min(D)), over the finite entries of D.
inline double match_threshold(const std::vector<double>& profile) {
  double mean = 0.0, lowest = std::numeric_limits<double>::infinity();
  std::size_t count = 0;
  for (double d : profile) {
    if (!std::isfinite(d)) continue;
    mean += d;
    lowest = std::min(lowest, d);
    ++count;
  }
  if (count == 0) throw data_error("match_threshold: no finite profile entries");
  mean /= static_cast<double>(count);
  double var = 0.0;
  for (double d : profile) {
    if (!std::isfinite(d)) continue;
    var += (d - mean) * (d - mean);
  }
  var /= static_cast<double>(count);
  return std::max(mean - 2.0 * std::sqrt(var), lowest);
}

/// Greedy minima-first selection under f(D) with an exclusion zone of
/// half the query length; positions crossing an artifact boundary are
/// masked out before thresholding.
inline MatchSet match(const std::vector<double>& q, const Series& t) {
  const std::size_t m = q.size();
  if (m < 1 || m > t.size())
    throw std::invalid_argument("match: need 1 <= len(q) <= len(t)");
  std::vector<double> profile = distance_profile(q, t).distances;
  for (std::size_t i = 0; i < profile.size(); ++i)
    if (!window_is_contiguous(t.boundaries, i, m))
      profile[i] = std::numeric_limits<double>::infinity();

  MatchSet result;
  result.threshold = match_threshold(profile);
  const std::size_t zone = std::max<std::size_t>(1, m / 2);
  for (;;) {
    std::size_t best_i = profile.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < profile.size(); ++i)
      if (profile[i] < best_d) {
        best_d = profile[i];
        best_i = i;
      }
    if (best_i == profile.size() || best_d > result.threshold) break;
    result.entries.emplace_back(best_i, best_d);
    const std::size_t lo = best_i >= zone ? best_i - zone + 1 : 0;
    const std::size_t hi = std::min(profile.size(), best_i + zone);
    for (std::size_t i = lo; i < hi; ++i)
      profile[i] = std::numeric_limits<double>::infinity();
  }
  return result;
}

inline double mean_match_distance(const std::vector<double>& q, const Series& t) {
  const MatchSet set = match(q, t);
  double acc = 0.0;
  for (const auto& [start, dist] : set.entries) acc += dist;
  return acc / static_cast<double>(set.entries.size());
}

}  // namespace tsmotif
