#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "tsmotif/errors.hpp"
#include "tsmotif/fft.hpp"
#include "tsmotif/recording.hpp"

namespace tsmotif {

// Windows with population std below this are treated as constant.
inline constexpr double kDegenerateStd = 1e-8;

// Queries at least this long take the FFT sliding-dot-product path.
inline constexpr std::size_t kFftMinQueryLen = 32;

struct DistanceProfile {
  std::vector<double> distances;
  std::size_t query_length = 0;
};

inline std::vector<double> z_normalize(const std::vector<double>& x) {
  if (x.empty()) throw std::invalid_argument("z_normalize: empty input");
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> out(x.size());
  if (sd < kDegenerateStd) return out;  // constant input maps to the zero vector
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) / sd;
  return out;
}

/// Per-window mean and population std for all windows of length m,
/// via cumulative sums.
inline std::pair<std::vector<double>, std::vector<double>> sliding_mean_std(
    const std::vector<double>& t, std::size_t m) {
  const std::size_t n = t.size();
  if (m < 1 || m > n) throw std::invalid_argument("sliding_mean_std: need 1 <= m <= n");
  std::vector<double> cum(n + 1, 0.0), cum2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    cum[i + 1] = cum[i] + t[i];
    cum2[i + 1] = cum2[i] + t[i] * t[i];
  }
  const std::size_t w = n - m + 1;
  std::vector<double> means(w), stds(w);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < w; ++i) {
    const double mu = (cum[i + m] - cum[i]) * inv_m;
    const double var = std::max(0.0, (cum2[i + m] - cum2[i]) * inv_m - mu * mu);
    means[i] = mu;
    stds[i] = std::sqrt(var);
  }
  return {std::move(means), std::move(stds)};
}

namespace detail {

inline std::vector<double> sliding_dot_direct(const std::vector<double>& q,
                                              const std::vector<double>& t) {
  const std::size_t m = q.size(), n = t.size();
  std::vector<double> dots(n - m + 1);
  for (std::size_t i = 0; i + m <= n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += q[j] * t[i + j];
    dots[i] = acc;
  }
  return dots;
}

inline std::vector<double> sliding_dot_fft(const std::vector<double>& q,
                                           const std::vector<double>& t) {
  const std::size_t m = q.size(), n = t.size();
  std::vector<double> rq(q.rbegin(), q.rend());
  std::vector<double> conv = fft_convolve(t, rq);
  return std::vector<double>(conv.begin() + static_cast<std::ptrdiff_t>(m - 1),
                             conv.begin() + static_cast<std::ptrdiff_t>(n));
}

// z-normalized Euclidean distance from the precomputed dot product and
// window statistics; degenerate windows follow the fixed convention.
inline double znorm_distance_from_dot(double dot, double m, double mu_q, double sd_q,
                                      double mu_t, double sd_t) {
  const bool deg_q = sd_q < kDegenerateStd;
  const bool deg_t = sd_t < kDegenerateStd;
  if (deg_q || deg_t) return (deg_q && deg_t) ? 0.0 : std::sqrt(2.0 * m);
  const double corr = (dot - m * mu_q * mu_t) / (m * sd_q * sd_t);
  return std::sqrt(std::max(0.0, 2.0 * m * (1.0 - corr)));
}

// Below this the dot-product formula loses precision to cancellation and
// the distance is recomputed directly from the normalized windows.
inline constexpr double kRecomputeBelow = 0.05;

// Direct z-normalized distance between a pre-normalized query and the
// window of t at `start`, given that window's statistics.
inline double znorm_distance_direct(const std::vector<double>& zq,
                                    const std::vector<double>& t, std::size_t start,
                                    double mu_t, double sd_t) {
  double acc = 0.0;
  for (std::size_t j = 0; j < zq.size(); ++j) {
    const double diff = zq[j] - (t[start + j] - mu_t) / sd_t;
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

}  // namespace detail

/// MASS-style distance profile of q against every window of t.
inline DistanceProfile distance_profile(const std::vector<double>& q,
                                        const std::vector<double>& t) {
  const std::size_t m = q.size(), n = t.size();
  if (m < 1 || m > n)
    throw std::invalid_argument("distance_profile: need 1 <= len(q) <= len(t)");
  const auto [means, stds] = sliding_mean_std(t, m);
  double mu_q = 0.0;
  for (double v : q) mu_q += v;
  mu_q /= static_cast<double>(m);
  double var_q = 0.0;
  for (double v : q) var_q += (v - mu_q) * (v - mu_q);
  const double sd_q = std::sqrt(var_q / static_cast<double>(m));

  const std::vector<double> dots = m >= kFftMinQueryLen ? detail::sliding_dot_fft(q, t)
                                                        : detail::sliding_dot_direct(q, t);
  DistanceProfile profile;
  profile.query_length = m;
  profile.distances.resize(n - m + 1);
  const double md = static_cast<double>(m);
  std::vector<double> zq;
  for (std::size_t i = 0; i < profile.distances.size(); ++i) {
    double dist = detail::znorm_distance_from_dot(dots[i], md, mu_q, sd_q, means[i], stds[i]);
    if (dist < detail::kRecomputeBelow && sd_q >= kDegenerateStd &&
        stds[i] >= kDegenerateStd) {
      if (zq.empty()) zq = z_normalize(q);
      dist = detail::znorm_distance_direct(zq, t, i, means[i], stds[i]);
    }
    profile.distances[i] = dist;
  }
  return profile;
}

inline DistanceProfile distance_profile(const std::vector<double>& q, const Series& t) {
  return distance_profile(q, t.values);
}

/// Full symmetric matrix of z-normalized distances between all windows of
/// length m, with a trivial-match exclusion zone of half the window.
struct PairwiseMatrix {
  std::size_t n_windows = 0;
  std::size_t window = 0;
  std::vector<double> d;  // row-major n_windows * n_windows

  double at(std::size_t i, std::size_t j) const { return d[i * n_windows + j]; }
  std::size_t exclusion_zone() const { return std::max<std::size_t>(1, window / 2); }
  bool excluded(std::size_t i, std::size_t j) const {
    const std::size_t gap = i > j ? i - j : j - i;
    return gap < exclusion_zone();
  }
};

inline PairwiseMatrix pairwise_distance_matrix(const std::vector<double>& t, std::size_t m) {
  const std::size_t n = t.size();
  if (m < 1 || m > n)
    throw std::invalid_argument("pairwise_distance_matrix: need 1 <= m <= n");
  const std::size_t w = n - m + 1;
  const auto [means, stds] = sliding_mean_std(t, m);
  PairwiseMatrix mat;
  mat.n_windows = w;
  mat.window = m;
  mat.d.assign(w * w, 0.0);
  const double md = static_cast<double>(m);
  // Streaming dot products along each diagonal keeps this O(n^2) overall.
  for (std::size_t k = 1; k < w; ++k) {
    double qt = 0.0;
    for (std::size_t j = 0; j < m; ++j) qt += t[j] * t[k + j];
    for (std::size_t i = 0; i + k < w; ++i) {
      const std::size_t j = i + k;
      if (i > 0) qt += t[i + m - 1] * t[j + m - 1] - t[i - 1] * t[j - 1];
      double dist =
          detail::znorm_distance_from_dot(qt, md, means[i], stds[i], means[j], stds[j]);
      if (dist < detail::kRecomputeBelow && stds[i] >= kDegenerateStd &&
          stds[j] >= kDegenerateStd) {
        std::vector<double> zi(m);
        for (std::size_t p = 0; p < m; ++p) zi[p] = (t[i + p] - means[i]) / stds[i];
        dist = detail::znorm_distance_direct(zi, t, j, means[j], stds[j]);
      }
      mat.d[i * w + j] = dist;
      mat.d[j * w + i] = dist;
    }
  }
  return mat;
}

inline PairwiseMatrix pairwise_distance_matrix(const Series& t, std::size_t m) {
  return pairwise_distance_matrix(t.values, m);
}

}  // namespace tsmotif
