#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "tsmotif/errors.hpp"
#include "tsmotif/recording.hpp"

namespace tsmotif {

/// One frequency band with its post-extraction sampling rate.
struct BandSpec {
  std::string name;
  double low = 0.0;
  double high = 0.0;
  double target_rate = 0.0;
};

inline void validate(const BandSpec& band) {
  if (!(band.low > 0.0 && band.low < band.high))
    throw config_error("band " + band.name + ": need 0 < low < high");
  if (band.target_rate < 2.0 * band.high)
    throw config_error("band " + band.name + ": target_rate below Nyquist");
}

inline Recording decimate(const Recording& rec, std::size_t factor) {
  if (factor == 0) throw std::invalid_argument("decimate: factor must be >= 1");
  if (factor == 1) return rec;
  const std::size_t n = rec.n_samples();
  const std::size_t out_n = (n + factor - 1) / factor;
  if (out_n < 1) throw std::invalid_argument("decimate: empty result");
  Recording out;
  out.channels = rec.channels;
  out.rate = rec.rate / static_cast<double>(factor);
  out.data.resize(rec.data.size());
  for (std::size_t c = 0; c < rec.data.size(); ++c) {
    out.data[c].reserve(out_n);
    for (std::size_t i = 0; i < n; i += factor) out.data[c].push_back(rec.data[c][i]);
  }
  for (std::size_t b : rec.boundaries) {
    std::size_t nb = (b + factor - 1) / factor;
    if (nb > 0 && nb < out_n) out.boundaries.push_back(nb);
  }
  return out;
}

inline Recording trim_edges(const Recording& rec, double seconds) {
  if (seconds < 0.0) throw std::invalid_argument("trim_edges: seconds must be >= 0");
  const std::size_t cut = static_cast<std::size_t>(std::llround(seconds * rec.rate));
  const std::size_t n = rec.n_samples();
  if (2 * cut >= n) throw std::invalid_argument("trim_edges: recording too short");
  if (cut == 0) return rec;
  Recording out;
  out.channels = rec.channels;
  out.rate = rec.rate;
  out.data.resize(rec.data.size());
  for (std::size_t c = 0; c < rec.data.size(); ++c)
    out.data[c].assign(rec.data[c].begin() + static_cast<std::ptrdiff_t>(cut),
                       rec.data[c].end() - static_cast<std::ptrdiff_t>(cut));
  for (std::size_t b : rec.boundaries)
    if (b > cut && b < n - cut) out.boundaries.push_back(b - cut);
  return out;
}

inline Recording average_reference(const Recording& rec) {
  if (rec.n_channels() < 2)
    throw std::invalid_argument("average_reference: need >= 2 channels");
  Recording out = rec;
  const std::size_t n = rec.n_samples();
  const double inv_c = 1.0 / static_cast<double>(rec.n_channels());
  for (std::size_t t = 0; t < n; ++t) {
    double mean = 0.0;
    for (const auto& ch : rec.data) mean += ch[t];
    mean *= inv_c;
    for (auto& ch : out.data) ch[t] -= mean;
  }
  return out;
}

namespace detail {

struct Biquad {
  double b0, b1, b2, a1, a2;  // normalized, a0 == 1
};

// RBJ cookbook sections; Q values give a Butterworth response when two
// second-order sections are cascaded.
inline Biquad butter_lowpass_section(double cutoff, double rate, double q) {
  const double w0 = 2.0 * 3.14159265358979323846 * cutoff / rate;
  const double cw = std::cos(w0), sw = std::sin(w0);
  const double alpha = sw / (2.0 * q);
  const double a0 = 1.0 + alpha;
  return {(1.0 - cw) / 2.0 / a0, (1.0 - cw) / a0, (1.0 - cw) / 2.0 / a0,
          -2.0 * cw / a0, (1.0 - alpha) / a0};
}

inline Biquad butter_highpass_section(double cutoff, double rate, double q) {
  const double w0 = 2.0 * 3.14159265358979323846 * cutoff / rate;
  const double cw = std::cos(w0), sw = std::sin(w0);
  const double alpha = sw / (2.0 * q);
  const double a0 = 1.0 + alpha;
  return {(1.0 + cw) / 2.0 / a0, -(1.0 + cw) / a0, (1.0 + cw) / 2.0 / a0,
          -2.0 * cw / a0, (1.0 - alpha) / a0};
}

inline void run_biquad(const Biquad& bq, std::vector<double>& x) {
  double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
  for (double& v : x) {
    const double y = bq.b0 * v + bq.b1 * x1 + bq.b2 * x2 - bq.a1 * y1 - bq.a2 * y2;
    x2 = x1;
    x1 = v;
    y2 = y1;
    y1 = y;
    v = y;
  }
}

// Forward-backward filtering with reflected padding at both ends so the
// net response is zero-phase and edge transients stay outside the signal.
inline std::vector<double> filtfilt(const std::vector<Biquad>& cascade,
                                    const std::vector<double>& x, std::size_t pad) {
  const std::size_t n = x.size();
  pad = std::min(pad, n > 1 ? n - 1 : 0);
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i > 0; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);
  for (const auto& bq : cascade) run_biquad(bq, ext);
  std::reverse(ext.begin(), ext.end());
  for (const auto& bq : cascade) run_biquad(bq, ext);
  std::reverse(ext.begin(), ext.end());
  return std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                             ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

inline std::vector<Biquad> butter_bandpass_cascade(double low, double high, double rate) {
  // 4th-order Butterworth pole Q factors: 1 / (2 cos(pi/8)), 1 / (2 cos(3 pi/8)).
  const double q1 = 0.541196100146197;
  const double q2 = 1.306562964876377;
  return {butter_highpass_section(low, rate, q1), butter_highpass_section(low, rate, q2),
          butter_lowpass_section(high, rate, q1), butter_lowpass_section(high, rate, q2)};
}

}  // namespace detail

inline Recording bandpass(const Recording& rec, double low, double high) {
  if (!(low > 0.0 && low < high))
    throw std::invalid_argument("bandpass: need 0 < low < high");
  if (high >= rec.rate / 2.0)
    throw std::invalid_argument("bandpass: high cutoff at or above Nyquist");
  const auto cascade = detail::butter_bandpass_cascade(low, high, rec.rate);
  const std::size_t pad = static_cast<std::size_t>(std::ceil(3.0 * rec.rate / low));
  Recording out = rec;
  for (auto& ch : out.data) ch = detail::filtfilt(cascade, ch, pad);
  return out;
}

struct ArtifactRejection {
  Recording recording;
  std::vector<std::size_t> removed_windows;
};

/// Per-channel window mean-square power; a window is dropped from all
/// channels when any channel exceeds mean + power_z * std of that
/// channel's window powers. A trailing partial window is dropped whenever
/// any rejection happens, so every kept segment spans whole windows.
inline ArtifactRejection reject_artifact_windows(const Recording& rec, double window_s,
                                                 double power_z) {
  const std::size_t w = static_cast<std::size_t>(std::llround(window_s * rec.rate));
  if (w < 1) throw std::invalid_argument("reject_artifact_windows: window too short");
  const std::size_t n = rec.n_samples();
  const std::size_t n_win = n / w;
  if (n_win == 0) throw std::invalid_argument("reject_artifact_windows: recording shorter than one window");

  const std::size_t n_ch = rec.n_channels();
  std::vector<std::vector<double>> power(n_ch, std::vector<double>(n_win));
  for (std::size_t c = 0; c < n_ch; ++c) {
    for (std::size_t k = 0; k < n_win; ++k) {
      double acc = 0.0;
      for (std::size_t i = k * w; i < (k + 1) * w; ++i) acc += rec.data[c][i] * rec.data[c][i];
      power[c][k] = acc / static_cast<double>(w);
    }
  }

  std::vector<bool> keep(n_win, true);
  if (std::isfinite(power_z)) {
    for (std::size_t c = 0; c < n_ch; ++c) {
      double mean = std::accumulate(power[c].begin(), power[c].end(), 0.0) /
                    static_cast<double>(n_win);
      double var = 0.0;
      for (double p : power[c]) var += (p - mean) * (p - mean);
      var /= static_cast<double>(n_win);
      const double thresh = mean + power_z * std::sqrt(var);
      for (std::size_t k = 0; k < n_win; ++k)
        if (power[c][k] > thresh) keep[k] = false;
    }
  }

  ArtifactRejection result;
  for (std::size_t k = 0; k < n_win; ++k)
    if (!keep[k]) result.removed_windows.push_back(k);
  if (result.removed_windows.empty()) {
    result.recording = rec;
    return result;
  }
  if (result.removed_windows.size() == n_win)
    throw data_error("reject_artifact_windows: every window rejected");

  Recording out;
  out.channels = rec.channels;
  out.rate = rec.rate;
  out.data.resize(n_ch);
  std::size_t written = 0;
  bool gap_pending = false;
  for (std::size_t k = 0; k < n_win; ++k) {
    if (!keep[k]) {
      gap_pending = written > 0;
      continue;
    }
    if (gap_pending) {
      out.boundaries.push_back(written);
      gap_pending = false;
    }
    for (std::size_t c = 0; c < n_ch; ++c)
      out.data[c].insert(out.data[c].end(), rec.data[c].begin() + static_cast<std::ptrdiff_t>(k * w),
                         rec.data[c].begin() + static_cast<std::ptrdiff_t>((k + 1) * w));
    written += w;
  }
  result.recording = std::move(out);
  return result;
}

namespace detail {

// Linear-interpolation resampling; callers bandlimit first.
inline std::vector<double> resample_linear(const std::vector<double>& x, double from_rate,
                                           double to_rate) {
  const std::size_t n = x.size();
  const double ratio = from_rate / to_rate;
  const std::size_t out_n =
      static_cast<std::size_t>(std::floor(static_cast<double>(n - 1) / ratio)) + 1;
  std::vector<double> out(out_n);
  for (std::size_t i = 0; i < out_n; ++i) {
    const double pos = static_cast<double>(i) * ratio;
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    out[i] = lo + 1 < n ? x[lo] * (1.0 - frac) + x[lo + 1] * frac : x[lo];
  }
  return out;
}

}  // namespace detail

inline Recording extract_band(const Recording& rec, const BandSpec& band) {
  validate(band);
  Recording filtered = bandpass(rec, band.low, band.high);
  const double ratio = rec.rate / band.target_rate;
  const std::size_t int_ratio = static_cast<std::size_t>(std::llround(ratio));
  Recording out;
  if (std::abs(ratio - static_cast<double>(int_ratio)) < 1e-9 && int_ratio >= 1) {
    out = decimate(filtered, int_ratio);
    out.rate = band.target_rate;
    return out;
  }
  out.channels = filtered.channels;
  out.rate = band.target_rate;
  out.data.resize(filtered.data.size());
  for (std::size_t c = 0; c < filtered.data.size(); ++c)
    out.data[c] = detail::resample_linear(filtered.data[c], rec.rate, band.target_rate);
  const std::size_t out_n = out.n_samples();
  for (std::size_t b : filtered.boundaries) {
    const auto nb = static_cast<std::size_t>(
        std::ceil(static_cast<double>(b) * band.target_rate / rec.rate));
    if (nb > 0 && nb < out_n) out.boundaries.push_back(nb);
  }
  return out;
}

/// One channel of a recording as a Series, tagged with band provenance.
inline Series channel_series(const Recording& rec, std::size_t channel_idx,
                             const std::string& band_name = "") {
  Series s;
  s.values = rec.data.at(channel_idx);
  s.channel = rec.channels.at(channel_idx);
  s.band = band_name;
  s.boundaries = rec.boundaries;
  return s;
}

}  // namespace tsmotif
