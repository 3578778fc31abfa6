#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsmotif/classifiers.hpp"
#include "tsmotif/dataset.hpp"
#include "tsmotif/errors.hpp"
#include "tsmotif/io.hpp"
#include "tsmotif/recording.hpp"

namespace tsmotif {

/// Synthetic two-class dataset: class-1 subjects carry a planted motif
/// family in one channel; class-0 subjects are noise only, or carry a
/// second, distinct family when class0_family is set.
struct SynthSpec {
  std::size_t per_class = 10;
  std::size_t n_channels = 2;
  double rate = 128.0;
  double duration_s = 40.0;
  double noise_sigma = 1.0;
  double motif_amplitude = 3.0;
  double motif_s = 1.0;       // planted waveform length, seconds
  std::size_t occurrences = 5;  // per planted subject
  double margin_s = 4.0;      // keep-out zone at both ends (survives trimming)
  std::uint64_t seed = 1;
  std::size_t planted_channel = 0;
  bool alternate_groups = false;  // tag subjects f/m alternately
  bool class0_family = false;     // plant a different family in class 0
};

struct SynthDataset {
  std::vector<SubjectRecord> subjects;
  std::map<std::string, std::vector<std::size_t>> planted_starts;  // raw sample indices
  std::vector<double> waveform;         // class-1 family
  std::vector<double> waveform_class0;  // empty unless class0_family
  SynthSpec spec;
};

namespace detail {

// Alpha-band bursts: two in-band tones under a Hann envelope; the two
// class families mix different tone pairs so they stay dissimilar after
// z-normalization.
inline std::vector<double> synth_waveform(std::size_t m, double rate, double amplitude,
                                          int cls) {
  std::vector<double> w(m);
  const double pi = 3.14159265358979323846;
  const double f1 = cls == 1 ? 9.0 : 11.5;
  const double f2 = cls == 1 ? 11.0 : 8.5;
  const double phase = cls == 1 ? 0.7 : 2.1;
  for (std::size_t i = 0; i < m; ++i) {
    const double t = static_cast<double>(i) / rate;
    const double env = 0.5 * (1.0 - std::cos(2.0 * pi * static_cast<double>(i) /
                                              static_cast<double>(m - 1)));
    w[i] = amplitude * env *
           (std::sin(2.0 * pi * f1 * t) + 0.6 * std::sin(2.0 * pi * f2 * t + phase));
  }
  return w;
}

}  // namespace detail

inline SynthDataset generate_synthetic_dataset(const SynthSpec& spec) {
  if (spec.per_class < 2) throw std::invalid_argument("synth: need >= 2 subjects per class");
  if (spec.planted_channel >= spec.n_channels)
    throw std::invalid_argument("synth: planted channel out of range");
  const std::size_t n = static_cast<std::size_t>(spec.duration_s * spec.rate);
  const std::size_t m = static_cast<std::size_t>(spec.motif_s * spec.rate);
  const std::size_t margin = static_cast<std::size_t>(spec.margin_s * spec.rate);
  if (n < 2 * margin + spec.occurrences * 2 * m)
    throw std::invalid_argument("synth: recording too short for requested occurrences");

  SynthDataset out;
  out.spec = spec;
  out.waveform = detail::synth_waveform(m, spec.rate, spec.motif_amplitude, 1);
  if (spec.class0_family)
    out.waveform_class0 = detail::synth_waveform(m, spec.rate, spec.motif_amplitude, 0);

  for (std::size_t cls = 0; cls <= 1; ++cls) {
    for (std::size_t s = 0; s < spec.per_class; ++s) {
      const std::size_t subject_idx = cls * spec.per_class + s;
      std::mt19937_64 rng(splitmix64(spec.seed + 7919 * subject_idx));
      std::normal_distribution<double> noise(0.0, spec.noise_sigma);

      SubjectRecord subject;
      char id[16];
      std::snprintf(id, sizeof(id), "s%02zu", subject_idx);
      subject.id = id;
      subject.label = static_cast<int>(cls);
      subject.group = spec.alternate_groups ? (subject_idx % 2 ? "m" : "f") : "none";
      subject.recording.rate = spec.rate;
      for (std::size_t c = 0; c < spec.n_channels; ++c) {
        subject.recording.channels.push_back("ch" + std::to_string(c));
        std::vector<double> samples(n);
        for (double& v : samples) v = noise(rng);
        subject.recording.data.push_back(std::move(samples));
      }

      if (cls == 1 || spec.class0_family) {
        // non-overlapping plant positions, rejection sampled
        std::vector<std::size_t> starts;
        std::uniform_int_distribution<std::size_t> pos(margin, n - margin - m);
        std::size_t attempts = 0;
        while (starts.size() < spec.occurrences) {
          if (++attempts > 100000)
            throw data_error("synth: could not place occurrences; loosen margins");
          if (attempts % 200 == 0) starts.clear();  // wedged by earlier picks
          const std::size_t cand = pos(rng);
          bool ok = true;
          for (std::size_t other : starts) {
            const std::size_t gap = cand > other ? cand - other : other - cand;
            if (gap < 2 * m) {
              ok = false;
              break;
            }
          }
          if (ok) starts.push_back(cand);
        }
        std::sort(starts.begin(), starts.end());
        // plants replace the background; occurrences share nothing with the
        // surrounding noise, which pins the family alignment exactly
        auto& channel = subject.recording.data[spec.planted_channel];
        const auto& w = cls == 1 ? out.waveform : out.waveform_class0;
        std::normal_distribution<double> jitter(0.0, 0.1 * spec.noise_sigma);
        for (std::size_t start : starts)
          for (std::size_t i = 0; i < m; ++i) channel[start + i] = w[i] + jitter(rng);
        out.planted_starts[subject.id] = std::move(starts);
      }
      out.subjects.push_back(std::move(subject));
    }
  }
  return out;
}

/// Writes recordings, manifest, and ground-truth plant positions.
inline void write_synthetic_dataset(const SynthDataset& ds,
                                    const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<ManifestEntry> entries;
  for (const auto& subject : ds.subjects) {
    const std::string file = subject.id + ".csv";
    write_recording_csv(out_dir / file, subject.recording);
    ManifestEntry e;
    e.id = subject.id;
    e.path = file;
    e.rate = subject.recording.rate;
    e.group = subject.group;
    e.label = subject.label;
    entries.push_back(std::move(e));
  }
  write_manifest(out_dir / "manifest.csv", entries);

  nlohmann::json truth;
  truth["rate_hz"] = ds.spec.rate;
  truth["motif_samples"] = ds.waveform.size();
  truth["planted_channel"] = "ch" + std::to_string(ds.spec.planted_channel);
  truth["waveform"] = ds.waveform;
  if (!ds.waveform_class0.empty()) truth["waveform_class0"] = ds.waveform_class0;
  for (const auto& [id, starts] : ds.planted_starts) truth["planted_starts"][id] = starts;
  std::ofstream out(out_dir / "ground_truth.json");
  out << truth.dump(2) << "\n";
}

}  // namespace tsmotif
