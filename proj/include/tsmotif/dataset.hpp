#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsmotif/errors.hpp"
#include "tsmotif/recording.hpp"
#include "tsmotif/signal_prep.hpp"

namespace tsmotif {

/// Label 1 (responder) iff the follow-up score dropped to half the
/// baseline or below; the boundary counts as a response.
inline int derive_label(double baseline, double followup) {
  if (baseline < 0.0 || baseline > 60.0 || followup < 0.0 || followup > 60.0)
    throw std::invalid_argument("derive_label: scores must be in [0, 60]");
  return followup <= 0.5 * baseline ? 1 : 0;
}

struct SubjectRecord {
  std::string id;
  Recording recording;
  std::string group = "none";  // optional attribute, e.g. gender
  int label = 0;               // 0/1
  std::optional<double> baseline_score;
  std::optional<double> followup_score;
};

/// One subject's channels for a single extracted band.
struct BandSubject {
  std::string id;
  int label = 0;
  std::string group = "none";
  std::map<std::string, Series> channels;
};

struct BandDataset {
  BandSpec band;
  std::vector<BandSubject> subjects;
};

inline BandDataset make_band_dataset(const std::vector<SubjectRecord>& dataset,
                                     const BandSpec& band) {
  if (dataset.empty()) throw data_error("make_band_dataset: empty dataset");
  BandDataset out;
  out.band = band;
  out.subjects.reserve(dataset.size());
  for (const auto& subject : dataset) {
    Recording banded = extract_band(subject.recording, band);
    BandSubject bs;
    bs.id = subject.id;
    bs.label = subject.label;
    bs.group = subject.group;
    for (std::size_t c = 0; c < banded.n_channels(); ++c)
      bs.channels.emplace(banded.channels[c], channel_series(banded, c, band.name));
    out.subjects.push_back(std::move(bs));
  }
  return out;
}

}  // namespace tsmotif
