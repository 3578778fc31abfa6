#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tsmotif/dataset.hpp"
#include "tsmotif/errors.hpp"
#include "tsmotif/matching.hpp"
#include "tsmotif/parallel.hpp"
#include "tsmotif/selection.hpp"

namespace tsmotif {

/// Subjects x motifs matrix of mean closest-match distances.
struct FeatureMatrix {
  std::vector<std::string> subjects;
  std::vector<std::string> motif_ids;
  std::vector<int> labels;
  std::vector<std::string> groups;
  std::vector<std::vector<double>> values;  // values[subject][motif]
};

inline FeatureMatrix build_feature_matrix(const BandDataset& dataset,
                                          const std::vector<ScoredMotif>& motifs,
                                          unsigned n_threads = 1) {
  FeatureMatrix fm;
  for (const auto& subject : dataset.subjects) {
    fm.subjects.push_back(subject.id);
    fm.labels.push_back(subject.label);
    fm.groups.push_back(subject.group);
  }
  for (const auto& sm : motifs) fm.motif_ids.push_back(sm.motif.id);
  fm.values.assign(dataset.subjects.size(), std::vector<double>(motifs.size(), 0.0));

  const std::size_t n_cells = dataset.subjects.size() * motifs.size();
  parallel_for(n_cells, n_threads, [&](std::size_t cell) {
    const std::size_t s = cell / motifs.size();
    const std::size_t j = cell % motifs.size();
    const auto& subject = dataset.subjects[s];
    const Motif& motif = motifs[j].motif;
    const auto it = subject.channels.find(motif.channel);
    if (it == subject.channels.end())
      throw std::invalid_argument("build_feature_matrix: subject " + subject.id +
                                  " missing channel " + motif.channel + " for motif " +
                                  motif.id);
    fm.values[s][j] = mean_match_distance(motif.values, it->second);
  });
  return fm;
}

}  // namespace tsmotif
