#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "tsmotif/dataset.hpp"
#include "tsmotif/errors.hpp"
#include "tsmotif/matching.hpp"
#include "tsmotif/motiflets.hpp"
#include "tsmotif/parallel.hpp"

namespace tsmotif {

struct ScoredMotif {
  Motif motif;
  double difference_score = 0.0;
  int source_class = 0;
  std::string source_group = "none";
};

/// Absolute gap between the per-class averages of the lowest
/// ceil(percentage * class size) mean match distances, computed on the
/// motif's channel of origin.
inline double difference_score(const Motif& q, const BandDataset& dataset,
                               double percentage) {
  if (!(percentage > 0.0 && percentage <= 1.0))
    throw std::invalid_argument("difference_score: percentage must be in (0, 1]");
  std::vector<double> means[2];
  for (const auto& subject : dataset.subjects) {
    const auto it = subject.channels.find(q.channel);
    if (it == subject.channels.end())
      throw std::invalid_argument("difference_score: subject " + subject.id +
                                  " missing channel " + q.channel);
    means[subject.label == 1 ? 1 : 0].push_back(mean_match_distance(q.values, it->second));
  }
  double class_avg[2];
  for (int cls = 0; cls < 2; ++cls) {
    if (means[cls].empty())
      throw std::invalid_argument("difference_score: class " + std::to_string(cls) +
                                  " has no subjects");
    std::sort(means[cls].begin(), means[cls].end());
    const auto take = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::ceil(percentage * static_cast<double>(means[cls].size()))));
    double acc = 0.0;
    for (std::size_t i = 0; i < take; ++i) acc += means[cls][i];
    class_avg[cls] = acc / static_cast<double>(take);
  }
  return std::abs(class_avg[0] - class_avg[1]);
}

/// Scores every motif against the dataset; class/group provenance comes
/// from the motif's originating subject.
inline std::vector<ScoredMotif> score_motifs(const std::vector<Motif>& motifs,
                                             const BandDataset& dataset, double percentage,
                                             unsigned n_threads = 1) {
  std::map<std::string, const BandSubject*> by_id;
  for (const auto& subject : dataset.subjects) by_id[subject.id] = &subject;

  std::vector<ScoredMotif> scored(motifs.size());
  parallel_for(motifs.size(), n_threads, [&](std::size_t i) {
    const Motif& motif = motifs[i];
    const auto it = by_id.find(motif.subject);
    if (it == by_id.end())
      throw data_error("score_motifs: unknown subject " + motif.subject);
    scored[i].motif = motif;
    scored[i].difference_score = difference_score(motif, dataset, percentage);
    scored[i].source_class = it->second->label;
    scored[i].source_group = it->second->group;
  });
  return scored;
}

/// Keeps the top n motifs per (class, group) cell by difference score,
/// ties broken by motif id.
inline std::vector<ScoredMotif> select_balanced(const std::vector<ScoredMotif>& scored,
                                                std::size_t n_per_cell) {
  if (scored.empty()) throw std::invalid_argument("select_balanced: no scored motifs");
  std::map<std::pair<int, std::string>, std::vector<const ScoredMotif*>> cells;
  for (const auto& sm : scored)
    cells[{sm.source_class, sm.source_group}].push_back(&sm);

  std::vector<ScoredMotif> kept;
  for (auto& [cell, members] : cells) {
    std::sort(members.begin(), members.end(), [](const ScoredMotif* a, const ScoredMotif* b) {
      if (a->difference_score != b->difference_score)
        return a->difference_score > b->difference_score;
      return a->motif.id < b->motif.id;
    });
    if (members.size() < n_per_cell)
      std::cerr << "[select_balanced] cell (" << cell.first << ", " << cell.second
                << ") has only " << members.size() << " motifs (wanted " << n_per_cell
                << ")\n";
    for (std::size_t i = 0; i < std::min(n_per_cell, members.size()); ++i)
      kept.push_back(*members[i]);
  }
  std::sort(kept.begin(), kept.end(),
            [](const ScoredMotif& a, const ScoredMotif& b) { return a.motif.id < b.motif.id; });
  return kept;
}

}  // namespace tsmotif
