#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <limits>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "tsmotif/dataset.hpp"
#include "tsmotif/distance.hpp"
#include "tsmotif/errors.hpp"
#include "tsmotif/parallel.hpp"
#include "tsmotif/recording.hpp"

namespace tsmotif {

/// k non-overlapping occurrences of one motif; extent is the maximum
/// pairwise z-normalized distance among them.
struct MotifletSet {
  std::vector<std::size_t> indices;  // sorted ascending
  std::size_t length = 0;
  double extent = 0.0;

  std::size_t k() const { return indices.size(); }
};

struct ElbowAnalysis {
  std::vector<double> ef;  // ef[i] is EF(i + 2)
  std::vector<std::size_t> elbows;
  std::size_t k_max = 0;
};

/// Max pairwise z-normalized distance among the windows starting at the
/// given indices. Direct computation, independent of the matrix path.
inline double extent(const std::vector<double>& t, const std::vector<std::size_t>& indices,
                     std::size_t l) {
  if (indices.size() < 2) throw std::invalid_argument("extent: need >= 2 indices");
  std::vector<std::vector<double>> normed;
  normed.reserve(indices.size());
  for (std::size_t idx : indices) {
    if (idx + l > t.size()) throw std::invalid_argument("extent: index out of range");
    normed.push_back(z_normalize(
        std::vector<double>(t.begin() + static_cast<std::ptrdiff_t>(idx),
                            t.begin() + static_cast<std::ptrdiff_t>(idx + l))));
  }
  double worst = 0.0;
  for (std::size_t a = 0; a + 1 < normed.size(); ++a)
    for (std::size_t b = a + 1; b < normed.size(); ++b) {
      double acc = 0.0;
      for (std::size_t j = 0; j < l; ++j) {
        const double diff = normed[a][j] - normed[b][j];
        acc += diff * diff;
      }
      worst = std::max(worst, std::sqrt(acc));
    }
  return worst;
}

namespace detail {

inline std::vector<bool> valid_window_mask(const Series& t, std::size_t l) {
  const std::size_t w = t.size() - l + 1;
  std::vector<bool> valid(w, true);
  for (std::size_t i = 0; i < w; ++i)
    if (!window_is_contiguous(t.boundaries, i, l)) valid[i] = false;
  return valid;
}

// Greedy search over all core windows: each core is paired with its
// nearest non-overlapping neighbors; best[k] keeps the smallest-extent
// set seen for each k (first hit wins ties, so the smallest core index).
inline std::vector<MotifletSet> motiflet_search_all(const PairwiseMatrix& mat,
                                                    const std::vector<bool>& valid,
                                                    std::size_t k_max) {
  const std::size_t w = mat.n_windows;
  const std::size_t zone = mat.exclusion_zone();
  std::vector<MotifletSet> best(k_max + 1);
  std::vector<double> best_extent(k_max + 1, std::numeric_limits<double>::infinity());

  std::vector<std::size_t> order;
  std::vector<std::size_t> members;
  for (std::size_t core = 0; core < w; ++core) {
    if (!valid[core]) continue;
    order.clear();
    for (std::size_t j = 0; j < w; ++j)
      if (valid[j] && !mat.excluded(core, j)) order.push_back(j);
    if (order.empty()) continue;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double da = mat.at(core, a), db = mat.at(core, b);
      return da != db ? da < db : a < b;
    });

    members.assign(1, core);
    double running_extent = 0.0;
    // Pruning: the core's j-th nearest neighbor distance lower-bounds the
    // extent of every set built from it, so stop once nothing can improve.
    for (std::size_t cand : order) {
      if (members.size() > k_max) break;
      bool overlaps = false;
      for (std::size_t midx : members) {
        const std::size_t gap = midx > cand ? midx - cand : cand - midx;
        if (gap < zone) {
          overlaps = true;
          break;
        }
      }
      if (overlaps) continue;
      for (std::size_t midx : members)
        running_extent = std::max(running_extent, mat.at(midx, cand));
      members.push_back(cand);
      const std::size_t k = members.size();
      if (k >= 2 && k <= k_max && running_extent < best_extent[k]) {
        best_extent[k] = running_extent;
        MotifletSet set;
        set.indices = members;
        std::sort(set.indices.begin(), set.indices.end());
        set.length = mat.window;
        set.extent = running_extent;
        best[k] = std::move(set);
      }
      if (running_extent >= best_extent[k_max] && k >= k_max) break;
    }
  }
  return best;
}

}  // namespace detail

inline MotifletSet approx_k_motiflet(const Series& t, std::size_t l, std::size_t k) {
  if (k < 2) throw std::invalid_argument("approx_k_motiflet: k must be >= 2");
  if (l < 1 || l > t.size())
    throw std::invalid_argument("approx_k_motiflet: invalid length");
  const PairwiseMatrix mat = pairwise_distance_matrix(t, l);
  const auto valid = detail::valid_window_mask(t, l);
  auto best = detail::motiflet_search_all(mat, valid, k);
  if (best[k].indices.empty())
    throw std::invalid_argument("approx_k_motiflet: series too short for k occurrences");
  return best[k];
}

/// Exhaustive minimum-extent search; test oracle only.
inline MotifletSet exact_k_motiflet(const Series& t, std::size_t l, std::size_t k,
                                    double subset_budget = 2e6) {
  if (k < 2) throw std::invalid_argument("exact_k_motiflet: k must be >= 2");
  if (l < 1 || l > t.size()) throw std::invalid_argument("exact_k_motiflet: invalid length");
  const PairwiseMatrix mat = pairwise_distance_matrix(t, l);
  const auto valid = detail::valid_window_mask(t, l);
  const std::size_t w = mat.n_windows;
  double combos = 1.0;
  for (std::size_t i = 0; i < k; ++i)
    combos *= static_cast<double>(w - i) / static_cast<double>(i + 1);
  if (combos > subset_budget)
    throw resource_limit_error("exact_k_motiflet: subset count exceeds budget");

  MotifletSet best;
  best.length = l;
  double best_extent = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> chosen;
  const std::size_t zone = mat.exclusion_zone();

  auto recurse = [&](auto&& self, std::size_t start, double partial_extent) -> void {
    if (chosen.size() == k) {
      if (partial_extent < best_extent) {
        best_extent = partial_extent;
        best.indices = chosen;
        best.extent = partial_extent;
      }
      return;
    }
    for (std::size_t j = start; j < w; ++j) {
      if (!valid[j]) continue;
      double ext = partial_extent;
      bool feasible = true;
      for (std::size_t c : chosen) {
        const std::size_t gap = j > c ? j - c : c - j;
        if (gap < zone) {
          feasible = false;
          break;
        }
        ext = std::max(ext, mat.at(c, j));
        if (ext >= best_extent) {
          feasible = false;
          break;
        }
      }
      if (!feasible) continue;
      chosen.push_back(j);
      self(self, j + 1, ext);
      chosen.pop_back();
    }
  };
  recurse(recurse, 0, 0.0);
  if (best.indices.empty())
    throw std::invalid_argument("exact_k_motiflet: no feasible non-overlapping set");
  return best;
}

/// EF and candidate sets for every k in [2, k_max], sharing one pairwise
/// matrix. ef is forced non-decreasing by a running max.
struct MotifletSearch {
  std::vector<double> ef;               // ef[i] is EF(i + 2)
  std::vector<MotifletSet> candidates;  // candidates[i] is the best (i + 2)-motiflet
};

inline MotifletSearch motiflet_search(const Series& t, std::size_t l, std::size_t k_max) {
  if (k_max < 2) throw std::invalid_argument("motiflet_search: k_max must be >= 2");
  if (l < 1 || l > t.size()) throw std::invalid_argument("motiflet_search: invalid length");
  const PairwiseMatrix mat = pairwise_distance_matrix(t, l);
  const auto valid = detail::valid_window_mask(t, l);
  auto best = detail::motiflet_search_all(mat, valid, k_max);
  MotifletSearch out;
  double running = 0.0;
  for (std::size_t k = 2; k <= k_max; ++k) {
    if (best[k].indices.empty())
      throw std::invalid_argument("motiflet_search: series too short for k=" +
                                  std::to_string(k));
    running = std::max(running, best[k].extent);
    out.ef.push_back(running);
    out.candidates.push_back(std::move(best[k]));
  }
  return out;
}

inline std::vector<double> extent_function(const Series& t, std::size_t l, std::size_t k_max) {
  return motiflet_search(t, l, k_max).ef;
}

/// k is an elbow iff the EF slope after k exceeds alpha times the slope
/// before k, with both slopes above a small noise floor.
inline std::vector<std::size_t> find_elbows(const std::vector<double>& ef, double alpha) {
  if (ef.size() < 3) throw std::invalid_argument("find_elbows: need at least 3 EF values");
  constexpr double noise_floor = 1e-9;
  std::vector<std::size_t> elbows;
  for (std::size_t i = 1; i + 1 < ef.size(); ++i) {
    const double before = ef[i] - ef[i - 1];
    const double after = ef[i + 1] - ef[i];
    if (before >= noise_floor && after >= noise_floor && after > alpha * before)
      elbows.push_back(i + 2);
  }
  return elbows;
}

/// Normalized area under the EF curve over k in [2, k_max].
inline double au_ef(const std::vector<double>& ef) {
  if (ef.size() < 2) throw std::invalid_argument("au_ef: need at least 2 EF values");
  const double peak = *std::max_element(ef.begin(), ef.end());
  if (peak <= 0.0) return 0.0;
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < ef.size(); ++i) area += 0.5 * (ef[i] + ef[i + 1]);
  return area / peak / static_cast<double>(ef.size() - 1);
}

/// Smallest AU_EF wins; infeasible lengths (series too short to hold
/// k_max non-overlapping windows) are skipped.
inline std::size_t find_best_motif_length(const Series& t,
                                          const std::vector<std::size_t>& lengths,
                                          std::size_t k_max) {
  if (lengths.empty()) throw std::invalid_argument("find_best_motif_length: no lengths");
  std::vector<std::size_t> sorted = lengths;
  std::sort(sorted.begin(), sorted.end());
  double best_score = std::numeric_limits<double>::infinity();
  std::size_t best_len = 0;
  bool found = false;
  for (std::size_t l : sorted) {
    if (l < 2 || l > t.size()) continue;
    std::vector<double> ef;
    try {
      ef = extent_function(t, l, k_max);
    } catch (const std::invalid_argument&) {
      continue;
    }
    const double score = au_ef(ef);
    if (!found || score < best_score) {
      best_score = score;
      best_len = l;
      found = true;
    }
  }
  if (!found) throw std::invalid_argument("find_best_motif_length: no valid candidate length");
  return best_len;
}

/// An extracted subsequence with provenance and (later) a score.
struct Motif {
  std::string id;
  std::string subject;
  std::string channel;
  std::string band;
  std::size_t start = 0;
  std::size_t length = 0;
  std::size_t k = 0;
  std::vector<double> values;
};

/// Per (channel, subject): pick the best length by AU_EF, run the elbow
/// search, and emit one motif per elbow, cut at the first index of the
/// motiflet set.
inline std::vector<Motif> extract_motifs(const BandDataset& dataset,
                                         const std::vector<std::size_t>& lengths,
                                         std::size_t k_max, double elbow_alpha,
                                         unsigned n_threads = 1) {
  if (dataset.subjects.empty()) throw data_error("extract_motifs: empty dataset");
  if (lengths.empty()) throw std::invalid_argument("extract_motifs: no candidate lengths");
  const std::size_t min_len = *std::min_element(lengths.begin(), lengths.end());

  std::vector<std::string> channel_names;
  for (const auto& [name, series] : dataset.subjects.front().channels)
    channel_names.push_back(name);

  struct Item {
    std::string channel;
    std::size_t subject_idx;
  };
  std::vector<Item> items;
  for (const auto& ch : channel_names)
    for (std::size_t s = 0; s < dataset.subjects.size(); ++s) items.push_back({ch, s});

  std::vector<std::vector<Motif>> results(items.size());
  std::size_t skipped = 0;
  std::mutex log_mutex;

  parallel_for(items.size(), n_threads, [&](std::size_t idx) {
    const auto& item = items[idx];
    const auto& subject = dataset.subjects[item.subject_idx];
    const auto it = subject.channels.find(item.channel);
    if (it == subject.channels.end())
      throw data_error("extract_motifs: subject " + subject.id + " missing channel " +
                       item.channel);
    const Series& series = it->second;
    if (series.size() < min_len + 1) {
      std::lock_guard<std::mutex> lock(log_mutex);
      ++skipped;
      std::cerr << "[extract_motifs] skipping " << subject.id << "/" << item.channel
                << ": series too short (" << series.size() << " samples)\n";
      return;
    }
    std::size_t best_len;
    try {
      best_len = find_best_motif_length(series, lengths, k_max);
    } catch (const std::invalid_argument&) {
      std::lock_guard<std::mutex> lock(log_mutex);
      ++skipped;
      std::cerr << "[extract_motifs] skipping " << subject.id << "/" << item.channel
                << ": no feasible motif length\n";
      return;
    }
    const MotifletSearch search = motiflet_search(series, best_len, k_max);
    const auto elbows = find_elbows(search.ef, elbow_alpha);
    for (std::size_t k : elbows) {
      const MotifletSet& set = search.candidates[k - 2];
      Motif motif;
      motif.subject = subject.id;
      motif.channel = item.channel;
      motif.band = dataset.band.name;
      motif.start = set.indices.front();
      motif.length = best_len;
      motif.k = k;
      motif.values.assign(
          series.values.begin() + static_cast<std::ptrdiff_t>(motif.start),
          series.values.begin() + static_cast<std::ptrdiff_t>(motif.start + best_len));
      motif.id = motif.band + ":" + motif.channel + ":" + motif.subject + ":l" +
                 std::to_string(best_len) + ":k" + std::to_string(k);
      results[idx].push_back(std::move(motif));
    }
  });

  if (skipped == items.size()) throw data_error("extract_motifs: every series was skipped");

  std::vector<Motif> motifs;
  for (auto& chunk : results)
    for (auto& m : chunk) motifs.push_back(std::move(m));
  std::sort(motifs.begin(), motifs.end(), [](const Motif& a, const Motif& b) {
    return std::tie(a.channel, a.subject, a.length, a.k) <
           std::tie(b.channel, b.subject, b.length, b.k);
  });
  return motifs;
}

}  // namespace tsmotif
