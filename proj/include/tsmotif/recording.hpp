#pragma once

#include <cstddef>
#include <string>
#include <unordered_set>
#include <vector>

#include "tsmotif/errors.hpp"

namespace tsmotif {

/// Multichannel sampled signal. data[c][t] holds sample t of channel c.
/// boundaries lists sample indices where the signal is discontinuous
/// (the first sample after a removed artifact window); subsequences
/// crossing a boundary must not be treated as contiguous.
struct Recording {
  std::vector<std::string> channels;
  std::vector<std::vector<double>> data;
  double rate = 0.0;
  std::vector<std::size_t> boundaries;

  std::size_t n_channels() const { return channels.size(); }
  std::size_t n_samples() const { return data.empty() ? 0 : data.front().size(); }
};

inline void validate(const Recording& rec) {
  if (rec.rate <= 0.0) throw data_error("recording rate must be > 0");
  if (rec.channels.size() != rec.data.size())
    throw data_error("channel name count does not match data");
  if (rec.data.empty() || rec.data.front().empty())
    throw data_error("recording has no samples");
  const std::size_t n = rec.data.front().size();
  for (const auto& ch : rec.data)
    if (ch.size() != n) throw data_error("channels have unequal sample counts");
  std::unordered_set<std::string> seen;
  for (const auto& name : rec.channels)
    if (!seen.insert(name).second)
      throw data_error("duplicate channel name: " + name);
}

/// Single-channel signal with provenance, the unit all similarity
/// primitives operate on.
struct Series {
  std::vector<double> values;
  std::string channel;
  std::string band;
  std::vector<std::size_t> boundaries;

  std::size_t size() const { return values.size(); }
};

/// True if the window [start, start+len) does not cross any boundary.
inline bool window_is_contiguous(const std::vector<std::size_t>& boundaries,
                                 std::size_t start, std::size_t len) {
  for (std::size_t b : boundaries)
    if (b > start && b < start + len) return false;
  return true;
}

}  // namespace tsmotif
