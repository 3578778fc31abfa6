#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsmotif/dataset.hpp"
#include "tsmotif/errors.hpp"
#include "tsmotif/features.hpp"
#include "tsmotif/model_selection.hpp"
#include "tsmotif/motiflets.hpp"
#include "tsmotif/recording.hpp"
#include "tsmotif/selection.hpp"

namespace tsmotif {

namespace fs = std::filesystem;

/// Shortest round-trip decimal form, so written artifacts are stable
/// byte-for-byte and parse back to the identical double.
inline std::string format_double(double v) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw data_error("could not parse " + what + ": '" + s + "'");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Recording CSV: header row of channel names, then one sample per row.

inline Recording read_recording_csv(const fs::path& path, double rate) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open recording file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw data_error("empty recording file: " + path.string());
  Recording rec;
  rec.rate = rate;
  rec.channels = detail::split_csv_line(line);
  rec.data.resize(rec.channels.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != rec.channels.size())
      throw data_error("row width mismatch in " + path.string());
    for (std::size_t c = 0; c < fields.size(); ++c)
      rec.data[c].push_back(detail::parse_double(fields[c], "sample"));
  }
  validate(rec);
  return rec;
}

inline void write_recording_csv(const fs::path& path, const Recording& rec) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write recording file: " + path.string());
  for (std::size_t c = 0; c < rec.channels.size(); ++c)
    out << (c ? "," : "") << rec.channels[c];
  out << "\n";
  const std::size_t n = rec.n_samples();
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t c = 0; c < rec.data.size(); ++c)
      out << (c ? "," : "") << format_double(rec.data[c][t]);
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// Dataset manifest: CSV columns id,path,rate_hz,group,label,baseline_score,
// followup_score plus an optional JSON sidecar (<manifest>.json) holding
// per-subject artifact boundaries.

struct ManifestEntry {
  std::string id;
  std::string path;
  double rate = 0.0;
  std::string group = "none";
  std::optional<int> label;
  std::optional<double> baseline;
  std::optional<double> followup;
  std::vector<std::size_t> boundaries;
};

inline fs::path manifest_sidecar_path(const fs::path& manifest_path) {
  fs::path p = manifest_path;
  p += ".json";
  return p;
}

inline std::vector<ManifestEntry> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open manifest: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw config_error("empty manifest: " + path.string());
  const auto header = detail::split_csv_line(line);
  const std::vector<std::string> expected = {"id",    "path",           "rate_hz",
                                             "group", "label",          "baseline_score",
                                             "followup_score"};
  if (header != expected)
    throw config_error("manifest header must be: id,path,rate_hz,group,label,"
                       "baseline_score,followup_score");
  std::vector<ManifestEntry> entries;
  std::map<std::string, bool> seen;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line);
    fields.resize(expected.size());
    ManifestEntry e;
    e.id = fields[0];
    e.path = fields[1];
    e.rate = detail::parse_double(fields[2], "rate_hz");
    if (!fields[3].empty()) e.group = fields[3];
    if (!fields[4].empty()) e.label = static_cast<int>(detail::parse_double(fields[4], "label"));
    if (!fields[5].empty()) e.baseline = detail::parse_double(fields[5], "baseline_score");
    if (!fields[6].empty()) e.followup = detail::parse_double(fields[6], "followup_score");
    if (e.id.empty()) throw config_error("manifest row with empty id");
    if (seen[e.id]) throw config_error("duplicate subject id in manifest: " + e.id);
    seen[e.id] = true;
    const bool has_scores = e.baseline.has_value() && e.followup.has_value();
    if (e.label.has_value() == has_scores)
      throw config_error("subject " + e.id + ": exactly one of label or score pair required");
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw config_error("manifest has no subjects: " + path.string());

  const fs::path sidecar = manifest_sidecar_path(path);
  if (fs::exists(sidecar)) {
    std::ifstream sc(sidecar);
    nlohmann::json j;
    sc >> j;
    for (auto& e : entries)
      if (j.contains(e.id) && j[e.id].contains("boundaries"))
        e.boundaries = j[e.id]["boundaries"].get<std::vector<std::size_t>>();
  }
  return entries;
}

inline void write_manifest(const fs::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write manifest: " + path.string());
  out << "id,path,rate_hz,group,label,baseline_score,followup_score\n";
  bool any_boundaries = false;
  for (const auto& e : entries) {
    out << e.id << "," << e.path << "," << format_double(e.rate) << "," << e.group << ",";
    if (e.label) out << *e.label;
    out << ",";
    if (e.baseline) out << format_double(*e.baseline);
    out << ",";
    if (e.followup) out << format_double(*e.followup);
    out << "\n";
    if (!e.boundaries.empty()) any_boundaries = true;
  }
  if (any_boundaries) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& e : entries)
      if (!e.boundaries.empty()) j[e.id]["boundaries"] = e.boundaries;
    std::ofstream sc(manifest_sidecar_path(path));
    sc << j.dump(2) << "\n";
  }
}

/// Loads the manifest and every referenced recording; relative recording
/// paths resolve against the manifest's directory.
inline std::vector<SubjectRecord> load_dataset(const fs::path& manifest_path) {
  const auto entries = read_manifest(manifest_path);
  const fs::path base = manifest_path.parent_path();
  std::vector<SubjectRecord> dataset;
  dataset.reserve(entries.size());
  for (const auto& e : entries) {
    fs::path rec_path = e.path;
    if (rec_path.is_relative()) rec_path = base / rec_path;
    if (!fs::exists(rec_path))
      throw config_error("recording file missing for subject " + e.id + ": " +
                         rec_path.string());
    SubjectRecord subject;
    subject.id = e.id;
    subject.group = e.group;
    subject.recording = read_recording_csv(rec_path, e.rate);
    subject.recording.boundaries = e.boundaries;
    subject.baseline_score = e.baseline;
    subject.followup_score = e.followup;
    subject.label = e.label ? *e.label : derive_label(*e.baseline, *e.followup);
    dataset.push_back(std::move(subject));
  }
  return dataset;
}

// ---------------------------------------------------------------------------
// Motif stores: JSON lines, one motif per line.

inline nlohmann::json to_json(const Motif& m) {
  return nlohmann::json{{"id", m.id},        {"subject", m.subject},
                        {"channel", m.channel}, {"band", m.band},
                        {"start", m.start},  {"length_samples", m.length},
                        {"k", m.k},          {"values", m.values}};
}

inline Motif motif_from_json(const nlohmann::json& j) {
  Motif m;
  m.id = j.at("id").get<std::string>();
  m.subject = j.at("subject").get<std::string>();
  m.channel = j.at("channel").get<std::string>();
  m.band = j.at("band").get<std::string>();
  m.start = j.at("start").get<std::size_t>();
  m.length = j.at("length_samples").get<std::size_t>();
  m.k = j.at("k").get<std::size_t>();
  m.values = j.at("values").get<std::vector<double>>();
  return m;
}

inline void write_motifs_jsonl(const fs::path& path, const std::vector<Motif>& motifs) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write motif store: " + path.string());
  for (const auto& m : motifs) out << to_json(m).dump() << "\n";
}

inline std::vector<Motif> read_motifs_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open motif store: " + path.string());
  std::vector<Motif> motifs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    motifs.push_back(motif_from_json(nlohmann::json::parse(line)));
  }
  return motifs;
}

inline void write_scored_motifs_jsonl(const fs::path& path,
                                      const std::vector<ScoredMotif>& scored) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write scored motif store: " + path.string());
  for (const auto& sm : scored) {
    nlohmann::json j = to_json(sm.motif);
    j["difference_score"] = sm.difference_score;
    j["source_class"] = sm.source_class;
    j["source_group"] = sm.source_group;
    out << j.dump() << "\n";
  }
}

inline std::vector<ScoredMotif> read_scored_motifs_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open scored motif store: " + path.string());
  std::vector<ScoredMotif> scored;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    ScoredMotif sm;
    sm.motif = motif_from_json(j);
    sm.difference_score = j.at("difference_score").get<double>();
    sm.source_class = j.at("source_class").get<int>();
    sm.source_group = j.at("source_group").get<std::string>();
    scored.push_back(std::move(sm));
  }
  return scored;
}

// ---------------------------------------------------------------------------
// Feature matrix CSV: subject,label,group, then one column per motif id.

inline void write_feature_matrix_csv(const fs::path& path, const FeatureMatrix& fm) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write feature matrix: " + path.string());
  out << "subject,label,group";
  for (const auto& id : fm.motif_ids) out << "," << id;
  out << "\n";
  for (std::size_t i = 0; i < fm.subjects.size(); ++i) {
    out << fm.subjects[i] << "," << fm.labels[i] << "," << fm.groups[i];
    for (double v : fm.values[i]) out << "," << format_double(v);
    out << "\n";
  }
}

inline FeatureMatrix read_feature_matrix_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open feature matrix: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw data_error("empty feature matrix: " + path.string());
  const auto header = detail::split_csv_line(line);
  if (header.size() < 3 || header[0] != "subject" || header[1] != "label" ||
      header[2] != "group")
    throw data_error("feature matrix header must start with subject,label,group");
  FeatureMatrix fm;
  fm.motif_ids.assign(header.begin() + 3, header.end());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw data_error("feature matrix row width mismatch in " + path.string());
    fm.subjects.push_back(fields[0]);
    fm.labels.push_back(static_cast<int>(detail::parse_double(fields[1], "label")));
    fm.groups.push_back(fields[2]);
    std::vector<double> row;
    for (std::size_t c = 3; c < fields.size(); ++c)
      row.push_back(detail::parse_double(fields[c], "feature value"));
    fm.values.push_back(std::move(row));
  }
  return fm;
}

// ---------------------------------------------------------------------------
// Evaluation report: JSON plus a per-fold CSV table for plotting.

inline nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& fr : report.folds)
    folds.push_back({{"train_accuracy", fr.train_accuracy},
                     {"train_f1", fr.train_f1},
                     {"val_accuracy", fr.val_accuracy},
                     {"val_f1", fr.val_f1},
                     {"chosen", fr.chosen}});
  return nlohmann::json{{"folds", folds},
                        {"mean_train_accuracy", report.mean_train_accuracy},
                        {"mean_train_f1", report.mean_train_f1},
                        {"mean_val_accuracy", report.mean_val_accuracy},
                        {"mean_val_f1", report.mean_val_f1},
                        {"selected_features", report.selected_features}};
}

inline void write_report_json(const fs::path& path, const EvalReport& report) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write report: " + path.string());
  out << to_json(report).dump(2) << "\n";
}

inline void write_report_csv(const fs::path& path, const EvalReport& report) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write report table: " + path.string());
  out << "fold,train_accuracy,train_f1,val_accuracy,val_f1,chosen\n";
  for (std::size_t i = 0; i < report.folds.size(); ++i) {
    const auto& fr = report.folds[i];
    out << i << "," << format_double(fr.train_accuracy) << "," << format_double(fr.train_f1)
        << "," << format_double(fr.val_accuracy) << "," << format_double(fr.val_f1) << ","
        << fr.chosen << "\n";
  }
}

inline void write_fisher_csv(const fs::path& path, const FeatureMatrix& fm,
                             const std::vector<double>& projection) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write projection: " + path.string());
  out << "subject,label,group,projection\n";
  for (std::size_t i = 0; i < fm.subjects.size(); ++i)
    out << fm.subjects[i] << "," << fm.labels[i] << "," << fm.groups[i] << ","
        << format_double(projection[i]) << "\n";
}

}  // namespace tsmotif
