#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "tsmotif/config.hpp"
#include "tsmotif/dataset.hpp"
#include "tsmotif/errors.hpp"
#include "tsmotif/features.hpp"
#include "tsmotif/io.hpp"
#include "tsmotif/model_selection.hpp"
#include "tsmotif/motiflets.hpp"
#include "tsmotif/parallel.hpp"
#include "tsmotif/selection.hpp"
#include "tsmotif/signal_prep.hpp"

namespace tsmotif {

namespace detail {

class StageTimer {
 public:
  explicit StageTimer(std::string name)
      : name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
  void done(const std::string& counts) const {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start_)
                        .count();
    std::cerr << "[" << name_ << "] " << counts << " ms=" << ms << "\n";
  }

 private:
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

/// The full preprocessing chain: decimation to the working rate, edge
/// trimming, average reference, broad bandpass, artifact-window rejection.
inline Recording preprocess_recording(const Recording& rec, const PreprocessConfig& prep) {
  Recording out = rec;
  const double ratio = rec.rate / prep.target_rate_hz;
  const auto factor = static_cast<std::size_t>(std::llround(ratio));
  if (factor >= 2 && std::abs(ratio - static_cast<double>(factor)) < 1e-9)
    out = decimate(out, factor);
  if (prep.trim_s > 0.0) out = trim_edges(out, prep.trim_s);
  if (out.n_channels() >= 2) out = average_reference(out);
  out = bandpass(out, prep.bandpass_low_hz, prep.bandpass_high_hz);
  if (std::isfinite(prep.artifact_power_z))
    out = reject_artifact_windows(out, prep.artifact_window_s, prep.artifact_power_z)
              .recording;
  return out;
}

inline std::vector<SubjectRecord> preprocess_dataset(const std::vector<SubjectRecord>& raw,
                                                     const PreprocessConfig& prep,
                                                     unsigned threads) {
  std::vector<SubjectRecord> out(raw.size());
  parallel_for(raw.size(), threads, [&](std::size_t i) {
    out[i] = raw[i];
    out[i].recording = preprocess_recording(raw[i].recording, prep);
  });
  return out;
}

struct BandArtifacts {
  std::vector<Motif> motifs;
  std::vector<ScoredMotif> scored;
  std::vector<ScoredMotif> selected;
  FeatureMatrix features;
  EvalReport report;
};

/// RFE down to the configured feature count (depth-3 Gini tree as the
/// eliminating estimator), then nested stratified CV over the grid.
inline EvalReport evaluate_features(const FeatureMatrix& fm, const RunConfig& cfg) {
  if (fm.motif_ids.empty()) throw data_error("evaluate: feature matrix has no columns");
  if (fm.subjects.size() < cfg.folds)
    throw std::invalid_argument("evaluate: fewer subjects than folds");

  std::vector<std::size_t> selected(fm.motif_ids.size());
  std::iota(selected.begin(), selected.end(), 0);
  if (fm.motif_ids.size() > cfg.rfe_target_k) {
    EstimatorSpec eliminator;
    eliminator.kind = EstimatorKind::decision_tree;
    eliminator.criterion = SplitCriterion::gini;
    eliminator.max_depth = 3;
    selected = rfe(fm.values, fm.labels, eliminator, cfg.rfe_target_k, cfg.seed);
  }
  Matrix X(fm.values.size(), std::vector<double>(selected.size()));
  for (std::size_t i = 0; i < fm.values.size(); ++i)
    for (std::size_t j = 0; j < selected.size(); ++j) X[i][j] = fm.values[i][selected[j]];

  EvalReport report = stratified_kfold_cv(X, fm.labels, fm.groups, cfg.folds,
                                          estimator_grid(cfg.grids), cfg.seed);
  for (std::size_t j : selected) report.selected_features.push_back(fm.motif_ids[j]);
  return report;
}

/// Discover -> score -> select -> features -> RFE -> CV for one band of an
/// already preprocessed dataset.
inline BandArtifacts run_band(const std::vector<SubjectRecord>& preprocessed,
                              const BandSpec& band, const RunConfig& cfg,
                              unsigned threads) {
  BandArtifacts art;

  detail::StageTimer t_band("band " + band.name);
  const BandDataset bd = make_band_dataset(preprocessed, band);

  detail::StageTimer t_discover("discover " + band.name);
  const auto lengths = length_grid(cfg, band);
  art.motifs = extract_motifs(bd, lengths, cfg.k_max, cfg.elbow_alpha, threads);
  t_discover.done("motifs=" + std::to_string(art.motifs.size()));

  detail::StageTimer t_score("score " + band.name);
  art.scored = score_motifs(art.motifs, bd, cfg.percentage, threads);
  art.selected = select_balanced(art.scored, cfg.n_per_cell);
  t_score.done("selected=" + std::to_string(art.selected.size()));

  detail::StageTimer t_features("features " + band.name);
  art.features = build_feature_matrix(bd, art.selected, threads);
  t_features.done("cells=" + std::to_string(art.features.subjects.size() *
                                            art.features.motif_ids.size()));

  detail::StageTimer t_eval("evaluate " + band.name);
  art.report = evaluate_features(art.features, cfg);
  t_eval.done("mean_val_f1=" + format_double(art.report.mean_val_f1));
  t_band.done("done");
  return art;
}

/// Restricts a feature matrix to the report's surviving columns, for the
/// Fisher projection export.
inline Matrix restrict_to_selected(const FeatureMatrix& fm,
                                   const std::vector<std::string>& selected_ids) {
  std::vector<std::size_t> cols;
  for (const auto& id : selected_ids)
    for (std::size_t j = 0; j < fm.motif_ids.size(); ++j)
      if (fm.motif_ids[j] == id) cols.push_back(j);
  Matrix X(fm.values.size(), std::vector<double>(cols.size()));
  for (std::size_t i = 0; i < fm.values.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) X[i][j] = fm.values[i][cols[j]];
  return X;
}

/// End-to-end run over every configured band; artifacts land in out_dir.
inline std::map<std::string, EvalReport> run_pipeline(const std::vector<SubjectRecord>& raw,
                                                      const RunConfig& cfg,
                                                      const std::filesystem::path& out_dir,
                                                      unsigned threads) {
  std::filesystem::create_directories(out_dir);

  detail::StageTimer t_prep("preprocess");
  const auto preprocessed = preprocess_dataset(raw, cfg.prep, threads);
  t_prep.done("subjects=" + std::to_string(preprocessed.size()));

  std::vector<Motif> all_motifs;
  std::vector<ScoredMotif> all_scored;
  std::map<std::string, EvalReport> reports;

  for (const auto& band : cfg.bands) {
    BandArtifacts art = run_band(preprocessed, band, cfg, threads);

    write_feature_matrix_csv(out_dir / ("features_" + band.name + ".csv"), art.features);
    write_report_json(out_dir / ("report_" + band.name + ".json"), art.report);
    write_report_csv(out_dir / ("cv_folds_" + band.name + ".csv"), art.report);
    const Matrix X = restrict_to_selected(art.features, art.report.selected_features);
    write_fisher_csv(out_dir / ("fisher_" + band.name + ".csv"), art.features,
                     fisher_projection(X, art.features.labels));

    all_motifs.insert(all_motifs.end(), art.motifs.begin(), art.motifs.end());
    all_scored.insert(all_scored.end(), art.scored.begin(), art.scored.end());
    reports.emplace(band.name, std::move(art.report));
  }

  write_motifs_jsonl(out_dir / "motifs.jsonl", all_motifs);
  write_scored_motifs_jsonl(out_dir / "scored_motifs.jsonl", all_scored);
  return reports;
}

inline std::map<std::string, EvalReport> run_pipeline(
    const std::filesystem::path& manifest_path, const RunConfig& cfg,
    const std::filesystem::path& out_dir, unsigned threads) {
  return run_pipeline(load_dataset(manifest_path), cfg, out_dir, threads);
}

}  // namespace tsmotif
