// tsmotif command line: staged or end-to-end motif discovery and
// classification over multichannel recordings.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tsmotif/config.hpp"
#include "tsmotif/io.hpp"
#include "tsmotif/pipeline.hpp"
#include "tsmotif/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalArgs {
  std::string config_path;
  std::string band_filter;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

tsmotif::RunConfig resolve_config(const GlobalArgs& args) {
  tsmotif::RunConfig cfg = args.config_path.empty()
                               ? tsmotif::RunConfig{}
                               : tsmotif::load_config(args.config_path);
  if (args.seed) cfg.seed = *args.seed;
  if (args.threads) cfg.threads = *args.threads;
  if (!args.band_filter.empty()) {
    std::vector<tsmotif::BandSpec> kept;
    for (const auto& band : cfg.bands)
      if (band.name == args.band_filter) kept.push_back(band);
    if (kept.empty())
      throw tsmotif::config_error("unknown band: " + args.band_filter);
    cfg.bands = kept;
  }
  return cfg;
}

json tree_to_json(const tsmotif::DecisionTreeModel& tree) {
  json nodes = json::array();
  for (const auto& node : tree.nodes)
    nodes.push_back({{"feature", node.feature},
                     {"threshold", node.threshold},
                     {"left", node.left},
                     {"right", node.right},
                     {"p1", node.p1},
                     {"n", node.n}});
  return {{"kind", "decision_tree"},
          {"criterion", tsmotif::to_string(tree.criterion)},
          {"max_depth", tree.max_depth},
          {"nodes", nodes}};
}

json model_to_json(const tsmotif::TrainedModel& model) {
  if (const auto* tree = std::get_if<tsmotif::DecisionTreeModel>(&model.model))
    return tree_to_json(*tree);
  if (const auto* forest = std::get_if<tsmotif::RandomForestModel>(&model.model)) {
    json trees = json::array();
    for (const auto& tree : forest->trees) trees.push_back(tree_to_json(tree));
    return {{"kind", "random_forest"}, {"seed", forest->seed}, {"trees", trees}};
  }
  const auto& logistic = std::get<tsmotif::LogisticModel>(model.model);
  return {{"kind", "logistic"},
          {"weights", logistic.weights},
          {"bias", logistic.bias},
          {"feature_mean", logistic.feature_mean},
          {"feature_std", logistic.feature_std},
          {"C", logistic.C},
          {"penalty", tsmotif::to_string(logistic.penalty)}};
}

std::vector<tsmotif::ScoredMotif> band_subset(const std::vector<tsmotif::ScoredMotif>& all,
                                              const std::string& band) {
  std::vector<tsmotif::ScoredMotif> out;
  for (const auto& sm : all)
    if (sm.motif.band == band) out.push_back(sm);
  return out;
}

std::vector<std::string> bands_present(const std::vector<tsmotif::ScoredMotif>& scored) {
  std::vector<std::string> bands;
  for (const auto& sm : scored)
    if (std::find(bands.begin(), bands.end(), sm.motif.band) == bands.end())
      bands.push_back(sm.motif.band);
  return bands;
}

int run(int argc, char** argv) {
  CLI::App app{"motif discovery and distance-feature classification for "
               "multichannel time series"};
  app.require_subcommand(1);

  GlobalArgs args;
  std::uint64_t seed_opt = 0;
  unsigned threads_opt = 0;
  app.add_option("--config", args.config_path, "run configuration (TOML)");
  app.add_option("--band", args.band_filter, "restrict to one configured band");
  app.add_option("--out-dir", args.out_dir, "artifact directory");
  auto* seed_flag = app.add_option("--seed", seed_opt, "override config seed");
  auto* threads_flag = app.add_option("--threads", threads_opt, "worker thread count");

  std::string manifest_path;
  std::string motifs_path, scored_path, selected_path;
  std::vector<std::string> feature_files;

  auto* cmd_synth = app.add_subcommand("synth", "generate a synthetic labeled dataset");
  tsmotif::SynthSpec synth_spec;
  cmd_synth->add_option("--per-class", synth_spec.per_class, "subjects per class");
  cmd_synth->add_option("--channels", synth_spec.n_channels, "channel count");
  cmd_synth->add_option("--rate", synth_spec.rate, "sampling rate (Hz)");
  cmd_synth->add_option("--duration", synth_spec.duration_s, "recording length (s)");
  cmd_synth->add_option("--noise", synth_spec.noise_sigma, "background noise sigma");
  cmd_synth->add_option("--amplitude", synth_spec.motif_amplitude, "planted burst amplitude");
  cmd_synth->add_option("--occurrences", synth_spec.occurrences, "plants per class-1 subject");
  cmd_synth->add_option("--margin", synth_spec.margin_s, "keep-out zone at both ends (s)");
  cmd_synth->add_flag("--groups", synth_spec.alternate_groups, "tag subjects f/m alternately");
  cmd_synth->add_flag("--class0-family", synth_spec.class0_family,
                      "plant a second, distinct family in class-0 subjects");

  auto* cmd_pre = app.add_subcommand("preprocess", "run the preprocessing chain");
  cmd_pre->add_option("--manifest", manifest_path, "dataset manifest CSV")->required();

  auto* cmd_discover = app.add_subcommand("discover", "extract motifs per band");
  cmd_discover->add_option("--manifest", manifest_path, "preprocessed manifest CSV")->required();

  auto* cmd_score = app.add_subcommand("score", "compute difference scores");
  cmd_score->add_option("--manifest", manifest_path, "preprocessed manifest CSV")->required();
  cmd_score->add_option("--motifs", motifs_path, "motif store (default <out-dir>/motifs.jsonl)");

  auto* cmd_select = app.add_subcommand("select", "keep top motifs per class/group cell");
  cmd_select->add_option("--scored", scored_path,
                         "scored motifs (default <out-dir>/scored_motifs.jsonl)");

  auto* cmd_features = app.add_subcommand("features", "build per-band feature matrices");
  cmd_features->add_option("--manifest", manifest_path, "preprocessed manifest CSV")->required();
  cmd_features->add_option("--selected", selected_path,
                           "selected motifs (default <out-dir>/selected_motifs.jsonl)");

  auto* cmd_train = app.add_subcommand("train", "fit the best model on a feature matrix");
  cmd_train->add_option("files", feature_files, "feature matrix CSV files")->required();

  auto* cmd_eval = app.add_subcommand("evaluate", "cross-validate a feature matrix");
  cmd_eval->add_option("files", feature_files, "feature matrix CSV files")->required();

  auto* cmd_pipeline = app.add_subcommand("pipeline", "full end-to-end run");
  cmd_pipeline->add_option("--manifest", manifest_path, "dataset manifest CSV")->required();

  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);
  if (!seed_flag->empty()) args.seed = seed_opt;
  if (!threads_flag->empty()) args.threads = threads_opt;

  const tsmotif::RunConfig cfg = resolve_config(args);
  const fs::path out_dir = args.out_dir;
  fs::create_directories(out_dir);

  if (cmd_synth->parsed()) {
    synth_spec.seed = cfg.seed;
    const auto ds = tsmotif::generate_synthetic_dataset(synth_spec);
    tsmotif::write_synthetic_dataset(ds, out_dir);
    std::cerr << "[synth] subjects=" << ds.subjects.size() << " out=" << out_dir << "\n";
    return 0;
  }

  if (cmd_pre->parsed()) {
    const auto raw = tsmotif::load_dataset(manifest_path);
    const auto processed = tsmotif::preprocess_dataset(raw, cfg.prep, cfg.threads);
    const fs::path pre_dir = out_dir / "preprocessed";
    fs::create_directories(pre_dir);
    std::vector<tsmotif::ManifestEntry> entries;
    for (const auto& subject : processed) {
      const std::string file = subject.id + ".csv";
      tsmotif::write_recording_csv(pre_dir / file, subject.recording);
      tsmotif::ManifestEntry e;
      e.id = subject.id;
      e.path = file;
      e.rate = subject.recording.rate;
      e.group = subject.group;
      e.label = subject.label;
      e.boundaries = subject.recording.boundaries;
      entries.push_back(std::move(e));
    }
    tsmotif::write_manifest(pre_dir / "manifest.csv", entries);
    std::cerr << "[preprocess] subjects=" << entries.size() << " out=" << pre_dir << "\n";
    return 0;
  }

  if (cmd_discover->parsed()) {
    const auto dataset = tsmotif::load_dataset(manifest_path);
    std::vector<tsmotif::Motif> all;
    for (const auto& band : cfg.bands) {
      const auto bd = tsmotif::make_band_dataset(dataset, band);
      const auto motifs = tsmotif::extract_motifs(bd, tsmotif::length_grid(cfg, band),
                                                  cfg.k_max, cfg.elbow_alpha, cfg.threads);
      all.insert(all.end(), motifs.begin(), motifs.end());
    }
    tsmotif::write_motifs_jsonl(out_dir / "motifs.jsonl", all);
    std::cerr << "[discover] motifs=" << all.size() << "\n";
    return 0;
  }

  if (cmd_score->parsed()) {
    const auto dataset = tsmotif::load_dataset(manifest_path);
    const fs::path in_path = motifs_path.empty() ? out_dir / "motifs.jsonl" : fs::path(motifs_path);
    const auto motifs = tsmotif::read_motifs_jsonl(in_path);
    std::vector<tsmotif::ScoredMotif> all;
    for (const auto& band : cfg.bands) {
      std::vector<tsmotif::Motif> band_motifs;
      for (const auto& m : motifs)
        if (m.band == band.name) band_motifs.push_back(m);
      if (band_motifs.empty()) continue;
      const auto bd = tsmotif::make_band_dataset(dataset, band);
      const auto scored =
          tsmotif::score_motifs(band_motifs, bd, cfg.percentage, cfg.threads);
      all.insert(all.end(), scored.begin(), scored.end());
    }
    tsmotif::write_scored_motifs_jsonl(out_dir / "scored_motifs.jsonl", all);
    std::cerr << "[score] scored=" << all.size() << "\n";
    return 0;
  }

  if (cmd_select->parsed()) {
    const fs::path in_path =
        scored_path.empty() ? out_dir / "scored_motifs.jsonl" : fs::path(scored_path);
    const auto scored = tsmotif::read_scored_motifs_jsonl(in_path);
    std::vector<tsmotif::ScoredMotif> all;
    for (const auto& band : bands_present(scored)) {
      const auto kept = tsmotif::select_balanced(band_subset(scored, band), cfg.n_per_cell);
      all.insert(all.end(), kept.begin(), kept.end());
    }
    tsmotif::write_scored_motifs_jsonl(out_dir / "selected_motifs.jsonl", all);
    std::cerr << "[select] selected=" << all.size() << "\n";
    return 0;
  }

  if (cmd_features->parsed()) {
    const auto dataset = tsmotif::load_dataset(manifest_path);
    const fs::path in_path =
        selected_path.empty() ? out_dir / "selected_motifs.jsonl" : fs::path(selected_path);
    const auto selected = tsmotif::read_scored_motifs_jsonl(in_path);
    for (const auto& band : cfg.bands) {
      const auto subset = band_subset(selected, band.name);
      if (subset.empty()) continue;
      const auto bd = tsmotif::make_band_dataset(dataset, band);
      const auto fm = tsmotif::build_feature_matrix(bd, subset, cfg.threads);
      tsmotif::write_feature_matrix_csv(out_dir / ("features_" + band.name + ".csv"), fm);
      std::cerr << "[features] band=" << band.name << " motifs=" << fm.motif_ids.size()
                << "\n";
    }
    return 0;
  }

  if (cmd_train->parsed() || cmd_eval->parsed()) {
    for (const auto& file : feature_files) {
      const auto fm = tsmotif::read_feature_matrix_csv(file);
      const std::string stem = fs::path(file).stem().string();
      const std::string band = stem.rfind("features_", 0) == 0 ? stem.substr(9) : stem;
      tsmotif::EvalReport report = tsmotif::evaluate_features(fm, cfg);
      if (cmd_eval->parsed()) {
        tsmotif::write_report_json(out_dir / ("report_" + band + ".json"), report);
        tsmotif::write_report_csv(out_dir / ("cv_folds_" + band + ".csv"), report);
        const auto X = tsmotif::restrict_to_selected(fm, report.selected_features);
        tsmotif::write_fisher_csv(out_dir / ("fisher_" + band + ".csv"), fm,
                                  tsmotif::fisher_projection(X, fm.labels));
        std::cerr << "[evaluate] band=" << band
                  << " mean_val_f1=" << report.mean_val_f1 << "\n";
      } else {
        // refit the most frequently chosen grid point on all rows
        std::map<std::string, std::size_t> votes;
        for (const auto& fold : report.folds) ++votes[fold.chosen];
        std::string winner;
        std::size_t best = 0;
        for (const auto& [name, count] : votes)
          if (count > best) {
            best = count;
            winner = name;
          }
        const auto grid = tsmotif::estimator_grid(cfg.grids);
        const auto X = tsmotif::restrict_to_selected(fm, report.selected_features);
        for (const auto& spec : grid)
          if (spec.describe() == winner) {
            const auto model = tsmotif::fit_estimator(X, fm.labels, spec, cfg.seed);
            json j = model_to_json(model);
            j["spec"] = winner;
            j["features"] = report.selected_features;
            std::ofstream out(out_dir / ("model_" + band + ".json"));
            out << j.dump(2) << "\n";
            break;
          }
        std::cerr << "[train] band=" << band << " model=" << winner << "\n";
      }
    }
    return 0;
  }

  if (cmd_pipeline->parsed()) {
    const auto reports = tsmotif::run_pipeline(fs::path(manifest_path), cfg, out_dir,
                                               cfg.threads);
    for (const auto& [band, report] : reports)
      std::cout << band << ": mean_val_f1=" << report.mean_val_f1
                << " mean_val_accuracy=" << report.mean_val_accuracy << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const tsmotif::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const tsmotif::data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}
