// Acceptance gate: ten end-to-end checks, one PASS/FAIL line each.
// Usage: acceptance <path-to-cli-binary>

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
#include "tsmotif/classifiers.hpp"
#include "tsmotif/dataset.hpp"
#include "tsmotif/distance.hpp"
#include "tsmotif/io.hpp"
#include "tsmotif/matching.hpp"
#include "tsmotif/motiflets.hpp"
#include "tsmotif/selection.hpp"
#include "tsmotif/signal_prep.hpp"
#include "tsmotif/synth.hpp"

using namespace tsmotif;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void report(int criterion, const char* name, bool ok, const std::string& detail) {
  std::printf("criterion %2d: %s  %s (%s)\n", criterion, ok ? "PASS" : "FAIL", name,
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

Series make_series(std::vector<double> values) {
  Series s;
  s.values = std::move(values);
  return s;
}

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, a, b);
  return buf;
}

// ---------------------------------------------------------------------------

void criterion_1_distance_oracle() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + rng() % 127;           // 2..128
    const std::size_t n = m + 1 + rng() % (512 - m); // m+1..512
    std::vector<double> q(m), t(n);
    for (double& v : q) v = g(rng);
    for (double& v : t) v = g(rng);
    const auto fast = distance_profile(q, t).distances;
    const auto naive = oracle::distance_profile(q, t);
    for (std::size_t i = 0; i < naive.size(); ++i)
      worst = std::max(worst, std::abs(fast[i] - naive[i]));
  }
  const double elapsed = seconds_since(start);
  report(1, "distance-profile oracle equivalence", worst <= 1e-6 && elapsed < 10.0,
         fmt("max abs err %.2e, %.1fs", worst, elapsed));
}

void criterion_2_exact_vs_approx() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(202);
  std::normal_distribution<double> g(0.0, 1.0);
  bool extent_ok = true;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 20 + rng() % 41;  // 20..60
    const std::size_t l = 2 + rng() % 7;    // 2..8
    const std::size_t k = 2 + rng() % 2;    // 2..3
    std::vector<double> t(n);
    for (double& v : t) v = g(rng);
    const Series series = make_series(std::move(t));
    const auto approx = approx_k_motiflet(series, l, k);
    const auto exact = exact_k_motiflet(series, l, k);
    if (approx.extent < exact.extent - 1e-9) extent_ok = false;
  }
  int planted_ok = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto t = oracle::gaussian_noise(seed, 60, 0.1);
    oracle::plant(t, oracle::bump(8, 4.0), seed % 2 ? std::vector<std::size_t>{5, 30}
                                                    : std::vector<std::size_t>{10, 28, 46});
    const Series series = make_series(std::move(t));
    const std::size_t k = seed % 2 ? 2 : 3;
    if (approx_k_motiflet(series, 8, k).indices == exact_k_motiflet(series, 8, k).indices)
      ++planted_ok;
  }
  const double elapsed = seconds_since(start);
  report(2, "exact vs approximate motiflets",
         extent_ok && planted_ok == 20 && elapsed < 60.0,
         fmt("planted agreement %.0f/20, %.1fs", planted_ok, elapsed));
}

void criterion_3_elbow_recovery() {
  const std::vector<std::size_t> starts = {10, 60, 110, 160, 210};
  int recovered = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto t = oracle::gaussian_noise(seed, 280, 0.25);
    oracle::plant(t, oracle::bump(16, 4.0), starts);
    const auto elbows = find_elbows(extent_function(make_series(std::move(t)), 16, 8), 2.0);
    if (std::find(elbows.begin(), elbows.end(), 5) != elbows.end()) ++recovered;
  }
  report(3, "elbow recovery of five plants", recovered >= 18, fmt("%.0f/20 seeds", recovered));
}

void criterion_4_length_recovery() {
  const std::vector<std::size_t> starts = {15, 75, 135, 195, 255};
  int recovered = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto t = oracle::gaussian_noise(seed, 330);
    oracle::plant_exact(t, oracle::sine_period(20, 8.0), starts, seed + 5000, 0.3);
    if (find_best_motif_length(make_series(std::move(t)), {10, 20, 40}, 6) == 20) ++recovered;
  }
  report(4, "length recovery among {10, 20, 40}", recovered >= 18,
         fmt("%.0f/20 seeds", recovered));
}

void criterion_5_match_threshold() {
  const bool units = match_threshold({1.0, 2.0, 3.0}) == 1.0 &&
                     match_threshold({5.0, 5.0, 5.0}) == 5.0 &&
                     match_threshold({2.0}) == 2.0;
  std::mt19937_64 rng(505);
  std::normal_distribution<double> g(0.0, 1.0);
  int nonempty = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 32 + rng() % 97;
    std::vector<double> q(8), t(n);
    for (double& v : q) v = g(rng);
    for (double& v : t) v = g(rng);
    if (!match(q, make_series(std::move(t))).entries.empty()) ++nonempty;
  }
  report(5, "adaptive match threshold", units && nonempty == 1000,
         fmt("nonempty %.0f/1000", nonempty));
}

// The bundled dataset shared by criteria 6, 7, and 9: ten subjects per
// class, alpha-band bursts planted in channel 0 of every class-1 subject.
SynthSpec bundled_spec() {
  SynthSpec spec;
  spec.duration_s = 20.0;
  spec.occurrences = 6;
  spec.margin_s = 2.0;
  spec.motif_amplitude = 6.0;
  spec.seed = 42;
  return spec;
}

void criterion_6_difference_score() {
  const auto ds = generate_synthetic_dataset(bundled_spec());
  const BandSpec alpha{"alpha", 8.0, 12.0, 24.0};
  std::vector<SubjectRecord> raw = ds.subjects;
  const BandDataset bd = make_band_dataset(raw, alpha);
  const double scale = alpha.target_rate / ds.spec.rate;
  const std::size_t l = static_cast<std::size_t>(ds.spec.motif_s * alpha.target_rate);

  auto cut = [&](const BandSubject& subject, const std::string& channel, std::size_t start,
                 const std::string& id) {
    Motif m;
    m.id = id;
    m.subject = subject.id;
    m.channel = channel;
    m.band = alpha.name;
    m.start = start;
    m.length = l;
    const auto& values = subject.channels.at(channel).values;
    m.values.assign(values.begin() + static_cast<std::ptrdiff_t>(start),
                    values.begin() + static_cast<std::ptrdiff_t>(start + l));
    return m;
  };

  std::vector<Motif> motifs;
  std::size_t n_planted = 0;
  for (const auto& subject : bd.subjects) {
    if (subject.label == 1) {
      const std::size_t raw_start = ds.planted_starts.at(subject.id).front();
      const auto start = static_cast<std::size_t>(std::llround(raw_start * scale));
      motifs.push_back(cut(subject, "ch0", start, "planted:" + subject.id));
      ++n_planted;
    }
    // non-planted comparison motifs come from the channel without plants
    for (std::size_t start : {50, 200, 350})
      motifs.push_back(
          cut(subject, "ch1", start, "noise:" + subject.id + ":" + std::to_string(start)));
  }
  const auto scored = score_motifs(motifs, bd, 0.5);
  double min_planted = std::numeric_limits<double>::infinity();
  std::vector<double> noise_scores;
  for (const auto& sm : scored) {
    if (sm.motif.id.rfind("planted:", 0) == 0)
      min_planted = std::min(min_planted, sm.difference_score);
    else
      noise_scores.push_back(sm.difference_score);
  }
  std::sort(noise_scores.begin(), noise_scores.end());
  const double median = noise_scores[noise_scores.size() / 2];
  report(6, "difference-score discrimination",
         n_planted == 10 && min_planted >= 5.0 * median,
         fmt("min planted %.3f vs 5x median noise %.3f", min_planted, 5.0 * median));
}

int run_cli(const std::string& cli, const std::string& args, const fs::path& log) {
  const std::string cmd = "\"" + cli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  return std::system(cmd.c_str());
}

void write_run_config(const fs::path& path) {
  std::ofstream out(path);
  out << "seed = 42\n"
         "k_max = 8\n"
         "n_per_cell = 10\n"
         "folds = 5\n"
         "rfe_target_k = 8\n"
         "[lengths]\n"
         "min_s = 0.75\n"
         "max_s = 1.5\n"
         "count = 3\n"
         "[preprocess]\n"
         "target_rate_hz = 128\n"
         "trim_s = 2\n"
         "artifact_power_z = 20\n"
         "[band.alpha]\n"
         "low = 8\n"
         "high = 12\n"
         "target_rate = 24\n"
         "[grid]\n"
         "estimators = [\"decision_tree\", \"logistic\"]\n"
         "[grid.decision_tree]\n"
         "criterion = \"gini\"\n"
         "max_depth = [3]\n"
         "[grid.logistic]\n"
         "C = [1.0]\n"
         "penalty = \"l2\"\n";
}

double read_mean_val_f1(const fs::path& report_path) {
  std::ifstream in(report_path);
  nlohmann::json j;
  in >> j;
  return j.at("mean_val_f1").get<double>();
}

void criterion_7_end_to_end(const std::string& cli, const fs::path& work) {
  const auto start = std::chrono::steady_clock::now();
  const fs::path data = work / "data";
  const fs::path cfg = work / "run.toml";
  write_run_config(cfg);

  bool ok = run_cli(cli,
                    "synth --per-class 10 --duration 20 --occurrences 6 --margin 2 "
                    "--amplitude 6 --seed 42 --out-dir \"" +
                        data.string() + "\"",
                    work / "synth.log") == 0;

  const fs::path out_true = work / "out_true";
  ok = ok && run_cli(cli,
                     "pipeline --manifest \"" + (data / "manifest.csv").string() +
                         "\" --config \"" + cfg.string() + "\" --band alpha --out-dir \"" +
                         out_true.string() + "\"",
                     work / "pipeline_true.log") == 0;
  const double f1 = ok ? read_mean_val_f1(out_true / "report_alpha.json") : 0.0;

  // permutation baseline: same recordings, labels reassigned alternately so
  // exactly half the subjects keep their true label
  auto entries = read_manifest(data / "manifest.csv");
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].label = static_cast<int>(i % 2);
  write_manifest(data / "manifest_shuffled.csv", entries);

  const fs::path out_perm = work / "out_perm";
  ok = ok && run_cli(cli,
                     "pipeline --manifest \"" + (data / "manifest_shuffled.csv").string() +
                         "\" --config \"" + cfg.string() + "\" --band alpha --out-dir \"" +
                         out_perm.string() + "\"",
                     work / "pipeline_perm.log") == 0;
  const double f1_perm = ok ? read_mean_val_f1(out_perm / "report_alpha.json") : 1.0;

  const double elapsed = seconds_since(start);
  report(7, "end-to-end synthetic classification",
         ok && f1 >= 0.9 && f1_perm <= 0.65 && elapsed < 300.0,
         fmt("f1 %.3f, shuffled f1 %.3f", f1, f1_perm) + fmt(", %.0fs", elapsed));
}

void criterion_8_classifiers() {
  std::mt19937_64 rng(808);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst_rel = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 20, d = 4;
    Matrix X(n, std::vector<double>(d));
    std::vector<int> y(n);
    std::vector<double> w(d);
    for (auto& row : X)
      for (double& v : row) v = g(rng);
    for (auto& v : y) v = static_cast<int>(rng() % 2);
    for (double& v : w) v = g(rng);
    const double b = g(rng);
    const double C = 0.5 + 2.0 * static_cast<double>(rng() % 1000) / 1000.0;
    const auto [gw, gb] = logistic_gradient(X, y, w, b, C);
    const double h = 1e-6;
    auto check = [&](double analytic, double numeric) {
      const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      worst_rel = std::max(worst_rel, std::abs(analytic - numeric) / scale);
    };
    for (std::size_t j = 0; j < d; ++j) {
      auto wp = w, wm = w;
      wp[j] += h;
      wm[j] -= h;
      check(gw[j], (logistic_objective(X, y, wp, b, C, Penalty::l2) -
                    logistic_objective(X, y, wm, b, C, Penalty::l2)) /
                       (2.0 * h));
    }
    check(gb, (logistic_objective(X, y, w, b + h, C, Penalty::l2) -
               logistic_objective(X, y, w, b - h, C, Penalty::l2)) /
                  (2.0 * h));
  }

  Matrix xor_X;
  std::vector<int> xor_y;
  for (int rep = 0; rep < 5; ++rep)
    for (int a = 0; a <= 1; ++a)
      for (int b = 0; b <= 1; ++b) {
        xor_X.push_back({static_cast<double>(a), static_cast<double>(b)});
        xor_y.push_back(a ^ b);
      }
  TreeOptions opt;
  opt.criterion = SplitCriterion::gini;
  opt.max_depth = 3;
  const auto tree = train_decision_tree(xor_X, xor_y, opt);
  bool xor_ok = true;
  for (std::size_t i = 0; i < xor_X.size(); ++i)
    if (tree.predict(xor_X[i]) != xor_y[i]) xor_ok = false;

  const double f1 = f1_and_accuracy({1, 1, 0, 0}, {1, 0, 0, 0}).second;
  report(8, "classifier correctness", worst_rel <= 1e-5 && xor_ok && f1 == 2.0 / 3.0,
         fmt("gradient rel err %.2e, xor+f1 unit checks", worst_rel));
}

void criterion_9_determinism(const std::string& cli, const fs::path& work) {
  const fs::path data = work / "det_data";
  const fs::path cfg = work / "det.toml";
  {
    std::ofstream out(cfg);
    out << "seed = 42\nk_max = 6\nn_per_cell = 3\nfolds = 2\nrfe_target_k = 4\n"
           "[lengths]\nmin_s = 0.75\nmax_s = 1.25\ncount = 2\n"
           "[preprocess]\ntarget_rate_hz = 128\ntrim_s = 1\nartifact_power_z = 20\n"
           "[band.alpha]\nlow = 8\nhigh = 12\ntarget_rate = 24\n"
           "[grid]\nestimators = \"decision_tree\"\n"
           "[grid.decision_tree]\ncriterion = \"gini\"\nmax_depth = [3]\n";
  }
  bool ok = run_cli(cli,
                    "synth --per-class 4 --duration 20 --amplitude 6 --occurrences 4 "
                    "--seed 42 --out-dir \"" +
                        data.string() + "\"",
                    work / "det_synth.log") == 0;
  const fs::path out1 = work / "det_out1";
  const fs::path out4 = work / "det_out4";
  for (const auto& [dir, threads] : {std::pair{out1, "1"}, std::pair{out4, "4"}})
    ok = ok && run_cli(cli,
                       "pipeline --manifest \"" + (data / "manifest.csv").string() +
                           "\" --config \"" + cfg.string() + "\" --threads " + threads +
                           " --out-dir \"" + dir.string() + "\"",
                       work / ("det_pipeline_" + std::string(threads) + ".log")) == 0;

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  std::size_t compared = 0;
  bool identical = ok;
  if (ok)
    for (const auto& entry : fs::directory_iterator(out1)) {
      const std::string body = slurp(entry.path());
      identical = identical && !body.empty() && slurp(out4 / entry.path().filename()) == body;
      ++compared;
    }
  report(9, "thread-count determinism", identical && compared >= 6,
         fmt("%.0f artifacts byte-identical", static_cast<double>(compared)));
}

void criterion_10_preprocessing() {
  std::mt19937_64 rng(1010);
  std::normal_distribution<double> g(0.0, 1.0);
  Recording rec;
  rec.rate = 128.0;
  for (int c = 0; c < 4; ++c) {
    rec.channels.push_back("ch" + std::to_string(c));
    std::vector<double> samples(512);
    for (double& v : samples) v = g(rng);
    rec.data.push_back(std::move(samples));
  }
  const Recording referenced = average_reference(rec);
  double worst_sum = 0.0;
  for (std::size_t i = 0; i < referenced.n_samples(); ++i) {
    double sum = 0.0;
    for (const auto& channel : referenced.data) sum += channel[i];
    worst_sum = std::max(worst_sum, std::abs(sum));
  }

  Recording tone;
  tone.rate = 128.0;
  tone.channels = {"ch0"};
  std::vector<double> samples(1024);
  for (std::size_t i = 0; i < samples.size(); ++i)
    samples[i] = std::sin(2.0 * 3.14159265358979323846 * 10.0 * static_cast<double>(i) / 128.0);
  tone.data.push_back(std::move(samples));
  const Recording banded = extract_band(tone, {"alpha", 8.0, 12.0, 24.0});
  const auto& out = banded.data[0];
  double peak_freq = 0.0, peak_mag = -1.0;
  for (double freq = 0.5; freq <= 11.5; freq += 0.5) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double phase = 2.0 * 3.14159265358979323846 * freq *
                           static_cast<double>(i) / banded.rate;
      re += out[i] * std::cos(phase);
      im -= out[i] * std::sin(phase);
    }
    const double mag = re * re + im * im;
    if (mag > peak_mag) {
      peak_mag = mag;
      peak_freq = freq;
    }
  }
  report(10, "preprocessing invariants", worst_sum <= 1e-9 && banded.rate == 24.0 &&
                                             peak_freq == 10.0,
         fmt("reference sum %.1e, band peak %.1f Hz", worst_sum, peak_freq));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <cli-binary>\n");
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path work =
      fs::temp_directory_path() / ("tsmotif_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(work);
  fs::create_directories(work);

  criterion_1_distance_oracle();
  criterion_2_exact_vs_approx();
  criterion_3_elbow_recovery();
  criterion_4_length_recovery();
  criterion_5_match_threshold();
  criterion_6_difference_score();
  criterion_7_end_to_end(cli, work);
  criterion_8_classifiers();
  criterion_9_determinism(cli, work);
  criterion_10_preprocessing();

  fs::remove_all(work);
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all 10 criteria passed\n");
  return 0;
}
