#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "tsmotif/classifiers.hpp"
#include "tsmotif/errors.hpp"

namespace tsmotif {

enum class EstimatorKind { decision_tree, random_forest, logistic };

inline std::string to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::decision_tree: return "decision_tree";
    case EstimatorKind::random_forest: return "random_forest";
    case EstimatorKind::logistic: return "logistic";
  }
  return "?";
}

/// One point in the hyperparameter grid.
struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::decision_tree;
  // tree / forest
  SplitCriterion criterion = SplitCriterion::gini;
  int max_depth = 3;
  std::size_t n_estimators = 10;
  std::size_t min_samples_leaf = 1;
  std::size_t min_samples_split = 2;
  // logistic
  double C = 1.0;
  Penalty penalty = Penalty::l2;

  std::string describe() const {
    std::string s = to_string(kind);
    switch (kind) {
      case EstimatorKind::decision_tree:
        s += "(criterion=" + to_string(criterion) + ",max_depth=" + std::to_string(max_depth) + ")";
        break;
      case EstimatorKind::random_forest:
        s += "(n_estimators=" + std::to_string(n_estimators) +
             ",max_depth=" + std::to_string(max_depth) +
             ",min_samples_leaf=" + std::to_string(min_samples_leaf) +
             ",min_samples_split=" + std::to_string(min_samples_split) + ")";
        break;
      case EstimatorKind::logistic: {
        std::string c = std::to_string(C);
        c.erase(c.find_last_not_of('0') + 1);
        if (!c.empty() && c.back() == '.') c.pop_back();
        s += "(C=" + c + ",penalty=" + to_string(penalty) + ")";
        break;
      }
    }
    return s;
  }
};

struct TrainedModel {
  std::variant<DecisionTreeModel, RandomForestModel, LogisticModel> model;

  int predict(const std::vector<double>& x) const {
    return std::visit([&](const auto& m) { return m.predict(x); }, model);
  }

  std::vector<int> predict_all(const Matrix& X) const {
    std::vector<int> out;
    out.reserve(X.size());
    for (const auto& row : X) out.push_back(predict(row));
    return out;
  }

  std::vector<double> importances() const {
    if (const auto* tree = std::get_if<DecisionTreeModel>(&model)) return tree->importances;
    if (const auto* forest = std::get_if<RandomForestModel>(&model))
      return forest->importances();
    const auto& logistic = std::get<LogisticModel>(model);
    std::vector<double> imp(logistic.weights.size());
    for (std::size_t j = 0; j < imp.size(); ++j) imp[j] = std::abs(logistic.weights[j]);
    return imp;
  }
};

inline TrainedModel fit_estimator(const Matrix& X, const std::vector<int>& y,
                                  const EstimatorSpec& spec, std::uint64_t seed) {
  TrainedModel out;
  switch (spec.kind) {
    case EstimatorKind::decision_tree: {
      TreeOptions opt;
      opt.criterion = spec.criterion;
      opt.max_depth = spec.max_depth;
      out.model = train_decision_tree(X, y, opt);
      break;
    }
    case EstimatorKind::random_forest: {
      ForestOptions opt;
      opt.n_estimators = spec.n_estimators;
      opt.criterion = spec.criterion;
      opt.max_depth = spec.max_depth;
      opt.min_samples_leaf = spec.min_samples_leaf;
      opt.min_samples_split = spec.min_samples_split;
      out.model = train_random_forest(X, y, opt, seed);
      break;
    }
    case EstimatorKind::logistic:
      out.model = train_logistic(X, y, spec.C, spec.penalty);
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Recursive feature elimination

/// Repeatedly fits the estimator and drops the single least important
/// feature until target_k remain; ties drop the highest feature index.
/// Returns surviving original column indices, ascending.
inline std::vector<std::size_t> rfe(const Matrix& X, const std::vector<int>& y,
                                    const EstimatorSpec& spec, std::size_t target_k,
                                    std::uint64_t seed = 0) {
  if (X.empty() || X.front().empty()) throw std::invalid_argument("rfe: empty matrix");
  const std::size_t d = X.front().size();
  if (target_k < 1 || target_k > d)
    throw std::invalid_argument("rfe: target_k must be in [1, d]");
  std::vector<std::size_t> active(d);
  std::iota(active.begin(), active.end(), 0);

  while (active.size() > target_k) {
    Matrix sub(X.size(), std::vector<double>(active.size()));
    for (std::size_t i = 0; i < X.size(); ++i)
      for (std::size_t j = 0; j < active.size(); ++j) sub[i][j] = X[i][active[j]];
    const auto imp = fit_estimator(sub, y, spec, seed).importances();
    std::size_t drop = 0;
    for (std::size_t j = 1; j < imp.size(); ++j)
      if (imp[j] <= imp[drop]) drop = j;  // ties remove the highest index
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(drop));
  }
  return active;
}

// ---------------------------------------------------------------------------
// Stratified k-fold cross-validation with nested hyperparameter search

/// Fold assignment stratified jointly by (class, group); degrades to
/// class-only stratification when some cell is smaller than the fold
/// count. Within each stratum members are shuffled by the seed and dealt
/// round-robin.
inline std::vector<std::size_t> stratified_fold_assignment(const std::vector<int>& y,
                                                           const std::vector<std::string>& groups,
                                                           std::size_t folds,
                                                           std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("stratified folds: need folds >= 2");
  if (y.size() < folds) throw std::invalid_argument("stratified folds: fewer samples than folds");
  const std::vector<std::string> no_groups(y.size(), "none");
  const std::vector<std::string>* strata_groups = &groups;

  std::map<std::pair<int, std::string>, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < y.size(); ++i) cells[{y[i], groups[i]}].push_back(i);
  for (const auto& [key, members] : cells)
    if (members.size() < folds) {
      static std::atomic<bool> warned{false};
      if (!warned.exchange(true))
        std::cerr << "[cv] cell (" << key.first << ", " << key.second
                  << ") smaller than fold count; stratifying by class only\n";
      strata_groups = &no_groups;
      break;
    }

  std::map<std::pair<int, std::string>, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < y.size(); ++i) strata[{y[i], (*strata_groups)[i]}].push_back(i);

  std::vector<std::size_t> assignment(y.size(), 0);
  std::size_t offset = 0;
  for (auto& [key, members] : strata) {
    std::mt19937_64 rng(splitmix64(seed ^ std::hash<std::string>{}(key.second)) +
                        static_cast<std::uint64_t>(key.first));
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t i = 0; i < members.size(); ++i)
      assignment[members[i]] = (offset + i) % folds;
    offset += members.size();
  }
  return assignment;
}

struct FoldResult {
  double train_accuracy = 0.0;
  double train_f1 = 0.0;
  double val_accuracy = 0.0;
  double val_f1 = 0.0;
  std::string chosen;  // winning grid point, EstimatorSpec::describe()
};

struct EvalReport {
  std::vector<FoldResult> folds;
  double mean_train_accuracy = 0.0;
  double mean_train_f1 = 0.0;
  double mean_val_accuracy = 0.0;
  double mean_val_f1 = 0.0;
  std::vector<std::string> selected_features;  // motif ids surviving RFE, when used
};

namespace detail {

inline void gather(const Matrix& X, const std::vector<int>& y,
                   const std::vector<std::string>& groups,
                   const std::vector<std::size_t>& idx, Matrix& Xo, std::vector<int>& yo,
                   std::vector<std::string>& go) {
  Xo.clear();
  yo.clear();
  go.clear();
  for (std::size_t i : idx) {
    Xo.push_back(X[i]);
    yo.push_back(y[i]);
    go.push_back(groups[i]);
  }
}

// Mean validation F1 of one grid point under an inner stratified CV.
inline double inner_cv_f1(const Matrix& X, const std::vector<int>& y,
                          const std::vector<std::string>& groups, std::size_t folds,
                          const EstimatorSpec& spec, std::uint64_t seed) {
  const auto assignment = stratified_fold_assignment(y, groups, folds, seed);
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t fold = 0; fold < folds; ++fold) {
    std::vector<std::size_t> train_idx, val_idx;
    for (std::size_t i = 0; i < y.size(); ++i)
      (assignment[i] == fold ? val_idx : train_idx).push_back(i);
    Matrix Xt, Xv;
    std::vector<int> yt, yv;
    std::vector<std::string> gt, gv;
    gather(X, y, groups, train_idx, Xt, yt, gt);
    gather(X, y, groups, val_idx, Xv, yv, gv);
    bool has0 = false, has1 = false;
    for (int label : yt) (label == 1 ? has1 : has0) = true;
    if (!has0 || !has1 || yv.empty()) continue;
    const TrainedModel model = fit_estimator(Xt, yt, spec, splitmix64(seed + fold));
    total += f1_and_accuracy(yv, model.predict_all(Xv)).second;
    ++used;
  }
  return used > 0 ? total / static_cast<double>(used) : 0.0;
}

}  // namespace detail

/// Outer stratified CV; inside each training fold the grid point with the
/// best inner-CV mean F1 is chosen (first in grid order on ties), refit on
/// the whole training fold, and scored on the held-out fold.
inline EvalReport stratified_kfold_cv(const Matrix& X, const std::vector<int>& y,
                                      const std::vector<std::string>& groups,
                                      std::size_t folds,
                                      const std::vector<EstimatorSpec>& grid,
                                      std::uint64_t seed) {
  if (grid.empty()) throw std::invalid_argument("stratified_kfold_cv: empty grid");
  if (X.size() != y.size() || X.size() != groups.size())
    throw std::invalid_argument("stratified_kfold_cv: size mismatch");
  const auto assignment = stratified_fold_assignment(y, groups, folds, seed);

  EvalReport report;
  for (std::size_t fold = 0; fold < folds; ++fold) {
    std::vector<std::size_t> train_idx, val_idx;
    for (std::size_t i = 0; i < y.size(); ++i)
      (assignment[i] == fold ? val_idx : train_idx).push_back(i);
    Matrix Xt, Xv;
    std::vector<int> yt, yv;
    std::vector<std::string> gt, gv;
    detail::gather(X, y, groups, train_idx, Xt, yt, gt);
    detail::gather(X, y, groups, val_idx, Xv, yv, gv);

    std::size_t best_g = 0;
    double best_f1 = -1.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const std::size_t inner_folds = std::min(folds, yt.size());
      const double f1 =
          detail::inner_cv_f1(Xt, yt, gt, inner_folds, grid[g], splitmix64(seed) + fold);
      if (f1 > best_f1) {
        best_f1 = f1;
        best_g = g;
      }
    }

    const TrainedModel model =
        fit_estimator(Xt, yt, grid[best_g], splitmix64(seed + 1000 + fold));
    FoldResult result;
    result.chosen = grid[best_g].describe();
    const auto train_scores = f1_and_accuracy(yt, model.predict_all(Xt));
    const auto val_scores = f1_and_accuracy(yv, model.predict_all(Xv));
    result.train_accuracy = train_scores.first;
    result.train_f1 = train_scores.second;
    result.val_accuracy = val_scores.first;
    result.val_f1 = val_scores.second;
    report.folds.push_back(std::move(result));
  }

  for (const auto& fr : report.folds) {
    report.mean_train_accuracy += fr.train_accuracy;
    report.mean_train_f1 += fr.train_f1;
    report.mean_val_accuracy += fr.val_accuracy;
    report.mean_val_f1 += fr.val_f1;
  }
  const double nf = static_cast<double>(report.folds.size());
  report.mean_train_accuracy /= nf;
  report.mean_train_f1 /= nf;
  report.mean_val_accuracy /= nf;
  report.mean_val_f1 /= nf;
  return report;
}

}  // namespace tsmotif
