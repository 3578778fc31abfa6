#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "tsmotif/errors.hpp"

namespace tsmotif {

using Matrix = std::vector<std::vector<double>>;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::pair<double, double> f1_and_accuracy(const std::vector<int>& y_true,
                                                 const std::vector<int>& y_pred) {
  if (y_true.size() != y_pred.size() || y_true.empty())
    throw std::invalid_argument("f1_and_accuracy: length mismatch");
  std::size_t correct = 0, tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] == y_pred[i]) ++correct;
    if (y_pred[i] == 1 && y_true[i] == 1) ++tp;
    if (y_pred[i] == 1 && y_true[i] == 0) ++fp;
    if (y_pred[i] == 0 && y_true[i] == 1) ++fn;
  }
  const double accuracy = static_cast<double>(correct) / static_cast<double>(y_true.size());
  const double denom = static_cast<double>(2 * tp + fp + fn);
  const double f1 = denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
  return {accuracy, f1};
}

// ---------------------------------------------------------------------------
// Decision tree

enum class SplitCriterion { gini, log_loss };

inline SplitCriterion parse_criterion(const std::string& name) {
  if (name == "gini") return SplitCriterion::gini;
  if (name == "log_loss") return SplitCriterion::log_loss;
  throw config_error("unknown split criterion: " + name);
}

inline std::string to_string(SplitCriterion c) {
  return c == SplitCriterion::gini ? "gini" : "log_loss";
}

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double p1 = 0.0;  // class-1 probability at this node
  std::size_t n = 0;
};

struct DecisionTreeModel {
  std::vector<TreeNode> nodes;
  SplitCriterion criterion = SplitCriterion::gini;
  int max_depth = 0;
  std::vector<double> importances;  // total weighted impurity decrease per feature

  int predict(const std::vector<double>& x) const {
    int idx = 0;
    while (nodes[idx].feature >= 0)
      idx = x[static_cast<std::size_t>(nodes[idx].feature)] <= nodes[idx].threshold
                ? nodes[idx].left
                : nodes[idx].right;
    return nodes[idx].p1 >= 0.5 ? 1 : 0;
  }
};

struct TreeOptions {
  SplitCriterion criterion = SplitCriterion::gini;
  int max_depth = 3;
  std::size_t min_samples_leaf = 1;
  std::size_t min_samples_split = 2;
  std::size_t max_features = 0;  // 0 = all
};

namespace detail {

inline double impurity(double p1, SplitCriterion criterion) {
  const double p0 = 1.0 - p1;
  if (criterion == SplitCriterion::gini) return 1.0 - p0 * p0 - p1 * p1;
  double h = 0.0;
  if (p0 > 0.0) h -= p0 * std::log(p0);
  if (p1 > 0.0) h -= p1 * std::log(p1);
  return h;
}

struct TreeBuilder {
  const Matrix& X;
  const std::vector<int>& y;
  const TreeOptions& opt;
  std::mt19937_64* rng;
  DecisionTreeModel& model;
  std::size_t n_total;

  int build(std::vector<std::size_t>& samples, int depth) {
    const std::size_t n = samples.size();
    std::size_t ones = 0;
    for (std::size_t i : samples) ones += static_cast<std::size_t>(y[i]);
    const double p1 = static_cast<double>(ones) / static_cast<double>(n);

    const int node_idx = static_cast<int>(model.nodes.size());
    model.nodes.push_back({-1, 0.0, -1, -1, p1, n});

    const bool pure = ones == 0 || ones == n;
    if (pure || depth >= opt.max_depth || n < opt.min_samples_split) return node_idx;

    const std::size_t d = X.front().size();
    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), 0);
    if (opt.max_features > 0 && opt.max_features < d && rng) {
      std::shuffle(features.begin(), features.end(), *rng);
      features.resize(opt.max_features);
      std::sort(features.begin(), features.end());
    }

    const double parent_imp = impurity(p1, opt.criterion);
    double best_decrease = -1.0;
    std::size_t best_feature = 0;
    double best_threshold = 0.0;

    std::vector<std::pair<double, int>> column(n);
    for (std::size_t f : features) {
      for (std::size_t i = 0; i < n; ++i)
        column[i] = {X[samples[i]][f], y[samples[i]]};
      std::sort(column.begin(), column.end());
      std::size_t left_ones = 0;
      for (std::size_t split = 1; split < n; ++split) {
        left_ones += static_cast<std::size_t>(column[split - 1].second);
        if (column[split].first <= column[split - 1].first) continue;  // no gap
        if (split < opt.min_samples_leaf || n - split < opt.min_samples_leaf) continue;
        const double pl = static_cast<double>(left_ones) / static_cast<double>(split);
        const double pr = static_cast<double>(ones - left_ones) /
                          static_cast<double>(n - split);
        const double weighted =
            (static_cast<double>(split) * impurity(pl, opt.criterion) +
             static_cast<double>(n - split) * impurity(pr, opt.criterion)) /
            static_cast<double>(n);
        const double decrease = parent_imp - weighted;
        if (decrease > best_decrease) {
          best_decrease = decrease;
          best_feature = f;
          best_threshold = 0.5 * (column[split - 1].first + column[split].first);
        }
      }
    }
    if (best_decrease < 0.0) return node_idx;  // no usable split

    std::vector<std::size_t> left_samples, right_samples;
    for (std::size_t i : samples)
      (X[i][best_feature] <= best_threshold ? left_samples : right_samples).push_back(i);

    model.importances[best_feature] +=
        best_decrease * static_cast<double>(n) / static_cast<double>(n_total);
    model.nodes[static_cast<std::size_t>(node_idx)].feature = static_cast<int>(best_feature);
    model.nodes[static_cast<std::size_t>(node_idx)].threshold = best_threshold;
    const int left = build(left_samples, depth + 1);
    model.nodes[static_cast<std::size_t>(node_idx)].left = left;
    const int right = build(right_samples, depth + 1);
    model.nodes[static_cast<std::size_t>(node_idx)].right = right;
    return node_idx;
  }
};

inline void check_training_input(const Matrix& X, const std::vector<int>& y) {
  if (X.empty() || X.front().empty()) throw std::invalid_argument("empty feature matrix");
  if (X.size() != y.size()) throw std::invalid_argument("row/label count mismatch");
  bool has0 = false, has1 = false;
  for (int label : y) (label == 1 ? has1 : has0) = true;
  if (!has0 || !has1) throw std::invalid_argument("training labels are constant");
}

}  // namespace detail

inline DecisionTreeModel train_decision_tree(const Matrix& X, const std::vector<int>& y,
                                             const TreeOptions& opt,
                                             std::mt19937_64* rng = nullptr) {
  detail::check_training_input(X, y);
  DecisionTreeModel model;
  model.criterion = opt.criterion;
  model.max_depth = opt.max_depth;
  model.importances.assign(X.front().size(), 0.0);
  detail::TreeBuilder builder{X, y, opt, rng, model, X.size()};
  std::vector<std::size_t> all(X.size());
  std::iota(all.begin(), all.end(), 0);
  builder.build(all, 0);
  return model;
}

inline DecisionTreeModel train_decision_tree(const Matrix& X, const std::vector<int>& y,
                                             SplitCriterion criterion, int max_depth) {
  TreeOptions opt;
  opt.criterion = criterion;
  opt.max_depth = max_depth;
  return train_decision_tree(X, y, opt);
}

// ---------------------------------------------------------------------------
// Random forest

struct ForestOptions {
  std::size_t n_estimators = 10;
  SplitCriterion criterion = SplitCriterion::gini;
  int max_depth = 3;
  std::size_t min_samples_leaf = 1;
  std::size_t min_samples_split = 2;
  bool bootstrap = true;
  bool subsample_features = true;  // sqrt(d) features per split
};

struct RandomForestModel {
  std::vector<DecisionTreeModel> trees;
  std::uint64_t seed = 0;

  int predict(const std::vector<double>& x) const {
    std::size_t ones = 0;
    for (const auto& tree : trees) ones += static_cast<std::size_t>(tree.predict(x));
    return 2 * ones >= trees.size() ? 1 : 0;  // tie goes to class 1
  }

  std::vector<double> importances() const {
    std::vector<double> total(trees.front().importances.size(), 0.0);
    for (const auto& tree : trees)
      for (std::size_t f = 0; f < total.size(); ++f) total[f] += tree.importances[f];
    for (double& v : total) v /= static_cast<double>(trees.size());
    return total;
  }
};

inline RandomForestModel train_random_forest(const Matrix& X, const std::vector<int>& y,
                                             const ForestOptions& opt, std::uint64_t seed) {
  detail::check_training_input(X, y);
  const std::size_t n = X.size();
  const std::size_t d = X.front().size();
  RandomForestModel forest;
  forest.seed = seed;

  TreeOptions tree_opt;
  tree_opt.criterion = opt.criterion;
  tree_opt.max_depth = opt.max_depth;
  tree_opt.min_samples_leaf = opt.min_samples_leaf;
  tree_opt.min_samples_split = opt.min_samples_split;
  tree_opt.max_features = opt.subsample_features
                              ? std::max<std::size_t>(
                                    1, static_cast<std::size_t>(
                                           std::lround(std::sqrt(static_cast<double>(d)))))
                              : 0;

  for (std::size_t t = 0; t < opt.n_estimators; ++t) {
    std::mt19937_64 rng(splitmix64(seed + t));
    Matrix sample_X;
    std::vector<int> sample_y;
    if (opt.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      sample_X.reserve(n);
      sample_y.reserve(n);
      bool mixed = false;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t idx = pick(rng);
        sample_X.push_back(X[idx]);
        sample_y.push_back(y[idx]);
        if (i > 0 && sample_y[i] != sample_y[0]) mixed = true;
      }
      if (!mixed) {
        // single-class resample: patch in one row of the other class so
        // the tree trainer has a valid input
        for (std::size_t i = 0; i < n; ++i)
          if (y[i] != sample_y[0]) {
            sample_X[0] = X[i];
            sample_y[0] = y[i];
            break;
          }
      }
    } else {
      sample_X = X;
      sample_y = y;
    }
    forest.trees.push_back(train_decision_tree(sample_X, sample_y, tree_opt, &rng));
  }
  return forest;
}

// ---------------------------------------------------------------------------
// Logistic regression

enum class Penalty { l1, l2 };

inline Penalty parse_penalty(const std::string& name) {
  if (name == "l1") return Penalty::l1;
  if (name == "l2") return Penalty::l2;
  throw config_error("unknown penalty: " + name);
}

inline std::string to_string(Penalty p) { return p == Penalty::l1 ? "l1" : "l2"; }

struct LogisticModel {
  std::vector<double> weights;  // in standardized feature space
  double bias = 0.0;
  std::vector<double> feature_mean;
  std::vector<double> feature_std;
  Penalty penalty = Penalty::l2;
  double C = 1.0;

  double decision(const std::vector<double>& x) const {
    double s = bias;
    for (std::size_t j = 0; j < weights.size(); ++j)
      s += weights[j] * (x[j] - feature_mean[j]) / feature_std[j];
    return s;
  }

  int predict(const std::vector<double>& x) const { return decision(x) >= 0.0 ? 1 : 0; }
};

namespace detail {

inline double log1pexp(double s) {
  return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
}

// Mean log-loss on standardized rows, plus gradient wrt (w, b).
inline double logistic_loss_grad(const Matrix& Xs, const std::vector<int>& y,
                                 const std::vector<double>& w, double b,
                                 std::vector<double>& gw, double& gb) {
  const std::size_t n = Xs.size(), d = w.size();
  gw.assign(d, 0.0);
  gb = 0.0;
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = b;
    for (std::size_t j = 0; j < d; ++j) s += w[j] * Xs[i][j];
    loss += log1pexp(s) - static_cast<double>(y[i]) * s;
    const double p = 1.0 / (1.0 + std::exp(-s));
    const double r = p - static_cast<double>(y[i]);
    for (std::size_t j = 0; j < d; ++j) gw[j] += r * Xs[i][j];
    gb += r;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  loss *= inv_n;
  for (double& g : gw) g *= inv_n;
  gb *= inv_n;
  return loss;
}

}  // namespace detail

/// Objective value used by the trainer: mean log-loss plus (1/C) times
/// the penalty (0.5 ||w||^2 for l2, ||w||_1 for l1); the bias is not
/// penalized. Exposed so tests can finite-difference it.
inline double logistic_objective(const Matrix& Xs, const std::vector<int>& y,
                                 const std::vector<double>& w, double b, double C,
                                 Penalty penalty) {
  std::vector<double> gw;
  double gb;
  double loss = detail::logistic_loss_grad(Xs, y, w, b, gw, gb);
  double reg = 0.0;
  for (double v : w) reg += penalty == Penalty::l2 ? 0.5 * v * v : std::abs(v);
  return loss + reg / C;
}

/// Full analytic gradient of the l2 objective wrt (w, b).
inline std::pair<std::vector<double>, double> logistic_gradient(
    const Matrix& Xs, const std::vector<int>& y, const std::vector<double>& w, double b,
    double C) {
  std::vector<double> gw;
  double gb;
  detail::logistic_loss_grad(Xs, y, w, b, gw, gb);
  for (std::size_t j = 0; j < w.size(); ++j) gw[j] += w[j] / C;
  return {std::move(gw), gb};
}

inline LogisticModel train_logistic(const Matrix& X, const std::vector<int>& y, double C,
                                    Penalty penalty, std::size_t max_iter = 10000,
                                    double tol = 1e-6) {
  detail::check_training_input(X, y);
  if (C <= 0.0) throw std::invalid_argument("train_logistic: C must be > 0");
  const std::size_t n = X.size(), d = X.front().size();
  for (const auto& row : X)
    for (double v : row)
      if (!std::isfinite(v)) throw std::invalid_argument("train_logistic: non-finite feature");

  LogisticModel model;
  model.penalty = penalty;
  model.C = C;
  model.feature_mean.assign(d, 0.0);
  model.feature_std.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double mu = 0.0;
    for (const auto& row : X) mu += row[j];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (const auto& row : X) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(n);
    model.feature_mean[j] = mu;
    model.feature_std[j] = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  Matrix Xs(n, std::vector<double>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      Xs[i][j] = (X[i][j] - model.feature_mean[j]) / model.feature_std[j];

  std::vector<double> w(d, 0.0);
  double b = 0.0;
  std::vector<double> gw(d), trial_w(d);
  double gb = 0.0;
  double step = 1.0;

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    const double smooth = detail::logistic_loss_grad(Xs, y, w, b, gw, gb);
    if (penalty == Penalty::l2) {
      double reg = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        gw[j] += w[j] / C;
        reg += 0.5 * w[j] * w[j] / C;
      }
      double gnorm2 = gb * gb;
      for (double g : gw) gnorm2 += g * g;
      if (std::sqrt(gnorm2) <= tol) break;
      const double f0 = smooth + reg;
      step = std::min(step * 2.0, 1e3);
      for (;;) {
        for (std::size_t j = 0; j < d; ++j) trial_w[j] = w[j] - step * gw[j];
        const double trial_b = b - step * gb;
        if (logistic_objective(Xs, y, trial_w, trial_b, C, penalty) <=
                f0 - 1e-4 * step * gnorm2 ||
            step < 1e-16) {
          w = trial_w;
          b = trial_b;
          break;
        }
        step *= 0.5;
      }
    } else {
      // proximal gradient on the l1 term, backtracking on the smooth part
      step = std::min(step * 2.0, 1e3);
      double moved;
      for (;;) {
        for (std::size_t j = 0; j < d; ++j) {
          const double z = w[j] - step * gw[j];
          const double shrink = step / C;
          trial_w[j] = z > shrink ? z - shrink : (z < -shrink ? z + shrink : 0.0);
        }
        const double trial_b = b - step * gb;
        // quadratic upper bound check for the smooth part
        std::vector<double> dummy;
        double dummy_b;
        const double trial_smooth =
            detail::logistic_loss_grad(Xs, y, trial_w, trial_b, dummy, dummy_b);
        double lin = 0.0, quad = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          const double delta = trial_w[j] - w[j];
          lin += gw[j] * delta;
          quad += delta * delta;
        }
        const double delta_b = trial_b - b;
        lin += gb * delta_b;
        quad += delta_b * delta_b;
        if (trial_smooth <= smooth + lin + quad / (2.0 * step) || step < 1e-16) {
          moved = std::sqrt(quad) / std::max(step, 1e-16);
          w = trial_w;
          b = trial_b;
          break;
        }
        step *= 0.5;
      }
      if (moved <= tol) break;
    }
  }
  model.weights = std::move(w);
  model.bias = b;
  return model;
}

// ---------------------------------------------------------------------------
// Fisher / two-class LDA projection

namespace detail {

// Gaussian elimination with partial pivoting; returns false on a
// near-singular pivot.
inline bool solve_linear(Matrix a, std::vector<double> rhs, std::vector<double>& out) {
  const std::size_t d = a.size();
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < d; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < 1e-12) return false;
    std::swap(a[pivot], a[col]);
    std::swap(rhs[pivot], rhs[col]);
    for (std::size_t r = col + 1; r < d; ++r) {
      const double factor = a[r][col] / a[col][col];
      for (std::size_t c = col; c < d; ++c) a[r][c] -= factor * a[col][c];
      rhs[r] -= factor * rhs[col];
    }
  }
  out.assign(d, 0.0);
  for (std::size_t col = d; col-- > 0;) {
    double acc = rhs[col];
    for (std::size_t c = col + 1; c < d; ++c) acc -= a[col][c] * out[c];
    out[col] = acc / a[col][col];
  }
  return true;
}

}  // namespace detail

/// Two-class Fisher direction w solving S_w w = mu1 - mu0, applied to
/// every row; a 1e-6 ridge is added when the scatter is singular.
inline std::vector<double> fisher_projection(const Matrix& X, const std::vector<int>& y) {
  detail::check_training_input(X, y);
  const std::size_t n = X.size(), d = X.front().size();
  std::vector<double> mu0(d, 0.0), mu1(d, 0.0);
  std::size_t n0 = 0, n1 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto& mu = y[i] == 1 ? mu1 : mu0;
    (y[i] == 1 ? n1 : n0) += 1;
    for (std::size_t j = 0; j < d; ++j) mu[j] += X[i][j];
  }
  for (std::size_t j = 0; j < d; ++j) {
    mu0[j] /= static_cast<double>(n0);
    mu1[j] /= static_cast<double>(n1);
  }
  Matrix sw(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& mu = y[i] == 1 ? mu1 : mu0;
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b)
        sw[a][b] += (X[i][a] - mu[a]) * (X[i][b] - mu[b]);
  }
  std::vector<double> rhs(d);
  for (std::size_t j = 0; j < d; ++j) rhs[j] = mu1[j] - mu0[j];
  std::vector<double> w;
  if (!detail::solve_linear(sw, rhs, w)) {
    for (std::size_t j = 0; j < d; ++j) sw[j][j] += 1e-6;
    if (!detail::solve_linear(sw, rhs, w))
      throw data_error("fisher_projection: scatter matrix singular even with ridge");
  }
  std::vector<double> projected(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) projected[i] += X[i][j] * w[j];
  return projected;
}

}  // namespace tsmotif
