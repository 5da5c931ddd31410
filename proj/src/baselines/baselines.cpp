// Copyright 2026 The latres Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "baselines/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "util/errors.hpp"

namespace latres::base {

std::vector<double> extract_features(std::span<const double> values,
                                     std::size_t count) {
  if (values.empty()) throw DataError("feature extraction: no map values");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end(), std::greater<>());
  double floor = v.back();
  v.resize(count, floor);
  return v;
}

void LabelSet::fit(std::span<const int> labels) {
  labels_.assign(labels.begin(), labels.end());
  std::sort(labels_.begin(), labels_.end());
  labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
}

std::size_t LabelSet::index(int label) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label)
    throw UsageError("unknown label " + std::to_string(label));
  return static_cast<std::size_t>(it - labels_.begin());
}

namespace {

void check_xy(const Matrix& x, std::span<const int> y) {
  if (x.empty()) throw DataError("classifier: empty training set");
  if (x.size() != y.size())
    throw UsageError("classifier: feature/label count mismatch");
  for (const auto& r : x)
    if (r.size() != x.front().size())
      throw UsageError("classifier: ragged feature matrix");
}

// Most frequent label; ties to the lower one.
int majority(std::span<const int> y, const std::vector<std::size_t>& idx,
             std::size_t begin, std::size_t end) {
  std::vector<int> lab;
  lab.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) lab.push_back(y[idx[i]]);
  std::sort(lab.begin(), lab.end());
  int best = lab.front();
  std::size_t best_n = 0;
  for (std::size_t i = 0; i < lab.size();) {
    std::size_t j = i;
    while (j < lab.size() && lab[j] == lab[i]) ++j;
    if (j - i > best_n) {
      best_n = j - i;
      best = lab[i];
    }
    i = j;
  }
  return best;
}

double gini(const std::vector<std::size_t>& counts, std::size_t n) {
  if (n == 0) return 0.0;
  double s = 0.0;
  for (auto c : counts) {
    double p = static_cast<double>(c) / static_cast<double>(n);
    s += p * p;
  }
  return 1.0 - s;
}

}  // namespace

void DecisionTree::fit(const Matrix& x, std::span<const int> y,
                       const Params& params) {
  std::mt19937_64 rng(0);
  fit(x, y, params, rng);
}

void DecisionTree::fit(const Matrix& x, std::span<const int> y,
                       const Params& params, std::mt19937_64& rng) {
  check_xy(x, y);
  nodes_.clear();
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  build(x, y, idx, 0, idx.size(), params, rng);
}

std::size_t DecisionTree::build(const Matrix& x, std::span<const int> y,
                                std::vector<std::size_t>& idx,
                                std::size_t begin, std::size_t end,
                                const Params& params, std::mt19937_64& rng) {
  const std::size_t me = nodes_.size();
  nodes_.push_back(Node{});
  nodes_[me].label = majority(y, idx, begin, end);

  const std::size_t n = end - begin;
  bool pure = true;
  for (std::size_t i = begin + 1; i < end; ++i)
    if (y[idx[i]] != y[idx[begin]]) pure = false;
  if (pure || n < std::max<std::size_t>(params.min_split, 2)) return me;

  // Local label indices for counting.
  std::vector<int> labs;
  for (std::size_t i = begin; i < end; ++i) labs.push_back(y[idx[i]]);
  std::sort(labs.begin(), labs.end());
  labs.erase(std::unique(labs.begin(), labs.end()), labs.end());
  auto lab_index = [&](int l) {
    return static_cast<std::size_t>(
        std::lower_bound(labs.begin(), labs.end(), l) - labs.begin());
  };
  std::vector<std::size_t> total(labs.size(), 0);
  for (std::size_t i = begin; i < end; ++i) ++total[lab_index(y[idx[i]])];

  const std::size_t nf = x.front().size();
  std::vector<std::size_t> features(nf);
  std::iota(features.begin(), features.end(), 0);
  std::size_t mtry = nf;
  if (params.max_features > 0 && params.max_features < nf) {
    // Partial Fisher-Yates; the remaining order is the fallback sequence.
    for (std::size_t i = 0; i < nf - 1; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, nf - 1);
      std::swap(features[i], features[pick(rng)]);
    }
    mtry = params.max_features;
  }

  int best_f = -1;
  double best_thr = 0.0;
  double best_imp = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, int>> col(n);
  for (std::size_t fi = 0; fi < nf; ++fi) {
    // Stop after mtry features unless no valid split has turned up yet.
    if (fi >= mtry && best_f >= 0) break;
    const std::size_t f = features[fi];
    for (std::size_t i = 0; i < n; ++i)
      col[i] = {x[idx[begin + i]][f], y[idx[begin + i]]};
    std::sort(col.begin(), col.end());
    std::vector<std::size_t> left(labs.size(), 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      ++left[lab_index(col[i].second)];
      if (col[i].first == col[i + 1].first) continue;
      std::vector<std::size_t> right(labs.size());
      for (std::size_t k = 0; k < labs.size(); ++k) right[k] = total[k] - left[k];
      const double nl = static_cast<double>(i + 1);
      const double nr = static_cast<double>(n - i - 1);
      const double imp = (nl * gini(left, i + 1) + nr * gini(right, n - i - 1)) /
                         static_cast<double>(n);
      if (imp < best_imp) {
        best_imp = imp;
        best_f = static_cast<int>(f);
        best_thr = 0.5 * (col[i].first + col[i + 1].first);
        // Midpoint can round onto the upper value for adjacent doubles.
        if (!(best_thr < col[i + 1].first)) best_thr = col[i].first;
      }
    }
  }
  if (best_f < 0) return me;

  auto mid = std::partition(
      idx.begin() + static_cast<std::ptrdiff_t>(begin),
      idx.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t i) {
        return x[i][static_cast<std::size_t>(best_f)] <= best_thr;
      });
  const std::size_t split = static_cast<std::size_t>(mid - idx.begin());
  nodes_[me].feature = best_f;
  nodes_[me].threshold = best_thr;
  std::size_t l = build(x, y, idx, begin, split, params, rng);
  std::size_t r = build(x, y, idx, split, end, params, rng);
  nodes_[me].left = l;
  nodes_[me].right = r;
  return me;
}

int DecisionTree::predict(const Row& row) const {
  if (nodes_.empty()) throw UsageError("decision tree: not fitted");
  std::size_t i = 0;
  while (nodes_[i].feature >= 0) {
    const auto& nd = nodes_[i];
    i = row.at(static_cast<std::size_t>(nd.feature)) <= nd.threshold ? nd.left
                                                                      : nd.right;
  }
  return nodes_[i].label;
}

void RandomForest::fit(const Matrix& x, std::span<const int> y,
                       const Params& params) {
  check_xy(x, y);
  if (params.trees == 0) throw UsageError("random forest: zero trees");
  trees_.assign(params.trees, DecisionTree{});
  std::mt19937_64 rng(params.seed);
  std::uniform_int_distribution<std::size_t> draw(0, x.size() - 1);
  DecisionTree::Params tp{params.min_split, params.max_features};
  Matrix bx(x.size());
  std::vector<int> by(x.size());
  for (auto& tree : trees_) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      std::size_t j = draw(rng);
      bx[i] = x[j];
      by[i] = y[j];
    }
    tree.fit(bx, by, tp, rng);
  }
}

int RandomForest::predict(const Row& row) const {
  if (trees_.empty()) throw UsageError("random forest: not fitted");
  std::vector<int> votes;
  votes.reserve(trees_.size());
  for (const auto& t : trees_) votes.push_back(t.predict(row));
  std::vector<std::size_t> idx(votes.size());
  std::iota(idx.begin(), idx.end(), 0);
  return majority(votes, idx, 0, idx.size());
}

void GaussianNaiveBayes::fit(const Matrix& x, std::span<const int> y,
                             double var_floor) {
  check_xy(x, y);
  labels_.fit(y);
  const std::size_t k = labels_.size(), f = x.front().size();
  mean_.assign(k, Row(f, 0.0));
  var_.assign(k, Row(f, 0.0));
  std::vector<std::size_t> n(k, 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto c = labels_.index(y[i]);
    ++n[c];
    for (std::size_t j = 0; j < f; ++j) mean_[c][j] += x[i][j];
  }
  for (std::size_t c = 0; c < k; ++c)
    for (auto& m : mean_[c]) m /= static_cast<double>(n[c]);
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto c = labels_.index(y[i]);
    for (std::size_t j = 0; j < f; ++j) {
      double d = x[i][j] - mean_[c][j];
      var_[c][j] += d * d;
    }
  }
  log_prior_.assign(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    for (auto& v : var_[c])
      v = std::max(v / static_cast<double>(n[c]), var_floor);
    log_prior_[c] = std::log(static_cast<double>(n[c]) /
                             static_cast<double>(x.size()));
  }
}

int GaussianNaiveBayes::predict(const Row& row) const {
  if (mean_.empty()) throw UsageError("naive bayes: not fitted");
  constexpr double kLog2Pi = 1.8378770664093453;
  std::size_t best = 0;
  double best_lp = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < mean_.size(); ++c) {
    double lp = log_prior_[c];
    for (std::size_t j = 0; j < mean_[c].size(); ++j) {
      double d = row.at(j) - mean_[c][j];
      lp -= 0.5 * (kLog2Pi + std::log(var_[c][j]) + d * d / var_[c][j]);
    }
    if (lp > best_lp) {
      best_lp = lp;
      best = c;
    }
  }
  return labels_.label(best);
}

double LogisticRegression::objective(const Matrix& xs,
                                     std::span<const std::size_t> y,
                                     std::size_t classes,
                                     std::span<const double> params, double l2,
                                     std::vector<double>* grad) {
  const std::size_t n = xs.size(), f = xs.front().size();
  const double* w = params.data();
  const double* b = params.data() + classes * f;
  if (grad) grad->assign(params.size(), 0.0);
  double loss = 0.0;
  std::vector<double> z(classes);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < classes; ++c) {
      double s = b[c];
      for (std::size_t j = 0; j < f; ++j) s += w[c * f + j] * xs[i][j];
      z[c] = s;
    }
    double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (auto& v : z) sum += std::exp(v - zmax);
    double lse = zmax + std::log(sum);
    loss += lse - z[y[i]];
    if (grad) {
      for (std::size_t c = 0; c < classes; ++c) {
        double g = std::exp(z[c] - lse) - (c == y[i] ? 1.0 : 0.0);
        for (std::size_t j = 0; j < f; ++j) (*grad)[c * f + j] += g * xs[i][j];
        (*grad)[classes * f + c] += g;
      }
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  loss *= inv_n;
  double reg = 0.0;
  for (std::size_t i = 0; i < classes * f; ++i) reg += w[i] * w[i];
  loss += 0.5 * l2 * reg;
  if (grad) {
    for (auto& g : *grad) g *= inv_n;
    for (std::size_t i = 0; i < classes * f; ++i) (*grad)[i] += l2 * w[i];
  }
  return loss;
}

void LogisticRegression::fit(const Matrix& x, std::span<const int> y,
                             const Params& params) {
  check_xy(x, y);
  labels_.fit(y);
  classes_ = labels_.size();
  features_ = x.front().size();
  const std::size_t n = x.size();

  mean_.assign(features_, 0.0);
  scale_.assign(features_, 1.0);
  for (const auto& r : x)
    for (std::size_t j = 0; j < features_; ++j) mean_[j] += r[j];
  for (auto& m : mean_) m /= static_cast<double>(n);
  std::vector<double> var(features_, 0.0);
  for (const auto& r : x)
    for (std::size_t j = 0; j < features_; ++j)
      var[j] += (r[j] - mean_[j]) * (r[j] - mean_[j]);
  for (std::size_t j = 0; j < features_; ++j) {
    double sd = std::sqrt(var[j] / static_cast<double>(n));
    scale_[j] = sd > 0.0 ? sd : 1.0;
  }
  Matrix xs(n, Row(features_));
  double max_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 1.0;  // bias column
    for (std::size_t j = 0; j < features_; ++j) {
      xs[i][j] = (x[i][j] - mean_[j]) / scale_[j];
      sq += xs[i][j] * xs[i][j];
    }
    max_sq = std::max(max_sq, sq);
  }
  std::vector<std::size_t> yi(n);
  for (std::size_t i = 0; i < n; ++i) yi[i] = labels_.index(y[i]);

  // Softmax cross-entropy Hessian is bounded by 0.5·‖x‖² per sample.
  const double lr = 1.0 / (0.5 * max_sq + params.l2);
  std::vector<double> theta(classes_ * features_ + classes_, 0.0);
  std::vector<double> grad;
  std::vector<double> best = theta;
  double best_loss = std::numeric_limits<double>::infinity();
  converged_ = false;
  iterations_ = 0;
  for (std::size_t it = 0; it < params.max_iter; ++it) {
    double loss = objective(xs, yi, classes_, theta, params.l2, &grad);
    if (loss < best_loss) {
      best_loss = loss;
      best = theta;
    }
    double gn = 0.0;
    for (auto g : grad) gn += g * g;
    iterations_ = it + 1;
    if (std::sqrt(gn) < params.tol) {
      converged_ = true;
      break;
    }
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= lr * grad[i];
  }
  if (!converged_) {
    double loss = objective(xs, yi, classes_, theta, params.l2, nullptr);
    if (loss < best_loss) best = theta;
  }
  params_ = std::move(best);
}

void LogisticRegression::set_parameters(std::size_t classes,
                                        std::size_t features,
                                        std::vector<double> params) {
  if (params.size() != classes * features + classes)
    throw UsageError("logistic regression: parameter size mismatch");
  classes_ = classes;
  features_ = features;
  params_ = std::move(params);
  mean_.assign(features, 0.0);
  scale_.assign(features, 1.0);
  std::vector<int> labs(classes);
  std::iota(labs.begin(), labs.end(), 0);
  labels_.fit(labs);
}

std::vector<double> LogisticRegression::probabilities(const Row& row) const {
  if (params_.empty()) throw UsageError("logistic regression: not fitted");
  std::vector<double> z(classes_);
  for (std::size_t c = 0; c < classes_; ++c) {
    double s = params_[classes_ * features_ + c];
    for (std::size_t j = 0; j < features_; ++j)
      s += params_[c * features_ + j] * (row.at(j) - mean_[j]) / scale_[j];
    z[c] = s;
  }
  double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (auto& v : z) sum += (v = std::exp(v - zmax));
  for (auto& v : z) v /= sum;
  return z;
}

int LogisticRegression::predict(const Row& row) const {
  auto p = probabilities(row);
  // max_element returns the first maximum, i.e. the lower label.
  return labels_.label(
      static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin()));
}

}  // namespace latres::base
