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

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace latres::base {

using Row = std::vector<double>;
using Matrix = std::vector<Row>;

// Top-N map values at the corner locations, sorted descending. Short inputs
// are padded with their own minimum.
std::vector<double> extract_features(std::span<const double> values,
                                     std::size_t count = 50);

// Label bookkeeping shared by the classifiers: labels are arbitrary ints,
// stored internally as indices into the sorted distinct label list.
class LabelSet {
 public:
  void fit(std::span<const int> labels);
  std::size_t size() const { return labels_.size(); }
  std::size_t index(int label) const;
  int label(std::size_t index) const { return labels_[index]; }

 private:
  std::vector<int> labels_;
};

// CART with Gini impurity. A node is split while it is impure and holds at
// least min_split samples.
struct TreeParams {
  std::size_t min_split = 2;
  std::size_t max_features = 0;  // 0 = all features at every split
};

class DecisionTree {
 public:
  using Params = TreeParams;

  void fit(const Matrix& x, std::span<const int> y, const Params& params,
           std::mt19937_64& rng);
  void fit(const Matrix& x, std::span<const int> y, const Params& params = {});
  int predict(const Row& row) const;
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
    int label = 0;
  };
  std::size_t build(const Matrix& x, std::span<const int> y,
                    std::vector<std::size_t>& idx, std::size_t begin,
                    std::size_t end, const Params& params,
                    std::mt19937_64& rng);

  std::vector<Node> nodes_;
};

// Bootstrapped trees with per-split feature subsampling; majority vote with
// ties going to the lower label.
struct ForestParams {
  std::size_t trees = 300;
  std::size_t max_features = 7;
  std::size_t min_split = 2;
  std::uint64_t seed = 1;
};

class RandomForest {
 public:
  using Params = ForestParams;

  void fit(const Matrix& x, std::span<const int> y, const Params& params);
  int predict(const Row& row) const;
  std::size_t size() const { return trees_.size(); }

 private:
  std::vector<DecisionTree> trees_;
};

class GaussianNaiveBayes {
 public:
  void fit(const Matrix& x, std::span<const int> y, double var_floor = 1e-9);
  int predict(const Row& row) const;

 private:
  LabelSet labels_;
  std::vector<double> log_prior_;
  Matrix mean_;
  Matrix var_;
};

// Softmax regression on standardized features, full-batch gradient descent
// with L2 on the weights (not the bias).
struct LogRegParams {
  double l2 = 1e-4;
  double tol = 1e-5;
  std::size_t max_iter = 10000;
};

class LogisticRegression {
 public:
  using Params = LogRegParams;

  void fit(const Matrix& x, std::span<const int> y, const Params& params = {});
  int predict(const Row& row) const;
  std::vector<double> probabilities(const Row& row) const;
  bool converged() const { return converged_; }
  std::size_t iterations() const { return iterations_; }

  // Objective on already standardized data; params = K×F weights then K
  // biases. Exposed for gradient checking.
  static double objective(const Matrix& xs, std::span<const std::size_t> y,
                          std::size_t classes, std::span<const double> params,
                          double l2, std::vector<double>* grad);

  void set_parameters(std::size_t classes, std::size_t features,
                      std::vector<double> params);

 private:
  LabelSet labels_;
  std::vector<double> mean_;
  std::vector<double> scale_;
  std::vector<double> params_;
  std::size_t classes_ = 0;
  std::size_t features_ = 0;
  bool converged_ = false;
  std::size_t iterations_ = 0;
};

}  // namespace latres::base
