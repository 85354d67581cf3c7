#ifndef VOXMARK_GBT_HPP
#define VOXMARK_GBT_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "voxmark/errors.hpp"

namespace voxmark {

// Gradient-boosted trees for binary classification: second-order logistic
// boosting with exact greedy splits over sorted feature values. Training is
// deterministic for a fixed config and input order; the feature loop runs
// in parallel with an order-independent merge.

struct GBTConfig {
    int max_depth = 3;
    double learning_rate = 0.1;
    int n_estimators = 100;
    int min_samples_leaf = 1;
    double feature_subsample = 1.0; // fraction of features available per tree
    std::uint64_t seed = 0;

    void validate() const;
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    double gain = 0.0;
    int left = -1;
    int right = -1;
    double leaf_value = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;
    double leaf_value_for(const std::vector<double>& row) const;
};

struct GBTModel {
    GBTConfig config;
    std::size_t n_features = 0;
    double base_score = 0.0; // log-odds of the training positive rate
    std::vector<Tree> trees;

    // logistic(base_score + learning_rate * sum of leaf values)
    double predict_one(const std::vector<double>& row) const;
    std::vector<double> predict(const std::vector<std::vector<double>>& rows) const;
};

GBTModel gbt_train(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                   const GBTConfig& config);

inline double sigmoid(double m) {
    if (m >= 0) {
        double e = std::exp(-m);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(m);
    return e / (1.0 + e);
}

} // namespace voxmark

#endif
