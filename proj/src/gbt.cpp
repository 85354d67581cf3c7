#include "voxmark/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "voxmark/rng.hpp"

namespace voxmark {

namespace {
constexpr double kHessRidge = 1e-16; // keeps leaf weights finite
constexpr double kMinSplitGain = 1e-12;
}

void GBTConfig::validate() const {
    if (max_depth < 1) throw ValidationError("max_depth must be >= 1");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0))
        throw ValidationError("learning_rate must be in (0, 1]");
    if (n_estimators < 1) throw ValidationError("n_estimators must be >= 1");
    if (min_samples_leaf < 1) throw ValidationError("min_samples_leaf must be >= 1");
    if (!(feature_subsample > 0.0 && feature_subsample <= 1.0))
        throw ValidationError("feature_subsample must be in (0, 1]");
}

double Tree::leaf_value_for(const std::vector<double>& row) const {
    int u = 0;
    while (!nodes[static_cast<std::size_t>(u)].is_leaf()) {
        const TreeNode& n = nodes[static_cast<std::size_t>(u)];
        u = row[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(u)].leaf_value;
}

double GBTModel::predict_one(const std::vector<double>& row) const {
    if (row.size() != n_features)
        throw ValidationError("predict: row has " + std::to_string(row.size()) +
                              " features, model expects " + std::to_string(n_features));
    double margin = base_score;
    for (const auto& t : trees) margin += config.learning_rate * t.leaf_value_for(row);
    return sigmoid(margin);
}

std::vector<double> GBTModel::predict(const std::vector<std::vector<double>>& rows) const {
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = predict_one(rows[i]);
    return out;
}

namespace {

struct SplitCandidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;

    // deterministic preference: larger gain, then lower feature index
    bool better_than(const SplitCandidate& o) const {
        if (feature < 0) return false;
        if (o.feature < 0) return true;
        if (gain != o.gain) return gain > o.gain;
        return feature < o.feature;
    }
};

struct NodeStats {
    double g = 0.0;
    double h = 0.0;
    std::size_t count = 0;
};

double leaf_weight(const NodeStats& s) { return -s.g / (s.h + kHessRidge); }

double split_gain(const NodeStats& parent, const NodeStats& left) {
    NodeStats right{parent.g - left.g, parent.h - left.h, parent.count - left.count};
    double score_l = left.g * left.g / (left.h + kHessRidge);
    double score_r = right.g * right.g / (right.h + kHessRidge);
    double score_p = parent.g * parent.g / (parent.h + kHessRidge);
    return 0.5 * (score_l + score_r - score_p);
}

} // namespace

GBTModel gbt_train(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                   const GBTConfig& config) {
    config.validate();
    const std::size_t n = x.size();
    if (n == 0 || y.size() != n) throw ValidationError("gbt_train: bad input sizes");
    const std::size_t d = x[0].size();
    for (const auto& row : x) {
        if (row.size() != d) throw ValidationError("gbt_train: ragged feature rows");
        for (double v : row)
            if (!std::isfinite(v))
                throw ValidationError("gbt_train: non-finite feature value");
    }
    std::size_t n_pos = 0;
    for (int label : y) {
        if (label != 0 && label != 1) throw ValidationError("gbt_train: labels must be 0/1");
        n_pos += static_cast<std::size_t>(label);
    }
    if (n_pos < 2 || n - n_pos < 2)
        throw DegenerateInputError("gbt_train: need at least 2 samples of each class");

    GBTModel model;
    model.config = config;
    model.n_features = d;
    double rate = static_cast<double>(n_pos) / static_cast<double>(n);
    model.base_score = std::log(rate / (1.0 - rate));

    // one global sort per feature, reused at every node via membership lookups
    std::vector<std::vector<std::uint32_t>> sorted(d);
#pragma omp parallel for schedule(dynamic, 16)
    for (long f = 0; f < static_cast<long>(d); ++f) {
        auto& idx = sorted[static_cast<std::size_t>(f)];
        idx.resize(n);
        std::iota(idx.begin(), idx.end(), 0u);
        std::stable_sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
            return x[a][static_cast<std::size_t>(f)] < x[b][static_cast<std::size_t>(f)];
        });
    }

    std::vector<double> margin(n, model.base_score);
    std::vector<double> grad(n), hess(n);
    std::vector<int> node_of(n);
    std::vector<int> slot_of; // node id -> frontier slot, -1 if inactive

    const std::size_t n_sub = config.feature_subsample < 1.0
        ? std::max<std::size_t>(1, static_cast<std::size_t>(config.feature_subsample *
                                                            static_cast<double>(d)))
        : d;

    std::vector<std::uint32_t> all_features(d);
    std::iota(all_features.begin(), all_features.end(), 0u);

    for (int t = 0; t < config.n_estimators; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            double p = sigmoid(margin[i]);
            grad[i] = p - static_cast<double>(y[i]);
            hess[i] = p * (1.0 - p);
        }

        std::vector<std::uint32_t> features = all_features;
        if (n_sub < d) {
            auto rng = make_rng(config.seed, "colsample", static_cast<std::uint64_t>(t));
            shuffle_pinned(features, rng);
            features.resize(n_sub);
            std::sort(features.begin(), features.end());
        }

        Tree tree;
        tree.nodes.push_back(TreeNode{});
        std::fill(node_of.begin(), node_of.end(), 0);

        std::vector<int> frontier{0};

        for (int depth = 0; depth < config.max_depth && !frontier.empty(); ++depth) {
            const std::size_t n_active = frontier.size();
            slot_of.assign(tree.nodes.size(), -1);
            for (std::size_t s = 0; s < n_active; ++s)
                slot_of[static_cast<std::size_t>(frontier[s])] = static_cast<int>(s);

            std::vector<NodeStats> totals(n_active);
            for (std::size_t i = 0; i < n; ++i) {
                int slot = slot_of[static_cast<std::size_t>(node_of[i])];
                if (slot < 0) continue;
                totals[static_cast<std::size_t>(slot)].g += grad[i];
                totals[static_cast<std::size_t>(slot)].h += hess[i];
                ++totals[static_cast<std::size_t>(slot)].count;
            }

            std::vector<SplitCandidate> best(n_active);

#pragma omp parallel
            {
                std::vector<SplitCandidate> local_best(n_active);
                std::vector<NodeStats> left(n_active);
                std::vector<double> prev(n_active);

#pragma omp for schedule(static)
                for (long fi = 0; fi < static_cast<long>(features.size()); ++fi) {
                    const std::size_t f = features[static_cast<std::size_t>(fi)];
                    for (auto& s : left) s = NodeStats{};
                    const auto& order = sorted[f];
                    for (std::uint32_t r : order) {
                        int slot = slot_of[static_cast<std::size_t>(node_of[r])];
                        if (slot < 0) continue;
                        auto us = static_cast<std::size_t>(slot);
                        double v = x[r][f];
                        if (left[us].count > 0 && v > prev[us]) {
                            const NodeStats& tot = totals[us];
                            std::size_t n_right = tot.count - left[us].count;
                            if (left[us].count >=
                                    static_cast<std::size_t>(config.min_samples_leaf) &&
                                n_right >= static_cast<std::size_t>(config.min_samples_leaf)) {
                                double gain = split_gain(tot, left[us]);
                                SplitCandidate cand{gain, static_cast<int>(f),
                                                    (prev[us] + v) / 2.0};
                                if (gain > kMinSplitGain && cand.better_than(local_best[us]))
                                    local_best[us] = cand;
                            }
                        }
                        left[us].g += grad[r];
                        left[us].h += hess[r];
                        ++left[us].count;
                        prev[us] = v;
                    }
                }

#pragma omp critical
                {
                    for (std::size_t s = 0; s < n_active; ++s)
                        if (local_best[s].better_than(best[s])) best[s] = local_best[s];
                }
            }

            std::vector<int> next_frontier;
            for (std::size_t s = 0; s < n_active; ++s) {
                int u = frontier[s];
                TreeNode& node = tree.nodes[static_cast<std::size_t>(u)];
                if (best[s].feature < 0) {
                    node.feature = -1;
                    node.leaf_value = leaf_weight(totals[s]);
                    continue;
                }
                node.feature = best[s].feature;
                node.threshold = best[s].threshold;
                node.gain = best[s].gain;
                node.left = static_cast<int>(tree.nodes.size());
                tree.nodes.push_back(TreeNode{});
                node.right = static_cast<int>(tree.nodes.size());
                tree.nodes.push_back(TreeNode{});
                next_frontier.push_back(node.left);
                next_frontier.push_back(node.right);
            }

            // route rows to children of freshly split nodes
            for (std::size_t i = 0; i < n; ++i) {
                int u = node_of[i];
                int slot = slot_of[static_cast<std::size_t>(u)];
                if (slot < 0) continue;
                const TreeNode& node = tree.nodes[static_cast<std::size_t>(u)];
                if (node.is_leaf()) continue;
                node_of[i] =
                    x[i][static_cast<std::size_t>(node.feature)] < node.threshold
                        ? node.left
                        : node.right;
            }
            frontier = std::move(next_frontier);
        }

        // depth cap: finalize whatever is still open
        if (!frontier.empty()) {
            slot_of.assign(tree.nodes.size(), -1);
            for (std::size_t s = 0; s < frontier.size(); ++s)
                slot_of[static_cast<std::size_t>(frontier[s])] = static_cast<int>(s);
            std::vector<NodeStats> totals(frontier.size());
            for (std::size_t i = 0; i < n; ++i) {
                int slot = slot_of[static_cast<std::size_t>(node_of[i])];
                if (slot < 0) continue;
                totals[static_cast<std::size_t>(slot)].g += grad[i];
                totals[static_cast<std::size_t>(slot)].h += hess[i];
                ++totals[static_cast<std::size_t>(slot)].count;
            }
            for (std::size_t s = 0; s < frontier.size(); ++s) {
                TreeNode& node = tree.nodes[static_cast<std::size_t>(frontier[s])];
                node.feature = -1;
                node.leaf_value = leaf_weight(totals[s]);
            }
        }

        for (std::size_t i = 0; i < n; ++i) {
            int u = node_of[i];
            margin[i] += config.learning_rate *
                         tree.nodes[static_cast<std::size_t>(u)].leaf_value;
        }
        model.trees.push_back(std::move(tree));
    }

    return model;
}

} // namespace voxmark
