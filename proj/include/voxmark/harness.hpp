#ifndef VOXMARK_HARNESS_HPP
#define VOXMARK_HARNESS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "voxmark/gbt.hpp"
#include "voxmark/pipeline.hpp"

namespace voxmark {

// Evaluation protocol: stratified 80/20 split, per-fold grid search over a
// 10-fold stratified cross-validation of the training set, then every fold
// model scored on the held-out test set (double-nested evaluation).

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
stratified_split(const std::vector<int>& labels, double test_fraction, std::uint64_t seed);

// k disjoint stratified (fit, validate) partitions of train_indices.
std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>
kfold(const std::vector<std::size_t>& train_indices, const std::vector<int>& labels, int k,
      std::uint64_t seed);

struct GridSpec {
    std::vector<int> max_depth{2, 3, 4};
    std::vector<double> learning_rate{0.05, 0.1, 0.3};
    std::vector<int> n_estimators{50, 100, 200};
    int min_samples_leaf = 1;
    double feature_subsample = 1.0;

    std::vector<GBTConfig> expand(std::uint64_t seed) const;
};

struct FoldModel {
    int fold = 0;
    GBTConfig config;
    GBTModel model;
    ZScoreParams zscore; // fitted on this fold's fit partition
    double validation_accuracy = 0.0;
};

// Per fold: train every grid config on the fit partition, pick the config
// with the best validation accuracy (ties: fewer estimators, then smaller
// depth, then smaller learning rate).
std::vector<FoldModel> grid_search(const FeatureMatrix& train, const GridSpec& grid, int k,
                                   std::uint64_t seed);

struct Metrics {
    double accuracy = 0.0;
    double auc = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double specificity = 0.0;
};

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;
};

// Threshold-sweep ROC and the rank-statistic AUC (ties count 1/2); the
// trapezoidal area under the returned points equals the rank AUC.
std::pair<std::vector<RocPoint>, double> roc_auc(const std::vector<double>& scores,
                                                 const std::vector<int>& labels);

struct ImportanceRow {
    std::string feature;
    double total_gain = 0.0;
    long split_count = 0;
    double avg_gain = 0.0;
};

// Gain summed over every split of every fold model, ranked by average gain.
std::vector<ImportanceRow> feature_importance(const std::vector<FoldModel>& folds,
                                              const std::vector<std::string>& feature_names);

struct MetricSummary {
    double mean = 0.0;
    double sd = 0.0; // population SD across folds
};

struct CVReport {
    Task task = Task::AdVsCn;
    std::uint64_t seed = 0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::vector<GBTConfig> fold_configs;
    std::vector<Metrics> fold_metrics;
    std::map<std::string, MetricSummary> summary; // accuracy,auc,precision,recall,specificity
    int best_validation_fold = 0;
    std::vector<RocPoint> roc; // best validation model on the test set
    std::vector<ImportanceRow> importance;
};

// Scores each fold model on the test matrix at threshold 0.5 and summarizes
// mean +/- SD per metric.
CVReport nested_test_evaluate(const std::vector<FoldModel>& folds, const FeatureMatrix& test,
                              const std::vector<std::string>& feature_names);

// End-to-end: split, grid search, evaluate.
CVReport run_protocol(const FeatureMatrix& matrix, const GridSpec& grid, double test_fraction,
                      int k, std::uint64_t seed);

Metrics confusion_metrics(const std::vector<double>& probs, const std::vector<int>& labels,
                          double threshold = 0.5);

void write_report_json(const std::string& path, const CVReport& report);
void write_roc_csv(const std::string& path, const std::vector<RocPoint>& roc);
void write_importance_csv(const std::string& path, const std::vector<ImportanceRow>& rows,
                          std::size_t top_k = 50);

} // namespace voxmark

#endif
