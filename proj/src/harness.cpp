#include "voxmark/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "voxmark/csv.hpp"
#include "voxmark/rng.hpp"

namespace voxmark {

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
stratified_split(const std::vector<int>& labels, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("test_fraction must be in (0,1)");

    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1)
            throw ValidationError("labels must be 0/1");
        by_class[labels[i]].push_back(i);
    }
    if (by_class[0].empty() || by_class[1].empty())
        throw DegenerateInputError("stratified_split: both classes must be present");

    std::vector<std::size_t> train, test;
    for (int c = 0; c < 2; ++c) {
        auto idx = by_class[c];
        auto rng = make_rng(seed, "split", static_cast<std::uint64_t>(c));
        shuffle_pinned(idx, rng);
        auto n_test = static_cast<std::size_t>(
            std::llround(static_cast<double>(idx.size()) * test_fraction));
        n_test = std::clamp<std::size_t>(n_test, 1, idx.size() - 1);
        test.insert(test.end(), idx.begin(), idx.begin() + static_cast<long>(n_test));
        train.insert(train.end(), idx.begin() + static_cast<long>(n_test), idx.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {train, test};
}

std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>
kfold(const std::vector<std::size_t>& train_indices, const std::vector<int>& labels, int k,
      std::uint64_t seed) {
    if (k < 2) throw ConfigError("kfold: k must be >= 2");

    std::vector<std::size_t> by_class[2];
    for (std::size_t i : train_indices) by_class[labels[i]].push_back(i);
    for (int c = 0; c < 2; ++c) {
        if (by_class[c].size() < static_cast<std::size_t>(k))
            throw ConfigError("kfold: class " + std::to_string(c) + " has only " +
                              std::to_string(by_class[c].size()) + " members; choose k <= " +
                              std::to_string(by_class[c].size()));
    }

    std::vector<std::vector<std::size_t>> validation(static_cast<std::size_t>(k));
    for (int c = 0; c < 2; ++c) {
        auto idx = by_class[c];
        auto rng = make_rng(seed, "kfold", static_cast<std::uint64_t>(c));
        shuffle_pinned(idx, rng);
        for (std::size_t i = 0; i < idx.size(); ++i)
            validation[i % static_cast<std::size_t>(k)].push_back(idx[i]);
    }

    std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> folds;
    for (int f = 0; f < k; ++f) {
        auto& val = validation[static_cast<std::size_t>(f)];
        std::sort(val.begin(), val.end());
        std::vector<std::size_t> fit;
        for (std::size_t i : train_indices)
            if (!std::binary_search(val.begin(), val.end(), i)) fit.push_back(i);
        folds.emplace_back(std::move(fit), val);
    }
    return folds;
}

std::vector<GBTConfig> GridSpec::expand(std::uint64_t seed) const {
    if (max_depth.empty() || learning_rate.empty() || n_estimators.empty())
        throw ConfigError("grid must have at least one value per axis");
    std::vector<GBTConfig> out;
    std::uint64_t ci = 0;
    for (int depth : max_depth)
        for (double lr : learning_rate)
            for (int ne : n_estimators) {
                GBTConfig c;
                c.max_depth = depth;
                c.learning_rate = lr;
                c.n_estimators = ne;
                c.min_samples_leaf = min_samples_leaf;
                c.feature_subsample = feature_subsample;
                c.seed = seed_stream(seed, "gbt-config", ci++);
                c.validate();
                out.push_back(c);
            }
    return out;
}

namespace {

FeatureMatrix submatrix(const FeatureMatrix& m, const std::vector<std::size_t>& rows) {
    FeatureMatrix out;
    out.task = m.task;
    out.column_names = m.column_names;
    for (std::size_t i : rows) {
        out.subject_ids.push_back(m.subject_ids[i]);
        out.labels.push_back(m.labels[i]);
        out.rows.push_back(m.rows[i]);
    }
    return out;
}

// grid preference for equal validation accuracy
bool config_preferred(const GBTConfig& a, const GBTConfig& b) {
    if (a.n_estimators != b.n_estimators) return a.n_estimators < b.n_estimators;
    if (a.max_depth != b.max_depth) return a.max_depth < b.max_depth;
    return a.learning_rate < b.learning_rate;
}

} // namespace

std::vector<FoldModel> grid_search(const FeatureMatrix& train, const GridSpec& grid, int k,
                                   std::uint64_t seed) {
    train.validate();
    std::vector<std::size_t> all(train.n_rows());
    std::iota(all.begin(), all.end(), 0u);
    auto folds = kfold(all, train.labels, k, seed);
    auto configs = grid.expand(seed);

    std::vector<FoldModel> out;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const auto& [fit_idx, val_idx] = folds[f];
        FeatureMatrix fit = submatrix(train, fit_idx);
        FeatureMatrix val = submatrix(train, val_idx);
        ZScoreParams z = zscore_fit(fit);
        zscore_apply(z, fit);
        zscore_apply(z, val);

        FoldModel best;
        best.fold = static_cast<int>(f);
        bool have_best = false;
        for (const auto& cfg : configs) {
            GBTModel model = gbt_train(fit.rows, fit.labels, cfg);
            auto probs = model.predict(val.rows);
            std::size_t correct = 0;
            for (std::size_t i = 0; i < probs.size(); ++i)
                if ((probs[i] >= 0.5 ? 1 : 0) == val.labels[i]) ++correct;
            double acc = static_cast<double>(correct) / static_cast<double>(probs.size());

            bool take = !have_best || acc > best.validation_accuracy ||
                        (acc == best.validation_accuracy &&
                         config_preferred(cfg, best.config));
            if (take) {
                best.config = cfg;
                best.model = std::move(model);
                best.validation_accuracy = acc;
                have_best = true;
            }
        }
        best.zscore = std::move(z);
        out.push_back(std::move(best));
    }
    return out;
}

std::pair<std::vector<RocPoint>, double> roc_auc(const std::vector<double>& scores,
                                                 const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw ValidationError("roc_auc: bad input sizes");
    std::size_t n_pos = 0;
    for (int l : labels) n_pos += static_cast<std::size_t>(l);
    std::size_t n_neg = scores.size() - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw DegenerateInputError("roc_auc: both classes must be present");

    // rank statistic with average ranks for ties
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] < scores[b];
    });
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t t = i; t <= j; ++t)
            if (labels[order[t]] == 1) rank_sum_pos += avg_rank;
        i = j + 1;
    }
    double auc = (rank_sum_pos - 0.5 * static_cast<double>(n_pos) *
                                     static_cast<double>(n_pos + 1)) /
                 (static_cast<double>(n_pos) * static_cast<double>(n_neg));

    // threshold sweep from high to low, tied scores grouped
    std::vector<RocPoint> roc;
    roc.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::size_t tp = 0, fp = 0;
    std::size_t hi = order.size();
    while (hi > 0) {
        std::size_t lo = hi;
        double s = scores[order[hi - 1]];
        while (lo > 0 && scores[order[lo - 1]] == s) --lo;
        for (std::size_t t = lo; t < hi; ++t) {
            if (labels[order[t]] == 1) ++tp;
            else ++fp;
        }
        roc.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                       static_cast<double>(tp) / static_cast<double>(n_pos), s});
        hi = lo;
    }
    return {roc, auc};
}

Metrics confusion_metrics(const std::vector<double>& probs, const std::vector<int>& labels,
                          double threshold) {
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        bool pred = probs[i] >= threshold;
        if (labels[i] == 1) {
            if (pred) ++tp;
            else ++fn;
        } else {
            if (pred) ++fp;
            else ++tn;
        }
    }
    if (tp + fn == 0 || tn + fp == 0)
        throw DegenerateInputError("metrics undefined: a class is empty in the test set");

    Metrics m;
    m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(probs.size());
    m.precision = (tp + fp) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
    m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    m.specificity = static_cast<double>(tn) / static_cast<double>(tn + fp);
    m.auc = roc_auc(probs, labels).second;
    return m;
}

std::vector<ImportanceRow> feature_importance(const std::vector<FoldModel>& folds,
                                              const std::vector<std::string>& feature_names) {
    if (folds.empty()) throw ValidationError("feature_importance: no models");
    std::vector<double> total(feature_names.size(), 0.0);
    std::vector<long> count(feature_names.size(), 0);
    for (const auto& fm : folds) {
        for (const auto& tree : fm.model.trees) {
            for (const auto& node : tree.nodes) {
                if (node.is_leaf()) continue;
                total[static_cast<std::size_t>(node.feature)] += node.gain;
                ++count[static_cast<std::size_t>(node.feature)];
            }
        }
    }
    std::vector<ImportanceRow> rows;
    for (std::size_t fidx = 0; fidx < feature_names.size(); ++fidx) {
        if (count[fidx] == 0) continue;
        ImportanceRow r;
        r.feature = feature_names[fidx];
        r.total_gain = total[fidx];
        r.split_count = count[fidx];
        r.avg_gain = total[fidx] / static_cast<double>(count[fidx]);
        rows.push_back(std::move(r));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const ImportanceRow& a, const ImportanceRow& b) {
        if (a.avg_gain != b.avg_gain) return a.avg_gain > b.avg_gain;
        return a.feature < b.feature;
    });
    return rows;
}

CVReport nested_test_evaluate(const std::vector<FoldModel>& folds, const FeatureMatrix& test,
                              const std::vector<std::string>& feature_names) {
    if (folds.empty()) throw ValidationError("nested_test_evaluate: no fold models");
    test.validate();

    CVReport report;
    report.task = test.task;
    report.n_test = test.n_rows();

    int best_fold = 0;
    for (std::size_t f = 1; f < folds.size(); ++f)
        if (folds[f].validation_accuracy > folds[best_fold].validation_accuracy)
            best_fold = static_cast<int>(f);
    report.best_validation_fold = best_fold;

    for (const auto& fm : folds) {
        std::vector<std::vector<double>> rows;
        rows.reserve(test.n_rows());
        for (const auto& r : test.rows) rows.push_back(zscore_apply_row(fm.zscore, r));
        auto probs = fm.model.predict(rows);
        report.fold_configs.push_back(fm.config);
        report.fold_metrics.push_back(confusion_metrics(probs, test.labels));
        if (fm.fold == best_fold) report.roc = roc_auc(probs, test.labels).first;
    }

    auto summarize = [&](const char* key, auto getter) {
        double mean = 0.0;
        for (const auto& m : report.fold_metrics) mean += getter(m);
        mean /= static_cast<double>(report.fold_metrics.size());
        double ss = 0.0;
        for (const auto& m : report.fold_metrics) {
            double d = getter(m) - mean;
            ss += d * d;
        }
        report.summary[key] =
            MetricSummary{mean, std::sqrt(ss / static_cast<double>(report.fold_metrics.size()))};
    };
    summarize("accuracy", [](const Metrics& m) { return m.accuracy; });
    summarize("auc", [](const Metrics& m) { return m.auc; });
    summarize("precision", [](const Metrics& m) { return m.precision; });
    summarize("recall", [](const Metrics& m) { return m.recall; });
    summarize("specificity", [](const Metrics& m) { return m.specificity; });

    report.importance = feature_importance(folds, feature_names);
    return report;
}

CVReport run_protocol(const FeatureMatrix& matrix, const GridSpec& grid, double test_fraction,
                      int k, std::uint64_t seed) {
    matrix.validate();
    auto [train_idx, test_idx] = stratified_split(matrix.labels, test_fraction, seed);
    FeatureMatrix train = submatrix(matrix, train_idx);
    FeatureMatrix test = submatrix(matrix, test_idx);
    auto folds = grid_search(train, grid, k, seed);
    CVReport report = nested_test_evaluate(folds, test, matrix.column_names);
    report.seed = seed;
    report.n_train = train.n_rows();
    return report;
}

// --- serialization -----------------------------------------------------------

namespace {

nlohmann::ordered_json config_json(const GBTConfig& c) {
    nlohmann::ordered_json j;
    j["max_depth"] = c.max_depth;
    j["learning_rate"] = c.learning_rate;
    j["n_estimators"] = c.n_estimators;
    j["min_samples_leaf"] = c.min_samples_leaf;
    j["feature_subsample"] = c.feature_subsample;
    return j;
}

} // namespace

void write_report_json(const std::string& path, const CVReport& report) {
    nlohmann::ordered_json j;
    j["task"] = to_string(report.task);
    j["seed"] = report.seed;
    j["n_train"] = report.n_train;
    j["n_test"] = report.n_test;
    j["n_folds"] = report.fold_metrics.size();

    nlohmann::ordered_json folds = nlohmann::ordered_json::array();
    for (std::size_t f = 0; f < report.fold_metrics.size(); ++f) {
        nlohmann::ordered_json jf;
        jf["fold"] = f;
        jf["config"] = config_json(report.fold_configs[f]);
        const Metrics& m = report.fold_metrics[f];
        nlohmann::ordered_json jm;
        jm["accuracy"] = m.accuracy;
        jm["auc"] = m.auc;
        jm["precision"] = m.precision;
        jm["recall"] = m.recall;
        jm["specificity"] = m.specificity;
        jf["metrics"] = jm;
        folds.push_back(jf);
    }
    j["folds"] = folds;

    nlohmann::ordered_json summary;
    for (const char* key : {"accuracy", "auc", "precision", "recall", "specificity"}) {
        const auto& s = report.summary.at(key);
        summary[key] = {{"mean", s.mean}, {"sd", s.sd}};
    }
    j["summary"] = summary;
    j["best_validation_fold"] = report.best_validation_fold;

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
}

void write_roc_csv(const std::string& path, const std::vector<RocPoint>& roc) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "fpr,tpr,threshold\n";
    for (const auto& p : roc) {
        out << csv::format_double(p.fpr) << ',' << csv::format_double(p.tpr) << ',';
        if (std::isinf(p.threshold)) out << "inf";
        else out << csv::format_double(p.threshold);
        out << '\n';
    }
}

void write_importance_csv(const std::string& path, const std::vector<ImportanceRow>& rows,
                          std::size_t top_k) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "rank,feature,total_gain,split_count,avg_gain\n";
    std::size_t n = std::min(top_k, rows.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = rows[i];
        out << (i + 1) << ',' << r.feature << ',' << csv::format_double(r.total_gain) << ','
            << r.split_count << ',' << csv::format_double(r.avg_gain) << '\n';
    }
}

} // namespace voxmark
