// voxmark command line: phantom generation, biomarker extraction, feature
// assembly, and the cross-validated training run. A JSON config file can
// carry every option; explicit flags win over the config.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "voxmark/errors.hpp"
#include "voxmark/nifti.hpp"
#include "voxmark/workflow.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw voxmark::IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct RunConfig {
    std::optional<std::uint64_t> seed;
    std::string manifest;
    std::string region_table;
    std::string task = "ad-vs-cn";
    std::vector<std::string> blocks{"radiomics", "texture", "thickness"};
    bool include_age = false;
    std::string deep_features;
    std::string out_dir = "out";
    std::string features_dir; // defaults to out_dir
    std::string matrix;       // defaults to <features_dir>/matrix.csv
    std::vector<std::string> hippocampus_names{"Left-Hippocampus", "Right-Hippocampus"};
    voxmark::ThicknessParams thickness;
    voxmark::GridSpec grid;
    int k_folds = 10;
    double test_fraction = 0.2;
    std::size_t top_k = 50;
    int jobs = 0;

    std::string features_dir_or_default() const {
        return features_dir.empty() ? out_dir : features_dir;
    }
    std::string matrix_or_default() const {
        return matrix.empty() ? (fs::path(features_dir_or_default()) / "matrix.csv").string()
                              : matrix;
    }
};

void load_config_file(RunConfig& cfg, const std::string& path) {
    json j;
    try {
        j = json::parse(slurp(path));
    } catch (const json::parse_error& e) {
        throw voxmark::FormatError(path + ": invalid JSON at byte " + std::to_string(e.byte) +
                                   ": " + e.what());
    }
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("manifest")) cfg.manifest = j["manifest"].get<std::string>();
    if (j.contains("region_table")) cfg.region_table = j["region_table"].get<std::string>();
    if (j.contains("task")) cfg.task = j["task"].get<std::string>();
    if (j.contains("blocks")) cfg.blocks = j["blocks"].get<std::vector<std::string>>();
    if (j.contains("include_age")) cfg.include_age = j["include_age"].get<bool>();
    if (j.contains("deep_features")) cfg.deep_features = j["deep_features"].get<std::string>();
    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("features_dir")) cfg.features_dir = j["features_dir"].get<std::string>();
    if (j.contains("matrix")) cfg.matrix = j["matrix"].get<std::string>();
    if (j.contains("hippocampus_names"))
        cfg.hippocampus_names = j["hippocampus_names"].get<std::vector<std::string>>();
    if (j.contains("thickness")) {
        const auto& t = j["thickness"];
        if (t.contains("sphere_radius_mm"))
            cfg.thickness.sphere_radius_mm = t["sphere_radius_mm"].get<double>();
        if (t.contains("angle_step_deg"))
            cfg.thickness.angle_step_deg = t["angle_step_deg"].get<double>();
        if (t.contains("upsampling_scale"))
            cfg.thickness.upsampling_scale = t["upsampling_scale"].get<int>();
    }
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        if (g.contains("max_depth")) cfg.grid.max_depth = g["max_depth"].get<std::vector<int>>();
        if (g.contains("learning_rate"))
            cfg.grid.learning_rate = g["learning_rate"].get<std::vector<double>>();
        if (g.contains("n_estimators"))
            cfg.grid.n_estimators = g["n_estimators"].get<std::vector<int>>();
        if (g.contains("min_samples_leaf"))
            cfg.grid.min_samples_leaf = g["min_samples_leaf"].get<int>();
        if (g.contains("feature_subsample"))
            cfg.grid.feature_subsample = g["feature_subsample"].get<double>();
    }
    if (j.contains("k_folds")) cfg.k_folds = j["k_folds"].get<int>();
    if (j.contains("test_fraction")) cfg.test_fraction = j["test_fraction"].get<double>();
    if (j.contains("top_k")) cfg.top_k = j["top_k"].get<std::size_t>();
    if (j.contains("jobs")) cfg.jobs = j["jobs"].get<int>();
}

std::uint64_t require_seed(const RunConfig& cfg) {
    if (!cfg.seed.has_value())
        throw voxmark::ConfigError("a seed is required (--seed or \"seed\" in the config); "
                                   "wall-clock defaults are not supported");
    return *cfg.seed;
}

void apply_jobs(const RunConfig& cfg) {
#ifdef _OPENMP
    if (cfg.jobs > 0) omp_set_num_threads(cfg.jobs);
#endif
}

int cmd_phantom(const RunConfig& cfg, const std::string& spec_path) {
    auto cohort = voxmark::parse_cohort_json(slurp(spec_path), spec_path);
    auto entries = voxmark::generate_cohort(cohort, require_seed(cfg), cfg.out_dir, true);
    std::fprintf(stderr, "[phantom] wrote %zu subject(s), manifest at %s\n", cohort.size(),
                 (fs::path(cfg.out_dir) / "manifest.csv").string().c_str());
    (void)entries;
    return 0;
}

int cmd_extract(const RunConfig& cfg) {
    if (cfg.manifest.empty()) throw voxmark::ConfigError("extract: --manifest is required");
    if (cfg.region_table.empty())
        throw voxmark::ConfigError("extract: --regions is required");
    apply_jobs(cfg);

    auto manifest = voxmark::read_manifest(cfg.manifest);
    auto table = voxmark::read_region_table(cfg.region_table);

    voxmark::ExtractOptions opts;
    opts.blocks.clear();
    for (const auto& b : cfg.blocks)
        if (b != "deep") opts.blocks.push_back(b); // deep is ingested at assembly
    opts.hippocampus_names = cfg.hippocampus_names;
    opts.thickness = cfg.thickness;
    opts.verbose = true;

    auto report = voxmark::extract_blocks(manifest, table, opts,
                                          cfg.features_dir_or_default());
    for (const auto& f : report.written_files)
        std::fprintf(stderr, "[extract] wrote %s\n", f.c_str());
    if (!report.subject_errors.empty()) {
        for (const auto& e : report.subject_errors)
            std::fprintf(stderr, "[extract] FAILED %s\n", e.c_str());
        return 1;
    }
    return 0;
}

int cmd_assemble(const RunConfig& cfg) {
    if (cfg.manifest.empty()) throw voxmark::ConfigError("assemble: --manifest is required");
    auto manifest = voxmark::read_manifest(cfg.manifest);

    voxmark::AssembleOptions opts;
    opts.blocks = cfg.blocks;
    opts.task = voxmark::task_from_string(cfg.task);
    opts.include_age = cfg.include_age;
    opts.deep_features_path = cfg.deep_features;

    auto matrix =
        voxmark::assemble_from_dir(manifest, cfg.features_dir_or_default(), opts);
    voxmark::write_feature_matrix_csv(cfg.matrix_or_default(), matrix);
    std::fprintf(stderr, "[assemble] %zu subjects x %zu features -> %s\n", matrix.n_rows(),
                 matrix.n_cols(), cfg.matrix_or_default().c_str());
    return 0;
}

int cmd_train_eval(const RunConfig& cfg) {
    apply_jobs(cfg);
    auto matrix = voxmark::read_feature_matrix_csv(cfg.matrix_or_default());

    voxmark::TrainEvalOptions opts;
    opts.grid = cfg.grid;
    opts.test_fraction = cfg.test_fraction;
    opts.k_folds = cfg.k_folds;
    opts.top_k = cfg.top_k;
    opts.seed = require_seed(cfg);

    auto report = voxmark::train_eval(matrix, opts, cfg.out_dir);
    const auto& acc = report.summary.at("accuracy");
    const auto& auc = report.summary.at("auc");
    std::fprintf(stderr,
                 "[train-eval] %s: accuracy %.3f +/- %.3f, auc %.3f +/- %.3f (%zu folds)\n",
                 to_string(report.task).c_str(), acc.mean, acc.sd, auc.mean, auc.sd,
                 report.fold_metrics.size());
    std::fprintf(stderr, "[train-eval] artifacts in %s\n", cfg.out_dir.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"voxmark: MRI biomarker extraction and evaluation toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    RunConfig cfg;

    // flag staging: only values the user actually passed override the config
    std::uint64_t seed_flag = 0;
    std::string out_flag, task_flag, blocks_flag, manifest_flag, regions_flag;
    std::string matrix_flag, deep_flag, features_flag;
    int jobs_flag = 0;
    bool include_age_flag = false;

    app.add_option("--config", config_path, "JSON config file");
    auto* seed_opt = app.add_option("--seed", seed_flag, "master seed (required; no wall-clock default)");
    auto* out_opt = app.add_option("--out", out_flag, "output directory");
    auto* jobs_opt = app.add_option("--jobs", jobs_flag, "worker thread budget");
    auto* task_opt = app.add_option("--task", task_flag, "ad-vs-cn or mci-vs-cn");
    auto* blocks_opt = app.add_option("--blocks", blocks_flag,
                                      "comma-separated subset of radiomics,texture,thickness,deep");
    auto* age_opt = app.add_flag("--include-age", include_age_flag, "append age as a feature");
    auto* manifest_opt = app.add_option("--manifest", manifest_flag, "subject manifest CSV");
    auto* regions_opt = app.add_option("--regions", regions_flag, "region table CSV");
    auto* matrix_opt = app.add_option("--matrix", matrix_flag, "feature matrix CSV");
    auto* deep_opt = app.add_option("--deep", deep_flag, "deep feature CSV (subject_id,f0..f511)");
    auto* features_opt =
        app.add_option("--features", features_flag, "directory holding block CSVs");

    std::string spec_path;
    auto* phantom = app.add_subcommand("phantom", "generate synthetic volumes from a spec");
    phantom->add_option("--spec", spec_path, "phantom or cohort spec JSON")->required();

    auto* extract = app.add_subcommand("extract", "compute feature blocks per subject");
    auto* assemble = app.add_subcommand("assemble", "build the feature matrix from blocks");
    auto* train_eval = app.add_subcommand("train-eval", "run the cross-validated evaluation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (!config_path.empty()) load_config_file(cfg, config_path);
        if (seed_opt->count()) cfg.seed = seed_flag;
        if (out_opt->count()) cfg.out_dir = out_flag;
        if (jobs_opt->count()) cfg.jobs = jobs_flag;
        if (task_opt->count()) cfg.task = task_flag;
        if (blocks_opt->count()) {
            cfg.blocks.clear();
            std::stringstream ss(blocks_flag);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!item.empty()) cfg.blocks.push_back(item);
        }
        if (age_opt->count()) cfg.include_age = include_age_flag;
        if (manifest_opt->count()) cfg.manifest = manifest_flag;
        if (regions_opt->count()) cfg.region_table = regions_flag;
        if (matrix_opt->count()) cfg.matrix = matrix_flag;
        if (deep_opt->count()) cfg.deep_features = deep_flag;
        if (features_opt->count()) cfg.features_dir = features_flag;

        if (phantom->parsed()) return cmd_phantom(cfg, spec_path);
        if (extract->parsed()) return cmd_extract(cfg);
        if (assemble->parsed()) return cmd_assemble(cfg);
        if (train_eval->parsed()) return cmd_train_eval(cfg);
        return 2;
    } catch (const voxmark::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const voxmark::FormatError& e) {
        std::fprintf(stderr, "format error: %s\n", e.what());
        return 2;
    } catch (const voxmark::ValidationError& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
