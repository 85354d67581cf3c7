#ifndef VOXMARK_WORKFLOW_HPP
#define VOXMARK_WORKFLOW_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "voxmark/harness.hpp"
#include "voxmark/phantom.hpp"
#include "voxmark/pipeline.hpp"
#include "voxmark/texture.hpp"
#include "voxmark/thickness.hpp"

namespace voxmark {

// Orchestration shared by the CLI and the acceptance suite: cohort phantom
// generation, per-subject block extraction, assembly, and the training run.
// Everything is deterministic for fixed inputs and seed.

struct CohortSubject {
    std::string subject_id;
    Diagnosis diagnosis = Diagnosis::CN;
    std::optional<double> age;
    PhantomSpec phantom;
};

// Either {"subjects":[...]} or a single subject object
// {"subject_id":...,"diagnosis":...,"age":...,"phantom":{...}}.
std::vector<CohortSubject> parse_cohort_json(const std::string& json_text,
                                             const std::string& context);

// Writes <id>_t1.nii / <id>_labels.nii under out_dir and maintains
// out_dir/manifest.csv (rows keyed by subject_id, re-runs overwrite).
std::vector<ManifestEntry> generate_cohort(const std::vector<CohortSubject>& cohort,
                                           std::uint64_t seed, const std::string& out_dir,
                                           bool verbose);

struct ExtractOptions {
    std::vector<std::string> blocks; // subset of {radiomics, texture, thickness}
    std::vector<std::string> hippocampus_names{"Left-Hippocampus", "Right-Hippocampus"};
    TextureParams texture;
    ThicknessParams thickness;
    bool verbose = false;
};

struct ExtractReport {
    std::vector<std::string> written_files;
    std::vector<std::string> subject_errors; // "<id>: <message>"
};

// One CSV per requested block plus icv.csv and per-block missingness
// sidecars; failed subjects are collected, successful ones still written.
ExtractReport extract_blocks(const std::vector<ManifestEntry>& manifest,
                             const std::vector<RegionInfo>& region_table,
                             const ExtractOptions& options, const std::string& out_dir);

struct AssembleOptions {
    std::vector<std::string> blocks; // subset of {radiomics, texture, thickness, deep}
    Task task = Task::AdVsCn;
    bool include_age = false;
    std::string deep_features_path; // required when "deep" is requested
};

FeatureMatrix assemble_from_dir(const std::vector<ManifestEntry>& manifest,
                                const std::string& features_dir,
                                const AssembleOptions& options);

struct TrainEvalOptions {
    GridSpec grid;
    double test_fraction = 0.2;
    int k_folds = 10;
    std::size_t top_k = 50;
    std::uint64_t seed = 0;
};

// Runs the protocol and writes report.json, roc.csv and importance.csv.
CVReport train_eval(const FeatureMatrix& matrix, const TrainEvalOptions& options,
                    const std::string& out_dir);

} // namespace voxmark

#endif
