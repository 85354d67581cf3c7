#ifndef VOXMARK_PIPELINE_HPP
#define VOXMARK_PIPELINE_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "voxmark/volume.hpp"

namespace voxmark {

// Assembly of per-subject feature blocks into the matrix consumed by the
// training harness. Block widths are fixed contracts: radiomics 11 per
// region, texture 27,000, thickness 2 per cortical region, deep 512.

enum class Diagnosis { CN, MCI, AD };
Diagnosis diagnosis_from_string(const std::string& s);
std::string to_string(Diagnosis d);

enum class Task { AdVsCn, MciVsCn };
Task task_from_string(const std::string& s);
std::string to_string(Task t);

inline constexpr std::size_t kDeepFeatureCount = 512;

struct FeatureBlock {
    std::vector<double> values;
    std::vector<std::uint8_t> missing; // per-source-region flags, may be empty
};

struct SubjectRecord {
    std::string subject_id;
    Diagnosis diagnosis = Diagnosis::CN;
    std::optional<double> age;
    double icv_mm3 = 0.0; // 0 until radiomics extraction fills it
    std::map<std::string, FeatureBlock> blocks; // keyed radiomics/texture/thickness/deep
};

// Divides the radiomics volume columns (suffix "_vol") by the intracranial
// volume. Other features keep their native units.
SubjectRecord normalize_blocks(const SubjectRecord& record,
                               const std::vector<std::string>& radiomics_names, double icv_mm3);

struct FeatureMatrix {
    Task task = Task::AdVsCn;
    std::vector<std::string> column_names;
    std::vector<std::string> subject_ids;
    std::vector<int> labels; // 1 = disease class
    std::vector<std::vector<double>> rows;

    std::size_t n_rows() const { return rows.size(); }
    std::size_t n_cols() const { return column_names.size(); }
    void validate() const;
};

struct ZScoreParams {
    std::vector<double> mean;
    std::vector<double> std;
    std::vector<std::uint8_t> constant; // columns with zero train variance
};

// Column-wise standardization fit on `train` only; constant columns map to
// zero everywhere. Applies in place to train plus any extra matrices.
ZScoreParams zscore_fit(const FeatureMatrix& train);
void zscore_apply(const ZScoreParams& p, FeatureMatrix& m);
std::vector<double> zscore_apply_row(const ZScoreParams& p, const std::vector<double>& row);

// Column layout of an assembled matrix: blocks in the fixed order
// radiomics, texture, thickness, deep, then age.
struct BlockSchema {
    std::string name;
    std::vector<std::string> column_names;
};

FeatureMatrix assemble(const std::vector<SubjectRecord>& records, Task task,
                       const std::vector<BlockSchema>& schemas, // requested blocks, in order
                       bool include_age);

// CSV with header subject_id,f0..f511
std::map<std::string, std::vector<double>> import_deep_features(const std::string& path);

// --- persistence -------------------------------------------------------------

// Block CSV: subject_id followed by the block's columns, one row per subject.
void write_block_csv(const std::string& path, const std::vector<std::string>& column_names,
                     const std::vector<std::string>& subject_ids,
                     const std::vector<std::vector<double>>& rows);
struct BlockCsv {
    std::vector<std::string> column_names;
    std::vector<std::string> subject_ids;
    std::vector<std::vector<double>> rows;
};
BlockCsv read_block_csv(const std::string& path);

// FeatureMatrix CSV: subject_id,label,task then feature columns.
void write_feature_matrix_csv(const std::string& path, const FeatureMatrix& m);
FeatureMatrix read_feature_matrix_csv(const std::string& path);

// Subject manifest: subject_id,diagnosis,age,volume_path,labelmap_path
// (age may be empty).
struct ManifestEntry {
    std::string subject_id;
    Diagnosis diagnosis;
    std::optional<double> age;
    std::string volume_path;
    std::string labelmap_path;
};
std::vector<ManifestEntry> read_manifest(const std::string& path);
void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);

} // namespace voxmark

#endif
