#include "voxmark/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "voxmark/csv.hpp"

namespace voxmark {

Diagnosis diagnosis_from_string(const std::string& s) {
    if (s == "CN") return Diagnosis::CN;
    if (s == "MCI") return Diagnosis::MCI;
    if (s == "AD") return Diagnosis::AD;
    throw FormatError("unknown diagnosis '" + s + "' (expected CN, MCI or AD)");
}

std::string to_string(Diagnosis d) {
    switch (d) {
        case Diagnosis::CN: return "CN";
        case Diagnosis::MCI: return "MCI";
        default: return "AD";
    }
}

Task task_from_string(const std::string& s) {
    if (s == "ad-vs-cn") return Task::AdVsCn;
    if (s == "mci-vs-cn") return Task::MciVsCn;
    throw ConfigError("unknown task '" + s + "' (expected ad-vs-cn or mci-vs-cn)");
}

std::string to_string(Task t) {
    return t == Task::AdVsCn ? "ad-vs-cn" : "mci-vs-cn";
}

SubjectRecord normalize_blocks(const SubjectRecord& record,
                               const std::vector<std::string>& radiomics_names, double icv_mm3) {
    if (!(icv_mm3 > 0.0))
        throw DegenerateInputError("normalize_blocks: intracranial volume must be positive");

    SubjectRecord out = record;
    auto it = out.blocks.find("radiomics");
    if (it != out.blocks.end()) {
        auto& values = it->second.values;
        if (values.size() != radiomics_names.size())
            throw ValidationError("radiomics block length does not match its column names");
        for (std::size_t i = 0; i < values.size(); ++i) {
            const std::string& n = radiomics_names[i];
            if (n.size() >= 4 && n.compare(n.size() - 4, 4, "_vol") == 0)
                values[i] /= icv_mm3;
        }
    }
    return out;
}

void FeatureMatrix::validate() const {
    if (subject_ids.size() != rows.size() || labels.size() != rows.size())
        throw ValidationError("feature matrix row bookkeeping out of sync");
    std::set<std::string> names(column_names.begin(), column_names.end());
    if (names.size() != column_names.size())
        throw ValidationError("feature matrix has duplicate column names");
    for (const auto& row : rows) {
        if (row.size() != column_names.size())
            throw ValidationError("feature matrix is not rectangular");
        for (double v : row)
            if (!std::isfinite(v))
                throw ValidationError("feature matrix contains non-finite values");
    }
    for (int l : labels)
        if (l != 0 && l != 1) throw ValidationError("labels must be 0 or 1");
}

ZScoreParams zscore_fit(const FeatureMatrix& train) {
    if (train.n_rows() == 0)
        throw DegenerateInputError("zscore_fit: empty training matrix");
    const std::size_t d = train.n_cols();
    const double n = static_cast<double>(train.n_rows());

    ZScoreParams p;
    p.mean.assign(d, 0.0);
    p.std.assign(d, 0.0);
    p.constant.assign(d, 0);

    for (const auto& row : train.rows)
        for (std::size_t j = 0; j < d; ++j) p.mean[j] += row[j];
    for (std::size_t j = 0; j < d; ++j) p.mean[j] /= n;
    for (const auto& row : train.rows)
        for (std::size_t j = 0; j < d; ++j) {
            double dev = row[j] - p.mean[j];
            p.std[j] += dev * dev;
        }
    for (std::size_t j = 0; j < d; ++j) {
        p.std[j] = std::sqrt(p.std[j] / n);
        if (p.std[j] == 0.0) p.constant[j] = 1;
    }
    return p;
}

std::vector<double> zscore_apply_row(const ZScoreParams& p, const std::vector<double>& row) {
    if (row.size() != p.mean.size())
        throw ValidationError("zscore: row arity does not match fitted parameters");
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j)
        out[j] = p.constant[j] ? 0.0 : (row[j] - p.mean[j]) / p.std[j];
    return out;
}

void zscore_apply(const ZScoreParams& p, FeatureMatrix& m) {
    for (auto& row : m.rows) row = zscore_apply_row(p, row);
}

FeatureMatrix assemble(const std::vector<SubjectRecord>& records, Task task,
                       const std::vector<BlockSchema>& schemas, bool include_age) {
    FeatureMatrix m;
    m.task = task;
    for (const auto& s : schemas)
        m.column_names.insert(m.column_names.end(), s.column_names.begin(),
                              s.column_names.end());
    if (include_age) m.column_names.push_back("age");

    const Diagnosis positive = task == Task::AdVsCn ? Diagnosis::AD : Diagnosis::MCI;
    const Diagnosis dropped = task == Task::AdVsCn ? Diagnosis::MCI : Diagnosis::AD;

    std::vector<const SubjectRecord*> kept;
    for (const auto& r : records)
        if (r.diagnosis != dropped) kept.push_back(&r);
    std::sort(kept.begin(), kept.end(), [](const SubjectRecord* a, const SubjectRecord* b) {
        return a->subject_id < b->subject_id;
    });
    for (std::size_t i = 1; i < kept.size(); ++i)
        if (kept[i]->subject_id == kept[i - 1]->subject_id)
            throw ValidationError("duplicate subject_id '" + kept[i]->subject_id + "'");

    for (const SubjectRecord* r : kept) {
        std::vector<double> row;
        row.reserve(m.column_names.size());
        for (const auto& s : schemas) {
            auto it = r->blocks.find(s.name);
            if (it == r->blocks.end())
                throw ValidationError("subject '" + r->subject_id + "' is missing block '" +
                                      s.name + "'");
            if (it->second.values.size() != s.column_names.size())
                throw ValidationError("subject '" + r->subject_id + "' block '" + s.name +
                                      "' has " + std::to_string(it->second.values.size()) +
                                      " values, expected " +
                                      std::to_string(s.column_names.size()));
            row.insert(row.end(), it->second.values.begin(), it->second.values.end());
        }
        if (include_age) {
            if (!r->age.has_value())
                throw ValidationError("subject '" + r->subject_id +
                                      "' has no age but age was requested");
            row.push_back(*r->age);
        }
        m.subject_ids.push_back(r->subject_id);
        m.labels.push_back(r->diagnosis == positive ? 1 : 0);
        m.rows.push_back(std::move(row));
    }

    m.validate();
    return m;
}

std::map<std::string, std::vector<double>> import_deep_features(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open deep feature file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw FormatError(path + ": empty file");
    auto header = csv::split(line);
    if (header.size() != kDeepFeatureCount + 1 || header[0] != "subject_id")
        throw FormatError(path + ": header must be subject_id,f0..f511");
    for (std::size_t i = 0; i < kDeepFeatureCount; ++i)
        if (header[i + 1] != "f" + std::to_string(i))
            throw FormatError(path + ": header column " + std::to_string(i + 1) +
                              " must be f" + std::to_string(i));

    std::map<std::string, std::vector<double>> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = csv::split(line);
        std::string ctx = path + ":" + std::to_string(line_no);
        if (fields.size() != kDeepFeatureCount + 1)
            throw FormatError(ctx + ": expected " + std::to_string(kDeepFeatureCount + 1) +
                              " fields, got " + std::to_string(fields.size()));
        std::vector<double> v(kDeepFeatureCount);
        for (std::size_t i = 0; i < kDeepFeatureCount; ++i)
            v[i] = csv::parse_double(fields[i + 1], ctx);
        if (!out.emplace(fields[0], std::move(v)).second)
            throw ValidationError(ctx + ": duplicate subject_id '" + fields[0] + "'");
    }
    return out;
}

// --- persistence ---------------------------------------------------------------

void write_block_csv(const std::string& path, const std::vector<std::string>& column_names,
                     const std::vector<std::string>& subject_ids,
                     const std::vector<std::vector<double>>& rows) {
    if (subject_ids.size() != rows.size())
        throw ValidationError("write_block_csv: id/row count mismatch");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "subject_id";
    for (const auto& n : column_names) {
        csv::check_field_name(n);
        out << ',' << n;
    }
    out << '\n';
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != column_names.size())
            throw ValidationError("write_block_csv: ragged row for subject " + subject_ids[r]);
        out << subject_ids[r];
        for (double v : rows[r]) out << ',' << csv::format_double(v);
        out << '\n';
    }
    if (!out) throw IoError("short write to '" + path + "'");
}

BlockCsv read_block_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open block CSV '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw FormatError(path + ": empty file");
    auto header = csv::split(line);
    if (header.size() < 2 || header[0] != "subject_id")
        throw FormatError(path + ": first header column must be subject_id");

    BlockCsv b;
    b.column_names.assign(header.begin() + 1, header.end());
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = csv::split(line);
        std::string ctx = path + ":" + std::to_string(line_no);
        if (fields.size() != header.size())
            throw FormatError(ctx + ": expected " + std::to_string(header.size()) +
                              " fields, got " + std::to_string(fields.size()));
        b.subject_ids.push_back(fields[0]);
        std::vector<double> row(b.column_names.size());
        for (std::size_t i = 0; i < row.size(); ++i)
            row[i] = csv::parse_double(fields[i + 1], ctx);
        b.rows.push_back(std::move(row));
    }
    return b;
}

void write_feature_matrix_csv(const std::string& path, const FeatureMatrix& m) {
    m.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "subject_id,label,task";
    for (const auto& n : m.column_names) {
        csv::check_field_name(n);
        out << ',' << n;
    }
    out << '\n';
    for (std::size_t r = 0; r < m.n_rows(); ++r) {
        out << m.subject_ids[r] << ',' << m.labels[r] << ',' << to_string(m.task);
        for (double v : m.rows[r]) out << ',' << csv::format_double(v);
        out << '\n';
    }
    if (!out) throw IoError("short write to '" + path + "'");
}

FeatureMatrix read_feature_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open feature matrix '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw FormatError(path + ": empty file");
    auto header = csv::split(line);
    if (header.size() < 4 || header[0] != "subject_id" || header[1] != "label" ||
        header[2] != "task")
        throw FormatError(path + ": header must start with subject_id,label,task");

    FeatureMatrix m;
    m.column_names.assign(header.begin() + 3, header.end());
    bool task_seen = false;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = csv::split(line);
        std::string ctx = path + ":" + std::to_string(line_no);
        if (fields.size() != header.size())
            throw FormatError(ctx + ": expected " + std::to_string(header.size()) +
                              " fields, got " + std::to_string(fields.size()));
        m.subject_ids.push_back(fields[0]);
        long label = csv::parse_long(fields[1], ctx);
        if (label != 0 && label != 1) throw FormatError(ctx + ": label must be 0 or 1");
        m.labels.push_back(static_cast<int>(label));
        Task t = task_from_string(fields[2]);
        if (!task_seen) {
            m.task = t;
            task_seen = true;
        } else if (t != m.task) {
            throw FormatError(ctx + ": mixed tasks in one matrix");
        }
        std::vector<double> row(m.column_names.size());
        for (std::size_t i = 0; i < row.size(); ++i)
            row[i] = csv::parse_double(fields[i + 3], ctx);
        m.rows.push_back(std::move(row));
    }
    m.validate();
    return m;
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw FormatError(path + ": empty manifest");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "subject_id,diagnosis,age,volume_path,labelmap_path")
        throw FormatError(path + ": bad manifest header");

    std::vector<ManifestEntry> out;
    std::set<std::string> seen;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = csv::split(line);
        std::string ctx = path + ":" + std::to_string(line_no);
        if (fields.size() != 5)
            throw FormatError(ctx + ": expected 5 fields, got " +
                              std::to_string(fields.size()));
        ManifestEntry e;
        e.subject_id = fields[0];
        if (e.subject_id.empty()) throw FormatError(ctx + ": empty subject_id");
        if (!seen.insert(e.subject_id).second)
            throw ValidationError(ctx + ": duplicate subject_id '" + e.subject_id + "'");
        e.diagnosis = diagnosis_from_string(fields[1]);
        if (!fields[2].empty()) e.age = csv::parse_double(fields[2], ctx);
        e.volume_path = fields[3];
        e.labelmap_path = fields[4];
        out.push_back(std::move(e));
    }
    return out;
}

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "subject_id,diagnosis,age,volume_path,labelmap_path\n";
    for (const auto& e : entries) {
        out << e.subject_id << ',' << to_string(e.diagnosis) << ',';
        if (e.age.has_value()) out << csv::format_double(*e.age);
        out << ',' << e.volume_path << ',' << e.labelmap_path << '\n';
    }
}

} // namespace voxmark
