#include "voxmark/workflow.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "voxmark/csv.hpp"
#include "voxmark/nifti.hpp"
#include "voxmark/radiomics.hpp"
#include "voxmark/rng.hpp"

namespace voxmark {

namespace fs = std::filesystem;

std::vector<CohortSubject> parse_cohort_json(const std::string& json_text,
                                             const std::string& context) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(context + ": invalid JSON at byte " + std::to_string(e.byte) + ": " +
                          e.what());
    }

    auto parse_subject = [&](const nlohmann::json& js, const std::string& ctx) {
        CohortSubject s;
        if (!js.contains("subject_id") || !js["subject_id"].is_string())
            throw FormatError(ctx + ": missing subject_id");
        s.subject_id = js["subject_id"].get<std::string>();
        csv::check_field_name(s.subject_id);
        s.diagnosis = diagnosis_from_string(js.value("diagnosis", "CN"));
        if (js.contains("age") && !js["age"].is_null()) s.age = js["age"].get<double>();
        if (!js.contains("phantom"))
            throw FormatError(ctx + ": missing phantom spec");
        s.phantom = parse_phantom_spec_json(js["phantom"].dump(), ctx + " phantom");
        return s;
    };

    std::vector<CohortSubject> out;
    if (j.contains("subjects")) {
        if (!j["subjects"].is_array())
            throw FormatError(context + ": 'subjects' must be an array");
        for (std::size_t i = 0; i < j["subjects"].size(); ++i)
            out.push_back(parse_subject(j["subjects"][i],
                                        context + " subjects[" + std::to_string(i) + "]"));
    } else {
        out.push_back(parse_subject(j, context));
    }

    std::set<std::string> ids;
    for (const auto& s : out)
        if (!ids.insert(s.subject_id).second)
            throw ValidationError(context + ": duplicate subject_id '" + s.subject_id + "'");
    return out;
}

std::vector<ManifestEntry> generate_cohort(const std::vector<CohortSubject>& cohort,
                                           std::uint64_t seed, const std::string& out_dir,
                                           bool verbose) {
    fs::create_directories(out_dir);
    const std::string manifest_path = (fs::path(out_dir) / "manifest.csv").string();

    std::vector<ManifestEntry> entries;
    if (fs::exists(manifest_path)) entries = read_manifest(manifest_path);

    for (const auto& subject : cohort) {
        if (verbose)
            std::fprintf(stderr, "[phantom] subject %s\n", subject.subject_id.c_str());
        auto [vol, lm] = generate_phantom(
            subject.phantom, seed_stream(seed, "phantom-subject", fnv1a64(subject.subject_id)));

        std::string vol_path = (fs::path(out_dir) / (subject.subject_id + "_t1.nii")).string();
        std::string lab_path =
            (fs::path(out_dir) / (subject.subject_id + "_labels.nii")).string();
        write_nifti(vol_path, vol);
        write_labelmap(lab_path, lm);

        ManifestEntry e;
        e.subject_id = subject.subject_id;
        e.diagnosis = subject.diagnosis;
        e.age = subject.age;
        e.volume_path = vol_path;
        e.labelmap_path = lab_path;

        auto it = std::find_if(entries.begin(), entries.end(), [&](const ManifestEntry& m) {
            return m.subject_id == e.subject_id;
        });
        if (it != entries.end()) *it = e;
        else entries.push_back(e);
    }

    std::sort(entries.begin(), entries.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) {
                  return a.subject_id < b.subject_id;
              });
    write_manifest(manifest_path, entries);
    return entries;
}

ExtractReport extract_blocks(const std::vector<ManifestEntry>& manifest,
                             const std::vector<RegionInfo>& region_table,
                             const ExtractOptions& options, const std::string& out_dir) {
    if (manifest.empty())
        throw ConfigError("extract: manifest has no subjects");
    if (options.blocks.empty())
        throw ConfigError("extract: no blocks requested");
    for (const auto& b : options.blocks)
        if (b != "radiomics" && b != "texture" && b != "thickness")
            throw ConfigError("extract: unknown block '" + b + "'");
    fs::create_directories(out_dir);

    auto wants = [&](const char* b) {
        return std::find(options.blocks.begin(), options.blocks.end(), b) !=
               options.blocks.end();
    };

    const auto radiomics_names = radiomics_column_names(region_table);
    const auto texture_names = texture_column_names(options.texture);
    const auto thickness_names = thickness_column_names(region_table);

    std::vector<std::string> ok_ids;
    std::vector<std::vector<double>> radiomics_rows, texture_rows, thickness_rows;
    std::vector<std::vector<double>> radiomics_missing, thickness_missing;
    std::vector<double> icv_values;

    ExtractReport report;

    for (const auto& entry : manifest) {
        try {
            if (options.verbose)
                std::fprintf(stderr, "[extract] subject %s\n", entry.subject_id.c_str());
            Volume vol = read_nifti(entry.volume_path);
            LabelMap lm = read_labelmap(entry.labelmap_path, region_table);

            std::vector<double> rad_row, thk_row, rad_miss, thk_miss;
            std::vector<double> tex_row;
            double icv = 0.0;

            if (wants("radiomics")) {
                auto props = region_radiomics(lm);
                icv = intracranial_volume(lm);
                rad_row.reserve(radiomics_names.size());
                for (const auto& region : region_table) {
                    const auto& r = props.at(region.label_id);
                    auto flat = r.flatten();
                    rad_row.insert(rad_row.end(), flat.begin(), flat.end());
                    rad_miss.push_back(r.missing ? 1.0 : 0.0);
                }
            }
            if (wants("texture")) {
                auto tf = hippocampal_texture_features(vol, lm, options.hippocampus_names,
                                                       options.texture);
                tex_row = std::move(tf.values);
            }
            if (wants("thickness")) {
                auto stats = cortical_thickness_features(lm, options.thickness);
                for (const auto& s : stats) {
                    thk_row.push_back(s.mean_mm);
                    thk_row.push_back(s.std_mm);
                    thk_miss.push_back(s.missing ? 1.0 : 0.0);
                }
            }

            ok_ids.push_back(entry.subject_id);
            if (wants("radiomics")) {
                radiomics_rows.push_back(std::move(rad_row));
                radiomics_missing.push_back(std::move(rad_miss));
                icv_values.push_back(icv);
            }
            if (wants("texture")) texture_rows.push_back(std::move(tex_row));
            if (wants("thickness")) {
                thickness_rows.push_back(std::move(thk_row));
                thickness_missing.push_back(std::move(thk_miss));
            }
        } catch (const std::exception& e) {
            report.subject_errors.push_back(entry.subject_id + ": " + e.what());
        }
    }

    auto emit = [&](const std::string& name, const std::vector<std::string>& cols,
                    const std::vector<std::vector<double>>& rows) {
        std::string path = (fs::path(out_dir) / name).string();
        write_block_csv(path, cols, ok_ids, rows);
        report.written_files.push_back(path);
    };

    if (wants("radiomics")) {
        emit("radiomics.csv", radiomics_names, radiomics_rows);
        std::vector<std::string> miss_cols;
        for (const auto& r : region_table) miss_cols.push_back(r.name + "_missing");
        emit("radiomics.missing.csv", miss_cols, radiomics_missing);
        std::vector<std::vector<double>> icv_rows;
        for (double v : icv_values) icv_rows.push_back({v});
        emit("icv.csv", {"icv_mm3"}, icv_rows);
    }
    if (wants("texture")) emit("texture.csv", texture_names, texture_rows);
    if (wants("thickness")) {
        emit("thickness.csv", thickness_names, thickness_rows);
        std::vector<std::string> miss_cols;
        for (const auto& r : region_table)
            if (r.is_cortical) miss_cols.push_back(r.name + "_missing");
        emit("thickness.missing.csv", miss_cols, thickness_missing);
    }
    return report;
}

FeatureMatrix assemble_from_dir(const std::vector<ManifestEntry>& manifest,
                                const std::string& features_dir,
                                const AssembleOptions& options) {
    if (options.blocks.empty()) throw ConfigError("assemble: no blocks requested");
    for (const auto& b : options.blocks)
        if (b != "radiomics" && b != "texture" && b != "thickness" && b != "deep")
            throw ConfigError("assemble: unknown block '" + b + "'");

    auto wants = [&](const char* b) {
        return std::find(options.blocks.begin(), options.blocks.end(), b) !=
               options.blocks.end();
    };

    std::map<std::string, SubjectRecord> records;
    for (const auto& e : manifest) {
        SubjectRecord r;
        r.subject_id = e.subject_id;
        r.diagnosis = e.diagnosis;
        r.age = e.age;
        records[e.subject_id] = std::move(r);
    }

    std::vector<BlockSchema> schemas;
    std::vector<std::string> radiomics_names;

    auto load_block = [&](const char* name) {
        std::string path = (fs::path(features_dir) / (std::string(name) + ".csv")).string();
        if (!fs::exists(path))
            throw ConfigError("assemble: missing block file '" + path + "'");
        BlockCsv b = read_block_csv(path);
        for (std::size_t i = 0; i < b.subject_ids.size(); ++i) {
            auto it = records.find(b.subject_ids[i]);
            if (it == records.end()) continue; // extra subjects are ignored
            it->second.blocks[name] = FeatureBlock{std::move(b.rows[i]), {}};
        }
        schemas.push_back(BlockSchema{name, b.column_names});
        if (std::string(name) == "radiomics") radiomics_names = b.column_names;
    };

    // canonical block order
    if (wants("radiomics")) load_block("radiomics");
    if (wants("texture")) load_block("texture");
    if (wants("thickness")) load_block("thickness");
    if (wants("deep")) {
        if (options.deep_features_path.empty())
            throw ConfigError("assemble: deep block requested but no deep feature CSV given");
        auto deep = import_deep_features(options.deep_features_path);
        std::vector<std::string> names;
        for (std::size_t i = 0; i < kDeepFeatureCount; ++i)
            names.push_back("f" + std::to_string(i));
        for (auto& [id, rec] : records) {
            auto it = deep.find(id);
            if (it != deep.end()) rec.blocks["deep"] = FeatureBlock{it->second, {}};
        }
        schemas.push_back(BlockSchema{"deep", names});
    }

    // ICV normalization of radiomics volumes
    if (wants("radiomics")) {
        std::string icv_path = (fs::path(features_dir) / "icv.csv").string();
        if (!fs::exists(icv_path))
            throw ConfigError("assemble: missing '" + icv_path + "' (radiomics normalization)");
        BlockCsv icv = read_block_csv(icv_path);
        if (icv.column_names != std::vector<std::string>{"icv_mm3"})
            throw FormatError(icv_path + ": expected a single icv_mm3 column");
        for (std::size_t i = 0; i < icv.subject_ids.size(); ++i) {
            auto it = records.find(icv.subject_ids[i]);
            if (it != records.end()) it->second.icv_mm3 = icv.rows[i][0];
        }
        for (auto& [id, rec] : records) {
            if (rec.blocks.count("radiomics"))
                rec = normalize_blocks(rec, radiomics_names, rec.icv_mm3);
        }
    }

    std::vector<SubjectRecord> list;
    for (auto& [id, rec] : records) list.push_back(std::move(rec));
    return assemble(list, options.task, schemas, options.include_age);
}

CVReport train_eval(const FeatureMatrix& matrix, const TrainEvalOptions& options,
                    const std::string& out_dir) {
    fs::create_directories(out_dir);
    CVReport report =
        run_protocol(matrix, options.grid, options.test_fraction, options.k_folds, options.seed);
    write_report_json((fs::path(out_dir) / "report.json").string(), report);
    write_roc_csv((fs::path(out_dir) / "roc.csv").string(), report.roc);
    write_importance_csv((fs::path(out_dir) / "importance.csv").string(), report.importance,
                         options.top_k);
    return report;
}

} // namespace voxmark
