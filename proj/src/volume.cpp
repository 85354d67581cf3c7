#include "voxmark/volume.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "voxmark/csv.hpp"

namespace voxmark {

Volume Volume::zeros(const Dims& d, const Spacing& s) {
    Volume v;
    v.dims = d;
    v.spacing = s;
    v.data.assign(voxel_count(d), 0.0f);
    return v;
}

void Volume::validate() const {
    for (int i = 0; i < 3; ++i) {
        if (dims[i] <= 0)
            throw ValidationError("volume dims must be positive");
        if (!(spacing[i] > 0.0))
            throw ValidationError("volume spacing must be strictly positive");
    }
    if (data.size() != size())
        throw ValidationError("volume data length does not match dims");
    for (float v : data) {
        if (!std::isfinite(v))
            throw ValidationError("volume contains non-finite values");
    }
}

Hemisphere hemisphere_from_string(const std::string& s) {
    if (s == "left") return Hemisphere::Left;
    if (s == "right") return Hemisphere::Right;
    if (s == "none") return Hemisphere::None;
    throw FormatError("invalid hemisphere '" + s + "' (expected left, right or none)");
}

std::string to_string(Hemisphere h) {
    switch (h) {
        case Hemisphere::Left: return "left";
        case Hemisphere::Right: return "right";
        default: return "none";
    }
}

const RegionInfo* LabelMap::find_region(int label_id) const {
    for (const auto& r : region_table)
        if (r.label_id == label_id) return &r;
    return nullptr;
}

const RegionInfo* LabelMap::find_region(const std::string& name) const {
    for (const auto& r : region_table)
        if (r.name == name) return &r;
    return nullptr;
}

void LabelMap::validate() const {
    for (int i = 0; i < 3; ++i) {
        if (dims[i] <= 0)
            throw ValidationError("label map dims must be positive");
        if (!(spacing[i] > 0.0))
            throw ValidationError("label map spacing must be strictly positive");
    }
    if (labels.size() != size())
        throw ValidationError("label data length does not match dims");

    std::set<int> ids;
    std::set<std::string> names;
    for (const auto& r : region_table) {
        if (r.label_id == 0)
            throw ValidationError("region table may not define label 0 (background)");
        if (!ids.insert(r.label_id).second)
            throw ValidationError("duplicate label_id " + std::to_string(r.label_id) +
                                  " in region table");
        if (!names.insert(r.name).second)
            throw ValidationError("duplicate region name '" + r.name + "' in region table");
    }

    std::set<int> unknown;
    for (std::int32_t v : labels) {
        if (v != 0 && ids.find(v) == ids.end()) unknown.insert(v);
    }
    if (!unknown.empty()) {
        std::ostringstream oss;
        oss << "label map contains ids absent from the region table:";
        for (int v : unknown) oss << ' ' << v;
        throw ValidationError(oss.str());
    }
}

std::vector<RegionInfo> read_region_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open region table '" + path + "'");

    std::string line;
    if (!std::getline(in, line))
        throw FormatError(path + ": empty region table");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "label_id,name,hemisphere,is_cortical,is_gray_matter")
        throw FormatError(path + ": bad header, expected "
                          "'label_id,name,hemisphere,is_cortical,is_gray_matter'");

    std::vector<RegionInfo> table;
    std::set<int> ids;
    std::set<std::string> names;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = csv::split(line);
        std::string ctx = path + ":" + std::to_string(line_no);
        if (fields.size() != 5)
            throw FormatError(ctx + ": expected 5 fields, got " + std::to_string(fields.size()));
        RegionInfo r;
        r.label_id = static_cast<int>(csv::parse_long(fields[0], ctx));
        if (r.label_id == 0)
            throw ValidationError(ctx + ": label_id 0 is reserved for background");
        r.name = fields[1];
        csv::check_field_name(r.name);
        r.hemisphere = hemisphere_from_string(fields[2]);
        long c = csv::parse_long(fields[3], ctx);
        long g = csv::parse_long(fields[4], ctx);
        if ((c != 0 && c != 1) || (g != 0 && g != 1))
            throw FormatError(ctx + ": flags must be 0 or 1");
        r.is_cortical = c == 1;
        r.is_gray_matter = g == 1;
        if (!ids.insert(r.label_id).second)
            throw ValidationError(ctx + ": duplicate label_id " + std::to_string(r.label_id));
        if (!names.insert(r.name).second)
            throw ValidationError(ctx + ": duplicate region name '" + r.name + "'");
        table.push_back(std::move(r));
    }
    return table;
}

void write_region_table(const std::string& path, const std::vector<RegionInfo>& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "label_id,name,hemisphere,is_cortical,is_gray_matter\n";
    for (const auto& r : table) {
        out << r.label_id << ',' << r.name << ',' << to_string(r.hemisphere) << ','
            << (r.is_cortical ? 1 : 0) << ',' << (r.is_gray_matter ? 1 : 0) << '\n';
    }
}

namespace {

std::array<int, 3> crop_start(const std::array<int, 3>& center, const Dims& size) {
    return {center[0] - size[0] / 2, center[1] - size[1] / 2, center[2] - size[2] / 2};
}

} // namespace

Volume crop_centered(const Volume& v, const std::array<int, 3>& center, const Dims& size) {
    for (int i = 0; i < 3; ++i)
        if (size[i] <= 0) throw ValidationError("crop size must be positive");

    Volume out = Volume::zeros(size, v.spacing);
    const auto start = crop_start(center, size);
    for (int z = 0; z < size[2]; ++z) {
        int sz = start[2] + z;
        if (sz < 0 || sz >= v.dims[2]) continue;
        for (int y = 0; y < size[1]; ++y) {
            int sy = start[1] + y;
            if (sy < 0 || sy >= v.dims[1]) continue;
            int x0 = std::max(0, -start[0]);
            int x1 = std::min(size[0], v.dims[0] - start[0]);
            for (int x = x0; x < x1; ++x)
                out.at(x, y, z) = v.at(start[0] + x, sy, sz);
        }
    }
    return out;
}

std::vector<std::int32_t> crop_centered_labels(const LabelMap& lm,
                                               const std::array<int, 3>& center,
                                               const Dims& size) {
    for (int i = 0; i < 3; ++i)
        if (size[i] <= 0) throw ValidationError("crop size must be positive");

    std::vector<std::int32_t> out(voxel_count(size), 0);
    const auto start = crop_start(center, size);
    std::size_t idx = 0;
    for (int z = 0; z < size[2]; ++z) {
        int sz = start[2] + z;
        for (int y = 0; y < size[1]; ++y) {
            int sy = start[1] + y;
            for (int x = 0; x < size[0]; ++x, ++idx) {
                int sx = start[0] + x;
                if (sx >= 0 && sy >= 0 && sz >= 0 && sx < lm.dims[0] && sy < lm.dims[1] &&
                    sz < lm.dims[2])
                    out[idx] = lm.at(sx, sy, sz);
            }
        }
    }
    return out;
}

} // namespace voxmark
