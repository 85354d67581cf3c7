#ifndef VOXMARK_VOLUME_HPP
#define VOXMARK_VOLUME_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "voxmark/errors.hpp"

namespace voxmark {

using Dims = std::array<int, 3>;
using Spacing = std::array<double, 3>;

inline std::size_t voxel_count(const Dims& d) {
    return static_cast<std::size_t>(d[0]) * static_cast<std::size_t>(d[1]) *
           static_cast<std::size_t>(d[2]);
}

inline double voxel_volume_mm3(const Spacing& s) { return s[0] * s[1] * s[2]; }

// 3D scalar grid. Storage is x-fastest: index = x + nx*(y + ny*z).
// Intensities are expected in [0,255] for normalized inputs; the type does
// not enforce the range, only finiteness.
struct Volume {
    Dims dims{0, 0, 0};
    Spacing spacing{1.0, 1.0, 1.0};
    std::vector<float> data;

    std::size_t size() const { return voxel_count(dims); }

    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims[0]) *
                   (static_cast<std::size_t>(y) +
                    static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(z));
    }

    bool in_bounds(int x, int y, int z) const {
        return x >= 0 && y >= 0 && z >= 0 && x < dims[0] && y < dims[1] && z < dims[2];
    }

    float at(int x, int y, int z) const { return data[index(x, y, z)]; }
    float& at(int x, int y, int z) { return data[index(x, y, z)]; }

    static Volume zeros(const Dims& d, const Spacing& s);
    void validate() const;
};

enum class Hemisphere { Left, Right, None };

Hemisphere hemisphere_from_string(const std::string& s);
std::string to_string(Hemisphere h);

struct RegionInfo {
    int label_id = 0;
    std::string name;
    Hemisphere hemisphere = Hemisphere::None;
    bool is_cortical = false;
    bool is_gray_matter = false;
};

// Integer label grid plus the table describing each label. 0 is background
// and never appears in the table.
struct LabelMap {
    Dims dims{0, 0, 0};
    Spacing spacing{1.0, 1.0, 1.0};
    std::vector<std::int32_t> labels;
    std::vector<RegionInfo> region_table;

    std::size_t size() const { return voxel_count(dims); }

    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims[0]) *
                   (static_cast<std::size_t>(y) +
                    static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(z));
    }

    std::int32_t at(int x, int y, int z) const { return labels[index(x, y, z)]; }

    const RegionInfo* find_region(int label_id) const;
    const RegionInfo* find_region(const std::string& name) const;

    // Checks table uniqueness (ids and names) and that every nonzero label
    // in the grid has a table entry. Throws ValidationError.
    void validate() const;
};

// Region table CSV with header exactly
//   label_id,name,hemisphere,is_cortical,is_gray_matter
std::vector<RegionInfo> read_region_table(const std::string& path);
void write_region_table(const std::string& path, const std::vector<RegionInfo>& table);

// size-shaped crop centered at `center` (voxel coordinates); voxels outside
// the source are zero. Spacing is preserved. The output voxel u maps to
// source index center - size/2 + u.
Volume crop_centered(const Volume& v, const std::array<int, 3>& center, const Dims& size);
std::vector<std::int32_t> crop_centered_labels(const LabelMap& lm,
                                               const std::array<int, 3>& center,
                                               const Dims& size);

} // namespace voxmark

#endif
