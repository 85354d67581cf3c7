#ifndef VOXMARK_THICKNESS_HPP
#define VOXMARK_THICKNESS_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "voxmark/volume.hpp"

namespace voxmark {

// Cortical thickness by minimal line integrals over the gray-matter mask:
// for every skeleton voxel the GM indicator is integrated along segments of
// half-length sphere_radius in a fixed direction set, and the minimum
// integral is the thickness at that voxel.

struct ThicknessParams {
    double sphere_radius_mm = 8.0;
    double angle_step_deg = 9.0;
    int upsampling_scale = 5; // samples per mm along a segment

    void validate() const;
};

// Unit directions on the upper hemisphere: polar angle 0..90 deg in
// angle_step increments; azimuth count per ring scales with sin(polar) to
// keep the sampling roughly uniform; the equator ring spans [0,180) only,
// so no two directions are antipodal. Deterministic order.
std::vector<std::array<double, 3>> direction_set(double angle_step_deg);

struct ThicknessMap {
    Dims dims{0, 0, 0};
    Spacing spacing{1, 1, 1};
    std::vector<float> values;          // mm, 0 where undefined
    std::vector<std::uint8_t> skeleton; // where values are defined
};

// Medial-surface approximation: foreground voxels whose Euclidean distance
// transform is a local maximum along the dominant gradient axis of the
// distance field. If the mask has no background at all, every foreground
// voxel is returned.
std::vector<std::uint8_t> skeletonize(const std::vector<std::uint8_t>& mask, const Dims& dims,
                                      const Spacing& spacing);

// Exact squared Euclidean distance transform to the nearest background
// voxel (mm^2); exposed for tests.
std::vector<double> squared_distance_transform(const std::vector<std::uint8_t>& mask,
                                               const Dims& dims, const Spacing& spacing);

ThicknessMap line_integral_thickness(const std::vector<std::uint8_t>& gm_mask,
                                     const std::vector<std::uint8_t>& skeleton, const Dims& dims,
                                     const Spacing& spacing, const ThicknessParams& params);

struct RegionThickness {
    int label_id = 0;
    bool missing = false; // no skeleton voxels in the region
    double mean_mm = 0.0;
    double std_mm = 0.0;
};

// Mean and population stddev of thickness per cortical region (table
// order); 2 values per cortical region when flattened.
std::vector<RegionThickness> region_thickness_stats(const ThicknessMap& tm, const LabelMap& lm);

// Full pipeline: per-hemisphere GM masks -> skeletons -> thickness maps ->
// per-region stats.
std::vector<RegionThickness> cortical_thickness_features(const LabelMap& lm,
                                                         const ThicknessParams& params);

std::vector<std::string> thickness_column_names(const std::vector<RegionInfo>& table);

} // namespace voxmark

#endif
