#ifndef VOXMARK_RADIOMICS_HPP
#define VOXMARK_RADIOMICS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "voxmark/volume.hpp"

namespace voxmark {

// Per-region shape descriptors: 11 scalars per region (volume, surface area,
// centroid, Euler orientation, principal axis lengths), computed on the
// largest 6-connected component of each region's mask.

struct ComponentLabeling {
    Dims dims{0, 0, 0};
    std::vector<std::uint32_t> component_ids; // 0 = background, 1..count
    std::uint32_t component_count = 0;
    std::vector<std::size_t> component_sizes; // [id-1] = voxel count
};

// Two-pass union-find labeling under 6-connectivity. Ids are assigned in
// scan order of each component's first voxel (x fastest, then y, then z).
ComponentLabeling connected_components(const std::vector<std::uint8_t>& mask, const Dims& dims);

struct RegionRadiomics {
    int label_id = 0;
    bool missing = false;
    std::size_t volume_voxels = 0;
    double volume_mm3 = 0.0;
    double surface_area_mm2 = 0.0;
    std::array<double, 3> centroid_mm{0, 0, 0};
    std::array<double, 3> orientation_euler_deg{0, 0, 0}; // intrinsic Z-Y-X
    std::array<double, 3> principal_axis_lengths_mm{0, 0, 0}; // descending

    std::array<double, 11> flatten() const {
        return {volume_mm3,
                surface_area_mm2,
                centroid_mm[0], centroid_mm[1], centroid_mm[2],
                orientation_euler_deg[0], orientation_euler_deg[1], orientation_euler_deg[2],
                principal_axis_lengths_mm[0], principal_axis_lengths_mm[1],
                principal_axis_lengths_mm[2]};
    }
};

// Volume, exposed-face surface area, centroid of voxel centers, and the
// ellipsoid-equivalent orientation/axis lengths from the covariance of
// voxel centers (axis length = 2*sqrt(5*eigenvalue)).
RegionRadiomics component_properties(const ComponentLabeling& labeling,
                                     std::uint32_t component_id, const Spacing& spacing);

// One RegionRadiomics per region-table entry, keyed by label id. Regions
// absent from the grid come back zeroed with missing=true. Each present
// region is reduced to its largest component (ties: smallest component id).
std::map<int, RegionRadiomics> region_radiomics(const LabelMap& lm);

// Sum of voxel volumes over all nonzero labels. Throws DegenerateInputError
// on an all-background map.
double intracranial_volume(const LabelMap& lm);

// Flattened feature order per region: vol, surf, cx, cy, cz, eul_z, eul_y,
// eul_x, ax1, ax2, ax3.
extern const std::array<const char*, 11> kRadiomicsSuffixes;
std::vector<std::string> radiomics_column_names(const std::vector<RegionInfo>& table);

namespace detail {
// Symmetric 3x3 eigendecomposition by cyclic Jacobi sweeps; eigenvalues
// descending, eigenvectors as matrix columns. Exposed for tests.
void symmetric_eigen3(const double cov[3][3], double eigenvalues[3], double eigenvectors[3][3]);
std::array<double, 3> euler_zyx_deg(const double rot[3][3]);
} // namespace detail

} // namespace voxmark

#endif
