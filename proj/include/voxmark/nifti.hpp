#ifndef VOXMARK_NIFTI_HPP
#define VOXMARK_NIFTI_HPP

#include <string>

#include "voxmark/volume.hpp"

namespace voxmark {

// Uncompressed little-endian NIfTI-1 single-file (.nii) I/O. Gzip, NIfTI-2,
// big-endian files and .hdr/.img pairs are rejected with explicit errors.
// The affine/orientation fields are read but ignored; geometry comes from
// dim[1..3] and pixdim[1..3] only.

namespace nifti {
inline constexpr std::int16_t kUint8 = 2;
inline constexpr std::int16_t kInt16 = 4;
inline constexpr std::int16_t kInt32 = 8;
inline constexpr std::int16_t kFloat32 = 16;
} // namespace nifti

struct NiftiWriteOptions {
    std::int16_t datatype = nifti::kFloat32;
    float scl_slope = 0.0f; // 0 = stored values are the real values
    float scl_inter = 0.0f;
};

// Accepts uint8, int16 and float32 files; applies scl_slope/scl_inter when
// the slope is nonzero.
Volume read_nifti(const std::string& path);

void write_nifti(const std::string& path, const Volume& v,
                 const NiftiWriteOptions& opts = {});

// Label file must be integer-typed (uint8, int16 or int32). Every nonzero
// label must appear in the region table CSV.
LabelMap read_labelmap(const std::string& path, const std::string& region_table_path);
LabelMap read_labelmap(const std::string& path, const std::vector<RegionInfo>& region_table);

void write_labelmap(const std::string& path, const LabelMap& lm);

} // namespace voxmark

#endif
