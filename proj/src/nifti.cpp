#include "voxmark/nifti.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

namespace voxmark {

namespace {

// Field order reproduces the on-disk layout; every member is naturally
// aligned, so sizeof == 348 without packing pragmas.
struct NiftiHeader {
    std::int32_t sizeof_hdr;
    char data_type[10];
    char db_name[18];
    std::int32_t extents;
    std::int16_t session_error;
    char regular;
    char dim_info;
    std::int16_t dim[8];
    float intent_p1, intent_p2, intent_p3;
    std::int16_t intent_code;
    std::int16_t datatype;
    std::int16_t bitpix;
    std::int16_t slice_start;
    float pixdim[8];
    float vox_offset;
    float scl_slope;
    float scl_inter;
    std::int16_t slice_end;
    char slice_code;
    char xyzt_units;
    float cal_max, cal_min;
    float slice_duration;
    float toffset;
    std::int32_t glmax, glmin;
    char descrip[80];
    char aux_file[24];
    std::int16_t qform_code, sform_code;
    float quatern_b, quatern_c, quatern_d;
    float qoffset_x, qoffset_y, qoffset_z;
    float srow_x[4], srow_y[4], srow_z[4];
    char intent_name[16];
    char magic[4];
};
static_assert(sizeof(NiftiHeader) == 348, "NIfTI-1 header must be 348 bytes");

int bitpix_for(std::int16_t datatype) {
    switch (datatype) {
        case nifti::kUint8: return 8;
        case nifti::kInt16: return 16;
        case nifti::kInt32: return 32;
        case nifti::kFloat32: return 32;
        default: return 0;
    }
}

struct RawNifti {
    Dims dims;
    Spacing spacing;
    std::int16_t datatype;
    std::vector<double> values; // slope/inter already applied
};

RawNifti read_raw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");

    unsigned char sniff[2] = {0, 0};
    in.read(reinterpret_cast<char*>(sniff), 2);
    if (in.gcount() == 2 && sniff[0] == 0x1f && sniff[1] == 0x8b)
        throw FormatError(path + ": gzip-compressed NIfTI is not supported; "
                          "decompress to a plain .nii first");
    in.seekg(0);

    NiftiHeader hdr{};
    in.read(reinterpret_cast<char*>(&hdr), sizeof hdr);
    if (in.gcount() != sizeof hdr)
        throw FormatError(path + ": file shorter than the 348-byte header");

    if (hdr.sizeof_hdr != 348) {
        if (hdr.sizeof_hdr == 540)
            throw FormatError(path + ": NIfTI-2 is not supported (byte offset 0)");
        if (hdr.sizeof_hdr == 0x5C010000)
            throw FormatError(path + ": big-endian NIfTI is not supported (byte offset 0)");
        throw FormatError(path + ": bad sizeof_hdr " + std::to_string(hdr.sizeof_hdr) +
                          " (byte offset 0)");
    }
    if (std::memcmp(hdr.magic, "n+1", 4) != 0) {
        if (std::memcmp(hdr.magic, "ni1", 4) == 0)
            throw FormatError(path + ": two-file .hdr/.img NIfTI is not supported "
                              "(byte offset 344)");
        throw FormatError(path + ": bad magic (byte offset 344)");
    }
    if (hdr.dim[0] < 3 || hdr.dim[0] > 7)
        throw FormatError(path + ": dim[0] must be in [3,7], got " +
                          std::to_string(hdr.dim[0]) + " (byte offset 40)");
    for (int i = 1; i <= 3; ++i) {
        if (hdr.dim[i] <= 0)
            throw FormatError(path + ": dim[" + std::to_string(i) + "] is " +
                              std::to_string(hdr.dim[i]) + " (byte offset " +
                              std::to_string(40 + 2 * i) + ")");
    }
    for (int i = 4; i <= hdr.dim[0]; ++i) {
        if (hdr.dim[i] > 1)
            throw FormatError(path + ": only 3D volumes are supported, dim[" +
                              std::to_string(i) + "]=" + std::to_string(hdr.dim[i]));
    }
    if (bitpix_for(hdr.datatype) == 0)
        throw FormatError(path + ": unsupported datatype code " +
                          std::to_string(hdr.datatype) +
                          " (supported: uint8=2, int16=4, int32=8, float32=16)");
    if (hdr.bitpix != bitpix_for(hdr.datatype))
        throw FormatError(path + ": bitpix " + std::to_string(hdr.bitpix) +
                          " inconsistent with datatype (byte offset 72)");
    for (int i = 1; i <= 3; ++i) {
        if (!(hdr.pixdim[i] > 0.0f) || !std::isfinite(hdr.pixdim[i]))
            throw FormatError(path + ": pixdim[" + std::to_string(i) +
                              "] must be positive (byte offset " +
                              std::to_string(76 + 4 * i) + ")");
    }

    RawNifti raw;
    raw.dims = {hdr.dim[1], hdr.dim[2], hdr.dim[3]};
    raw.spacing = {hdr.pixdim[1], hdr.pixdim[2], hdr.pixdim[3]};
    raw.datatype = hdr.datatype;

    std::size_t n = voxel_count(raw.dims);
    std::size_t bytes = n * static_cast<std::size_t>(hdr.bitpix / 8);
    long long offset = static_cast<long long>(hdr.vox_offset);
    if (offset < 348)
        throw FormatError(path + ": vox_offset " + std::to_string(offset) +
                          " overlaps the header (byte offset 108)");

    in.seekg(offset);
    std::vector<char> buf(bytes);
    in.read(buf.data(), static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(in.gcount()) != bytes)
        throw FormatError(path + ": truncated voxel data (expected " +
                          std::to_string(bytes) + " bytes at offset " +
                          std::to_string(offset) + ")");

    raw.values.resize(n);
    switch (hdr.datatype) {
        case nifti::kUint8: {
            const auto* p = reinterpret_cast<const std::uint8_t*>(buf.data());
            for (std::size_t i = 0; i < n; ++i) raw.values[i] = p[i];
            break;
        }
        case nifti::kInt16: {
            std::int16_t v;
            for (std::size_t i = 0; i < n; ++i) {
                std::memcpy(&v, buf.data() + 2 * i, 2);
                raw.values[i] = v;
            }
            break;
        }
        case nifti::kInt32: {
            std::int32_t v;
            for (std::size_t i = 0; i < n; ++i) {
                std::memcpy(&v, buf.data() + 4 * i, 4);
                raw.values[i] = v;
            }
            break;
        }
        case nifti::kFloat32: {
            float v;
            for (std::size_t i = 0; i < n; ++i) {
                std::memcpy(&v, buf.data() + 4 * i, 4);
                raw.values[i] = v;
            }
            break;
        }
    }

    if (hdr.scl_slope != 0.0f) {
        for (double& v : raw.values)
            v = v * static_cast<double>(hdr.scl_slope) + static_cast<double>(hdr.scl_inter);
    }
    return raw;
}

} // namespace

Volume read_nifti(const std::string& path) {
    RawNifti raw = read_raw(path);
    if (raw.datatype == nifti::kInt32)
        throw FormatError(path + ": int32 is not a supported volume datatype "
                          "(supported: uint8, int16, float32)");
    Volume v;
    v.dims = raw.dims;
    v.spacing = raw.spacing;
    v.data.resize(raw.values.size());
    for (std::size_t i = 0; i < raw.values.size(); ++i)
        v.data[i] = static_cast<float>(raw.values[i]);
    v.validate();
    return v;
}

void write_nifti(const std::string& path, const Volume& v, const NiftiWriteOptions& opts) {
    v.validate();
    if (bitpix_for(opts.datatype) == 0)
        throw FormatError("unsupported write datatype code " + std::to_string(opts.datatype));

    NiftiHeader hdr{};
    hdr.sizeof_hdr = 348;
    hdr.regular = 'r';
    hdr.dim[0] = 3;
    hdr.dim[1] = static_cast<std::int16_t>(v.dims[0]);
    hdr.dim[2] = static_cast<std::int16_t>(v.dims[1]);
    hdr.dim[3] = static_cast<std::int16_t>(v.dims[2]);
    for (int i = 4; i < 8; ++i) hdr.dim[i] = 1;
    hdr.datatype = opts.datatype;
    hdr.bitpix = static_cast<std::int16_t>(bitpix_for(opts.datatype));
    hdr.pixdim[0] = 1.0f;
    hdr.pixdim[1] = static_cast<float>(v.spacing[0]);
    hdr.pixdim[2] = static_cast<float>(v.spacing[1]);
    hdr.pixdim[3] = static_cast<float>(v.spacing[2]);
    hdr.vox_offset = 352.0f;
    hdr.scl_slope = opts.scl_slope;
    hdr.scl_inter = opts.scl_inter;
    hdr.xyzt_units = 2; // mm
    std::strncpy(hdr.descrip, "voxmark", sizeof hdr.descrip - 1);
    std::memcpy(hdr.magic, "n+1", 4);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(&hdr), sizeof hdr);
    const char extender[4] = {0, 0, 0, 0};
    out.write(extender, 4);

    // Values are stored raw; callers use scl options only to craft test
    // fixtures, so no inverse scaling is applied here.
    std::size_t n = v.size();
    switch (opts.datatype) {
        case nifti::kFloat32:
            out.write(reinterpret_cast<const char*>(v.data.data()),
                      static_cast<std::streamsize>(4 * n));
            break;
        case nifti::kUint8: {
            std::vector<std::uint8_t> buf(n);
            for (std::size_t i = 0; i < n; ++i) {
                float x = std::round(v.data[i]);
                buf[i] = static_cast<std::uint8_t>(std::clamp(x, 0.0f, 255.0f));
            }
            out.write(reinterpret_cast<const char*>(buf.data()),
                      static_cast<std::streamsize>(n));
            break;
        }
        case nifti::kInt16: {
            std::vector<std::int16_t> buf(n);
            for (std::size_t i = 0; i < n; ++i) {
                float x = std::round(v.data[i]);
                buf[i] = static_cast<std::int16_t>(std::clamp(x, -32768.0f, 32767.0f));
            }
            out.write(reinterpret_cast<const char*>(buf.data()),
                      static_cast<std::streamsize>(2 * n));
            break;
        }
        case nifti::kInt32: {
            std::vector<std::int32_t> buf(n);
            for (std::size_t i = 0; i < n; ++i)
                buf[i] = static_cast<std::int32_t>(std::llround(v.data[i]));
            out.write(reinterpret_cast<const char*>(buf.data()),
                      static_cast<std::streamsize>(4 * n));
            break;
        }
    }
    if (!out) throw IoError("short write to '" + path + "'");
}

LabelMap read_labelmap(const std::string& path, const std::vector<RegionInfo>& region_table) {
    RawNifti raw = read_raw(path);
    if (raw.datatype == nifti::kFloat32)
        throw FormatError(path + ": label maps must be integer-typed "
                          "(uint8, int16 or int32), got float32");

    LabelMap lm;
    lm.dims = raw.dims;
    lm.spacing = raw.spacing;
    lm.labels.resize(raw.values.size());
    for (std::size_t i = 0; i < raw.values.size(); ++i) {
        double v = raw.values[i];
        if (v != std::floor(v))
            throw FormatError(path + ": non-integer label value after scaling");
        if (v < 0)
            throw ValidationError(path + ": negative label " + std::to_string((long long)v));
        lm.labels[i] = static_cast<std::int32_t>(v);
    }
    lm.region_table = region_table;
    lm.validate();
    return lm;
}

LabelMap read_labelmap(const std::string& path, const std::string& region_table_path) {
    return read_labelmap(path, read_region_table(region_table_path));
}

void write_labelmap(const std::string& path, const LabelMap& lm) {
    Volume tmp;
    tmp.dims = lm.dims;
    tmp.spacing = lm.spacing;
    tmp.data.resize(lm.labels.size());
    for (std::size_t i = 0; i < lm.labels.size(); ++i)
        tmp.data[i] = static_cast<float>(lm.labels[i]);
    NiftiWriteOptions opts;
    opts.datatype = nifti::kInt32;
    write_nifti(path, tmp, opts);
}

} // namespace voxmark
