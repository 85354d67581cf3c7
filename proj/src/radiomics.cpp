#include "voxmark/radiomics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace voxmark {

const std::array<const char*, 11> kRadiomicsSuffixes = {
    "vol", "surf", "cx", "cy", "cz", "eul_z", "eul_y", "eul_x", "ax1", "ax2", "ax3"};

namespace {

struct DisjointSet {
    std::vector<std::uint32_t> parent;

    explicit DisjointSet(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0u);
    }

    std::uint32_t root(std::uint32_t i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]]; // path halving
            i = parent[i];
        }
        return i;
    }

    void unify(std::uint32_t a, std::uint32_t b) {
        a = root(a);
        b = root(b);
        if (a == b) return;
        // keep the smaller provisional label as root so scan order survives
        if (a < b) parent[b] = a;
        else parent[a] = b;
    }
};

} // namespace

ComponentLabeling connected_components(const std::vector<std::uint8_t>& mask, const Dims& dims) {
    for (int d : dims)
        if (d <= 0) throw ValidationError("connected_components: dims must be positive");
    if (mask.size() != voxel_count(dims))
        throw ValidationError("connected_components: mask length does not match dims");

    const int nx = dims[0], ny = dims[1], nz = dims[2];
    ComponentLabeling out;
    out.dims = dims;
    out.component_ids.assign(mask.size(), 0);

    // pass 1: provisional labels, merging with -x/-y/-z neighbors
    std::uint32_t next = 1;
    DisjointSet ds(1);
    std::size_t idx = 0;
    const std::size_t stride_y = static_cast<std::size_t>(nx);
    const std::size_t stride_z = static_cast<std::size_t>(nx) * ny;
    for (int z = 0; z < nz; ++z) {
        for (int y = 0; y < ny; ++y) {
            for (int x = 0; x < nx; ++x, ++idx) {
                if (!mask[idx]) continue;
                std::uint32_t label = 0;
                if (x > 0 && mask[idx - 1]) label = out.component_ids[idx - 1];
                if (y > 0 && mask[idx - stride_y]) {
                    std::uint32_t l = out.component_ids[idx - stride_y];
                    if (label == 0) label = l;
                    else if (l != label) ds.unify(label, l);
                }
                if (z > 0 && mask[idx - stride_z]) {
                    std::uint32_t l = out.component_ids[idx - stride_z];
                    if (label == 0) label = l;
                    else if (l != label) ds.unify(label, l);
                }
                if (label == 0) {
                    label = next++;
                    ds.parent.push_back(label);
                }
                out.component_ids[idx] = label;
            }
        }
    }

    // pass 2: compact roots to consecutive ids in first-voxel scan order
    std::vector<std::uint32_t> remap(next, 0);
    std::uint32_t count = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
        std::uint32_t l = out.component_ids[i];
        if (l == 0) continue;
        std::uint32_t r = ds.root(l);
        if (remap[r] == 0) remap[r] = ++count;
        out.component_ids[i] = remap[r];
    }
    out.component_count = count;
    out.component_sizes.assign(count, 0);
    for (std::uint32_t l : out.component_ids)
        if (l != 0) ++out.component_sizes[l - 1];
    return out;
}

namespace detail {

void symmetric_eigen3(const double cov[3][3], double eigenvalues[3], double eigenvectors[3][3]) {
    double a[3][3];
    double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a[i][j] = cov[i][j];

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
        if (off < 1e-30) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < 3; ++k) {
                    double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < 3; ++k) {
                    double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    int order[3] = {0, 1, 2};
    double lam[3] = {a[0][0], a[1][1], a[2][2]};
    std::sort(order, order + 3, [&](int i, int j) {
        if (lam[i] != lam[j]) return lam[i] > lam[j];
        return i < j;
    });
    for (int c = 0; c < 3; ++c) {
        eigenvalues[c] = lam[order[c]];
        for (int r = 0; r < 3; ++r) eigenvectors[r][c] = v[r][order[c]];
    }

    // sign convention: largest-magnitude entry of each eigenvector positive
    for (int c = 0; c < 3; ++c) {
        int best = 0;
        for (int r = 1; r < 3; ++r)
            if (std::abs(eigenvectors[r][c]) > std::abs(eigenvectors[best][c])) best = r;
        if (eigenvectors[best][c] < 0.0)
            for (int r = 0; r < 3; ++r) eigenvectors[r][c] = -eigenvectors[r][c];
    }
}

std::array<double, 3> euler_zyx_deg(const double rot[3][3]) {
    // intrinsic Z-Y-X factorization R = Rz(a) * Ry(b) * Rx(c)
    const double rad2deg = 180.0 / 3.14159265358979323846;
    double sy = -rot[2][0];
    sy = std::clamp(sy, -1.0, 1.0);
    double b = std::asin(sy);
    double a, c;
    if (std::abs(sy) > 1.0 - 1e-12) {
        // gimbal lock: fold the x rotation into z
        c = 0.0;
        a = std::atan2(-rot[0][1], rot[1][1]);
    } else {
        a = std::atan2(rot[1][0], rot[0][0]);
        c = std::atan2(rot[2][1], rot[2][2]);
    }
    return {a * rad2deg, b * rad2deg, c * rad2deg};
}

} // namespace detail

RegionRadiomics component_properties(const ComponentLabeling& labeling,
                                     std::uint32_t component_id, const Spacing& spacing) {
    if (component_id == 0 || component_id > labeling.component_count)
        throw ValidationError("component_properties: invalid component id " +
                              std::to_string(component_id));

    const int nx = labeling.dims[0], ny = labeling.dims[1], nz = labeling.dims[2];
    const std::size_t stride_y = static_cast<std::size_t>(nx);
    const std::size_t stride_z = static_cast<std::size_t>(nx) * ny;
    const double face_x = spacing[1] * spacing[2];
    const double face_y = spacing[0] * spacing[2];
    const double face_z = spacing[0] * spacing[1];

    std::size_t count = 0;
    double surface = 0.0;
    double sum[3] = {0, 0, 0};

    const auto& ids = labeling.component_ids;
    std::size_t idx = 0;
    for (int z = 0; z < nz; ++z) {
        for (int y = 0; y < ny; ++y) {
            for (int x = 0; x < nx; ++x, ++idx) {
                if (ids[idx] != component_id) continue;
                ++count;
                sum[0] += (x + 0.5) * spacing[0];
                sum[1] += (y + 0.5) * spacing[1];
                sum[2] += (z + 0.5) * spacing[2];
                if (x == 0 || ids[idx - 1] != component_id) surface += face_x;
                if (x == nx - 1 || ids[idx + 1] != component_id) surface += face_x;
                if (y == 0 || ids[idx - stride_y] != component_id) surface += face_y;
                if (y == ny - 1 || ids[idx + stride_y] != component_id) surface += face_y;
                if (z == 0 || ids[idx - stride_z] != component_id) surface += face_z;
                if (z == nz - 1 || ids[idx + stride_z] != component_id) surface += face_z;
            }
        }
    }

    RegionRadiomics r;
    r.volume_voxels = count;
    r.volume_mm3 = static_cast<double>(count) * voxel_volume_mm3(spacing);
    r.surface_area_mm2 = surface;
    if (count == 0) return r; // unreachable for valid ids, defensive zero

    double mean[3] = {sum[0] / count, sum[1] / count, sum[2] / count};
    r.centroid_mm = {mean[0], mean[1], mean[2]};

    // two-pass population covariance of voxel centers
    double cov[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    idx = 0;
    for (int z = 0; z < nz; ++z) {
        for (int y = 0; y < ny; ++y) {
            for (int x = 0; x < nx; ++x, ++idx) {
                if (ids[idx] != component_id) continue;
                double d0 = (x + 0.5) * spacing[0] - mean[0];
                double d1 = (y + 0.5) * spacing[1] - mean[1];
                double d2 = (z + 0.5) * spacing[2] - mean[2];
                cov[0][0] += d0 * d0;
                cov[0][1] += d0 * d1;
                cov[0][2] += d0 * d2;
                cov[1][1] += d1 * d1;
                cov[1][2] += d1 * d2;
                cov[2][2] += d2 * d2;
            }
        }
    }
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            cov[i][j] /= static_cast<double>(count);
            cov[j][i] = cov[i][j];
        }

    double lam[3];
    double vec[3][3];
    detail::symmetric_eigen3(cov, lam, vec);

    for (int i = 0; i < 3; ++i)
        r.principal_axis_lengths_mm[i] = 2.0 * std::sqrt(5.0 * std::max(lam[i], 0.0));

    double spread = std::abs(lam[0] - lam[2]);
    if (spread < 1e-12) {
        // isotropic or single voxel: orientation is undefined, pin to zero
        r.orientation_euler_deg = {0.0, 0.0, 0.0};
    } else {
        r.orientation_euler_deg = detail::euler_zyx_deg(vec);
    }
    return r;
}

std::map<int, RegionRadiomics> region_radiomics(const LabelMap& lm) {
    if (lm.region_table.empty())
        throw ValidationError("region_radiomics: region table is empty");

    const std::size_t n_regions = lm.region_table.size();
    std::vector<RegionRadiomics> results(n_regions);

#pragma omp parallel for schedule(dynamic)
    for (long ri = 0; ri < static_cast<long>(n_regions); ++ri) {
        const RegionInfo& region = lm.region_table[static_cast<std::size_t>(ri)];
        std::vector<std::uint8_t> mask(lm.labels.size());
        bool any = false;
        for (std::size_t i = 0; i < lm.labels.size(); ++i) {
            bool in = lm.labels[i] == region.label_id;
            mask[i] = in ? 1 : 0;
            any |= in;
        }
        RegionRadiomics r;
        r.label_id = region.label_id;
        if (!any) {
            r.missing = true;
        } else {
            ComponentLabeling cc = connected_components(mask, lm.dims);
            std::uint32_t best = 1;
            for (std::uint32_t c = 2; c <= cc.component_count; ++c)
                if (cc.component_sizes[c - 1] > cc.component_sizes[best - 1]) best = c;
            r = component_properties(cc, best, lm.spacing);
            r.label_id = region.label_id;
        }
        results[static_cast<std::size_t>(ri)] = std::move(r);
    }

    std::map<int, RegionRadiomics> out;
    for (std::size_t i = 0; i < n_regions; ++i)
        out[lm.region_table[i].label_id] = results[i];
    return out;
}

double intracranial_volume(const LabelMap& lm) {
    std::size_t fg = 0;
    for (std::int32_t v : lm.labels)
        if (v != 0) ++fg;
    if (fg == 0)
        throw DegenerateInputError("intracranial_volume: label map is all background");
    return static_cast<double>(fg) * voxel_volume_mm3(lm.spacing);
}

std::vector<std::string> radiomics_column_names(const std::vector<RegionInfo>& table) {
    std::vector<std::string> names;
    names.reserve(table.size() * kRadiomicsSuffixes.size());
    for (const auto& r : table)
        for (const char* s : kRadiomicsSuffixes) names.push_back(r.name + "_" + s);
    return names;
}

} // namespace voxmark
