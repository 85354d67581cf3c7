#include "voxmark/thickness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace voxmark {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void ThicknessParams::validate() const {
    if (!(sphere_radius_mm > 0.0))
        throw ValidationError("sphere_radius_mm must be positive");
    if (!(angle_step_deg > 0.0 && angle_step_deg <= 90.0))
        throw ValidationError("angle_step_deg must be in (0, 90]");
    if (upsampling_scale < 1)
        throw ValidationError("upsampling_scale must be >= 1");
}

std::vector<std::array<double, 3>> direction_set(double angle_step_deg) {
    if (!(angle_step_deg > 0.0 && angle_step_deg <= 90.0))
        throw ValidationError("angle_step_deg must be in (0, 90]");

    std::vector<std::array<double, 3>> dirs;
    const int n_polar = static_cast<int>(std::floor(90.0 / angle_step_deg));
    for (int k = 0; k <= n_polar; ++k) {
        double phi_deg = k * angle_step_deg;
        double phi = phi_deg * kPi / 180.0;
        if (k == 0) {
            dirs.push_back({0.0, 0.0, 1.0});
            continue;
        }
        bool equator = std::abs(phi_deg - 90.0) < 1e-12;
        // azimuth span: full turn off the equator, half turn on it (the
        // opposite half would duplicate directions up to sign)
        double span = equator ? 180.0 : 360.0;
        int n_az = std::max(1, static_cast<int>(std::floor(span * std::sin(phi) /
                                                           angle_step_deg)));
        for (int j = 0; j < n_az; ++j) {
            double psi = (j * span / n_az) * kPi / 180.0;
            dirs.push_back({std::sin(phi) * std::cos(psi), std::sin(phi) * std::sin(psi),
                            std::cos(phi)});
        }
    }
    return dirs;
}

// Felzenszwalb-Huttenlocher lower envelope in 1D, with grid spacing s.
namespace {

void edt_pass_1d(const double* f, double* d, int n, double s, std::vector<int>& v,
                 std::vector<double>& z) {
    v.resize(static_cast<std::size_t>(n));
    z.resize(static_cast<std::size_t>(n) + 1);
    const double s2 = s * s;

    // lower envelope over the finite parabolas only; infinite entries
    // (lines with no seed yet) never contribute
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (f[q] == kInf) continue;
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -kInf;
            z[1] = kInf;
            continue;
        }
        double sq;
        while (true) {
            int p = v[static_cast<std::size_t>(k)];
            sq = ((f[q] + s2 * q * q) - (f[p] + s2 * p * p)) / (2.0 * s2 * (q - p));
            if (sq <= z[static_cast<std::size_t>(k)]) --k;
            else break;
        }
        ++k;
        v[static_cast<std::size_t>(k)] = q;
        z[static_cast<std::size_t>(k)] = sq;
        z[static_cast<std::size_t>(k) + 1] = kInf;
    }

    if (k < 0) {
        for (int q = 0; q < n; ++q) d[q] = kInf;
        return;
    }
    int ki = 0;
    for (int q = 0; q < n; ++q) {
        while (z[static_cast<std::size_t>(ki) + 1] < q) ++ki;
        int p = v[static_cast<std::size_t>(ki)];
        d[q] = s2 * (q - p) * (q - p) + f[p];
    }
}

} // namespace

std::vector<double> squared_distance_transform(const std::vector<std::uint8_t>& mask,
                                               const Dims& dims, const Spacing& spacing) {
    if (mask.size() != voxel_count(dims))
        throw ValidationError("distance transform: mask length does not match dims");
    const int nx = dims[0], ny = dims[1], nz = dims[2];
    std::vector<double> dist(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) dist[i] = mask[i] ? kInf : 0.0;

    const std::size_t sy = static_cast<std::size_t>(nx);
    const std::size_t sz = static_cast<std::size_t>(nx) * ny;

    // x pass
#pragma omp parallel
    {
        std::vector<double> f(static_cast<std::size_t>(std::max({nx, ny, nz})));
        std::vector<double> d(f.size());
        std::vector<int> v;
        std::vector<double> z;

#pragma omp for schedule(static)
        for (long line = 0; line < static_cast<long>(ny) * nz; ++line) {
            std::size_t base = static_cast<std::size_t>(line) * nx;
            edt_pass_1d(dist.data() + base, d.data(), nx, spacing[0], v, z);
            std::copy(d.begin(), d.begin() + nx, dist.begin() + static_cast<long>(base));
        }

#pragma omp for schedule(static)
        for (long line = 0; line < static_cast<long>(nx) * nz; ++line) {
            int x = static_cast<int>(line % nx);
            int zi = static_cast<int>(line / nx);
            std::size_t base = static_cast<std::size_t>(x) + sz * static_cast<std::size_t>(zi);
            for (int y = 0; y < ny; ++y) f[static_cast<std::size_t>(y)] = dist[base + sy * y];
            edt_pass_1d(f.data(), d.data(), ny, spacing[1], v, z);
            for (int y = 0; y < ny; ++y) dist[base + sy * y] = d[static_cast<std::size_t>(y)];
        }

#pragma omp for schedule(static)
        for (long line = 0; line < static_cast<long>(nx) * ny; ++line) {
            std::size_t base = static_cast<std::size_t>(line);
            for (int zi = 0; zi < nz; ++zi) f[static_cast<std::size_t>(zi)] = dist[base + sz * zi];
            edt_pass_1d(f.data(), d.data(), nz, spacing[2], v, z);
            for (int zi = 0; zi < nz; ++zi) dist[base + sz * zi] = d[static_cast<std::size_t>(zi)];
        }
    }
    return dist;
}

std::vector<std::uint8_t> skeletonize(const std::vector<std::uint8_t>& mask, const Dims& dims,
                                      const Spacing& spacing) {
    auto dist = squared_distance_transform(mask, dims, spacing);
    const int nx = dims[0], ny = dims[1], nz = dims[2];
    const std::size_t sy = static_cast<std::size_t>(nx);
    const std::size_t sz = static_cast<std::size_t>(nx) * ny;

    bool has_background = false;
    for (auto m : mask)
        if (!m) {
            has_background = true;
            break;
        }
    if (!has_background) return mask; // distance field is flat at infinity

    std::vector<std::uint8_t> skel(mask.size(), 0);

#pragma omp parallel for schedule(static)
    for (long z = 0; z < nz; ++z) {
        for (int y = 0; y < ny; ++y) {
            for (int x = 0; x < nx; ++x) {
                std::size_t idx = static_cast<std::size_t>(x) + sy * y +
                                  sz * static_cast<std::size_t>(z);
                if (!mask[idx]) continue;

                auto dval = [&](int xi, int yi, int zi) {
                    xi = std::clamp(xi, 0, nx - 1);
                    yi = std::clamp(yi, 0, ny - 1);
                    zi = std::clamp(zi, 0, nz - 1);
                    return dist[static_cast<std::size_t>(xi) + sy * yi + sz * zi];
                };

                double g[3] = {
                    (dval(x + 1, y, z) - dval(x - 1, y, z)) / (2.0 * spacing[0]),
                    (dval(x, y + 1, z) - dval(x, y - 1, z)) / (2.0 * spacing[1]),
                    (dval(x, y, z + 1) - dval(x, y, z - 1)) / (2.0 * spacing[2])};

                int axis = 0;
                for (int a = 1; a < 3; ++a)
                    if (std::abs(g[a]) > std::abs(g[axis])) axis = a;

                if (g[axis] == 0.0) {
                    // plateau of the distance field: ridge by definition
                    skel[idx] = 1;
                    continue;
                }
                double here = dist[idx];
                double forward, backward;
                if (axis == 0) {
                    forward = dval(x + 1, y, z);
                    backward = dval(x - 1, y, z);
                } else if (axis == 1) {
                    forward = dval(x, y + 1, z);
                    backward = dval(x, y - 1, z);
                } else {
                    forward = dval(x, y, z + 1);
                    backward = dval(x, y, z - 1);
                }
                if (here >= forward && here >= backward) skel[idx] = 1;
            }
        }
    }
    return skel;
}

ThicknessMap line_integral_thickness(const std::vector<std::uint8_t>& gm_mask,
                                     const std::vector<std::uint8_t>& skeleton, const Dims& dims,
                                     const Spacing& spacing, const ThicknessParams& params) {
    params.validate();
    if (gm_mask.size() != voxel_count(dims) || skeleton.size() != gm_mask.size())
        throw ValidationError("line_integral_thickness: grid sizes do not match dims");
    for (std::size_t i = 0; i < skeleton.size(); ++i)
        if (skeleton[i] && !gm_mask[i])
            throw ValidationError("skeleton must be a subset of the gray-matter mask");

    ThicknessMap tm;
    tm.dims = dims;
    tm.spacing = spacing;
    tm.values.assign(gm_mask.size(), 0.0f);
    tm.skeleton = skeleton;

    const int nx = dims[0], ny = dims[1], nz = dims[2];
    const std::size_t sy = static_cast<std::size_t>(nx);
    const std::size_t sz = static_cast<std::size_t>(nx) * ny;

    std::vector<std::size_t> skel_voxels;
    for (std::size_t i = 0; i < skeleton.size(); ++i)
        if (skeleton[i]) skel_voxels.push_back(i);
    if (skel_voxels.empty()) return tm;

    const auto dirs = direction_set(params.angle_step_deg);
    const double step = 1.0 / params.upsampling_scale;
    const int half_steps =
        static_cast<int>(std::llround(params.sphere_radius_mm * params.upsampling_scale));

    // mask values at voxel centers for trilinear sampling
    std::vector<float> soft(gm_mask.size());
    for (std::size_t i = 0; i < gm_mask.size(); ++i) soft[i] = gm_mask[i] ? 1.0f : 0.0f;

    auto sample = [&](double px, double py, double pz) -> double {
        // continuous coordinates in voxel units relative to voxel centers
        double qx = px / spacing[0] - 0.5;
        double qy = py / spacing[1] - 0.5;
        double qz = pz / spacing[2] - 0.5;
        int x0 = static_cast<int>(std::floor(qx));
        int y0 = static_cast<int>(std::floor(qy));
        int z0 = static_cast<int>(std::floor(qz));
        double fx = qx - x0, fy = qy - y0, fz = qz - z0;
        double acc = 0.0;
        for (int dz = 0; dz <= 1; ++dz) {
            int zc = z0 + dz;
            if (zc < 0 || zc >= nz) continue;
            double wz = dz ? fz : 1.0 - fz;
            for (int dy = 0; dy <= 1; ++dy) {
                int yc = y0 + dy;
                if (yc < 0 || yc >= ny) continue;
                double wy = dy ? fy : 1.0 - fy;
                for (int dx = 0; dx <= 1; ++dx) {
                    int xc = x0 + dx;
                    if (xc < 0 || xc >= nx) continue;
                    double wx = dx ? fx : 1.0 - fx;
                    acc += wx * wy * wz *
                           soft[static_cast<std::size_t>(xc) + sy * yc + sz * zc];
                }
            }
        }
        return acc;
    };

#pragma omp parallel for schedule(dynamic, 64)
    for (long vi = 0; vi < static_cast<long>(skel_voxels.size()); ++vi) {
        std::size_t idx = skel_voxels[static_cast<std::size_t>(vi)];
        int x = static_cast<int>(idx % sy);
        int y = static_cast<int>((idx / sy) % static_cast<std::size_t>(ny));
        int z = static_cast<int>(idx / sz);
        double px = (x + 0.5) * spacing[0];
        double py = (y + 0.5) * spacing[1];
        double pz = (z + 0.5) * spacing[2];

        double best = kInf;
        for (const auto& d : dirs) {
            double acc = 0.0;
            for (int m = -half_steps; m <= half_steps; ++m) {
                double t = m * step;
                acc += sample(px + t * d[0], py + t * d[1], pz + t * d[2]);
            }
            double integral = acc * step;
            best = std::min(best, integral);
        }
        tm.values[idx] = static_cast<float>(best);
    }
    return tm;
}

std::vector<RegionThickness> region_thickness_stats(const ThicknessMap& tm, const LabelMap& lm) {
    if (tm.dims != lm.dims)
        throw ValidationError("thickness map and label map dims differ");

    std::vector<RegionThickness> out;
    for (const auto& region : lm.region_table) {
        if (!region.is_cortical) continue;
        RegionThickness rt;
        rt.label_id = region.label_id;

        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < tm.skeleton.size(); ++i) {
            if (tm.skeleton[i] && lm.labels[i] == region.label_id) {
                sum += tm.values[i];
                ++n;
            }
        }
        if (n == 0) {
            rt.missing = true;
        } else {
            double mean = sum / static_cast<double>(n);
            double ss = 0.0;
            for (std::size_t i = 0; i < tm.skeleton.size(); ++i) {
                if (tm.skeleton[i] && lm.labels[i] == region.label_id) {
                    double d = tm.values[i] - mean;
                    ss += d * d;
                }
            }
            rt.mean_mm = mean;
            rt.std_mm = std::sqrt(ss / static_cast<double>(n));
        }
        out.push_back(rt);
    }
    return out;
}

std::vector<RegionThickness> cortical_thickness_features(const LabelMap& lm,
                                                         const ThicknessParams& params) {
    lm.validate();
    params.validate();

    ThicknessMap merged;
    merged.dims = lm.dims;
    merged.spacing = lm.spacing;
    merged.values.assign(lm.labels.size(), 0.0f);
    merged.skeleton.assign(lm.labels.size(), 0);

    for (Hemisphere hemi : {Hemisphere::Left, Hemisphere::Right}) {
        std::vector<std::uint8_t> gm(lm.labels.size(), 0);
        bool any = false;
        for (std::size_t i = 0; i < lm.labels.size(); ++i) {
            std::int32_t l = lm.labels[i];
            if (l == 0) continue;
            const RegionInfo* r = lm.find_region(l);
            if (r && r->is_gray_matter && r->hemisphere == hemi) {
                gm[i] = 1;
                any = true;
            }
        }
        if (!any) continue;
        auto skel = skeletonize(gm, lm.dims, lm.spacing);
        ThicknessMap tmap = line_integral_thickness(gm, skel, lm.dims, lm.spacing, params);
        for (std::size_t i = 0; i < skel.size(); ++i) {
            if (skel[i]) {
                merged.skeleton[i] = 1;
                merged.values[i] = tmap.values[i];
            }
        }
    }

    return region_thickness_stats(merged, lm);
}

std::vector<std::string> thickness_column_names(const std::vector<RegionInfo>& table) {
    std::vector<std::string> names;
    for (const auto& r : table) {
        if (!r.is_cortical) continue;
        names.push_back(r.name + "_thk_mean");
        names.push_back(r.name + "_thk_std");
    }
    return names;
}

} // namespace voxmark
