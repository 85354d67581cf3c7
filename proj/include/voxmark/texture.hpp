#ifndef VOXMARK_TEXTURE_HPP
#define VOXMARK_TEXTURE_HPP

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "voxmark/volume.hpp"

namespace voxmark {

// Hippocampal texture block: 90 maps (original + 89 derived) over a 96^3
// crop, each reduced to 300 ECDF quantiles -> 27,000 features. All filters
// are 2D and applied per axial (fixed-z) slice with replicate padding.

struct TextureParams {
    double l_min = 4.0 / 1.4142135623730951; // minimum Gabor wavelength, px/cycle
    double l_max = 128.0;
    std::array<double, 4> gabor_wavelengths{}; // 2^k * l_min, k = 0..3
    std::array<double, 4> orientations_deg{0.0, 45.0, 90.0, 135.0};
    std::array<double, 5> scales{0.5, 0.75, 1.0, 1.25, 1.5};
    double gabor_bandwidth_octaves = 1.0;
    int stat_window = 3;    // local range / stddev
    int entropy_window = 9; // local entropy
    int n_probabilities = 300;
    double min_probability = 1e-4; // lower clamp of the ECDF grid origin
    int crop_size = 96;

    TextureParams();
    void validate() const;
};

struct MapGrid {
    Dims dims{0, 0, 0};
    std::vector<double> values;

    static MapGrid zeros(const Dims& d) {
        MapGrid m;
        m.dims = d;
        m.values.assign(voxel_count(d), 0.0);
        return m;
    }
    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims[0]) *
                   (static_cast<std::size_t>(y) +
                    static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(z));
    }
    double at(int x, int y, int z) const { return values[index(x, y, z)]; }
};

struct TextureMapStack {
    Dims dims{0, 0, 0};
    std::vector<std::string> names; // registry order, size 90
    std::vector<MapGrid> maps;
};

struct TextureFeatures {
    std::vector<std::string> names;  // <map>_q<k>
    std::vector<double> values;      // map-major, 90 x 300
};

// --- kernels (1 px grid) ------------------------------------------------

int gaussian_radius(double sigma);                       // ceil(2*sigma)
std::vector<double> gaussian_smooth_kernel(double sigma, int radius); // sum 1
// Antisymmetric first-derivative kernel calibrated so a unit ramp responds
// with 1; index 0 of the returned vector is tap -radius.
std::vector<double> gaussian_d1_kernel(double sigma, int radius);
// DC-free second-derivative kernel calibrated so x^2 responds with 2.
std::vector<double> gaussian_d2_kernel(double sigma, int radius);

double gabor_sigma(double wavelength, double bandwidth_octaves);
int gabor_radius(double sigma); // ceil(3*sigma)
// 1D factor of the isotropic-envelope Gabor kernel along one axis;
// freq in cycles/px along that axis.
std::vector<std::complex<double>> gabor_kernel_1d(double sigma, double freq, int radius);

// --- map computation ----------------------------------------------------
// Every function optionally restricts work to a set of z slices; other
// slices stay zero. Slice results are independent, so a subset computation
// is bit-identical to the full one on the computed slices.

using SliceSel = std::vector<int>;

// range, stddev, entropy (window sizes from params)
std::array<MapGrid, 3> local_statistics(const Volume& crop, const TextureParams& params,
                                        const SliceSel* slices = nullptr);

MapGrid gabor_magnitude(const Volume& crop, int wavelength_idx, int orientation_idx,
                        const TextureParams& params, const SliceSel* slices = nullptr);
std::vector<MapGrid> gabor_bank(const Volume& crop, const TextureParams& params,
                                const SliceSel* slices = nullptr); // 16 maps

struct ScaleBases {
    MapGrid gx, gy, gxx, gxy, gyy;
};
ScaleBases scale_bases(const Volume& crop, double sigma, const SliceSel* slices = nullptr);

MapGrid steer_first_order(const ScaleBases& b, double theta_deg);
MapGrid steer_second_order(const ScaleBases& b, double theta_deg);
std::vector<MapGrid> steerable_derivatives(const Volume& crop, const TextureParams& params,
                                           const SliceSel* slices = nullptr); // 40 maps

// gradient magnitude, Hessian eigenvalues (desc), LoG, Gaussian curvature,
// Frobenius norm, per scale
std::vector<MapGrid> hessian_maps_for_scale(const ScaleBases& b); // 6 maps
std::vector<MapGrid> hessian_features(const Volume& crop, const TextureParams& params,
                                      const SliceSel* slices = nullptr); // 30 maps

TextureMapStack build_texture_stack(const Volume& crop, const TextureParams& params);

// --- ECDF quantile features ----------------------------------------------

// 300 probabilities log-spaced from max(1/N, min_probability) to 1.
std::vector<double> ecdf_probability_grid(std::size_t n_masked, const TextureParams& params);
// Nearest-rank quantiles of the masked map values at the grid probabilities.
std::vector<double> ecdf_quantiles(const std::vector<double>& map_values,
                                   const std::vector<std::uint8_t>& mask,
                                   const TextureParams& params);

// --- end-to-end -----------------------------------------------------------

std::vector<std::string> texture_map_names(const TextureParams& params);     // 90
std::vector<std::string> texture_column_names(const TextureParams& params);  // 27,000

// Crop 96^3 around the joint hippocampus centroid, build the masked
// quantiles of all 90 maps. hippocampus_names are region-table names
// (left and/or right must be present in the map).
TextureFeatures hippocampal_texture_features(const Volume& v, const LabelMap& lm,
                                             const std::vector<std::string>& hippocampus_names,
                                             const TextureParams& params);

} // namespace voxmark

#endif
