#ifndef VOXMARK_REF_REFERENCE_HPP
#define VOXMARK_REF_REFERENCE_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include "voxmark/volume.hpp"

// Serial reference implementations used by the tests and the benchmark.
// They deliberately take the naive route (direct 2D convolution, flood
// fill, quadratic pair counting) so the optimized kernels in the main
// library are checked against an independent path.

namespace voxmark::ref {

// direct 2D correlation with replicate padding; kernel is (2r+1)^2,
// row-major, kernel(ky,kx) applied at offset (dx,dy)=(kx-r,ky-r)
std::vector<double> direct_correlate_2d(const std::vector<double>& slice, int w, int h,
                                        const std::vector<double>& kernel, int radius);

// complex kernel on a real slice; returns magnitudes
std::vector<double> direct_correlate_2d_magnitude(const std::vector<double>& slice, int w, int h,
                                                  const std::vector<std::complex<double>>& kernel,
                                                  int radius);

// windowed statistics recomputed per pixel
std::vector<double> naive_local_range(const std::vector<double>& slice, int w, int h, int window);
std::vector<double> naive_local_std(const std::vector<double>& slice, int w, int h, int window);
std::vector<double> naive_local_entropy(const std::vector<double>& slice, int w, int h,
                                        int window);

// BFS flood fill under 6-connectivity; component ids in first-seed scan order
struct FloodFillResult {
    std::vector<std::uint32_t> component_ids;
    std::uint32_t component_count = 0;
    std::vector<std::size_t> component_sizes;
};
FloodFillResult flood_fill_components(const std::vector<std::uint8_t>& mask, const Dims& dims);

// O(n^2) Mann-Whitney AUC by pair counting, ties count 1/2
double auc_pairwise(const std::vector<double>& scores, const std::vector<int>& labels);

// quantile by nth_element on a fresh copy (nearest rank, 1-based)
double quantile_nth_element(const std::vector<double>& values, double p);

} // namespace voxmark::ref

#endif
