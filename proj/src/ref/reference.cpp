#include "reference.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

namespace voxmark::ref {

namespace {
inline int clampi(int i, int n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); }
}

std::vector<double> direct_correlate_2d(const std::vector<double>& slice, int w, int h,
                                        const std::vector<double>& kernel, int radius) {
    const int k = 2 * radius + 1;
    std::vector<double> out(static_cast<std::size_t>(w) * h, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int ky = 0; ky < k; ++ky) {
                int sy = clampi(y + ky - radius, h);
                for (int kx = 0; kx < k; ++kx) {
                    int sx = clampi(x + kx - radius, w);
                    acc += kernel[static_cast<std::size_t>(ky) * k + kx] *
                           slice[static_cast<std::size_t>(sy) * w + sx];
                }
            }
            out[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    return out;
}

std::vector<double> direct_correlate_2d_magnitude(const std::vector<double>& slice, int w, int h,
                                                  const std::vector<std::complex<double>>& kernel,
                                                  int radius) {
    const int k = 2 * radius + 1;
    std::vector<double> out(static_cast<std::size_t>(w) * h, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double re = 0.0, im = 0.0;
            for (int ky = 0; ky < k; ++ky) {
                int sy = clampi(y + ky - radius, h);
                for (int kx = 0; kx < k; ++kx) {
                    int sx = clampi(x + kx - radius, w);
                    double v = slice[static_cast<std::size_t>(sy) * w + sx];
                    const auto& c = kernel[static_cast<std::size_t>(ky) * k + kx];
                    re += c.real() * v;
                    im += c.imag() * v;
                }
            }
            out[static_cast<std::size_t>(y) * w + x] = std::sqrt(re * re + im * im);
        }
    }
    return out;
}

std::vector<double> naive_local_range(const std::vector<double>& slice, int w, int h,
                                      int window) {
    const int r = window / 2;
    std::vector<double> out(slice.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double vmin = slice[static_cast<std::size_t>(clampi(y - r, h)) * w + clampi(x - r, w)];
            double vmax = vmin;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    double v =
                        slice[static_cast<std::size_t>(clampi(y + dy, h)) * w + clampi(x + dx, w)];
                    vmin = std::min(vmin, v);
                    vmax = std::max(vmax, v);
                }
            out[static_cast<std::size_t>(y) * w + x] = vmax - vmin;
        }
    return out;
}

std::vector<double> naive_local_std(const std::vector<double>& slice, int w, int h, int window) {
    const int r = window / 2;
    const int n = window * window;
    std::vector<double> out(slice.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double sum = 0.0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx)
                    sum += slice[static_cast<std::size_t>(clampi(y + dy, h)) * w +
                                 clampi(x + dx, w)];
            double mean = sum / n;
            double ss = 0.0;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    double d = slice[static_cast<std::size_t>(clampi(y + dy, h)) * w +
                                     clampi(x + dx, w)] -
                               mean;
                    ss += d * d;
                }
            out[static_cast<std::size_t>(y) * w + x] = std::sqrt(ss / n);
        }
    return out;
}

std::vector<double> naive_local_entropy(const std::vector<double>& slice, int w, int h,
                                        int window) {
    const int r = window / 2;
    const int n = window * window;
    std::vector<double> out(slice.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::map<int, int> counts;
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    double v =
                        slice[static_cast<std::size_t>(clampi(y + dy, h)) * w + clampi(x + dx, w)];
                    int bin = static_cast<int>(v * (256.0 / 255.0));
                    bin = bin < 0 ? 0 : (bin > 255 ? 255 : bin);
                    ++counts[bin];
                }
            double entropy = 0.0;
            for (const auto& [bin, c] : counts) {
                double p = static_cast<double>(c) / n;
                entropy -= p * std::log2(p);
            }
            out[static_cast<std::size_t>(y) * w + x] = entropy;
        }
    return out;
}

FloodFillResult flood_fill_components(const std::vector<std::uint8_t>& mask, const Dims& dims) {
    const int nx = dims[0], ny = dims[1], nz = dims[2];
    const std::size_t sy = static_cast<std::size_t>(nx);
    const std::size_t sz = static_cast<std::size_t>(nx) * ny;

    FloodFillResult out;
    out.component_ids.assign(mask.size(), 0);

    for (std::size_t seed = 0; seed < mask.size(); ++seed) {
        if (!mask[seed] || out.component_ids[seed] != 0) continue;
        std::uint32_t id = ++out.component_count;
        std::size_t size = 0;
        std::deque<std::size_t> queue{seed};
        out.component_ids[seed] = id;
        while (!queue.empty()) {
            std::size_t cur = queue.front();
            queue.pop_front();
            ++size;
            int x = static_cast<int>(cur % sy);
            int y = static_cast<int>((cur / sy) % static_cast<std::size_t>(ny));
            int z = static_cast<int>(cur / sz);
            const int neigh[6][3] = {{x - 1, y, z}, {x + 1, y, z}, {x, y - 1, z},
                                     {x, y + 1, z}, {x, y, z - 1}, {x, y, z + 1}};
            for (const auto& nb : neigh) {
                if (nb[0] < 0 || nb[1] < 0 || nb[2] < 0 || nb[0] >= nx || nb[1] >= ny ||
                    nb[2] >= nz)
                    continue;
                std::size_t ni = static_cast<std::size_t>(nb[0]) + sy * nb[1] + sz * nb[2];
                if (mask[ni] && out.component_ids[ni] == 0) {
                    out.component_ids[ni] = id;
                    queue.push_back(ni);
                }
            }
        }
        out.component_sizes.push_back(size);
    }
    return out;
}

double auc_pairwise(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

double quantile_nth_element(const std::vector<double>& values, double p) {
    std::vector<double> copy = values;
    auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(copy.size())));
    rank = std::clamp<std::size_t>(rank, 1, copy.size());
    std::nth_element(copy.begin(), copy.begin() + static_cast<long>(rank - 1), copy.end());
    return copy[rank - 1];
}

} // namespace voxmark::ref
