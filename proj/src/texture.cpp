#include "voxmark/texture.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "voxmark/errors.hpp"

namespace voxmark {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TextureParams::TextureParams() {
    for (int k = 0; k < 4; ++k)
        gabor_wavelengths[static_cast<std::size_t>(k)] = std::ldexp(l_min, k); // 2^k * l_min
}

void TextureParams::validate() const {
    for (double w : gabor_wavelengths)
        if (w > l_max) throw ValidationError("gabor wavelength exceeds maximum length");
    if (stat_window % 2 == 0 || entropy_window % 2 == 0)
        throw ValidationError("statistic windows must be odd");
    if (n_probabilities != 300)
        throw ValidationError("the texture protocol uses exactly 300 probabilities");
    if (!(min_probability > 0.0 && min_probability < 1.0))
        throw ValidationError("min_probability must be in (0,1)");
    if (crop_size <= 0) throw ValidationError("crop_size must be positive");
}

// --- kernels ---------------------------------------------------------------

int gaussian_radius(double sigma) {
    return static_cast<int>(std::ceil(2.0 * sigma));
}

std::vector<double> gaussian_smooth_kernel(double sigma, int radius) {
    std::vector<double> k(2 * static_cast<std::size_t>(radius) + 1);
    double sum = 0.0;
    for (int j = -radius; j <= radius; ++j) {
        double w = std::exp(-(static_cast<double>(j) * j) / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(j + radius)] = w;
        sum += w;
    }
    for (double& v : k) v /= sum;
    return k;
}

std::vector<double> gaussian_d1_kernel(double sigma, int radius) {
    std::vector<double> k(2 * static_cast<std::size_t>(radius) + 1, 0.0);
    double norm = 0.0; // sum of j * k_raw[j], calibrates ramp response to its slope
    for (int j = 1; j <= radius; ++j) {
        double w = j * std::exp(-(static_cast<double>(j) * j) / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(radius + j)] = w;
        k[static_cast<std::size_t>(radius - j)] = -w;
        norm += 2.0 * j * w;
    }
    for (double& v : k) v /= norm;
    return k;
}

std::vector<double> gaussian_d2_kernel(double sigma, int radius) {
    std::vector<double> k(2 * static_cast<std::size_t>(radius) + 1, 0.0);
    double norm = 0.0; // sum of j^2 * k[j] over j != 0, calibrates x^2 -> 2
    for (int j = 1; j <= radius; ++j) {
        double w = (static_cast<double>(j) * j - sigma * sigma) *
                   std::exp(-(static_cast<double>(j) * j) / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(radius + j)] = w;
        k[static_cast<std::size_t>(radius - j)] = w;
        norm += 2.0 * j * j * w;
    }
    for (double& v : k) v *= 2.0 / norm;
    // DC-free center tap
    double side = 0.0;
    for (int j = 1; j <= radius; ++j) side += k[static_cast<std::size_t>(radius + j)];
    k[static_cast<std::size_t>(radius)] = -2.0 * side;
    return k;
}

double gabor_sigma(double wavelength, double bandwidth_octaves) {
    double b = bandwidth_octaves;
    double factor = (1.0 / kPi) * std::sqrt(std::log(2.0) / 2.0) *
                    (std::pow(2.0, b) + 1.0) / (std::pow(2.0, b) - 1.0);
    return wavelength * factor;
}

int gabor_radius(double sigma) {
    return static_cast<int>(std::ceil(3.0 * sigma));
}

std::vector<std::complex<double>> gabor_kernel_1d(double sigma, double freq, int radius) {
    std::vector<std::complex<double>> k(2 * static_cast<std::size_t>(radius) + 1);
    double amp = 1.0 / (sigma * std::sqrt(2.0 * kPi));
    for (int j = -radius; j <= radius; ++j) {
        double g = amp * std::exp(-(static_cast<double>(j) * j) / (2.0 * sigma * sigma));
        double phase = 2.0 * kPi * freq * j;
        k[static_cast<std::size_t>(j + radius)] = {g * std::cos(phase), g * std::sin(phase)};
    }
    return k;
}

// --- per-slice passes -------------------------------------------------------

namespace {

inline int clampi(int i, int n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

// full-kernel correlation along x with replicate padding
void pass_x_smooth(const double* in, double* out, int w, int h, const double* k, int r) {
    for (int y = 0; y < h; ++y) {
        const double* row = in + static_cast<std::size_t>(y) * w;
        double* orow = out + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int j = -r; j <= r; ++j) acc += k[j + r] * row[clampi(x + j, w)];
            orow[x] = acc;
        }
    }
}

void pass_y_smooth(const double* in, double* out, int w, int h, const double* k, int r) {
    for (int y = 0; y < h; ++y) {
        double* orow = out + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int j = -r; j <= r; ++j)
                acc += k[j + r] * in[static_cast<std::size_t>(clampi(y + j, h)) * w + x];
            orow[x] = acc;
        }
    }
}

// antisymmetric kernels evaluated on sample differences so constant input
// yields exact zeros; k is the full kernel, positive taps at k[r+j]
void pass_x_d1(const double* in, double* out, int w, int h, const double* k, int r) {
    for (int y = 0; y < h; ++y) {
        const double* row = in + static_cast<std::size_t>(y) * w;
        double* orow = out + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int j = 1; j <= r; ++j)
                acc += k[r + j] * (row[clampi(x + j, w)] - row[clampi(x - j, w)]);
            orow[x] = acc;
        }
    }
}

void pass_y_d1(const double* in, double* out, int w, int h, const double* k, int r) {
    for (int y = 0; y < h; ++y) {
        double* orow = out + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int j = 1; j <= r; ++j)
                acc += k[r + j] * (in[static_cast<std::size_t>(clampi(y + j, h)) * w + x] -
                                   in[static_cast<std::size_t>(clampi(y - j, h)) * w + x]);
            orow[x] = acc;
        }
    }
}

// symmetric DC-free kernels via second differences; same exact-zero property
void pass_x_d2(const double* in, double* out, int w, int h, const double* k, int r) {
    for (int y = 0; y < h; ++y) {
        const double* row = in + static_cast<std::size_t>(y) * w;
        double* orow = out + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double c = row[x];
            double acc = 0.0;
            for (int j = 1; j <= r; ++j)
                acc += k[r + j] * ((row[clampi(x - j, w)] - c) + (row[clampi(x + j, w)] - c));
            orow[x] = acc;
        }
    }
}

void pass_y_d2(const double* in, double* out, int w, int h, const double* k, int r) {
    for (int y = 0; y < h; ++y) {
        double* orow = out + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double c = in[static_cast<std::size_t>(y) * w + x];
            double acc = 0.0;
            for (int j = 1; j <= r; ++j)
                acc += k[r + j] *
                       ((in[static_cast<std::size_t>(clampi(y - j, h)) * w + x] - c) +
                        (in[static_cast<std::size_t>(clampi(y + j, h)) * w + x] - c));
            orow[x] = acc;
        }
    }
}

void pass_x_complex(const double* in, double* out_re, double* out_im, int w, int h,
                    const std::complex<double>* k, int r) {
    for (int y = 0; y < h; ++y) {
        const double* row = in + static_cast<std::size_t>(y) * w;
        double* ore = out_re + static_cast<std::size_t>(y) * w;
        double* oim = out_im + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double are = 0.0, aim = 0.0;
            for (int j = -r; j <= r; ++j) {
                double v = row[clampi(x + j, w)];
                are += k[j + r].real() * v;
                aim += k[j + r].imag() * v;
            }
            ore[x] = are;
            oim[x] = aim;
        }
    }
}

void pass_y_complex(const double* in_re, const double* in_im, double* out_mag, int w, int h,
                    const std::complex<double>* k, int r) {
    for (int y = 0; y < h; ++y) {
        double* orow = out_mag + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double are = 0.0, aim = 0.0;
            for (int j = -r; j <= r; ++j) {
                std::size_t idx = static_cast<std::size_t>(clampi(y + j, h)) * w + x;
                double kr = k[j + r].real(), ki = k[j + r].imag();
                double vr = in_re[idx], vi = in_im[idx];
                are += kr * vr - ki * vi;
                aim += kr * vi + ki * vr;
            }
            orow[x] = std::sqrt(are * are + aim * aim);
        }
    }
}

std::vector<int> all_slices(const Dims& d) {
    std::vector<int> s(static_cast<std::size_t>(d[2]));
    std::iota(s.begin(), s.end(), 0);
    return s;
}

std::vector<int> selected(const Volume& crop, const SliceSel* slices) {
    return slices ? *slices : all_slices(crop.dims);
}

void extract_slice(const Volume& crop, int z, std::vector<double>& plane) {
    const int w = crop.dims[0], h = crop.dims[1];
    plane.resize(static_cast<std::size_t>(w) * h);
    const float* src = crop.data.data() + crop.index(0, 0, z);
    for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = src[i];
}

void store_slice(MapGrid& m, int z, const std::vector<double>& plane) {
    double* dst = m.values.data() + m.index(0, 0, z);
    std::copy(plane.begin(), plane.end(), dst);
}

} // namespace

// --- local statistics --------------------------------------------------------

std::array<MapGrid, 3> local_statistics(const Volume& crop, const TextureParams& params,
                                        const SliceSel* slices) {
    crop.validate();
    params.validate();
    const int w = crop.dims[0], h = crop.dims[1];
    const int rs = params.stat_window / 2;
    const int re = params.entropy_window / 2;
    const int win_e = params.entropy_window * params.entropy_window;

    std::array<MapGrid, 3> out = {MapGrid::zeros(crop.dims), MapGrid::zeros(crop.dims),
                                  MapGrid::zeros(crop.dims)};
    const auto zs = selected(crop, slices);

    // entropy lookup: H = log2(n) - sum(c*log2 c)/n over touched bins
    std::vector<double> clog2c(static_cast<std::size_t>(win_e) + 1, 0.0);
    for (int c = 1; c <= win_e; ++c) clog2c[static_cast<std::size_t>(c)] = c * std::log2(double(c));
    const double log2n = std::log2(static_cast<double>(win_e));

    const int nstat = params.stat_window * params.stat_window;

#pragma omp parallel
    {
        std::vector<double> plane;
        std::vector<int> counts(256, 0);
        std::vector<int> touched;
        touched.reserve(static_cast<std::size_t>(win_e));

#pragma omp for schedule(dynamic)
        for (long si = 0; si < static_cast<long>(zs.size()); ++si) {
            int z = zs[static_cast<std::size_t>(si)];
            extract_slice(crop, z, plane);
            double* rng_out = out[0].values.data() + out[0].index(0, 0, z);
            double* std_out = out[1].values.data() + out[1].index(0, 0, z);
            double* ent_out = out[2].values.data() + out[2].index(0, 0, z);

            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    // range and stddev over the small window
                    double center = plane[static_cast<std::size_t>(y) * w + x];
                    double vmin = center, vmax = center;
                    double sum = 0.0;
                    for (int dy = -rs; dy <= rs; ++dy) {
                        const double* row =
                            plane.data() + static_cast<std::size_t>(clampi(y + dy, h)) * w;
                        for (int dx = -rs; dx <= rs; ++dx) {
                            double v = row[clampi(x + dx, w)];
                            vmin = std::min(vmin, v);
                            vmax = std::max(vmax, v);
                            sum += v - center; // shifted for exactness on constants
                        }
                    }
                    double mean_shifted = sum / nstat;
                    double ss = 0.0;
                    for (int dy = -rs; dy <= rs; ++dy) {
                        const double* row =
                            plane.data() + static_cast<std::size_t>(clampi(y + dy, h)) * w;
                        for (int dx = -rs; dx <= rs; ++dx) {
                            double d = (row[clampi(x + dx, w)] - center) - mean_shifted;
                            ss += d * d;
                        }
                    }
                    std::size_t o = static_cast<std::size_t>(y) * w + x;
                    rng_out[o] = vmax - vmin;
                    std_out[o] = std::sqrt(ss / nstat);

                    // entropy over the 9x9 window, 256 bins spanning [0,255]
                    touched.clear();
                    for (int dy = -re; dy <= re; ++dy) {
                        const double* row =
                            plane.data() + static_cast<std::size_t>(clampi(y + dy, h)) * w;
                        for (int dx = -re; dx <= re; ++dx) {
                            double v = row[clampi(x + dx, w)];
                            int bin = static_cast<int>(v * (256.0 / 255.0));
                            bin = bin < 0 ? 0 : (bin > 255 ? 255 : bin);
                            if (counts[static_cast<std::size_t>(bin)]++ == 0)
                                touched.push_back(bin);
                        }
                    }
                    double acc = 0.0;
                    for (int b : touched) {
                        acc += clog2c[static_cast<std::size_t>(counts[static_cast<std::size_t>(b)])];
                        counts[static_cast<std::size_t>(b)] = 0;
                    }
                    ent_out[o] = log2n - acc / win_e;
                }
            }
        }
    }
    return out;
}

// --- Gabor -------------------------------------------------------------------

MapGrid gabor_magnitude(const Volume& crop, int wavelength_idx, int orientation_idx,
                        const TextureParams& params, const SliceSel* slices) {
    const double wavelength = params.gabor_wavelengths[static_cast<std::size_t>(wavelength_idx)];
    const double theta = params.orientations_deg[static_cast<std::size_t>(orientation_idx)] *
                         kPi / 180.0;
    const double sigma = gabor_sigma(wavelength, params.gabor_bandwidth_octaves);
    const int r = gabor_radius(sigma);
    const auto kx = gabor_kernel_1d(sigma, std::cos(theta) / wavelength, r);
    const auto ky = gabor_kernel_1d(sigma, std::sin(theta) / wavelength, r);

    const int w = crop.dims[0], h = crop.dims[1];
    MapGrid out = MapGrid::zeros(crop.dims);
    const auto zs = selected(crop, slices);

#pragma omp parallel
    {
        std::vector<double> plane, t_re, t_im, mag;
        t_re.resize(static_cast<std::size_t>(w) * h);
        t_im.resize(static_cast<std::size_t>(w) * h);
        mag.resize(static_cast<std::size_t>(w) * h);

#pragma omp for schedule(dynamic)
        for (long si = 0; si < static_cast<long>(zs.size()); ++si) {
            int z = zs[static_cast<std::size_t>(si)];
            extract_slice(crop, z, plane);
            pass_x_complex(plane.data(), t_re.data(), t_im.data(), w, h, kx.data(), r);
            pass_y_complex(t_re.data(), t_im.data(), mag.data(), w, h, ky.data(), r);
            store_slice(out, z, mag);
        }
    }
    return out;
}

std::vector<MapGrid> gabor_bank(const Volume& crop, const TextureParams& params,
                                const SliceSel* slices) {
    crop.validate();
    params.validate();
    std::vector<MapGrid> out;
    out.reserve(16);
    for (int wi = 0; wi < 4; ++wi)
        for (int oi = 0; oi < 4; ++oi)
            out.push_back(gabor_magnitude(crop, wi, oi, params, slices));
    return out;
}

// --- steerable Gaussian derivatives -------------------------------------------

ScaleBases scale_bases(const Volume& crop, double sigma, const SliceSel* slices) {
    const int r = gaussian_radius(sigma);
    const auto k0 = gaussian_smooth_kernel(sigma, r);
    const auto k1 = gaussian_d1_kernel(sigma, r);
    const auto k2 = gaussian_d2_kernel(sigma, r);

    const int w = crop.dims[0], h = crop.dims[1];
    ScaleBases b{MapGrid::zeros(crop.dims), MapGrid::zeros(crop.dims), MapGrid::zeros(crop.dims),
                 MapGrid::zeros(crop.dims), MapGrid::zeros(crop.dims)};
    const auto zs = selected(crop, slices);

#pragma omp parallel
    {
        std::vector<double> plane, a, c, s, tmp;
        const std::size_t n = static_cast<std::size_t>(w) * h;
        a.resize(n);
        c.resize(n);
        s.resize(n);
        tmp.resize(n);

#pragma omp for schedule(dynamic)
        for (long si = 0; si < static_cast<long>(zs.size()); ++si) {
            int z = zs[static_cast<std::size_t>(si)];
            extract_slice(crop, z, plane);
            // shared x-stage: a = d1x(f), s = smoothx(f), c = d2x(f)
            pass_x_d1(plane.data(), a.data(), w, h, k1.data(), r);
            pass_x_smooth(plane.data(), s.data(), w, h, k0.data(), r);
            pass_x_d2(plane.data(), c.data(), w, h, k2.data(), r);

            pass_y_smooth(a.data(), tmp.data(), w, h, k0.data(), r);
            store_slice(b.gx, z, tmp);
            pass_y_d1(a.data(), tmp.data(), w, h, k1.data(), r);
            store_slice(b.gxy, z, tmp);
            pass_y_d1(s.data(), tmp.data(), w, h, k1.data(), r);
            store_slice(b.gy, z, tmp);
            pass_y_d2(s.data(), tmp.data(), w, h, k2.data(), r);
            store_slice(b.gyy, z, tmp);
            pass_y_smooth(c.data(), tmp.data(), w, h, k0.data(), r);
            store_slice(b.gxx, z, tmp);
        }
    }
    return b;
}

MapGrid steer_first_order(const ScaleBases& b, double theta_deg) {
    const double t = theta_deg * kPi / 180.0;
    const double ct = std::cos(t), st = std::sin(t);
    MapGrid out = MapGrid::zeros(b.gx.dims);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = ct * b.gx.values[i] + st * b.gy.values[i];
    return out;
}

MapGrid steer_second_order(const ScaleBases& b, double theta_deg) {
    const double t = theta_deg * kPi / 180.0;
    const double ct = std::cos(t), st = std::sin(t);
    MapGrid out = MapGrid::zeros(b.gxx.dims);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = ct * ct * b.gxx.values[i] + 2.0 * ct * st * b.gxy.values[i] +
                        st * st * b.gyy.values[i];
    return out;
}

std::vector<MapGrid> steerable_derivatives(const Volume& crop, const TextureParams& params,
                                           const SliceSel* slices) {
    crop.validate();
    params.validate();
    std::vector<MapGrid> first, second;
    for (double sigma : params.scales) {
        ScaleBases b = scale_bases(crop, sigma, slices);
        for (double theta : params.orientations_deg) {
            first.push_back(steer_first_order(b, theta));
            second.push_back(steer_second_order(b, theta));
        }
    }
    std::vector<MapGrid> out;
    out.reserve(40);
    for (auto& m : first) out.push_back(std::move(m));
    for (auto& m : second) out.push_back(std::move(m));
    return out;
}

std::vector<MapGrid> hessian_maps_for_scale(const ScaleBases& b) {
    const std::size_t n = b.gx.values.size();
    std::vector<MapGrid> out(6, MapGrid::zeros(b.gx.dims));
    for (std::size_t i = 0; i < n; ++i) {
        double gx = b.gx.values[i], gy = b.gy.values[i];
        double xx = b.gxx.values[i], xy = b.gxy.values[i], yy = b.gyy.values[i];
        double mean = 0.5 * (xx + yy);
        double radius = std::sqrt(0.25 * (xx - yy) * (xx - yy) + xy * xy);
        out[0].values[i] = std::sqrt(gx * gx + gy * gy); // gradient magnitude
        out[1].values[i] = mean + radius;                 // larger eigenvalue
        out[2].values[i] = mean - radius;
        out[3].values[i] = xx + yy;                       // LoG
        out[4].values[i] = xx * yy - xy * xy;             // Gaussian curvature
        out[5].values[i] = std::sqrt(xx * xx + 2.0 * xy * xy + yy * yy);
    }
    return out;
}

std::vector<MapGrid> hessian_features(const Volume& crop, const TextureParams& params,
                                      const SliceSel* slices) {
    crop.validate();
    params.validate();
    // feature-major: all scales of one feature before the next
    std::vector<std::vector<MapGrid>> per_scale;
    for (double sigma : params.scales) {
        ScaleBases b = scale_bases(crop, sigma, slices);
        per_scale.push_back(hessian_maps_for_scale(b));
    }
    std::vector<MapGrid> out;
    out.reserve(30);
    for (int f = 0; f < 6; ++f)
        for (std::size_t s = 0; s < per_scale.size(); ++s)
            out.push_back(std::move(per_scale[s][static_cast<std::size_t>(f)]));
    return out;
}

// --- registry ------------------------------------------------------------------

std::vector<std::string> texture_map_names(const TextureParams& params) {
    std::vector<std::string> names;
    names.reserve(90);
    names.emplace_back("original");
    names.emplace_back("local_range");
    names.emplace_back("local_std");
    names.emplace_back("local_entropy");
    auto deg = [&](std::size_t i) {
        return std::to_string(static_cast<int>(params.orientations_deg[i]));
    };
    for (int wi = 0; wi < 4; ++wi)
        for (std::size_t oi = 0; oi < 4; ++oi)
            names.push_back("gabor_w" + std::to_string(wi) + "_o" + deg(oi));
    for (int order = 1; order <= 2; ++order)
        for (int si = 0; si < 5; ++si)
            for (std::size_t oi = 0; oi < 4; ++oi)
                names.push_back("steer" + std::to_string(order) + "_s" + std::to_string(si) +
                                "_o" + deg(oi));
    const char* hess[6] = {"gradmag", "hess_eig1", "hess_eig2", "log", "gausscurv", "hess_frob"};
    for (const char* f : hess)
        for (int si = 0; si < 5; ++si)
            names.push_back(std::string(f) + "_s" + std::to_string(si));
    return names;
}

std::vector<std::string> texture_column_names(const TextureParams& params) {
    std::vector<std::string> out;
    out.reserve(90 * static_cast<std::size_t>(params.n_probabilities));
    for (const auto& m : texture_map_names(params))
        for (int k = 0; k < params.n_probabilities; ++k)
            out.push_back(m + "_q" + std::to_string(k));
    return out;
}

TextureMapStack build_texture_stack(const Volume& crop, const TextureParams& params) {
    crop.validate();
    params.validate();

    TextureMapStack stack;
    stack.dims = crop.dims;
    stack.names = texture_map_names(params);
    stack.maps.reserve(90);

    MapGrid original = MapGrid::zeros(crop.dims);
    for (std::size_t i = 0; i < crop.data.size(); ++i)
        original.values[i] = crop.data[i];
    stack.maps.push_back(std::move(original));

    auto stats = local_statistics(crop, params);
    for (auto& m : stats) stack.maps.push_back(std::move(m));
    for (auto& m : gabor_bank(crop, params)) stack.maps.push_back(std::move(m));
    for (auto& m : steerable_derivatives(crop, params)) stack.maps.push_back(std::move(m));
    for (auto& m : hessian_features(crop, params)) stack.maps.push_back(std::move(m));

    for (const auto& m : stack.maps)
        for (double v : m.values)
            if (!std::isfinite(v)) throw ValidationError("texture map contains non-finite value");
    return stack;
}

// --- ECDF quantiles ---------------------------------------------------------------

std::vector<double> ecdf_probability_grid(std::size_t n_masked, const TextureParams& params) {
    if (n_masked < 2)
        throw DegenerateInputError("ecdf grid needs at least 2 masked voxels");
    double p0 = std::max(1.0 / static_cast<double>(n_masked), params.min_probability);
    const int n = params.n_probabilities;
    std::vector<double> grid(static_cast<std::size_t>(n));
    const double lo = std::log10(p0);
    for (int k = 0; k < n; ++k) {
        double t = static_cast<double>(k) / (n - 1);
        grid[static_cast<std::size_t>(k)] = std::pow(10.0, lo * (1.0 - t));
    }
    grid.back() = 1.0;
    return grid;
}

std::vector<double> ecdf_quantiles(const std::vector<double>& map_values,
                                   const std::vector<std::uint8_t>& mask,
                                   const TextureParams& params) {
    if (map_values.size() != mask.size())
        throw ValidationError("ecdf_quantiles: map and mask sizes differ");
    std::vector<double> vals;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) vals.push_back(map_values[i]);
    if (vals.size() < 2)
        throw DegenerateInputError("ecdf_quantiles: mask has fewer than 2 voxels");
    std::sort(vals.begin(), vals.end());

    const auto grid = ecdf_probability_grid(vals.size(), params);
    const double n = static_cast<double>(vals.size());
    std::vector<double> out(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        auto rank = static_cast<std::size_t>(std::ceil(grid[k] * n)); // nearest rank, 1-based
        rank = std::clamp<std::size_t>(rank, 1, vals.size());
        out[k] = vals[rank - 1];
    }
    return out;
}

// --- end-to-end --------------------------------------------------------------------

TextureFeatures hippocampal_texture_features(const Volume& v, const LabelMap& lm,
                                             const std::vector<std::string>& hippocampus_names,
                                             const TextureParams& params) {
    v.validate();
    params.validate();
    if (v.dims != lm.dims)
        throw ValidationError("volume and label map dims differ");

    std::vector<int> hippo_ids;
    for (const auto& name : hippocampus_names) {
        const RegionInfo* r = lm.find_region(name);
        if (r) hippo_ids.push_back(r->label_id);
    }
    if (hippo_ids.empty())
        throw ConfigError("no hippocampus region found in the region table (looked for the "
                          "configured names)");

    auto is_hippo = [&](std::int32_t l) {
        return std::find(hippo_ids.begin(), hippo_ids.end(), l) != hippo_ids.end();
    };

    // joint centroid of all hippocampus voxels, in voxel coordinates
    double sum[3] = {0, 0, 0};
    std::size_t count = 0;
    std::size_t idx = 0;
    for (int z = 0; z < lm.dims[2]; ++z)
        for (int y = 0; y < lm.dims[1]; ++y)
            for (int x = 0; x < lm.dims[0]; ++x, ++idx) {
                if (is_hippo(lm.labels[idx])) {
                    sum[0] += x;
                    sum[1] += y;
                    sum[2] += z;
                    ++count;
                }
            }
    if (count == 0)
        throw ConfigError("hippocampus labels are present in the table but absent from the "
                          "label map");

    std::array<int, 3> center = {
        static_cast<int>(std::llround(sum[0] / static_cast<double>(count))),
        static_cast<int>(std::llround(sum[1] / static_cast<double>(count))),
        static_cast<int>(std::llround(sum[2] / static_cast<double>(count)))};

    const Dims crop_dims = {params.crop_size, params.crop_size, params.crop_size};
    Volume crop = crop_centered(v, center, crop_dims);
    auto crop_labels = crop_centered_labels(lm, center, crop_dims);
    std::vector<std::uint8_t> mask(crop_labels.size(), 0);
    SliceSel mask_slices;
    {
        std::size_t i = 0;
        for (int z = 0; z < crop_dims[2]; ++z) {
            bool any = false;
            for (int y = 0; y < crop_dims[1]; ++y)
                for (int x = 0; x < crop_dims[0]; ++x, ++i) {
                    if (is_hippo(crop_labels[i])) {
                        mask[i] = 1;
                        any = true;
                    }
                }
            if (any) mask_slices.push_back(z);
        }
    }

    std::size_t masked = 0;
    for (auto m : mask) masked += m;
    if (masked < 2)
        throw DegenerateInputError("hippocampus mask has fewer than 2 voxels inside the crop");

    // compute quantiles map by map; only slices intersecting the mask are built
    std::map<std::string, std::vector<double>> feats;

    {
        std::vector<double> orig(crop.data.begin(), crop.data.end());
        feats["original"] = ecdf_quantiles(orig, mask, params);
    }
    {
        auto stats = local_statistics(crop, params, &mask_slices);
        feats["local_range"] = ecdf_quantiles(stats[0].values, mask, params);
        feats["local_std"] = ecdf_quantiles(stats[1].values, mask, params);
        feats["local_entropy"] = ecdf_quantiles(stats[2].values, mask, params);
    }
    for (int wi = 0; wi < 4; ++wi) {
        for (std::size_t oi = 0; oi < 4; ++oi) {
            MapGrid m = gabor_magnitude(crop, wi, static_cast<int>(oi), params, &mask_slices);
            std::string name = "gabor_w" + std::to_string(wi) + "_o" +
                               std::to_string(static_cast<int>(params.orientations_deg[oi]));
            feats[name] = ecdf_quantiles(m.values, mask, params);
        }
    }
    const char* hess[6] = {"gradmag", "hess_eig1", "hess_eig2", "log", "gausscurv", "hess_frob"};
    for (int si = 0; si < 5; ++si) {
        ScaleBases b = scale_bases(crop, params.scales[static_cast<std::size_t>(si)], &mask_slices);
        for (std::size_t oi = 0; oi < 4; ++oi) {
            int deg = static_cast<int>(params.orientations_deg[oi]);
            MapGrid s1 = steer_first_order(b, params.orientations_deg[oi]);
            feats["steer1_s" + std::to_string(si) + "_o" + std::to_string(deg)] =
                ecdf_quantiles(s1.values, mask, params);
            MapGrid s2 = steer_second_order(b, params.orientations_deg[oi]);
            feats["steer2_s" + std::to_string(si) + "_o" + std::to_string(deg)] =
                ecdf_quantiles(s2.values, mask, params);
        }
        auto hm = hessian_maps_for_scale(b);
        for (int f = 0; f < 6; ++f)
            feats[std::string(hess[f]) + "_s" + std::to_string(si)] =
                ecdf_quantiles(hm[static_cast<std::size_t>(f)].values, mask, params);
    }

    TextureFeatures out;
    out.names = texture_column_names(params);
    out.values.reserve(out.names.size());
    for (const auto& map_name : texture_map_names(params)) {
        const auto& q = feats.at(map_name);
        out.values.insert(out.values.end(), q.begin(), q.end());
    }
    return out;
}

} // namespace voxmark
