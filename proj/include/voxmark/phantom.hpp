#ifndef VOXMARK_PHANTOM_HPP
#define VOXMARK_PHANTOM_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "voxmark/volume.hpp"

namespace voxmark {

// Synthetic test volumes: shapes rasterized by a center-of-voxel membership
// test, later shapes overwriting earlier ones, plus optional seeded Gaussian
// intensity noise clamped to [0,255].

enum class ShapeKind { Ellipsoid, Slab, Box };

struct PhantomShape {
    ShapeKind kind = ShapeKind::Ellipsoid;
    std::array<double, 3> center_mm{0, 0, 0}; // slab: only the axis component is used
    std::array<double, 3> semiaxes_mm{0, 0, 0}; // ellipsoid
    std::array<double, 3> size_mm{0, 0, 0};     // box edge lengths
    int axis = 2;              // slab normal axis (0=x, 1=y, 2=z)
    double thickness_mm = 0.0; // slab
    int label_id = 1;
    double intensity = 100.0;
    // region table entry generated for this shape
    std::string name;               // default: "region-<label_id>"
    Hemisphere hemisphere = Hemisphere::None;
    bool is_cortical = false;
    bool is_gray_matter = false;
};

struct PhantomSpec {
    Dims dims{0, 0, 0};
    Spacing spacing{1.0, 1.0, 1.0};
    double background_intensity = 0.0;
    double noise_sigma = 0.0;
    std::vector<PhantomShape> shapes;

    void validate() const; // bounds and parameter checks
};

// Deterministic for fixed (spec, seed). The label map's region table lists
// each distinct shape label once.
std::pair<Volume, LabelMap> generate_phantom(const PhantomSpec& spec, std::uint64_t seed);

// JSON document, schema documented in the README.
PhantomSpec parse_phantom_spec_json(const std::string& json_text, const std::string& context);

} // namespace voxmark

#endif
