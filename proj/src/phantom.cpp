#include "voxmark/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "voxmark/rng.hpp"

namespace voxmark {

namespace {

struct Extent {
    double lo[3];
    double hi[3];
};

Extent shape_extent(const PhantomShape& s, const Dims& dims, const Spacing& sp) {
    Extent e{};
    switch (s.kind) {
        case ShapeKind::Ellipsoid:
            for (int i = 0; i < 3; ++i) {
                e.lo[i] = s.center_mm[i] - s.semiaxes_mm[i];
                e.hi[i] = s.center_mm[i] + s.semiaxes_mm[i];
            }
            break;
        case ShapeKind::Box:
            for (int i = 0; i < 3; ++i) {
                e.lo[i] = s.center_mm[i] - s.size_mm[i] / 2.0;
                e.hi[i] = s.center_mm[i] + s.size_mm[i] / 2.0;
            }
            break;
        case ShapeKind::Slab:
            for (int i = 0; i < 3; ++i) {
                if (i == s.axis) {
                    e.lo[i] = s.center_mm[i] - s.thickness_mm / 2.0;
                    e.hi[i] = s.center_mm[i] + s.thickness_mm / 2.0;
                } else {
                    // slabs span the full volume in the other axes
                    e.lo[i] = 0.0;
                    e.hi[i] = dims[i] * sp[i];
                }
            }
            break;
    }
    return e;
}

bool contains(const PhantomShape& s, double x, double y, double z) {
    switch (s.kind) {
        case ShapeKind::Ellipsoid: {
            double u = (x - s.center_mm[0]) / s.semiaxes_mm[0];
            double v = (y - s.center_mm[1]) / s.semiaxes_mm[1];
            double w = (z - s.center_mm[2]) / s.semiaxes_mm[2];
            return u * u + v * v + w * w <= 1.0;
        }
        case ShapeKind::Box:
            return std::abs(x - s.center_mm[0]) <= s.size_mm[0] / 2.0 &&
                   std::abs(y - s.center_mm[1]) <= s.size_mm[1] / 2.0 &&
                   std::abs(z - s.center_mm[2]) <= s.size_mm[2] / 2.0;
        case ShapeKind::Slab: {
            double c[3] = {x, y, z};
            return std::abs(c[s.axis] - s.center_mm[s.axis]) <= s.thickness_mm / 2.0;
        }
    }
    return false;
}

} // namespace

void PhantomSpec::validate() const {
    for (int i = 0; i < 3; ++i) {
        if (dims[i] <= 0) throw ValidationError("phantom dims must be positive");
        if (!(spacing[i] > 0.0)) throw ValidationError("phantom spacing must be positive");
    }
    if (noise_sigma < 0.0) throw ValidationError("noise_sigma must be >= 0");
    for (const auto& s : shapes) {
        if (s.label_id <= 0)
            throw ValidationError("shape label_id must be positive");
        if (s.kind == ShapeKind::Ellipsoid)
            for (double a : s.semiaxes_mm)
                if (!(a > 0.0)) throw ValidationError("ellipsoid semi-axes must be positive");
        if (s.kind == ShapeKind::Box)
            for (double a : s.size_mm)
                if (!(a > 0.0)) throw ValidationError("box size must be positive");
        if (s.kind == ShapeKind::Slab) {
            if (s.axis < 0 || s.axis > 2) throw ValidationError("slab axis must be 0, 1 or 2");
            if (!(s.thickness_mm > 0.0))
                throw ValidationError("slab thickness must be positive");
        }
        Extent e = shape_extent(s, dims, spacing);
        for (int i = 0; i < 3; ++i) {
            double limit = dims[i] * spacing[i];
            if (e.lo[i] < -1e-9 || e.hi[i] > limit + 1e-9)
                throw ValidationError("shape with label " + std::to_string(s.label_id) +
                                      " extends outside the volume on axis " +
                                      std::to_string(i));
        }
    }
}

std::pair<Volume, LabelMap> generate_phantom(const PhantomSpec& spec, std::uint64_t seed) {
    spec.validate();

    Volume vol = Volume::zeros(spec.dims, spec.spacing);
    std::fill(vol.data.begin(), vol.data.end(),
              static_cast<float>(std::clamp(spec.background_intensity, 0.0, 255.0)));

    LabelMap lm;
    lm.dims = spec.dims;
    lm.spacing = spec.spacing;
    lm.labels.assign(vol.size(), 0);

    for (const auto& s : spec.shapes) {
        Extent e = shape_extent(s, spec.dims, spec.spacing);
        int lo[3], hi[3];
        for (int i = 0; i < 3; ++i) {
            lo[i] = std::max(0, static_cast<int>(std::floor(e.lo[i] / spec.spacing[i] - 0.5)));
            hi[i] = std::min(spec.dims[i] - 1,
                             static_cast<int>(std::ceil(e.hi[i] / spec.spacing[i] - 0.5)) + 1);
        }
        for (int z = lo[2]; z <= hi[2]; ++z) {
            double cz = (z + 0.5) * spec.spacing[2];
            for (int y = lo[1]; y <= hi[1]; ++y) {
                double cy = (y + 0.5) * spec.spacing[1];
                for (int x = lo[0]; x <= hi[0]; ++x) {
                    double cx = (x + 0.5) * spec.spacing[0];
                    if (contains(s, cx, cy, cz)) {
                        std::size_t idx = vol.index(x, y, z);
                        lm.labels[idx] = s.label_id;
                        vol.data[idx] =
                            static_cast<float>(std::clamp(s.intensity, 0.0, 255.0));
                    }
                }
            }
        }
    }

    if (spec.noise_sigma > 0.0) {
        auto rng = make_rng(seed, "phantom-noise");
        for (std::size_t i = 0; i < vol.data.size(); ++i) {
            double v = vol.data[i] + spec.noise_sigma * standard_normal(rng);
            vol.data[i] = static_cast<float>(std::clamp(v, 0.0, 255.0));
        }
    }

    // one table row per distinct label, first shape with that label wins
    std::map<int, const PhantomShape*> by_label;
    for (const auto& s : spec.shapes)
        if (by_label.find(s.label_id) == by_label.end()) by_label[s.label_id] = &s;
    for (const auto& [id, s] : by_label) {
        RegionInfo r;
        r.label_id = id;
        r.name = s->name.empty() ? "region-" + std::to_string(id) : s->name;
        r.hemisphere = s->hemisphere;
        r.is_cortical = s->is_cortical;
        r.is_gray_matter = s->is_gray_matter;
        lm.region_table.push_back(std::move(r));
    }

    lm.validate();
    return {std::move(vol), std::move(lm)};
}

namespace {

using nlohmann::json;

std::array<double, 3> get_vec3(const json& j, const char* key, const std::string& ctx) {
    if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3)
        throw FormatError(ctx + ": '" + key + "' must be an array of 3 numbers");
    return {j[key][0].get<double>(), j[key][1].get<double>(), j[key][2].get<double>()};
}

} // namespace

PhantomSpec parse_phantom_spec_json(const std::string& json_text, const std::string& context) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw FormatError(context + ": invalid JSON at byte " + std::to_string(e.byte) + ": " +
                          e.what());
    }

    PhantomSpec spec;
    auto d = get_vec3(j, "dims", context);
    spec.dims = {static_cast<int>(d[0]), static_cast<int>(d[1]), static_cast<int>(d[2])};
    spec.spacing = get_vec3(j, "spacing", context);
    spec.background_intensity = j.value("background_intensity", 0.0);
    spec.noise_sigma = j.value("noise_sigma", 0.0);

    if (!j.contains("shapes") || !j["shapes"].is_array())
        throw FormatError(context + ": 'shapes' must be an array");
    for (std::size_t i = 0; i < j["shapes"].size(); ++i) {
        const json& js = j["shapes"][i];
        std::string ctx = context + " shapes[" + std::to_string(i) + "]";
        PhantomShape s;
        std::string kind = js.value("kind", "");
        if (kind == "ellipsoid") {
            s.kind = ShapeKind::Ellipsoid;
            s.center_mm = get_vec3(js, "center_mm", ctx);
            s.semiaxes_mm = get_vec3(js, "semiaxes_mm", ctx);
        } else if (kind == "box") {
            s.kind = ShapeKind::Box;
            s.center_mm = get_vec3(js, "center_mm", ctx);
            s.size_mm = get_vec3(js, "size_mm", ctx);
        } else if (kind == "slab") {
            s.kind = ShapeKind::Slab;
            std::string axis = js.value("axis", "z");
            if (axis == "x") s.axis = 0;
            else if (axis == "y") s.axis = 1;
            else if (axis == "z") s.axis = 2;
            else throw FormatError(ctx + ": axis must be x, y or z");
            if (!js.contains("center_mm") || !js["center_mm"].is_number())
                throw FormatError(ctx + ": slab 'center_mm' must be a number");
            s.center_mm[s.axis] = js["center_mm"].get<double>();
            s.thickness_mm = js.value("thickness_mm", 0.0);
        } else {
            throw FormatError(ctx + ": unknown shape kind '" + kind + "'");
        }
        if (!js.contains("label_id"))
            throw FormatError(ctx + ": missing label_id");
        s.label_id = js["label_id"].get<int>();
        s.intensity = js.value("intensity", 100.0);
        s.name = js.value("name", "");
        if (js.contains("hemisphere"))
            s.hemisphere = hemisphere_from_string(js["hemisphere"].get<std::string>());
        s.is_cortical = js.value("is_cortical", false);
        s.is_gray_matter = js.value("is_gray_matter", false);
        spec.shapes.push_back(std::move(s));
    }

    spec.validate();
    return spec;
}

} // namespace voxmark
