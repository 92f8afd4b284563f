#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include <json.hpp>

#include "levy/catalog.hpp"
#include "levy/measure.hpp"
#include "levy/rng.hpp"
#include "levy/triplet.hpp"
#include "levy/weight.hpp"

namespace levy {

using Json = nlohmann::json;

/// A parse/validation failure with the offending field spelled out.
struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A process-spec document: the triplet plus an optional weight fragment.
struct ProcessSpec {
    LevyTriplet triplet = LevyTriplet::create1d(0.0, 0.0, LevyMeasure::zero(1));
    std::optional<WeightFunction> weight;
    std::string name = "process";
};

namespace spec_detail {

inline double number_at(const Json& j, const std::string& field) {
    if (!j.contains(field) || !j[field].is_number())
        throw SpecError("field '" + field + "' missing or not a number");
    return j[field].get<double>();
}

inline Vec vec_at(const Json& j, const std::string& field, int dim) {
    if (!j.contains(field) || !j[field].is_array())
        throw SpecError("field '" + field + "' missing or not an array");
    Vec v = j[field].get<Vec>();
    if (static_cast<int>(v.size()) != dim)
        throw SpecError("field '" + field + "' has wrong dimension");
    return v;
}

inline double support_radius(const Json& j, const std::string& field, double fallback) {
    if (!j.contains(field) || j[field].is_null()) return fallback;
    if (j[field].is_string() && j[field] == "inf") return kInf;
    if (!j[field].is_number()) throw SpecError("support field '" + field + "' invalid");
    return j[field].get<double>();
}

}  // namespace spec_detail

inline WeightFunction parse_weight(const Json& j) {
    if (!j.contains("family") || !j["family"].is_string())
        throw SpecError("weight: field 'g.family' missing");
    const std::string family = j["family"];
    const Json params = j.value("params", Json::object());
    WeightFunction g;
    if (family == "exp_abs") {
        g = WeightFunction::exp_abs(spec_detail::number_at(params, "beta"),
                                    j.value("dim", 1));
    } else if (family == "poly") {
        g = WeightFunction::poly(spec_detail::number_at(params, "p"), j.value("dim", 1));
    } else {
        throw SpecError("weight: unknown family '" + family + "'");
    }
    if (j.contains("cap") && !j["cap"].is_null()) g = cap(g, j["cap"].get<double>());
    return g;
}

inline Json emit_weight(const WeightFunction& g) {
    Json j;
    switch (g.family) {
        case WeightFamily::exp_abs:
            j["family"] = "exp_abs";
            j["params"] = {{"beta", g.param}};
            break;
        case WeightFamily::poly:
            j["family"] = "poly";
            j["params"] = {{"p", g.param}};
            break;
        default:
            throw SpecError("weight: only catalog families serialize");
    }
    if (g.cap_level) j["cap"] = *g.cap_level;
    j["dim"] = g.dim;
    return j;
}

inline ProcessSpec parse_process_spec(const Json& j) {
    ProcessSpec spec;
    if (!j.contains("dim") || !j["dim"].is_number_integer())
        throw SpecError("field 'dim' missing or not an integer");
    const int dim = j["dim"].get<int>();
    if (dim < 1 || dim > 3) throw SpecError("field 'dim' must be 1, 2 or 3");

    Vec b = spec_detail::vec_at(j, "b", dim);
    if (!j.contains("Q") || !j["Q"].is_array() || static_cast<int>(j["Q"].size()) != dim)
        throw SpecError("field 'Q' missing or not a dim x dim array");
    Mat Q(dim);
    for (int i = 0; i < dim; ++i) {
        const Json& row = j["Q"][static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<int>(row.size()) != dim)
            throw SpecError("field 'Q' row has wrong length");
        for (int k = 0; k < dim; ++k) Q(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }

    LevyMeasure nu;
    nu.dim = dim;
    const Json jnu = j.value("nu", Json::object());
    for (const Json& ja : jnu.value("atoms", Json::array())) {
        Atom a;
        a.position = spec_detail::vec_at(ja, "position", dim);
        a.mass = spec_detail::number_at(ja, "mass");
        nu.atoms.push_back(std::move(a));
    }
    for (const Json& jd : jnu.value("densities", Json::array())) {
        if (!jd.contains("family") || !jd["family"].is_string())
            throw SpecError("density: field 'family' missing");
        const std::string family = jd["family"];
        const Json params = jd.value("params", Json::object());
        const Json support = jd.value("support", Json::object());
        const double r_in = spec_detail::support_radius(support, "r_inner", 0.0);
        const double r_out = spec_detail::support_radius(support, "r_outer", kInf);
        ParametricDensity d;
        if (family == "power_law") {
            d = ParametricDensity::power_law(spec_detail::number_at(params, "alpha"),
                                             r_in, r_out, params.value("scale", 1.0));
        } else if (family == "exp_tilt") {
            d = ParametricDensity::exp_tilt(spec_detail::number_at(params, "alpha"),
                                            spec_detail::number_at(params, "lambda"),
                                            r_in, r_out, params.value("scale", 1.0));
        } else if (family == "gaussian") {
            Vec mean(static_cast<std::size_t>(dim), 0.0);
            if (params.contains("mean")) mean = spec_detail::vec_at(params, "mean", dim);
            d = ParametricDensity::gaussian_jumps(spec_detail::number_at(params, "rate"),
                                                  mean,
                                                  spec_detail::number_at(params, "sigma"));
            d.r_inner = r_in;
            d.r_outer = r_out;
        } else {
            throw SpecError("density: unknown family '" + family + "'");
        }
        if (jd.contains("quadrature")) {
            const Json& q = jd["quadrature"];
            d.quad.radial_nodes = q.value("radial_nodes", d.quad.radial_nodes);
            d.quad.angular_nodes = q.value("angular_nodes", d.quad.angular_nodes);
            d.quad.scheme = q.value("scheme", d.quad.scheme);
        }
        nu.densities.push_back(std::move(d));
    }

    try {
        spec.triplet = LevyTriplet::create(std::move(b), std::move(Q), std::move(nu));
    } catch (const std::invalid_argument& err) {
        throw SpecError(err.what());
    }
    if (j.contains("g") && !j["g"].is_null()) spec.weight = parse_weight(j["g"]);
    spec.name = j.value("name", std::string("process"));
    return spec;
}

inline Json emit_process_spec(const ProcessSpec& spec) {
    const LevyTriplet& t = spec.triplet;
    Json j;
    j["name"] = spec.name;
    j["dim"] = t.dim;
    j["b"] = t.b;
    Json q = Json::array();
    for (int i = 0; i < t.dim; ++i) {
        Json row = Json::array();
        for (int k = 0; k < t.dim; ++k) row.push_back(t.Q(i, k));
        q.push_back(std::move(row));
    }
    j["Q"] = std::move(q);

    Json atoms = Json::array();
    for (const Atom& a : t.nu.atoms)
        atoms.push_back({{"position", a.position}, {"mass", a.mass}});
    Json densities = Json::array();
    for (const ParametricDensity& d : t.nu.densities) {
        Json jd;
        Json support;
        support["r_inner"] = d.r_inner;
        if (std::isfinite(d.r_outer))
            support["r_outer"] = d.r_outer;
        else
            support["r_outer"] = nullptr;
        switch (d.family) {
            case DensityFamily::power_law:
                jd["family"] = "power_law";
                jd["params"] = {{"alpha", d.alpha}, {"scale", d.scale}};
                break;
            case DensityFamily::exp_tilt:
                jd["family"] = "exp_tilt";
                jd["params"] = {{"alpha", d.alpha}, {"lambda", d.tilt}, {"scale", d.scale}};
                break;
            case DensityFamily::gaussian:
                jd["family"] = "gaussian";
                jd["params"] = {{"rate", d.rate}, {"mean", d.mean}, {"sigma", d.sigma}};
                break;
            case DensityFamily::tabulated:
                throw SpecError("density: tabulated densities do not serialize");
        }
        jd["support"] = std::move(support);
        jd["quadrature"] = {{"radial_nodes", d.quad.radial_nodes},
                            {"angular_nodes", d.quad.angular_nodes},
                            {"scheme", d.quad.scheme}};
        densities.push_back(std::move(jd));
    }
    j["nu"] = {{"atoms", std::move(atoms)}, {"densities", std::move(densities)}};
    if (spec.weight) j["g"] = emit_weight(*spec.weight);
    return j;
}

inline ProcessSpec load_process_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open process spec '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& err) {
        throw SpecError("parse error in '" + path + "': " + err.what());
    }
    try {
        return parse_process_spec(j);
    } catch (const SpecError& err) {
        throw SpecError("in '" + path + "': " + err.what());
    }
}

/// Digest of the canonical serialized form; recorded in reports.
inline std::uint64_t spec_digest(const ProcessSpec& spec) {
    const std::string s = emit_process_spec(spec).dump();
    return fnv1a(s.data(), s.size());
}

}  // namespace levy
