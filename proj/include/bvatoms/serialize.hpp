#pragma once
// JSON artifacts. Doubles are written in shortest round-trip form, so a
// decomposition read back reconstructs bit-identically.

#include <fstream>
#include <string>

#include "json.hpp"

#include "bvatoms/pipeline.hpp"

namespace bvatoms {

using nlohmann::json;

inline json spec_to_json(const GridSpec& s) {
    json j;
    j["dim"] = s.dim;
    j["h"] = s.h;
    j["extent"] = json::array();
    j["origin"] = json::array();
    for (int a = 0; a < s.dim; ++a) {
        j["extent"].push_back(s.extent[a]);
        j["origin"].push_back(s.origin[a]);
    }
    return j;
}

inline GridSpec spec_from_json(const json& j) {
    const int d = j.at("dim").get<int>();
    require(d == 2 || d == 3, "artifact dimension must be 2 or 3");
    const auto& ext = j.at("extent");
    const auto& org = j.at("origin");
    require(ext.size() == static_cast<std::size_t>(d) && org.size() == static_cast<std::size_t>(d),
            "artifact extent/origin length does not match dimension");
    std::array<int, kMaxDim> n{1, 1, 1};
    Point o{0.0, 0.0, 0.0};
    for (int a = 0; a < d; ++a) {
        n[a] = ext[a].get<int>();
        o[a] = org[a].get<double>();
    }
    return GridSpec::make(d, n, j.at("h").get<double>(), o);
}

inline json mode_to_json(const Mode& m) {
    if (m.is_exact()) return json{{"kind", "exact"}};
    return json{{"kind", "riemann"}, {"n", m.n}, {"scheme", m.scheme == SamplingScheme::uniform ? "uniform" : "quantile"}};
}

inline Mode mode_from_json(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "exact") return Mode::exact();
    require(kind == "riemann", "unknown mode kind '" + kind + "'");
    const auto scheme = j.at("scheme").get<std::string>();
    require(scheme == "uniform" || scheme == "quantile", "unknown sampling scheme '" + scheme + "'");
    return Mode::riemann(j.at("n").get<int>(), scheme == "uniform" ? SamplingScheme::uniform : SamplingScheme::quantile);
}

inline json cube_to_json(const DyadicCube& q, int dim) {
    json c = json::array();
    for (int a = 0; a < dim; ++a) c.push_back(q.coords[a]);
    return json{{"level", q.level}, {"coords", c}};
}

inline DyadicCube cube_from_json(const json& j, int dim) {
    DyadicCube q;
    q.level = j.at("level").get<int>();
    require(q.level >= 0 && q.level < 30, "cube level out of range");
    const auto& c = j.at("coords");
    require(c.size() == static_cast<std::size_t>(dim), "cube coordinate count does not match dimension");
    for (int a = 0; a < dim; ++a) q.coords[a] = c[a].get<int>();
    return q;
}

inline json summary_to_json(const Summary& s, int dim) {
    json j;
    j["tv"] = s.tv;
    j["layered_perimeter"] = s.layered_perimeter;
    j["sum_abs_lambda"] = s.sum_abs_lambda;
    j["sum_abs_lambda_component"] = json::array();
    for (int l = 0; l < dim; ++l) j["sum_abs_lambda_component"].push_back(s.sum_abs_lambda_component[l]);
    j["ratio"] = s.ratio;
    j["max_boxing_constant"] = s.max_boxing_constant;
    j["closed_overcount"] = s.closed_overcount;
    j["reconstruction_residual"] = s.reconstruction_residual;
    j["atoms"] = s.atoms;
    j["weak_star"] = json::array();
    for (const auto& w : s.weak_star) j["weak_star"].push_back({{"field", w.field}, {"residual", w.residual}});
    return j;
}

inline Summary summary_from_json(const json& j, int dim) {
    Summary s;
    s.tv = j.at("tv").get<double>();
    s.layered_perimeter = j.at("layered_perimeter").get<double>();
    s.sum_abs_lambda = j.at("sum_abs_lambda").get<double>();
    for (int l = 0; l < dim; ++l) s.sum_abs_lambda_component[l] = j.at("sum_abs_lambda_component").at(l).get<double>();
    s.ratio = j.at("ratio").get<double>();
    s.max_boxing_constant = j.at("max_boxing_constant").get<double>();
    s.closed_overcount = j.at("closed_overcount").get<double>();
    s.reconstruction_residual = j.at("reconstruction_residual").get<double>();
    s.atoms = j.at("atoms").get<std::size_t>();
    for (const auto& w : j.at("weak_star")) s.weak_star.push_back({w.at("field").get<std::string>(), w.at("residual").get<double>()});
    return s;
}

inline json decomposition_to_json(const Decomposition& dec) {
    const int d = dec.spec.dim;
    json j;
    j["format"] = "bvatoms-decomposition";
    j["version"] = 1;
    j["header"] = {{"spec", spec_to_json(dec.spec)},
                   {"mode", mode_to_json(dec.mode)},
                   {"Cprime", dec.cprime},
                   {"digest", dec.digest},
                   {"riesz_normalization", "standard"}};
    json layers = json::array();
    for (const auto& L : dec.layers)
        layers.push_back({{"sigma", L.sigma},
                          {"a", L.a},
                          {"t", L.t},
                          {"perimeter", L.perimeter},
                          {"cells", L.cells},
                          {"cubes", L.cubes},
                          {"boxing_constant", L.boxing_constant}});
    j["layers"] = std::move(layers);
    json atoms = json::array();
    json lambdas = json::array();
    for (const auto& e : dec.entries) {
        json faces = json::array();
        for (const auto& fw : e.atom.faces) {
            json f = json::array();
            f.push_back(fw.face.axis);
            for (int a = 0; a < d; ++a) f.push_back(fw.face.lower[a]);
            f.push_back(fw.weight);
            faces.push_back(std::move(f));
        }
        atoms.push_back({{"l", e.atom.axis},
                         {"Q", cube_to_json(e.atom.cube, d)},
                         {"layer", e.atom.provenance.layer},
                         {"boundary_mass", e.atom.boundary_mass},
                         {"faces", std::move(faces)}});
        lambdas.push_back(e.lambda);
    }
    j["atoms"] = std::move(atoms);
    j["lambdas"] = std::move(lambdas);
    j["summary"] = summary_to_json(dec.summary, d);
    return j;
}

inline Decomposition decomposition_from_json(const json& j) {
    require(j.value("format", "") == "bvatoms-decomposition", "not a decomposition artifact");
    Decomposition dec;
    const auto& hdr = j.at("header");
    dec.spec = spec_from_json(hdr.at("spec"));
    dec.mode = mode_from_json(hdr.at("mode"));
    dec.cprime = hdr.at("Cprime").get<double>();
    dec.digest = hdr.at("digest").get<std::string>();
    const int d = dec.spec.dim;
    for (const auto& L : j.at("layers")) {
        LayerInfo info;
        info.sigma = L.at("sigma").get<int>();
        info.a = L.at("a").get<double>();
        info.t = L.at("t").get<double>();
        info.perimeter = L.at("perimeter").get<double>();
        info.cells = L.at("cells").get<std::size_t>();
        info.cubes = L.at("cubes").get<std::size_t>();
        info.boxing_constant = L.at("boxing_constant").get<double>();
        dec.layers.push_back(info);
    }
    const auto& atoms = j.at("atoms");
    const auto& lambdas = j.at("lambdas");
    require(atoms.size() == lambdas.size(), "atom and lambda counts differ");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const auto& ja = atoms[i];
        Entry e;
        e.lambda = lambdas[i].get<double>();
        e.atom.axis = ja.at("l").get<int>();
        require(e.atom.axis >= 0 && e.atom.axis < d, "atom axis out of range");
        e.atom.cube = cube_from_json(ja.at("Q"), d);
        e.atom.support = e.atom.cube.doubled(dec.spec);
        e.atom.cprime = dec.cprime;
        e.atom.boundary_mass = ja.at("boundary_mass").get<double>();
        e.atom.provenance = {ja.at("layer").get<int>(), ja.at("layer").get<int>()};
        for (const auto& jf : ja.at("faces")) {
            require(jf.size() == static_cast<std::size_t>(d + 2), "face entry has the wrong length");
            FaceWeight fw;
            fw.face.axis = jf[0].get<int>();
            for (int a = 0; a < d; ++a) fw.face.lower[a] = jf[1 + a].get<int>();
            fw.weight = jf[static_cast<std::size_t>(d + 1)].get<double>();
            require(face_in_lattice(dec.spec, fw.face), "face outside the grid's face lattice");
            e.atom.faces.push_back(fw);
        }
        dec.entries.push_back(std::move(e));
    }
    dec.summary = summary_from_json(j.at("summary"), d);
    return dec;
}

inline json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError(path + ": cannot open file");
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

}  // namespace bvatoms
