#pragma once
// Full decomposition: layers (exact or Riemann) -> dyadic boxing of every
// layer set -> one atom per (layer, cube, axis) with
//   lambda = sigma a C' |D chi_Omega|(closed Q),
//   mu     = [D chi_{Omega ∩ Q}]_l / (C' |D chi_Omega|(closed Q)).
// One lambda is shared by the d atoms of a (layer, cube) pair; the l1 budget
// counts it once.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "bvatoms/atoms.hpp"
#include "bvatoms/coarea.hpp"
#include "bvatoms/parallel.hpp"

namespace bvatoms {

struct Mode {
    enum class Kind { exact, riemann };
    Kind kind = Kind::exact;
    int n = 0;
    SamplingScheme scheme = SamplingScheme::uniform;

    static Mode exact() { return {}; }
    static Mode riemann(int n, SamplingScheme s = SamplingScheme::uniform) { return {Kind::riemann, n, s}; }
    bool is_exact() const { return kind == Kind::exact; }
};

struct CprimePolicy {
    std::optional<double> fixed;  // empty: choose from the largest observed boxing constant

    static CprimePolicy automatic() { return {}; }
    static CprimePolicy fixed_value(double c) { return {c}; }
};

struct LayerInfo {
    int sigma = 1;
    double a = 0.0;
    double t = 0.0;
    double perimeter = 0.0;
    std::size_t cells = 0;
    std::size_t cubes = 0;
    double boxing_constant = 0.0;
};

struct Entry {
    double lambda = 0.0;
    Atom atom;
};

struct TestField {
    std::string name;
    std::function<Point(const Point&)> eval;
    double sup_norm = 1.0;
};

struct WeakStarResidual {
    std::string field;
    double residual = 0.0;
};

struct Budget {
    double sum_abs_lambda = 0.0;
    double tv = 0.0;
    double ratio = 0.0;
};

struct Summary {
    double tv = 0.0;
    double layered_perimeter = 0.0;  // sum a_i per(Omega_i)
    double sum_abs_lambda = 0.0;
    std::array<double, kMaxDim> sum_abs_lambda_component{0.0, 0.0, 0.0};
    double ratio = 0.0;
    double max_boxing_constant = 0.0;
    double closed_overcount = 0.0;   // sum of closed cube masses / sum of perimeters (a-weighted)
    double reconstruction_residual = 0.0;
    std::vector<WeakStarResidual> weak_star;
    std::size_t atoms = 0;
};

struct Decomposition {
    GridSpec spec;
    std::string digest;
    Mode mode;
    double cprime = 1.0;
    std::vector<LayerInfo> layers;
    std::vector<Entry> entries;
    Summary summary;
};

/// FNV-1a over the grid description and the bit patterns of the values.
inline std::string grid_digest(const GridFunction& u) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    };
    const GridSpec& s = u.spec();
    const std::int64_t head[4] = {s.dim, s.extent[0], s.extent[1], s.extent[2]};
    mix(head, sizeof head);
    mix(&s.h, sizeof s.h);
    mix(s.origin.data(), sizeof(double) * kMaxDim);
    for (double v : u.values()) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        mix(&bits, sizeof bits);
    }
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = hex[h & 15u];
    return out;
}

/// Constant coordinate fields, separable sinusoids at three frequencies and
/// a Gaussian bump, all with sup norm <= 1 on the grid's physical box.
inline std::vector<TestField> builtin_fields(const GridSpec& s) {
    std::vector<TestField> f;
    const int d = s.dim;
    Point len{1.0, 1.0, 1.0};
    Point mid{0.0, 0.0, 0.0};
    for (int a = 0; a < d; ++a) {
        len[a] = s.extent[a] * s.h;
        mid[a] = s.origin[a] + 0.5 * len[a];
    }
    for (int l = 0; l < d; ++l)
        f.push_back({"const_e" + std::to_string(l + 1), [l](const Point&) {
                         Point p{0.0, 0.0, 0.0};
                         p[l] = 1.0;
                         return p;
                     }});
    for (int k : {1, 2, 4}) {
        f.push_back({"sin_k" + std::to_string(k), [k, d, len, s](const Point& x) {
                         Point p{0.0, 0.0, 0.0};
                         for (int l = 0; l < d; ++l) {
                             double v = 1.0;
                             for (int a = 0; a < d; ++a)
                                 v *= std::sin(2.0 * std::numbers::pi * k * (x[a] - s.origin[a]) / len[a] +
                                               0.3 * (l + 1) + 0.7 * a);
                             p[l] = v;
                         }
                         return p;
                     }});
    }
    double width = 0.0;
    for (int a = 0; a < d; ++a) width = std::max(width, 0.25 * len[a]);
    f.push_back({"bump", [d, mid, width](const Point& x) {
                     double r2 = 0.0;
                     for (int a = 0; a < d; ++a) r2 += (x[a] - mid[a]) * (x[a] - mid[a]);
                     const double g = std::exp(-r2 / (2.0 * width * width));
                     Point p{0.0, 0.0, 0.0};
                     for (int l = 0; l < d; ++l) p[l] = g * (l + 1) / d;
                     return p;
                 }});
    return f;
}

inline std::vector<Layer> make_layers(const GridFunction& u, const Mode& mode) {
    return mode.is_exact() ? exact_layers(u) : riemann_sample(u, mode.n, mode.scheme);
}

/// sum lambda mu, assembled per component.
inline VectorFaceMeasure reconstruct(const Decomposition& dec) {
    DenseFaceField acc(dec.spec);
    for (const auto& e : dec.entries)
        for (const auto& fw : e.atom.faces) acc.add(fw.face, e.lambda * fw.weight);
    return VectorFaceMeasure::from_dense(acc);
}

inline std::vector<WeakStarResidual> weak_star_test(const Decomposition& dec, const VectorFaceMeasure& du,
                                                    const std::vector<TestField>& fields) {
    const double tv = total_variation(du);
    std::vector<WeakStarResidual> out;
    for (const auto& f : fields) {
        const double lhs = pair(du, f.eval);
        CompensatedSum rhs;
        for (const auto& e : dec.entries) {
            CompensatedSum p;
            for (const auto& fw : e.atom.faces) p.add(fw.weight * f.eval(face_center(dec.spec, fw.face))[fw.face.axis]);
            rhs.add(e.lambda * p.value());
        }
        out.push_back({f.name, std::abs(lhs - rhs.value()) / (1.0 + f.sup_norm * tv)});
    }
    return out;
}

inline Budget l1_budget(const Decomposition& dec) {
    Budget b;
    CompensatedSum s;
    for (const auto& e : dec.entries)
        if (e.atom.axis == 0) s.add(std::abs(e.lambda));
    b.sum_abs_lambda = s.value();
    b.tv = dec.summary.tv;
    b.ratio = b.tv > 0.0 ? b.sum_abs_lambda / b.tv : 0.0;
    return b;
}

struct DecomposeOptions {
    unsigned threads = 1;
    bool weak_star = true;
};

inline constexpr double kExactReconstructionTolerance = 1e-10;

inline Decomposition decompose(const GridFunction& u, const Mode& mode, const CprimePolicy& policy = {},
                               const DecomposeOptions& opt = {}) {
    require(!u.is_zero(), "cannot decompose the zero function");
    if (!mode.is_exact()) require(mode.n >= 1, "riemann mode needs n >= 1");
    if (policy.fixed) require(*policy.fixed > 0.0, "fixed C' must be positive");
    const GridSpec& s = u.spec();

    Decomposition dec;
    dec.spec = s;
    dec.digest = grid_digest(u);
    dec.mode = mode;

    const auto layers = make_layers(u, mode);
    const auto boxings = parallel_map(layers.size(), opt.threads, [&](std::size_t i) { return box_set(layers[i].omega); });

    double cmax = 0.0;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& L = layers[i];
        LayerInfo info;
        info.sigma = L.sigma;
        info.a = L.a;
        info.t = L.t;
        info.perimeter = perimeter(L.omega);
        info.cells = L.omega.count();
        info.cubes = boxings[i].cubes.size();
        info.boxing_constant = boxings[i].constant;
        cmax = std::max(cmax, info.boxing_constant);
        dec.layers.push_back(info);
    }
    dec.cprime = policy.fixed ? *policy.fixed : choose_cprime(cmax, s.dim);

    const auto per_layer = parallel_map(layers.size(), opt.threads, [&](std::size_t i) {
        std::vector<Entry> out;
        const auto& L = layers[i];
        for (const auto& bc : boxings[i].cubes) {
            auto [lambda_raw, atoms] = make_atoms(L.omega, bc.cube, dec.cprime, {static_cast<int>(i), static_cast<int>(i)});
            for (auto& a : atoms) out.push_back({L.sigma * L.a * lambda_raw, std::move(a)});
        }
        return out;
    });
    for (auto& v : per_layer)
        for (auto& e : v) dec.entries.push_back(std::move(e));

    Summary& sm = dec.summary;
    const VectorFaceMeasure du = gradient_measure(u);
    sm.tv = total_variation(du);
    sm.max_boxing_constant = cmax;
    sm.atoms = dec.entries.size();
    CompensatedSum lp, closed;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        lp.add(dec.layers[i].a * dec.layers[i].perimeter);
        for (const auto& bc : boxings[i].cubes) closed.add(dec.layers[i].a * bc.boundary_mass);
    }
    sm.layered_perimeter = lp.value();
    sm.closed_overcount = sm.layered_perimeter > 0.0 ? closed.value() / sm.layered_perimeter : 0.0;
    for (int l = 0; l < s.dim; ++l) {
        CompensatedSum c;
        for (const auto& e : dec.entries)
            if (e.atom.axis == l) c.add(std::abs(e.lambda));
        sm.sum_abs_lambda_component[l] = c.value();
    }
    const Budget b = l1_budget(dec);
    sm.sum_abs_lambda = b.sum_abs_lambda;
    sm.ratio = b.ratio;

    const VectorFaceMeasure rec = reconstruct(dec);
    sm.reconstruction_residual = sm.tv > 0.0 ? difference_variation(du, rec) / sm.tv : 0.0;
    if (opt.weak_star) sm.weak_star = weak_star_test(dec, du, builtin_fields(s));

    if (mode.is_exact())
        ensure(sm.reconstruction_residual <= kExactReconstructionTolerance,
               "exact-mode reconstruction residual " + std::to_string(sm.reconstruction_residual) +
                   " exceeds tolerance");
    return dec;
}

}  // namespace bvatoms
