#pragma once
// Normalised (d-1)-atoms mu = [D chi_{Omega ∩ Q}]_l / (C' |D chi_Omega|(closed Q))
// supported in the doubled cube 2Q, and the numerical check of the four atom
// conditions: support, cancellation, heat-semigroup size, unit mass.

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "bvatoms/boxing.hpp"
#include "bvatoms/heat.hpp"

namespace bvatoms {

struct Provenance {
    int layer = -1;
    int set_id = -1;
};

struct Atom {
    int axis = 0;
    DyadicCube cube;                 // Q
    PhysicalCube support;            // S = 2Q
    std::vector<FaceWeight> faces;   // single component, canonical order
    double cprime = 1.0;
    double boundary_mass = 0.0;      // |D chi_Omega|(closed Q)
    Provenance provenance;
};

struct AtomReport {
    bool support_ok = false;
    bool cancellation_ok = false;
    bool heat_ok = false;
    bool mass_ok = false;
    bool heat_stable = true;       // refinement study, when requested
    double mass = 0.0;             // |mu|(R^d)
    double signed_mass = 0.0;
    double heat_sup = 0.0;
    double heat_budget = 0.0;      // 1 / side(S)^{d-1}
    double heat_margin = 0.0;      // heat_sup / heat_budget
    double heat_movement = 0.0;
    double product_bound = 0.0;    // (M + 2d side(Q)^{d-1}) / (C' M)

    bool all_ok() const { return support_ok && cancellation_ok && heat_ok && mass_ok && heat_stable; }
};

inline constexpr double kCprimeSlack = 0.05;
inline constexpr double kHeatTolerance = 1e-6;
inline constexpr double kCancellationTolerance = 1e-12;

/// C' = max(1 + C, C 2^{d-1} K_d) (1 + 5%).
inline double choose_cprime(double c_box, int dim) {
    require(c_box > 0.0, "boxing constant must be positive");
    const double heat_term = c_box * std::ldexp(1.0, dim - 1) * grad_heat_l1_unit(dim);
    return std::max(1.0 + c_box, heat_term) * (1.0 + kCprimeSlack);
}

/// Faces of D chi_{Omega ∩ Q} grouped by axis, in canonical order.
inline std::array<std::vector<FaceWeight>, kMaxDim> restricted_gradient(const CellSet& omega, const DyadicCube& q) {
    const GridSpec& s = omega.spec();
    const int d = s.dim;
    const CellBox box = q.box(d);
    const CellBox b = box.clipped(s);
    const double area = s.face_area();
    std::array<std::vector<FaceWeight>, kMaxDim> out;
    if (b.empty()) return out;
    auto inside = [&](const Cell& c) { return box.contains(c) && omega.contains(c); };
    for_each_cell(b.lo, b.hi, [&](const Cell& c) {
        if (!omega.contains(c)) return;
        for (int l = 0; l < d; ++l) {
            const Cell below = shifted(c, l, -1);
            if (!inside(below)) out[l].push_back({Face{l, below}, area});
            if (!inside(shifted(c, l, 1))) out[l].push_back({Face{l, c}, -area});
        }
    });
    for (int l = 0; l < d; ++l)
        std::sort(out[l].begin(), out[l].end(), [](const FaceWeight& x, const FaceWeight& y) { return x.face < y.face; });
    return out;
}

/// One atom per axis for the pair (Omega, Q). Returns lambda_raw = C' M and
/// the atoms; lambda_raw * atom = [D chi_{Omega ∩ Q}]_l.
inline std::pair<double, std::vector<Atom>> make_atoms(const CellSet& omega, const DyadicCube& q, double cprime,
                                                       Provenance prov = {}) {
    require(cprime > 0.0, "C' must be positive");
    const GridSpec& s = omega.spec();
    const double mass = boundary_mass_closed(omega, q);
    require(mass > 0.0, "cube carries no boundary mass of the set");
    auto grad = restricted_gradient(omega, q);
    const double lambda_raw = cprime * mass;
    const double unit = s.face_area() / lambda_raw;
    std::vector<Atom> atoms;
    for (int l = 0; l < s.dim; ++l) {
        Atom a;
        a.axis = l;
        a.cube = q;
        a.support = q.doubled(s);
        a.cprime = cprime;
        a.boundary_mass = mass;
        a.provenance = prov;
        a.faces = std::move(grad[l]);
        for (auto& fw : a.faces) fw.weight = fw.weight > 0.0 ? unit : -unit;
        atoms.push_back(std::move(a));
    }
    return {lambda_raw, std::move(atoms)};
}

inline std::pair<double, Atom> make_atom(const CellSet& omega, const DyadicCube& q, int axis, double cprime) {
    require(axis >= 0 && axis < omega.spec().dim, "axis out of range");
    auto [lambda_raw, atoms] = make_atoms(omega, q, cprime);
    return {lambda_raw, std::move(atoms[axis])};
}

inline double atom_mass(const Atom& a) {
    CompensatedSum s;
    for (const auto& fw : a.faces) s.add(std::abs(fw.weight));
    return s.value();
}

inline double atom_signed_mass(const Atom& a) {
    CompensatedSum s;
    for (const auto& fw : a.faces) s.add(fw.weight);
    return s.value();
}

/// Closed face rectangle contained in the closed support cube.
inline bool face_inside(const GridSpec& s, const Face& f, const PhysicalCube& cube) {
    const Point c = face_center(s, f);
    const double slack = 1e-9 * s.h;
    for (int a = 0; a < s.dim; ++a) {
        const double half = a == f.axis ? 0.0 : 0.5 * s.h;
        if (c[a] - half < cube.lo[a] - slack || c[a] + half > cube.lo[a] + cube.side + slack) return false;
    }
    return true;
}

struct VerifyOptions {
    std::optional<HeatEvalPlan> plan;  // default: HeatEvalPlan::standard(h, side(S))
    bool refinement_study = false;
    bool heat = true;
};

inline AtomReport verify_atom(const GridSpec& s, const Atom& a, const VerifyOptions& opt = {}) {
    AtomReport r;
    r.support_ok = std::all_of(a.faces.begin(), a.faces.end(),
                               [&](const FaceWeight& fw) { return face_inside(s, fw.face, a.support); });
    r.mass = atom_mass(a);
    r.signed_mass = atom_signed_mass(a);
    r.cancellation_ok = std::abs(r.signed_mass) <= kCancellationTolerance * r.mass;
    r.mass_ok = r.mass <= 1.0 + 1e-12;

    const double side_s = a.support.side;
    const double side_q = a.cube.side(s);
    r.heat_budget = 1.0 / std::pow(side_s, s.dim - 1);
    if (a.boundary_mass > 0.0)
        r.product_bound = (a.boundary_mass + 2.0 * s.dim * std::pow(side_q, s.dim - 1)) / (a.cprime * a.boundary_mass);

    if (!opt.heat) {
        r.heat_ok = true;
        return r;
    }
    const HeatEvalPlan plan = opt.plan.value_or(HeatEvalPlan::standard(s.h, side_s));
    HeatSup sup;
    if (opt.refinement_study) {
        const auto study = heat_sup_study(s, a.faces, a.support, plan);
        sup = study.base;
        r.heat_movement = study.movement;
        r.heat_stable = study.stable;
    } else {
        sup = heat_sup(s, a.faces, a.support, plan);
    }
    r.heat_sup = sup.value;
    r.heat_margin = sup.value / r.heat_budget;
    r.heat_ok = sup.value <= r.heat_budget * (1.0 + kHeatTolerance) + sup.allowance;
    return r;
}

}  // namespace bvatoms
