#pragma once
// Shared helpers for the test suites: random inputs and brute-force oracles
// written independently of the library's own loops.

#include <cmath>
#include <map>
#include <tuple>
#include <vector>

#include "bvatoms/bvatoms.hpp"

namespace bvt {

using namespace bvatoms;

inline GridFunction random_function(const GridSpec& s, Rng& rng, int lo = -3, int hi = 3, double zero_p = 0.3) {
    std::vector<double> v(s.num_cells());
    for (auto& x : v) x = rng.uniform() < zero_p ? 0.0 : static_cast<double>(rng.integer(lo, hi));
    return GridFunction(s, std::move(v));
}

inline CellSet random_set(const GridSpec& s, Rng& rng, double p = 0.4) {
    CellSet e(s);
    for (std::size_t i = 0; i < s.num_cells(); ++i) e.set_index(i, rng.uniform() < p);
    if (e.empty()) e.set_index(0, true);
    return e;
}

inline CellSet set_from_mask(const GridSpec& s, std::uint64_t mask) {
    CellSet e(s);
    for (std::size_t i = 0; i < s.num_cells(); ++i) e.set_index(i, (mask >> i) & 1u);
    return e;
}

/// Oracle: every face of the extended lattice by explicit coordinates,
/// keyed (axis, x, y, z); values outside the extent read as zero.
inline std::map<std::tuple<int, int, int, int>, double> brute_force_faces(const GridFunction& u) {
    const GridSpec& s = u.spec();
    auto value = [&](int x, int y, int z) {
        if (x < 0 || y < 0 || z < 0 || x >= s.extent[0] || y >= s.extent[1] || z >= s.extent[2]) return 0.0;
        return u.values()[(static_cast<std::size_t>(x) * s.extent[1] + y) * s.extent[2] + z];
    };
    std::map<std::tuple<int, int, int, int>, double> faces;
    const double area = std::pow(s.h, s.dim - 1);
    for (int l = 0; l < s.dim; ++l)
        for (int x = -1; x <= s.extent[0]; ++x)
            for (int y = -1; y <= s.extent[1]; ++y)
                for (int z = (s.dim == 3 ? -1 : 0); z <= (s.dim == 3 ? s.extent[2] : 0); ++z) {
                    const int dx = l == 0, dy = l == 1, dz = l == 2;
                    const double jump = value(x + dx, y + dy, z + dz) - value(x, y, z);
                    if (jump != 0.0) faces[{l, x, y, z}] = jump * area;
                }
    return faces;
}

inline double brute_force_tv(const GridFunction& u) {
    double tv = 0.0;
    for (const auto& [k, w] : brute_force_faces(u)) tv += std::abs(w);
    return tv;
}

inline std::map<std::tuple<int, int, int, int>, double> as_map(const VectorFaceMeasure& m) {
    std::map<std::tuple<int, int, int, int>, double> out;
    for (int l = 0; l < m.spec().dim; ++l)
        for (const auto& fw : m.component(l))
            out[{l, fw.face.lower[0], fw.face.lower[1], fw.face.lower[2]}] += fw.weight;
    return out;
}

/// Sum over several measures on one grid, canonical.
inline VectorFaceMeasure sum_measures(const GridSpec& s, const std::vector<std::pair<double, VectorFaceMeasure>>& parts) {
    DenseFaceField acc(s);
    for (const auto& [c, m] : parts) m.accumulate_into(acc, c);
    return VectorFaceMeasure::from_dense(acc);
}

/// C-infinity bump exp(1 - 1/(1 - r^2/R^2)) centred in the unit square,
/// radius 0.35, sampled at cell centres; optionally quantised to `levels`.
inline GridFunction smooth_bump(int n, int levels = 0) {
    const auto s = GridSpec::square(n, 1.0 / n);
    GridFunction u(s);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const auto c = s.cell_center({i, j, 0});
            const double r2 = ((c[0] - 0.5) * (c[0] - 0.5) + (c[1] - 0.5) * (c[1] - 0.5)) / (0.35 * 0.35);
            double v = r2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
            if (levels > 0) v = std::round(v * levels) / levels;
            u.set({i, j, 0}, v);
        }
    return u;
}

}  // namespace bvt
