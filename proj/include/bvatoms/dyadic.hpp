#pragma once
// Dyadic cubes anchored at the lowest corner of the grid extent. Level-0
// cubes are grid cells; a level-j cube with lattice coordinates k covers the
// cells [k 2^j, (k+1) 2^j) along every used axis.

#include <cmath>
#include <compare>
#include <string>

#include "bvatoms/grid.hpp"

namespace bvatoms {

struct CellBox {
    Cell lo{};
    Cell hi{};  // exclusive

    bool contains(const Cell& c) const {
        for (int a = 0; a < kMaxDim; ++a)
            if (c[a] < lo[a] || c[a] >= hi[a]) return false;
        return true;
    }

    /// Intersection with the grid extent (may be empty).
    CellBox clipped(const GridSpec& s) const {
        CellBox b;
        for (int a = 0; a < kMaxDim; ++a) {
            b.lo[a] = std::max(lo[a], 0);
            b.hi[a] = std::min(hi[a], s.extent[a]);
            if (b.hi[a] < b.lo[a]) b.hi[a] = b.lo[a];
        }
        return b;
    }

    bool empty() const {
        for (int a = 0; a < kMaxDim; ++a)
            if (hi[a] <= lo[a]) return true;
        return false;
    }
};

/// Axis-parallel cube in physical coordinates.
struct PhysicalCube {
    Point lo{};
    double side = 0.0;

    bool contains(const Point& p, int dim, double slack = 0.0) const {
        for (int a = 0; a < dim; ++a)
            if (p[a] < lo[a] - slack || p[a] > lo[a] + side + slack) return false;
        return true;
    }
    Point center(int dim) const {
        Point c{0.0, 0.0, 0.0};
        for (int a = 0; a < dim; ++a) c[a] = lo[a] + 0.5 * side;
        return c;
    }
};

struct DyadicCube {
    int level = 0;
    Cell coords{};

    int cells_per_side() const { return 1 << level; }
    double side(const GridSpec& s) const { return s.h * static_cast<double>(cells_per_side()); }

    CellBox box(int dim) const {
        CellBox b;
        const int n = cells_per_side();
        for (int a = 0; a < kMaxDim; ++a) {
            if (a < dim) {
                b.lo[a] = coords[a] * n;
                b.hi[a] = b.lo[a] + n;
            } else {
                b.lo[a] = 0;
                b.hi[a] = 1;
            }
        }
        return b;
    }

    bool contains(const Cell& c, int dim) const { return box(dim).contains(c); }

    /// True iff `other` is this cube or one of its descendants.
    bool contains(const DyadicCube& other, int dim) const {
        if (other.level > level) return false;
        const int shift = level - other.level;
        for (int a = 0; a < dim; ++a)
            if ((other.coords[a] >> shift) != coords[a]) return false;
        return true;
    }

    DyadicCube parent(int dim) const {
        DyadicCube p{level + 1, coords};
        for (int a = 0; a < dim; ++a) p.coords[a] = coords[a] >> 1;  // arithmetic shift floors
        return p;
    }

    static DyadicCube of_cell(const Cell& c, int level, int dim) {
        DyadicCube q{level, {0, 0, 0}};
        for (int a = 0; a < dim; ++a) q.coords[a] = c[a] >> level;
        return q;
    }

    PhysicalCube physical(const GridSpec& s) const {
        PhysicalCube p;
        const auto b = box(s.dim);
        for (int a = 0; a < s.dim; ++a) p.lo[a] = s.origin[a] + b.lo[a] * s.h;
        p.side = side(s);
        return p;
    }

    /// The concentric cube of twice the side (2Q); not dyadic in general.
    PhysicalCube doubled(const GridSpec& s) const {
        PhysicalCube p = physical(s);
        for (int a = 0; a < s.dim; ++a) p.lo[a] -= 0.5 * p.side;
        p.side *= 2.0;
        return p;
    }

    /// Recovers the dyadic cube with the given physical lower corner and side;
    /// rejects anything not on the dyadic lattice of `s`.
    static DyadicCube from_physical(const GridSpec& s, const Point& lo, double side) {
        const double cells = side / s.h;
        const double rc = std::round(cells);
        require(rc >= 1.0 && std::abs(cells - rc) <= 1e-9 * rc, "cube side is not a whole number of cells");
        const auto n = static_cast<long long>(rc);
        require((n & (n - 1)) == 0, "cube side is not a power-of-two number of cells");
        int level = 0;
        while ((1LL << level) < n) ++level;
        DyadicCube q{level, {0, 0, 0}};
        for (int a = 0; a < s.dim; ++a) {
            const double k = (lo[a] - s.origin[a]) / side;
            const double rk = std::round(k);
            require(std::abs(k - rk) <= 1e-9 * std::max(1.0, std::abs(rk)),
                    "cube corner is misaligned with the dyadic lattice");
            q.coords[a] = static_cast<int>(rk);
        }
        return q;
    }

    auto operator<=>(const DyadicCube&) const = default;
};

/// Output order of boxing decompositions: level descending, then coordinates.
inline bool boxing_order(const DyadicCube& a, const DyadicCube& b) {
    if (a.level != b.level) return a.level > b.level;
    return a.coords < b.coords;
}

struct DyadicSystem {
    GridSpec spec;
    int max_level = 0;

    /// Smallest J with 2^{J d} > 2 |U|, so every level-J cube has density < 1/2.
    static DyadicSystem for_count(const GridSpec& s, std::size_t cells_in_set) {
        DyadicSystem sys{s, 0};
        while (true) {
            const double vol = std::ldexp(1.0, sys.max_level * s.dim);
            if (vol > 2.0 * static_cast<double>(cells_in_set)) break;
            ++sys.max_level;
        }
        return sys;
    }
};

enum class Attribution { closed, lower_cell };

/// |m|(Q) with the requested face attribution.
inline double measure_on_cube(const VectorFaceMeasure& m, const DyadicCube& q, Attribution attr) {
    require(q.level >= 0 && q.level < 30, "cube level out of range");
    const int d = m.spec().dim;
    const CellBox b = q.box(d);
    CompensatedSum s;
    for (int l = 0; l < d; ++l) {
        for (const auto& fw : m.component(l)) {
            bool in = b.contains(fw.face.lower);
            if (!in && attr == Attribution::closed) in = b.contains(fw.face.upper());
            if (in) s.add(std::abs(fw.weight));
        }
    }
    return s.value();
}

/// |D chi_E|(closed Q) without materialising D chi_E: counts faces with at
/// least one adjacent cell in Q across which membership in E changes.
inline double boundary_mass_closed(const CellSet& e, const DyadicCube& q) {
    const GridSpec& s = e.spec();
    const int d = s.dim;
    const CellBox b = q.box(d);
    // Cells of Q more than one step outside the extent see no jumps.
    CellBox scan;
    for (int a = 0; a < kMaxDim; ++a) {
        if (a < d) {
            scan.lo[a] = std::max(b.lo[a], -1);
            scan.hi[a] = std::min(b.hi[a], s.extent[a] + 1);
        } else {
            scan.lo[a] = 0;
            scan.hi[a] = 1;
        }
    }
    if (scan.empty()) return 0.0;
    std::size_t jumps = 0;
    for_each_cell(scan.lo, scan.hi, [&](const Cell& c) {
        const bool here = e.contains(c);
        for (int l = 0; l < d; ++l) {
            if (here != e.contains(shifted(c, l, 1))) ++jumps;
            if (c[l] == b.lo[l] && here != e.contains(shifted(c, l, -1))) ++jumps;
        }
    });
    return static_cast<double>(jumps) * s.face_area();
}

}  // namespace bvatoms
