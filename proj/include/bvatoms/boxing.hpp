#pragma once
// Dyadic boxing of a bounded cell set: every cell x of U stops at the parent
// of the largest ancestor chain prefix whose density stays >= 1/2; the
// maximal stopping cubes partition U, and each has boundary mass at least
// proportional to side^{d-1}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bvatoms/dyadic.hpp"

namespace bvatoms {

/// Summed-volume table of a cell set; counts in any box in O(1).
class PrefixCount {
public:
    explicit PrefixCount(const CellSet& u) : spec_(u.spec()) {
        for (int a = 0; a < kMaxDim; ++a) stride_[a] = spec_.extent[a] + 1;
        table_.assign(static_cast<std::size_t>(stride_[0]) * stride_[1] * stride_[2], 0);
        const auto& e = spec_.extent;
        for (int i = 0; i < e[0]; ++i)
            for (int j = 0; j < e[1]; ++j)
                for (int k = 0; k < e[2]; ++k) {
                    const std::int64_t v = u.contains_index(spec_.linear({i, j, k})) ? 1 : 0;
                    at(i + 1, j + 1, k + 1) = v + at(i, j + 1, k + 1) + at(i + 1, j, k + 1) +
                                              at(i + 1, j + 1, k) - at(i, j, k + 1) - at(i, j + 1, k) -
                                              at(i + 1, j, k) + at(i, j, k);
                }
    }

    /// Number of set cells inside the box (clipped to the extent).
    std::int64_t count(const CellBox& box) const {
        const CellBox b = box.clipped(spec_);
        if (b.empty()) return 0;
        const auto& l = b.lo;
        const auto& h = b.hi;
        return at(h[0], h[1], h[2]) - at(l[0], h[1], h[2]) - at(h[0], l[1], h[2]) - at(h[0], h[1], l[2]) +
               at(l[0], l[1], h[2]) + at(l[0], h[1], l[2]) + at(h[0], l[1], l[2]) - at(l[0], l[1], l[2]);
    }

private:
    std::int64_t& at(int i, int j, int k) {
        return table_[(static_cast<std::size_t>(i) * stride_[1] + j) * stride_[2] + k];
    }
    std::int64_t at(int i, int j, int k) const {
        return table_[(static_cast<std::size_t>(i) * stride_[1] + j) * stride_[2] + k];
    }

    GridSpec spec_;
    std::array<int, kMaxDim> stride_{};
    std::vector<std::int64_t> table_;
};

struct BoxedCube {
    DyadicCube cube;
    std::int64_t cells = 0;       // |U ∩ Q| in cells
    double density = 0.0;
    double boundary_mass = 0.0;   // |D chi_U|(closed Q)
    double ratio = 0.0;           // side^{d-1} / boundary_mass
};

struct Boxing {
    DyadicSystem system;
    std::vector<BoxedCube> cubes;  // level descending, then coordinates
    double constant = 0.0;         // max ratio
    bool partition_ok = false;
};

/// Density queries and stopping-time walks for one set.
class Boxer {
public:
    explicit Boxer(const CellSet& u)
        : set_(&u), count_(u), system_(DyadicSystem::for_count(u.spec(), u.count())) {}

    const DyadicSystem& system() const { return system_; }

    std::int64_t cells_in(const DyadicCube& q) const { return count_.count(q.box(set_->spec().dim)); }

    double density(const DyadicCube& q) const {
        return static_cast<double>(cells_in(q)) / std::ldexp(1.0, q.level * set_->spec().dim);
    }

    /// Exact test of |U ∩ Q| / |Q| < 1/2 in integer arithmetic.
    bool below_half(const DyadicCube& q) const {
        const int bits = q.level * set_->spec().dim;
        if (bits >= 62) return true;
        return 2 * cells_in(q) < (std::int64_t{1} << bits);
    }

    DyadicCube stop_cube(const Cell& x) const {
        require(set_->contains(x), "stop_cube: cell is not in the set");
        const int d = set_->spec().dim;
        DyadicCube cur = DyadicCube::of_cell(x, 0, d);
        while (true) {
            const DyadicCube up = cur.parent(d);
            ensure(up.level <= system_.max_level, "stopping walk exceeded the dyadic system height");
            if (below_half(up)) return up;
            cur = up;
        }
    }

private:
    const CellSet* set_;
    PrefixCount count_;
    DyadicSystem system_;
};

inline double density(const CellSet& u, const DyadicCube& q) { return Boxer(u).density(q); }

inline DyadicCube stop_cube(const Cell& x, const CellSet& u) { return Boxer(u).stop_cube(x); }

/// side^{d-1} / |D chi_U|(closed Q).
inline double size_ratio(const CellSet& u, const DyadicCube& q) {
    const GridSpec& s = u.spec();
    const double mass = boundary_mass_closed(u, q);
    ensure(mass > 0.0, "boxing cube carries no boundary mass");
    return std::pow(q.side(s), s.dim - 1) / mass;
}

/// Full boxing with per-cube diagnostics; throws InvariantViolation if the
/// result is not an exact partition of U.
inline Boxing box_set(const CellSet& u) {
    require(!u.empty(), "boxing needs a nonempty set");
    const GridSpec& s = u.spec();
    const int d = s.dim;
    const Boxer boxer(u);

    std::vector<DyadicCube> candidates;
    for (const Cell& x : u.cells()) candidates.push_back(boxer.stop_cube(x));
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::vector<DyadicCube> maximal;
    for (const auto& q : candidates) {
        bool covered = false;
        for (DyadicCube up = q.parent(d); up.level <= boxer.system().max_level; up = up.parent(d)) {
            if (std::binary_search(candidates.begin(), candidates.end(), up)) {
                covered = true;
                break;
            }
        }
        if (!covered) maximal.push_back(q);
    }
    std::sort(maximal.begin(), maximal.end(), boxing_order);

    Boxing out;
    out.system = boxer.system();
    // Exact partition: every U cell is owned by exactly one cube.
    std::vector<std::uint8_t> owners(s.num_cells(), 0);
    std::int64_t total = 0;
    bool ok = true;
    for (const auto& q : maximal) {
        BoxedCube bc;
        bc.cube = q;
        bc.cells = boxer.cells_in(q);
        bc.density = boxer.density(q);
        bc.boundary_mass = boundary_mass_closed(u, q);
        ensure(bc.boundary_mass > 0.0, "boxing cube carries no boundary mass");
        bc.ratio = std::pow(q.side(s), d - 1) / bc.boundary_mass;
        out.constant = std::max(out.constant, bc.ratio);
        total += bc.cells;
        const CellBox b = q.box(d).clipped(s);
        if (!b.empty())
            for_each_cell(b.lo, b.hi, [&](const Cell& c) {
                const std::size_t i = s.linear(c);
                if (u.contains_index(i) && ++owners[i] > 1) ok = false;
            });
        if (bc.cells == 0) ok = false;
        out.cubes.push_back(bc);
    }
    if (total != static_cast<std::int64_t>(u.count())) ok = false;
    for (std::size_t i = 0; i < owners.size() && ok; ++i)
        if (u.contains_index(i) && owners[i] != 1) ok = false;
    out.partition_ok = ok;
    ensure(ok, "boxing cubes do not partition the set");
    return out;
}

inline std::vector<DyadicCube> boxing_decompose(const CellSet& u) {
    std::vector<DyadicCube> cubes;
    for (const auto& bc : box_set(u).cubes) cubes.push_back(bc.cube);
    return cubes;
}

inline double boxing_constant(const CellSet& u, const std::vector<DyadicCube>& cubes) {
    double c = 0.0;
    for (const auto& q : cubes) c = std::max(c, size_ratio(u, q));
    return c;
}

/// chi_{U ∩ Q} as a cell set.
inline CellSet restrict_to(const CellSet& u, const DyadicCube& q) {
    CellSet r(u.spec());
    const CellBox b = q.box(u.spec().dim).clipped(u.spec());
    if (!b.empty())
        for_each_cell(b.lo, b.hi, [&](const Cell& c) {
            if (u.contains(c)) r.insert(c);
        });
    return r;
}

}  // namespace bvatoms
