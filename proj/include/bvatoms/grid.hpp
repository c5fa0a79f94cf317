#pragma once
// Discrete substrate: uniform grids, grid functions, cell sets and
// face-supported vector measures (the discrete Du and D chi_E).
//
// Conventions used everywhere in the library:
//  * cell (i_1..i_d) occupies origin + [i h, (i+1) h) per axis;
//  * values outside the extent are zero (compact support);
//  * the face (l, x) separates cell x from x + e_l and carries the forward
//    difference (u(x + e_l) - u(x)) h^{d-1};
//  * sparse face lists are kept in canonical (axis, lexicographic lower cell)
//    order, which is also the order of face_key().

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bvatoms/errors.hpp"

namespace bvatoms {

inline constexpr int kMaxDim = 3;

using Cell = std::array<int, kMaxDim>;
using Point = std::array<double, kMaxDim>;

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct GridSpec {
    int dim = 2;
    std::array<int, kMaxDim> extent{1, 1, 1};
    double h = 1.0;
    Point origin{0.0, 0.0, 0.0};

    static GridSpec make(int d, std::array<int, kMaxDim> n, double h = 1.0,
                         Point origin = {0.0, 0.0, 0.0}) {
        GridSpec s;
        s.dim = d;
        s.extent = n;
        s.h = h;
        s.origin = origin;
        if (d == 2) {
            s.extent[2] = 1;
            s.origin[2] = 0.0;
        }
        s.validate();
        return s;
    }
    static GridSpec square(int n, double h = 1.0) { return make(2, {n, n, 1}, h); }
    static GridSpec cube(int n, double h = 1.0) { return make(3, {n, n, n}, h); }

    void validate() const {
        require(dim == 2 || dim == 3, "grid dimension must be 2 or 3, got " + std::to_string(dim));
        for (int a = 0; a < dim; ++a)
            require(extent[a] >= 1, "grid extent must be >= 1 along every axis");
        require(dim == 3 || extent[2] == 1, "2-d grids carry extent 1 on the unused axis");
        require(std::isfinite(h) && h > 0.0, "grid spacing h must be positive and finite");
        for (int a = 0; a < dim; ++a)
            require(std::isfinite(origin[a]), "grid origin must be finite");
    }

    std::size_t num_cells() const {
        return static_cast<std::size_t>(extent[0]) * static_cast<std::size_t>(extent[1]) *
               static_cast<std::size_t>(extent[2]);
    }

    bool contains(const Cell& c) const {
        for (int a = 0; a < kMaxDim; ++a)
            if (c[a] < 0 || c[a] >= extent[a]) return false;
        return true;
    }

    std::size_t linear(const Cell& c) const {
        return (static_cast<std::size_t>(c[0]) * static_cast<std::size_t>(extent[1]) +
                static_cast<std::size_t>(c[1])) *
                   static_cast<std::size_t>(extent[2]) +
               static_cast<std::size_t>(c[2]);
    }

    Cell cell_at(std::size_t idx) const {
        Cell c{};
        c[2] = static_cast<int>(idx % static_cast<std::size_t>(extent[2]));
        idx /= static_cast<std::size_t>(extent[2]);
        c[1] = static_cast<int>(idx % static_cast<std::size_t>(extent[1]));
        c[0] = static_cast<int>(idx / static_cast<std::size_t>(extent[1]));
        return c;
    }

    /// h^{d-1}: the measure of one face.
    double face_area() const { return dim == 2 ? h : h * h; }
    /// h^d: the measure of one cell.
    double cell_volume() const { return dim == 2 ? h * h : h * h * h; }

    Point cell_center(const Cell& c) const {
        Point p{0.0, 0.0, 0.0};
        for (int a = 0; a < dim; ++a) p[a] = origin[a] + (c[a] + 0.5) * h;
        return p;
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Visits every cell of the half-open box [lo, hi) in row-major order.
template <class Fn>
void for_each_cell(const Cell& lo, const Cell& hi, Fn&& fn) {
    Cell c{};
    for (c[0] = lo[0]; c[0] < hi[0]; ++c[0])
        for (c[1] = lo[1]; c[1] < hi[1]; ++c[1])
            for (c[2] = lo[2]; c[2] < hi[2]; ++c[2]) fn(c);
}

inline Cell shifted(Cell c, int axis, int delta) {
    c[axis] += delta;
    return c;
}

class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(GridSpec spec) : spec_(spec), values_(spec.num_cells(), 0.0) {
        spec_.validate();
    }
    GridFunction(GridSpec spec, std::vector<double> values) : spec_(spec), values_(std::move(values)) {
        spec_.validate();
        require(values_.size() == spec_.num_cells(), "grid function value count does not match extent");
        for (double v : values_) require(std::isfinite(v), "grid function values must be finite");
    }

    const GridSpec& spec() const { return spec_; }
    const std::vector<double>& values() const { return values_; }

    double at(const Cell& c) const { return spec_.contains(c) ? values_[spec_.linear(c)] : 0.0; }
    double operator[](std::size_t i) const { return values_[i]; }

    void set(const Cell& c, double v) {
        require(spec_.contains(c), "cell outside the grid extent");
        require(std::isfinite(v), "grid function values must be finite");
        values_[spec_.linear(c)] = v;
    }

    bool is_zero() const {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
    }

    GridFunction scaled(double s) const {
        GridFunction r = *this;
        for (double& v : r.values_) v *= s;
        return r;
    }

    friend GridFunction operator+(const GridFunction& a, const GridFunction& b) {
        require(a.spec_ == b.spec_, "grid functions live on different grids");
        GridFunction r = a;
        for (std::size_t i = 0; i < r.values_.size(); ++i) r.values_[i] += b.values_[i];
        return r;
    }

private:
    GridSpec spec_;
    std::vector<double> values_;
};

class CellSet {
public:
    CellSet() = default;
    explicit CellSet(GridSpec spec) : spec_(spec), member_(spec.num_cells(), 0) { spec_.validate(); }

    const GridSpec& spec() const { return spec_; }

    bool contains(const Cell& c) const { return spec_.contains(c) && member_[spec_.linear(c)] != 0; }
    bool contains_index(std::size_t i) const { return member_[i] != 0; }

    void insert(const Cell& c) {
        require(spec_.contains(c), "cell outside the grid extent");
        member_[spec_.linear(c)] = 1;
    }
    void set_index(std::size_t i, bool v) { member_[i] = v ? 1 : 0; }

    std::size_t count() const {
        return static_cast<std::size_t>(std::count(member_.begin(), member_.end(), std::uint8_t{1}));
    }
    bool empty() const { return count() == 0; }

    std::vector<Cell> cells() const {
        std::vector<Cell> out;
        for (std::size_t i = 0; i < member_.size(); ++i)
            if (member_[i]) out.push_back(spec_.cell_at(i));
        return out;
    }

    const std::vector<std::uint8_t>& raw() const { return member_; }

    GridFunction indicator() const {
        std::vector<double> v(member_.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = member_[i] ? 1.0 : 0.0;
        return GridFunction(spec_, std::move(v));
    }

    friend bool operator==(const CellSet&, const CellSet&) = default;

private:
    GridSpec spec_;
    std::vector<std::uint8_t> member_;
};

struct Face {
    int axis = 0;
    Cell lower{};

    Cell upper() const { return shifted(lower, axis, 1); }
    auto operator<=>(const Face&) const = default;
};

struct FaceWeight {
    Face face;
    double weight = 0.0;
};

/// Extent of the face lattice of one axis: one extra slot along that axis,
/// since lower cells range over -1 .. n_l - 1.
inline std::array<int, kMaxDim> face_extent(const GridSpec& s, int axis) {
    auto e = s.extent;
    e[axis] += 1;
    return e;
}

inline std::size_t face_count(const GridSpec& s, int axis) {
    const auto e = face_extent(s, axis);
    return static_cast<std::size_t>(e[0]) * e[1] * e[2];
}

/// Dense index of a face within its axis; monotone in the canonical order.
inline std::size_t face_key(const GridSpec& s, const Face& f) {
    const auto e = face_extent(s, f.axis);
    Cell c = f.lower;
    c[f.axis] += 1;
    return (static_cast<std::size_t>(c[0]) * e[1] + c[1]) * e[2] + c[2];
}

inline Face face_from_key(const GridSpec& s, int axis, std::size_t key) {
    const auto e = face_extent(s, axis);
    Face f;
    f.axis = axis;
    f.lower[2] = static_cast<int>(key % e[2]);
    key /= e[2];
    f.lower[1] = static_cast<int>(key % e[1]);
    f.lower[0] = static_cast<int>(key / e[1]);
    f.lower[axis] -= 1;
    return f;
}

inline bool face_in_lattice(const GridSpec& s, const Face& f) {
    if (f.axis < 0 || f.axis >= s.dim) return false;
    for (int a = 0; a < kMaxDim; ++a) {
        const int lo = (a == f.axis) ? -1 : 0;
        if (f.lower[a] < lo || f.lower[a] >= s.extent[a]) return false;
    }
    return true;
}

inline Point face_center(const GridSpec& s, const Face& f) {
    Point p = s.cell_center(f.lower);
    p[f.axis] += 0.5 * s.h;
    return p;
}

/// Per-axis dense accumulator over the face lattice; used to add many sparse
/// measures and to compare measures weight by weight.
class DenseFaceField {
public:
    explicit DenseFaceField(const GridSpec& s) : spec_(s) {
        for (int l = 0; l < s.dim; ++l) data_[l].assign(face_count(s, l), 0.0);
    }
    void add(const Face& f, double w) { data_[f.axis][face_key(spec_, f)] += w; }
    double get(const Face& f) const { return data_[f.axis][face_key(spec_, f)]; }
    const std::vector<double>& axis(int l) const { return data_[l]; }
    std::vector<double>& axis(int l) { return data_[l]; }
    const GridSpec& spec() const { return spec_; }

private:
    GridSpec spec_;
    std::array<std::vector<double>, kMaxDim> data_;
};

class VectorFaceMeasure {
public:
    VectorFaceMeasure() = default;
    explicit VectorFaceMeasure(GridSpec spec) : spec_(spec) {}

    const GridSpec& spec() const { return spec_; }
    const std::vector<FaceWeight>& component(int l) const { return comp_[l]; }
    std::vector<FaceWeight>& component(int l) { return comp_[l]; }

    std::size_t size() const {
        std::size_t n = 0;
        for (int l = 0; l < spec_.dim; ++l) n += comp_[l].size();
        return n;
    }
    bool empty() const { return size() == 0; }

    /// Signed mass of one component.
    double signed_mass(int l) const {
        CompensatedSum s;
        for (const auto& fw : comp_[l]) s.add(fw.weight);
        return s.value();
    }

    double max_abs_weight() const {
        double m = 0.0;
        for (int l = 0; l < spec_.dim; ++l)
            for (const auto& fw : comp_[l]) m = std::max(m, std::abs(fw.weight));
        return m;
    }

    void scale(double s) {
        for (int l = 0; l < spec_.dim; ++l)
            for (auto& fw : comp_[l]) fw.weight *= s;
    }

    /// Appends a face; callers are responsible for canonical order
    /// (or call canonicalize() afterwards).
    void push(const Face& f, double w) {
        if (w != 0.0) comp_[f.axis].push_back({f, w});
    }

    /// Sorts every component canonically and merges duplicate faces.
    void canonicalize() {
        for (int l = 0; l < spec_.dim; ++l) {
            auto& v = comp_[l];
            std::stable_sort(v.begin(), v.end(),
                             [](const FaceWeight& a, const FaceWeight& b) { return a.face < b.face; });
            std::vector<FaceWeight> merged;
            merged.reserve(v.size());
            for (const auto& fw : v) {
                if (!merged.empty() && merged.back().face == fw.face)
                    merged.back().weight += fw.weight;
                else
                    merged.push_back(fw);
            }
            std::erase_if(merged, [](const FaceWeight& fw) { return fw.weight == 0.0; });
            v = std::move(merged);
        }
    }

    void accumulate_into(DenseFaceField& acc, double scale = 1.0) const {
        for (int l = 0; l < spec_.dim; ++l)
            for (const auto& fw : comp_[l]) acc.add(fw.face, scale * fw.weight);
    }

    static VectorFaceMeasure from_dense(const DenseFaceField& acc) {
        VectorFaceMeasure m(acc.spec());
        for (int l = 0; l < acc.spec().dim; ++l) {
            const auto& data = acc.axis(l);
            for (std::size_t k = 0; k < data.size(); ++k)
                if (data[k] != 0.0) m.comp_[l].push_back({face_from_key(acc.spec(), l, k), data[k]});
        }
        return m;
    }

private:
    GridSpec spec_;
    std::array<std::vector<FaceWeight>, kMaxDim> comp_;
};

/// Discrete distributional gradient: forward differences on every face,
/// zero extension outside the extent, zero-jump faces omitted.
inline VectorFaceMeasure gradient_measure(const GridFunction& u) {
    const GridSpec& s = u.spec();
    VectorFaceMeasure m(s);
    const double area = s.face_area();
    for (int l = 0; l < s.dim; ++l) {
        Cell lo{0, 0, 0};
        lo[l] = -1;
        for_each_cell(lo, s.extent, [&](const Cell& x) {
            const double jump = u.at(shifted(x, l, 1)) - u.at(x);
            if (jump != 0.0) m.component(l).push_back({Face{l, x}, jump * area});
        });
    }
    return m;
}

inline VectorFaceMeasure gradient_measure(const CellSet& e) {
    const GridSpec& s = e.spec();
    VectorFaceMeasure m(s);
    const double area = s.face_area();
    for (int l = 0; l < s.dim; ++l) {
        Cell lo{0, 0, 0};
        lo[l] = -1;
        for_each_cell(lo, s.extent, [&](const Cell& x) {
            const int jump = int(e.contains(shifted(x, l, 1))) - int(e.contains(x));
            if (jump != 0) m.component(l).push_back({Face{l, x}, jump * area});
        });
    }
    return m;
}

/// Anisotropic total variation: sum of |weight| over all faces of all axes.
inline double total_variation(const VectorFaceMeasure& m) {
    CompensatedSum s;
    for (int l = 0; l < m.spec().dim; ++l)
        for (const auto& fw : m.component(l)) s.add(std::abs(fw.weight));
    return s.value();
}

inline double total_variation(const GridFunction& u) { return total_variation(gradient_measure(u)); }

/// Number of faces separating E from its complement, times h^{d-1}.
inline double perimeter(const CellSet& e) {
    const GridSpec& s = e.spec();
    std::size_t jumps = 0;
    for (int l = 0; l < s.dim; ++l) {
        Cell lo{0, 0, 0};
        lo[l] = -1;
        for_each_cell(lo, s.extent, [&](const Cell& x) {
            jumps += e.contains(x) != e.contains(shifted(x, l, 1)) ? 1u : 0u;
        });
    }
    return static_cast<double>(jumps) * s.face_area();
}

/// Euclidean (isotropic) total variation of forward differences; a diagnostic
/// only, never used by the decomposition pipeline.
inline double isotropic_total_variation(const GridFunction& u) {
    const GridSpec& s = u.spec();
    CompensatedSum sum;
    Cell lo{-1, -1, s.dim == 3 ? -1 : 0};
    for_each_cell(lo, s.extent, [&](const Cell& x) {
        double g2 = 0.0;
        for (int l = 0; l < s.dim; ++l) {
            const double d = u.at(shifted(x, l, 1)) - u.at(x);
            g2 += d * d;
        }
        sum.add(std::sqrt(g2));
    });
    return sum.value() * s.face_area();
}

/// Pairing of a face measure with a vector field evaluated at face centres.
/// `field` maps a Point to a Point (components beyond d are ignored).
template <class Field>
double pair(const VectorFaceMeasure& m, Field&& field) {
    CompensatedSum s;
    for (int l = 0; l < m.spec().dim; ++l)
        for (const auto& fw : m.component(l)) s.add(fw.weight * field(face_center(m.spec(), fw.face))[l]);
    return s.value();
}

/// Largest |a - b| over all faces, with both measures on the same grid.
inline double max_weight_difference(const VectorFaceMeasure& a, const VectorFaceMeasure& b) {
    require(a.spec() == b.spec(), "measures live on different grids");
    DenseFaceField acc(a.spec());
    a.accumulate_into(acc, 1.0);
    b.accumulate_into(acc, -1.0);
    double m = 0.0;
    for (int l = 0; l < a.spec().dim; ++l)
        for (double v : acc.axis(l)) m = std::max(m, std::abs(v));
    return m;
}

/// Total variation of a - b.
inline double difference_variation(const VectorFaceMeasure& a, const VectorFaceMeasure& b) {
    require(a.spec() == b.spec(), "measures live on different grids");
    DenseFaceField acc(a.spec());
    a.accumulate_into(acc, 1.0);
    b.accumulate_into(acc, -1.0);
    CompensatedSum s;
    for (int l = 0; l < a.spec().dim; ++l)
        for (double v : acc.axis(l)) s.add(std::abs(v));
    return s.value();
}

}  // namespace bvatoms
