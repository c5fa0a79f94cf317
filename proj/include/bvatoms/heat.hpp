#pragma once
// Heat-kernel convolution of face measures and the sampled estimate of
//   sup_{x, t > 0} t^{1/2} |p_t * mu(x)|.
//
// A face of weight w is the uniform surface measure of density w / h^{d-1}
// on its (d-1)-dimensional square, so the convolution is a closed-form
// product: a 1-d Gaussian across the face times erf differences along it.
// As t -> 0 the scaled value at a face interior tends to density / sqrt(4 pi),
// which is included in the sup as an exact limit term.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "bvatoms/dyadic.hpp"

namespace bvatoms {

inline double heat_kernel(const Point& x, double t, int dim) {
    require(t > 0.0, "heat kernel needs t > 0");
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += x[a] * x[a];
    return std::pow(4.0 * std::numbers::pi * t, -0.5 * dim) * std::exp(-r2 / (4.0 * t));
}

/// K_d = || grad p_1 ||_{L^1(R^d)} by radial Simpson quadrature of
/// omega_{d-1} (4 pi)^{-d/2} r^d / 2 e^{-r^2/4}, panels doubled until two
/// successive estimates agree to 1e-12.
inline double grad_heat_l1_unit(int dim) {
    require(dim == 2 || dim == 3, "dimension must be 2 or 3");
    static const std::array<double, 2> cached = [] {
        std::array<double, 2> k{};
        for (int d : {2, 3}) {
            const double sphere = 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
            const double norm = sphere * std::pow(4.0 * std::numbers::pi, -0.5 * d);
            auto f = [&](double r) { return 0.5 * std::pow(r, d) * std::exp(-0.25 * r * r); };
            const double upper = 40.0;  // integrand < 1e-150 beyond
            auto simpson = [&](int panels) {
                const double step = upper / panels;
                double s = f(0.0) + f(upper);
                for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * step);
                return s * step / 3.0;
            };
            int panels = 64;
            double prev = simpson(panels);
            while (true) {
                panels *= 2;
                const double cur = simpson(panels);
                if (std::abs(cur - prev) < 1e-12 || panels > (1 << 22)) {
                    prev = cur;
                    break;
                }
                prev = cur;
            }
            k[d - 2] = norm * prev;
        }
        return k;
    }();
    return cached[dim - 2];
}

/// || grad p_t ||_{L^1} = K_d t^{-1/2}.
inline double grad_heat_l1(int dim, double t) {
    require(t > 0.0, "grad_heat_l1 needs t > 0");
    return grad_heat_l1_unit(dim) / std::sqrt(t);
}

struct HeatEvalPlan {
    double t_min = 0.0;
    double t_max = 0.0;
    double rho = 4.0;        // lattice refinement: spacing max(h, sqrt t) / rho
    double margin = 1.0;     // region = support cube grown by margin * side on each side
    double eps_trunc = 1e-10;  // absolute bound on the dropped part of t^{1/2} |p_t * mu|

    static HeatEvalPlan standard(double h, double support_side) {
        HeatEvalPlan p;
        p.t_min = (h / 4.0) * (h / 4.0);
        p.t_max = (8.0 * support_side) * (8.0 * support_side);
        return p;
    }

    /// rho doubled, t range extended one octave each way.
    HeatEvalPlan refined() const {
        HeatEvalPlan p = *this;
        p.rho *= 2.0;
        p.t_min *= 0.5;
        p.t_max *= 2.0;
        return p;
    }

    void validate() const {
        require(t_min > 0.0 && t_min <= t_max, "heat plan needs 0 < t_min <= t_max");
        require(rho >= 2.0, "heat plan needs rho >= 2");
        require(margin >= 0.0, "heat plan margin must be nonnegative");
        require(eps_trunc > 0.0, "heat plan truncation tolerance must be positive");
    }

    std::vector<double> times() const {
        std::vector<double> ts;
        for (double t = t_min; t <= t_max * (1.0 + 1e-12); t *= 2.0) ts.push_back(t);
        return ts;
    }
};

namespace detail {

struct FaceGeom {
    Point center{};
    int axis = 0;
    double density = 0.0;
};

inline std::vector<FaceGeom> face_geometry(const GridSpec& s, std::span<const FaceWeight> faces) {
    std::vector<FaceGeom> g;
    g.reserve(faces.size());
    for (const auto& fw : faces) g.push_back({face_center(s, fw.face), fw.face.axis, fw.weight / s.face_area()});
    return g;
}

/// Truncation radius: faces whose nearest point is farther than r from x
/// contribute at most eps in total.
inline double truncation_radius(double mass, double t, int dim, double eps) {
    const double peak = mass * std::pow(4.0 * std::numbers::pi * t, -0.5 * dim);
    if (peak <= eps) return 0.0;
    return std::sqrt(4.0 * t * std::log(peak / eps));
}

/// Uniform bucket grid over face centres, stored densely over the faces'
/// bounding box (compressed rows of face indices per bucket).
class FaceBuckets {
public:
    FaceBuckets(const std::vector<FaceGeom>& faces, int dim, double size) : faces_(&faces), dim_(dim), size_(size) {
        if (faces.empty()) return;
        for (int a = 0; a < dim_; ++a) {
            double lo = faces[0].center[a];
            for (const auto& f : faces) lo = std::min(lo, f.center[a]);
            lo_[a] = lo;
        }
        for (const auto& f : faces) {
            const auto b = bucket_of(f.center);
            for (int a = 0; a < dim_; ++a) n_[a] = std::max(n_[a], b[a] + 1);
        }
        const std::size_t total = static_cast<std::size_t>(n_[0] * n_[1] * n_[2]);
        start_.assign(total + 1, 0);
        for (const auto& f : faces) ++start_[linear(bucket_of(f.center)) + 1];
        for (std::size_t i = 0; i < total; ++i) start_[i + 1] += start_[i];
        items_.resize(faces.size());
        std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
        for (std::uint32_t i = 0; i < faces.size(); ++i) items_[fill[linear(bucket_of(faces[i].center))]++] = i;
    }

    template <class Fn>
    void for_neighbours(const Point& x, Fn&& fn) const {
        for_neighbours_index(x, [&](std::uint32_t f) { fn((*faces_)[f]); });
    }

    template <class Fn>
    void for_neighbours_index(const Point& x, Fn&& fn) const {
        if (items_.empty()) return;
        std::array<long long, 3> b{0, 0, 0};
        for (int a = 0; a < dim_; ++a) b[a] = static_cast<long long>(std::floor((x[a] - lo_[a]) / size_));
        std::array<long long, 3> from{0, 0, 0}, to{0, 0, 0};
        for (int a = 0; a < 3; ++a) {
            from[a] = std::max(0LL, b[a] - 1);
            to[a] = std::min(n_[a] - 1, b[a] + 1);
            if (from[a] > to[a]) return;
        }
        for (long long i = from[0]; i <= to[0]; ++i)
            for (long long j = from[1]; j <= to[1]; ++j)
                for (long long k = from[2]; k <= to[2]; ++k) {
                    const std::size_t q = linear({i, j, k});
                    for (std::uint32_t p = start_[q]; p < start_[q + 1]; ++p) fn(items_[p]);
                }
    }

private:
    std::array<long long, 3> bucket_of(const Point& p) const {
        std::array<long long, 3> b{0, 0, 0};
        for (int a = 0; a < dim_; ++a) b[a] = static_cast<long long>(std::floor((p[a] - lo_[a]) / size_));
        return b;
    }
    std::size_t linear(const std::array<long long, 3>& b) const {
        return static_cast<std::size_t>((b[0] * n_[1] + b[1]) * n_[2] + b[2]);
    }

    const std::vector<FaceGeom>* faces_;
    int dim_;
    double size_;
    Point lo_{0.0, 0.0, 0.0};
    std::array<long long, 3> n_{1, 1, 1};
    std::vector<std::uint32_t> start_;
    std::vector<std::uint32_t> items_;
};

inline double face_heat(const FaceGeom& f, const Point& x, double t, double h, int dim) {
    const double z = x[f.axis] - f.center[f.axis];
    double v = f.density * std::exp(-z * z / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t);
    const double s = 2.0 * std::sqrt(t);
    for (int k = 0; k < dim; ++k) {
        if (k == f.axis) continue;
        const double c = f.center[k] - x[k];
        v *= 0.5 * (std::erf((c + 0.5 * h) / s) - std::erf((c - 0.5 * h) / s));
        if (v == 0.0) break;
    }
    return v;
}

/// Per-time tables of the separable factors of face_heat at lattice points:
/// erf at every cell boundary and the across-face Gaussian at every face
/// plane, per axis. Turns each face term into lookups.
class LatticeTables {
public:
    LatticeTables(const GridSpec& s, const std::vector<FaceGeom>& faces, const Point& lo, double spacing,
                  const std::array<long long, 3>& np, double t)
        : d_(s.dim), faces_(&faces) {
        const double sq = 2.0 * std::sqrt(t);
        scale_ = 1.0 / std::sqrt(4.0 * std::numbers::pi * t);
        for (int a = 0; a < d_; ++a) {
            long long bmin = 0, bmax = 0;
            bool first = true;
            for (const auto& f : faces) {
                const long long c = std::llround((f.center[a] - s.origin[a]) / s.h - (a == f.axis ? 0.0 : 0.5));
                const long long b0 = c, b1 = a == f.axis ? c : c + 1;
                if (first || b0 < bmin) bmin = b0;
                if (first || b1 > bmax) bmax = b1;
                first = false;
            }
            bmin_[a] = bmin;
            nb_[a] = static_cast<std::size_t>(bmax - bmin + 1);
            const auto n = static_cast<std::size_t>(np[a]);
            erf_[a].resize(n * nb_[a]);
            gauss_[a].resize(n * nb_[a]);
            for (std::size_t i = 0; i < n; ++i) {
                const double x = lo[a] + static_cast<double>(i) * spacing;
                for (std::size_t m = 0; m < nb_[a]; ++m) {
                    const double y = s.origin[a] + static_cast<double>(bmin + static_cast<long long>(m)) * s.h;
                    erf_[a][i * nb_[a] + m] = std::erf((y - x) / sq);
                    gauss_[a][i * nb_[a] + m] = std::exp(-(x - y) * (x - y) / (4.0 * t));
                }
            }
        }
        // Per face: boundary index of its plane along its axis, and of the
        // lower edge of its cell along the other axes.
        idx_.resize(faces.size());
        for (std::size_t fi = 0; fi < faces.size(); ++fi) {
            const auto& f = faces[fi];
            for (int a = 0; a < d_; ++a) {
                const long long c = std::llround((f.center[a] - s.origin[a]) / s.h - (a == f.axis ? 0.0 : 0.5));
                idx_[fi][a] = static_cast<std::uint32_t>(c - bmin_[a]);
            }
        }
    }

    /// density / sqrt(4 pi t) of face fi.
    double coefficient(std::uint32_t fi) const { return (*faces_)[fi].density * scale_; }

    /// Separable factor of face fi along axis a at lattice index i.
    double factor(std::uint32_t fi, int a, long long i) const {
        const auto& m = idx_[fi];
        const std::size_t row = static_cast<std::size_t>(i) * nb_[a];
        if (a == (*faces_)[fi].axis) return gauss_[a][row + m[a]];
        return 0.5 * (erf_[a][row + m[a] + 1] - erf_[a][row + m[a]]);
    }

    double face(std::uint32_t fi, const std::array<long long, 3>& ip) const {
        const FaceGeom& f = (*faces_)[fi];
        const auto& m = idx_[fi];
        const int l = f.axis;
        double v = f.density * scale_ * gauss_[l][static_cast<std::size_t>(ip[l]) * nb_[l] + m[l]];
        for (int k = 0; k < d_; ++k) {
            if (k == l) continue;
            const double* row = &erf_[k][static_cast<std::size_t>(ip[k]) * nb_[k]];
            v *= 0.5 * (row[m[k] + 1] - row[m[k]]);
        }
        return v;
    }

private:
    int d_;
    const std::vector<FaceGeom>* faces_;
    double scale_ = 0.0;
    std::array<long long, 3> bmin_{};
    std::array<std::size_t, 3> nb_{};
    std::array<std::vector<double>, 3> erf_, gauss_;
    std::vector<std::array<std::uint32_t, 3>> idx_;
};

/// Evaluates p_t * mu at points with absolute truncation error <= eps.
class HeatEvaluator {
public:
    HeatEvaluator(const GridSpec& s, std::span<const FaceWeight> faces) : spec_(s), geom_(face_geometry(s, faces)) {
        for (const auto& fw : faces) mass_ += std::abs(fw.weight);
    }

    double mass() const { return mass_; }
    const std::vector<FaceGeom>& geometry() const { return geom_; }

    /// Bucket grid sized so that every face within the truncation radius of
    /// a point lies in the point's 3^d bucket neighbourhood.
    FaceBuckets buckets(double t, double eps) const {
        const double r = truncation_radius(mass_, t, spec_.dim, eps);
        return FaceBuckets(geom_, spec_.dim, r + spec_.h);
    }

    double value(const FaceBuckets& b, const Point& x, double t) const {
        CompensatedSum sum;
        b.for_neighbours(x, [&](const FaceGeom& f) { sum.add(face_heat(f, x, t, spec_.h, spec_.dim)); });
        return sum.value();
    }

private:
    GridSpec spec_;
    std::vector<FaceGeom> geom_;
    double mass_ = 0.0;
};

}  // namespace detail

/// p_t * mu at each point, faces beyond the truncation radius dropped;
/// absolute error <= eps per point.
inline std::vector<double> heat_convolve(const GridSpec& s, std::span<const FaceWeight> faces, double t,
                                         std::span<const Point> points, double eps = 1e-12) {
    require(t > 0.0, "heat convolution needs t > 0");
    require(eps > 0.0, "truncation tolerance must be positive");
    std::vector<double> out(points.size(), 0.0);
    if (faces.empty()) return out;
    const detail::HeatEvaluator ev(s, faces);
    const auto b = ev.buckets(t, eps);
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = ev.value(b, points[i], t);
    return out;
}

struct HeatSup {
    double value = 0.0;        // max(grid_value, limit_value)
    double grid_value = 0.0;   // max over evaluated lattice points and times
    double limit_value = 0.0;  // lim_{t -> 0} sup_x t^{1/2} |p_t * mu(x)|
    double t = 0.0;            // argmax time (0 for the limit term)
    Point x{};                 // argmax point
    double allowance = 0.0;    // certified truncation slack on value
    std::size_t evaluations = 0;
    bool empty = true;
};

/// Sampled sup of t^{1/2} |p_t * mu(x)| over the plan's (x, t) lattice,
/// together with the exact t -> 0 limit. `support` is the cube the region
/// is built around (the atom's 2Q).
///
/// Per time the lattice is swept in slabs along axis 0; every face adds its
/// separable contribution over the box of lattice points within the
/// truncation radius, so only points near the measure are ever touched.
inline HeatSup heat_sup(const GridSpec& s, std::span<const FaceWeight> faces, const PhysicalCube& support,
                        const HeatEvalPlan& plan) {
    plan.validate();
    HeatSup out;
    out.allowance = plan.eps_trunc;
    if (faces.empty()) return out;
    out.empty = false;

    const int d = s.dim;
    const detail::HeatEvaluator ev(s, faces);
    const auto& geom = ev.geometry();

    double best = 0.0;
    for (const auto& f : geom)
        if (std::abs(f.density) > best) {
            best = std::abs(f.density);
            out.x = f.center;
        }
    out.limit_value = best / std::sqrt(4.0 * std::numbers::pi);
    best = out.limit_value;

    const double grow = plan.margin * support.side;
    Point lo{0.0, 0.0, 0.0};
    const double span_len = support.side + 2.0 * grow;
    for (int a = 0; a < d; ++a) lo[a] = support.lo[a] - grow;

    double grid_best = 0.0;
    struct Window {
        std::array<long long, 3> from{}, to{};
        std::uint32_t face = 0;
    };
    std::vector<Window> wins, cands;
    std::vector<double> slab, c1, c2;
    std::vector<std::vector<std::pair<long long, long long>>> runs;

    for (double t : plan.times()) {
        const double st = std::sqrt(t);
        const double spacing = std::max(s.h, st) / plan.rho;
        const long long n = static_cast<long long>(std::floor(span_len / spacing + 1e-9)) + 1;
        const std::array<long long, 3> np{n, n, d == 3 ? n : 1};

        // No point can beat `best` when even the whole mass at the peak cannot.
        const double upper = st * ev.mass() * std::pow(4.0 * std::numbers::pi * t, -0.5 * d);
        if (upper <= best) continue;

        // Candidates: points within r_mark of a face; only there can the
        // global Gaussian bound exceed `best`. Contributions are gathered
        // from every face within the truncation radius.
        const double reach = detail::truncation_radius(ev.mass(), t, d, plan.eps_trunc / st);
        const double r_mark = std::sqrt(4.0 * t * std::log(upper / best));
        auto windows = [&](double radius, std::vector<Window>& out_w) {
            out_w.clear();
            for (std::uint32_t fi = 0; fi < geom.size(); ++fi) {
                const auto& f = geom[fi];
                Window w;
                w.face = fi;
                bool hit = true;
                for (int a = 0; a < d; ++a) {
                    const double half = a == f.axis ? 0.0 : 0.5 * s.h;
                    w.from[a] = std::max(0LL, static_cast<long long>(std::ceil((f.center[a] - half - radius - lo[a]) / spacing)));
                    w.to[a] = std::min(np[a] - 1,
                                       static_cast<long long>(std::floor((f.center[a] + half + radius - lo[a]) / spacing)));
                    if (w.to[a] < w.from[a]) hit = false;
                }
                if (hit) out_w.push_back(w);
            }
            std::stable_sort(out_w.begin(), out_w.end(), [](const Window& x, const Window& y) { return x.from[0] < y.from[0]; });
        };
        windows(reach, wins);
        windows(std::min(r_mark, reach), cands);
        if (cands.empty()) continue;

        const detail::LatticeTables tab(s, geom, lo, spacing, np, t);
        slab.assign(static_cast<std::size_t>(np[1] * np[2]), 0.0);
        c1.resize(static_cast<std::size_t>(np[1]));
        c2.resize(static_cast<std::size_t>(np[2]));
        runs.resize(static_cast<std::size_t>(np[1]));

        std::vector<const Window*> active, active_c;
        std::vector<long long> rows;
        std::size_t next = 0, next_c = 0;
        long long i_end = 0;
        for (const auto& w : cands) i_end = std::max(i_end, w.to[0] + 1);
        for (long long i = cands.front().from[0]; i < i_end; ++i) {
            while (next_c < cands.size() && cands[next_c].from[0] <= i) active_c.push_back(&cands[next_c++]);
            std::erase_if(active_c, [i](const Window* w) { return w->to[0] < i; });
            while (next < wins.size() && wins[next].from[0] <= i) active.push_back(&wins[next++]);
            std::erase_if(active, [i](const Window* w) { return w->to[0] < i; });
            if (active_c.empty()) {
                if (next_c < cands.size()) i = cands[next_c].from[0] - 1;
                continue;
            }
            // Disjoint candidate runs [k0, k1] per row j of the slab.
            rows.clear();
            for (const Window* w : active_c)
                for (long long j = w->from[1]; j <= w->to[1]; ++j) {
                    if (runs[j].empty()) rows.push_back(j);
                    runs[j].push_back({w->from[2], w->to[2]});
                }
            std::sort(rows.begin(), rows.end());
            for (long long j : rows) {
                auto& r = runs[j];
                std::sort(r.begin(), r.end());
                std::size_t m = 0;
                for (std::size_t q = 1; q < r.size(); ++q) {
                    if (r[q].first <= r[m].second + 1)
                        r[m].second = std::max(r[m].second, r[q].second);
                    else
                        r[++m] = r[q];
                }
                r.resize(m + 1);
            }

            for (const Window* w : active) {
                const double f0 = tab.coefficient(w->face) * tab.factor(w->face, 0, i);
                if (f0 == 0.0) continue;
                for (long long j = w->from[1]; j <= w->to[1]; ++j) c1[j] = f0 * tab.factor(w->face, 1, j);
                for (long long k = w->from[2]; k <= w->to[2]; ++k) c2[k] = d == 3 ? tab.factor(w->face, 2, k) : 1.0;
                for (long long j = w->from[1]; j <= w->to[1]; ++j) {
                    if (runs[j].empty()) continue;
                    double* row = &slab[static_cast<std::size_t>(j * np[2])];
                    const double a1 = c1[j];
                    for (const auto& [k0, k1] : runs[j]) {
                        const long long ka = std::max(k0, w->from[2]), kb = std::min(k1, w->to[2]);
                        for (long long k = ka; k <= kb; ++k) row[k] += a1 * c2[k];
                    }
                }
            }
            for (long long j : rows) {
                for (const auto& [k0, k1] : runs[j])
                    for (long long k = k0; k <= k1; ++k) {
                        double& cell = slab[static_cast<std::size_t>(j * np[2] + k)];
                        const double f = st * std::abs(cell);
                        cell = 0.0;
                        ++out.evaluations;
                        grid_best = std::max(grid_best, f);
                        if (f > best) {
                            best = f;
                            out.t = t;
                            out.x = {lo[0] + i * spacing, lo[1] + j * spacing, d == 3 ? lo[2] + k * spacing : 0.0};
                        }
                    }
                runs[j].clear();
            }
        }
    }
    out.grid_value = grid_best;
    out.value = best;
    return out;
}

struct HeatSupStudy {
    HeatSup base;
    HeatSup refined;
    double movement = 0.0;  // relative change under refinement
    bool stable = false;    // movement < 1%
};

inline HeatSupStudy heat_sup_study(const GridSpec& s, std::span<const FaceWeight> faces, const PhysicalCube& support,
                                   const HeatEvalPlan& plan) {
    HeatSupStudy st;
    st.base = heat_sup(s, faces, support, plan);
    st.refined = heat_sup(s, faces, support, plan.refined());
    const double denom = std::max(st.base.value, 1e-300);
    st.movement = st.base.empty ? 0.0 : std::abs(st.refined.value - st.base.value) / denom;
    st.stable = st.movement < 0.01;
    return st;
}

}  // namespace bvatoms
