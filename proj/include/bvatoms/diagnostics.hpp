#pragma once
// Empirical probes: Gagliardo-Nirenberg ratio, Riesz potentials of face
// measures, trace ratios against Frostman measures, and corpus-wide
// constant summaries.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "bvatoms/io.hpp"
#include "bvatoms/pipeline.hpp"

namespace bvatoms {

/// ||u||_{L^{d/(d-1)}} / |Du|.
inline double gn_ratio(const GridFunction& u) {
    require(!u.is_zero(), "gn_ratio of the zero function");
    const GridSpec& s = u.spec();
    const double p = static_cast<double>(s.dim) / (s.dim - 1);
    CompensatedSum sum;
    for (double v : u.values()) sum.add(std::pow(std::abs(v), p));
    const double lp = std::pow(sum.value() * s.cell_volume(), 1.0 / p);
    return lp / total_variation(u);
}

/// gamma(alpha) = pi^{d/2} 2^alpha Gamma(alpha/2) / Gamma((d - alpha)/2).
inline double riesz_normalization(double alpha, int dim) {
    require(alpha > 0.0 && alpha < dim, "Riesz order must lie in (0, d)");
    return std::pow(std::numbers::pi, 0.5 * dim) * std::pow(2.0, alpha) * std::tgamma(0.5 * alpha) /
           std::tgamma(0.5 * (dim - alpha));
}

/// I_alpha nu(x) for a scalar atomic measure; atoms coinciding with x are
/// skipped (principal value).
inline std::vector<double> riesz_potential(std::span<const WeightedPoint> atoms, double alpha, int dim,
                                           std::span<const Point> xs) {
    const double gamma = riesz_normalization(alpha, dim);
    std::vector<double> out;
    out.reserve(xs.size());
    for (const auto& x : xs) {
        CompensatedSum s;
        for (const auto& a : atoms) {
            double r2 = 0.0;
            for (int k = 0; k < dim; ++k) r2 += (x[k] - a.x[k]) * (x[k] - a.x[k]);
            if (r2 <= 1e-24) continue;
            s.add(a.weight * std::pow(r2, 0.5 * (alpha - dim)));
        }
        out.push_back(s.value() / gamma);
    }
    return out;
}

/// Face weights as atoms at face centres.
inline std::vector<WeightedPoint> face_atoms(const GridSpec& s, std::span<const FaceWeight> faces) {
    std::vector<WeightedPoint> a;
    a.reserve(faces.size());
    for (const auto& fw : faces) a.push_back({face_center(s, fw.face), fw.weight});
    return a;
}

inline std::vector<double> riesz_potential(const GridSpec& s, std::span<const FaceWeight> faces, double alpha,
                                           std::span<const Point> xs) {
    const auto atoms = face_atoms(s, faces);
    return riesz_potential(atoms, alpha, s.dim, xs);
}

struct GrowthCheck {
    bool ok = true;
    double worst = 0.0;  // max nu(B(x, r)) / (c_nu r^exponent) over the sampled balls
};

/// Balls centred at the atoms with radii r_min 2^k up to twice the diameter,
/// r_min the smallest nonzero inter-atom distance (1 for a single atom).
inline GrowthCheck check_growth(const FrostmanMeasure& nu, double tol = 1e-9) {
    GrowthCheck g;
    if (nu.atoms.empty()) return g;
    double rmin = 0.0, diam = 0.0;
    auto dist = [&](const Point& p, const Point& q) {
        double r2 = 0.0;
        for (int k = 0; k < nu.dim; ++k) r2 += (p[k] - q[k]) * (p[k] - q[k]);
        return std::sqrt(r2);
    };
    for (std::size_t i = 0; i < nu.atoms.size(); ++i)
        for (std::size_t j = i + 1; j < nu.atoms.size(); ++j) {
            const double r = dist(nu.atoms[i].x, nu.atoms[j].x);
            diam = std::max(diam, r);
            if (r > 0.0 && (rmin == 0.0 || r < rmin)) rmin = r;
        }
    if (rmin == 0.0) rmin = 1.0;
    const double rmax = std::max(2.0 * diam, rmin);
    for (const auto& c : nu.atoms) {
        for (double r = rmin; r <= rmax * (1.0 + 1e-12); r *= 2.0) {
            double mass = 0.0;
            for (const auto& a : nu.atoms)
                if (dist(a.x, c.x) <= r) mass += a.weight;
            g.worst = std::max(g.worst, mass / (nu.c_nu * std::pow(r, nu.exponent)));
        }
    }
    g.ok = g.worst <= 1.0 + tol;
    return g;
}

struct TraceResult {
    double ratio = 0.0;
    bool growth_ok = true;
    double growth_worst = 0.0;
};

/// sum_nu weight |I_alpha Du(point)| / |Du|, Euclidean norm over components.
inline TraceResult trace_ratio(const GridFunction& u, double alpha, const FrostmanMeasure& nu) {
    const GridSpec& s = u.spec();
    require(nu.dim == s.dim, "Frostman measure dimension does not match the grid");
    require(alpha > 1.0 && alpha < s.dim, "trace probe needs alpha in (1, d)");
    require(!u.is_zero(), "trace_ratio of the zero function");
    TraceResult r;
    const auto g = check_growth(nu);
    r.growth_ok = g.ok;
    r.growth_worst = g.worst;
    const auto du = gradient_measure(u);
    std::vector<Point> xs;
    for (const auto& a : nu.atoms) xs.push_back(a.x);
    std::vector<double> norm2(xs.size(), 0.0);
    for (int l = 0; l < s.dim; ++l) {
        const auto v = riesz_potential(s, du.component(l), alpha, xs);
        for (std::size_t i = 0; i < xs.size(); ++i) norm2[i] += v[i] * v[i];
    }
    CompensatedSum sum;
    for (std::size_t i = 0; i < xs.size(); ++i) sum.add(nu.atoms[i].weight * std::sqrt(norm2[i]));
    r.ratio = sum.value() / total_variation(du);
    return r;
}

struct Distribution {
    std::size_t count = 0;
    double min = 0.0;
    double median = 0.0;
    double max = 0.0;

    static Distribution of(std::vector<double> v) {
        Distribution d;
        d.count = v.size();
        if (v.empty()) return d;
        std::sort(v.begin(), v.end());
        d.min = v.front();
        d.max = v.back();
        const std::size_t m = v.size() / 2;
        d.median = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
        return d;
    }
};

struct ConstantsReport {
    std::size_t items = 0;
    Distribution boxing_constant;
    Distribution lambda_ratio;  // sum |lambda| / |Du|
    Distribution gn_ratio;
    Distribution heat_margin;   // heat sup / budget per atom
    double cprime_max = 0.0;
};

struct ConstantsOptions {
    unsigned threads = 1;
    bool heat = true;
    std::size_t heat_stride = 1;  // verify every k-th atom
};

inline ConstantsReport constants_report(const std::vector<GridFunction>& corpus, const ConstantsOptions& opt = {}) {
    require(!corpus.empty(), "constants report needs a nonempty corpus");
    require(opt.heat_stride >= 1, "heat stride must be >= 1");
    struct Item {
        double box = 0.0, ratio = 0.0, gn = 0.0, cprime = 0.0;
        std::vector<double> margins;
    };
    const auto items = parallel_map(corpus.size(), opt.threads, [&](std::size_t i) {
        Item it;
        const auto dec = decompose(corpus[i], Mode::exact(), {}, {1, false});
        it.box = dec.summary.max_boxing_constant;
        it.ratio = dec.summary.ratio;
        it.gn = gn_ratio(corpus[i]);
        it.cprime = dec.cprime;
        if (opt.heat)
            for (std::size_t k = 0; k < dec.entries.size(); k += opt.heat_stride)
                it.margins.push_back(verify_atom(dec.spec, dec.entries[k].atom).heat_margin);
        return it;
    });
    ConstantsReport r;
    r.items = corpus.size();
    std::vector<double> box, ratio, gn, heat;
    for (const auto& it : items) {
        box.push_back(it.box);
        ratio.push_back(it.ratio);
        gn.push_back(it.gn);
        heat.insert(heat.end(), it.margins.begin(), it.margins.end());
        r.cprime_max = std::max(r.cprime_max, it.cprime);
    }
    r.boxing_constant = Distribution::of(box);
    r.lambda_ratio = Distribution::of(ratio);
    r.gn_ratio = Distribution::of(gn);
    r.heat_margin = Distribution::of(heat);
    return r;
}

}  // namespace bvatoms
