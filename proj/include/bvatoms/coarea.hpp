#pragma once
// Layer-cake representation of Du: Du = sum sigma_i a_i D chi_{Omega_i}.
// Positive part uses superlevel sets {u > t}, negative part sublevel sets
// {u < t}, so every Omega is bounded.

#include <algorithm>
#include <string>
#include <vector>

#include "bvatoms/grid.hpp"

namespace bvatoms {

struct Layer {
    double a = 0.0;  // > 0
    double t = 0.0;
    CellSet omega;
    int sigma = +1;  // +1: omega = {u > t}, t >= 0;  -1: omega = {u < t}, t <= 0
};

enum class SamplingScheme { uniform, quantile };

inline CellSet superlevel(const GridFunction& u, double t) {
    CellSet e(u.spec());
    for (std::size_t i = 0; i < u.values().size(); ++i)
        if (u[i] > t) e.set_index(i, true);
    return e;
}

inline CellSet sublevel(const GridFunction& u, double t) {
    CellSet e(u.spec());
    for (std::size_t i = 0; i < u.values().size(); ++i)
        if (u[i] < t) e.set_index(i, true);
    return e;
}

namespace detail {

inline void sort_layers(std::vector<Layer>& layers) {
    std::stable_sort(layers.begin(), layers.end(), [](const Layer& x, const Layer& y) {
        if (x.sigma != y.sigma) return x.sigma < y.sigma;
        return x.t < y.t;
    });
}

/// Magnitudes of the positive (sign=+1) or negative (sign=-1) part, sorted
/// and deduplicated.
inline std::vector<double> distinct_magnitudes(const GridFunction& u, int sign) {
    std::vector<double> v;
    for (double x : u.values())
        if (sign * x > 0.0) v.push_back(sign * x);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

inline CellSet level_set(const GridFunction& u, int sign, double magnitude) {
    return sign > 0 ? superlevel(u, magnitude) : sublevel(u, -magnitude);
}

}  // namespace detail

/// Exact layers for piecewise-constant data: one layer per distinct nonzero
/// value, thresholds at midpoints between consecutive distinct values.
inline std::vector<Layer> exact_layers(const GridFunction& u) {
    std::vector<Layer> layers;
    for (int sign : {-1, +1}) {
        const auto mags = detail::distinct_magnitudes(u, sign);
        double prev = 0.0;
        for (double v : mags) {
            const double mid = 0.5 * (prev + v);
            Layer L;
            L.a = v - prev;
            L.sigma = sign;
            L.t = sign * mid;
            L.omega = detail::level_set(u, sign, mid);
            layers.push_back(std::move(L));
            prev = v;
        }
    }
    detail::sort_layers(layers);
    return layers;
}

/// Riemann sampling of the coarea integral with n intervals per sign.
/// Uniform: thresholds i max/n, i = 0..n-1. Quantile: thresholds at the
/// i/n quantiles of the nonzero cell magnitudes (duplicates merged).
/// Layer i has a_i = t_{i+1} - t_i and Omega_i = {|u| > t_i} on its sign.
inline std::vector<Layer> riemann_sample(const GridFunction& u, int n, SamplingScheme scheme) {
    require(n >= 1, "riemann sampling needs n >= 1");
    std::vector<Layer> layers;
    for (int sign : {-1, +1}) {
        std::vector<double> mags;
        for (double x : u.values())
            if (sign * x > 0.0) mags.push_back(sign * x);
        if (mags.empty()) continue;
        std::sort(mags.begin(), mags.end());
        const double top = mags.back();

        std::vector<double> thresholds{0.0};
        for (int i = 1; i < n; ++i) {
            double t = 0.0;
            if (scheme == SamplingScheme::uniform) {
                t = top * static_cast<double>(i) / static_cast<double>(n);
            } else {
                const std::size_t rank = (static_cast<std::size_t>(i) * mags.size()) / static_cast<std::size_t>(n);
                t = mags[std::min(rank, mags.size() - 1)];
            }
            if (t > thresholds.back() && t < top) thresholds.push_back(t);
        }
        thresholds.push_back(top);

        for (std::size_t i = 0; i + 1 < thresholds.size(); ++i) {
            Layer L;
            L.a = thresholds[i + 1] - thresholds[i];
            L.sigma = sign;
            L.t = sign * thresholds[i];
            L.omega = detail::level_set(u, sign, thresholds[i]);
            layers.push_back(std::move(L));
        }
    }
    detail::sort_layers(layers);
    return layers;
}

/// sum sigma_i a_i D chi_{Omega_i}, assembled densely and returned sparse.
inline VectorFaceMeasure layered_gradient(const GridSpec& s, const std::vector<Layer>& layers) {
    DenseFaceField acc(s);
    for (const auto& L : layers) gradient_measure(L.omega).accumulate_into(acc, L.sigma * L.a);
    return VectorFaceMeasure::from_dense(acc);
}

/// sum a_i per(Omega_i).
inline double layered_perimeter(const std::vector<Layer>& layers) {
    CompensatedSum s;
    for (const auto& L : layers) s.add(L.a * perimeter(L.omega));
    return s.value();
}

}  // namespace bvatoms
