#pragma once
// Seeded synthetic inputs. Every item is generated from its own stream
// seeded by (seed, index), and only integer-exact transforms of mt19937_64
// output are used, so files are byte-identical across platforms.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "bvatoms/io.hpp"

namespace bvatoms {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Integer in [lo, hi].
    int integer(int lo, int hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo + 1);
        return lo + static_cast<int>(eng_() % span);
    }
    double normal() {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    std::mt19937_64 eng_;
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

enum class CorpusKind { blobs, union_of_cubes, smooth_bumps, percolation };

inline CorpusKind parse_corpus_kind(const std::string& s) {
    if (s == "blobs") return CorpusKind::blobs;
    if (s == "union-of-cubes") return CorpusKind::union_of_cubes;
    if (s == "smooth-bumps") return CorpusKind::smooth_bumps;
    if (s == "percolation") return CorpusKind::percolation;
    throw ValidationError("unknown corpus kind '" + s + "' (blobs, union-of-cubes, smooth-bumps, percolation)");
}

inline std::string corpus_kind_name(CorpusKind k) {
    switch (k) {
        case CorpusKind::blobs: return "blobs";
        case CorpusKind::union_of_cubes: return "union-of-cubes";
        case CorpusKind::smooth_bumps: return "smooth-bumps";
        case CorpusKind::percolation: return "percolation";
    }
    return "?";
}

struct CorpusParams {
    int dim = 2;
    int size = 64;
    double p = 0.6;       // percolation occupation probability
    int levels = 0;       // smooth-bumps quantisation (0: none)
    double noise = 0.0;   // smooth-bumps additive noise, in quantisation steps
};

namespace detail {

inline GridSpec corpus_spec(const CorpusParams& c) {
    require(c.dim == 2 || c.dim == 3, "corpus dimension must be 2 or 3");
    require(c.size >= 4 && c.size <= 4096, "corpus size must lie in [4, 4096]");
    const std::array<int, kMaxDim> n{c.size, c.size, c.dim == 3 ? c.size : 1};
    return GridSpec::make(c.dim, n, 1.0 / c.size);
}

/// Cell-centre coordinates in cell units.
inline double sq_dist_cells(const Cell& c, const Point& p, int d) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += (c[a] + 0.5 - p[a]) * (c[a] + 0.5 - p[a]);
    return r2;
}

inline GridFunction gen_blobs(const GridSpec& s, Rng& rng) {
    const int d = s.dim;
    const int n = s.extent[0];
    const int k = rng.integer(3, 8);
    std::vector<Point> centres(k);
    std::vector<double> sig(k), amp(k);
    for (int i = 0; i < k; ++i) {
        for (int a = 0; a < d; ++a) centres[i][a] = rng.uniform(0.25 * n, 0.75 * n);
        sig[i] = rng.uniform(n / 16.0, n / 6.0);
        amp[i] = rng.uniform(0.5, 1.5);
    }
    std::vector<double> f(s.num_cells());
    double fmax = 0.0;
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
        const Cell c = s.cell_at(idx);
        double v = 0.0;
        for (int i = 0; i < k; ++i) v += amp[i] * std::exp(-sq_dist_cells(c, centres[i], d) / (2.0 * sig[i] * sig[i]));
        f[idx] = v;
        fmax = std::max(fmax, v);
    }
    const double tau = rng.uniform(0.3, 0.7) * fmax;
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] > tau ? 1.0 : 0.0;
    return GridFunction(s, std::move(out));
}

inline GridFunction gen_union_of_cubes(const GridSpec& s, Rng& rng) {
    const int d = s.dim;
    const int n = s.extent[0];
    static constexpr int coeffs[] = {-2, -1, 1, 2, 3};
    while (true) {
        std::vector<double> out(s.num_cells(), 0.0);
        const int k = rng.integer(2, 6);
        for (int i = 0; i < k; ++i) {
            Cell lo{0, 0, 0}, hi{1, 1, 1};
            for (int a = 0; a < d; ++a) {
                const int side = rng.integer(1, std::max(1, n / 3));
                lo[a] = rng.integer(0, n - side);
                hi[a] = lo[a] + side;
            }
            const double c = coeffs[rng.integer(0, 4)];
            for_each_cell(lo, hi, [&](const Cell& x) { out[s.linear(x)] += c; });
        }
        GridFunction u(s, std::move(out));
        if (!u.is_zero()) return u;
    }
}

inline GridFunction gen_smooth_bumps(const GridSpec& s, Rng& rng, const CorpusParams& c) {
    const int d = s.dim;
    const int n = s.extent[0];
    const int k = rng.integer(2, 5);
    std::vector<Point> centres(k);
    std::vector<double> rad(k), amp(k);
    for (int i = 0; i < k; ++i) {
        rad[i] = rng.uniform(n / 8.0, n / 3.0);
        for (int a = 0; a < d; ++a) centres[i][a] = rng.uniform(rad[i], n - rad[i]);
        amp[i] = rng.uniform(0.3, 1.0);
    }
    std::vector<double> f(s.num_cells(), 0.0);
    double fmax = 0.0;
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
        const Cell cell = s.cell_at(idx);
        double v = 0.0;
        for (int i = 0; i < k; ++i) {
            const double q = sq_dist_cells(cell, centres[i], d) / (rad[i] * rad[i]);
            if (q < 1.0) v += amp[i] * std::exp(1.0 - 1.0 / (1.0 - q));
        }
        f[idx] = v;
        fmax = std::max(fmax, v);
    }
    for (double& v : f) {
        v /= fmax;
        if (c.levels > 0) {
            if (c.noise > 0.0) v += c.noise * rng.uniform(-1.0, 1.0) / c.levels;
            v = std::clamp(std::round(v * c.levels), 0.0, static_cast<double>(c.levels)) / c.levels;
        }
    }
    return GridFunction(s, std::move(f));
}

/// Indices of the largest face-connected component of `occupied`
/// (ties broken by the smallest first cell index).
inline std::vector<std::size_t> largest_component(const GridSpec& s, const std::vector<std::uint8_t>& occupied) {
    std::vector<int> label(occupied.size(), -1);
    std::vector<std::size_t> best;
    int next = 0;
    for (std::size_t start = 0; start < occupied.size(); ++start) {
        if (!occupied[start] || label[start] >= 0) continue;
        std::vector<std::size_t> comp;
        std::deque<std::size_t> queue{start};
        label[start] = next;
        while (!queue.empty()) {
            const std::size_t i = queue.front();
            queue.pop_front();
            comp.push_back(i);
            const Cell c = s.cell_at(i);
            for (int l = 0; l < s.dim; ++l)
                for (int dlt : {-1, 1}) {
                    const Cell nb = shifted(c, l, dlt);
                    if (!s.contains(nb)) continue;
                    const std::size_t j = s.linear(nb);
                    if (occupied[j] && label[j] < 0) {
                        label[j] = next;
                        queue.push_back(j);
                    }
                }
        }
        ++next;
        if (comp.size() > best.size()) best = std::move(comp);
    }
    std::sort(best.begin(), best.end());
    return best;
}

inline GridFunction gen_percolation(const GridSpec& s, Rng& rng, double p) {
    require(p > 0.0 && p <= 1.0, "percolation probability must lie in (0, 1]");
    while (true) {
        std::vector<std::uint8_t> occ(s.num_cells());
        for (auto& o : occ) o = rng.uniform() < p ? 1 : 0;
        const auto comp = largest_component(s, occ);
        if (comp.empty()) continue;
        std::vector<double> out(s.num_cells(), 0.0);
        for (std::size_t i : comp) out[i] = 1.0;
        return GridFunction(s, std::move(out));
    }
}

}  // namespace detail

inline GridFunction generate_item(CorpusKind kind, std::uint64_t seed, std::size_t index, const CorpusParams& c) {
    const GridSpec s = detail::corpus_spec(c);
    Rng rng(mix_seed(seed, index));
    switch (kind) {
        case CorpusKind::blobs: return detail::gen_blobs(s, rng);
        case CorpusKind::union_of_cubes: return detail::gen_union_of_cubes(s, rng);
        case CorpusKind::smooth_bumps: return detail::gen_smooth_bumps(s, rng, c);
        case CorpusKind::percolation: return detail::gen_percolation(s, rng, c.p);
    }
    throw ValidationError("unknown corpus kind");
}

inline std::vector<GridFunction> gen_corpus(CorpusKind kind, std::uint64_t seed, std::size_t count,
                                            const CorpusParams& c) {
    require(count >= 1, "corpus count must be >= 1");
    std::vector<GridFunction> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(generate_item(kind, seed, i, c));
    return out;
}

/// The set {u != 0} of a generated item.
inline CellSet support_set(const GridFunction& u) {
    CellSet e(u.spec());
    for (std::size_t i = 0; i < u.values().size(); ++i)
        if (u[i] != 0.0) e.set_index(i, true);
    return e;
}

inline std::vector<std::string> write_corpus(const std::string& dir, CorpusKind kind, std::uint64_t seed,
                                             std::size_t count, const CorpusParams& c) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> paths;
    for (std::size_t i = 0; i < count; ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "%s_%04zu.bvgrid", corpus_kind_name(kind).c_str(), i);
        const std::string path = (std::filesystem::path(dir) / name).string();
        write_bvgrid_file(path, generate_item(kind, seed, i, c));
        paths.push_back(path);
    }
    return paths;
}

}  // namespace bvatoms
