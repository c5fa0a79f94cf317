#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "support.hpp"

using namespace bvt;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<FaceWeight> component(const VectorFaceMeasure& m, int l) { return m.component(l); }

std::vector<FaceWeight> cell_component(const GridSpec& s, const Cell& c, int l) {
    CellSet e(s);
    e.insert(c);
    return component(gradient_measure(e), l);
}

double eval(const GridSpec& s, const std::vector<FaceWeight>& f, const Point& x, double t, double eps = 1e-14) {
    const std::vector<Point> xs{x};
    return heat_convolve(s, f, t, xs, eps)[0];
}

// Oracle: surface density integrated against p_t over the face by
// composite Gauss-Legendre quadrature (5 nodes, 32 panels per tangent axis).
double face_quadrature(const GridSpec& s, const FaceWeight& fw, const Point& x, double t) {
    static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
    static const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                                 0.2369268850561891};
    const int d = s.dim;
    const Point c = face_center(s, fw.face);
    std::vector<int> tang;
    for (int a = 0; a < d; ++a)
        if (a != fw.face.axis) tang.push_back(a);
    const int panels = 32;
    const double ph = s.h / panels;
    std::vector<std::pair<double, double>> nodes;  // offset, weight
    for (int p = 0; p < panels; ++p)
        for (int q = 0; q < 5; ++q) nodes.push_back({-0.5 * s.h + (p + 0.5) * ph + 0.5 * ph * gx[q], 0.5 * ph * gw[q]});
    const double dens = fw.weight / s.face_area();
    double sum = 0.0;
    if (d == 2) {
        for (const auto& [o, w] : nodes) {
            Point y = c;
            y[tang[0]] += o;
            sum += w * heat_kernel({x[0] - y[0], x[1] - y[1], 0.0}, t, 2);
        }
    } else {
        for (const auto& [o1, w1] : nodes)
            for (const auto& [o2, w2] : nodes) {
                Point y = c;
                y[tang[0]] += o1;
                y[tang[1]] += o2;
                sum += w1 * w2 * heat_kernel({x[0] - y[0], x[1] - y[1], x[2] - y[2]}, t, 3);
            }
    }
    return dens * sum;
}

// Brute-force replica of the sampled sup: every lattice point of every
// plan time, evaluated pointwise, plus the t -> 0 limit term.
double brute_force_sup(const GridSpec& s, const std::vector<FaceWeight>& f, const PhysicalCube& support,
                       const HeatEvalPlan& plan) {
    const int d = s.dim;
    double best = 0.0;
    for (const auto& fw : f) best = std::max(best, std::abs(fw.weight) / s.face_area() / std::sqrt(4 * kPi));
    const double grow = plan.margin * support.side;
    const double span_len = support.side + 2 * grow;
    for (double t : plan.times()) {
        const double spacing = std::max(s.h, std::sqrt(t)) / plan.rho;
        const long long n = static_cast<long long>(std::floor(span_len / spacing + 1e-9)) + 1;
        std::vector<Point> pts;
        for (long long i = 0; i < n; ++i)
            for (long long j = 0; j < n; ++j)
                for (long long k = 0; k < (d == 3 ? n : 1); ++k)
                    pts.push_back({support.lo[0] - grow + i * spacing, support.lo[1] - grow + j * spacing,
                                   d == 3 ? support.lo[2] - grow + k * spacing : 0.0});
        const auto v = heat_convolve(s, f, t, pts, 1e-15);
        for (double x : v) best = std::max(best, std::sqrt(t) * std::abs(x));
    }
    return best;
}

}  // namespace

TEST(HeatKernel, NormalisationPointAndErrors) {
    EXPECT_NEAR(heat_kernel({0, 0, 0}, 1.0 / (4 * kPi), 2), 1.0, 1e-15);
    EXPECT_THROW(heat_kernel({0, 0, 0}, 0.0, 2), ValidationError);
    EXPECT_THROW(heat_kernel({0, 0, 0}, -1.0, 3), ValidationError);
    EXPECT_THROW(grad_heat_l1(2, 0.0), ValidationError);
}

TEST(HeatKernel, IntegratesToOne) {
    for (int d : {2, 3})
        for (double t : {0.01, 0.3, 2.0}) {
            // Midpoint rule is spectrally accurate for Gaussians; radius 12 sqrt t.
            const double r = 12 * std::sqrt(t);
            const int n = d == 2 ? 200 : 80;
            const double step = 2 * r / n;
            double sum = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < (d == 3 ? n : 1); ++k)
                        sum += heat_kernel({-r + (i + 0.5) * step, -r + (j + 0.5) * step, d == 3 ? -r + (k + 0.5) * step : 0.0}, t, d);
            EXPECT_NEAR(sum * std::pow(step, d), 1.0, 1e-10);
        }
}

TEST(HeatKernel, ScalingIdentity) {
    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        const int d = trial % 2 ? 3 : 2;
        const Point x{rng.uniform(-3, 3), rng.uniform(-3, 3), d == 3 ? rng.uniform(-3, 3) : 0.0};
        const double t = rng.uniform(0.01, 4.0);
        const double st = std::sqrt(t);
        const double lhs = heat_kernel(x, t, d);
        const double rhs = std::pow(t, -0.5 * d) * heat_kernel({x[0] / st, x[1] / st, x[2] / st}, 1.0, d);
        EXPECT_NEAR(lhs, rhs, 1e-13 * rhs);
    }
}

TEST(GradHeatL1, ClosedFormsAndScaling) {
    // E|X|/2 for X ~ N(0, 2 I): Rayleigh mean sqrt(pi) in 2d, Maxwell mean 4/sqrt(pi) in 3d.
    EXPECT_NEAR(grad_heat_l1_unit(2), std::sqrt(kPi) / 2, 1e-10);
    EXPECT_NEAR(grad_heat_l1_unit(3), 2 / std::sqrt(kPi), 1e-10);
    for (int d : {2, 3}) {
        EXPECT_GT(grad_heat_l1_unit(d), 0.0);
        EXPECT_NEAR(grad_heat_l1(d, 4 * 0.37), grad_heat_l1(d, 0.37) / 2, 1e-15);
    }
}

TEST(GradHeatL1, MonteCarloAgreesWithinThreeStandardErrors) {
    std::mt19937_64 eng(20261016);
    std::normal_distribution<double> g(0.0, std::sqrt(2.0));
    for (int d : {2, 3}) {
        const int n = 400000;
        double s1 = 0.0, s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            double r2 = 0.0;
            for (int a = 0; a < d; ++a) {
                const double x = g(eng);
                r2 += x * x;
            }
            const double v = 0.5 * std::sqrt(r2);
            s1 += v;
            s2 += v * v;
        }
        const double mean = s1 / n;
        const double se = std::sqrt((s2 / n - mean * mean) / n);
        EXPECT_LE(std::abs(mean - grad_heat_l1_unit(d)), 3 * se);
    }
}

TEST(HeatConvolve, RejectsNonPositiveTime) {
    const auto s = GridSpec::square(2);
    const auto f = cell_component(s, {0, 0, 0}, 0);
    const std::vector<Point> x{{0, 0, 0}};
    EXPECT_THROW(heat_convolve(s, f, 0.0, x), ValidationError);
}

TEST(HeatConvolve, SingleFaceMatchesSurfaceQuadrature) {
    Rng rng(11);
    for (int d : {2, 3}) {
        const auto s = d == 2 ? GridSpec::square(4, 0.5) : GridSpec::cube(4, 0.5);
        const std::vector<FaceWeight> f{{Face{d - 1, {1, 2, d == 3 ? 1 : 0}}, 0.8}};
        for (int trial = 0; trial < 20; ++trial) {
            const Point x{rng.uniform(0, 2), rng.uniform(0, 2), d == 3 ? rng.uniform(0, 2) : 0.0};
            const double t = std::exp(rng.uniform(std::log(0.01), std::log(4.0)));
            const double q = face_quadrature(s, f[0], x, t);
            EXPECT_NEAR(eval(s, f, x, t), q, 1e-10 * (1 + std::abs(q)));
        }
    }
}

TEST(HeatConvolve, LargeTimeApproachesPointMass) {
    const auto s = GridSpec::square(4, 0.1);
    const std::vector<FaceWeight> f{{Face{0, {1, 1, 0}}, 0.7}};
    const Point c = face_center(s, f[0].face);
    const double t = 100.0;
    const Point x{c[0] + 3.0, c[1] - 2.0, 0.0};
    const double point = 0.7 * heat_kernel({x[0] - c[0], x[1] - c[1], 0.0}, t, 2);
    // Smearing along the face changes the value by a relative O(h^2 / t).
    EXPECT_NEAR(eval(s, f, x, t), point, (s.h * s.h / t) * point);
}

TEST(HeatConvolve, CellComponentIsAntisymmetricAlongItsAxis) {
    Rng rng(21);
    for (int d : {2, 3})
        for (int l = 0; l < d; ++l) {
            const auto s = d == 2 ? GridSpec::square(3, 0.5) : GridSpec::cube(3, 0.5);
            const Cell cell{1, 1, d == 3 ? 1 : 0};
            const auto f = cell_component(s, cell, l);
            const Point c = s.cell_center(cell);
            for (int trial = 0; trial < 10; ++trial) {
                Point x{rng.uniform(-1, 2.5), rng.uniform(-1, 2.5), d == 3 ? rng.uniform(-1, 2.5) : 0.0};
                Point y = x;
                y[l] = 2 * c[l] - x[l];
                const double t = rng.uniform(0.01, 1.0);
                EXPECT_NEAR(eval(s, f, x, t), -eval(s, f, y, t), 1e-14);
            }
        }
}

TEST(HeatConvolve, ZeroMassDipoleBound) {
    const auto s = GridSpec::square(6, 0.25);
    CellSet e(s);
    e.insert({2, 2, 0});
    e.insert({3, 2, 0});
    e.insert({3, 3, 0});
    const auto m = gradient_measure(e);
    Rng rng(5);
    for (int l = 0; l < 2; ++l) {
        const auto f = component(m, l);
        double mass = 0.0;
        for (const auto& fw : f) mass += std::abs(fw.weight);
        const double diam = std::sqrt(2.0) * 2 * s.h;  // bounding box of the faces
        for (double t : {1.0, 10.0, 100.0}) {
            // sup |grad p_t| = (4 pi t)^{-d/2} e^{-1/2} / sqrt(2t)
            const double grad_sup = std::pow(4 * kPi * t, -1.0) * std::exp(-0.5) / std::sqrt(2 * t);
            for (int trial = 0; trial < 20; ++trial) {
                const Point x{rng.uniform(-5, 5), rng.uniform(-5, 5), 0.0};
                EXPECT_LE(std::abs(eval(s, f, x, t)), diam * grad_sup * mass * (1 + 1e-9) + 1e-14);
            }
        }
    }
}

TEST(HeatConvolve, MaximumPrinciple) {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const int d = trial % 2 ? 3 : 2;
        const auto s = d == 2 ? GridSpec::square(6, 0.5) : GridSpec::cube(4, 0.5);
        const auto m = gradient_measure(random_function(s, rng));
        for (int l = 0; l < d; ++l) {
            const auto f = component(m, l);
            double mass = 0.0;
            for (const auto& fw : f) mass += std::abs(fw.weight);
            std::vector<Point> xs;
            for (int k = 0; k < 200; ++k) xs.push_back({rng.uniform(-1, 4), rng.uniform(-1, 4), d == 3 ? rng.uniform(-1, 3) : 0.0});
            for (double t : {1e-4, 0.01, 0.5, 10.0}) {
                const auto v = heat_convolve(s, f, t, xs);
                for (double x : v) EXPECT_LE(std::abs(x), mass * std::pow(4 * kPi * t, -0.5 * d) * (1 + 1e-12));
            }
        }
    }
}

TEST(HeatConvolve, MassConservation) {
    const auto s = GridSpec::square(4, 0.25);
    const std::vector<FaceWeight> single{{Face{1, {1, 1, 0}}, 0.6}};
    const auto atom = cell_component(s, {1, 2, 0}, 0);
    for (const auto& [f, mass] : {std::pair{single, 0.6}, std::pair{atom, 0.0}})
        for (double t : {0.02, 0.2}) {
            const double r = 12 * std::sqrt(t) + 1.0;
            const int n = 240;
            const double step = 2 * r / n;
            std::vector<Point> pts;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) pts.push_back({0.5 - r + (i + 0.5) * step, 0.5 - r + (j + 0.5) * step, 0.0});
            const auto v = heat_convolve(s, f, t, pts, 1e-15);
            CompensatedSum sum;
            for (double x : v) sum.add(x);
            EXPECT_NEAR(sum.value() * step * step, mass, 1e-6);
        }
}

TEST(HeatConvolve, SemigroupSpotCheck) {
    const auto s = GridSpec::square(4, 0.25);
    const auto f = cell_component(s, {1, 2, 0}, 1);
    const double t = 0.03, u = 0.05;
    const double r = 2.5;
    const int n = 250;
    const double step = 2 * r / n;
    std::vector<Point> ys;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) ys.push_back({0.4 - r + (i + 0.5) * step, 0.6 - r + (j + 0.5) * step, 0.0});
    const auto g = heat_convolve(s, f, u, ys, 1e-15);
    for (const Point x : {Point{0.4, 0.6, 0}, Point{0.7, 0.3, 0}, Point{0.1, 0.9, 0}}) {
        double lhs = 0.0;
        for (std::size_t k = 0; k < ys.size(); ++k)
            lhs += heat_kernel({x[0] - ys[k][0], x[1] - ys[k][1], 0.0}, t, 2) * g[k];
        lhs *= step * step;
        EXPECT_NEAR(lhs, eval(s, f, x, t + u), 1e-8);
    }
}

TEST(HeatPlan, DefaultsRefinementAndValidation) {
    const auto p = HeatEvalPlan::standard(0.5, 2.0);
    EXPECT_EQ(p.t_min, 0.125 * 0.125);
    EXPECT_EQ(p.t_max, 256.0);
    EXPECT_EQ(p.rho, 4.0);
    EXPECT_EQ(p.margin, 1.0);
    const auto r = p.refined();
    EXPECT_EQ(r.rho, 8.0);
    EXPECT_EQ(r.t_min, p.t_min / 2);
    EXPECT_EQ(r.t_max, p.t_max * 2);
    auto times = p.times();
    EXPECT_EQ(times.front(), p.t_min);
    EXPECT_LE(times.back(), p.t_max);
    for (std::size_t i = 1; i < times.size(); ++i) EXPECT_EQ(times[i], 2 * times[i - 1]);
    HeatEvalPlan bad = p;
    bad.rho = 1.5;
    EXPECT_THROW(bad.validate(), ValidationError);
    bad = p;
    bad.t_min = 2 * bad.t_max;
    EXPECT_THROW(bad.validate(), ValidationError);
    bad = p;
    bad.eps_trunc = 0.0;
    EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(HeatSup, EmptyMeasureIsZero) {
    const auto s = GridSpec::square(2);
    const std::vector<FaceWeight> none;
    const auto r = heat_sup(s, none, PhysicalCube{{0, 0, 0}, 2.0}, HeatEvalPlan::standard(1.0, 2.0));
    EXPECT_TRUE(r.empty);
    EXPECT_EQ(r.value, 0.0);
}

TEST(HeatSup, MatchesBruteForceLattice) {
    Rng rng(123);
    for (int trial = 0; trial < 6; ++trial) {
        const int d = trial % 3 == 2 ? 3 : 2;
        const double h = 0.5;
        const auto s = d == 2 ? GridSpec::square(4, h) : GridSpec::cube(2, h);
        const auto m = gradient_measure(random_set(s, rng, 0.5));
        const PhysicalCube support{{0, 0, 0}, 4 * h};
        auto plan = HeatEvalPlan::standard(h, support.side);
        plan.t_max = 16 * h * h;
        for (int l = 0; l < d; ++l) {
            const auto f = component(m, l);
            const auto r = heat_sup(s, f, support, plan);
            const double bf = brute_force_sup(s, f, support, plan);
            EXPECT_NEAR(r.value, bf, 2 * plan.eps_trunc + 1e-12);
            EXPECT_GE(r.value, r.limit_value);
            if (r.t > 0) {
                const double at = std::sqrt(r.t) * std::abs(eval(s, f, r.x, r.t));
                EXPECT_NEAR(at, r.value, 2 * plan.eps_trunc + 1e-12);
            }
        }
    }
}

TEST(HeatSup, TablesAgreeWithDirectFaceFormula) {
    const auto s = GridSpec::square(4, 0.5);
    CellSet e(s);
    e.insert({1, 1, 0});
    e.insert({2, 1, 0});
    const auto f = component(gradient_measure(e), 1);
    const auto geom = detail::face_geometry(s, f);
    const Point lo{-1.0, -1.0, 0.0};
    const double spacing = 0.125;
    const std::array<long long, 3> np{33, 33, 1};
    for (double t : {0.001, 0.05, 1.0}) {
        const detail::LatticeTables tab(s, geom, lo, spacing, np, t);
        for (std::uint32_t fi = 0; fi < geom.size(); ++fi)
            for (long long i = 0; i < 33; i += 4)
                for (long long j = 0; j < 33; j += 3) {
                    const Point x{lo[0] + i * spacing, lo[1] + j * spacing, 0.0};
                    const double direct = detail::face_heat(geom[fi], x, t, s.h, 2);
                    EXPECT_NEAR(tab.face(fi, {i, j, 0}), direct, 1e-14 * (1 + std::abs(direct)));
                    EXPECT_NEAR(tab.coefficient(fi) * tab.factor(fi, 0, i) * tab.factor(fi, 1, j), direct,
                                1e-14 * (1 + std::abs(direct)));
                }
    }
}

TEST(HeatSup, DipoleAgreesWithDenseLineSearch) {
    // Unit dipole: opposite unit masses on two faces a distance h apart.
    const double h = 1.0;
    const auto s = GridSpec::square(4, h);
    const std::vector<FaceWeight> f{{Face{0, {0, 1, 0}}, 1.0}, {Face{0, {1, 1, 0}}, -1.0}};
    const PhysicalCube support{{0, 0, 0}, 4 * h};
    const auto r = heat_sup(s, f, support, HeatEvalPlan::standard(h, support.side));
    // Dense search along the symmetry axis through the face centres.
    const double yc = 1.5 * h;
    double dense = 0.0;
    for (double t = 1e-6 * h * h; t <= 4096 * h * h; t *= 1.02) {
        const double st = std::sqrt(t);
        const double reach = 1.5 * h + 8 * st;
        const double step = std::min(h, st) / 100;
        std::vector<Point> xs;
        for (double x = 1.5 * h - reach; x <= 1.5 * h + reach; x += step) xs.push_back({x, yc, 0.0});
        const auto v = heat_convolve(s, f, t, xs, 1e-15);
        for (double x : v) dense = std::max(dense, st * std::abs(x));
    }
    EXPECT_NEAR(r.value, dense, 0.01 * dense);
    EXPECT_LE(r.value, dense * (1 + 1e-9));
}

TEST(HeatSup, ScalingLaws) {
    Rng rng(44);
    for (int d : {2, 3}) {
        const auto s1 = d == 2 ? GridSpec::square(4, 1.0) : GridSpec::cube(2, 1.0);
        const auto s2 = d == 2 ? GridSpec::square(4, 2.0) : GridSpec::cube(2, 2.0);
        const auto m = gradient_measure(random_set(s1, rng, 0.5));
        for (int l = 0; l < d; ++l) {
            const auto f1 = component(m, l);  // same face indices; weights kept
            auto f2w = f1;
            for (auto& fw : f2w) fw.weight *= std::pow(2.0, d - 1);
            const PhysicalCube q1{{0, 0, 0}, 4.0}, q2{{0, 0, 0}, 8.0};
            const auto p1 = HeatEvalPlan::standard(1.0, 4.0), p2 = HeatEvalPlan::standard(2.0, 8.0);
            const double v1 = heat_sup(s1, f1, q1, p1).value;
            EXPECT_NEAR(heat_sup(s2, f1, q2, p2).value, std::pow(2.0, 1 - d) * v1, 1e-9 * v1);
            EXPECT_NEAR(heat_sup(s2, f2w, q2, p2).value, v1, 1e-9 * v1);
        }
    }
}

TEST(HeatSup, RefinementStudyOnCellAtom) {
    const auto s = GridSpec::square(8, 0.125);
    const auto f = cell_component(s, {3, 4, 0}, 0);
    const PhysicalCube q{{0.25, 0.5, 0}, 0.5};
    const auto st = heat_sup_study(s, f, q, HeatEvalPlan::standard(s.h, q.side));
    EXPECT_TRUE(st.stable);
    EXPECT_LT(st.movement, 0.01);
    EXPECT_GE(st.refined.value, st.base.value - 1e-12);
}
