#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "support.hpp"

using namespace bvt;

namespace {

// Exhaustive maximum of the boxing constant over every nonempty subset of
// a 4x4 grid, frozen after the first enumeration.
constexpr double kC4 = 1.0;

void expect_boxing_properties(const CellSet& u) {
    const auto& s = u.spec();
    const int d = s.dim;
    const auto b = box_set(u);
    ASSERT_TRUE(b.partition_ok);
    // Partition, counted independently.
    std::vector<int> owners(s.num_cells(), 0);
    for (const auto& bc : b.cubes) {
        for (std::size_t i = 0; i < s.num_cells(); ++i)
            if (bc.cube.contains(s.cell_at(i), d)) ++owners[i];
    }
    for (std::size_t i = 0; i < s.num_cells(); ++i)
        if (u.contains_index(i)) {
            EXPECT_EQ(owners[i], 1);
        }
    // Disjoint interiors: no cube contains another.
    for (std::size_t i = 0; i < b.cubes.size(); ++i)
        for (std::size_t j = 0; j < b.cubes.size(); ++j)
            if (i != j) {
                EXPECT_FALSE(b.cubes[i].cube.contains(b.cubes[j].cube, d));
            }
    // Identity at measure level.
    std::vector<std::pair<double, VectorFaceMeasure>> parts;
    for (const auto& bc : b.cubes) parts.emplace_back(1.0, gradient_measure(restrict_to(u, bc.cube)));
    EXPECT_EQ(max_weight_difference(sum_measures(s, parts), gradient_measure(u)), 0.0);
    // Size condition with the reported constant, stopping densities.
    for (const auto& bc : b.cubes) {
        const double side = bc.cube.side(s);
        EXPECT_LE(std::pow(side, d - 1), b.constant * bc.boundary_mass * (1 + 1e-12));
        EXPECT_LT(2 * bc.cells, std::int64_t{1} << (bc.cube.level * d));
        EXPECT_EQ(bc.boundary_mass, measure_on_cube(gradient_measure(u), bc.cube, Attribution::closed));
    }
    // Maximality: no returned cube lies strictly inside any stop cube.
    const Boxer boxer(u);
    std::set<DyadicCube> stops;
    for (const auto& c : u.cells()) stops.insert(boxer.stop_cube(c));
    for (const auto& bc : b.cubes) {
        EXPECT_TRUE(stops.count(bc.cube));
        for (const auto& r : stops)
            if (r != bc.cube) {
                EXPECT_FALSE(r.contains(bc.cube, d));
            }
    }
    EXPECT_DOUBLE_EQ(boxing_constant(u, boxing_decompose(u)), b.constant);
}

}  // namespace

TEST(Density, Examples) {
    const auto s = GridSpec::square(4);
    CellSet u(s);
    const DyadicCube q{1, {0, 0, 0}};
    u.insert({3, 3, 0});
    EXPECT_EQ(density(u, q), 0.0);
    u.insert({0, 0, 0});
    EXPECT_EQ(density(u, q), 0.25);
    u.insert({0, 1, 0});
    u.insert({1, 0, 0});
    u.insert({1, 1, 0});
    EXPECT_EQ(density(u, q), 1.0);
    // Cubes sticking out of the extent count implicit zeros.
    EXPECT_EQ(density(u, DyadicCube{3, {0, 0, 0}}), 5.0 / 64.0);
    EXPECT_EQ(density(u, DyadicCube{2, {-1, -1, 0}}), 0.0);
}

TEST(StopCube, IsolatedCornerCellStopsAtLevelOne) {
    CellSet u(GridSpec::square(8));
    u.insert({2, 4, 0});
    const auto q = stop_cube({2, 4, 0}, u);
    EXPECT_EQ(q.level, 1);
    EXPECT_EQ(q.coords[0], 1);
    EXPECT_EQ(q.coords[1], 2);
    EXPECT_THROW(stop_cube({0, 0, 0}, u), ValidationError);
}

TEST(StopCube, FullLevelOneCubeStopsAtLevelTwo) {
    CellSet u(GridSpec::square(8));
    for (int i = 4; i < 6; ++i)
        for (int j = 2; j < 4; ++j) u.insert({i, j, 0});
    for (const auto& c : u.cells()) {
        const auto q = stop_cube(c, u);
        EXPECT_EQ(q.level, 2);
        EXPECT_EQ(q.coords[0], 1);
        EXPECT_EQ(q.coords[1], 0);
    }
}

TEST(StopCube, NeverExceedsSystemHeight) {
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const auto u = random_set(GridSpec::square(16), rng, rng.uniform(0.05, 0.95));
        const Boxer b(u);
        for (const auto& c : u.cells()) EXPECT_LE(b.stop_cube(c).level, b.system().max_level);
    }
}

TEST(DyadicSystem, HeightIsSmallestWithDensityMargin) {
    const auto s = GridSpec::square(64);
    EXPECT_EQ(DyadicSystem::for_count(s, 1).max_level, 1);
    EXPECT_EQ(DyadicSystem::for_count(s, 2).max_level, 2);
    EXPECT_EQ(DyadicSystem::for_count(s, 4).max_level, 2);
    EXPECT_EQ(DyadicSystem::for_count(s, 8).max_level, 3);
    EXPECT_EQ(DyadicSystem::for_count(GridSpec::cube(8), 4).max_level, 2);
}

TEST(Boxing, SingleCell) {
    for (int d : {2, 3}) {
        const auto s = d == 2 ? GridSpec::square(5, 0.5) : GridSpec::cube(5, 0.5);
        CellSet u(s);
        u.insert({3, 1, d == 3 ? 2 : 0});
        const auto b = box_set(u);
        ASSERT_EQ(b.cubes.size(), 1u);
        EXPECT_EQ(b.cubes[0].cube.level, 1);
        // (2h)^{d-1} / (2d h^{d-1}) = 2^{d-1} / (2d)
        EXPECT_DOUBLE_EQ(b.constant, std::ldexp(1.0, d - 1) / (2.0 * d));
    }
    CellSet u(GridSpec::square(3));
    u.insert({1, 1, 0});
    EXPECT_EQ(box_set(u).constant, 0.5);
}

TEST(Boxing, TwoSidedCubeGivesFourSidedCube) {
    CellSet u(GridSpec::square(8));
    for (int i = 2; i < 4; ++i)
        for (int j = 2; j < 4; ++j) u.insert({i, j, 0});
    const auto b = box_set(u);
    ASSERT_EQ(b.cubes.size(), 1u);
    EXPECT_EQ(b.cubes[0].cube.side(u.spec()), 4.0);
    EXPECT_EQ(b.cubes[0].boundary_mass, 8.0);
    EXPECT_EQ(b.constant, 0.5);
}

TEST(Boxing, FarCellsGetSeparateCubes) {
    CellSet u(GridSpec::square(16));
    u.insert({1, 1, 0});
    u.insert({14, 12, 0});
    const auto cubes = boxing_decompose(u);
    ASSERT_EQ(cubes.size(), 2u);
    EXPECT_EQ(cubes[0].level, 1);
    EXPECT_EQ(cubes[1].level, 1);
    EXPECT_FALSE(cubes[0] == cubes[1]);
}

TEST(Boxing, EmptySetRejected) { EXPECT_THROW(box_set(CellSet(GridSpec::square(4))), ValidationError); }

TEST(Boxing, OutputSortedByLevelThenCoordinates) {
    Rng rng(55);
    const auto u = random_set(GridSpec::square(32), rng, 0.3);
    const auto cubes = boxing_decompose(u);
    EXPECT_TRUE(std::is_sorted(cubes.begin(), cubes.end(), boxing_order));
    for (std::size_t i = 1; i < cubes.size(); ++i) EXPECT_GE(cubes[i - 1].level, cubes[i].level);
}

TEST(Boxing, PropertiesOnRandomSets) {
    Rng rng(314);
    for (int trial = 0; trial < 40; ++trial) {
        const int d = trial % 3 == 2 ? 3 : 2;
        const auto s = d == 2 ? GridSpec::square(rng.integer(1, 24)) : GridSpec::cube(rng.integer(1, 8));
        expect_boxing_properties(random_set(s, rng, rng.uniform(0.02, 0.9)));
    }
}

TEST(Boxing, PropertiesOnCorpusSets) {
    for (auto kind : {CorpusKind::blobs, CorpusKind::union_of_cubes, CorpusKind::percolation})
        for (std::size_t i = 0; i < 3; ++i) {
            CorpusParams p;
            p.size = 32;
            expect_boxing_properties(support_set(generate_item(kind, 17, i, p)));
        }
}

TEST(Boxing, IndependentOfInsertionOrder) {
    Rng rng(6);
    const auto u = random_set(GridSpec::square(20), rng, 0.35);
    auto cells = u.cells();
    std::reverse(cells.begin(), cells.end());
    CellSet v(u.spec());
    for (const auto& c : cells) v.insert(c);
    EXPECT_EQ(boxing_decompose(u), boxing_decompose(v));
}

TEST(Boxing, ExhaustiveFourByFourConstant) {
    const auto s = GridSpec::square(4);
    double cmax = 0.0;
    std::uint64_t arg = 0;
    for (std::uint64_t mask = 1; mask < (1u << 16); ++mask) {
        const auto u = set_from_mask(s, mask);
        const auto b = box_set(u);
        ASSERT_TRUE(b.partition_ok);
        if (b.constant > cmax) {
            cmax = b.constant;
            arg = mask;
        }
    }
    EXPECT_EQ(cmax, kC4) << "argmax mask " << arg;
}
