#include <doctest.h>

#include <set>

#include "hisq/error.hpp"
#include "hisq/lattice.hpp"

using namespace hisq;

TEST_CASE("site_index is lexicographic with x fastest") {
    const LatticeGeometry g({4, 4, 4, 4});
    CHECK(g.site_index({{0, 0, 0, 0}}) == 0);
    CHECK(g.site_index({{1, 0, 0, 0}}) == 1);
    CHECK(g.site_index({{0, 0, 0, 1}}) == 64);
    CHECK_THROWS_AS((void)g.site_index({{4, 0, 0, 0}}), InvalidArgument);
    CHECK_THROWS_AS((void)g.site_index({{0, -1, 0, 0}}), InvalidArgument);
}

TEST_CASE("site_index is a bijection") {
    const LatticeGeometry g({4, 6, 4, 8});
    std::set<std::int64_t> seen;
    for (int t = 0; t < 8; ++t)
        for (int z = 0; z < 4; ++z)
            for (int y = 0; y < 6; ++y)
                for (int x = 0; x < 4; ++x) {
                    const SiteCoords c{{x, y, z, t}};
                    const auto idx = g.site_index(c);
                    CHECK(g.coords(idx) == c);
                    seen.insert(idx);
                }
    CHECK(seen.size() == static_cast<std::size_t>(g.volume()));
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == g.volume() - 1);
}

TEST_CASE("geometry validation") {
    CHECK_THROWS_AS(LatticeGeometry({2, 4, 4, 4}), InvalidArgument);
    CHECK_THROWS_AS(LatticeGeometry({4, 5, 4, 4}), InvalidArgument);
    CHECK_NOTHROW(LatticeGeometry({4, 4, 4, 4}));
    const auto g = LatticeGeometry::parse("32x32x32x8");
    CHECK(g.dims() == std::array<int, 4>{32, 32, 32, 8});
    CHECK(g.volume() == 32 * 32 * 32 * 8);
    CHECK(g.temporal_bc() == BoundaryCondition::antiperiodic);
    CHECK_THROWS_AS(LatticeGeometry::parse("32x32x32"), InvalidArgument);
    CHECK_THROWS_AS(LatticeGeometry::parse("4x4xax4"), InvalidArgument);
}

TEST_CASE("parity") {
    CHECK(parity({{0, 0, 0, 0}}) == Parity::even);
    CHECK(parity({{1, 0, 0, 0}}) == Parity::odd);
    CHECK(parity({{1, 1, 0, 0}}) == Parity::even);
}

TEST_CASE("neighbor table examples") {
    const LatticeGeometry per({4, 4, 4, 4}, BoundaryCondition::periodic);
    const NeighborTable tp(per);
    const auto s = per.site_index({{3, 0, 0, 0}});
    CHECK(tp.neighbor(s, 0, Hop::forward1) == per.site_index({{0, 0, 0, 0}}));
    CHECK(tp.phase(s, 0, Hop::forward1) == 1);
    // periodic time never flips sign
    CHECK(tp.phase(per.site_index({{0, 0, 0, 3}}), 3, Hop::forward1) == 1);

    const LatticeGeometry anti({4, 4, 4, 4}, BoundaryCondition::antiperiodic);
    const NeighborTable ta(anti);
    const auto t3 = anti.site_index({{0, 0, 0, 3}});
    CHECK(ta.neighbor(t3, 3, Hop::forward1) == 0);
    CHECK(ta.phase(t3, 3, Hop::forward1) == -1);

    const auto t2 = anti.site_index({{0, 0, 0, 2}});
    CHECK(ta.neighbor(t2, 3, Hop::forward3) == anti.site_index({{0, 0, 0, 1}}));
    CHECK(ta.phase(t2, 3, Hop::forward3) == -1);
    // spatial wrap stays periodic under antiperiodic time
    CHECK(ta.phase(anti.site_index({{0, 0, 0, 0}}), 0, Hop::backward3) == 1);
    // no crossing
    CHECK(ta.phase(anti.site_index({{0, 0, 0, 0}}), 3, Hop::forward3) == 1);
    CHECK(ta.phase(anti.site_index({{0, 0, 0, 0}}), 3, Hop::backward1) == -1);
}

TEST_CASE("neighbor table involution and parity flip") {
    for (auto bc : {BoundaryCondition::periodic, BoundaryCondition::antiperiodic}) {
        const LatticeGeometry g({4, 6, 8, 4}, bc);
        const NeighborTable nt(g);
        for (std::int64_t s = 0; s < g.volume(); ++s) {
            const auto p = parity(g.coords(s));
            for (int mu = 0; mu < 4; ++mu) {
                for (auto [fwd, bwd] : {std::pair{Hop::forward1, Hop::backward1}, std::pair{Hop::forward3, Hop::backward3}}) {
                    const auto n = nt.neighbor(s, mu, fwd);
                    REQUIRE(nt.neighbor(n, mu, bwd) == s);
                    REQUIRE(nt.phase(s, mu, fwd) * nt.phase(n, mu, bwd) == 1);
                    REQUIRE(parity(g.coords(n)) != p);
                    const auto m = nt.neighbor(s, mu, bwd);
                    REQUIRE(nt.neighbor(m, mu, fwd) == s);
                    REQUIRE(parity(g.coords(m)) != p);
                }
            }
        }
    }
}
