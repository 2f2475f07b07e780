#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "test_support.hpp"
#include "zigzag_oracle.hpp"
#include "zgcnet/error.hpp"
#include "zgcnet/zigzag.hpp"

using namespace zgcnet;

namespace {

const FiltrationMode kSublevel{FiltrationKind::WeightSublevelClique, {}};

PersistencePoint pt(int dim, double b, double d) {
    return {dim, HalfIndex(static_cast<int>(2 * b)), HalfIndex(static_cast<int>(2 * d))};
}

Snapshot graph(int index, std::size_t n, std::vector<std::pair<NodeId, NodeId>> edges, double w = 0.1) {
    Snapshot s(index, n);
    for (auto [u, v] : edges) s.set_weight(u, v, w);
    return s;
}

ZPD zpd_of(const std::vector<Snapshot>& window, double nu = 0.5) {
    return compute_zigzag_persistence(build_zigzag(window, nu, kSublevel));
}

}  // namespace

TEST(Zigzag, CycleAppearsAndVanishes) {
    std::vector<Snapshot> w{graph(1, 4, {{0, 1}, {1, 2}, {2, 3}}), graph(2, 4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}),
                            graph(3, 4, {{0, 1}, {1, 2}, {2, 3}})};
    ZPD zpd = zpd_of(w);
    EXPECT_EQ(zpd.points_of(0), std::vector<PersistencePoint>{pt(0, 1, 3)});
    EXPECT_EQ(zpd.points_of(1), std::vector<PersistencePoint>{pt(1, 1.5, 2.5)});
}

TEST(Zigzag, ComponentsMerge) {
    std::vector<Snapshot> w{graph(1, 2, {}), graph(2, 2, {{0, 1}})};
    w[0].add_node(0);
    w[0].add_node(1);
    ZPD zpd = zpd_of(w);
    EXPECT_EQ(zpd, ZPD({pt(0, 1, 2), pt(0, 1, 1)}));
}

TEST(Zigzag, SingleSnapshotGivesPointBars) {
    Snapshot s = graph(1, 6, {{0, 1}, {2, 3}});
    s.add_node(5);
    ZPD zpd = zpd_of({s});
    EXPECT_EQ(zpd.points_of(0), std::vector<PersistencePoint>(3, pt(0, 1, 1)));
    EXPECT_TRUE(zpd.points_of(1).empty());
}

TEST(Zigzag, BuildsUnionComplexes) {
    std::vector<Snapshot> w{graph(1, 3, {{0, 1}}), graph(2, 3, {{1, 2}})};
    ZigzagFiltration zf = build_zigzag(w, 0.5, kSublevel);
    ASSERT_EQ(zf.complexes.size(), 3u);
    EXPECT_EQ(zf.complexes[1].count(1), 2u);
    EXPECT_EQ(zf.complexes[0].count(0), 2u);
    EXPECT_EQ(zf.window_length(), 2u);
    ZPD zpd = compute_zigzag_persistence(zf);
    EXPECT_EQ(zpd, ZPD({pt(0, 1, 2)}));
}

TEST(Zigzag, IsolatedNodesLiveThroughWindow) {
    std::vector<Snapshot> w;
    for (int t = 1; t <= 4; ++t) {
        Snapshot s(t, 5);
        for (NodeId v = 0; v < 5; ++v) s.add_node(v);
        w.push_back(s);
    }
    EXPECT_EQ(zpd_of(w), ZPD(std::vector<PersistencePoint>(5, pt(0, 1, 4))));
}

TEST(Zigzag, MatchesBruteForceModuleDecomposition) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 4 + trial % 4;
        const std::size_t t = 1 + trial % 4;
        auto w = fixture::random_window(rng, n, t, 0.45);
        const double nu = std::uniform_real_distribution<double>(0.2, 1.0)(rng);
        ZigzagFiltration zf = build_zigzag(w, nu, kSublevel);
        ZPD zpd = compute_zigzag_persistence(zf);
        for (int p = 0; p <= 1; ++p)
            EXPECT_EQ(fixture::as_multiset(zpd, p), fixture::oracle_barcode(zf, p)) << "trial " << trial << " p " << p;
    }
}

TEST(Zigzag, BettiConsistencyOnRandomWindows) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 + rng() % 10;
        const std::size_t t = 1 + rng() % 8;
        auto w = fixture::random_window(rng, n, t, 0.3);
        const double nu = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        ZigzagFiltration zf = build_zigzag(w, nu, kSublevel);
        ZPD zpd = compute_zigzag_persistence(zf);
        EXPECT_TRUE(betti_consistency_check(zf, zpd).ok()) << "trial " << trial;
        for (const auto& p : zpd.points()) {
            EXPECT_LE(p.birth, p.death);
            EXPECT_GE(p.birth.twice, 2);
            EXPECT_LE(p.death.twice, static_cast<int>(2 * t));
        }
    }
}

TEST(Zigzag, ComponentBarsMatchUnionFind) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 50; ++trial) {
        auto w = fixture::random_window(rng, 9, 5, 0.2);
        ZigzagFiltration zf = build_zigzag(w, 0.6, kSublevel);
        ZPD zpd = compute_zigzag_persistence(zf, 0);
        EXPECT_TRUE(zpd.points_of(1).empty());
        for (std::size_t j = 0; j < zf.complexes.size(); ++j) {
            const HalfIndex at = ZigzagFiltration::position(j);
            std::size_t covering = 0;
            for (const auto& p : zpd.points_of(0)) covering += p.birth <= at && at <= p.death;
            EXPECT_EQ(covering, fixture::component_count(zf.complexes[j]));
        }
    }
}

TEST(Zigzag, TimeReversalMirrorsDiagram) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t t = 1 + trial % 6;
        auto w = fixture::random_window(rng, 8, t, 0.35);
        ZPD forward = zpd_of(w, 0.7);
        std::reverse(w.begin(), w.end());
        ZPD backward = zpd_of(w, 0.7);
        std::vector<PersistencePoint> mirrored;
        const int span = 2 * (static_cast<int>(t) + 1);
        for (const auto& p : forward.points())
            mirrored.push_back({p.dim, HalfIndex(span - p.death.twice), HalfIndex(span - p.birth.twice)});
        EXPECT_EQ(backward, ZPD(mirrored)) << "trial " << trial;
    }
}

TEST(Zigzag, Deterministic) {
    std::mt19937_64 rng(12);
    auto w = fixture::random_window(rng, 10, 6, 0.35);
    EXPECT_EQ(zpd_of(w), zpd_of(w));
}

TEST(Zigzag, ConsistencyCheckCatchesShiftedDeath) {
    std::vector<Snapshot> w{graph(1, 4, {{0, 1}, {1, 2}, {2, 3}}), graph(2, 4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}),
                            graph(3, 4, {{0, 1}, {1, 2}, {2, 3}})};
    ZigzagFiltration zf = build_zigzag(w, 0.5, kSublevel);
    ZPD good = compute_zigzag_persistence(zf);
    ASSERT_TRUE(betti_consistency_check(zf, good).ok());
    ZPD bad({pt(0, 1, 3), pt(1, 1.5, 3)});
    BettiReport report = betti_consistency_check(zf, bad);
    ASSERT_FALSE(report.ok());
    EXPECT_EQ(report.violations.front().dim, 1);
    EXPECT_EQ(report.violations.front().at, HalfIndex(6));
}

TEST(Zigzag, NonMonotoneModeReportsArrow) {
    // weighted degree rises under union, so node 1 can drop out of C(G1 u G2)
    Snapshot a = graph(1, 3, {{0, 1}}, 0.3);
    Snapshot b = graph(2, 3, {{1, 2}}, 0.3);
    FiltrationMode deg{FiltrationKind::WeightedDegreeSublevel, {}};
    try {
        build_zigzag({a, b}, 0.4, deg);
        FAIL() << "expected InclusionError";
    } catch (const InclusionError& e) {
        EXPECT_NE(std::string(e.what()).find("C(G1)"), std::string::npos) << e.what();
    }
    ZigzagFiltration zf = build_zigzag({a, b}, 0.4, deg, UnionRule::ComplexUnion);
    EXPECT_TRUE(zf.complexes[0].is_subset_of(zf.complexes[1]));
    EXPECT_TRUE(zf.complexes[2].is_subset_of(zf.complexes[1]));
    EXPECT_TRUE(betti_consistency_check(zf, compute_zigzag_persistence(zf)).ok());
}

TEST(Zigzag, RejectsBadArguments) {
    EXPECT_THROW(build_zigzag({}, 0.5, kSublevel), InvalidInput);
    ZigzagFiltration zf = build_zigzag({graph(1, 2, {{0, 1}})}, 0.5, kSublevel);
    EXPECT_THROW(compute_zigzag_persistence(zf, 2), InvalidInput);
    EXPECT_THROW(ZPD({pt(0, 2, 1)}), InvalidInput);
}
