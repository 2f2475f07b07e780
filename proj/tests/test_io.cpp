#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "test_support.hpp"
#include "zgcnet/error.hpp"
#include "zgcnet/io.hpp"
#include "zgcnet/zigzag.hpp"

using namespace zgcnet;

namespace {

void expect_same(const DynamicNetwork& a, const DynamicNetwork& b) {
    ASSERT_EQ(a.size(), b.size());
    ASSERT_EQ(a.universe_size(), b.universe_size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].index(), b[k].index());
        EXPECT_EQ(a[k].nodes(), b[k].nodes());
        EXPECT_EQ(a[k].edges(), b[k].edges());
    }
}

}  // namespace

TEST(SnapshotCsv, ReadsEdgesLoneNodesAndGaps) {
    std::istringstream in(
        "t,u,v,w\n"
        "# comment\n"
        "1,0,1,0.5\n"
        "\n"
        "1,3,3,0\n"
        "3,1,2,2\n");
    const DynamicNetwork net = read_snapshot_csv(in);
    ASSERT_EQ(net.size(), 3u);
    EXPECT_EQ(net.universe_size(), 4u);
    EXPECT_EQ(net[0].nodes(), (std::set<NodeId>{0, 1, 3}));
    EXPECT_DOUBLE_EQ(net[0].weight(0, 1), 0.5);
    EXPECT_TRUE(net[1].nodes().empty());
    EXPECT_EQ(net[1].index(), 2);
    EXPECT_EQ(net[2].edge_count(), 1u);
}

TEST(SnapshotCsv, ZeroWeightMarksNodesWithoutEdge) {
    std::istringstream in("1,0,1,0\n");
    const DynamicNetwork net = read_snapshot_csv(in);
    EXPECT_EQ(net[0].nodes().size(), 2u);
    EXPECT_EQ(net[0].edge_count(), 0u);
}

TEST(SnapshotCsv, RoundTripIsExact) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        auto window = fixture::random_window(rng, 9, 6, 0.3);
        for (auto& s : window)
            for (const auto& [e, w] : std::map<Edge, double>(s.edges()))
                s.set_weight(e.u, e.v, std::uniform_real_distribution<double>(0.01, 3.0)(rng));
        const DynamicNetwork net(window);
        std::ostringstream out;
        write_snapshot_csv(out, net);
        std::istringstream in(out.str());
        expect_same(net, read_snapshot_csv(in, net.universe_size()));
    }
}

TEST(SnapshotCsv, ErrorsCarryLineNumbers) {
    auto line_of = [](const std::string& text) -> std::size_t {
        std::istringstream in(text);
        try {
            read_snapshot_csv(in);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    EXPECT_EQ(line_of("t,u,v,w\n1,0,1,1\n1,0,x,1\n"), 3u);
    EXPECT_EQ(line_of("1,0,1\n"), 1u);
    EXPECT_EQ(line_of("1,0,1,1\n\n1,1,0,2\n"), 3u);
    EXPECT_EQ(line_of("1,2,2,1\n"), 1u);
    EXPECT_EQ(line_of("1,0,1,-1\n"), 1u);
    EXPECT_EQ(line_of("0,0,1,1\n"), 1u);
    std::istringstream in("1,0,5,1\n");
    EXPECT_THROW(read_snapshot_csv(in, 3), ParseError);
    std::istringstream empty("t,u,v,w\n");
    EXPECT_THROW(read_snapshot_csv(empty), InvalidInput);
}

TEST(FeatureCsv, RoundTripIsExact) {
    FeatureSeries fs(5, 3, 2);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> d;
    for (std::size_t t = 0; t < 5; ++t)
        for (std::size_t n = 0; n < 3; ++n)
            for (std::size_t f = 0; f < 2; ++f) fs.at(t, n, f) = d(rng);
    std::ostringstream out;
    write_feature_csv(out, fs);
    EXPECT_EQ(out.str().substr(0, 13), "t,node,f1,f2\n");
    std::istringstream in(out.str());
    const FeatureSeries back = read_feature_csv(in);
    ASSERT_EQ(back.steps(), 5u);
    ASSERT_EQ(back.nodes(), 3u);
    ASSERT_EQ(back.features(), 2u);
    EXPECT_EQ(back.data(), fs.data());
}

TEST(FeatureCsv, RejectsGapsAndDuplicates) {
    std::istringstream gap("1,0,1\n2,1,1\n");
    EXPECT_THROW(read_feature_csv(gap), InvalidInput);
    std::istringstream dup("1,0,1\n1,0,2\n");
    EXPECT_THROW(read_feature_csv(dup), ParseError);
    std::istringstream ragged("1,0,1,2\n1,1,1\n");
    EXPECT_THROW(read_feature_csv(ragged), ParseError);
}

TEST(ZpdCsv, RoundTrip) {
    const ZPD zpd({{0, HalfIndex(2), HalfIndex(9)}, {1, HalfIndex(3), HalfIndex(5)}, {0, HalfIndex(4), HalfIndex(4)}});
    std::ostringstream out;
    write_zpd_csv(out, zpd);
    EXPECT_EQ(out.str().rfind("p,twice_birth,twice_death\n", 0), 0u);
    std::istringstream in(out.str());
    EXPECT_EQ(read_zpd_csv(in), zpd);
    std::istringstream bad("p,twice_birth,twice_death\n0,6,4\n");
    EXPECT_THROW(read_zpd_csv(bad), ParseError);
}

TEST(KeyValues, ParsesBothForms) {
    std::istringstream in("# run\nwindow = 8\nhorizon 4  # trailing\n\nname=demo\n");
    const auto kv = read_key_values(in);
    EXPECT_EQ(kv.at("window"), "8");
    EXPECT_EQ(kv.at("horizon"), "4");
    EXPECT_EQ(kv.at("name"), "demo");
    std::istringstream bad("lonely\n");
    EXPECT_THROW(read_key_values(bad), ParseError);
}

TEST(Split, KeepsEmptyFields) {
    EXPECT_EQ(split("a,,b", ','), (std::vector<std::string>{"a", "", "b"}));
    EXPECT_EQ(split("", ','), (std::vector<std::string>{""}));
}
