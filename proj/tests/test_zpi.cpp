#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "zgcnet/error.hpp"
#include "zgcnet/zpi.hpp"

using namespace zgcnet;

namespace {

const double kPi = std::acos(-1.0);

std::vector<BirthPersistence> random_points(std::mt19937_64& rng, int count, double t) {
    std::uniform_real_distribution<double> b(1.0, t), frac(0.0, 1.0);
    std::vector<BirthPersistence> out;
    for (int i = 0; i < count; ++i) {
        const double birth = b(rng);
        out.push_back({birth, frac(rng) * (t - birth)});
    }
    return out;
}

// Composite Simpson rule on one pixel box, straight from the integral definition.
double pixel_by_quadrature(const BirthPersistence& mu, double x0, double x1, double y0, double y1, double theta) {
    const int m = 200;
    double total = 0.0;
    for (int i = 0; i <= m; ++i) {
        const double wx = (i == 0 || i == m) ? 1 : (i % 2 ? 4 : 2);
        const double x = x0 + (x1 - x0) * i / m;
        for (int j = 0; j <= m; ++j) {
            const double wy = (j == 0 || j == m) ? 1 : (j % 2 ? 4 : 2);
            const double y = y0 + (y1 - y0) * j / m;
            const double r2 = (x - mu.birth) * (x - mu.birth) + (y - mu.persistence) * (y - mu.persistence);
            total += wx * wy * std::exp(-r2 / (2 * theta * theta));
        }
    }
    return total * (x1 - x0) * (y1 - y0) / (9.0 * m * m);
}

}  // namespace

TEST(TransformDiagram, BirthPersistenceCoordinates) {
    ZPD zpd({{1, HalfIndex(3), HalfIndex(5)}, {0, HalfIndex(4), HalfIndex(4)}});
    auto one = transform_diagram(zpd, 1);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].birth, 1.5);
    EXPECT_EQ(one[0].persistence, 1.0);
    auto zero = transform_diagram(zpd, 0);
    ASSERT_EQ(zero.size(), 1u);
    EXPECT_EQ(zero[0].birth, 2.0);
    EXPECT_EQ(zero[0].persistence, 0.0);
    EXPECT_TRUE(transform_diagram(ZPD(), 1).empty());
}

TEST(DefaultDomain, ReachableRange) {
    EXPECT_EQ(default_domain(12), (Domain{1, 12, 0, 11}));
    EXPECT_EQ(default_domain(7), (Domain{1, 7, 0, 6}));
    const Domain one = default_domain(1);
    EXPECT_EQ(one.height(), 1.0);
    EXPECT_GT(one.width(), 0.0);
    EXPECT_THROW(default_domain(0), InvalidInput);
}

TEST(RenderZpi, EmptyDiagramIsZero) {
    auto grid = render_zpi({}, GridSpec::for_window(12), WeightingSpec{});
    EXPECT_EQ(grid.resolution(), 100);
    EXPECT_EQ(grid.pixels().size(), 10000u);
    EXPECT_EQ(grid.max(), 0.0);
}

TEST(RenderZpi, SinglePointMassIsGaussianIntegral) {
    GridSpec spec;
    spec.resolution = 64;
    spec.theta = 0.3;
    spec.domain = {-5.0, 5.0, -5.0, 5.0};
    WeightingSpec constant{WeightingKind::Constant, 1.0};
    auto grid = render_zpi({{0.2, -0.1}}, spec, constant);
    const double mass = 2 * kPi * spec.theta * spec.theta;
    EXPECT_NEAR(grid.sum() / mass, 1.0, 1e-3);
}

TEST(RenderZpi, PixelsMatchQuadrature) {
    GridSpec spec = GridSpec::for_window(4, 12);
    WeightingSpec w = default_weighting(spec);
    const BirthPersistence mu{2.3, 1.1};
    auto grid = render_zpi({mu}, spec, w);
    const double dx = spec.domain.width() / 12, dy = spec.domain.height() / 12;
    for (auto [r, c] : {std::pair{0, 0}, {3, 4}, {4, 5}, {11, 2}, {6, 11}}) {
        const double x0 = spec.domain.x_lo + c * dx, y0 = spec.domain.y_lo + r * dy;
        const double expect = w(mu) * pixel_by_quadrature(mu, x0, x0 + dx, y0, y0 + dy, spec.theta);
        EXPECT_NEAR(grid.at(r, c), expect, 1e-9 * std::max(1.0, expect)) << r << "," << c;
    }
}

TEST(RenderZpi, PeakSitsUnderThePoint) {
    GridSpec spec = GridSpec::for_window(12, 100);
    auto grid = render_zpi({{6.0, 3.0}}, spec, default_weighting(spec));
    int best_r = 0, best_c = 0;
    for (int r = 0; r < 100; ++r)
        for (int c = 0; c < 100; ++c)
            if (grid.at(r, c) > grid.at(best_r, best_c)) best_r = r, best_c = c;
    EXPECT_EQ(best_c, static_cast<int>((6.0 - 1.0) / 11.0 * 100));
    EXPECT_EQ(best_r, static_cast<int>(3.0 / 11.0 * 100));
}

TEST(RenderZpi, DuplicatePointDoublesExactly) {
    GridSpec spec = GridSpec::for_window(8, 40);
    WeightingSpec w = default_weighting(spec);
    auto one = render_zpi({{2.5, 1.5}}, spec, w);
    auto two = render_zpi({{2.5, 1.5}, {2.5, 1.5}}, spec, w);
    for (std::size_t k = 0; k < one.pixels().size(); ++k) EXPECT_EQ(two.pixels()[k], 2 * one.pixels()[k]);
}

TEST(RenderZpi, AdditiveAndMonotone) {
    std::mt19937_64 rng(31);
    GridSpec spec = GridSpec::for_window(12, 50);
    WeightingSpec w = default_weighting(spec);
    for (int trial = 0; trial < 20; ++trial) {
        auto a = random_points(rng, 1 + trial % 7, 12);
        auto b = random_points(rng, 1 + trial % 5, 12);
        auto ab = a;
        ab.insert(ab.end(), b.begin(), b.end());
        auto ga = render_zpi(a, spec, w), gb = render_zpi(b, spec, w), gab = render_zpi(ab, spec, w);
        for (std::size_t k = 0; k < gab.pixels().size(); ++k) {
            const double sum = ga.pixels()[k] + gb.pixels()[k];
            EXPECT_LE(std::abs(gab.pixels()[k] - sum), 1e-12 * std::max(sum, 1e-300));
            EXPECT_GE(gab.pixels()[k], ga.pixels()[k]);
            EXPECT_GE(ga.pixels()[k], 0.0);
        }
    }
}

TEST(RenderZpi, DiagonalPointsVanishUnderLinearWeight) {
    GridSpec spec = GridSpec::for_window(6, 30);
    auto grid = render_zpi({{2.0, 0.0}, {3.5, 0.0}}, spec, default_weighting(spec));
    EXPECT_EQ(grid.max(), 0.0);
    WeightingSpec constant{WeightingKind::Constant, 1.0};
    EXPECT_GT(render_zpi({{2.0, 0.0}}, spec, constant).max(), 0.0);
}

TEST(RenderZpi, WeightIsCapped) {
    WeightingSpec w{WeightingKind::LinearPersistence, 2.0};
    EXPECT_EQ(w({1.0, 0.5}), 0.5);
    EXPECT_EQ(w({1.0, 5.0}), 2.0);
}

TEST(RenderZpi, RejectsBadBandwidth) {
    GridSpec spec = GridSpec::for_window(5, 10);
    spec.theta = 0.0;
    EXPECT_THROW(render_zpi({}, spec, WeightingSpec{}), InvalidInput);
    spec.theta = -1.0;
    EXPECT_THROW(render_zpi({}, spec, WeightingSpec{}), InvalidInput);
    EXPECT_THROW(GridSpec::for_window(5, 0), InvalidInput);
}

TEST(ZpiFile, RoundTripIsExact) {
    std::mt19937_64 rng(4);
    GridSpec spec = GridSpec::for_window(7, 20);
    auto grid = render_zpi(random_points(rng, 6, 7), spec, default_weighting(spec));
    std::stringstream ss;
    write_zpi(ss, grid);
    std::string header;
    std::getline(ss, header);
    EXPECT_EQ(header.substr(0, 3), "20 ");
    ss.seekg(0);
    auto back = read_zpi(ss);
    EXPECT_EQ(back.spec(), grid.spec());
    EXPECT_EQ(back.pixels(), grid.pixels());
}

TEST(ZpiFile, TruncatedInputFails) {
    std::istringstream in("2 1 2 0 1 0.5\n0 0\n0\n");
    EXPECT_THROW(read_zpi(in), ParseError);
}

TEST(ZpiFile, GraymapHeaderAndSize) {
    GridSpec spec = GridSpec::for_window(5, 8);
    auto grid = render_zpi({{2.0, 1.0}}, spec, default_weighting(spec));
    std::ostringstream os;
    write_pgm(os, grid);
    const std::string s = os.str();
    EXPECT_EQ(s.substr(0, 11), "P5\n8 8\n255\n");
    EXPECT_EQ(s.size(), 11u + 64u);
}
