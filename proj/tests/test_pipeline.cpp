#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "zgcnet/error.hpp"
#include "zgcnet/io.hpp"
#include "zgcnet/metrics.hpp"
#include "zgcnet/pipeline.hpp"

using namespace zgcnet;
namespace fs = std::filesystem;

namespace {

class Workdir {
public:
    Workdir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("zgcnet_pipeline_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~Workdir() { fs::remove_all(path_); }
    std::string operator/(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
};

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

// Path 0-1-2-3 with the closing edge 3-0 only in the middle snapshot.
const char* kFourCycle =
    "t,u,v,w\n"
    "1,0,1,1\n1,1,2,1\n1,2,3,1\n"
    "2,0,1,1\n2,1,2,1\n2,2,3,1\n2,0,3,1\n"
    "3,0,1,1\n3,1,2,1\n3,2,3,1\n";

RunConfig fixture_config(const Workdir& dir) {
    RunConfig cfg;
    cfg.snapshots = dir / "snapshots.csv";
    cfg.features = dir / "features.csv";
    cfg.out_dir = dir / "out";
    cfg.threads = 2;
    return cfg;
}

RunConfig small_training_config(const Workdir& dir) {
    RunConfig cfg = fixture_config(dir);
    cfg.synth.nodes = 8;
    cfg.synth.steps = 160;
    cfg.synth.period = 4;
    cfg.synth.cycle_length = 5;
    cfg.model.window = 4;
    cfg.model.horizon = 2;
    cfg.model.width = 8;
    cfg.model.layers = 1;
    cfg.model.epochs = 3;
    cfg.stride = 4;
    cfg.zpi_resolution = 16;
    return cfg;
}

}  // namespace

TEST(RunConfig, SetGetAndOverride) {
    RunConfig cfg;
    for (const auto& key : RunConfig::keys()) EXPECT_NO_THROW(cfg.set(key, cfg.get(key))) << key;
    cfg.apply({{"window", "12"}, {"dims", "1"}, {"nu_star", "0.3"}, {"check", "yes"}, {"ablation", "no-zigzag"}});
    EXPECT_EQ(cfg.model.window, 12);
    EXPECT_EQ(cfg.dims, std::vector<int>{1});
    EXPECT_EQ(RunConfig{}.dims, std::vector<int>{1});
    EXPECT_DOUBLE_EQ(cfg.nu_star, 0.3);
    EXPECT_TRUE(cfg.check);
    EXPECT_EQ(cfg.get("ablation"), "no-zigzag");
    EXPECT_THROW(cfg.set("no_such_key", "1"), InvalidInput);
    EXPECT_THROW(cfg.set("window", "eight"), InvalidInput);
    EXPECT_THROW(cfg.set("dims", "2"), InvalidInput);
    EXPECT_THROW(cfg.set("ablation", "no-gru"), InvalidInput);
    EXPECT_THROW(cfg.set("filtration", "cech"), InvalidInput);
}

TEST(RunConfig, LoadsKeyValueFile) {
    Workdir dir;
    write_text(dir / "run.cfg", "# demo\nwindow = 6\nhorizon 3\nnoise_sigma = 2\n");
    const RunConfig cfg = RunConfig::load(dir / "run.cfg");
    EXPECT_EQ(cfg.model.window, 6);
    EXPECT_EQ(cfg.model.horizon, 3);
    EXPECT_EQ(cfg.dataset().noise.sigma, 2.0);
    EXPECT_EQ(cfg.dataset().noise.fraction, 0.3);
    write_text(dir / "bad.cfg", "window = 6\nbogus = 1\n");
    EXPECT_THROW(RunConfig::load(dir / "bad.cfg"), InvalidInput);
}

TEST(Synthetic, CycleIndicatorRecoverableFromBars) {
    SyntheticSpec spec;
    spec.period = 4;
    spec.steps = 200;
    spec.delta = 1.0;
    spec.noise = 0.0;
    const SyntheticData d = gen_synthetic(spec);
    ASSERT_EQ(d.net.size(), 200u);
    int hits = 0, cycles = 0;
    for (std::size_t t = 0; t < d.net.size(); ++t) {
        const ZPD zpd = compute_zigzag_persistence(build_zigzag({d.net[t]}, 1.0, {}), 1);
        hits += (!zpd.points_of(1).empty()) == (d.cycle[t] == 1);
        cycles += d.cycle[t];
    }
    EXPECT_EQ(hits, 200);
    EXPECT_GT(cycles, 0);
    EXPECT_LT(cycles, 200);
    // Response follows an active block by exactly one period.
    for (std::size_t t = 4; t < 200; ++t) {
        const bool prev_active = d.cycle[(t / 4 - 1) * 4] == 1;
        EXPECT_EQ(d.response[t], prev_active && t % 4 < 4 ? 1.0 : 0.0);
    }
}

TEST(Synthetic, NullDeltaCarriesNoResponse) {
    SyntheticSpec spec;
    spec.delta = 0.0;
    spec.steps = 64;
    const SyntheticData d = gen_synthetic(spec);
    for (double r : d.response) EXPECT_EQ(r, 0.0);
    SyntheticSpec shifted = spec;
    shifted.delta = 1.0;
    shifted.noise = 0.0;
    spec.noise = 0.0;
    const SyntheticData a = gen_synthetic(spec), b = gen_synthetic(shifted);
    for (std::size_t t = 0; t < 64; ++t)
        EXPECT_DOUBLE_EQ(b.series.at(t, 3, 0) - a.series.at(t, 3, 0), b.response[t]);
}

TEST(Synthetic, RejectsTriangleCycles) {
    SyntheticSpec spec;
    spec.cycle_length = 3;
    EXPECT_THROW(gen_synthetic(spec), InvalidInput);
}

TEST(Commands, FiltrateWritesBettiRows) {
    Workdir dir;
    RunConfig cfg = fixture_config(dir);
    write_text(cfg.snapshots, "t,u,v,w\n1,0,1,1\n1,1,2,1\n1,2,3,1\n1,3,0,1\n");
    std::ostringstream log;
    EXPECT_EQ(cmd_filtrate(cfg, log), 0);
    EXPECT_EQ(slurp(cfg.out_dir + "/betti.csv"), "t=1,b0=1,b1=1\n");
    EXPECT_EQ(slurp(cfg.out_dir + "/complexes/t0001.txt").empty(), false);
    write_text(cfg.snapshots, "");
    EXPECT_THROW(cmd_filtrate(cfg, log), InvalidInput);
    write_text(cfg.snapshots, "t,u,v,w\n1,0,1,1\n1,0,1\n");
    try {
        cmd_filtrate(cfg, log);
        FAIL() << "malformed row accepted";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(Commands, ZigzagGoldenFixtureAndWindowCount) {
    Workdir dir;
    RunConfig cfg = fixture_config(dir);
    write_text(cfg.snapshots, kFourCycle);
    cfg.model.window = 3;
    cfg.check = true;
    std::ostringstream log;
    EXPECT_EQ(cmd_zigzag(cfg, log), 0);
    EXPECT_NE(log.str().find("check: 0 violations"), std::string::npos);
    std::ifstream is(cfg.out_dir + "/zpd/" + zpd_file_name(1));
    const ZPD zpd = read_zpd_csv(is);
    EXPECT_EQ(zpd.points_of(1), (std::vector<PersistencePoint>{{1, HalfIndex(3), HalfIndex(5)}}));
    EXPECT_EQ(zpd.points_of(0), (std::vector<PersistencePoint>{{0, HalfIndex(2), HalfIndex(6)}}));

    cfg.model.window = 2;
    cfg.out_dir = dir / "out2";
    EXPECT_EQ(cmd_zigzag(cfg, log), 0);
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(cfg.out_dir + "/zpd")) ++files;
    EXPECT_EQ(files, 3u - 2u + 1u);
}

TEST(Commands, ZigzagSurfacesInclusionErrors) {
    Workdir dir;
    RunConfig cfg = fixture_config(dir);
    write_text(cfg.snapshots, kFourCycle);
    cfg.model.window = 3;
    cfg.filtration = "degree";
    std::ostringstream log;
    EXPECT_THROW(cmd_zigzag(cfg, log), InclusionError);
    cfg.union_rule = "complex";
    EXPECT_EQ(cmd_zigzag(cfg, log), 0);
}

TEST(Commands, ZpiMatchesLibraryAndHandlesEmptyDiagrams) {
    Workdir dir;
    RunConfig cfg = fixture_config(dir);
    write_text(cfg.snapshots, kFourCycle);
    cfg.model.window = 3;
    cfg.zpi_resolution = 20;
    cfg.dims = {0, 1};
    std::ostringstream log;
    EXPECT_THROW(cmd_zpi(cfg, log), InvalidInput);
    ASSERT_EQ(cmd_zigzag(cfg, log), 0);
    ASSERT_EQ(cmd_zpi(cfg, log), 0);

    std::ifstream net_is(cfg.snapshots);
    const DynamicNetwork net = read_snapshot_csv(net_is);
    const ZPD direct = compute_zigzag_persistence(build_zigzag(net.snapshots(), 1.0, {}), 1);
    const GridSpec grid = GridSpec::for_window(3, 20);
    for (int d : {0, 1}) {
        std::ifstream zis(cfg.out_dir + "/zpi/window_0001_dim" + std::to_string(d) + ".zpi");
        const ZPIGrid from_file = read_zpi(zis);
        const ZPIGrid expect = render_zpi(transform_diagram(direct, d), grid, default_weighting(grid));
        EXPECT_EQ(from_file.spec(), expect.spec());
        EXPECT_EQ(from_file.pixels(), expect.pixels());
        EXPECT_TRUE(fs::exists(cfg.out_dir + "/zpi/window_0001_dim" + std::to_string(d) + ".pgm"));
    }

    // A window without cycles renders an all-zero dimension-1 image.
    write_text(cfg.out_dir + "/zpd/window_0001.csv", "p,twice_birth,twice_death\n0,2,6\n");
    ASSERT_EQ(cmd_zpi(cfg, log), 0);
    std::ifstream zis(cfg.out_dir + "/zpi/window_0001_dim1.zpi");
    EXPECT_EQ(read_zpi(zis).max(), 0.0);
}

TEST(Commands, ZpiAdditivityOverDisjointDiagrams) {
    Workdir dir;
    RunConfig cfg = fixture_config(dir);
    cfg.model.window = 6;
    cfg.zpi_resolution = 24;
    cfg.dims = {1};
    fs::create_directories(cfg.out_dir + "/zpd");
    write_text(cfg.out_dir + "/zpd/window_0001.csv", "p,twice_birth,twice_death\n1,2,7\n");
    write_text(cfg.out_dir + "/zpd/window_0002.csv", "p,twice_birth,twice_death\n1,5,12\n");
    write_text(cfg.out_dir + "/zpd/window_0003.csv", "p,twice_birth,twice_death\n1,2,7\n1,5,12\n");
    std::ostringstream log;
    ASSERT_EQ(cmd_zpi(cfg, log), 0);
    auto load = [&](int k) {
        std::ifstream is(cfg.out_dir + "/zpi/window_000" + std::to_string(k) + "_dim1.zpi");
        return read_zpi(is);
    };
    const ZPIGrid a = load(1), b = load(2), both = load(3);
    for (std::size_t i = 0; i < both.pixels().size(); ++i)
        EXPECT_NEAR(both.pixels()[i], a.pixels()[i] + b.pixels()[i], 1e-12 * std::max(1.0, both.pixels()[i]));
}

TEST(Commands, DistanceWritesCostAndPairing) {
    Workdir dir;
    RunConfig cfg = fixture_config(dir);
    write_text(dir / "a.csv", "p,twice_birth,twice_death\n1,2,8\n");
    write_text(dir / "b.csv", "p,twice_birth,twice_death\n1,2,6\n1,4,5\n");
    cfg.diagram_a = dir / "a.csv";
    cfg.diagram_b = dir / "b.csv";
    cfg.pairing = dir / "pairs.csv";
    std::ostringstream log;
    ASSERT_EQ(cmd_distance(cfg, log), 0);
    // (1,4) vs (1,3) costs 1; (2,2.5) goes to the diagonal at 0.25.
    EXPECT_EQ(log.str(), "W1 = 1.25\n");
    EXPECT_EQ(slurp(cfg.pairing), "a_index,b_index\n0,0\n-1,1\n");
}

TEST(Commands, SubcommandsAreIdempotent) {
    Workdir dir;
    RunConfig cfg = small_training_config(dir);
    std::ostringstream log;
    ASSERT_EQ(cmd_synth(cfg, log), 0);
    const std::string snaps = slurp(cfg.snapshots), feats = slurp(cfg.features);
    ASSERT_EQ(cmd_synth(cfg, log), 0);
    EXPECT_EQ(slurp(cfg.snapshots), snaps);
    EXPECT_EQ(slurp(cfg.features), feats);

    ASSERT_EQ(cmd_zigzag(cfg, log), 0);
    ASSERT_EQ(cmd_zpi(cfg, log), 0);
    const std::string zpd = slurp(cfg.out_dir + "/zpd/window_0007.csv");
    const std::string zpi = slurp(cfg.out_dir + "/zpi/window_0007_dim1.zpi");
    ASSERT_EQ(cmd_zigzag(cfg, log), 0);
    ASSERT_EQ(cmd_zpi(cfg, log), 0);
    EXPECT_EQ(slurp(cfg.out_dir + "/zpd/window_0007.csv"), zpd);
    EXPECT_EQ(slurp(cfg.out_dir + "/zpi/window_0007_dim1.zpi"), zpi);

    ASSERT_EQ(cmd_train(cfg, log), 0);
    const std::string history = slurp(cfg.out_dir + "/history.csv");
    const std::string metrics = slurp(cfg.out_dir + "/metrics.csv");
    const std::string ckpt = slurp(cfg.checkpoint_path());
    ASSERT_EQ(cmd_train(cfg, log), 0);
    EXPECT_EQ(slurp(cfg.out_dir + "/history.csv"), history);
    EXPECT_EQ(slurp(cfg.out_dir + "/metrics.csv"), metrics);
    EXPECT_EQ(slurp(cfg.checkpoint_path()), ckpt);
    EXPECT_EQ(metrics.rfind("split,mae,rmse,mape\ntrain,", 0), 0u);

    ASSERT_EQ(cmd_forecast(cfg, log), 0);
    const std::string forecast = slurp(cfg.out_dir + "/forecast.csv");
    ASSERT_EQ(cmd_forecast(cfg, log), 0);
    EXPECT_EQ(slurp(cfg.out_dir + "/forecast.csv"), forecast);
    EXPECT_EQ(forecast.rfind("t,node,f1\n161,0,", 0), 0u);
    EXPECT_EQ(std::count(forecast.begin(), forecast.end(), '\n'), 1 + 2 * 8);
}

TEST(Commands, AblateReportsEveryVariantWithDeltas) {
    Workdir dir;
    RunConfig cfg = small_training_config(dir);
    cfg.noise_sigma = 2.0;
    std::ostringstream log;
    ASSERT_EQ(cmd_synth(cfg, log), 0);
    ASSERT_EQ(cmd_ablate(cfg, log), 0);
    std::istringstream csv(slurp(cfg.out_dir + "/ablation.csv"));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "variant,mae,rmse,mape,delta_mae,delta_rmse,delta_mape");
    std::vector<std::string> variants;
    while (std::getline(csv, line)) {
        const auto f = split(line, ',');
        ASSERT_EQ(f.size(), 7u);
        variants.push_back(f[0]);
        if (f[0] == "none") EXPECT_EQ(std::stod(f[4]), 0.0);
    }
    EXPECT_EQ(variants, (std::vector<std::string>{"none", "no-zigzag", "no-spatial", "no-temporal"}));
}

TEST(Commands, TrainRejectsMismatchedInputs) {
    Workdir dir;
    RunConfig cfg = small_training_config(dir);
    std::ostringstream log;
    ASSERT_EQ(cmd_synth(cfg, log), 0);
    std::string one_step = "t,node,f1\n";
    for (int n = 0; n < 8; ++n) one_step += "1," + std::to_string(n) + ",0.5\n";
    write_text(cfg.features, one_step);
    EXPECT_THROW(cmd_train(cfg, log), InvalidInput);
    write_text(cfg.features, "t,node,f1\n1,0,1\n1,1,1\n");
    EXPECT_THROW(cmd_train(cfg, log), ParseError);
    cfg.checkpoint = dir / "missing.txt";
    EXPECT_THROW(cmd_forecast(cfg, log), InvalidInput);
}

TEST(Commands, GradcheckPasses) {
    RunConfig cfg;
    cfg.gradcheck_seeds = 1;
    std::ostringstream log;
    EXPECT_EQ(cmd_gradcheck(cfg, log), 0);
    EXPECT_NE(log.str().find("PASS"), std::string::npos);
}
