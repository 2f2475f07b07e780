#pragma once

// Run configuration and the subcommands behind the command-line driver. Every
// command reads its inputs from the configured paths, writes files under
// `out_dir` and prints a short summary to `log`.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "zgcnet/dyngraph.hpp"
#include "zgcnet/train.hpp"
#include "zgcnet/zpi.hpp"

namespace zgcnet {

struct SyntheticSpec {
    int nodes = 16;
    int steps = 960;
    int period = 8;          // block length; each block may host one cycle episode
    int cycle_length = 6;    // chordless cycle on nodes 0..cycle_length-1
    int episode = 2;         // snapshots per episode, at the block start
    double activation = 0.5; // probability that a block hosts an episode
    double delta = 1.0;      // response amplitude
    int response_steps = 4;  // leading steps of the next block that carry the response
    double noise = 0.1;
    std::uint64_t seed = 1;
};

/// Background path 0-1-...-(N-1) in every snapshot; during an episode the edge
/// 0-(cycle_length-1) closes a chordless cycle. Node signals are a per-node
/// phase-shifted sinusoid with the block period, plus delta on the first
/// `response_steps` of the block after an active one, plus Gaussian noise.
struct SyntheticData {
    DynamicNetwork net;
    FeatureSeries series;
    std::vector<int> cycle;         // per step: 1 while the cycle is present
    std::vector<double> response;   // per step: the added delta term
};

SyntheticData gen_synthetic(const SyntheticSpec& spec);

struct RunConfig {
    std::string snapshots = "snapshots.csv";
    std::string features = "features.csv";
    std::string out_dir = "out";
    std::string checkpoint;  // defaults to out_dir/checkpoint.txt
    std::string diagram_a, diagram_b, pairing;
    int distance_dim = 1;

    std::string filtration = "sublevel";
    double nu_star = 1.0;
    std::string union_rule = "graph";
    bool check = false;
    unsigned threads = 0;

    std::vector<int> dims = {1};
    int zpi_resolution = 100;
    double theta = 0.0;  // 0 selects the default bandwidth
    std::string weighting = "linear";

    ModelConfig model;
    std::string ablation = "none";
    int stride = 1;
    int offset = 0;
    double train_fraction = 0.6;
    double val_fraction = 0.2;
    double noise_sigma = 0.0;
    double noise_fraction = 0.3;

    SyntheticSpec synth;
    int gradcheck_seeds = 5;

    /// Every key accepted by `set`, in a stable order.
    static std::vector<std::string> keys();
    /// Throws InvalidInput for unknown keys or unparsable values.
    void set(const std::string& key, const std::string& value);
    std::string get(const std::string& key) const;
    void apply(const std::map<std::string, std::string>& values);
    static RunConfig load(const std::string& path);

    TopologySpec topology() const;
    GridSpec grid() const;
    WeightingSpec weighting_spec(const GridSpec& grid) const;
    DatasetSpec dataset() const;
    std::string checkpoint_path() const;
};

/// Snapshot and feature files loaded with a shared node universe; snapshot
/// indices must run 1..T in step with the feature rows.
struct InputData {
    DynamicNetwork net;
    FeatureSeries series;
};
InputData load_inputs(const RunConfig& cfg);

/// Dataset for `cfg` from loaded inputs; model sizes (N, F, channels, window,
/// horizon, resolution) in the returned config follow the data.
Dataset prepare_dataset(const RunConfig& cfg, const InputData& in, ModelConfig& model);

struct AblationRow {
    std::string variant;
    Metrics test;
};
std::vector<AblationRow> run_ablations(const RunConfig& cfg, const Dataset& data, const ModelConfig& model,
                                       const std::vector<std::string>& variants);

int cmd_filtrate(const RunConfig& cfg, std::ostream& log);
int cmd_zigzag(const RunConfig& cfg, std::ostream& log);
int cmd_zpi(const RunConfig& cfg, std::ostream& log);
int cmd_distance(const RunConfig& cfg, std::ostream& log);
int cmd_train(const RunConfig& cfg, std::ostream& log);
int cmd_forecast(const RunConfig& cfg, std::ostream& log);
int cmd_ablate(const RunConfig& cfg, std::ostream& log);
int cmd_synth(const RunConfig& cfg, std::ostream& log);
int cmd_gradcheck(const RunConfig& cfg, std::ostream& log);

/// File name of the ZPD for the window starting at snapshot `start` (1-based).
std::string zpd_file_name(int start);

}  // namespace zgcnet
