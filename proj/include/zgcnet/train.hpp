#pragma once

// Dataset assembly (sliding windows, per-window ZPIs, scaling, chronological
// split), Adam training with plateau decay, evaluation and checkpoints.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "zgcnet/dyngraph.hpp"
#include "zgcnet/filtration.hpp"
#include "zgcnet/zigzag.hpp"
#include "zgcnet/zpi.hpp"
#include "zgcnet/znet.hpp"

namespace zgcnet {

struct TopologySpec {
    double nu_star = 1.0;
    FiltrationMode mode;
    UnionRule rule = UnionRule::GraphUnion;
    std::vector<int> dims = {1};  // one ZPI channel per dimension
    int resolution = 100;
    double theta = 0.0;  // 0 selects the default bandwidth
    WeightingKind weighting = WeightingKind::LinearPersistence;

    GridSpec grid(int window_length) const;
};

/// ZPI channels (resolution x resolution) of every length-tau window, indexed by
/// window start. Windows are processed on `threads` workers (0 = hardware).
std::vector<std::vector<Matrix>> window_zpis(const DynamicNetwork& net, int tau, const TopologySpec& spec,
                                             unsigned threads = 0);

/// Per-feature min-max scaling to [0, 1]; constant features map to 0.
struct MinMaxScaler {
    std::vector<double> lo, hi;

    static MinMaxScaler fit(const FeatureSeries& series, std::size_t first_step, std::size_t end_step);
    double scale(std::size_t feature) const { return hi[feature] > lo[feature] ? hi[feature] - lo[feature] : 1.0; }
    double forward(std::size_t feature, double x) const { return (x - lo[feature]) / scale(feature); }
    double inverse(std::size_t feature, double y) const { return y * scale(feature) + lo[feature]; }
};

struct NoiseSpec {
    double sigma = 0.0;     // in original feature units; 0 disables
    double fraction = 0.3;  // share of training samples perturbed
    std::uint64_t seed = 1;
};

struct DatasetSpec {
    int window = 8;
    int horizon = 4;
    int stride = 1;
    int offset = 0;  // first window start
    int out_features = 1;
    double train_fraction = 0.6;
    double val_fraction = 0.2;
    NoiseSpec noise;
};

struct Dataset {
    std::vector<Sample> train, val, test;
    std::vector<int> train_starts, val_starts, test_starts;
    MinMaxScaler scaler;
    double zpi_scale = 1.0;  // training-set maximum pixel, divided out of every ZPI
};

/// Windows start at offset, offset + stride, ... while inputs and targets fit in
/// the series; they are split in order into train / validation / test. The
/// scaler is fit on the steps covered by training samples and `zpis` (indexed
/// by window start) are normalized by the largest training pixel.
Dataset build_dataset(const FeatureSeries& series, const std::vector<std::vector<Matrix>>& zpis,
                      const DatasetSpec& spec);

/// Metrics in original units over a sample set.
Metrics evaluate(const std::vector<Sample>& samples, const ModelParams& params, const ModelConfig& cfg,
                 const Ablation& ablation, const MinMaxScaler& scaler);

class Adam {
public:
    explicit Adam(const ModelParams& like, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
    void step(ModelParams& params, const ModelParams& grad, double lr);

private:
    ModelParams m_, v_;
    double beta1_, beta2_, eps_;
    long long t_ = 0;
};

struct EpochRecord {
    int epoch = 0;
    std::string split;
    Metrics metrics;
};

struct TrainResult {
    ModelParams params;
    std::vector<EpochRecord> history;
    int best_epoch = 0;
    double best_val_mae = 0.0;
};

/// Mini-batch Adam on the MAE loss. The learning rate is multiplied by
/// cfg.decay after cfg.patience epochs without validation improvement; the
/// parameters of the best validation epoch are returned. Throws NumericalError
/// naming the epoch if the loss becomes non-finite.
TrainResult train(const Dataset& data, const ModelConfig& cfg, const Ablation& ablation = {},
                  const std::function<void(const EpochRecord&)>& on_record = {});

/// Full-batch Adam steps on one batch with the step size cosine-annealed to zero
/// over `steps`; returns the training MAE after every step.
std::vector<double> overfit_batch(const std::vector<Sample>& batch, ModelParams& params, const ModelConfig& cfg,
                                  int steps, double learning_rate);

void write_history_csv(std::ostream& os, const std::vector<EpochRecord>& history);

struct Checkpoint {
    ModelConfig config;
    Ablation ablation;
    TopologySpec topology;
    MinMaxScaler scaler;
    double zpi_scale = 1.0;
    ModelParams params;
};

void save_checkpoint(std::ostream& os, const Checkpoint& ckpt);
/// Throws ParseError on malformed or version-mismatched input.
Checkpoint load_checkpoint(std::istream& is);

}  // namespace zgcnet
