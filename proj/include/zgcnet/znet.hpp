#pragma once

// Reference forecasting network: adaptive Laplacian, spatial and temporal graph
// convolutions, a CNN encoder of the zigzag persistence image that gates both
// branches, and a GRU unrolled over the input window. Forward and backward
// passes are written out by hand in double precision.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace zgcnet {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct CnnSpec {
    int layers = 2;
    int filters = 8;
    int kernel = 3;
    int stride = 2;
    int pool = 5;
};

struct ModelConfig {
    int nodes = 16;          // N
    int features = 1;        // F
    int out_features = 1;    // F_out, taken from the first input features
    int embed_dim = 2;       // c
    int link_order = 2;      // K
    int window = 8;          // tau
    int horizon = 4;         // h
    int width = 16;          // C_out, even
    int layers = 2;
    int zpi_resolution = 100;
    int zpi_channels = 1;
    CnnSpec cnn;
    double learning_rate = 0.003;
    double decay = 0.3;
    int patience = 5;
    int batch_size = 8;
    int epochs = 50;
    std::uint64_t seed = 1;

    int half_width() const { return width / 2; }
    int layer_input(int layer) const { return layer == 0 ? features : width; }
    /// Throws InvalidInput on non-positive sizes, odd width, K < 1, F_out > F, or a
    /// ZPI grid smaller than the CNN receptive field.
    void validate() const;
};

struct Ablation {
    bool no_zigzag = false;
    bool no_spatial = false;
    bool no_temporal = false;

    /// "none", "no-zigzag", "no-spatial" or "no-temporal".
    static Ablation parse(std::string_view name);
    std::string name() const;
};

/// Named flat array with a row-major shape.
struct Tensor {
    std::string name;
    std::vector<int> shape;
    std::vector<double> values;
};

enum class InitStyle {
    /// Glorot-style weights, zero biases, zigzag gate starting at exactly one.
    Training,
    /// Every array random, including biases; used for gradient checks.
    Random,
};

class ModelParams {
public:
    ModelParams() = default;
    static ModelParams init(const ModelConfig& cfg, std::uint64_t seed, InitStyle style = InitStyle::Training);

    std::vector<Tensor>& tensors() noexcept { return tensors_; }
    const std::vector<Tensor>& tensors() const noexcept { return tensors_; }
    Tensor& get(std::string_view name);
    const Tensor& get(std::string_view name) const;
    std::span<const double> view(std::string_view name) const;
    ModelParams zeros_like() const;
    std::size_t parameter_count() const;
    bool all_finite() const;
    void fill(double value);

private:
    std::vector<Tensor> tensors_;
};

/// One training example: tau input matrices (N x F), ZPI channels (p x p) and
/// h target matrices (N x F_out).
struct Sample {
    std::vector<Matrix> inputs;
    std::vector<Matrix> zpi;
    std::vector<Matrix> targets;
};

using Prediction = std::vector<Matrix>;

// ---- layers -------------------------------------------------------------

/// Row-wise softmax of ReLU(phi phi^T).
Matrix adaptive_laplacian(const Matrix& phi);

/// [I, L, L^2, ..., L^K].
std::vector<Matrix> laplacian_link(const Matrix& laplacian, int order);

/// out[n,o] = sum_{k,f,e} (L^k H)[n,f] phi[n,e] V[e,k,f,o].
Matrix spatial_conv(const Matrix& h, const std::vector<Matrix>& link, const Matrix& phi, std::span<const double> v,
                    int out_width);

/// out[n,o] = sum_s Q[s] sum_{k,f,e} (L^k H_s)[n,f] phi[n,e] U[e,f,o].
Matrix temporal_conv(const std::vector<Matrix>& window, const std::vector<Matrix>& link, const Matrix& phi,
                     std::span<const double> u, std::span<const double> q, int out_width);

struct CnnWeights {
    std::vector<std::span<const double>> kernels;  // per conv layer: filters x in x k x k
    std::vector<std::span<const double>> biases;   // per conv layer: filters
    std::span<const double> map_weight;            // out x filters
    std::span<const double> map_bias;              // out
};

/// Conv/ReLU stack, max pooling to a single value per filter, then a linear map.
Vector zpi_encoder(const std::vector<Matrix>& zpi, const CnnSpec& spec, const CnnWeights& w);

/// [H_S * Z | H_T * Z], Z scaling channels.
Matrix zigzag_layer(const Matrix& hs, const Matrix& ht, const Vector& z);

struct GruWeights {
    std::span<const double> wz, bz, wr, br, wo, bo;  // W: 2C x C, b: C
};

Matrix gru_cell(const Matrix& prev, const Matrix& input, const GruWeights& w);

// ---- model --------------------------------------------------------------

/// Horizon-many N x F_out predictions. If `z_override` is given it replaces the
/// encoder output in every layer. Throws NumericalError naming the layer that
/// produced a non-finite value.
Prediction forward(const Sample& sample, const ModelParams& params, const ModelConfig& cfg,
                   const Ablation& ablation = {}, const Vector* z_override = nullptr);

struct Metrics {
    double mae = 0.0;
    double rmse = 0.0;
    double mape = 0.0;  // percent, over targets with |y| >= 1e-6
};

Metrics loss_metrics(const std::vector<Matrix>& prediction, const std::vector<Matrix>& target);

/// Mean absolute error over the batch; if `grad` is non-null it receives dLoss/dParams.
double loss_and_gradient(const std::vector<const Sample*>& batch, const ModelParams& params, const ModelConfig& cfg,
                         const Ablation& ablation, ModelParams* grad);

struct GradCheckReport {
    double worst = 0.0;
    std::string worst_tensor;
    std::size_t worst_index = 0;
    std::size_t checked = 0;
};

/// Central differences against the analytic gradient over every entry of the
/// selected tensors (all when `only` is empty). Relative error per entry is
/// |a - n| / max(|a|, |n|, 1e-6).
GradCheckReport grad_check(const ModelParams& params, const ModelConfig& cfg, const std::vector<Sample>& batch,
                           double epsilon = 1e-5, const Ablation& ablation = {},
                           const std::vector<std::string>& only = {});

/// Random sample with the shapes of `cfg` (inputs and ZPI in [0,1], targets in [0,1]).
Sample random_sample(const ModelConfig& cfg, std::mt19937_64& rng);

}  // namespace zgcnet
