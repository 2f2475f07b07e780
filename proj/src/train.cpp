#include "zgcnet/train.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "zgcnet/error.hpp"
#include "zgcnet/parallel.hpp"
#include "zgcnet/zpi.hpp"

namespace zgcnet {

GridSpec TopologySpec::grid(int window_length) const {
    GridSpec g = GridSpec::for_window(window_length, resolution);
    if (theta > 0.0) g.theta = theta;
    return g;
}

std::vector<std::vector<Matrix>> window_zpis(const DynamicNetwork& net, int tau, const TopologySpec& spec,
                                             unsigned threads) {
    if (tau < 1 || static_cast<std::size_t>(tau) > net.size())
        throw InvalidInput("window length must be in [1, number of snapshots]");
    if (spec.dims.empty()) throw InvalidInput("at least one homology dimension must be rendered");
    const std::size_t count = net.size() - static_cast<std::size_t>(tau) + 1;
    const GridSpec grid = spec.grid(tau);
    WeightingSpec weight = default_weighting(grid);
    weight.kind = spec.weighting;
    const int maxdim = *std::max_element(spec.dims.begin(), spec.dims.end());

    std::vector<std::vector<Matrix>> out(count);
    parallel_for(count, threads, [&](std::size_t w) {
        const auto& all = net.snapshots();
        const std::vector<Snapshot> window(all.begin() + static_cast<std::ptrdiff_t>(w),
                                           all.begin() + static_cast<std::ptrdiff_t>(w + tau));
        const ZPD zpd = compute_zigzag_persistence(build_zigzag(window, spec.nu_star, spec.mode, spec.rule), maxdim);
        for (int d : spec.dims) {
            const ZPIGrid g = render_zpi(transform_diagram(zpd, d), grid, weight);
            out[w].push_back(Eigen::Map<const Matrix>(g.pixels().data(), grid.resolution, grid.resolution));
        }
    });
    return out;
}

MinMaxScaler MinMaxScaler::fit(const FeatureSeries& series, std::size_t first_step, std::size_t end_step) {
    if (first_step >= end_step || end_step > series.steps()) throw InvalidInput("empty or out-of-range scaling range");
    MinMaxScaler s;
    s.lo.assign(series.features(), std::numeric_limits<double>::infinity());
    s.hi.assign(series.features(), -std::numeric_limits<double>::infinity());
    for (std::size_t t = first_step; t < end_step; ++t)
        for (std::size_t n = 0; n < series.nodes(); ++n)
            for (std::size_t f = 0; f < series.features(); ++f) {
                s.lo[f] = std::min(s.lo[f], series.at(t, n, f));
                s.hi[f] = std::max(s.hi[f], series.at(t, n, f));
            }
    return s;
}

Dataset build_dataset(const FeatureSeries& series, const std::vector<std::vector<Matrix>>& zpis,
                      const DatasetSpec& spec) {
    if (spec.window < 1 || spec.horizon < 1 || spec.stride < 1 || spec.offset < 0)
        throw InvalidInput("window, horizon and stride must be positive");
    if (spec.out_features < 1 || static_cast<std::size_t>(spec.out_features) > series.features())
        throw InvalidInput("out_features must be in [1, F]");
    if (spec.train_fraction <= 0 || spec.val_fraction < 0 || spec.train_fraction + spec.val_fraction > 1)
        throw InvalidInput("split fractions must be positive and sum to at most 1");
    std::vector<int> starts;
    for (int s = spec.offset; static_cast<std::size_t>(s + spec.window + spec.horizon) <= series.steps();
         s += spec.stride)
        starts.push_back(s);
    if (starts.size() < 3) throw InvalidInput("series too short for three windows");
    if (zpis.size() < static_cast<std::size_t>(starts.back() + 1)) throw ShapeError("missing ZPI for some windows");

    const std::size_t total = starts.size();
    const std::size_t n_train = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(spec.train_fraction * total)));
    const std::size_t n_val = std::min(total - n_train, static_cast<std::size_t>(std::floor(spec.val_fraction * total)));

    Dataset ds;
    ds.train_starts.assign(starts.begin(), starts.begin() + static_cast<std::ptrdiff_t>(n_train));
    ds.val_starts.assign(starts.begin() + static_cast<std::ptrdiff_t>(n_train),
                         starts.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    ds.test_starts.assign(starts.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), starts.end());
    ds.scaler = MinMaxScaler::fit(series, static_cast<std::size_t>(ds.train_starts.front()),
                                  static_cast<std::size_t>(ds.train_starts.back() + spec.window + spec.horizon));
    double zmax = 0.0;
    for (int s : ds.train_starts)
        for (const auto& ch : zpis[static_cast<std::size_t>(s)]) zmax = std::max(zmax, ch.maxCoeff());
    ds.zpi_scale = zmax > 0.0 ? zmax : 1.0;

    const auto N = static_cast<Eigen::Index>(series.nodes());
    const auto F = static_cast<Eigen::Index>(series.features());
    auto make = [&](int s, const std::vector<double>* noise) {
        Sample smp;
        std::size_t k = 0;
        for (int t = s; t < s + spec.window; ++t) {
            Matrix x(N, F);
            for (Eigen::Index n = 0; n < N; ++n)
                for (Eigen::Index f = 0; f < F; ++f) {
                    double v = series.at(static_cast<std::size_t>(t), static_cast<std::size_t>(n),
                                         static_cast<std::size_t>(f));
                    if (noise) v += (*noise)[k++];
                    x(n, f) = ds.scaler.forward(static_cast<std::size_t>(f), v);
                }
            smp.inputs.push_back(std::move(x));
        }
        for (const auto& ch : zpis[static_cast<std::size_t>(s)]) smp.zpi.push_back(ch / ds.zpi_scale);
        for (int t = s + spec.window; t < s + spec.window + spec.horizon; ++t) {
            Matrix y(N, spec.out_features);
            for (Eigen::Index n = 0; n < N; ++n)
                for (int f = 0; f < spec.out_features; ++f)
                    y(n, f) = ds.scaler.forward(static_cast<std::size_t>(f),
                                                series.at(static_cast<std::size_t>(t), static_cast<std::size_t>(n),
                                                          static_cast<std::size_t>(f)));
            smp.targets.push_back(std::move(y));
        }
        return smp;
    };

    std::mt19937_64 rng(spec.noise.seed);
    std::bernoulli_distribution pick(spec.noise.sigma > 0.0 ? spec.noise.fraction : 0.0);
    std::normal_distribution<double> gauss(0.0, spec.noise.sigma > 0.0 ? spec.noise.sigma : 1.0);
    for (int s : ds.train_starts) {
        if (pick(rng)) {
            std::vector<double> noise(static_cast<std::size_t>(spec.window * N * F));
            for (double& v : noise) v = gauss(rng);
            ds.train.push_back(make(s, &noise));
        } else {
            ds.train.push_back(make(s, nullptr));
        }
    }
    for (int s : ds.val_starts) ds.val.push_back(make(s, nullptr));
    for (int s : ds.test_starts) ds.test.push_back(make(s, nullptr));
    return ds;
}

Metrics evaluate(const std::vector<Sample>& samples, const ModelParams& params, const ModelConfig& cfg,
                 const Ablation& ablation, const MinMaxScaler& scaler) {
    std::vector<Matrix> pred, target;
    for (const auto& s : samples) {
        Prediction p = forward(s, params, cfg, ablation);
        for (std::size_t k = 0; k < p.size(); ++k) {
            Matrix a = p[k], b = s.targets[k];
            for (Eigen::Index f = 0; f < a.cols(); ++f) {
                const std::size_t fi = static_cast<std::size_t>(f);
                a.col(f) = (a.col(f).array() * scaler.scale(fi) + scaler.lo[fi]).matrix();
                b.col(f) = (b.col(f).array() * scaler.scale(fi) + scaler.lo[fi]).matrix();
            }
            pred.push_back(std::move(a));
            target.push_back(std::move(b));
        }
    }
    if (pred.empty()) return {};
    return loss_metrics(pred, target);
}

Adam::Adam(const ModelParams& like, double beta1, double beta2, double eps)
    : m_(like.zeros_like()), v_(like.zeros_like()), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(ModelParams& params, const ModelParams& grad, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    auto& P = params.tensors();
    const auto& G = grad.tensors();
    for (std::size_t ti = 0; ti < P.size(); ++ti) {
        auto& p = P[ti].values;
        const auto& g = G[ti].values;
        auto& m = m_.tensors()[ti].values;
        auto& v = v_.tensors()[ti].values;
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
            v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
            p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
        }
    }
}

TrainResult train(const Dataset& data, const ModelConfig& cfg, const Ablation& ablation,
                  const std::function<void(const EpochRecord&)>& on_record) {
    cfg.validate();
    if (data.train.empty()) throw InvalidInput("empty training split");
    TrainResult result;
    ModelParams params = ModelParams::init(cfg, cfg.seed);
    Adam adam(params);
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(data.train.size());
    std::iota(order.begin(), order.end(), 0);
    double lr = cfg.learning_rate;
    double best = std::numeric_limits<double>::infinity();
    int stale = 0;
    const std::vector<Sample>& monitor = data.val.empty() ? data.train : data.val;
    result.params = params;

    auto record = [&](int epoch, const std::string& split, const Metrics& m) {
        result.history.push_back({epoch, split, m});
        if (on_record) on_record(result.history.back());
    };

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
            std::vector<const Sample*> batch;
            for (std::size_t i = b; i < std::min(order.size(), b + static_cast<std::size_t>(cfg.batch_size)); ++i)
                batch.push_back(&data.train[order[i]]);
            ModelParams grad = params.zeros_like();
            double loss;
            try {
                loss = loss_and_gradient(batch, params, cfg, ablation, &grad);
            } catch (const NumericalError& e) {
                throw NumericalError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
            }
            if (!std::isfinite(loss) || !grad.all_finite())
                throw NumericalError("training diverged at epoch " + std::to_string(epoch));
            adam.step(params, grad, lr);
        }
        const Metrics tr = evaluate(data.train, params, cfg, ablation, data.scaler);
        const Metrics va = evaluate(monitor, params, cfg, ablation, data.scaler);
        if (!std::isfinite(tr.mae) || !std::isfinite(va.mae))
            throw NumericalError("training diverged at epoch " + std::to_string(epoch));
        record(epoch, "train", tr);
        if (!data.val.empty()) record(epoch, "val", va);
        if (va.mae < best) {
            best = va.mae;
            stale = 0;
            result.params = params;
            result.best_epoch = epoch;
        } else if (++stale >= cfg.patience) {
            lr *= cfg.decay;
            stale = 0;
        }
    }
    result.best_val_mae = best;
    if (!data.test.empty()) record(result.best_epoch, "test", evaluate(data.test, result.params, cfg, ablation, data.scaler));
    return result;
}

std::vector<double> overfit_batch(const std::vector<Sample>& batch, ModelParams& params, const ModelConfig& cfg,
                                  int steps, double learning_rate) {
    std::vector<const Sample*> ptrs;
    for (const auto& s : batch) ptrs.push_back(&s);
    Adam adam(params);
    std::vector<double> losses;
    for (int k = 0; k < steps; ++k) {
        ModelParams grad = params.zeros_like();
        loss_and_gradient(ptrs, params, cfg, {}, &grad);
        // MAE subgradients do not shrink near the optimum, so the step is annealed.
        const double lr = 0.5 * learning_rate * (1.0 + std::cos(std::numbers::pi * k / steps));
        adam.step(params, grad, lr);
        losses.push_back(loss_and_gradient(ptrs, params, cfg, {}, nullptr));
    }
    return losses;
}

void write_history_csv(std::ostream& os, const std::vector<EpochRecord>& history) {
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << "epoch,split,mae,rmse,mape\n";
    for (const auto& r : history)
        os << r.epoch << ',' << r.split << ',' << r.metrics.mae << ',' << r.metrics.rmse << ',' << r.metrics.mape
           << '\n';
}

// ---- checkpoints -----------------------------------------------------------

namespace {

constexpr const char* kMagic = "zgcnet-checkpoint";
constexpr int kVersion = 1;

template <class T>
void put_list(std::ostream& os, const std::vector<T>& v) {
    os << v.size();
    for (const T& x : v) os << ' ' << x;
}

std::map<std::string, std::string> config_fields(const ModelConfig& c) {
    std::ostringstream lr, decay;
    lr << std::setprecision(std::numeric_limits<double>::max_digits10) << c.learning_rate;
    decay << std::setprecision(std::numeric_limits<double>::max_digits10) << c.decay;
    return {{"nodes", std::to_string(c.nodes)},
            {"features", std::to_string(c.features)},
            {"out_features", std::to_string(c.out_features)},
            {"embed_dim", std::to_string(c.embed_dim)},
            {"link_order", std::to_string(c.link_order)},
            {"window", std::to_string(c.window)},
            {"horizon", std::to_string(c.horizon)},
            {"width", std::to_string(c.width)},
            {"layers", std::to_string(c.layers)},
            {"zpi_resolution", std::to_string(c.zpi_resolution)},
            {"zpi_channels", std::to_string(c.zpi_channels)},
            {"cnn_layers", std::to_string(c.cnn.layers)},
            {"cnn_filters", std::to_string(c.cnn.filters)},
            {"cnn_kernel", std::to_string(c.cnn.kernel)},
            {"cnn_stride", std::to_string(c.cnn.stride)},
            {"cnn_pool", std::to_string(c.cnn.pool)},
            {"learning_rate", lr.str()},
            {"decay", decay.str()},
            {"patience", std::to_string(c.patience)},
            {"batch_size", std::to_string(c.batch_size)},
            {"epochs", std::to_string(c.epochs)},
            {"seed", std::to_string(c.seed)}};
}

void set_config_field(ModelConfig& c, const std::string& key, const std::string& value, std::size_t line) {
    std::map<std::string, int*> ints = {{"nodes", &c.nodes},           {"features", &c.features},
                                        {"out_features", &c.out_features}, {"embed_dim", &c.embed_dim},
                                        {"link_order", &c.link_order}, {"window", &c.window},
                                        {"horizon", &c.horizon},       {"width", &c.width},
                                        {"layers", &c.layers},         {"zpi_resolution", &c.zpi_resolution},
                                        {"zpi_channels", &c.zpi_channels}, {"cnn_layers", &c.cnn.layers},
                                        {"cnn_filters", &c.cnn.filters}, {"cnn_kernel", &c.cnn.kernel},
                                        {"cnn_stride", &c.cnn.stride}, {"cnn_pool", &c.cnn.pool},
                                        {"patience", &c.patience},     {"batch_size", &c.batch_size},
                                        {"epochs", &c.epochs}};
    try {
        if (auto it = ints.find(key); it != ints.end())
            *it->second = std::stoi(value);
        else if (key == "learning_rate")
            c.learning_rate = std::stod(value);
        else if (key == "decay")
            c.decay = std::stod(value);
        else if (key == "seed")
            c.seed = std::stoull(value);
        else
            throw ParseError(line, "unknown config key '" + key + "'");
    } catch (const std::logic_error&) {
        throw ParseError(line, "bad value for '" + key + "'");
    }
}

}  // namespace

void save_checkpoint(std::ostream& os, const Checkpoint& ck) {
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    os << kMagic << ' ' << kVersion << '\n';
    for (const auto& [k, v] : config_fields(ck.config)) os << "config " << k << ' ' << v << '\n';
    os << "ablation " << ck.ablation.name() << '\n';
    os << "topology " << ck.topology.nu_star << ' ' << to_string(ck.topology.mode.kind) << ' '
       << (ck.topology.rule == UnionRule::GraphUnion ? "graph" : "complex") << ' ' << ck.topology.resolution << ' '
       << ck.topology.theta << ' ' << (ck.topology.weighting == WeightingKind::Constant ? "constant" : "linear") << ' ';
    put_list(os, ck.topology.dims);
    os << ' ';
    put_list(os, ck.topology.mode.node_function);
    os << '\n';
    os << "scaler ";
    put_list(os, ck.scaler.lo);
    os << ' ';
    put_list(os, ck.scaler.hi);
    os << '\n';
    os << "zpi_scale " << ck.zpi_scale << '\n';
    for (const auto& t : ck.params.tensors()) {
        os << "tensor " << t.name << ' ' << t.shape.size();
        for (int d : t.shape) os << ' ' << d;
        os << '\n';
        for (std::size_t i = 0; i < t.values.size(); ++i) os << (i ? " " : "") << t.values[i];
        os << '\n';
    }
    os << "end\n";
}

Checkpoint load_checkpoint(std::istream& is) {
    Checkpoint ck;
    std::string raw;
    std::size_t line = 0;
    auto next_line = [&]() -> std::istringstream {
        if (!std::getline(is, raw)) throw ParseError(line + 1, "unexpected end of checkpoint");
        ++line;
        return std::istringstream(raw);
    };
    auto read_list = [&](std::istringstream& in, auto& out) {
        std::size_t n = 0;
        if (!(in >> n)) throw ParseError(line, "expected list length");
        out.resize(n);
        for (auto& x : out)
            if (!(in >> x)) throw ParseError(line, "truncated list");
    };
    {
        auto in = next_line();
        std::string magic;
        int version = 0;
        if (!(in >> magic >> version) || magic != kMagic) throw ParseError(line, "not a checkpoint file");
        if (version != kVersion) throw ParseError(line, "unsupported checkpoint version " + std::to_string(version));
    }
    bool ended = false;
    while (!ended) {
        auto in = next_line();
        std::string tag;
        in >> tag;
        if (tag == "config") {
            std::string key, value;
            if (!(in >> key >> value)) throw ParseError(line, "expected `config key value`");
            set_config_field(ck.config, key, value, line);
        } else if (tag == "ablation") {
            std::string name;
            in >> name;
            try {
                ck.ablation = Ablation::parse(name);
            } catch (const InvalidInput& e) {
                throw ParseError(line, e.what());
            }
        } else if (tag == "topology") {
            std::string kind, rule, weighting;
            if (!(in >> ck.topology.nu_star >> kind >> rule >> ck.topology.resolution >> ck.topology.theta >> weighting))
                throw ParseError(line, "malformed topology line");
            try {
                ck.topology.mode.kind = parse_filtration_kind(kind);
            } catch (const InvalidInput& e) {
                throw ParseError(line, e.what());
            }
            ck.topology.rule = rule == "complex" ? UnionRule::ComplexUnion : UnionRule::GraphUnion;
            ck.topology.weighting = weighting == "constant" ? WeightingKind::Constant : WeightingKind::LinearPersistence;
            read_list(in, ck.topology.dims);
            read_list(in, ck.topology.mode.node_function);
        } else if (tag == "scaler") {
            read_list(in, ck.scaler.lo);
            read_list(in, ck.scaler.hi);
        } else if (tag == "zpi_scale") {
            if (!(in >> ck.zpi_scale)) throw ParseError(line, "malformed zpi_scale");
        } else if (tag == "tensor") {
            Tensor t;
            std::size_t ndim = 0;
            if (!(in >> t.name >> ndim)) throw ParseError(line, "malformed tensor header");
            t.shape.resize(ndim);
            std::size_t size = 1;
            for (int& d : t.shape) {
                if (!(in >> d) || d < 0) throw ParseError(line, "malformed tensor shape");
                size *= static_cast<std::size_t>(d);
            }
            auto values = next_line();
            t.values.resize(size);
            for (double& v : t.values)
                if (!(values >> v)) throw ParseError(line, "tensor '" + t.name + "' has too few values");
            ck.params.tensors().push_back(std::move(t));
        } else if (tag == "end") {
            ended = true;
        } else if (!tag.empty()) {
            throw ParseError(line, "unknown record '" + tag + "'");
        }
    }
    try {
        ck.config.validate();
        const ModelParams expect = ModelParams::init(ck.config, 0);
        if (expect.tensors().size() != ck.params.tensors().size()) throw ParseError(line, "tensor count mismatch");
        for (std::size_t i = 0; i < expect.tensors().size(); ++i)
            if (expect.tensors()[i].name != ck.params.tensors()[i].name ||
                expect.tensors()[i].shape != ck.params.tensors()[i].shape)
                throw ParseError(line, "tensor '" + ck.params.tensors()[i].name + "' does not match the config");
    } catch (const InvalidInput& e) {
        throw ParseError(line, e.what());
    }
    return ck;
}

}  // namespace zgcnet
