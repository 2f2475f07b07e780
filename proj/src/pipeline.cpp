#include "zgcnet/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "zgcnet/error.hpp"
#include "zgcnet/filtration.hpp"
#include "zgcnet/io.hpp"
#include "zgcnet/metrics.hpp"
#include "zgcnet/parallel.hpp"
#include "zgcnet/zigzag.hpp"

namespace zgcnet {

namespace fs = std::filesystem;

// ---- synthetic data --------------------------------------------------------

SyntheticData gen_synthetic(const SyntheticSpec& spec) {
    if (spec.nodes < 4 || spec.steps < 1 || spec.period < 1) throw InvalidInput("synthetic sizes out of range");
    if (spec.cycle_length < 4 || spec.cycle_length > spec.nodes)
        throw InvalidInput("cycle length must be in [4, nodes] to stay chordless");
    if (spec.episode < 1 || spec.episode > spec.period || spec.response_steps < 0 ||
        spec.response_steps > spec.period)
        throw InvalidInput("episode and response lengths must fit in one period");
    if (spec.activation < 0.0 || spec.activation > 1.0 || spec.noise < 0.0)
        throw InvalidInput("activation must be a probability and noise nonnegative");

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
    std::vector<double> phase(static_cast<std::size_t>(spec.nodes));
    for (double& p : phase) p = phase_dist(rng);
    const int blocks = (spec.steps + spec.period - 1) / spec.period;
    std::bernoulli_distribution coin(spec.activation);
    std::vector<bool> active(static_cast<std::size_t>(blocks));
    for (std::size_t b = 0; b < active.size(); ++b) active[b] = coin(rng);

    const auto N = static_cast<std::size_t>(spec.nodes);
    SyntheticData out{DynamicNetwork{}, FeatureSeries(static_cast<std::size_t>(spec.steps), N, 1), {}, {}};
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Snapshot> snaps;
    for (int t = 0; t < spec.steps; ++t) {
        const int b = t / spec.period, o = t % spec.period;
        const bool cycle = active[static_cast<std::size_t>(b)] && o < spec.episode;
        const double response = (b > 0 && active[static_cast<std::size_t>(b - 1)] && o < spec.response_steps)
                                    ? spec.delta
                                    : 0.0;
        Snapshot s(t + 1, N);
        for (NodeId n = 0; n < spec.nodes; ++n) s.add_node(n);
        for (NodeId n = 0; n + 1 < spec.nodes; ++n) s.set_weight(n, n + 1, 1.0);
        if (cycle) s.set_weight(0, spec.cycle_length - 1, 1.0);
        snaps.push_back(std::move(s));
        out.cycle.push_back(cycle ? 1 : 0);
        out.response.push_back(response);
        for (std::size_t n = 0; n < N; ++n) {
            const double base = std::sin(2.0 * std::numbers::pi * t / spec.period + phase[n]);
            out.series.at(static_cast<std::size_t>(t), n, 0) = base + response + spec.noise * gauss(rng);
        }
    }
    out.net = DynamicNetwork(std::move(snaps));
    return out;
}

// ---- configuration ---------------------------------------------------------

namespace {

int to_int(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    int x = 0;
    try {
        x = std::stoi(v, &used);
    } catch (const std::logic_error&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw InvalidInput("'" + key + "' expects an integer, got '" + v + "'");
    return x;
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0;
    try {
        x = std::stod(v, &used);
    } catch (const std::logic_error&) {
        used = 0;
    }
    if (used == 0 || used != v.size() || !std::isfinite(x))
        throw InvalidInput("'" + key + "' expects a number, got '" + v + "'");
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw InvalidInput("'" + key + "' expects a boolean, got '" + v + "'");
}

// Shortest text that parses back to the same double.
std::string fmt(double x) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

struct Field {
    std::string key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <class T>
Field int_field(std::string key, T RunConfig::*member) {
    return {key, [member, key](RunConfig& c, const std::string& v) { c.*member = static_cast<T>(to_int(key, v)); },
            [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

Field real_field(std::string key, double RunConfig::*member) {
    return {key, [member, key](RunConfig& c, const std::string& v) { c.*member = to_double(key, v); },
            [member](const RunConfig& c) { return fmt(c.*member); }};
}

Field text_field(std::string key, std::string RunConfig::*member) {
    return {key, [member](RunConfig& c, const std::string& v) { c.*member = v; },
            [member](const RunConfig& c) { return c.*member; }};
}

template <class Get>
Field model_int(std::string key, Get get) {
    return {key, [get, key](RunConfig& c, const std::string& v) { get(c) = to_int(key, v); },
            [get](const RunConfig& c) { return std::to_string(get(const_cast<RunConfig&>(c))); }};
}

template <class Get>
Field model_real(std::string key, Get get) {
    return {key, [get, key](RunConfig& c, const std::string& v) { get(c) = to_double(key, v); },
            [get](const RunConfig& c) { return fmt(get(const_cast<RunConfig&>(c))); }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back(text_field("snapshots", &RunConfig::snapshots));
        f.push_back(text_field("features", &RunConfig::features));
        f.push_back(text_field("out_dir", &RunConfig::out_dir));
        f.push_back(text_field("checkpoint", &RunConfig::checkpoint));
        f.push_back(text_field("diagram_a", &RunConfig::diagram_a));
        f.push_back(text_field("diagram_b", &RunConfig::diagram_b));
        f.push_back(text_field("pairing", &RunConfig::pairing));
        f.push_back(int_field("distance_dim", &RunConfig::distance_dim));
        f.push_back({"filtration",
                     [](RunConfig& c, const std::string& v) {
                         parse_filtration_kind(v);
                         c.filtration = v;
                     },
                     [](const RunConfig& c) { return c.filtration; }});
        f.push_back(real_field("nu_star", &RunConfig::nu_star));
        f.push_back({"union",
                     [](RunConfig& c, const std::string& v) {
                         if (v != "graph" && v != "complex") throw InvalidInput("'union' must be graph or complex");
                         c.union_rule = v;
                     },
                     [](const RunConfig& c) { return c.union_rule; }});
        f.push_back({"check", [](RunConfig& c, const std::string& v) { c.check = to_bool("check", v); },
                     [](const RunConfig& c) { return std::string(c.check ? "true" : "false"); }});
        f.push_back(int_field("threads", &RunConfig::threads));
        f.push_back({"dims",
                     [](RunConfig& c, const std::string& v) {
                         std::vector<int> dims;
                         for (const auto& part : split(v, ',')) {
                             const int d = to_int("dims", part);
                             if (d < 0 || d > 1) throw InvalidInput("'dims' entries must be 0 or 1");
                             dims.push_back(d);
                         }
                         c.dims = dims;
                     },
                     [](const RunConfig& c) {
                         std::string s;
                         for (int d : c.dims) s += (s.empty() ? "" : ",") + std::to_string(d);
                         return s;
                     }});
        f.push_back(int_field("zpi_resolution", &RunConfig::zpi_resolution));
        f.push_back(real_field("theta", &RunConfig::theta));
        f.push_back({"weighting",
                     [](RunConfig& c, const std::string& v) {
                         if (v != "linear" && v != "constant")
                             throw InvalidInput("'weighting' must be linear or constant");
                         c.weighting = v;
                     },
                     [](const RunConfig& c) { return c.weighting; }});
        f.push_back({"ablation",
                     [](RunConfig& c, const std::string& v) {
                         Ablation::parse(v);
                         c.ablation = v;
                     },
                     [](const RunConfig& c) { return c.ablation; }});
        f.push_back(int_field("stride", &RunConfig::stride));
        f.push_back(int_field("offset", &RunConfig::offset));
        f.push_back(real_field("train_fraction", &RunConfig::train_fraction));
        f.push_back(real_field("val_fraction", &RunConfig::val_fraction));
        f.push_back(real_field("noise_sigma", &RunConfig::noise_sigma));
        f.push_back(real_field("noise_fraction", &RunConfig::noise_fraction));
        f.push_back(int_field("gradcheck_seeds", &RunConfig::gradcheck_seeds));

        f.push_back(model_int("out_features", [](RunConfig& c) -> int& { return c.model.out_features; }));
        f.push_back(model_int("embed_dim", [](RunConfig& c) -> int& { return c.model.embed_dim; }));
        f.push_back(model_int("link_order", [](RunConfig& c) -> int& { return c.model.link_order; }));
        f.push_back(model_int("window", [](RunConfig& c) -> int& { return c.model.window; }));
        f.push_back(model_int("horizon", [](RunConfig& c) -> int& { return c.model.horizon; }));
        f.push_back(model_int("width", [](RunConfig& c) -> int& { return c.model.width; }));
        f.push_back(model_int("layers", [](RunConfig& c) -> int& { return c.model.layers; }));
        f.push_back(model_int("cnn_layers", [](RunConfig& c) -> int& { return c.model.cnn.layers; }));
        f.push_back(model_int("cnn_filters", [](RunConfig& c) -> int& { return c.model.cnn.filters; }));
        f.push_back(model_int("cnn_kernel", [](RunConfig& c) -> int& { return c.model.cnn.kernel; }));
        f.push_back(model_int("cnn_stride", [](RunConfig& c) -> int& { return c.model.cnn.stride; }));
        f.push_back(model_int("cnn_pool", [](RunConfig& c) -> int& { return c.model.cnn.pool; }));
        f.push_back(model_real("learning_rate", [](RunConfig& c) -> double& { return c.model.learning_rate; }));
        f.push_back(model_real("decay", [](RunConfig& c) -> double& { return c.model.decay; }));
        f.push_back(model_int("patience", [](RunConfig& c) -> int& { return c.model.patience; }));
        f.push_back(model_int("batch_size", [](RunConfig& c) -> int& { return c.model.batch_size; }));
        f.push_back(model_int("epochs", [](RunConfig& c) -> int& { return c.model.epochs; }));
        f.push_back({"seed",
                     [](RunConfig& c, const std::string& v) {
                         const int s = to_int("seed", v);
                         if (s < 0) throw InvalidInput("'seed' must be nonnegative");
                         c.model.seed = static_cast<std::uint64_t>(s);
                     },
                     [](const RunConfig& c) { return std::to_string(c.model.seed); }});

        f.push_back(model_int("synth_nodes", [](RunConfig& c) -> int& { return c.synth.nodes; }));
        f.push_back(model_int("synth_steps", [](RunConfig& c) -> int& { return c.synth.steps; }));
        f.push_back(model_int("synth_period", [](RunConfig& c) -> int& { return c.synth.period; }));
        f.push_back(model_int("synth_cycle", [](RunConfig& c) -> int& { return c.synth.cycle_length; }));
        f.push_back(model_int("synth_episode", [](RunConfig& c) -> int& { return c.synth.episode; }));
        f.push_back(model_int("synth_response", [](RunConfig& c) -> int& { return c.synth.response_steps; }));
        f.push_back(model_real("synth_activation", [](RunConfig& c) -> double& { return c.synth.activation; }));
        f.push_back(model_real("synth_delta", [](RunConfig& c) -> double& { return c.synth.delta; }));
        f.push_back(model_real("synth_noise", [](RunConfig& c) -> double& { return c.synth.noise; }));
        return f;
    }();
    return table;
}

const Field& field(const std::string& key) {
    for (const auto& f : fields())
        if (f.key == key) return f;
    throw InvalidInput("unknown config key '" + key + "'");
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InvalidInput("cannot write '" + path.string() + "'");
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    return os;
}

std::ifstream open_in(const std::string& path, const std::string& what) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InvalidInput("cannot read " + what + " '" + path + "'");
    return is;
}

DynamicNetwork load_network(const std::string& path, std::size_t universe = 0) {
    auto is = open_in(path, "snapshot file");
    return read_snapshot_csv(is, universe);
}

std::string pad(int k) {
    std::ostringstream os;
    os << std::setw(4) << std::setfill('0') << k;
    return os.str();
}

void write_metrics_row(std::ostream& os, const std::string& label, const Metrics& m) {
    os << label << ',' << m.mae << ',' << m.rmse << ',' << m.mape << '\n';
}

}  // namespace

std::vector<std::string> RunConfig::keys() {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
}

void RunConfig::set(const std::string& key, const std::string& value) { field(key).set(*this, value); }

std::string RunConfig::get(const std::string& key) const { return field(key).get(*this); }

void RunConfig::apply(const std::map<std::string, std::string>& values) {
    for (const auto& [k, v] : values) set(k, v);
}

RunConfig RunConfig::load(const std::string& path) {
    auto is = open_in(path, "config file");
    RunConfig cfg;
    cfg.apply(read_key_values(is));
    return cfg;
}

TopologySpec RunConfig::topology() const {
    TopologySpec t;
    t.nu_star = nu_star;
    t.mode.kind = parse_filtration_kind(filtration);
    t.rule = union_rule == "complex" ? UnionRule::ComplexUnion : UnionRule::GraphUnion;
    t.dims = dims;
    t.resolution = zpi_resolution;
    t.theta = theta;
    t.weighting = weighting == "constant" ? WeightingKind::Constant : WeightingKind::LinearPersistence;
    return t;
}

GridSpec RunConfig::grid() const { return topology().grid(model.window); }

WeightingSpec RunConfig::weighting_spec(const GridSpec& g) const {
    WeightingSpec w = default_weighting(g);
    w.kind = topology().weighting;
    return w;
}

DatasetSpec RunConfig::dataset() const {
    DatasetSpec d;
    d.window = model.window;
    d.horizon = model.horizon;
    d.stride = stride;
    d.offset = offset;
    d.out_features = model.out_features;
    d.train_fraction = train_fraction;
    d.val_fraction = val_fraction;
    d.noise = {noise_sigma, noise_fraction, model.seed};
    return d;
}

std::string RunConfig::checkpoint_path() const {
    return checkpoint.empty() ? (fs::path(out_dir) / "checkpoint.txt").string() : checkpoint;
}

std::string zpd_file_name(int start) { return "window_" + pad(start) + ".csv"; }

// ---- data ------------------------------------------------------------------

InputData load_inputs(const RunConfig& cfg) {
    auto fis = open_in(cfg.features, "feature file");
    FeatureSeries series = read_feature_csv(fis);
    DynamicNetwork net = load_network(cfg.snapshots, series.nodes());
    if (net[0].index() != 1 || net.size() != series.steps())
        throw InvalidInput("snapshots must cover t = 1.." + std::to_string(series.steps()) +
                           " to match the feature file");
    return {std::move(net), std::move(series)};
}

Dataset prepare_dataset(const RunConfig& cfg, const InputData& in, ModelConfig& model) {
    model = cfg.model;
    model.nodes = static_cast<int>(in.series.nodes());
    model.features = static_cast<int>(in.series.features());
    model.zpi_channels = static_cast<int>(cfg.dims.size());
    model.zpi_resolution = cfg.zpi_resolution;
    model.validate();
    const auto zpis = window_zpis(in.net, model.window, cfg.topology(), cfg.threads);
    return build_dataset(in.series, zpis, cfg.dataset());
}

std::vector<AblationRow> run_ablations(const RunConfig&, const Dataset& data, const ModelConfig& model,
                                       const std::vector<std::string>& variants) {
    std::vector<AblationRow> rows;
    for (const auto& v : variants) {
        const Ablation ab = Ablation::parse(v);
        const TrainResult r = train(data, model, ab);
        rows.push_back({ab.name(), evaluate(data.test, r.params, model, ab, data.scaler)});
    }
    return rows;
}

// ---- commands --------------------------------------------------------------

int cmd_filtrate(const RunConfig& cfg, std::ostream& log) {
    const DynamicNetwork net = load_network(cfg.snapshots);
    const TopologySpec topo = cfg.topology();
    const fs::path out(cfg.out_dir);
    auto betti = open_out(out / "betti.csv");
    for (const auto& s : net.snapshots()) {
        const SimplicialComplex c = build_complex(s, topo.nu_star, topo.mode);
        betti << "t=" << s.index() << ",b0=" << betti_numbers(c, 0) << ",b1=" << betti_numbers(c, 1) << '\n';
        auto dump = open_out(out / "complexes" / ("t" + pad(s.index()) + ".txt"));
        write_complex(dump, c);
    }
    log << "filtrate: " << net.size() << " snapshots -> " << (out / "betti.csv").string() << '\n';
    return 0;
}

int cmd_zigzag(const RunConfig& cfg, std::ostream& log) {
    const DynamicNetwork net = load_network(cfg.snapshots);
    const int tau = cfg.model.window;
    if (tau < 1 || static_cast<std::size_t>(tau) > net.size())
        throw InvalidInput("window length must be in [1, number of snapshots]");
    const TopologySpec topo = cfg.topology();
    const auto windows = sliding_windows(net, static_cast<std::size_t>(tau));
    std::vector<ZPD> zpds(windows.size());
    std::vector<std::size_t> violations(windows.size(), 0);
    parallel_for(windows.size(), cfg.threads, [&](std::size_t w) {
        const ZigzagFiltration zf = build_zigzag(windows[w], topo.nu_star, topo.mode, topo.rule);
        zpds[w] = compute_zigzag_persistence(zf, 1);
        if (cfg.check) violations[w] = betti_consistency_check(zf, zpds[w]).violations.size();
    });
    const fs::path dir = fs::path(cfg.out_dir) / "zpd";
    std::size_t total = 0;
    for (std::size_t w = 0; w < windows.size(); ++w) {
        auto os = open_out(dir / zpd_file_name(windows[w].front().index()));
        write_zpd_csv(os, zpds[w]);
        total += violations[w];
        if (violations[w])
            log << "check: window starting at t=" << windows[w].front().index() << " has " << violations[w]
                << " Betti violations\n";
    }
    log << "zigzag: " << windows.size() << " windows of length " << tau << " -> " << dir.string() << '\n';
    if (cfg.check) log << "check: " << total << " violations\n";
    return total == 0 ? 0 : 1;
}

int cmd_zpi(const RunConfig& cfg, std::ostream& log) {
    const fs::path dir = fs::path(cfg.out_dir) / "zpd";
    std::vector<fs::path> files;
    if (fs::is_directory(dir))
        for (const auto& e : fs::directory_iterator(dir))
            if (e.path().extension() == ".csv") files.push_back(e.path());
    if (files.empty()) throw InvalidInput("missing ZPD: no diagrams under '" + dir.string() + "'; run zigzag first");
    std::sort(files.begin(), files.end());
    const GridSpec grid = cfg.grid();
    const WeightingSpec weight = cfg.weighting_spec(grid);
    const fs::path out = fs::path(cfg.out_dir) / "zpi";
    std::vector<std::vector<ZPIGrid>> grids(files.size());
    parallel_for(files.size(), cfg.threads, [&](std::size_t i) {
        auto is = open_in(files[i].string(), "ZPD file");
        const ZPD zpd = read_zpd_csv(is);
        for (int d : cfg.dims) grids[i].push_back(render_zpi(transform_diagram(zpd, d), grid, weight));
    });
    for (std::size_t i = 0; i < files.size(); ++i)
        for (std::size_t k = 0; k < cfg.dims.size(); ++k) {
            const std::string stem = files[i].stem().string() + "_dim" + std::to_string(cfg.dims[k]);
            auto z = open_out(out / (stem + ".zpi"));
            write_zpi(z, grids[i][k]);
            auto img = open_out(out / (stem + ".pgm"));
            write_pgm(img, grids[i][k]);
        }
    log << "zpi: " << files.size() << " windows x " << cfg.dims.size() << " dims at " << grid.resolution << "x"
        << grid.resolution << " -> " << out.string() << '\n';
    return 0;
}

int cmd_distance(const RunConfig& cfg, std::ostream& log) {
    if (cfg.diagram_a.empty() || cfg.diagram_b.empty()) throw InvalidInput("distance needs diagram_a and diagram_b");
    auto a_is = open_in(cfg.diagram_a, "diagram");
    auto b_is = open_in(cfg.diagram_b, "diagram");
    const auto a = diagram_points(read_zpd_csv(a_is), cfg.distance_dim);
    const auto b = diagram_points(read_zpd_csv(b_is), cfg.distance_dim);
    const MatchingResult m = wasserstein1(a, b);
    log << std::setprecision(std::numeric_limits<double>::max_digits10) << "W1 = " << m.cost << '\n';
    if (!cfg.pairing.empty()) {
        auto os = open_out(cfg.pairing);
        os << "a_index,b_index\n";
        for (const auto& [i, j] : m.pairing) os << i << ',' << j << '\n';
    }
    return 0;
}

int cmd_train(const RunConfig& cfg, std::ostream& log) {
    const InputData in = load_inputs(cfg);
    ModelConfig model;
    const Dataset data = prepare_dataset(cfg, in, model);
    const Ablation ab = Ablation::parse(cfg.ablation);
    log << "train: " << data.train.size() << "/" << data.val.size() << "/" << data.test.size()
        << " windows, ablation " << ab.name() << '\n';
    const TrainResult r = train(data, model, ab);
    const fs::path out(cfg.out_dir);
    auto hist = open_out(out / "history.csv");
    write_history_csv(hist, r.history);
    auto metrics = open_out(out / "metrics.csv");
    metrics << "split,mae,rmse,mape\n";
    const Metrics test = evaluate(data.test, r.params, model, ab, data.scaler);
    write_metrics_row(metrics, "train", evaluate(data.train, r.params, model, ab, data.scaler));
    write_metrics_row(metrics, "val", evaluate(data.val, r.params, model, ab, data.scaler));
    write_metrics_row(metrics, "test", test);
    auto ck = open_out(cfg.checkpoint_path());
    save_checkpoint(ck, {model, ab, cfg.topology(), data.scaler, data.zpi_scale, r.params});
    log << std::setprecision(6) << "train: best epoch " << r.best_epoch << ", test MAE " << test.mae << ", RMSE "
        << test.rmse << ", MAPE " << test.mape << "%\n";
    return 0;
}

int cmd_forecast(const RunConfig& cfg, std::ostream& log) {
    auto cis = open_in(cfg.checkpoint_path(), "checkpoint");
    const Checkpoint ck = load_checkpoint(cis);
    const InputData in = load_inputs(cfg);
    const ModelConfig& m = ck.config;
    if (static_cast<int>(in.series.nodes()) != m.nodes || static_cast<int>(in.series.features()) != m.features)
        throw ShapeError("data shape does not match the checkpoint");
    if (in.series.steps() < static_cast<std::size_t>(m.window)) throw InvalidInput("series shorter than the window");
    const std::size_t start = in.series.steps() - static_cast<std::size_t>(m.window);
    const DynamicNetwork last(std::vector<Snapshot>(in.net.snapshots().begin() + static_cast<std::ptrdiff_t>(start),
                                                    in.net.snapshots().end()));
    Sample s;
    const auto zpis = window_zpis(last, m.window, ck.topology, 1);
    for (const auto& ch : zpis.front()) s.zpi.push_back(ch / ck.zpi_scale);
    for (std::size_t t = start; t < in.series.steps(); ++t) {
        Matrix x(m.nodes, m.features);
        for (int n = 0; n < m.nodes; ++n)
            for (int f = 0; f < m.features; ++f)
                x(n, f) = ck.scaler.forward(static_cast<std::size_t>(f),
                                            in.series.at(t, static_cast<std::size_t>(n), static_cast<std::size_t>(f)));
        s.inputs.push_back(std::move(x));
    }
    const Prediction p = forward(s, ck.params, m, ck.ablation);
    auto os = open_out(fs::path(cfg.out_dir) / "forecast.csv");
    os << "t,node";
    for (int f = 0; f < m.out_features; ++f) os << ",f" << f + 1;
    os << '\n';
    for (std::size_t k = 0; k < p.size(); ++k)
        for (int n = 0; n < m.nodes; ++n) {
            os << in.series.steps() + k + 1 << ',' << n;
            for (int f = 0; f < m.out_features; ++f)
                os << ',' << ck.scaler.inverse(static_cast<std::size_t>(f), p[k](n, f));
            os << '\n';
        }
    log << "forecast: t=" << in.series.steps() + 1 << ".." << in.series.steps() + p.size() << " -> "
        << (fs::path(cfg.out_dir) / "forecast.csv").string() << '\n';
    return 0;
}

int cmd_ablate(const RunConfig& cfg, std::ostream& log) {
    const InputData in = load_inputs(cfg);
    ModelConfig model;
    const Dataset data = prepare_dataset(cfg, in, model);
    const auto rows = run_ablations(cfg, data, model, {"none", "no-zigzag", "no-spatial", "no-temporal"});
    auto os = open_out(fs::path(cfg.out_dir) / "ablation.csv");
    os << "variant,mae,rmse,mape,delta_mae,delta_rmse,delta_mape\n";
    const Metrics& full = rows.front().test;
    for (const auto& r : rows) {
        os << r.variant << ',' << r.test.mae << ',' << r.test.rmse << ',' << r.test.mape << ','
           << r.test.mae - full.mae << ',' << r.test.rmse - full.rmse << ',' << r.test.mape - full.mape << '\n';
        log << std::setprecision(6) << "ablate: " << r.variant << " test MAE " << r.test.mae << " (delta "
            << r.test.mae - full.mae << ")\n";
    }
    return 0;
}

int cmd_synth(const RunConfig& cfg, std::ostream& log) {
    SyntheticSpec spec = cfg.synth;
    spec.seed = cfg.model.seed;
    const SyntheticData d = gen_synthetic(spec);
    auto snaps = open_out(cfg.snapshots);
    write_snapshot_csv(snaps, d.net);
    auto feats = open_out(cfg.features);
    write_feature_csv(feats, d.series);
    auto truth = open_out(fs::path(cfg.out_dir) / "truth.csv");
    truth << "t,cycle,response\n";
    for (std::size_t t = 0; t < d.cycle.size(); ++t) truth << t + 1 << ',' << d.cycle[t] << ',' << d.response[t] << '\n';
    log << "synth: " << spec.steps << " steps, " << spec.nodes << " nodes, delta " << spec.delta << " -> "
        << cfg.snapshots << ", " << cfg.features << '\n';
    return 0;
}

int cmd_gradcheck(const RunConfig& cfg, std::ostream& log) {
    ModelConfig tiny;
    tiny.nodes = 6;
    tiny.features = 2;
    tiny.out_features = 1;
    tiny.embed_dim = 2;
    tiny.link_order = 2;
    tiny.window = 4;
    tiny.horizon = 2;
    tiny.width = 4;
    tiny.layers = 2;
    tiny.zpi_resolution = 16;
    double worst = 0.0;
    for (int k = 0; k < cfg.gradcheck_seeds; ++k) {
        const std::uint64_t seed = cfg.model.seed + static_cast<std::uint64_t>(k);
        std::mt19937_64 rng(seed);
        const ModelParams p = ModelParams::init(tiny, seed, InitStyle::Random);
        const std::vector<Sample> batch{random_sample(tiny, rng), random_sample(tiny, rng)};
        const GradCheckReport r = grad_check(p, tiny, batch, 1e-5, Ablation::parse(cfg.ablation));
        worst = std::max(worst, r.worst);
        log << std::setprecision(3) << "gradcheck: seed " << seed << " worst relative error " << r.worst << " at "
            << r.worst_tensor << "[" << r.worst_index << "] over " << r.checked << " entries\n";
    }
    const bool ok = worst <= 1e-4;
    log << "gradcheck: " << (ok ? "PASS" : "FAIL") << " (bound 1e-4)\n";
    return ok ? 0 : 1;
}

}  // namespace zgcnet
