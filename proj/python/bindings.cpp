#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "zgcnet/error.hpp"
#include "zgcnet/metrics.hpp"
#include "zgcnet/pipeline.hpp"
#include "zgcnet/zigzag.hpp"
#include "zgcnet/znet.hpp"
#include "zgcnet/zpi.hpp"

namespace py = pybind11;
using namespace zgcnet;

namespace {

using EdgeList = std::vector<std::tuple<int, int, double>>;

std::vector<Snapshot> to_window(const std::vector<EdgeList>& snapshots, std::size_t nodes) {
    std::vector<Snapshot> w;
    for (std::size_t k = 0; k < snapshots.size(); ++k) {
        Snapshot s(static_cast<int>(k + 1), nodes);
        for (std::size_t v = 0; v < nodes; ++v) s.add_node(static_cast<NodeId>(v));
        for (const auto& [u, v, wt] : snapshots[k]) s.set_weight(u, v, wt);
        w.push_back(std::move(s));
    }
    return w;
}

ZigzagFiltration filtration_of(const std::vector<EdgeList>& snapshots, std::size_t nodes, double nu_star,
                               const std::string& filtration, const std::string& union_rule) {
    FiltrationMode mode;
    mode.kind = parse_filtration_kind(filtration);
    if (union_rule != "graph" && union_rule != "complex") throw InvalidInput("union must be 'graph' or 'complex'");
    return build_zigzag(to_window(snapshots, nodes), nu_star, mode,
                        union_rule == "complex" ? UnionRule::ComplexUnion : UnionRule::GraphUnion);
}

std::vector<DiagramPoint> to_points(const std::vector<std::pair<double, double>>& pts) {
    std::vector<DiagramPoint> out;
    for (const auto& [b, d] : pts) out.push_back({b, d});
    return out;
}

py::array_t<double> to_array(const std::vector<double>& values, std::vector<py::ssize_t> shape) {
    py::array_t<double> a(shape);
    std::copy(values.begin(), values.end(), a.mutable_data());
    return a;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Zigzag persistence, persistence images, diagram distances and the forecasting pipeline";

    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<InclusionError>(m, "InclusionError", PyExc_RuntimeError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def(
        "zigzag_persistence",
        [](const std::vector<EdgeList>& snapshots, std::size_t nodes, double nu_star, const std::string& filtration,
           const std::string& union_rule, int maxdim) {
            const ZPD zpd =
                compute_zigzag_persistence(filtration_of(snapshots, nodes, nu_star, filtration, union_rule), maxdim);
            std::vector<std::tuple<int, double, double>> out;
            for (const auto& p : zpd.points()) out.emplace_back(p.dim, p.birth.value(), p.death.value());
            return out;
        },
        py::arg("snapshots"), py::arg("nodes"), py::arg("nu_star") = 1.0, py::arg("filtration") = "sublevel",
        py::arg("union") = "graph", py::arg("maxdim") = 1,
        "Zigzag diagram of a window given as one (u, v, weight) edge list per snapshot; all nodes are active. "
        "Returns (dim, birth, death) triples on the half-index grid.");

    m.def(
        "betti_violations",
        [](const std::vector<EdgeList>& snapshots, std::size_t nodes, double nu_star, const std::string& filtration,
           const std::string& union_rule) {
            const ZigzagFiltration zf = filtration_of(snapshots, nodes, nu_star, filtration, union_rule);
            return betti_consistency_check(zf, compute_zigzag_persistence(zf, 1)).violations.size();
        },
        py::arg("snapshots"), py::arg("nodes"), py::arg("nu_star") = 1.0, py::arg("filtration") = "sublevel",
        py::arg("union") = "graph", "Number of positions where bar counts disagree with Betti numbers.");

    m.def(
        "render_zpi",
        [](const std::vector<std::pair<double, double>>& diagram, int window_length, int resolution,
           std::optional<double> theta, const std::string& weighting) {
            GridSpec grid = GridSpec::for_window(window_length, resolution);
            if (theta) grid.theta = *theta;
            WeightingSpec w = default_weighting(grid);
            if (weighting == "constant")
                w.kind = WeightingKind::Constant;
            else if (weighting != "linear")
                throw InvalidInput("weighting must be 'linear' or 'constant'");
            std::vector<BirthPersistence> bp;
            for (const auto& [b, d] : diagram) bp.push_back({b, d - b});
            const ZPIGrid img = render_zpi(bp, grid, w);
            return to_array(img.pixels(), {resolution, resolution});
        },
        py::arg("diagram"), py::arg("window_length"), py::arg("resolution") = 100, py::arg("theta") = py::none(),
        py::arg("weighting") = "linear",
        "Persistence image of (birth, death) pairs; rows index persistence (ascending), columns birth.");

    m.def(
        "wasserstein1",
        [](const std::vector<std::pair<double, double>>& a, const std::vector<std::pair<double, double>>& b) {
            const MatchingResult r = zgcnet::wasserstein1(to_points(a), to_points(b));
            return py::make_tuple(r.cost, r.pairing);
        },
        py::arg("a"), py::arg("b"),
        "Wasserstein-1 distance with L-infinity ground metric; returns (cost, pairing), -1 marking the diagonal.");

    m.def(
        "gen_synthetic",
        [](int nodes, int steps, int period, double delta, double noise, std::uint64_t seed) {
            SyntheticSpec spec;
            spec.nodes = nodes;
            spec.steps = steps;
            spec.period = period;
            spec.delta = delta;
            spec.noise = noise;
            spec.seed = seed;
            spec.response_steps = std::min(spec.response_steps, period);
            spec.episode = std::min(spec.episode, period);
            const SyntheticData d = zgcnet::gen_synthetic(spec);
            std::vector<EdgeList> snaps;
            for (const auto& s : d.net.snapshots()) {
                EdgeList edges;
                for (const auto& [e, w] : s.edges()) edges.emplace_back(e.u, e.v, w);
                snaps.push_back(std::move(edges));
            }
            py::dict out;
            out["snapshots"] = snaps;
            out["features"] = to_array(d.series.data(), {steps, nodes});
            out["cycle"] = d.cycle;
            out["response"] = d.response;
            return out;
        },
        py::arg("nodes") = 16, py::arg("steps") = 960, py::arg("period") = 8, py::arg("delta") = 1.0,
        py::arg("noise") = 0.1, py::arg("seed") = 1, "Planted-cycle dynamic network with node signals.");

    m.def(
        "grad_check",
        [](std::uint64_t seed) {
            ModelConfig cfg;
            cfg.nodes = 6;
            cfg.features = 2;
            cfg.window = 4;
            cfg.horizon = 2;
            cfg.width = 4;
            cfg.zpi_resolution = 16;
            std::mt19937_64 rng(seed);
            const ModelParams p = ModelParams::init(cfg, seed, InitStyle::Random);
            const std::vector<Sample> batch{random_sample(cfg, rng), random_sample(cfg, rng)};
            return zgcnet::grad_check(p, cfg, batch).worst;
        },
        py::arg("seed") = 1, "Worst relative analytic-vs-numerical gradient error on a tiny random model.");

    m.def(
        "run_command",
        [](const std::string& name, const std::map<std::string, std::string>& config) {
            RunConfig cfg;
            cfg.apply(config);
            const std::map<std::string, int (*)(const RunConfig&, std::ostream&)> commands = {
                {"filtrate", cmd_filtrate}, {"zigzag", cmd_zigzag},   {"zpi", cmd_zpi},
                {"distance", cmd_distance}, {"train", cmd_train},     {"forecast", cmd_forecast},
                {"ablate", cmd_ablate},     {"synth", cmd_synth},     {"gradcheck", cmd_gradcheck}};
            const auto it = commands.find(name);
            if (it == commands.end()) throw InvalidInput("unknown command '" + name + "'");
            std::ostringstream log;
            int rc;
            {
                py::gil_scoped_release release;
                rc = it->second(cfg, log);
            }
            return py::make_tuple(rc, log.str());
        },
        py::arg("name"), py::arg("config") = std::map<std::string, std::string>{},
        "Run a pipeline subcommand with string config values; returns (exit code, log text).");
}
