#include "zgcnet/znet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "zgcnet/error.hpp"

namespace zgcnet {

namespace {

using ConstMap = Eigen::Map<const Matrix>;
using MutMap = Eigen::Map<Matrix>;

void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidInput(what);
}

void check_finite(const Matrix& m, const std::string& where) {
    if (!m.allFinite()) throw NumericalError("non-finite values in " + where);
}

Matrix sigmoid(const Matrix& a) { return (1.0 / (1.0 + (-a.array()).exp())).matrix(); }

Matrix add_bias(Matrix m, std::span<const double> b) {
    m.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    return m;
}

void add_colsum(std::span<double> b, const Matrix& d) {
    const Eigen::RowVectorXd s = d.colwise().sum();
    for (std::size_t j = 0; j < b.size(); ++j) b[j] += s(static_cast<Eigen::Index>(j));
}

std::string layer_name(int layer, const char* part) { return "layer " + std::to_string(layer + 1) + " " + part; }

std::string prefix(int layer) { return "l" + std::to_string(layer + 1) + "."; }

// ---- CNN ----------------------------------------------------------------

struct FeatureMap {
    int channels = 0;
    int size = 0;
    std::vector<double> v;

    FeatureMap() = default;
    FeatureMap(int c, int s) : channels(c), size(s), v(static_cast<std::size_t>(c) * s * s, 0.0) {}
    double& at(int c, int i, int j) { return v[(static_cast<std::size_t>(c) * size + i) * size + j]; }
    double at(int c, int i, int j) const { return v[(static_cast<std::size_t>(c) * size + i) * size + j]; }
};

struct CnnCache {
    FeatureMap input;
    std::vector<FeatureMap> pre, act;
    std::vector<int> argmax;
    Vector pooled;
};

int conv_out(int size, const CnnSpec& spec) { return size < spec.kernel ? 0 : (size - spec.kernel) / spec.stride + 1; }

Vector cnn_forward(const std::vector<Matrix>& zpi, const CnnSpec& spec, const CnnWeights& w, CnnCache* cache) {
    require(!zpi.empty(), "ZPI input has no channels");
    const int p = static_cast<int>(zpi.front().rows());
    FeatureMap in(static_cast<int>(zpi.size()), p);
    for (int c = 0; c < in.channels; ++c) {
        if (zpi[c].rows() != p || zpi[c].cols() != p) throw ShapeError("ZPI channels must be square and equal-sized");
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j) in.at(c, i, j) = zpi[c](i, j);
    }
    CnnCache local;
    CnnCache& cc = cache ? *cache : local;
    cc.pre.clear();
    cc.act.clear();
    const FeatureMap* cur = &in;
    for (int l = 0; l < spec.layers; ++l) {
        const int m = conv_out(cur->size, spec);
        if (m < 1) throw InvalidInput("ZPI grid is smaller than the CNN receptive field");
        const int k = spec.kernel, s = spec.stride, cin = cur->channels;
        if (w.kernels[l].size() != static_cast<std::size_t>(spec.filters) * cin * k * k)
            throw ShapeError("CNN kernel has the wrong size");
        FeatureMap pre(spec.filters, m);
        for (int f = 0; f < spec.filters; ++f)
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    double acc = w.biases[l][f];
                    for (int c = 0; c < cin; ++c) {
                        const double* ker = &w.kernels[l][((static_cast<std::size_t>(f) * cin + c) * k) * k];
                        for (int u = 0; u < k; ++u)
                            for (int v = 0; v < k; ++v) acc += ker[u * k + v] * cur->at(c, s * i + u, s * j + v);
                    }
                    pre.at(f, i, j) = acc;
                }
        FeatureMap act = pre;
        for (double& x : act.v) x = std::max(x, 0.0);
        cc.pre.push_back(std::move(pre));
        cc.act.push_back(std::move(act));
        cur = &cc.act.back();
    }
    // pool-size windows followed by a global max reduce to one max per filter
    const FeatureMap& last = cc.act.back();
    const int cells = last.size * last.size;
    cc.pooled = Vector::Zero(spec.filters);
    cc.argmax.assign(spec.filters, 0);
    for (int f = 0; f < spec.filters; ++f) {
        const double* base = &last.v[static_cast<std::size_t>(f) * cells];
        const int best = static_cast<int>(std::max_element(base, base + cells) - base);
        cc.argmax[f] = best;
        cc.pooled(f) = base[best];
    }
    const int out = static_cast<int>(w.map_bias.size());
    ConstMap map(w.map_weight.data(), out, spec.filters);
    Vector z = map * cc.pooled;
    for (int o = 0; o < out; ++o) z(o) += w.map_bias[o];
    cc.input = std::move(in);
    return z;
}

struct CnnGrad {
    std::vector<std::span<double>> kernels, biases;
    std::span<double> map_weight, map_bias;
};

void cnn_backward(const CnnCache& cc, const CnnSpec& spec, const CnnWeights& w, const Vector& dz, CnnGrad& g) {
    const int out = static_cast<int>(dz.size());
    ConstMap map(w.map_weight.data(), out, spec.filters);
    MutMap(g.map_weight.data(), out, spec.filters) += dz * cc.pooled.transpose();
    for (int o = 0; o < out; ++o) g.map_bias[o] += dz(o);
    const Vector dpool = map.transpose() * dz;

    const int layers = spec.layers;
    FeatureMap dact(cc.act.back().channels, cc.act.back().size);
    const int cells = dact.size * dact.size;
    for (int f = 0; f < spec.filters; ++f) dact.v[static_cast<std::size_t>(f) * cells + cc.argmax[f]] = dpool(f);

    const int k = spec.kernel, s = spec.stride;
    for (int l = layers - 1; l >= 0; --l) {
        const FeatureMap& pre = cc.pre[l];
        const FeatureMap& in = l == 0 ? cc.input : cc.act[l - 1];
        const int cin = in.channels, m = pre.size;
        FeatureMap dpre(pre.channels, m);
        for (std::size_t i = 0; i < dpre.v.size(); ++i) dpre.v[i] = pre.v[i] > 0.0 ? dact.v[i] : 0.0;
        FeatureMap din(cin, in.size);
        for (int f = 0; f < spec.filters; ++f)
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    const double d = dpre.at(f, i, j);
                    if (d == 0.0) continue;
                    g.biases[l][f] += d;
                    for (int c = 0; c < cin; ++c) {
                        const std::size_t off = ((static_cast<std::size_t>(f) * cin + c) * k) * k;
                        const double* ker = &w.kernels[l][off];
                        double* gker = &g.kernels[l][off];
                        for (int u = 0; u < k; ++u)
                            for (int v = 0; v < k; ++v) {
                                gker[u * k + v] += d * in.at(c, s * i + u, s * j + v);
                                if (l > 0) din.at(c, s * i + u, s * j + v) += d * ker[u * k + v];
                            }
                    }
                }
        dact = std::move(din);
    }
}

// ---- graph convolutions -------------------------------------------------

Matrix stacked_powers(const Matrix& h, const std::vector<Matrix>& link) {
    const Eigen::Index n = h.rows(), cin = h.cols();
    Matrix g(n, cin * static_cast<Eigen::Index>(link.size()));
    g.leftCols(cin) = h;
    for (std::size_t k = 1; k < link.size(); ++k) g.middleCols(cin * k, cin).noalias() = link[k] * h;
    return g;
}

Matrix embed_contract(const Matrix& g, const Matrix& phi, std::span<const double> w, int out_width) {
    const Eigen::Index rows = g.cols(), c = phi.cols();
    if (w.size() != static_cast<std::size_t>(c * rows * out_width)) throw ShapeError("graph convolution weight has the wrong size");
    Matrix out = Matrix::Zero(g.rows(), out_width);
    for (Eigen::Index e = 0; e < c; ++e) {
        ConstMap we(w.data() + e * rows * out_width, rows, out_width);
        out.noalias() += phi.col(e).asDiagonal() * (g * we);
    }
    return out;
}

// Backward of embed_contract: accumulates into dW and dphi, returns dG.
Matrix embed_contract_backward(const Matrix& g, const Matrix& phi, std::span<const double> w, int out_width,
                               const Matrix& dout, std::span<double> dw, Matrix& dphi) {
    const Eigen::Index rows = g.cols(), c = phi.cols();
    Matrix dg = Matrix::Zero(g.rows(), rows);
    for (Eigen::Index e = 0; e < c; ++e) {
        ConstMap we(w.data() + e * rows * out_width, rows, out_width);
        const Matrix scaled = phi.col(e).asDiagonal() * dout;
        MutMap(dw.data() + e * rows * out_width, rows, out_width).noalias() += g.transpose() * scaled;
        dphi.col(e) += (g * we).cwiseProduct(dout).rowwise().sum();
        dg.noalias() += scaled * we.transpose();
    }
    return dg;
}

Matrix power_sum(const std::vector<Matrix>& link) {
    Matrix a = link[0];
    for (std::size_t k = 1; k < link.size(); ++k) a += link[k];
    return a;
}

// ---- parameter views ----------------------------------------------------

struct LayerView {
    std::span<const double> spatial, temporal, mix;
    CnnWeights cnn;
    GruWeights gru;
};

struct LayerGrad {
    std::span<double> spatial, temporal, mix;
    CnnGrad cnn;
    std::span<double> wz, bz, wr, br, wo, bo;
};

std::span<double> mutable_view(ModelParams& p, const std::string& name) {
    auto& t = p.get(name);
    return {t.values.data(), t.values.size()};
}

LayerView layer_view(const ModelParams& p, const ModelConfig& cfg, int l) {
    const std::string pre = prefix(l);
    LayerView v;
    v.spatial = p.view(pre + "spatial");
    v.temporal = p.view(pre + "temporal");
    v.mix = p.view(pre + "temporal_mix");
    for (int j = 0; j < cfg.cnn.layers; ++j) {
        v.cnn.kernels.push_back(p.view(pre + "conv" + std::to_string(j + 1) + ".kernel"));
        v.cnn.biases.push_back(p.view(pre + "conv" + std::to_string(j + 1) + ".bias"));
    }
    v.cnn.map_weight = p.view(pre + "gate.weight");
    v.cnn.map_bias = p.view(pre + "gate.bias");
    v.gru = {p.view(pre + "gru.wz"), p.view(pre + "gru.bz"), p.view(pre + "gru.wr"),
             p.view(pre + "gru.br"), p.view(pre + "gru.wo"), p.view(pre + "gru.bo")};
    return v;
}

LayerGrad layer_grad(ModelParams& g, const ModelConfig& cfg, int l) {
    const std::string pre = prefix(l);
    LayerGrad v;
    v.spatial = mutable_view(g, pre + "spatial");
    v.temporal = mutable_view(g, pre + "temporal");
    v.mix = mutable_view(g, pre + "temporal_mix");
    for (int j = 0; j < cfg.cnn.layers; ++j) {
        v.cnn.kernels.push_back(mutable_view(g, pre + "conv" + std::to_string(j + 1) + ".kernel"));
        v.cnn.biases.push_back(mutable_view(g, pre + "conv" + std::to_string(j + 1) + ".bias"));
    }
    v.cnn.map_weight = mutable_view(g, pre + "gate.weight");
    v.cnn.map_bias = mutable_view(g, pre + "gate.bias");
    v.wz = mutable_view(g, pre + "gru.wz");
    v.bz = mutable_view(g, pre + "gru.bz");
    v.wr = mutable_view(g, pre + "gru.wr");
    v.br = mutable_view(g, pre + "gru.br");
    v.wo = mutable_view(g, pre + "gru.wo");
    v.bo = mutable_view(g, pre + "gru.bo");
    return v;
}

// ---- GRU ----------------------------------------------------------------

struct GruCache {
    Matrix prev, input, xin, z, r, xo, cand, out;
};

Matrix gru_forward(const Matrix& prev, const Matrix& input, const GruWeights& w, GruCache* cache) {
    const Eigen::Index n = prev.rows(), c = prev.cols();
    if (input.rows() != n || input.cols() != c) throw ShapeError("GRU input and state widths differ");
    if (w.wz.size() != static_cast<std::size_t>(2 * c * c) || w.bz.size() != static_cast<std::size_t>(c))
        throw ShapeError("GRU weights have the wrong size");
    Matrix xin(n, 2 * c);
    xin << prev, input;
    const Matrix z = sigmoid(add_bias(xin * ConstMap(w.wz.data(), 2 * c, c), w.bz));
    const Matrix r = sigmoid(add_bias(xin * ConstMap(w.wr.data(), 2 * c, c), w.br));
    Matrix xo(n, 2 * c);
    xo << r.cwiseProduct(prev), input;
    const Matrix cand = add_bias(xo * ConstMap(w.wo.data(), 2 * c, c), w.bo).array().tanh().matrix();
    Matrix out = z.cwiseProduct(prev) + (Matrix::Ones(n, c) - z).cwiseProduct(cand);
    if (cache) *cache = {prev, input, xin, z, r, xo, cand, out};
    return out;
}

// Returns d(prev); adds d(input) into dinput.
Matrix gru_backward(const GruCache& gc, const GruWeights& w, const Matrix& dout, LayerGrad& g, Matrix& dinput) {
    const Eigen::Index c = gc.prev.cols();
    const Matrix ones = Matrix::Ones(gc.prev.rows(), c);
    const Matrix dz = dout.cwiseProduct(gc.prev - gc.cand);
    const Matrix dcand = dout.cwiseProduct(ones - gc.z);
    Matrix dprev = dout.cwiseProduct(gc.z);

    const Matrix dao = dcand.cwiseProduct(ones - gc.cand.cwiseProduct(gc.cand));
    MutMap(g.wo.data(), 2 * c, c).noalias() += gc.xo.transpose() * dao;
    add_colsum(g.bo, dao);
    const Matrix dxo = dao * ConstMap(w.wo.data(), 2 * c, c).transpose();
    const Matrix drprev = dxo.leftCols(c);
    dinput += dxo.rightCols(c);
    const Matrix dr = drprev.cwiseProduct(gc.prev);
    dprev += drprev.cwiseProduct(gc.r);

    const Matrix dar = dr.cwiseProduct(gc.r.cwiseProduct(ones - gc.r));
    const Matrix daz = dz.cwiseProduct(gc.z.cwiseProduct(ones - gc.z));
    MutMap(g.wr.data(), 2 * c, c).noalias() += gc.xin.transpose() * dar;
    MutMap(g.wz.data(), 2 * c, c).noalias() += gc.xin.transpose() * daz;
    add_colsum(g.br, dar);
    add_colsum(g.bz, daz);
    const Matrix dxin =
        dar * ConstMap(w.wr.data(), 2 * c, c).transpose() + daz * ConstMap(w.wz.data(), 2 * c, c).transpose();
    dprev += dxin.leftCols(c);
    dinput += dxin.rightCols(c);
    return dprev;
}

// ---- whole model --------------------------------------------------------

struct LayerCache {
    std::vector<Matrix> inputs;
    std::vector<Matrix> g_spatial, hs;
    Matrix mixed, g_temporal, ht;
    CnnCache cnn;
    Vector z;
    std::vector<GruCache> gru;
    std::vector<Matrix> outputs;
};

struct ModelCache {
    Matrix phi, raw, laplacian;
    std::vector<Matrix> link;
    Matrix power_sum;
    std::vector<LayerCache> layers;
    Matrix final_state;
};

void check_sample(const Sample& s, const ModelConfig& cfg) {
    if (static_cast<int>(s.inputs.size()) != cfg.window) throw ShapeError("sample window length differs from config");
    for (const auto& x : s.inputs)
        if (x.rows() != cfg.nodes || x.cols() != cfg.features) throw ShapeError("sample input is not N x F");
    if (static_cast<int>(s.zpi.size()) != cfg.zpi_channels) throw ShapeError("sample ZPI channel count differs from config");
    for (const auto& z : s.zpi)
        if (z.rows() != cfg.zpi_resolution || z.cols() != cfg.zpi_resolution) throw ShapeError("sample ZPI is not p x p");
}

Prediction run_forward(const Sample& sample, const ModelParams& params, const ModelConfig& cfg, const Ablation& ab,
                       const Vector* z_override, ModelCache& mc) {
    check_sample(sample, cfg);
    const int n = cfg.nodes, ch = cfg.half_width(), c = cfg.width;
    mc.phi = ConstMap(params.view("embedding").data(), n, cfg.embed_dim);
    mc.raw = mc.phi * mc.phi.transpose();
    mc.laplacian = adaptive_laplacian(mc.phi);
    check_finite(mc.laplacian, "adaptive laplacian");
    mc.link = laplacian_link(mc.laplacian, cfg.link_order);
    mc.power_sum = power_sum(mc.link);
    mc.layers.assign(cfg.layers, {});

    std::vector<Matrix> seq = sample.inputs;
    for (int l = 0; l < cfg.layers; ++l) {
        LayerCache& lc = mc.layers[l];
        const LayerView v = layer_view(params, cfg, l);
        lc.inputs = seq;

        if (ab.no_zigzag) {
            lc.z = Vector::Ones(ch);
        } else if (z_override) {
            if (z_override->size() != ch) throw ShapeError("Z override must have C_out/2 entries");
            lc.z = *z_override;
        } else {
            lc.z = cnn_forward(sample.zpi, cfg.cnn, v.cnn, &lc.cnn);
            check_finite(lc.z, layer_name(l, "zpi encoder"));
        }

        if (ab.no_temporal) {
            lc.ht = Matrix::Zero(n, ch);
        } else {
            lc.mixed = Matrix::Zero(n, seq.front().cols());
            for (int s = 0; s < cfg.window; ++s) lc.mixed += v.mix[s] * seq[s];
            lc.g_temporal = mc.power_sum * lc.mixed;
            lc.ht = embed_contract(lc.g_temporal, mc.phi, v.temporal, ch);
            check_finite(lc.ht, layer_name(l, "temporal convolution"));
        }

        Matrix state = Matrix::Zero(n, c);
        lc.g_spatial.resize(cfg.window);
        lc.hs.resize(cfg.window);
        lc.gru.resize(cfg.window);
        lc.outputs.resize(cfg.window);
        for (int i = 0; i < cfg.window; ++i) {
            if (ab.no_spatial) {
                lc.hs[i] = Matrix::Zero(n, ch);
            } else {
                lc.g_spatial[i] = stacked_powers(seq[i], mc.link);
                lc.hs[i] = embed_contract(lc.g_spatial[i], mc.phi, v.spatial, ch);
                check_finite(lc.hs[i], layer_name(l, "spatial convolution"));
            }
            const Matrix hout = zigzag_layer(lc.hs[i], lc.ht, lc.z);
            state = gru_forward(state, hout, v.gru, &lc.gru[i]);
            lc.outputs[i] = state;
        }
        check_finite(state, layer_name(l, "GRU"));
        seq = lc.outputs;
    }
    mc.final_state = seq.back();

    const int cols = cfg.horizon * cfg.out_features;
    const Matrix flat =
        add_bias(mc.final_state * ConstMap(params.view("head.weight").data(), c, cols), params.view("head.bias"));
    check_finite(flat, "output head");
    Prediction pred(cfg.horizon, Matrix(n, cfg.out_features));
    for (int t = 0; t < cfg.horizon; ++t) pred[t] = flat.middleCols(t * cfg.out_features, cfg.out_features);
    return pred;
}

void run_backward(const ModelCache& mc, const ModelParams& params, const ModelConfig& cfg, const Ablation& ab,
                  bool z_fixed, const Prediction& dpred, ModelParams& grad) {
    const int n = cfg.nodes, ch = cfg.half_width(), c = cfg.width;
    const int cols = cfg.horizon * cfg.out_features;
    Matrix dflat(n, cols);
    for (int t = 0; t < cfg.horizon; ++t) dflat.middleCols(t * cfg.out_features, cfg.out_features) = dpred[t];
    MutMap(mutable_view(grad, "head.weight").data(), c, cols).noalias() += mc.final_state.transpose() * dflat;
    add_colsum(mutable_view(grad, "head.bias"), dflat);

    std::vector<Matrix> dseq(cfg.window, Matrix::Zero(n, c));
    dseq.back() = dflat * ConstMap(params.view("head.weight").data(), c, cols).transpose();

    Matrix dphi = Matrix::Zero(n, cfg.embed_dim);
    std::vector<Matrix> dlink(mc.link.size(), Matrix::Zero(n, n));

    for (int l = cfg.layers - 1; l >= 0; --l) {
        const LayerCache& lc = mc.layers[l];
        const LayerView v = layer_view(params, cfg, l);
        LayerGrad g = layer_grad(grad, cfg, l);
        const Eigen::Index cin = lc.inputs.front().cols();
        std::vector<Matrix> dinputs(cfg.window, Matrix::Zero(n, cin));
        Vector dz = Vector::Zero(ch);
        Matrix dht = Matrix::Zero(n, ch);
        Matrix carry = Matrix::Zero(n, c);
        for (int i = cfg.window - 1; i >= 0; --i) {
            const Matrix dstate = dseq[i] + carry;
            Matrix dhout = Matrix::Zero(n, c);
            carry = gru_backward(lc.gru[i], v.gru, dstate, g, dhout);
            const Matrix ds = dhout.leftCols(ch), dt = dhout.rightCols(ch);
            if (!ab.no_spatial) {
                dz += ds.cwiseProduct(lc.hs[i]).colwise().sum().transpose();
                const Matrix dhs = ds * lc.z.asDiagonal();
                const Matrix dg = embed_contract_backward(lc.g_spatial[i], mc.phi, v.spatial, ch, dhs, g.spatial, dphi);
                for (std::size_t k = 0; k < mc.link.size(); ++k) {
                    const Matrix dgk = dg.middleCols(cin * k, cin);
                    if (k == 0) {
                        dinputs[i] += dgk;
                    } else {
                        dinputs[i].noalias() += mc.link[k].transpose() * dgk;
                        dlink[k].noalias() += dgk * lc.inputs[i].transpose();
                    }
                }
            }
            if (!ab.no_temporal) {
                dz += dt.cwiseProduct(lc.ht).colwise().sum().transpose();
                dht += dt * lc.z.asDiagonal();
            }
        }
        if (!ab.no_temporal) {
            const Matrix dgt = embed_contract_backward(lc.g_temporal, mc.phi, v.temporal, ch, dht, g.temporal, dphi);
            const Matrix da = dgt * lc.mixed.transpose();
            for (std::size_t k = 1; k < mc.link.size(); ++k) dlink[k] += da;
            const Matrix dmixed = mc.power_sum.transpose() * dgt;
            for (int s = 0; s < cfg.window; ++s) {
                g.mix[s] += dmixed.cwiseProduct(lc.inputs[s]).sum();
                dinputs[s] += v.mix[s] * dmixed;
            }
        }
        if (!ab.no_zigzag && !z_fixed) cnn_backward(lc.cnn, cfg.cnn, v.cnn, dz, g.cnn);
        dseq = std::move(dinputs);
    }

    // powers L^k = L L^{k-1}
    Matrix dl = Matrix::Zero(n, n);
    for (std::size_t k = mc.link.size() - 1; k >= 1; --k) {
        dl.noalias() += dlink[k] * mc.link[k - 1].transpose();
        if (k >= 2) dlink[k - 1].noalias() += mc.laplacian.transpose() * dlink[k];
    }
    // row softmax, then ReLU(phi phi^T)
    const Matrix& lap = mc.laplacian;
    const Vector rows = dl.cwiseProduct(lap).rowwise().sum();
    Matrix dm = lap.cwiseProduct(dl - rows.replicate(1, n));
    dm = (mc.raw.array() > 0.0).select(dm.array(), 0.0).matrix();
    dphi.noalias() += (dm + dm.transpose()) * mc.phi;
    MutMap(mutable_view(grad, "embedding").data(), n, cfg.embed_dim) += dphi;
}

double sign(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

// ---- config -------------------------------------------------------------

void ModelConfig::validate() const {
    require(nodes > 0 && features > 0 && out_features > 0 && embed_dim > 0 && window > 0 && horizon > 0 &&
                width > 0 && layers > 0 && zpi_resolution > 0 && zpi_channels > 0,
            "model sizes must be positive");
    require(width % 2 == 0, "layer width C_out must be even");
    require(link_order >= 1, "Laplacianlink order K must be at least 1");
    require(out_features <= features, "F_out cannot exceed F");
    require(cnn.layers > 0 && cnn.filters > 0 && cnn.kernel > 0 && cnn.stride > 0 && cnn.pool > 0,
            "CNN sizes must be positive");
    require(learning_rate > 0.0 && decay > 0.0 && decay <= 1.0 && patience > 0 && batch_size > 0 && epochs > 0,
            "training hyperparameters out of range");
    int size = zpi_resolution;
    for (int l = 0; l < cnn.layers; ++l) {
        size = conv_out(size, cnn);
        require(size >= 1, "ZPI grid of " + std::to_string(zpi_resolution) + " is smaller than the CNN receptive field");
    }
}

Ablation Ablation::parse(std::string_view name) {
    if (name == "none" || name == "full") return {};
    if (name == "no-zigzag") return {true, false, false};
    if (name == "no-spatial") return {false, true, false};
    if (name == "no-temporal") return {false, false, true};
    throw InvalidInput("unknown ablation '" + std::string(name) + "'");
}

std::string Ablation::name() const {
    if (no_zigzag && !no_spatial && !no_temporal) return "no-zigzag";
    if (no_spatial && !no_zigzag && !no_temporal) return "no-spatial";
    if (no_temporal && !no_zigzag && !no_spatial) return "no-temporal";
    if (!no_zigzag && !no_spatial && !no_temporal) return "none";
    std::string s;
    if (no_zigzag) s += "no-zigzag+";
    if (no_spatial) s += "no-spatial+";
    if (no_temporal) s += "no-temporal+";
    s.pop_back();
    return s;
}

// ---- params -------------------------------------------------------------

ModelParams ModelParams::init(const ModelConfig& cfg, std::uint64_t seed, InitStyle style) {
    cfg.validate();
    std::mt19937_64 rng(seed);
    const bool random = style == InitStyle::Random;
    ModelParams p;
    auto add = [&](std::string name, std::vector<int> shape) -> std::vector<double>& {
        std::size_t size = 1;
        for (int d : shape) size *= static_cast<std::size_t>(d);
        p.tensors_.push_back({std::move(name), std::move(shape), std::vector<double>(size, 0.0)});
        return p.tensors_.back().values;
    };
    auto uniform = [&](std::vector<double>& v, double lo, double hi) {
        std::uniform_real_distribution<double> d(lo, hi);
        for (double& x : v) x = d(rng);
    };
    auto glorot = [&](std::vector<double>& v, double fan_in, double fan_out) {
        const double a = std::sqrt(6.0 / (fan_in + fan_out));
        uniform(v, -a, a);
    };
    auto bias = [&](std::vector<double>& v, double centre) {
        if (random) uniform(v, centre - 0.1, centre + 0.1);
        else std::fill(v.begin(), v.end(), centre);
    };

    const int n = cfg.nodes, e = cfg.embed_dim, k1 = cfg.link_order + 1, ch = cfg.half_width(), c = cfg.width;
    {
        auto& phi = add("embedding", {n, e});
        std::normal_distribution<double> g(0.0, 0.5);
        for (double& x : phi) x = g(rng);
    }
    for (int l = 0; l < cfg.layers; ++l) {
        const std::string pre = prefix(l);
        const int cin = cfg.layer_input(l);
        glorot(add(pre + "spatial", {e, k1, cin, ch}), e * k1 * cin, ch);
        glorot(add(pre + "temporal", {e, cin, ch}), e * cin, ch);
        auto& mix = add(pre + "temporal_mix", {cfg.window});
        if (random) uniform(mix, 0.5 / cfg.window, 1.5 / cfg.window);
        else std::fill(mix.begin(), mix.end(), 1.0 / cfg.window);
        int in = cfg.zpi_channels;
        for (int j = 0; j < cfg.cnn.layers; ++j) {
            const std::string cj = pre + "conv" + std::to_string(j + 1);
            auto& ker = add(cj + ".kernel", {cfg.cnn.filters, in, cfg.cnn.kernel, cfg.cnn.kernel});
            std::normal_distribution<double> g(0.0, std::sqrt(2.0 / (in * cfg.cnn.kernel * cfg.cnn.kernel)));
            for (double& x : ker) x = g(rng);
            bias(add(cj + ".bias", {cfg.cnn.filters}), 0.0);
            in = cfg.cnn.filters;
        }
        auto& gw = add(pre + "gate.weight", {ch, cfg.cnn.filters});
        if (random) glorot(gw, cfg.cnn.filters, ch);
        bias(add(pre + "gate.bias", {ch}), 1.0);
        for (const char* gate : {"z", "r", "o"}) {
            glorot(add(pre + "gru.w" + gate, {2 * c, c}), 2 * c, c);
            bias(add(pre + "gru.b" + gate, {c}), 0.0);
        }
    }
    glorot(add("head.weight", {c, cfg.horizon * cfg.out_features}), c, cfg.horizon * cfg.out_features);
    bias(add("head.bias", {cfg.horizon * cfg.out_features}), 0.0);
    return p;
}

Tensor& ModelParams::get(std::string_view name) {
    for (auto& t : tensors_)
        if (t.name == name) return t;
    throw InvalidInput("no parameter named '" + std::string(name) + "'");
}

const Tensor& ModelParams::get(std::string_view name) const { return const_cast<ModelParams*>(this)->get(name); }

std::span<const double> ModelParams::view(std::string_view name) const {
    const auto& t = get(name);
    return {t.values.data(), t.values.size()};
}

ModelParams ModelParams::zeros_like() const {
    ModelParams z = *this;
    z.fill(0.0);
    return z;
}

std::size_t ModelParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors_) n += t.values.size();
    return n;
}

bool ModelParams::all_finite() const {
    for (const auto& t : tensors_)
        for (double x : t.values)
            if (!std::isfinite(x)) return false;
    return true;
}

void ModelParams::fill(double value) {
    for (auto& t : tensors_) std::fill(t.values.begin(), t.values.end(), value);
}

// ---- layers -------------------------------------------------------------

Matrix adaptive_laplacian(const Matrix& phi) {
    if (!phi.allFinite()) throw InvalidInput("node embedding is not finite");
    Matrix m = (phi * phi.transpose()).cwiseMax(0.0);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double top = m.row(i).maxCoeff();
        m.row(i) = (m.row(i).array() - top).exp().matrix();
        m.row(i) /= m.row(i).sum();
    }
    return m;
}

std::vector<Matrix> laplacian_link(const Matrix& laplacian, int order) {
    if (order < 1) throw InvalidInput("Laplacianlink order must be at least 1");
    if (laplacian.rows() != laplacian.cols()) throw ShapeError("Laplacian must be square");
    std::vector<Matrix> link{Matrix::Identity(laplacian.rows(), laplacian.cols())};
    for (int k = 1; k <= order; ++k) link.push_back(laplacian * link.back());
    return link;
}

Matrix spatial_conv(const Matrix& h, const std::vector<Matrix>& link, const Matrix& phi, std::span<const double> v,
                    int out_width) {
    if (h.rows() != phi.rows() || link.front().rows() != h.rows()) throw ShapeError("spatial convolution node counts differ");
    return embed_contract(stacked_powers(h, link), phi, v, out_width);
}

Matrix temporal_conv(const std::vector<Matrix>& window, const std::vector<Matrix>& link, const Matrix& phi,
                     std::span<const double> u, std::span<const double> q, int out_width) {
    if (window.empty() || window.size() != q.size()) throw ShapeError("temporal mixing length differs from window");
    Matrix mixed = Matrix::Zero(window.front().rows(), window.front().cols());
    for (std::size_t s = 0; s < window.size(); ++s) {
        if (window[s].rows() != mixed.rows() || window[s].cols() != mixed.cols())
            throw ShapeError("window slices differ in shape");
        mixed += q[s] * window[s];
    }
    if (mixed.rows() != phi.rows()) throw ShapeError("temporal convolution node counts differ");
    return embed_contract(power_sum(link) * mixed, phi, u, out_width);
}

Vector zpi_encoder(const std::vector<Matrix>& zpi, const CnnSpec& spec, const CnnWeights& w) {
    return cnn_forward(zpi, spec, w, nullptr);
}

Matrix zigzag_layer(const Matrix& hs, const Matrix& ht, const Vector& z) {
    if (hs.rows() != ht.rows() || hs.cols() != ht.cols() || hs.cols() != z.size())
        throw ShapeError("zigzag layer widths differ");
    Matrix out(hs.rows(), 2 * hs.cols());
    out << hs * z.asDiagonal(), ht * z.asDiagonal();
    return out;
}

Matrix gru_cell(const Matrix& prev, const Matrix& input, const GruWeights& w) {
    return gru_forward(prev, input, w, nullptr);
}

// ---- model --------------------------------------------------------------

Prediction forward(const Sample& sample, const ModelParams& params, const ModelConfig& cfg, const Ablation& ablation,
                   const Vector* z_override) {
    ModelCache mc;
    return run_forward(sample, params, cfg, ablation, z_override, mc);
}

Metrics loss_metrics(const std::vector<Matrix>& prediction, const std::vector<Matrix>& target) {
    if (prediction.size() != target.size()) throw ShapeError("prediction and target horizons differ");
    double abs_sum = 0.0, sq_sum = 0.0, pct_sum = 0.0;
    std::size_t count = 0, pct_count = 0;
    for (std::size_t t = 0; t < target.size(); ++t) {
        if (prediction[t].rows() != target[t].rows() || prediction[t].cols() != target[t].cols())
            throw ShapeError("prediction and target shapes differ");
        for (Eigen::Index i = 0; i < target[t].size(); ++i) {
            const double y = target[t].data()[i], d = prediction[t].data()[i] - y;
            abs_sum += std::abs(d);
            sq_sum += d * d;
            ++count;
            if (std::abs(y) >= 1e-6) {
                pct_sum += std::abs(d) / std::abs(y);
                ++pct_count;
            }
        }
    }
    Metrics m;
    if (count == 0) return m;
    m.mae = abs_sum / count;
    m.rmse = std::sqrt(sq_sum / count);
    m.mape = pct_count ? 100.0 * pct_sum / pct_count : 0.0;
    return m;
}

double loss_and_gradient(const std::vector<const Sample*>& batch, const ModelParams& params, const ModelConfig& cfg,
                         const Ablation& ablation, ModelParams* grad) {
    if (batch.empty()) throw InvalidInput("empty batch");
    const double count = static_cast<double>(batch.size()) * cfg.horizon * cfg.nodes * cfg.out_features;
    double total = 0.0;
    for (const Sample* s : batch) {
        if (static_cast<int>(s->targets.size()) != cfg.horizon) throw ShapeError("sample horizon differs from config");
        ModelCache mc;
        const Prediction pred = run_forward(*s, params, cfg, ablation, nullptr, mc);
        Prediction dpred(cfg.horizon);
        for (int t = 0; t < cfg.horizon; ++t) {
            if (s->targets[t].rows() != cfg.nodes || s->targets[t].cols() != cfg.out_features)
                throw ShapeError("sample target is not N x F_out");
            const Matrix diff = pred[t] - s->targets[t];
            total += diff.cwiseAbs().sum();
            dpred[t] = diff.unaryExpr([&](double x) { return sign(x) / count; });
        }
        if (grad) run_backward(mc, params, cfg, ablation, false, dpred, *grad);
    }
    return total / count;
}

GradCheckReport grad_check(const ModelParams& params, const ModelConfig& cfg, const std::vector<Sample>& batch,
                           double epsilon, const Ablation& ablation, const std::vector<std::string>& only) {
    std::vector<const Sample*> ptrs;
    for (const auto& s : batch) ptrs.push_back(&s);
    ModelParams grad = params.zeros_like();
    loss_and_gradient(ptrs, params, cfg, ablation, &grad);
    ModelParams probe = params;
    GradCheckReport report;
    for (std::size_t ti = 0; ti < probe.tensors().size(); ++ti) {
        auto& t = probe.tensors()[ti];
        if (!only.empty() && std::find(only.begin(), only.end(), t.name) == only.end()) continue;
        for (std::size_t i = 0; i < t.values.size(); ++i) {
            const double keep = t.values[i];
            t.values[i] = keep + epsilon;
            const double up = loss_and_gradient(ptrs, probe, cfg, ablation, nullptr);
            t.values[i] = keep - epsilon;
            const double down = loss_and_gradient(ptrs, probe, cfg, ablation, nullptr);
            t.values[i] = keep;
            const double numeric = (up - down) / (2 * epsilon);
            const double analytic = grad.tensors()[ti].values[i];
            const double rel =
                std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
            ++report.checked;
            if (rel > report.worst) {
                report.worst = rel;
                report.worst_tensor = t.name;
                report.worst_index = i;
            }
        }
    }
    return report;
}

Sample random_sample(const ModelConfig& cfg, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto fill = [&](Eigen::Index r, Eigen::Index c) {
        Matrix m(r, c);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
        return m;
    };
    Sample s;
    for (int t = 0; t < cfg.window; ++t) s.inputs.push_back(fill(cfg.nodes, cfg.features));
    for (int c = 0; c < cfg.zpi_channels; ++c) s.zpi.push_back(fill(cfg.zpi_resolution, cfg.zpi_resolution));
    for (int t = 0; t < cfg.horizon; ++t) s.targets.push_back(fill(cfg.nodes, cfg.out_features));
    return s;
}

}  // namespace zgcnet
