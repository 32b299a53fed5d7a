#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "kanode/math.hpp"

namespace kanode {

enum class NetworkKind { Kan, Mlp };
enum class InputNorm { Tanh, None };

/// One Kolmogorov-Arnold layer. Each input-output edge carries a learnable
/// univariate activation: a weighted sum of Gaussian RBFs on a fixed grid of
/// centers spanning [-1, 1], plus a Swish residual with its own weight. With
/// tanh normalization the RBF grid sees tanh(x) while the Swish residual keeps
/// the raw input, so the residual path still carries unbounded signal.
struct KanLayer {
    int in_dim = 0;
    int out_dim = 0;
    int grid_size = 0;
    std::vector<double> w_rbf;    // [out][in][grid], row-major
    std::vector<double> w_base;   // [out][in]
    std::vector<double> centers;  // [grid], uniform on [-1, 1]
    double h = 0.0;               // RBF spread = center spacing

    KanLayer() = default;

    KanLayer(int in, int out, int grid) : in_dim(in), out_dim(out), grid_size(grid) {
        require(in >= 1 && out >= 1 && grid >= 1, "KanLayer: dims must be positive");
        w_rbf.assign(size_t(out) * in * grid, 0.0);
        w_base.assign(size_t(out) * in, 0.0);
        if (grid == 1) {
            // Degenerate grid: single center at 0 with spread covering [-1, 1].
            centers = {0.0};
            h = 2.0;
        } else {
            centers = linspace(-1.0, 1.0, grid);
            h = centers[1] - centers[0];
        }
    }

    double& wr(int a, int b, int i) { return w_rbf[(size_t(a) * in_dim + b) * grid_size + i]; }
    double wr(int a, int b, int i) const { return w_rbf[(size_t(a) * in_dim + b) * grid_size + i]; }
    double& wb(int a, int b) { return w_base[size_t(a) * in_dim + b]; }
    double wb(int a, int b) const { return w_base[size_t(a) * in_dim + b]; }

    int param_count() const { return out_dim * in_dim * grid_size + out_dim * in_dim; }
};

/// Dense layer for the MLP baseline: y = W x + b, tanh applied between layers.
struct MlpLayer {
    int in_dim = 0;
    int out_dim = 0;
    std::vector<double> w;  // [out][in]
    std::vector<double> b;  // [out]

    MlpLayer() = default;
    MlpLayer(int in, int out) : in_dim(in), out_dim(out) {
        require(in >= 1 && out >= 1, "MlpLayer: dims must be positive");
        w.assign(size_t(out) * in, 0.0);
        b.assign(size_t(out), 0.0);
    }

    int param_count() const { return out_dim * in_dim + out_dim; }
};

/// Architecture description used for construction and checkpointing.
/// KAN layers are given as [in, out, grid] triples, MLP as a width list.
struct NetSpec {
    NetworkKind kind = NetworkKind::Kan;
    InputNorm norm = InputNorm::Tanh;
    std::vector<std::array<int, 3>> kan_layers;  // {in, out, grid}
    std::vector<int> mlp_widths;                 // e.g. {2, 50, 2}

    static NetSpec kan(std::vector<std::array<int, 3>> layers, InputNorm n = InputNorm::Tanh) {
        NetSpec s;
        s.kind = NetworkKind::Kan;
        s.norm = n;
        s.kan_layers = std::move(layers);
        return s;
    }
    static NetSpec mlp(std::vector<int> widths) {
        NetSpec s;
        s.kind = NetworkKind::Mlp;
        s.norm = InputNorm::None;
        s.mlp_widths = std::move(widths);
        return s;
    }
};

/// A network is an immutable value: forward and VJP never mutate it, and
/// parameter updates produce a fresh network via with_params().
struct Network {
    NetworkKind kind = NetworkKind::Kan;
    InputNorm norm = InputNorm::Tanh;
    std::vector<KanLayer> kan_layers;
    std::vector<MlpLayer> mlp_layers;

    static Network from_spec(const NetSpec& spec) {
        Network net;
        net.kind = spec.kind;
        net.norm = spec.norm;
        if (spec.kind == NetworkKind::Kan) {
            require(!spec.kan_layers.empty(), "NetSpec: no KAN layers");
            for (auto& l : spec.kan_layers) net.kan_layers.emplace_back(l[0], l[1], l[2]);
            for (size_t k = 0; k + 1 < net.kan_layers.size(); ++k)
                require(net.kan_layers[k].out_dim == net.kan_layers[k + 1].in_dim,
                        "NetSpec: layer dims do not chain");
        } else {
            require(spec.mlp_widths.size() >= 2, "NetSpec: MLP needs >= 2 widths");
            for (size_t k = 0; k + 1 < spec.mlp_widths.size(); ++k)
                net.mlp_layers.emplace_back(spec.mlp_widths[k], spec.mlp_widths[k + 1]);
        }
        return net;
    }

    NetSpec spec() const {
        NetSpec s;
        s.kind = kind;
        s.norm = norm;
        if (kind == NetworkKind::Kan) {
            for (auto& l : kan_layers) s.kan_layers.push_back({l.in_dim, l.out_dim, l.grid_size});
        } else {
            s.mlp_widths.push_back(mlp_layers.front().in_dim);
            for (auto& l : mlp_layers) s.mlp_widths.push_back(l.out_dim);
        }
        return s;
    }

    size_t n_layers() const {
        return kind == NetworkKind::Kan ? kan_layers.size() : mlp_layers.size();
    }

    int input_dim() const {
        return kind == NetworkKind::Kan ? kan_layers.front().in_dim : mlp_layers.front().in_dim;
    }

    int output_dim() const {
        return kind == NetworkKind::Kan ? kan_layers.back().out_dim : mlp_layers.back().out_dim;
    }

    /// Width of each node level, input level first. Levels 1..L-1 are hidden.
    std::vector<int> level_dims() const {
        std::vector<int> d;
        d.push_back(input_dim());
        if (kind == NetworkKind::Kan)
            for (auto& l : kan_layers) d.push_back(l.out_dim);
        else
            for (auto& l : mlp_layers) d.push_back(l.out_dim);
        return d;
    }

    int param_count() const {
        int n = 0;
        if (kind == NetworkKind::Kan)
            for (auto& l : kan_layers) n += l.param_count();
        else
            for (auto& l : mlp_layers) n += l.param_count();
        return n;
    }

    /// Flat parameter order, fixed for checkpoint portability: layer-major;
    /// within a KAN layer w_rbf (out, in, grid row-major) then w_base (out, in);
    /// within an MLP layer W (out, in row-major) then b.
    std::vector<double> flatten() const {
        std::vector<double> theta;
        theta.reserve(param_count());
        if (kind == NetworkKind::Kan) {
            for (auto& l : kan_layers) {
                theta.insert(theta.end(), l.w_rbf.begin(), l.w_rbf.end());
                theta.insert(theta.end(), l.w_base.begin(), l.w_base.end());
            }
        } else {
            for (auto& l : mlp_layers) {
                theta.insert(theta.end(), l.w.begin(), l.w.end());
                theta.insert(theta.end(), l.b.begin(), l.b.end());
            }
        }
        return theta;
    }

    Network with_params(std::span<const double> theta) const {
        require(int(theta.size()) == param_count(), "with_params: flat vector size mismatch");
        Network net = *this;
        size_t pos = 0;
        if (kind == NetworkKind::Kan) {
            for (auto& l : net.kan_layers) {
                std::copy_n(theta.begin() + pos, l.w_rbf.size(), l.w_rbf.begin());
                pos += l.w_rbf.size();
                std::copy_n(theta.begin() + pos, l.w_base.size(), l.w_base.begin());
                pos += l.w_base.size();
            }
        } else {
            for (auto& l : net.mlp_layers) {
                std::copy_n(theta.begin() + pos, l.w.size(), l.w.begin());
                pos += l.w.size();
                std::copy_n(theta.begin() + pos, l.b.size(), l.b.begin());
                pos += l.b.size();
            }
        }
        return net;
    }
};

/// Scratch buffers for forward/VJP so the ODE inner loops stay allocation
/// free. One workspace serves one network shape; not shareable across threads.
struct NetWorkspace {
    // values[k] is the state entering layer k; values[L] the network output.
    std::vector<std::vector<double>> values;
    std::vector<std::vector<double>> xt;     // normalized layer inputs
    std::vector<std::vector<double>> basis;  // per layer: [in][grid] RBF values
    std::vector<std::vector<double>> sw;     // per layer: swish(xt)
    std::vector<std::vector<double>> bar;    // cotangents per level

    explicit NetWorkspace(const Network& net) { resize(net); }
    NetWorkspace() = default;

    void resize(const Network& net) {
        auto dims = net.level_dims();
        size_t L = net.n_layers();
        values.resize(L + 1);
        bar.resize(L + 1);
        for (size_t k = 0; k <= L; ++k) {
            values[k].assign(size_t(dims[k]), 0.0);
            bar[k].assign(size_t(dims[k]), 0.0);
        }
        xt.resize(L);
        basis.resize(L);
        sw.resize(L);
        for (size_t k = 0; k < L; ++k) {
            xt[k].assign(size_t(dims[k]), 0.0);
            sw[k].assign(size_t(dims[k]), 0.0);
            int grid = net.kind == NetworkKind::Kan ? net.kan_layers[k].grid_size : 0;
            basis[k].assign(size_t(dims[k]) * std::max(grid, 1), 0.0);
        }
    }
};

namespace detail {

inline void kan_layer_forward(const KanLayer& l, bool normalize, std::span<const double> x,
                              std::span<double> xt, std::span<double> basis,
                              std::span<double> sw, std::span<double> y) {
    const int G = l.grid_size;
    for (int b = 0; b < l.in_dim; ++b) {
        const double v = normalize ? std::tanh(x[b]) : x[b];
        xt[b] = v;
        sw[b] = swish(x[b]);  // residual path: raw input, never normalized
        double* psi = &basis[size_t(b) * G];
        for (int i = 0; i < G; ++i) psi[i] = rbf(v - l.centers[i], l.h);
    }
    for (int a = 0; a < l.out_dim; ++a) {
        double acc = 0.0;
        const double* wr = &l.w_rbf[size_t(a) * l.in_dim * G];
        const double* wb = &l.w_base[size_t(a) * l.in_dim];
        for (int b = 0; b < l.in_dim; ++b) {
            const double* psi = &basis[size_t(b) * G];
            double edge = 0.0;
            for (int i = 0; i < G; ++i) edge += wr[size_t(b) * G + i] * psi[i];
            acc += edge + wb[b] * sw[b];
        }
        y[a] = acc;
    }
}

inline void mlp_layer_forward(const MlpLayer& l, std::span<const double> x, std::span<double> y) {
    for (int a = 0; a < l.out_dim; ++a) {
        const double* w = &l.w[size_t(a) * l.in_dim];
        double acc = l.b[a];
        for (int b = 0; b < l.in_dim; ++b) acc += w[b] * x[b];
        y[a] = acc;
    }
}

}  // namespace detail

/// Single-layer forward pass. Returns y of length out_dim.
inline std::vector<double> layer_forward(const KanLayer& l, std::span<const double> x,
                                         bool normalize) {
    require(int(x.size()) == l.in_dim, "layer_forward: input length != in_dim");
    std::vector<double> xt(l.in_dim), basis(size_t(l.in_dim) * l.grid_size), sw(l.in_dim),
        y(l.out_dim);
    detail::kan_layer_forward(l, normalize, x, xt, basis, sw, y);
    return y;
}

/// Forward pass writing the output into ws.values.back(); all intermediate
/// values stay in ws for a subsequent VJP.
inline void net_forward_ws(const Network& net, std::span<const double> x, NetWorkspace& ws) {
    require(int(x.size()) == net.input_dim(), "net_forward: input length mismatch");
    std::copy(x.begin(), x.end(), ws.values[0].begin());
    const size_t L = net.n_layers();
    if (net.kind == NetworkKind::Kan) {
        const bool normalize = net.norm == InputNorm::Tanh;
        for (size_t k = 0; k < L; ++k)
            detail::kan_layer_forward(net.kan_layers[k], normalize, ws.values[k], ws.xt[k],
                                      ws.basis[k], ws.sw[k], ws.values[k + 1]);
    } else {
        // Hidden activations are tanh; the final layer is affine.
        for (size_t k = 0; k < L; ++k) {
            auto& in = ws.values[k];
            auto& xt = ws.xt[k];
            if (k == 0) {
                std::copy(in.begin(), in.end(), xt.begin());
            } else {
                for (size_t j = 0; j < in.size(); ++j) xt[j] = std::tanh(in[j]);
            }
            detail::mlp_layer_forward(net.mlp_layers[k], xt, ws.values[k + 1]);
        }
    }
}

inline std::vector<double> net_forward(const Network& net, std::span<const double> x) {
    NetWorkspace ws(net);
    net_forward_ws(net, x, ws);
    return ws.values.back();
}

/// Reverse-mode pass. Must be called right after net_forward_ws on the same
/// workspace. Writes (dy/dx)^T y_bar into x_bar and accumulates
/// (dy/dtheta)^T y_bar into theta_acc (+=), in flat parameter order.
inline void net_vjp_ws(const Network& net, NetWorkspace& ws, std::span<const double> y_bar,
                       std::span<double> x_bar, std::span<double> theta_acc) {
    const size_t L = net.n_layers();
    require(int(y_bar.size()) == net.output_dim(), "net_vjp: y_bar length mismatch");
    require(int(theta_acc.size()) == net.param_count(), "net_vjp: theta size mismatch");
    std::copy(y_bar.begin(), y_bar.end(), ws.bar[L].begin());

    if (net.kind == NetworkKind::Kan) {
        const bool normalize = net.norm == InputNorm::Tanh;
        // Flat offsets of each layer's block.
        std::vector<size_t> offset(L);
        size_t pos = 0;
        for (size_t k = 0; k < L; ++k) {
            offset[k] = pos;
            pos += size_t(net.kan_layers[k].param_count());
        }
        for (size_t k = L; k-- > 0;) {
            const KanLayer& l = net.kan_layers[k];
            const int G = l.grid_size;
            const auto& xin = ws.values[k];
            const auto& xt = ws.xt[k];
            const auto& basis = ws.basis[k];
            const auto& sw = ws.sw[k];
            const auto& yb = ws.bar[k + 1];
            auto& xb = ws.bar[k];
            std::fill(xb.begin(), xb.end(), 0.0);
            double* wr_acc = &theta_acc[offset[k]];
            double* wb_acc = wr_acc + size_t(l.out_dim) * l.in_dim * G;
            for (int a = 0; a < l.out_dim; ++a) {
                const double g = yb[a];
                if (g == 0.0) continue;
                const double* wr = &l.w_rbf[size_t(a) * l.in_dim * G];
                const double* wb = &l.w_base[size_t(a) * l.in_dim];
                for (int b = 0; b < l.in_dim; ++b) {
                    const double* psi = &basis[size_t(b) * G];
                    // tanh chain applies only to the RBF path; swish sees raw x.
                    const double tf = normalize ? tanh_deriv_from_value(xt[b]) : 1.0;
                    double drbf = 0.0;
                    double* wr_a = &wr_acc[(size_t(a) * l.in_dim + b) * G];
                    for (int i = 0; i < G; ++i) {
                        wr_a[i] += g * psi[i];
                        // dpsi/dxt = -((xt - c)/h^2) psi
                        drbf -= wr[size_t(b) * G + i] * ((xt[b] - l.centers[i]) / (l.h * l.h)) *
                                psi[i];
                    }
                    wb_acc[size_t(a) * l.in_dim + b] += g * sw[b];
                    xb[b] += g * (drbf * tf + wb[b] * swish_deriv(xin[b]));
                }
            }
        }
    } else {
        std::vector<size_t> offset(L);
        size_t pos = 0;
        for (size_t k = 0; k < L; ++k) {
            offset[k] = pos;
            pos += size_t(net.mlp_layers[k].param_count());
        }
        for (size_t k = L; k-- > 0;) {
            const MlpLayer& l = net.mlp_layers[k];
            const auto& xt = ws.xt[k];
            const auto& yb = ws.bar[k + 1];
            auto& xb = ws.bar[k];
            std::fill(xb.begin(), xb.end(), 0.0);
            double* w_acc = &theta_acc[offset[k]];
            double* b_acc = w_acc + size_t(l.out_dim) * l.in_dim;
            for (int a = 0; a < l.out_dim; ++a) {
                const double g = yb[a];
                b_acc[a] += g;
                const double* w = &l.w[size_t(a) * l.in_dim];
                for (int b = 0; b < l.in_dim; ++b) {
                    w_acc[size_t(a) * l.in_dim + b] += g * xt[b];
                    xb[b] += g * w[b];
                }
            }
            if (k > 0)
                for (int b = 0; b < l.in_dim; ++b) xb[b] *= tanh_deriv_from_value(xt[b]);
        }
    }
    std::copy(ws.bar[0].begin(), ws.bar[0].end(), x_bar.begin());
}

struct VjpResult {
    std::vector<double> x_bar;
    std::vector<double> theta_bar;
};

/// Convenience wrapper: recomputes the forward pass at x, then backpropagates.
inline VjpResult net_vjp(const Network& net, std::span<const double> x,
                         std::span<const double> y_bar) {
    NetWorkspace ws(net);
    net_forward_ws(net, x, ws);
    VjpResult r;
    r.x_bar.assign(size_t(net.input_dim()), 0.0);
    r.theta_bar.assign(size_t(net.param_count()), 0.0);
    net_vjp_ws(net, ws, y_bar, r.x_bar, r.theta_bar);
    return r;
}

inline int param_count(const Network& net) { return net.param_count(); }

/// Seeded initialization. KAN weights are i.i.d. N(0, 0.1^2); MLP weights are
/// Glorot-uniform with zero biases. Draw order equals flat parameter order.
inline Network init_params(const NetSpec& spec, uint64_t seed) {
    Network net = Network::from_spec(spec);
    std::mt19937_64 rng(seed);
    if (spec.kind == NetworkKind::Kan) {
        std::normal_distribution<double> dist(0.0, 0.1);
        for (auto& l : net.kan_layers) {
            for (auto& w : l.w_rbf) w = dist(rng);
            for (auto& w : l.w_base) w = dist(rng);
        }
    } else {
        for (auto& l : net.mlp_layers) {
            const double limit = std::sqrt(6.0 / double(l.in_dim + l.out_dim));
            std::uniform_real_distribution<double> dist(-limit, limit);
            for (auto& w : l.w) w = dist(rng);
            // biases stay zero
        }
    }
    return net;
}

}  // namespace kanode
