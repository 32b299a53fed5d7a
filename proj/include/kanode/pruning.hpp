#pragma once

#include <limits>
#include <vector>

#include "kanode/kan.hpp"

namespace kanode {

/// Single learnable edge activation at raw node value x: RBF expansion on the
/// (optionally tanh-normalized) grid argument plus Swish residual on raw x.
inline double edge_activation(const KanLayer& l, int a, int b, double x, bool normalize) {
    const double xt = normalize ? std::tanh(x) : x;
    double acc = l.wb(a, b) * swish(x);
    for (int i = 0; i < l.grid_size; ++i) acc += l.wr(a, b, i) * rbf(xt - l.centers[i], l.h);
    return acc;
}

/// The curve of one edge activation over raw node values xs. Pass
/// normalize=true to reproduce an edge inside a tanh-normalized network.
inline std::vector<double> activation_curve(const KanLayer& l, int alpha, int beta,
                                            std::span<const double> xs, bool normalize = false) {
    require(alpha >= 0 && alpha < l.out_dim, "activation_curve: alpha out of range");
    require(beta >= 0 && beta < l.in_dim, "activation_curve: beta out of range");
    std::vector<double> ys(xs.size());
    for (size_t j = 0; j < xs.size(); ++j)
        ys[j] = edge_activation(l, alpha, beta, xs[j], normalize);
    return ys;
}

/// Running maxima of |edge activation| seen at each node over a dataset pass.
/// in_max[k][n]: level 0 = |data value|; level k>=1 = largest incoming edge
/// activation magnitude. out_max[k][n]: largest outgoing edge activation
/// magnitude (0 at the output level, which has no outgoing edges).
struct ActivationRecord {
    std::vector<std::vector<double>> in_max;
    std::vector<std::vector<double>> out_max;
};

inline ActivationRecord record_activations(const Network& net,
                                           const std::vector<std::vector<double>>& inputs) {
    require(net.kind == NetworkKind::Kan, "record_activations: KAN networks only");
    require(!inputs.empty(), "record_activations: empty input list");
    const auto dims = net.level_dims();
    const size_t L = net.n_layers();
    ActivationRecord rec;
    rec.in_max.resize(L + 1);
    rec.out_max.resize(L + 1);
    for (size_t k = 0; k <= L; ++k) {
        rec.in_max[k].assign(size_t(dims[k]), 0.0);
        rec.out_max[k].assign(size_t(dims[k]), 0.0);
    }
    const bool normalize = net.norm == InputNorm::Tanh;
    std::vector<double> x, y;
    for (const auto& sample : inputs) {
        require(int(sample.size()) == net.input_dim(), "record_activations: sample length");
        x = sample;
        for (int b = 0; b < dims[0]; ++b)
            rec.in_max[0][b] = std::max(rec.in_max[0][b], std::abs(x[b]));
        for (size_t k = 0; k < L; ++k) {
            const KanLayer& l = net.kan_layers[k];
            y.assign(size_t(l.out_dim), 0.0);
            for (int b = 0; b < l.in_dim; ++b) {
                for (int a = 0; a < l.out_dim; ++a) {
                    const double phi = edge_activation(l, a, b, x[b], normalize);
                    y[a] += phi;
                    rec.out_max[k][b] = std::max(rec.out_max[k][b], std::abs(phi));
                    rec.in_max[k + 1][a] = std::max(rec.in_max[k + 1][a], std::abs(phi));
                }
            }
            x = y;
        }
    }
    return rec;
}

/// Drops every hidden node whose recorded input and output maxima are both
/// below gamma_pr; surviving weight slices are copied into the smaller net.
/// Input and output levels are never touched.
inline Network prune(const Network& net, const ActivationRecord& rec, double gamma_pr) {
    require(net.kind == NetworkKind::Kan, "prune: KAN networks only");
    const size_t L = net.n_layers();
    require(L >= 2, "prune: network has no hidden layer");
    require(rec.in_max.size() == L + 1, "prune: record does not match network depth");

    std::vector<std::vector<int>> kept(L + 1);
    const auto dims = net.level_dims();
    for (int b = 0; b < dims[0]; ++b) kept[0].push_back(b);
    for (int a = 0; a < dims[L]; ++a) kept[L].push_back(a);
    for (size_t k = 1; k < L; ++k) {
        require(int(rec.in_max[k].size()) == dims[k], "prune: record level width mismatch");
        for (int n = 0; n < dims[k]; ++n)
            if (rec.in_max[k][n] >= gamma_pr || rec.out_max[k][n] >= gamma_pr)
                kept[k].push_back(n);
        if (kept[k].empty())
            throw ContractError("prune: gamma_pr would empty hidden level " + std::to_string(k));
    }

    Network out;
    out.kind = net.kind;
    out.norm = net.norm;
    for (size_t k = 0; k < L; ++k) {
        const KanLayer& src = net.kan_layers[k];
        KanLayer dst(int(kept[k].size()), int(kept[k + 1].size()), src.grid_size);
        for (size_t a = 0; a < kept[k + 1].size(); ++a)
            for (size_t b = 0; b < kept[k].size(); ++b) {
                dst.wb(int(a), int(b)) = src.wb(kept[k + 1][a], kept[k][b]);
                for (int i = 0; i < src.grid_size; ++i)
                    dst.wr(int(a), int(b), i) = src.wr(kept[k + 1][a], kept[k][b], i);
            }
        out.kan_layers.push_back(std::move(dst));
    }
    return out;
}

}  // namespace kanode
