#pragma once

// Straight-line reimplementation of the KAN forward math used as a test
// oracle. Deliberately written with naive loops and explicit formulas,
// sharing no evaluation code with the library under test.

#include <cmath>
#include <vector>

#include "kanode/kan.hpp"

namespace oracle {

inline double naive_psi(double r, double h) { return std::exp(-(r * r) / (2.0 * h * h)); }

inline double naive_swish(double x) { return x / (1.0 + std::exp(-x)); }

// phi_{a,b} for one edge of one layer. The RBF sum takes the (possibly
// normalized) grid argument xt; the swish residual takes the raw value x.
inline double naive_edge(const kanode::KanLayer& l, int a, int b, double x, double xt) {
    double sum = 0.0;
    for (int i = 0; i < l.grid_size; ++i) {
        double r = xt - l.centers[i];
        sum += l.w_rbf[(size_t(a) * l.in_dim + b) * l.grid_size + i] * naive_psi(r, l.h);
    }
    sum += l.w_base[size_t(a) * l.in_dim + b] * naive_swish(x);
    return sum;
}

inline std::vector<double> naive_layer(const kanode::KanLayer& l, const std::vector<double>& x,
                                       bool normalize) {
    std::vector<double> y(l.out_dim, 0.0);
    for (int a = 0; a < l.out_dim; ++a)
        for (int b = 0; b < l.in_dim; ++b) {
            double xt = normalize ? std::tanh(x[b]) : x[b];
            y[a] += naive_edge(l, a, b, x[b], xt);
        }
    return y;
}

inline std::vector<double> naive_net(const kanode::Network& net, std::vector<double> x) {
    if (net.kind == kanode::NetworkKind::Kan) {
        bool normalize = net.norm == kanode::InputNorm::Tanh;
        for (const auto& l : net.kan_layers) x = naive_layer(l, x, normalize);
        return x;
    }
    for (size_t k = 0; k < net.mlp_layers.size(); ++k) {
        const auto& l = net.mlp_layers[k];
        if (k > 0)
            for (auto& v : x) v = std::tanh(v);
        std::vector<double> y(l.out_dim, 0.0);
        for (int a = 0; a < l.out_dim; ++a) {
            y[a] = l.b[a];
            for (int b = 0; b < l.in_dim; ++b) y[a] += l.w[size_t(a) * l.in_dim + b] * x[b];
        }
        x = y;
    }
    return x;
}

}  // namespace oracle
