#pragma once

#include <chrono>
#include <cmath>
#include <memory>
#include <optional>

#include "kanode/kan.hpp"
#include "kanode/odeint.hpp"

namespace kanode {

enum class GradMode { Adjoint, Discrete };

struct TrainConfig {
    double lr = 0.01;
    long epochs = 1;
    double gamma_sp = 0.0;  // L1 weight
    uint64_t seed = 0;
    double rtol = 1e-6;
    double atol = 1e-6;
    std::optional<double> early_stop_loss;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    GradMode grad_mode = GradMode::Adjoint;
    double discrete_dt = 0.01;  // target substep for discretize-then-optimize
    long test_every = 100;
};

struct LossReport {
    long epoch = 0;
    double train_mse = 0.0;
    double test_mse = std::numeric_limits<double>::quiet_NaN();  // NaN when not measured
    double l1 = 0.0;
    double total = 0.0;
    double lr = 0.0;
    double wall_ms = 0.0;
};

/// Mean squared error per time step: (1/N) sum_i ||pred_i - obs_i||^2.
inline double mse_loss(const Trajectory& pred, const Trajectory& obs) {
    require(pred.times == obs.times, "mse_loss: time grids differ");
    require(!obs.times.empty(), "mse_loss: empty trajectories");
    double acc = 0.0;
    for (size_t i = 0; i < obs.times.size(); ++i) {
        require(pred.states[i].size() == obs.states[i].size(), "mse_loss: state dims differ");
        for (size_t j = 0; j < obs.states[i].size(); ++j) {
            const double e = pred.states[i][j] - obs.states[i][j];
            acc += e * e;
        }
    }
    return acc / double(obs.times.size());
}

inline double l1_penalty(std::span<const double> theta) {
    double s = 0.0;
    for (double w : theta) s += std::abs(w);
    return s;
}

/// Subgradient of the L1 norm, taking 0 at 0 so resting weights stay at rest.
inline std::vector<double> l1_subgradient(std::span<const double> theta) {
    std::vector<double> g(theta.size());
    for (size_t i = 0; i < theta.size(); ++i)
        g[i] = theta[i] > 0.0 ? 1.0 : (theta[i] < 0.0 ? -1.0 : 0.0);
    return g;
}

struct AdamState {
    std::vector<double> m, v;
    long t = 0;
    explicit AdamState(size_t n) : m(n, 0.0), v(n, 0.0) {}
};

inline std::vector<double> adam_step(std::span<const double> theta, std::span<const double> grad,
                                     AdamState& state, double lr, double beta1 = 0.9,
                                     double beta2 = 0.999, double eps = 1e-8) {
    require(theta.size() == grad.size() && theta.size() == state.m.size(),
            "adam_step: shape mismatch");
    ++state.t;
    const double bc1 = 1.0 - std::pow(beta1, double(state.t));
    const double bc2 = 1.0 - std::pow(beta2, double(state.t));
    std::vector<double> out(theta.size());
    for (size_t i = 0; i < theta.size(); ++i) {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        out[i] = theta[i] - lr * mhat / (std::sqrt(vhat) + eps);
    }
    return out;
}

/// Copies a flat parameter vector into an existing network without
/// reallocating, for per-call syncing inside ODE right-hand sides.
inline void sync_params(Network& net, std::span<const double> theta) {
    require(int(theta.size()) == net.param_count(), "sync_params: size mismatch");
    size_t pos = 0;
    if (net.kind == NetworkKind::Kan) {
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
}

/// du/dt = net(u): the network is the whole right-hand side.
inline OdeSystem make_network_system(const Network& proto) {
    require(proto.input_dim() == proto.output_dim(),
            "make_network_system: network must map state dim to itself");
    struct State {
        Network net;
        NetWorkspace ws;
        std::vector<double> xbar;
        explicit State(const Network& n) : net(n), ws(n), xbar(size_t(n.input_dim()), 0.0) {}
    };
    auto st = std::make_shared<State>(proto);
    OdeSystem sys;
    sys.dim = proto.input_dim();
    sys.n_params = proto.param_count();
    sys.rhs = [st](double, std::span<const double> u, std::span<const double> theta,
                   std::span<double> du) {
        sync_params(st->net, theta);
        net_forward_ws(st->net, u, st->ws);
        const auto& y = st->ws.values.back();
        std::copy(y.begin(), y.end(), du.begin());
    };
    sys.rhs_vjp = [st](double, std::span<const double> u, std::span<const double> theta,
                       std::span<const double> v, std::span<double> u_bar,
                       std::span<double> theta_bar) {
        sync_params(st->net, theta);
        net_forward_ws(st->net, u, st->ws);
        std::fill(theta_bar.begin(), theta_bar.end(), 0.0);
        net_vjp_ws(st->net, st->ws, v, u_bar, theta_bar);
    };
    return sys;
}

struct GradResult {
    double loss = 0.0;           // Eq. 9 MSE only
    std::vector<double> grad;    // d(MSE)/dtheta + gamma_sp * sign(theta)
    Trajectory pred;
};

/// Continuous adjoint gradient: forward dense solve, then piecewise backward
/// integration of the augmented system [a; g] with cotangent jumps
/// a += (2/N)(pred - obs) at each observation time.
inline GradResult adjoint_grad(const OdeSystem& sys, std::span<const double> u0,
                               const Trajectory& data, std::span<const double> theta,
                               const TrainConfig& cfg) {
    const size_t N = data.times.size();
    require(N >= 1, "adjoint_grad: empty data");
    for (size_t i = 1; i < N; ++i)
        require(data.times[i] > data.times[i - 1], "adjoint_grad: data times must increase");
    const int n = sys.dim;
    const int P = sys.n_params;
    require(int(theta.size()) == P, "adjoint_grad: theta size != sys.n_params");

    GradResult res;
    res.grad.assign(size_t(P), 0.0);

    if (N == 1) {
        // No integration span: loss is a constant w.r.t. theta.
        res.pred.times = data.times;
        res.pred.states.push_back(std::vector<double>(u0.begin(), u0.end()));
        res.loss = mse_loss(res.pred, data);
        if (cfg.gamma_sp > 0.0) axpy(cfg.gamma_sp, l1_subgradient(theta), res.grad);
        return res;
    }

    const double t0 = data.times.front(), t1 = data.times.back();
    DenseResult fwd = tsit5_dense(sys, u0, t0, t1, theta, cfg.rtol, cfg.atol);
    res.pred = detail::sample_saveat(fwd.sol, data.times, fwd.stats, fwd.t_reached, 1.0);
    if (!fwd.ok)
        throw SolveDiverged("adjoint_grad: forward solve failed: " + fwd.note,
                            std::move(res.pred), fwd.t_reached);
    res.loss = mse_loss(res.pred, data);

    // Backward augmented system: da/dt = -(df/du)^T a, dg/dt = -(df/dtheta)^T a,
    // with u(t) read from the forward interpolant.
    struct BwdState {
        std::vector<double> u, ubar, tbar;
        BwdState(int n_, int P_) : u(n_), ubar(n_), tbar(P_) {}
    };
    auto bst = std::make_shared<BwdState>(n, P);
    const DenseSolution* fsol = &fwd.sol;
    OdeSystem aug;
    aug.dim = n + P;
    aug.n_params = 0;
    aug.rhs = [bst, fsol, &sys, theta](double t, std::span<const double> y,
                                       std::span<const double>, std::span<double> dy) {
        fsol->eval_into(t, bst->u);
        sys.rhs_vjp(t, bst->u, theta, y.first(bst->ubar.size()), bst->ubar, bst->tbar);
        for (size_t i = 0; i < bst->ubar.size(); ++i) dy[i] = -bst->ubar[i];
        for (size_t i = 0; i < bst->tbar.size(); ++i) dy[bst->ubar.size() + i] = -bst->tbar[i];
    };

    std::vector<double> y(size_t(n + P), 0.0);  // [a; g], zero at t1
    const double two_over_N = 2.0 / double(N);
    for (size_t i = N - 1; i >= 1; --i) {
        for (int j = 0; j < n; ++j)
            y[j] += two_over_N * (res.pred.states[i][j] - data.states[i][j]);
        DenseResult bwd =
            tsit5_dense(aug, y, data.times[i], data.times[i - 1], {}, cfg.rtol, cfg.atol);
        if (!bwd.ok)
            throw SolveDiverged("adjoint_grad: backward solve failed: " + bwd.note, Trajectory{},
                                bwd.t_reached);
        y = bwd.sol.y_nodes.back();
        res.pred.stats.rhs_evals += bwd.stats.rhs_evals;
    }
    for (int i = 0; i < P; ++i) res.grad[i] = y[size_t(n) + i];
    if (cfg.gamma_sp > 0.0) axpy(cfg.gamma_sp, l1_subgradient(theta), res.grad);
    return res;
}

/// Discretize-then-optimize gradient: fixed-grid RK4 through every data time,
/// then exact reverse-mode through the recorded steps. Oracle for the adjoint.
inline GradResult discrete_grad(const OdeSystem& sys, std::span<const double> u0,
                                const Trajectory& data, std::span<const double> theta,
                                const TrainConfig& cfg) {
    const size_t N = data.times.size();
    require(N >= 1, "discrete_grad: empty data");
    for (size_t i = 1; i < N; ++i)
        require(data.times[i] > data.times[i - 1], "discrete_grad: data times must increase");
    const int n = sys.dim;
    const int P = sys.n_params;

    GradResult res;
    res.grad.assign(size_t(P), 0.0);
    res.pred.times = data.times;

    // Fine grid: each observation gap is split into equal substeps no longer
    // than cfg.discrete_dt, so every data time is a grid node.
    std::vector<double> ts{data.times.front()};
    std::vector<size_t> data_idx{0};
    for (size_t i = 1; i < N; ++i) {
        const double gap = data.times[i] - data.times[i - 1];
        const long m = std::max(1l, long(std::ceil(gap / cfg.discrete_dt - 1e-9)));
        for (long s = 1; s <= m; ++s)
            ts.push_back(s == m ? data.times[i] : data.times[i - 1] + gap * double(s) / double(m));
        data_idx.push_back(ts.size() - 1);
    }

    // Forward sweep, storing the state at every fine-grid node.
    std::vector<std::vector<double>> us(ts.size());
    us[0].assign(u0.begin(), u0.end());
    std::vector<double> k1(n), k2(n), k3(n), k4(n), xtmp(n);
    for (size_t s = 0; s + 1 < ts.size(); ++s) {
        const double t = ts[s], h = ts[s + 1] - ts[s];
        const auto& u = us[s];
        sys.rhs(t, u, theta, k1);
        for (int i = 0; i < n; ++i) xtmp[i] = u[i] + 0.5 * h * k1[i];
        sys.rhs(t + 0.5 * h, xtmp, theta, k2);
        for (int i = 0; i < n; ++i) xtmp[i] = u[i] + 0.5 * h * k2[i];
        sys.rhs(t + 0.5 * h, xtmp, theta, k3);
        for (int i = 0; i < n; ++i) xtmp[i] = u[i] + h * k3[i];
        sys.rhs(t + h, xtmp, theta, k4);
        us[s + 1].resize(n);
        for (int i = 0; i < n; ++i)
            us[s + 1][i] = u[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (!all_finite(us[s + 1]))
            throw SolveDiverged("discrete_grad: non-finite state in forward sweep",
                                std::move(res.pred), ts[s + 1]);
    }
    for (size_t i = 0; i < N; ++i) res.pred.states.push_back(us[data_idx[i]]);
    res.pred.stats.rhs_evals = long(4 * (ts.size() - 1));
    res.loss = mse_loss(res.pred, data);

    // Reverse sweep with stage recomputation.
    std::vector<double> lam(n, 0.0);
    std::vector<double> kb1(n), kb2(n), kb3(n), kb4(n), xb(n), gtmp(P), x2(n), x3(n), x4(n);
    const double two_over_N = 2.0 / double(N);
    size_t next_data = N - 1;
    for (size_t s = ts.size(); s-- > 1;) {
        if (data_idx[next_data] == s) {
            for (int i = 0; i < n; ++i)
                lam[i] += two_over_N * (us[s][i] - data.states[next_data][i]);
            --next_data;
        }
        const double t = ts[s - 1], h = ts[s] - ts[s - 1];
        const auto& u = us[s - 1];
        // Recompute stage inputs.
        sys.rhs(t, u, theta, k1);
        for (int i = 0; i < n; ++i) x2[i] = u[i] + 0.5 * h * k1[i];
        sys.rhs(t + 0.5 * h, x2, theta, k2);
        for (int i = 0; i < n; ++i) x3[i] = u[i] + 0.5 * h * k2[i];
        sys.rhs(t + 0.5 * h, x3, theta, k3);
        for (int i = 0; i < n; ++i) x4[i] = u[i] + h * k3[i];
        // Stage cotangents: kb_j = dL/dk_j, chained in reverse stage order.
        std::vector<double> unew_bar = lam;
        for (int i = 0; i < n; ++i) kb4[i] = (h / 6.0) * unew_bar[i];
        sys.rhs_vjp(t + h, x4, theta, kb4, xb, gtmp);
        axpy(1.0, gtmp, res.grad);
        std::vector<double> un_bar = unew_bar;  // direct u_n term
        for (int i = 0; i < n; ++i) {
            un_bar[i] += xb[i];
            kb3[i] = (h / 3.0) * unew_bar[i] + h * xb[i];
        }
        sys.rhs_vjp(t + 0.5 * h, x3, theta, kb3, xb, gtmp);
        axpy(1.0, gtmp, res.grad);
        for (int i = 0; i < n; ++i) {
            un_bar[i] += xb[i];
            kb2[i] = (h / 3.0) * unew_bar[i] + 0.5 * h * xb[i];
        }
        sys.rhs_vjp(t + 0.5 * h, x2, theta, kb2, xb, gtmp);
        axpy(1.0, gtmp, res.grad);
        for (int i = 0; i < n; ++i) {
            un_bar[i] += xb[i];
            kb1[i] = (h / 6.0) * unew_bar[i] + 0.5 * h * xb[i];
        }
        sys.rhs_vjp(t, u, theta, kb1, xb, gtmp);
        axpy(1.0, gtmp, res.grad);
        for (int i = 0; i < n; ++i) un_bar[i] += xb[i];
        lam = un_bar;
    }
    if (cfg.gamma_sp > 0.0) axpy(cfg.gamma_sp, l1_subgradient(theta), res.grad);
    return res;
}

struct TrainResult {
    Network net;        // parameters after the last epoch
    Network best;       // parameters with the lowest recorded train MSE
    double best_mse = std::numeric_limits<double>::infinity();
    std::vector<LossReport> history;
    long divergences = 0;
    bool early_stopped = false;
};

/// Full-batch ADAM training loop. Deterministic given the config. On a solver
/// divergence the last update is rolled back and reapplied at half the
/// learning rate for that epoch only.
inline TrainResult train(const Network& net0, const OdeSystem& sys, std::span<const double> u0,
                         const Trajectory& data, const Trajectory* test_data,
                         const TrainConfig& cfg) {
    require(cfg.lr >= 0.0, "train: lr must be nonnegative");
    require(cfg.epochs >= 1, "train: epochs must be >= 1");
    using clock = std::chrono::steady_clock;

    TrainResult out;
    out.net = net0;
    out.best = net0;
    std::vector<double> theta = net0.flatten();
    AdamState adam(theta.size());
    std::vector<double> theta_prev = theta;
    AdamState adam_prev = adam;
    std::vector<double> grad_prev;
    long consec_div = 0;

    auto grad_fn = [&](std::span<const double> th) {
        return cfg.grad_mode == GradMode::Adjoint ? adjoint_grad(sys, u0, data, th, cfg)
                                                  : discrete_grad(sys, u0, data, th, cfg);
    };
    auto test_mse_at = [&](std::span<const double> th) {
        Trajectory pred = tsit5_solve(sys, u0, data.times.front(), test_data->times.back(), th,
                                      test_data->times, cfg.rtol, cfg.atol);
        return mse_loss(pred, *test_data);
    };

    for (long epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto tic = clock::now();
        LossReport rep;
        rep.epoch = epoch;
        rep.lr = cfg.lr;
        rep.l1 = l1_penalty(theta);
        bool ok = true;
        GradResult g;
        try {
            g = grad_fn(theta);
        } catch (const SolveDiverged&) {
            ok = false;
        }
        if (!ok) {
            ++out.divergences;
            ++consec_div;
            rep.train_mse = std::numeric_limits<double>::quiet_NaN();
            rep.total = std::numeric_limits<double>::quiet_NaN();
            if (!grad_prev.empty()) {
                // Undo the offending update and retry it at half the rate;
                // repeated failures keep halving so the retry always changes.
                theta = theta_prev;
                adam = adam_prev;
                rep.lr = cfg.lr * std::pow(0.5, double(consec_div));
                rep.l1 = l1_penalty(theta);
                theta_prev = theta;
                adam_prev = adam;
                theta = adam_step(theta, grad_prev, adam, rep.lr, cfg.adam_beta1, cfg.adam_beta2,
                                  cfg.adam_eps);
            }
            rep.wall_ms =
                std::chrono::duration<double, std::milli>(clock::now() - tic).count();
            out.history.push_back(rep);
            continue;
        }

        consec_div = 0;
        rep.train_mse = g.loss;
        rep.total = g.loss + cfg.gamma_sp * rep.l1;
        if (test_data && (epoch % cfg.test_every == 0 || epoch + 1 == cfg.epochs)) {
            try {
                rep.test_mse = test_mse_at(theta);
            } catch (const SolveDiverged&) {
                rep.test_mse = std::numeric_limits<double>::quiet_NaN();
            }
        }
        if (g.loss < out.best_mse) {
            out.best_mse = g.loss;
            out.best = net0.with_params(theta);
        }
        if (cfg.early_stop_loss && g.loss <= *cfg.early_stop_loss) {
            out.early_stopped = true;
            rep.wall_ms =
                std::chrono::duration<double, std::milli>(clock::now() - tic).count();
            out.history.push_back(rep);
            break;
        }
        theta_prev = theta;
        adam_prev = adam;
        grad_prev = g.grad;
        theta = adam_step(theta, g.grad, adam, cfg.lr, cfg.adam_beta1, cfg.adam_beta2,
                          cfg.adam_eps);
        rep.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - tic).count();
        out.history.push_back(rep);
    }
    out.net = net0.with_params(theta);
    return out;
}

}  // namespace kanode
