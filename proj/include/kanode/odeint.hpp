#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "kanode/math.hpp"

namespace kanode {

/// Right-hand side f(t, u, theta) -> du/dt plus its transposed Jacobian
/// products, the two ingredients adjoint training needs.
struct OdeSystem {
    int dim = 0;
    int n_params = 0;
    // rhs(t, u, theta, du): writes f(t, u, theta) into du.
    std::function<void(double, std::span<const double>, std::span<const double>,
                       std::span<double>)>
        rhs;
    // rhs_vjp(t, u, theta, v, u_bar, theta_bar): writes (df/du)^T v into u_bar
    // and (df/dtheta)^T v into theta_bar. Both outputs are overwritten.
    std::function<void(double, std::span<const double>, std::span<const double>,
                       std::span<const double>, std::span<double>, std::span<double>)>
        rhs_vjp;
};

struct SolveStats {
    long accepted = 0;
    long rejected = 0;
    long rhs_evals = 0;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;  // [n_times][dim]
    SolveStats stats;
};

/// Raised when the adaptive solver cannot continue (step-size underflow,
/// non-finite state). Carries whatever part of the output was produced.
struct SolveDiverged : std::runtime_error {
    Trajectory partial;
    double t_reached;
    SolveDiverged(std::string msg, Trajectory p, double t)
        : std::runtime_error(std::move(msg)), partial(std::move(p)), t_reached(t) {}
};

namespace tsit5 {

// Tsitouras 5(4) coefficients (FSAL; b row equals a[7][*]).
inline constexpr double c2 = 0.161, c3 = 0.327, c4 = 0.9, c5 = 0.9800255409045097, c6 = 1.0;
inline constexpr double a21 = 0.161;
inline constexpr double a31 = -0.008480655492356989, a32 = 0.335480655492357;
inline constexpr double a41 = 2.8971530571054935, a42 = -6.359448489975075,
                        a43 = 4.3622954328695815;
inline constexpr double a51 = 5.325864828439257, a52 = -11.748883564062828,
                        a53 = 7.4955393428898365, a54 = -0.09249506636175525;
inline constexpr double a61 = 5.86145544294642, a62 = -12.92096931784711,
                        a63 = 8.159367898576159, a64 = -0.071584973281401,
                        a65 = -0.028269050394068383;
inline constexpr double a71 = 0.09646076681806523, a72 = 0.01, a73 = 0.4798896504144996,
                        a74 = 1.379008574103742, a75 = -3.290069515436081,
                        a76 = 2.324710524099774;
// Difference between 5th- and embedded 4th-order weights, for the local error.
inline constexpr double bt1 = -0.00178001105222577714, bt2 = -0.0008164344596567469,
                        bt3 = 0.007880878010261995, bt4 = -0.1447110071732629,
                        bt5 = 0.5823571654525552, bt6 = -0.45808210592918697,
                        bt7 = 0.015151515151515152;

// Free 4th-order interpolant: y(t0 + q*dt) = y0 + dt * sum_i b_i(q) k_i.
inline std::array<double, 7> interp_weights(double q) {
    const double q2 = q * q, q3 = q2 * q, q4 = q3 * q;
    return {
        q - 2.763706197274826 * q2 + 2.9132554618219126 * q3 - 1.0530884977290216 * q4,
        0.13169999999999998 * q2 - 0.2234 * q3 + 0.1017 * q4,
        3.9302962368946516 * q2 - 5.941033872131505 * q3 + 2.490627285651253 * q4,
        -12.411077166933558 * q2 + 30.33818863028232 * q3 - 16.548102889244902 * q4,
        37.50931341651104 * q2 - 88.1789048947664 * q3 + 47.37952196281928 * q4,
        -27.896526289197286 * q2 + 65.09189467479366 * q3 - 34.87065786149661 * q4,
        1.5 * q2 - 4.0 * q3 + 2.5 * q4,
    };
}

}  // namespace tsit5

/// Piecewise collection of accepted Tsit5 steps with their stage slopes;
/// evaluable anywhere inside the covered span via the free interpolant.
struct DenseSolution {
    std::vector<double> t_nodes;               // accepted step boundaries, size n+1
    std::vector<std::vector<double>> y_nodes;  // states at t_nodes
    std::vector<std::array<std::vector<double>, 7>> ks;  // stage slopes per step
    double dir = 1.0;                                    // +1 forward in time, -1 backward

    double t_begin() const { return t_nodes.front(); }
    double t_end() const { return t_nodes.back(); }

    void eval_into(double t, std::span<double> out) const {
        require(!t_nodes.empty(), "dense_eval: empty solution");
        const double lo = dir > 0 ? t_begin() : t_end();
        const double hi = dir > 0 ? t_end() : t_begin();
        const double span = std::abs(t_end() - t_begin());
        require(t >= lo - 1e-12 * std::max(span, 1.0) && t <= hi + 1e-12 * std::max(span, 1.0),
                "dense_eval: t outside solved span");
        // Locate the step containing t. t_nodes is monotone in direction dir.
        size_t step = 0;
        if (dir > 0) {
            auto it = std::upper_bound(t_nodes.begin(), t_nodes.end(), t);
            step = size_t(std::max<ptrdiff_t>(1, it - t_nodes.begin())) - 1;
        } else {
            auto it = std::upper_bound(t_nodes.begin(), t_nodes.end(), t,
                                       [](double a, double b) { return a > b; });
            step = size_t(std::max<ptrdiff_t>(1, it - t_nodes.begin())) - 1;
        }
        step = std::min(step, ks.size() - 1);
        // Exact node hits return the stored state (keeps saveat endpoints exact).
        for (size_t i : {step, step + 1})
            if (t == t_nodes[i]) {
                std::copy(y_nodes[i].begin(), y_nodes[i].end(), out.begin());
                return;
            }
        const double dt = t_nodes[step + 1] - t_nodes[step];
        const double q = (t - t_nodes[step]) / dt;
        const auto w = tsit5::interp_weights(q);
        const auto& y0 = y_nodes[step];
        for (size_t j = 0; j < y0.size(); ++j) {
            double acc = y0[j];
            for (int s = 0; s < 7; ++s) acc += dt * w[s] * ks[step][s][j];
            out[j] = acc;
        }
    }

    std::vector<double> eval(double t) const {
        std::vector<double> out(y_nodes.front().size());
        eval_into(t, out);
        return out;
    }
};

struct DenseResult {
    DenseSolution sol;
    SolveStats stats;
    bool ok = true;
    double t_reached = 0.0;
    std::string note;
};

namespace detail {

inline double error_norm(const std::vector<double>& err, const std::vector<double>& y0,
                         const std::vector<double>& y1, double rtol, double atol) {
    double acc = 0.0;
    for (size_t i = 0; i < err.size(); ++i) {
        const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double e = err[i] / sc;
        acc += e * e;
    }
    return std::sqrt(acc / double(err.size()));
}

// Classical automatic initial step selection (order 5).
inline double initial_step(const OdeSystem& sys, double t0, const std::vector<double>& u0,
                           std::span<const double> theta, const std::vector<double>& f0,
                           double dir, double span, double rtol, double atol,
                           SolveStats& stats) {
    const size_t n = u0.size();
    double d0 = 0.0, d1 = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double sc = atol + rtol * std::abs(u0[i]);
        d0 += (u0[i] / sc) * (u0[i] / sc);
        d1 += (f0[i] / sc) * (f0[i] / sc);
    }
    d0 = std::sqrt(d0 / double(n));
    d1 = std::sqrt(d1 / double(n));
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);

    std::vector<double> u1(n), f1(n);
    for (size_t i = 0; i < n; ++i) u1[i] = u0[i] + dir * h0 * f0[i];
    sys.rhs(t0 + dir * h0, u1, theta, f1);
    ++stats.rhs_evals;
    double d2 = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double sc = atol + rtol * std::abs(u0[i]);
        const double df = (f1[i] - f0[i]) / sc;
        d2 += df * df;
    }
    d2 = std::sqrt(d2 / double(n)) / h0;

    const double dmax = std::max(d1, d2);
    double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
    return std::min({100.0 * h0, h1, span});
}

}  // namespace detail

/// Adaptive Tsit5 solve over [t0, t1] (either direction), storing every
/// accepted step for dense evaluation. Does not throw on divergence; check ok.
inline DenseResult tsit5_dense(const OdeSystem& sys, std::span<const double> u0_in, double t0,
                               double t1, std::span<const double> theta, double rtol,
                               double atol, long max_steps = 10'000'000) {
    require(sys.dim == int(u0_in.size()), "tsit5: u0 length != sys.dim");
    require(t1 != t0, "tsit5: empty time span");
    require(rtol > 0 && atol > 0, "tsit5: tolerances must be positive");
    using namespace tsit5;

    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    const size_t n = u0_in.size();

    DenseResult res;
    res.sol.dir = dir;
    res.sol.t_nodes.push_back(t0);
    res.sol.y_nodes.emplace_back(u0_in.begin(), u0_in.end());

    std::vector<double> u(u0_in.begin(), u0_in.end());
    std::array<std::vector<double>, 7> k;
    for (auto& ki : k) ki.assign(n, 0.0);
    std::vector<double> utmp(n), unew(n), err(n);

    double t = t0;
    sys.rhs(t, u, theta, k[0]);
    ++res.stats.rhs_evals;
    if (!all_finite(k[0]) || !all_finite(u)) {
        res.ok = false;
        res.t_reached = t;
        res.note = "non-finite right-hand side at the initial state";
        return res;
    }
    double dt = detail::initial_step(sys, t, u, theta, k[0], dir, span, rtol, atol, res.stats);

    // PI step control, exponents 0.7/5 and 0.4/5.
    const double safety = 0.9, beta1 = 0.14, beta2 = 0.08, qmin = 0.2, qmax = 5.0;
    double errold = 1.0;
    const double dt_floor = 1e-14 * span;

    auto stage = [&](double ct, std::span<const double> coeffs, int nstage) {
        for (size_t i = 0; i < n; ++i) {
            double acc = u[i];
            for (int s = 0; s < nstage; ++s) acc += dir * dt * coeffs[s] * k[s][i];
            utmp[i] = acc;
        }
        sys.rhs(t + dir * dt * ct, utmp, theta, k[nstage]);
        ++res.stats.rhs_evals;
    };

    long steps = 0;
    while ((t1 - t) * dir > 0) {
        if (++steps > max_steps) {
            res.ok = false;
            res.t_reached = t;
            res.note = "step budget exhausted";
            return res;
        }
        dt = std::min(dt, std::abs(t1 - t));
        const bool hits_end = dt == std::abs(t1 - t);
        if (dt < dt_floor) {
            res.ok = false;
            res.t_reached = t;
            res.note = "step size underflow";
            return res;
        }

        const std::array<double, 1> s2{a21};
        const std::array<double, 2> s3{a31, a32};
        const std::array<double, 3> s4{a41, a42, a43};
        const std::array<double, 4> s5{a51, a52, a53, a54};
        const std::array<double, 5> s6{a61, a62, a63, a64, a65};
        stage(c2, s2, 1);
        stage(c3, s3, 2);
        stage(c4, s4, 3);
        stage(c5, s5, 4);
        stage(c6, s6, 5);
        // 5th-order solution (b row = a7*) and trailing FSAL stage.
        for (size_t i = 0; i < n; ++i)
            unew[i] = u[i] + dir * dt *
                                 (a71 * k[0][i] + a72 * k[1][i] + a73 * k[2][i] +
                                  a74 * k[3][i] + a75 * k[4][i] + a76 * k[5][i]);
        sys.rhs(t + dir * dt, unew, theta, k[6]);
        ++res.stats.rhs_evals;
        for (size_t i = 0; i < n; ++i)
            err[i] = dir * dt *
                     (bt1 * k[0][i] + bt2 * k[1][i] + bt3 * k[2][i] + bt4 * k[3][i] +
                      bt5 * k[4][i] + bt6 * k[5][i] + bt7 * k[6][i]);

        double enorm = detail::error_norm(err, u, unew, rtol, atol);
        const bool finite = std::isfinite(enorm) && all_finite(unew);
        if (finite && enorm <= 1.0) {
            // Accept: record raw stage slopes; the interpolant's signed step
            // t_next - t supplies the direction.
            auto& stored = res.sol.ks.emplace_back();
            for (int s = 0; s < 7; ++s) stored[s] = k[s];
            t = hits_end ? t1 : t + dir * dt;
            u = unew;
            res.sol.t_nodes.push_back(t);
            res.sol.y_nodes.push_back(u);
            ++res.stats.accepted;
            k[0] = k[6];  // FSAL
            const double q = std::clamp(
                safety * std::pow(std::max(enorm, 1e-10), -beta1) * std::pow(errold, beta2),
                qmin, qmax);
            errold = std::max(enorm, 1e-4);
            dt *= q;
        } else {
            ++res.stats.rejected;
            const double q = finite
                                 ? std::clamp(safety * std::pow(enorm, -0.2), qmin, 1.0)
                                 : qmin;
            dt *= q;
        }
    }
    res.ok = true;
    res.t_reached = t1;
    return res;
}

namespace detail {

inline Trajectory sample_saveat(const DenseSolution& sol, std::span<const double> saveat,
                                const SolveStats& stats, double t_reached, double dir) {
    Trajectory traj;
    traj.stats = stats;
    for (double s : saveat) {
        if ((s - t_reached) * dir > 0) break;  // not covered (partial solve)
        traj.times.push_back(s);  // verbatim copy: output grid == requested grid
        traj.states.push_back(sol.eval(s));
    }
    return traj;
}

}  // namespace detail

/// Adaptive solve sampled exactly at saveat (which must lie inside [t0, t1]
/// and be monotone in the direction of integration). Throws SolveDiverged
/// with the covered prefix if the solver stalls.
inline Trajectory tsit5_solve(const OdeSystem& sys, std::span<const double> u0, double t0,
                              double t1, std::span<const double> theta,
                              std::span<const double> saveat, double rtol, double atol) {
    const double dir = t1 > t0 ? 1.0 : -1.0;
    for (size_t i = 0; i < saveat.size(); ++i) {
        require((saveat[i] - t0) * dir >= 0 && (t1 - saveat[i]) * dir >= 0,
                "tsit5_solve: saveat point outside tspan");
        if (i) require((saveat[i] - saveat[i - 1]) * dir > 0,
                       "tsit5_solve: saveat must be monotone in integration direction");
    }
    DenseResult res = tsit5_dense(sys, u0, t0, t1, theta, rtol, atol);
    Trajectory traj = detail::sample_saveat(res.sol, saveat, res.stats, res.t_reached, dir);
    if (!res.ok)
        throw SolveDiverged("tsit5_solve: " + res.note + " at t = " + std::to_string(res.t_reached),
                            std::move(traj), res.t_reached);
    return traj;
}

/// Classical fixed-step RK4 saving every step. Reference oracle and the
/// backbone of discretize-then-optimize gradients.
inline Trajectory rk4_solve(const OdeSystem& sys, std::span<const double> u0, double t0,
                            double t1, std::span<const double> theta, double dt) {
    require(sys.dim == int(u0.size()), "rk4: u0 length != sys.dim");
    require(dt > 0, "rk4: dt must be positive");
    const double span = t1 - t0;
    require(span > 0, "rk4: t1 must exceed t0");
    const long nsteps = std::lround(span / dt);
    require(std::abs(nsteps * dt - span) < 1e-9 * std::max(1.0, std::abs(span)),
            "rk4: dt does not divide the time span");

    const size_t n = u0.size();
    Trajectory traj;
    traj.times.reserve(nsteps + 1);
    traj.states.reserve(nsteps + 1);
    std::vector<double> u(u0.begin(), u0.end());
    traj.times.push_back(t0);
    traj.states.push_back(u);
    std::vector<double> k1(n), k2(n), k3(n), k4(n), utmp(n);
    for (long step = 0; step < nsteps; ++step) {
        const double t = t0 + double(step) * dt;
        sys.rhs(t, u, theta, k1);
        for (size_t i = 0; i < n; ++i) utmp[i] = u[i] + 0.5 * dt * k1[i];
        sys.rhs(t + 0.5 * dt, utmp, theta, k2);
        for (size_t i = 0; i < n; ++i) utmp[i] = u[i] + 0.5 * dt * k2[i];
        sys.rhs(t + 0.5 * dt, utmp, theta, k3);
        for (size_t i = 0; i < n; ++i) utmp[i] = u[i] + dt * k3[i];
        sys.rhs(t + dt, utmp, theta, k4);
        for (size_t i = 0; i < n; ++i)
            u[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        traj.stats.rhs_evals += 4;
        ++traj.stats.accepted;
        traj.times.push_back(step + 1 == nsteps ? t1 : t0 + double(step + 1) * dt);
        traj.states.push_back(u);
    }
    return traj;
}

}  // namespace kanode
