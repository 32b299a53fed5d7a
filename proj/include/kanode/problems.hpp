#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "kanode/odeint.hpp"
#include "kanode/training.hpp"

namespace kanode {

/// Boundary handling for 1-D method-of-lines grids.
///  - Periodic: n distinct nodes, x1 identified with x0 and not stored.
///  - PeriodicClosed: both endpoints stored (node n-1 is the same physical
///    point as node 0); used where the state vector includes the seam twice.
///  - Dirichlet: endpoints stored and held at fixed values.
enum class Bc { Periodic, PeriodicClosed, Dirichlet };

struct Grid1D {
    double x0 = 0.0;
    double x1 = 1.0;
    int n = 0;
    double dx = 0.0;
    Bc bc = Bc::Periodic;
    double left_val = 0.0;   // Dirichlet only
    double right_val = 0.0;  // Dirichlet only

    static Grid1D periodic(double x0, double x1, int n) {
        require(n >= 3 && x1 > x0, "Grid1D: need n >= 3 and x1 > x0");
        Grid1D g;
        g.x0 = x0;
        g.x1 = x1;
        g.n = n;
        g.dx = (x1 - x0) / n;
        g.bc = Bc::Periodic;
        return g;
    }
    static Grid1D periodic_closed(double x0, double x1, int n) {
        require(n >= 3 && x1 > x0, "Grid1D: need n >= 3 and x1 > x0");
        Grid1D g;
        g.x0 = x0;
        g.x1 = x1;
        g.n = n;
        g.dx = (x1 - x0) / (n - 1);
        g.bc = Bc::PeriodicClosed;
        return g;
    }
    static Grid1D dirichlet(double x0, double x1, int n, double left, double right) {
        require(n >= 3 && x1 > x0, "Grid1D: need n >= 3 and x1 > x0");
        Grid1D g;
        g.x0 = x0;
        g.x1 = x1;
        g.n = n;
        g.dx = (x1 - x0) / (n - 1);
        g.bc = Bc::Dirichlet;
        g.left_val = left;
        g.right_val = right;
        return g;
    }

    std::vector<double> xs() const {
        std::vector<double> x(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) x[size_t(i)] = x0 + i * dx;
        return x;
    }
};

namespace detail {

/// Enumerates the nonzero entries of row i of the (dx^2-scaled) Laplacian as
/// f(column, coefficient). Shared by the forward and transpose applications so
/// the two can never drift apart.
template <class F>
inline void laplacian_row(const Grid1D& g, int i, F&& f) {
    const int n = g.n;
    switch (g.bc) {
        case Bc::Periodic:
            f((i + n - 1) % n, 1.0);
            f(i, -2.0);
            f((i + 1) % n, 1.0);
            break;
        case Bc::PeriodicClosed:
            // node n-1 duplicates node 0, so wrapping skips the seam copy
            f(i == 0 ? n - 2 : i - 1, 1.0);
            f(i, -2.0);
            f(i == n - 1 ? 1 : i + 1, 1.0);
            break;
        case Bc::Dirichlet:
            // boundary rows are zero: endpoint values never move
            if (i > 0 && i < n - 1) {
                f(i - 1, 1.0);
                f(i, -2.0);
                f(i + 1, 1.0);
            }
            break;
    }
}

}  // namespace detail

/// out = L u where L is the second-order central-difference Laplacian.
inline void laplacian_apply(const Grid1D& g, std::span<const double> u, std::span<double> out) {
    require(g.n >= 3, "laplacian_1d: n < 3");
    require(int(u.size()) == g.n, "laplacian_1d: length mismatch");
    const double s = 1.0 / (g.dx * g.dx);
    for (int i = 0; i < g.n; ++i) {
        double acc = 0.0;
        detail::laplacian_row(g, i, [&](int j, double c) { acc += c * u[size_t(j)]; });
        out[size_t(i)] = s * acc;
    }
}

inline std::vector<double> laplacian_1d(std::span<const double> u, const Grid1D& g) {
    std::vector<double> out(u.size());
    laplacian_apply(g, u, out);
    return out;
}

/// out = L^T v, needed by adjoint passes through hybrid systems. L is not
/// symmetric for PeriodicClosed or Dirichlet grids.
inline void laplacian_transpose_apply(const Grid1D& g, std::span<const double> v,
                                      std::span<double> out) {
    require(g.n >= 3, "laplacian_1d: n < 3");
    require(int(v.size()) == g.n, "laplacian_1d: length mismatch");
    const double s = 1.0 / (g.dx * g.dx);
    std::fill(out.begin(), out.end(), 0.0);
    for (int i = 0; i < g.n; ++i)
        detail::laplacian_row(g, i, [&](int j, double c) { out[size_t(j)] += s * c * v[size_t(i)]; });
}

// ---- Lotka-Volterra ----

struct LvParams {
    double alpha = 1.5;
    double beta = 1.0;
    double gamma = 1.0;
    double delta = 3.0;
};

inline std::array<double, 2> lotka_volterra_rhs(double x, double y, const LvParams& p = {}) {
    return {p.alpha * x - p.beta * x * y, p.gamma * x * y - p.delta * y};
}

inline OdeSystem lv_system(const LvParams& p = {}) {
    OdeSystem sys;
    sys.dim = 2;
    sys.n_params = 0;
    sys.rhs = [p](double, std::span<const double> u, std::span<const double>,
                  std::span<double> du) {
        auto f = lotka_volterra_rhs(u[0], u[1], p);
        du[0] = f[0];
        du[1] = f[1];
    };
    return sys;
}

// ---- Fisher-KPP ----

inline std::vector<double> fisher_kpp_rhs(std::span<const double> u, const Grid1D& g, double D,
                                          double r) {
    require(g.bc != Bc::Dirichlet, "fisher_kpp_rhs: grid must be periodic");
    require(int(u.size()) == g.n, "fisher_kpp_rhs: length mismatch");
    std::vector<double> du(u.size());
    laplacian_apply(g, u, du);
    for (size_t i = 0; i < u.size(); ++i) du[i] = D * du[i] + r * u[i] * (1.0 - u[i]);
    return du;
}

inline OdeSystem fisher_kpp_system(const Grid1D& g, double D, double r) {
    OdeSystem sys;
    sys.dim = g.n;
    sys.n_params = 0;
    sys.rhs = [g, D, r](double, std::span<const double> u, std::span<const double>,
                        std::span<double> du) {
        laplacian_apply(g, u, du);
        for (int i = 0; i < g.n; ++i) du[size_t(i)] = D * du[size_t(i)] +
                                                      r * u[size_t(i)] * (1.0 - u[size_t(i)]);
    };
    return sys;
}

/// Physics + network hybrid: du/dt = diffusion * Laplacian(u) + phi(u_i) with
/// one shared single-input single-output network applied at every node.
inline OdeSystem pointwise_hybrid_system(const Grid1D& g, double diffusion, const Network& proto) {
    require(proto.input_dim() == 1 && proto.output_dim() == 1,
            "pointwise_hybrid_system: network must be 1 -> 1");
    struct State {
        Network net;
        NetWorkspace ws;
        std::vector<double> xb{0.0};
        explicit State(const Network& n) : net(n), ws(n) {}
    };
    auto st = std::make_shared<State>(proto);
    const Grid1D grid = g;
    OdeSystem sys;
    sys.dim = g.n;
    sys.n_params = proto.param_count();
    sys.rhs = [st, grid, diffusion](double, std::span<const double> u,
                                    std::span<const double> theta, std::span<double> du) {
        sync_params(st->net, theta);
        laplacian_apply(grid, u, du);
        for (int i = 0; i < grid.n; ++i) {
            net_forward_ws(st->net, u.subspan(size_t(i), 1), st->ws);
            du[size_t(i)] = diffusion * du[size_t(i)] + st->ws.values.back()[0];
        }
    };
    sys.rhs_vjp = [st, grid, diffusion](double, std::span<const double> u,
                                        std::span<const double> theta, std::span<const double> v,
                                        std::span<double> u_bar, std::span<double> theta_bar) {
        sync_params(st->net, theta);
        laplacian_transpose_apply(grid, v, u_bar);
        for (int i = 0; i < grid.n; ++i) u_bar[size_t(i)] *= diffusion;
        std::fill(theta_bar.begin(), theta_bar.end(), 0.0);
        for (int i = 0; i < grid.n; ++i) {
            net_forward_ws(st->net, u.subspan(size_t(i), 1), st->ws);
            net_vjp_ws(st->net, st->ws, v.subspan(size_t(i), 1), st->xb, theta_bar);
            u_bar[size_t(i)] += st->xb[0];
        }
    };
    return sys;
}

inline OdeSystem fisher_kpp_hybrid(const Grid1D& g, double D, const Network& net) {
    require(g.bc != Bc::Dirichlet, "fisher_kpp_hybrid: grid must be periodic");
    return pointwise_hybrid_system(g, D, net);
}

// ---- Burgers ----

/// Central-difference Burgers right-hand side in conservative flux form:
/// du_i/dt = -(u_{i+1}^2 - u_{i-1}^2)/(4 dx) + nu (u_{i-1} - 2u_i + u_{i+1})/dx^2.
/// The non-conservative product form u_i (u_{i+1}-u_{i-1})/(2 dx) blows up at
/// these grid resolutions once the front forms; the flux form stays stable and
/// grid-convergent.
inline std::vector<double> burgers_rhs(std::span<const double> u, const Grid1D& g,
                                       double nu = 0.01 / std::numbers::pi) {
    require(g.bc == Bc::Dirichlet, "burgers_rhs: grid must be Dirichlet");
    require(int(u.size()) == g.n, "burgers_rhs: length mismatch");
    std::vector<double> du(u.size(), 0.0);
    laplacian_apply(g, u, du);
    for (int i = 1; i < g.n - 1; ++i) {
        const double flux =
            (u[size_t(i + 1)] * u[size_t(i + 1)] - u[size_t(i - 1)] * u[size_t(i - 1)]) /
            (4.0 * g.dx);
        du[size_t(i)] = -flux + nu * du[size_t(i)];
    }
    du[0] = du[size_t(g.n - 1)] = 0.0;
    return du;
}

inline OdeSystem burgers_system(const Grid1D& g, double nu = 0.01 / std::numbers::pi) {
    OdeSystem sys;
    sys.dim = g.n;
    sys.n_params = 0;
    sys.rhs = [g, nu](double, std::span<const double> u, std::span<const double>,
                      std::span<double> du) {
        auto f = burgers_rhs(u, g, nu);
        std::copy(f.begin(), f.end(), du.begin());
    };
    return sys;
}

// ---- Schroedinger ----

/// Complex field packing: [Re(u_0..u_{n-1}), Im(u_0..u_{n-1})].
inline std::vector<double> pack_complex(std::span<const double> re, std::span<const double> im) {
    require(re.size() == im.size(), "pack_complex: length mismatch");
    std::vector<double> packed(2 * re.size());
    std::copy(re.begin(), re.end(), packed.begin());
    std::copy(im.begin(), im.end(), packed.begin() + std::ptrdiff_t(re.size()));
    return packed;
}

inline std::pair<std::vector<double>, std::vector<double>> unpack_complex(
    std::span<const double> packed) {
    require(packed.size() % 2 == 0, "unpack_complex: odd-length packing");
    const size_t n = packed.size() / 2;
    return {std::vector<double>(packed.begin(), packed.begin() + std::ptrdiff_t(n)),
            std::vector<double>(packed.begin() + std::ptrdiff_t(n), packed.end())};
}

/// |u_i| for a packed complex state.
inline std::vector<double> complex_modulus(std::span<const double> packed) {
    require(packed.size() % 2 == 0, "complex_modulus: odd-length packing");
    const size_t n = packed.size() / 2;
    std::vector<double> mod(n);
    for (size_t i = 0; i < n; ++i) mod[i] = std::hypot(packed[i], packed[n + i]);
    return mod;
}

/// i u_t + 1/2 u_xx + |u|^2 u = 0 split into real and imaginary parts:
/// Re' = -1/2 Im_xx - |u|^2 Im,  Im' = 1/2 Re_xx + |u|^2 Re.
inline std::vector<double> schrodinger_rhs(std::span<const double> packed, const Grid1D& g) {
    require(packed.size() % 2 == 0, "schrodinger_rhs: odd-length packing");
    require(int(packed.size()) == 2 * g.n, "schrodinger_rhs: length mismatch");
    const size_t n = size_t(g.n);
    auto re = packed.first(n);
    auto im = packed.subspan(n, n);
    std::vector<double> du(2 * n);
    std::span<double> dre(du.data(), n), dim(du.data() + n, n);
    laplacian_apply(g, im, dre);  // borrow output slots for the Laplacians
    laplacian_apply(g, re, dim);
    for (size_t i = 0; i < n; ++i) {
        const double a2 = re[i] * re[i] + im[i] * im[i];
        dre[i] = -0.5 * dre[i] - a2 * im[i];
        dim[i] = 0.5 * dim[i] + a2 * re[i];
    }
    return du;
}

inline OdeSystem schrodinger_system(const Grid1D& g) {
    OdeSystem sys;
    sys.dim = 2 * g.n;
    sys.n_params = 0;
    sys.rhs = [g](double, std::span<const double> u, std::span<const double>,
                  std::span<double> du) {
        auto f = schrodinger_rhs(u, g);
        std::copy(f.begin(), f.end(), du.begin());
    };
    return sys;
}

/// Discrete mass sum(|u_i|^2) dx, conserved by the continuous equation.
inline double schrodinger_mass(std::span<const double> packed, const Grid1D& g) {
    require(int(packed.size()) == 2 * g.n, "schrodinger_mass: length mismatch");
    const size_t n = size_t(g.n);
    double m = 0.0;
    for (size_t i = 0; i < n; ++i) m += packed[i] * packed[i] + packed[n + i] * packed[n + i];
    return m * g.dx;
}

// ---- Allen-Cahn ----

inline std::vector<double> allen_cahn_rhs(std::span<const double> u, const Grid1D& g) {
    require(g.bc != Bc::Dirichlet, "allen_cahn_rhs: grid must be periodic");
    require(int(u.size()) == g.n, "allen_cahn_rhs: length mismatch");
    std::vector<double> du(u.size());
    laplacian_apply(g, u, du);
    for (size_t i = 0; i < u.size(); ++i)
        du[i] = 1e-4 * du[i] + 5.0 * u[i] - 5.0 * u[i] * u[i] * u[i];
    return du;
}

inline OdeSystem allen_cahn_system(const Grid1D& g) {
    OdeSystem sys;
    sys.dim = g.n;
    sys.n_params = 0;
    sys.rhs = [g](double, std::span<const double> u, std::span<const double>,
                  std::span<double> du) {
        auto f = allen_cahn_rhs(u, g);
        std::copy(f.begin(), f.end(), du.begin());
    };
    return sys;
}

inline OdeSystem allen_cahn_hybrid(const Grid1D& g, const Network& net) {
    require(g.bc != Bc::Dirichlet, "allen_cahn_hybrid: grid must be periodic");
    return pointwise_hybrid_system(g, 1e-4, net);
}

// ---- Ground-truth datasets ----

struct Dataset {
    Trajectory train;
    Trajectory test;
    std::vector<double> u0;       // state at the first training time
    std::optional<Grid1D> grid;   // PDE problems only
};

namespace detail {

inline std::vector<double> fisher_ic(const Grid1D& g) {
    std::vector<double> u(size_t(g.n));
    auto xs = g.xs();
    for (int i = 0; i < g.n; ++i)
        u[size_t(i)] = 0.5 * (std::tanh((xs[size_t(i)] - 0.4) / 0.02) -
                              std::tanh((xs[size_t(i)] - 0.6) / 0.02));
    return u;
}

inline std::vector<double> burgers_ic(const Grid1D& g) {
    std::vector<double> u(size_t(g.n));
    auto xs = g.xs();
    for (int i = 0; i < g.n; ++i) u[size_t(i)] = -std::sin(std::numbers::pi * xs[size_t(i)]);
    return u;
}

inline std::vector<double> schrodinger_ic(const Grid1D& g) {
    std::vector<double> re(size_t(g.n)), im(size_t(g.n), 0.0);
    auto xs = g.xs();
    for (int i = 0; i < g.n; ++i) re[size_t(i)] = 1.0 / std::cosh(xs[size_t(i)]);
    return pack_complex(re, im);
}

inline std::vector<double> allen_ic(const Grid1D& g) {
    std::vector<double> u(size_t(g.n));
    auto xs = g.xs();
    for (int i = 0; i < g.n; ++i) {
        const double x = xs[size_t(i)];
        u[size_t(i)] = x * x * std::cos(std::numbers::pi * x);
    }
    return u;
}

/// Solves sys from ic at t=0 with tight tolerance, sampling the union of the
/// two time lists, then splits the samples back into train and test.
inline Dataset split_solve(const OdeSystem& sys, const std::vector<double>& ic,
                           const std::vector<double>& train_t, const std::vector<double>& test_t) {
    std::vector<double> all;
    all.reserve(train_t.size() + test_t.size());
    all.insert(all.end(), train_t.begin(), train_t.end());
    all.insert(all.end(), test_t.begin(), test_t.end());
    std::sort(all.begin(), all.end());
    Trajectory full = tsit5_solve(sys, ic, 0.0, all.back(), {}, all, 1e-8, 1e-8);

    Dataset ds;
    size_t a = 0, b = 0;
    for (size_t i = 0; i < full.times.size(); ++i) {
        if (a < train_t.size() && full.times[i] == train_t[a]) {
            ds.train.times.push_back(full.times[i]);
            ds.train.states.push_back(full.states[i]);
            ++a;
        } else if (b < test_t.size() && full.times[i] == test_t[b]) {
            ds.test.times.push_back(full.times[i]);
            ds.test.states.push_back(full.states[i]);
            ++b;
        }
    }
    require(a == train_t.size() && b == test_t.size(), "make_dataset: split lost samples");
    ds.u0 = ds.train.states.front();
    return ds;
}

}  // namespace detail

/// Ground-truth train/test splits for each experiment, solved at tolerance
/// 1e-8. Known ids: lv, fisher-kpp, burgers, schrodinger, allen-cahn-hidden,
/// allen-cahn-surrogate.
inline Dataset make_dataset(const std::string& id) {
    auto steps = [](double scale, int first, int last) {
        std::vector<double> t;
        for (int i = first; i <= last; ++i) t.push_back(double(i) / scale);
        return t;
    };
    if (id == "lv") {
        Dataset ds = detail::split_solve(lv_system(), {1.0, 1.0}, steps(10, 0, 35),
                                         steps(10, 36, 140));
        return ds;
    }
    if (id == "fisher-kpp") {
        Grid1D g = Grid1D::periodic(0.0, 1.0, 25);
        std::vector<double> test;
        for (int i = 0; i < 10; ++i) test.push_back(0.25 + double(i) / 2.0);
        Dataset ds = detail::split_solve(fisher_kpp_system(g, 0.2, 1.0), detail::fisher_ic(g),
                                         steps(2, 0, 10), test);
        ds.grid = g;
        return ds;
    }
    if (id == "burgers") {
        Grid1D g = Grid1D::dirichlet(-1.0, 1.0, 41, 0.0, 0.0);
        Dataset ds = detail::split_solve(burgers_system(g), detail::burgers_ic(g),
                                         {0.1, 0.3, 0.5, 0.7, 0.9}, {0.2, 0.4, 0.6, 0.8, 1.0});
        ds.grid = g;
        return ds;
    }
    if (id == "schrodinger") {
        Grid1D g = Grid1D::periodic_closed(-5.0, 5.0, 201);
        Dataset ds = detail::split_solve(schrodinger_system(g), detail::schrodinger_ic(g),
                                         {0.1, 0.3, 0.5, 0.7, 0.9, 1.1, 1.3, 1.5},
                                         {0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4});
        ds.grid = g;
        return ds;
    }
    if (id == "allen-cahn-hidden") {
        Grid1D g = Grid1D::periodic_closed(-1.0, 1.0, 41);
        std::vector<double> test;
        for (int i = 0; i < 10; ++i) test.push_back(0.05 + double(i) / 10.0);
        Dataset ds = detail::split_solve(allen_cahn_system(g), detail::allen_ic(g),
                                         steps(10, 0, 10), test);
        ds.grid = g;
        return ds;
    }
    if (id == "allen-cahn-surrogate") {
        Grid1D g = Grid1D::periodic_closed(-1.0, 1.0, 41);
        Dataset ds = detail::split_solve(allen_cahn_system(g), detail::allen_ic(g),
                                         {0.1, 0.3, 0.5, 0.7, 0.9}, {0.2, 0.4, 0.6, 0.8, 1.0});
        ds.grid = g;
        return ds;
    }
    throw ContractError("make_dataset: unknown problem id '" + id + "'");
}

}  // namespace kanode
