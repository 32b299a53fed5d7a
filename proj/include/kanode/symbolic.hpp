#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "kanode/math.hpp"
#include "kanode/odeint.hpp"
#include "kanode/pruning.hpp"

// Symbolic extraction from trained networks. Two regression modes:
//   - fit_activation: univariate best-subset least squares over a fixed basis
//     grammar, reported as a Pareto front of (complexity, loss);
//   - fit_global: multivariate sequentially-thresholded least squares over a
//     monomial candidate library (one sparse coefficient vector per output).
// Complexity is the node count of the rendered infix expression; multi-term
// polynomials without a constant term render factored, (a + b*x*x)*x, so the
// count matches the usual symbolic-regression accounting.

namespace kanode {

// ---- univariate grammar ----

enum class TermKind { One, X, X2, X3, Inv, InvQuad, Sin, Cos, Exp, RationalX };

/// One instantiated basis function. InvQuad is 1/(x^2 + c); RationalX is
/// x/(x^2 + d x + e). Inner constants are fixed when the grammar is
/// instantiated against a sample set and stay frozen through subset search.
struct BasisTerm {
    TermKind kind = TermKind::One;
    double c = 1.0;
    double d = 0.0;
    double e = 1.0;
};

/// Which operator families the search may draw on. Rational terms are also
/// range-guarded: if the sample range comes within 1e-3 of zero they are
/// dropped for that fit regardless of this flag.
struct BasisGrammar {
    bool trig = true;
    bool exp = true;
    bool rational = true;
    static BasisGrammar arithmetic() { return {false, false, true}; }
    static BasisGrammar full() { return {true, true, true}; }
};

inline double eval_term(const BasisTerm& t, double x) {
    switch (t.kind) {
        case TermKind::One: return 1.0;
        case TermKind::X: return x;
        case TermKind::X2: return x * x;
        case TermKind::X3: return x * x * x;
        case TermKind::Inv:
            if (x == 0.0) throw ContractError("eval_term: 1/x at x = 0");
            return 1.0 / x;
        case TermKind::InvQuad: {
            const double den = x * x + t.c;
            if (den == 0.0) throw ContractError("eval_term: 1/(x^2+c) pole");
            return 1.0 / den;
        }
        case TermKind::Sin: return std::sin(x);
        case TermKind::Cos: return std::cos(x);
        case TermKind::Exp: return std::exp(x);
        case TermKind::RationalX: {
            const double den = x * x + t.d * x + t.e;
            if (den == 0.0) throw ContractError("eval_term: rational pole");
            return x / den;
        }
    }
    throw ContractError("eval_term: bad kind");
}

struct FittedTerm {
    BasisTerm term;
    double coef = 0.0;
};

struct SymbolicFit {
    std::vector<FittedTerm> terms;  // ordered by TermKind
    int complexity = 0;
    double loss = 0.0;  // mean squared residual on the fit samples
};

inline double evaluate_expression(const SymbolicFit& fit, double x) {
    double s = 0.0;
    for (const auto& ft : fit.terms) s += ft.coef * eval_term(ft.term, x);
    return s;
}

inline std::function<double(double)> expression_fn(SymbolicFit fit) {
    return [fit = std::move(fit)](double x) { return evaluate_expression(fit, x); };
}

// ---- complexity and rendering ----

namespace detail {

inline bool is_poly(TermKind k) {
    return k == TermKind::One || k == TermKind::X || k == TermKind::X2 || k == TermKind::X3;
}

inline int poly_power(TermKind k) {
    switch (k) {
        case TermKind::One: return 0;
        case TermKind::X: return 1;
        case TermKind::X2: return 2;
        case TermKind::X3: return 3;
        default: return -1;
    }
}

/// Node count of "c * x^k" rendered with repeated multiplication: the
/// coefficient leaf, k variable leaves, and k multiply nodes (k = 0 is just
/// the constant).
inline int monomial_nodes(int k) { return k == 0 ? 1 : 2 * k + 1; }

inline int nonpoly_nodes(TermKind k) {
    switch (k) {
        case TermKind::Inv: return 3;         // c/x
        case TermKind::InvQuad: return 7;     // c/(x*x + d)
        case TermKind::Sin:
        case TermKind::Cos:
        case TermKind::Exp: return 4;         // c*sin(x)
        case TermKind::RationalX: return 13;  // c*x/(x*x + d*x + e)
        default: return 0;
    }
}

inline std::string fmt_coef(double c) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", c);
    return buf;
}

inline std::string xpow(const std::string& v, int k) {
    std::string s;
    for (int i = 0; i < k; ++i) {
        if (i) s += "*";
        s += v;
    }
    return s;
}

inline std::string monomial_str(double mag, int k, const std::string& v) {
    if (k == 0) return fmt_coef(mag);
    return fmt_coef(mag) + "*" + xpow(v, k);
}

/// Joins signed chunk strings: "a + b - c" with leading "-" folded in.
inline std::string join_signed(const std::vector<std::pair<double, std::string>>& chunks) {
    std::string out;
    for (size_t i = 0; i < chunks.size(); ++i) {
        const bool neg = chunks[i].first < 0.0;
        if (i == 0)
            out += neg ? "-" : "";
        else
            out += neg ? " - " : " + ";
        out += chunks[i].second;
    }
    return out;
}

}  // namespace detail

/// Expression-tree node count of the rendered form. Coefficients always count
/// one node each; powers count as repeated multiplication; a polynomial with
/// >= 2 terms and no constant term is factored through its lowest power.
inline int expression_complexity(const std::vector<FittedTerm>& terms) {
    std::vector<int> powers;
    int nodes = 0;
    int chunks = 0;
    for (const auto& ft : terms) {
        if (detail::is_poly(ft.term.kind)) {
            powers.push_back(detail::poly_power(ft.term.kind));
        } else {
            nodes += detail::nonpoly_nodes(ft.term.kind);
            ++chunks;
        }
    }
    if (!powers.empty()) {
        const int m = *std::min_element(powers.begin(), powers.end());
        if (powers.size() >= 2 && m > 0) {
            int inner = int(powers.size()) - 1;  // '+' nodes inside the parentheses
            for (int k : powers) inner += detail::monomial_nodes(k - m);
            nodes += inner + 2 * m;  // trailing *x per factored power
        } else {
            nodes += int(powers.size()) - 1;
            for (int k : powers) nodes += detail::monomial_nodes(k);
        }
        ++chunks;
    }
    return nodes + std::max(chunks - 1, 0);
}

/// Infix rendering with explicit '*' and parentheses, e.g.
/// "(5.0015 - 5.0021*u*u)*u + 0.3*sin(u)".
inline std::string render_expression(const SymbolicFit& fit, const std::string& var = "x") {
    using detail::fmt_coef;
    std::vector<std::pair<double, int>> poly;  // (coef, power)
    std::vector<const FittedTerm*> rest;
    for (const auto& ft : fit.terms) {
        if (detail::is_poly(ft.term.kind))
            poly.emplace_back(ft.coef, detail::poly_power(ft.term.kind));
        else
            rest.push_back(&ft);
    }
    std::sort(poly.begin(), poly.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });

    std::vector<std::pair<double, std::string>> chunks;
    if (!poly.empty()) {
        const int m = poly.front().second;
        if (poly.size() >= 2 && m > 0) {
            std::vector<std::pair<double, std::string>> inner;
            for (auto& [c, k] : poly)
                inner.emplace_back(c, detail::monomial_str(std::abs(c), k - m, var));
            chunks.emplace_back(1.0, "(" + detail::join_signed(inner) + ")*" + detail::xpow(var, m));
        } else {
            for (auto& [c, k] : poly)
                chunks.emplace_back(c, detail::monomial_str(std::abs(c), k, var));
        }
    }
    for (const auto* ft : rest) {
        const double mag = std::abs(ft->coef);
        const auto& t = ft->term;
        std::string s;
        switch (t.kind) {
            case TermKind::Inv: s = fmt_coef(mag) + "/" + var; break;
            case TermKind::InvQuad:
                s = fmt_coef(mag) + "/(" + var + "*" + var +
                    (t.c < 0 ? " - " : " + ") + fmt_coef(std::abs(t.c)) + ")";
                break;
            case TermKind::Sin: s = fmt_coef(mag) + "*sin(" + var + ")"; break;
            case TermKind::Cos: s = fmt_coef(mag) + "*cos(" + var + ")"; break;
            case TermKind::Exp: s = fmt_coef(mag) + "*exp(" + var + ")"; break;
            case TermKind::RationalX:
                s = fmt_coef(mag) + "*" + var + "/(" + var + "*" + var +
                    (t.d < 0 ? " - " : " + ") + fmt_coef(std::abs(t.d)) + "*" + var +
                    (t.e < 0 ? " - " : " + ") + fmt_coef(std::abs(t.e)) + ")";
                break;
            default: break;
        }
        chunks.emplace_back(ft->coef, s);
    }
    if (chunks.empty()) return "0";
    return detail::join_signed(chunks);
}

// ---- inner-parameter search ----

namespace detail {

/// Golden-section minimization of f over [lo, hi].
inline double golden_min(const std::function<double(double)>& f, double lo, double hi,
                         int iters = 120) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters && b - a > 1e-12; ++i) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - inv_phi * (b - a); f1 = f(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + inv_phi * (b - a); f2 = f(x2);
        }
    }
    return f1 < f2 ? x1 : x2;
}

/// Sum of squared residuals of the LSQ fit of ys on the given columns.
inline double lsq_sse(const Eigen::MatrixXd& A, const Eigen::VectorXd& y) {
    Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
    return (A * c - y).squaredNorm();
}

/// Minimum and maximum of q(x) = x^2 + d x + e over [lo, hi].
inline std::pair<double, double> quad_range(double d, double e, double lo, double hi) {
    auto q = [&](double x) { return x * x + d * x + e; };
    double qmin = std::min(q(lo), q(hi));
    double qmax = std::max(q(lo), q(hi));
    const double v = -d / 2.0;
    if (v > lo && v < hi) qmin = std::min(qmin, q(v));
    return {qmin, qmax};
}

}  // namespace detail

// ---- fit_activation ----

/// Best-subset least squares over the instantiated grammar. Every subset of
/// size <= max_terms is solved exactly (Householder QR); the returned front is
/// strictly decreasing in loss as complexity grows. Inner constants of
/// rational terms are fitted first: c of 1/(x^2+c) by golden section on log c,
/// (d, e) of the template a*x + b + c*x/(x^2+dx+e) by a coarse grid scan plus
/// coordinate-descent refinement from the 3 best cells. Rank-deficient
/// subsets drop their dependent columns (one warning per call).
inline std::vector<SymbolicFit> fit_activation(std::span<const double> xs,
                                               std::span<const double> ys,
                                               const BasisGrammar& grammar, int max_terms) {
    require(xs.size() == ys.size(), "fit_activation: xs/ys length mismatch");
    require(xs.size() >= 10, "fit_activation: need at least 10 samples");
    require(max_terms >= 1, "fit_activation: max_terms must be positive");
    const int n = int(xs.size());

    const double lo = *std::min_element(xs.begin(), xs.end());
    const double hi = *std::max_element(xs.begin(), xs.end());
    const bool near_zero = lo <= 1e-3 && hi >= -1e-3;

    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = ys[size_t(i)];

    std::vector<BasisTerm> terms = {{TermKind::One}, {TermKind::X}, {TermKind::X2},
                                    {TermKind::X3}};
    if (grammar.rational && !near_zero) {
        terms.push_back({TermKind::Inv});

        // 1/(x^2+c): golden section on log c against an affine-plus-term fit.
        auto invquad_sse = [&](double logc) {
            const double c = std::exp(logc);
            Eigen::MatrixXd A(n, 2);
            for (int i = 0; i < n; ++i) {
                A(i, 0) = 1.0;
                A(i, 1) = 1.0 / (xs[size_t(i)] * xs[size_t(i)] + c);
            }
            return detail::lsq_sse(A, y);
        };
        BasisTerm iq{TermKind::InvQuad};
        iq.c = std::exp(detail::golden_min(invquad_sse, std::log(1e-2), std::log(1e2)));
        terms.push_back(iq);

        // x/(x^2+dx+e): SSE of the full template, guarded so the denominator
        // cannot cross zero inside the sample range.
        auto ratx_sse = [&](double d, double e) {
            auto [qmin, qmax] = detail::quad_range(d, e, lo, hi);
            if (!(qmin > 1e-6 || qmax < -1e-6)) return 1e300;
            Eigen::MatrixXd A(n, 3);
            for (int i = 0; i < n; ++i) {
                const double x = xs[size_t(i)];
                A(i, 0) = 1.0;
                A(i, 1) = x;
                A(i, 2) = x / (x * x + d * x + e);
            }
            return detail::lsq_sse(A, y);
        };
        std::vector<std::pair<double, std::pair<double, double>>> cells;
        for (int id = 0; id <= 40; ++id)
            for (int ie = 0; ie <= 40; ++ie) {
                const double d = -10.0 + 0.5 * id, e = -10.0 + 0.5 * ie;
                cells.push_back({ratx_sse(d, e), {d, e}});
            }
        std::sort(cells.begin(), cells.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        double best_sse = std::numeric_limits<double>::infinity();
        BasisTerm rx{TermKind::RationalX};
        bool rx_ok = false;
        for (int r = 0; r < 3 && r < int(cells.size()); ++r) {
            if (cells[size_t(r)].first >= 1e300) break;
            double d = cells[size_t(r)].second.first, e = cells[size_t(r)].second.second;
            for (int round = 0; round < 10; ++round) {
                d = detail::golden_min([&](double dd) { return ratx_sse(dd, e); }, -10.0, 10.0);
                e = detail::golden_min([&](double ee) { return ratx_sse(d, ee); }, -10.0, 10.0);
            }
            const double sse = ratx_sse(d, e);
            if (sse < best_sse) { best_sse = sse; rx.d = d; rx.e = e; rx_ok = true; }
        }
        if (rx_ok) terms.push_back(rx);
    }
    if (grammar.trig) {
        terms.push_back({TermKind::Sin});
        terms.push_back({TermKind::Cos});
    }
    if (grammar.exp) terms.push_back({TermKind::Exp});

    const int T = int(terms.size());
    Eigen::MatrixXd design(n, T);
    for (int j = 0; j < T; ++j)
        for (int i = 0; i < n; ++i) design(i, j) = eval_term(terms[size_t(j)], xs[size_t(i)]);

    // enumerate subsets of each size up to max_terms
    std::vector<SymbolicFit> candidates;
    int dropped = 0;
    const int kmax = std::min(max_terms, T);
    std::vector<int> idx;
    auto solve_subset = [&](const std::vector<int>& sub) {
        Eigen::MatrixXd A(n, int(sub.size()));
        for (size_t j = 0; j < sub.size(); ++j) A.col(int(j)) = design.col(sub[j]);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
        std::vector<int> kept = sub;
        if (qr.rank() < int(sub.size())) {
            ++dropped;
            const auto perm = qr.colsPermutation().indices();
            std::vector<int> ind;
            for (int j = 0; j < qr.rank(); ++j) ind.push_back(sub[size_t(perm[j])]);
            std::sort(ind.begin(), ind.end());
            if (ind.empty()) return;
            kept = ind;
            A.resize(n, int(kept.size()));
            for (size_t j = 0; j < kept.size(); ++j) A.col(int(j)) = design.col(kept[j]);
            qr.compute(A);
        }
        Eigen::VectorXd coef = qr.solve(y);
        SymbolicFit fit;
        for (size_t j = 0; j < kept.size(); ++j)
            fit.terms.push_back({terms[size_t(kept[j])], coef[int(j)]});
        fit.complexity = expression_complexity(fit.terms);
        fit.loss = (A * coef - y).squaredNorm() / n;
        candidates.push_back(std::move(fit));
    };
    for (int k = 1; k <= kmax; ++k) {
        idx.assign(size_t(k), 0);
        for (int j = 0; j < k; ++j) idx[size_t(j)] = j;
        while (true) {
            solve_subset(idx);
            int j = k - 1;
            while (j >= 0 && idx[size_t(j)] == T - k + j) --j;
            if (j < 0) break;
            ++idx[size_t(j)];
            for (int q = j + 1; q < k; ++q) idx[size_t(q)] = idx[size_t(q - 1)] + 1;
        }
    }
    if (dropped > 0)
        std::cerr << "fit_activation: dropped dependent terms in " << dropped
                  << " candidate subset(s)\n";

    std::sort(candidates.begin(), candidates.end(), [](const SymbolicFit& a, const SymbolicFit& b) {
        if (a.complexity != b.complexity) return a.complexity < b.complexity;
        return a.loss < b.loss;
    });
    std::vector<SymbolicFit> front;
    double best = std::numeric_limits<double>::infinity();
    for (auto& f : candidates)
        if (f.loss < best) {
            best = f.loss;
            front.push_back(std::move(f));
        }
    return front;
}

// ---- global sparse regression ----

/// Monomial in the state variables: product over dims of u_i^powers[i].
struct LibraryTerm {
    std::vector<int> powers;
};

struct CandidateLibrary {
    int dim = 0;
    std::vector<LibraryTerm> terms;

    /// {x, y, xy, x^2, y^2, 1} for 2-state systems.
    static CandidateLibrary quadratic_2d() {
        CandidateLibrary lib;
        lib.dim = 2;
        lib.terms = {{{1, 0}}, {{0, 1}}, {{1, 1}}, {{2, 0}}, {{0, 2}}, {{0, 0}}};
        return lib;
    }
};

inline double eval_library_term(const LibraryTerm& t, std::span<const double> u) {
    double p = 1.0;
    for (size_t i = 0; i < t.powers.size(); ++i)
        for (int k = 0; k < t.powers[i]; ++k) p *= u[i];
    return p;
}

/// Sequentially-thresholded least squares (one pass per output dimension):
/// solve, zero coefficients below sparsity_threshold, repeat on the surviving
/// terms until the active set is stable. Returns [out_dim][n_terms].
inline std::vector<std::vector<double>> fit_global(
    const std::vector<std::vector<double>>& inputs, const std::vector<std::vector<double>>& outputs,
    const CandidateLibrary& lib, double sparsity_threshold = 0.05) {
    require(!lib.terms.empty() && lib.dim > 0, "fit_global: empty library");
    require(inputs.size() == outputs.size(), "fit_global: inputs/outputs length mismatch");
    const int n = int(inputs.size());
    const int T = int(lib.terms.size());
    require(n >= 5 * T, "fit_global: need at least 5 samples per library term");
    for (auto& u : inputs) require(int(u.size()) == lib.dim, "fit_global: input dim mismatch");
    const int out_dim = int(outputs.front().size());
    for (auto& f : outputs) require(int(f.size()) == out_dim, "fit_global: ragged outputs");

    Eigen::MatrixXd A(n, T);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < T; ++j) A(i, j) = eval_library_term(lib.terms[size_t(j)], inputs[size_t(i)]);
    require(Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(A).rank() == T,
            "fit_global: library terms linearly dependent on the sample set");

    std::vector<std::vector<double>> result(size_t(out_dim), std::vector<double>(size_t(T), 0.0));
    for (int j = 0; j < out_dim; ++j) {
        Eigen::VectorXd b(n);
        double bmax = 0.0;
        for (int i = 0; i < n; ++i) {
            b[i] = outputs[size_t(i)][size_t(j)];
            bmax = std::max(bmax, std::abs(b[i]));
        }
        std::vector<int> active(static_cast<size_t>(T));
        for (int t = 0; t < T; ++t) active[size_t(t)] = t;
        Eigen::VectorXd coef;
        for (int iter = 0; iter < 100 && !active.empty(); ++iter) {
            Eigen::MatrixXd sub(n, int(active.size()));
            for (size_t q = 0; q < active.size(); ++q) sub.col(int(q)) = A.col(active[q]);
            coef = sub.colPivHouseholderQr().solve(b);
            std::vector<int> next;
            for (size_t q = 0; q < active.size(); ++q)
                if (std::abs(coef[int(q)]) >= sparsity_threshold) next.push_back(active[q]);
            if (next == active) break;
            active = std::move(next);
        }
        if (active.empty()) {
            if (bmax <= 1e-12) continue;  // genuinely zero output: all-zero row
            throw ContractError("fit_global: library cannot explain data");
        }
        for (size_t q = 0; q < active.size(); ++q) result[size_t(j)][size_t(active[q])] = coef[int(q)];
    }
    return result;
}

/// "1.5*x - 1*x*y" style rendering of one output's sparse coefficients.
inline std::string render_library_fit(std::span<const double> coefs, const CandidateLibrary& lib,
                                      const std::vector<std::string>& vars) {
    require(int(coefs.size()) == int(lib.terms.size()), "render_library_fit: length mismatch");
    require(int(vars.size()) == lib.dim, "render_library_fit: need one name per dim");
    std::vector<std::pair<double, std::string>> chunks;
    for (size_t t = 0; t < lib.terms.size(); ++t) {
        if (coefs[t] == 0.0) continue;
        std::string s = detail::fmt_coef(std::abs(coefs[t]));
        for (size_t i = 0; i < lib.terms[t].powers.size(); ++i)
            for (int k = 0; k < lib.terms[t].powers[i]; ++k) s += "*" + vars[i];
        chunks.emplace_back(coefs[t], s);
    }
    if (chunks.empty()) return "0";
    return detail::join_signed(chunks);
}

/// Autonomous ODE whose right-hand side is the fitted library expansion, so a
/// recovered system can be integrated like any trained model.
inline OdeSystem library_system(const CandidateLibrary& lib,
                                std::vector<std::vector<double>> coefs) {
    require(int(coefs.size()) == lib.dim, "library_system: need state-dim outputs");
    for (auto& c : coefs)
        require(c.size() == lib.terms.size(), "library_system: coefficient length mismatch");
    OdeSystem sys;
    sys.dim = lib.dim;
    sys.n_params = 0;
    sys.rhs = [lib, coefs](double, std::span<const double> u, std::span<const double>,
                           std::span<double> du) {
        for (size_t j = 0; j < coefs.size(); ++j) {
            double s = 0.0;
            for (size_t t = 0; t < lib.terms.size(); ++t)
                if (coefs[j][t] != 0.0) s += coefs[j][t] * eval_library_term(lib.terms[t], u);
            du[j] = s;
        }
    };
    return sys;
}

// ---- whole-network replacement ----

/// One fitted expression per edge; layer output a is the sum over inputs b of
/// fits[a*in + b] evaluated at the raw node input (any tanh normalization of
/// the original activation is absorbed into the fit).
struct SymbolicLayer {
    int in = 0, out = 0;
    std::vector<SymbolicFit> fits;  // [out*in], row-major by output
};

struct SymbolicNet {
    std::vector<SymbolicLayer> layers;
};

inline std::vector<double> symbolic_forward(const SymbolicNet& net, std::span<const double> x) {
    std::vector<double> cur(x.begin(), x.end());
    for (const auto& l : net.layers) {
        require(int(cur.size()) == l.in, "symbolic_forward: dim mismatch");
        std::vector<double> nxt(size_t(l.out), 0.0);
        for (int a = 0; a < l.out; ++a)
            for (int b = 0; b < l.in; ++b)
                nxt[size_t(a)] += evaluate_expression(l.fits[size_t(a * l.in + b)], cur[size_t(b)]);
        cur = std::move(nxt);
    }
    return cur;
}

/// Fits every edge activation of a KAN over the node inputs observed while
/// forwarding the given samples; each edge keeps the lowest-loss front entry.
inline SymbolicNet fit_network(const Network& net, const std::vector<std::vector<double>>& samples,
                               const BasisGrammar& grammar, int max_terms) {
    require(net.kind == NetworkKind::Kan, "fit_network: KAN only");
    require(!samples.empty(), "fit_network: no samples");
    const bool normalize = net.norm == InputNorm::Tanh;
    const size_t L = net.kan_layers.size();

    NetWorkspace ws(net);
    std::vector<std::vector<std::vector<double>>> node_in(L);
    for (size_t k = 0; k < L; ++k)
        node_in[k].resize(size_t(net.kan_layers[k].in_dim));
    for (const auto& s : samples) {
        net_forward_ws(net, s, ws);
        for (size_t k = 0; k < L; ++k)
            for (size_t b = 0; b < node_in[k].size(); ++b)
                node_in[k][b].push_back(ws.values[k][b]);
    }

    SymbolicNet out;
    for (size_t k = 0; k < L; ++k) {
        const auto& l = net.kan_layers[k];
        SymbolicLayer sl;
        sl.in = l.in_dim;
        sl.out = l.out_dim;
        for (int a = 0; a < l.out_dim; ++a)
            for (int b = 0; b < l.in_dim; ++b) {
                auto curve = activation_curve(l, a, b, node_in[k][size_t(b)], normalize);
                auto front = fit_activation(node_in[k][size_t(b)], curve, grammar, max_terms);
                sl.fits.push_back(front.back());
            }
        out.layers.push_back(std::move(sl));
    }
    return out;
}

// ---- reports ----

/// CSV table of a Pareto front: complexity, loss, infix expression.
inline std::string report_csv(std::span<const SymbolicFit> front, const std::string& var = "x") {
    std::string out = "complexity,loss,expression\n";
    char buf[64];
    for (const auto& f : front) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,", f.complexity, f.loss);
        out += buf;
        out += render_expression(f, var);
        out += "\n";
    }
    return out;
}

/// Aligned plain-text table of the same front.
inline std::string report_text(std::span<const SymbolicFit> front, const std::string& var = "x") {
    std::string out = "complexity  loss        expression\n";
    char buf[64];
    for (const auto& f : front) {
        std::snprintf(buf, sizeof buf, "%-11d %-11.4e ", f.complexity, f.loss);
        out += buf;
        out += render_expression(f, var);
        out += "\n";
    }
    return out;
}

}  // namespace kanode
