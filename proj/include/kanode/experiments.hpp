#pragma once

#include <filesystem>
#include <functional>
#include <future>
#include <string>
#include <thread>
#include <vector>

#include "kanode/io.hpp"
#include "kanode/problems.hpp"
#include "kanode/pruning.hpp"
#include "kanode/symbolic.hpp"

namespace kanode {

// ---- experiment wiring ----

/// Which ground-truth dataset an experiment id trains on.
inline std::string dataset_id(const std::string& id) {
    if (id == "lv-sparse" || id == "lv-scaling") return "lv";
    return id;
}

/// Hidden-physics runs learn a scalar source inside a known PDE; everything
/// else learns the whole right-hand side.
inline bool hidden_physics_id(const std::string& id) {
    return id == "fisher-kpp" || id == "allen-cahn-hidden";
}

inline OdeSystem experiment_system(const std::string& id, const Dataset& ds, const Network& proto) {
    if (id == "fisher-kpp") {
        require(ds.grid.has_value(), "experiment_system: fisher dataset lost its grid");
        return fisher_kpp_hybrid(*ds.grid, 0.2, proto);
    }
    if (id == "allen-cahn-hidden") {
        require(ds.grid.has_value(), "experiment_system: allen dataset lost its grid");
        return allen_cahn_hybrid(*ds.grid, proto);
    }
    return make_network_system(proto);
}

/// True source term hidden inside the PDE, for activation-curve comparison.
inline std::function<double(double)> hidden_truth(const std::string& id) {
    if (id == "fisher-kpp") return [](double u) { return u * (1.0 - u); };
    if (id == "allen-cahn-hidden") return [](double u) { return 5.0 * u - 5.0 * u * u * u; };
    throw ContractError("hidden_truth: '" + id + "' has no hidden source term");
}

/// Scalar inputs a hidden-physics symbolic fit is judged on: the state
/// values the training data actually visits (the learned source is only
/// constrained there), sorted for reproducibility.
inline std::vector<double> hidden_fit_inputs(const Dataset& ds) {
    std::vector<double> us;
    for (const auto& s : ds.train.states) us.insert(us.end(), s.begin(), s.end());
    std::sort(us.begin(), us.end());
    return us;
}

inline BasisGrammar hidden_grammar(const std::string& id) {
    return id == "fisher-kpp" ? BasisGrammar::full() : BasisGrammar::arithmetic();
}

namespace detail {

inline std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

/// Loss history CSV. Wall time is deliberately left out so identical runs
/// produce identical bytes.
inline void write_loss_history(const std::string& path, const std::vector<LossReport>& hist) {
    std::vector<std::vector<double>> rows;
    rows.reserve(hist.size());
    for (const auto& r : hist)
        rows.push_back({double(r.epoch), r.train_mse, r.test_mse, r.l1, r.total, r.lr});
    write_csv(path, {"epoch", "train_mse", "test_mse", "l1", "total", "lr"}, rows);
}

/// Merged, sorted train+test times (the two splits never share a time).
inline std::vector<double> union_times(const Dataset& ds) {
    std::vector<double> t = ds.train.times;
    t.insert(t.end(), ds.test.times.begin(), ds.test.times.end());
    std::sort(t.begin(), t.end());
    return t;
}

/// prediction CSV: t, split (0 train / 1 test), model state, true state.
/// Rows cover whatever part of the span the prediction reached.
inline void write_prediction(const std::string& path, const Trajectory& pred, const Dataset& ds) {
    const size_t d = ds.u0.size();
    std::vector<std::string> header = {"t", "split"};
    for (size_t j = 0; j < d; ++j) header.push_back("pred_" + std::to_string(j));
    for (size_t j = 0; j < d; ++j) header.push_back("true_" + std::to_string(j));

    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < pred.times.size(); ++i) {
        const double t = pred.times[i];
        int split = -1;
        const std::vector<double>* truth = nullptr;
        for (size_t a = 0; a < ds.train.times.size(); ++a)
            if (ds.train.times[a] == t) {
                split = 0;
                truth = &ds.train.states[a];
            }
        for (size_t b = 0; b < ds.test.times.size(); ++b)
            if (ds.test.times[b] == t) {
                split = 1;
                truth = &ds.test.states[b];
            }
        if (!truth) continue;  // partial solves may stop between samples
        std::vector<double> row = {t, double(split)};
        row.insert(row.end(), pred.states[i].begin(), pred.states[i].end());
        row.insert(row.end(), truth->begin(), truth->end());
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

/// MSE of the prediction restricted to the rows of `ref`; NaN when the
/// prediction does not cover every reference time.
inline double split_mse(const Trajectory& pred, const Trajectory& ref) {
    Trajectory sub;
    for (size_t i = 0; i < pred.times.size(); ++i)
        for (size_t a = 0; a < ref.times.size(); ++a)
            if (ref.times[a] == pred.times[i]) {
                sub.times.push_back(pred.times[i]);
                sub.states.push_back(pred.states[i]);
            }
    if (sub.times.size() != ref.times.size()) return std::numeric_limits<double>::quiet_NaN();
    return mse_loss(sub, ref);
}

/// Observed range of scalar node inputs across the training split.
inline std::pair<double, double> state_range(const Trajectory& tr) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& s : tr.states)
        for (double v : s) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    require(lo < hi, "state_range: degenerate data");
    return {lo, hi};
}

template <class F>
inline void parallel_for(int n, F&& body) {
    const int workers = int(std::min(4u, std::max(1u, std::thread::hardware_concurrency())));
    if (workers <= 1 || n < 2 * workers) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::future<void>> fs;
    for (int c = 0; c < workers; ++c)
        fs.push_back(std::async(std::launch::async, [&body, c, n, workers] {
            for (int i = c; i < n; i += workers) body(i);
        }));
    for (auto& f : fs) f.get();  // rethrows worker exceptions
}

}  // namespace detail

// ---- run_experiment ----

struct RunResult {
    ExperimentConfig cfg;
    TrainResult training;
    Trajectory pred;                 // final model rolled out over train+test times
    double train_mse = std::numeric_limits<double>::quiet_NaN();
    double test_mse = std::numeric_limits<double>::quiet_NaN();
    double field_mse = std::numeric_limits<double>::quiet_NaN();  // both splits pooled
    std::vector<SymbolicFit> front;  // hidden-physics runs only
    std::vector<std::string> files;
};

/// Trains one configured experiment and writes its artifact set:
/// loss_history.csv, checkpoint.json, prediction.csv, manifest.json, plus
/// activation.csv / symbolic.csv / symbolic.txt for hidden-physics runs.
inline RunResult run_experiment(const ExperimentConfig& cfg) {
    auto defs = detail::id_defaults(cfg.id);
    if (!defs) throw ConfigError({"unknown experiment id '" + cfg.id + "'"});
    const std::string started = iso_utc_now();

    Dataset ds = make_dataset(dataset_id(cfg.id));
    Network net0 = init_params(cfg.arch, cfg.seed);
    require(net0.input_dim() == defs->state_in && net0.output_dim() == defs->state_out,
            "run_experiment: architecture does not match the experiment state");
    OdeSystem sys = experiment_system(cfg.id, ds, net0);

    RunResult out;
    out.cfg = cfg;
    out.training = train(net0, sys, ds.u0, ds.train, &ds.test, cfg.train);

    std::filesystem::create_directories(cfg.out_dir);
    auto emit = [&](const std::string& name) { out.files.push_back(name); };

    detail::write_loss_history(detail::join_path(cfg.out_dir, "loss_history.csv"),
                               out.training.history);
    emit("loss_history.csv");
    // the delivered model is the best-train-loss checkpoint, not the last
    // iterate (ADAM at fixed lr oscillates near convergence)
    save_checkpoint(out.training.best, detail::join_path(cfg.out_dir, "checkpoint.json"));
    emit("checkpoint.json");

    // roll the delivered model over the full window; keep whatever a
    // diverging solve managed to cover
    const std::vector<double> all_t = detail::union_times(ds);
    const std::vector<double> theta = out.training.best.flatten();
    try {
        out.pred = tsit5_solve(sys, ds.u0, all_t.front(), all_t.back(), theta, all_t,
                               cfg.train.rtol, cfg.train.atol);
    } catch (const SolveDiverged& e) {
        out.pred = e.partial;
    }
    out.train_mse = detail::split_mse(out.pred, ds.train);
    out.test_mse = detail::split_mse(out.pred, ds.test);
    if (std::isfinite(out.train_mse) && std::isfinite(out.test_mse)) {
        const double nn = double(ds.train.times.size() + ds.test.times.size());
        out.field_mse = (out.train_mse * double(ds.train.times.size()) +
                         out.test_mse * double(ds.test.times.size())) /
                        nn;
    }
    detail::write_prediction(detail::join_path(cfg.out_dir, "prediction.csv"), out.pred, ds);
    emit("prediction.csv");

    if (hidden_physics_id(cfg.id)) {
        auto [lo, hi] = detail::state_range(ds.train);
        auto xs = linspace(lo, hi, 401);
        auto truth = hidden_truth(cfg.id);
        std::vector<double> ys(xs.size());
        std::vector<std::vector<double>> rows;
        for (size_t i = 0; i < xs.size(); ++i) {
            ys[i] = net_forward(out.training.best, std::span<const double>(&xs[i], 1))[0];
            rows.push_back({xs[i], ys[i], truth(xs[i])});
        }
        write_csv(detail::join_path(cfg.out_dir, "activation.csv"), {"x", "learned", "truth"},
                  rows);
        emit("activation.csv");
        const std::vector<double> us = hidden_fit_inputs(ds);
        std::vector<double> fs(us.size());
        for (size_t i = 0; i < us.size(); ++i)
            fs[i] = net_forward(out.training.best, std::span<const double>(&us[i], 1))[0];
        out.front = fit_activation(us, fs, hidden_grammar(cfg.id), 3);
        write_file(detail::join_path(cfg.out_dir, "symbolic.csv"), report_csv(out.front, "u"));
        emit("symbolic.csv");
        write_file(detail::join_path(cfg.out_dir, "symbolic.txt"), report_text(out.front, "u"));
        emit("symbolic.txt");
    }

    auto manifest = collect_manifest(render_config(cfg), cfg.seed, cfg.out_dir, out.files,
                                     started, iso_utc_now());
    write_manifest(cfg.out_dir, manifest);
    out.files.push_back("manifest.json");
    return out;
}

// ---- scaling study ----

/// Paper sweep for an id: LV compares 64/96/240-parameter KANs, Fisher-KPP
/// sweeps the grid size of the single-activation network.
inline std::vector<NetSpec> scaling_specs(const std::string& id) {
    if (id == "lv" || id == "lv-scaling" || id == "lv-sparse")
        return {NetSpec::kan({{2, 4, 3}, {4, 2, 3}}), NetSpec::kan({{2, 4, 5}, {4, 2, 5}}),
                NetSpec::kan({{2, 10, 5}, {10, 2, 5}})};
    if (id == "fisher-kpp")
        return {NetSpec::kan({{1, 1, 2}}), NetSpec::kan({{1, 1, 3}}), NetSpec::kan({{1, 1, 5}}),
                NetSpec::kan({{1, 1, 10}})};
    throw ConfigError({"no default architecture sweep for experiment id '" + id + "'"});
}

struct ScalingRow {
    int params = 0;
    double train_loss = std::numeric_limits<double>::quiet_NaN();
    double test_loss = std::numeric_limits<double>::quiet_NaN();
    bool ok = false;
    std::string note;  // failure reason when !ok
};

struct ScalingResult {
    std::vector<ScalingRow> rows;
    double slope = std::numeric_limits<double>::quiet_NaN();  // log-log train loss vs params
    std::vector<std::string> files;
};

/// Trains each architecture independently on the same data and seed, one
/// worker per run. A failed run marks its row and the study continues.
inline ScalingResult run_scaling_study(const ExperimentConfig& base,
                                       std::vector<NetSpec> archs = {}) {
    if (archs.empty()) archs = scaling_specs(base.id);
    require(!archs.empty(), "run_scaling_study: no architectures");
    const std::string started = iso_utc_now();
    const Dataset ds = make_dataset(dataset_id(base.id));

    ScalingResult out;
    out.rows.resize(archs.size());
    detail::parallel_for(int(archs.size()), [&](int i) {
        ScalingRow row;
        try {
            Network net0 = init_params(archs[size_t(i)], base.seed);
            row.params = net0.param_count();
            OdeSystem sys = experiment_system(base.id, ds, net0);
            TrainResult tr = train(net0, sys, ds.u0, ds.train, nullptr, base.train);
            const std::vector<double> theta = tr.best.flatten();
            Trajectory ptr = tsit5_solve(sys, ds.u0, ds.train.times.front(),
                                         ds.train.times.back(), theta, ds.train.times,
                                         base.train.rtol, base.train.atol);
            row.train_loss = mse_loss(ptr, ds.train);
            Trajectory pte = tsit5_solve(sys, ds.u0, ds.train.times.front(),
                                         ds.test.times.back(), theta, ds.test.times,
                                         base.train.rtol, base.train.atol);
            row.test_loss = mse_loss(pte, ds.test);
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.note = e.what();
        }
        out.rows[size_t(i)] = std::move(row);
    });

    // least-squares slope of log loss against log N over the successful rows
    std::vector<double> lx, ly;
    for (const auto& r : out.rows)
        if (r.ok && r.params > 0 && std::isfinite(r.train_loss) && r.train_loss > 0.0) {
            lx.push_back(std::log(double(r.params)));
            ly.push_back(std::log(r.train_loss));
        }
    if (lx.size() >= 2) {
        double mx = 0, my = 0;
        for (size_t i = 0; i < lx.size(); ++i) {
            mx += lx[i];
            my += ly[i];
        }
        mx /= double(lx.size());
        my /= double(lx.size());
        double num = 0, den = 0;
        for (size_t i = 0; i < lx.size(); ++i) {
            num += (lx[i] - mx) * (ly[i] - my);
            den += (lx[i] - mx) * (lx[i] - mx);
        }
        if (den > 0.0) out.slope = num / den;
    }

    std::filesystem::create_directories(base.out_dir);
    std::vector<std::vector<double>> rows;
    for (const auto& r : out.rows)
        rows.push_back({double(r.params), r.train_loss, r.test_loss, r.ok ? 0.0 : 1.0});
    write_csv(detail::join_path(base.out_dir, "scaling.csv"),
              {"params", "train_loss", "test_loss", "failed"}, rows);
    out.files.push_back("scaling.csv");
    write_file(detail::join_path(base.out_dir, "slope.txt"), fmt_g17(out.slope) + "\n");
    out.files.push_back("slope.txt");
    auto manifest = collect_manifest(render_config(base), base.seed, base.out_dir, out.files,
                                     started, iso_utc_now());
    write_manifest(base.out_dir, manifest);
    out.files.push_back("manifest.json");
    return out;
}

// ---- gradient-error landscape ----

struct LandscapeGrid {
    double x0 = 0.0, x1 = 6.0;
    double y0 = 0.0, y1 = 4.0;
    int nx = 61, ny = 41;

    /// The (x, y) window the LV generalization maps are drawn over.
    static LandscapeGrid lv_box() { return {}; }
};

struct LandscapeField {
    std::vector<double> xs, ys;
    std::vector<std::vector<double>> ex, ey;  // [iy][ix] absolute errors
    double mean_err = 0.0;                    // both components pooled
};

/// Absolute per-cell error of each gradient component between a model
/// right-hand side and the truth, evaluated over a rectangular grid.
template <class Model, class Truth>
inline LandscapeField gradient_error_landscape(Model&& model, Truth&& truth,
                                               const LandscapeGrid& grid) {
    require(grid.nx >= 2 && grid.ny >= 2, "gradient_error_landscape: resolution must be >= 2");
    require(grid.x1 > grid.x0 && grid.y1 > grid.y0, "gradient_error_landscape: empty box");
    LandscapeField f;
    f.xs = linspace(grid.x0, grid.x1, grid.nx);
    f.ys = linspace(grid.y0, grid.y1, grid.ny);
    f.ex.assign(size_t(grid.ny), std::vector<double>(size_t(grid.nx), 0.0));
    f.ey = f.ex;
    detail::parallel_for(grid.ny, [&](int iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            const double x = f.xs[size_t(ix)], y = f.ys[size_t(iy)];
            const std::array<double, 2> m = model(x, y);
            const std::array<double, 2> t = truth(x, y);
            f.ex[size_t(iy)][size_t(ix)] = std::abs(m[0] - t[0]);
            f.ey[size_t(iy)][size_t(ix)] = std::abs(m[1] - t[1]);
        }
    });
    double acc = 0.0;
    for (int iy = 0; iy < grid.ny; ++iy)
        for (int ix = 0; ix < grid.nx; ++ix)
            acc += 0.5 * (f.ex[size_t(iy)][size_t(ix)] + f.ey[size_t(iy)][size_t(ix)]);
    f.mean_err = acc / double(grid.nx * grid.ny);
    return f;
}

/// Wraps a 2-state network as an (x, y) -> (dx/dt, dy/dt) gradient getter.
inline std::function<std::array<double, 2>(double, double)> network_rhs2(const Network& net) {
    require(net.input_dim() == 2 && net.output_dim() == 2, "network_rhs2: need a 2 -> 2 network");
    auto n = std::make_shared<const Network>(net);
    return [n](double x, double y) {
        const std::array<double, 2> in = {x, y};
        auto out = net_forward(*n, in);
        return std::array<double, 2>{out[0], out[1]};
    };
}

/// The (x, y) orbit covered by the LV train+test window, for contour overlay.
inline std::vector<std::array<double, 2>> lv_contour(int n = 561) {
    require(n >= 2, "lv_contour: need n >= 2");
    auto ts = linspace(0.0, 14.0, n);
    const std::vector<double> u0 = {1.0, 1.0};
    Trajectory tr = tsit5_solve(lv_system(), u0, 0.0, 14.0, {}, ts, 1e-8, 1e-8);
    std::vector<std::array<double, 2>> pts;
    pts.reserve(tr.states.size());
    for (const auto& s : tr.states) pts.push_back({s[0], s[1]});
    return pts;
}

/// landscape.csv holds the per-cell heatmap; contour.csv the training-orbit
/// overlay coordinates.
inline std::vector<std::string> write_landscape(const std::string& dir, const LandscapeField& f,
                                                const std::vector<std::array<double, 2>>& contour) {
    std::filesystem::create_directories(dir);
    std::vector<std::vector<double>> rows;
    for (size_t iy = 0; iy < f.ys.size(); ++iy)
        for (size_t ix = 0; ix < f.xs.size(); ++ix)
            rows.push_back({f.xs[ix], f.ys[iy], f.ex[iy][ix], f.ey[iy][ix]});
    write_csv(detail::join_path(dir, "landscape.csv"), {"x", "y", "err_x", "err_y"}, rows);
    std::vector<std::vector<double>> crows;
    for (const auto& p : contour) crows.push_back({p[0], p[1]});
    write_csv(detail::join_path(dir, "contour.csv"), {"x", "y"}, crows);
    return {"landscape.csv", "contour.csv"};
}

// ---- sparsify / prune / retrain / symbolify ----

struct SparseResult {
    TrainResult dense_tr, sparse_tr, retrain_tr;
    Network pruned;  // architecture after pruning, before retraining
    int params_before = 0;
    int params_after = 0;
    std::vector<int> hidden_widths;                  // after pruning
    std::vector<std::vector<SymbolicFit>> fronts;    // per edge, layer-major (a * in + b)
    SymbolicNet symbolic;                            // best front entry per edge
    std::vector<std::vector<double>> global_coefs;   // empty when the global fit fails
    std::string global_note;
    std::vector<std::string> files;
};

/// Full interpretability pipeline on the LV system: train dense, re-train
/// under L1, prune quiet nodes, retrain the small net, then fit per-edge
/// symbolic expressions and a global library regression of the learned field.
inline SparseResult run_sparse_pipeline(const ExperimentConfig& cfg) {
    auto defs = detail::id_defaults(cfg.id);
    if (!defs || defs->state_in != 2 || defs->state_out != 2)
        throw ConfigError({"run_sparse_pipeline: needs an lv-family experiment id"});
    const std::string started = iso_utc_now();
    Dataset ds = make_dataset("lv");
    std::filesystem::create_directories(cfg.out_dir);

    SparseResult out;
    auto emit = [&](const std::string& name) { out.files.push_back(name); };
    auto stage_files = [&](const char* tag, const TrainResult& tr, const Network& product) {
        detail::write_loss_history(
            detail::join_path(cfg.out_dir, std::string("loss_") + tag + ".csv"), tr.history);
        emit(std::string("loss_") + tag + ".csv");
        save_checkpoint(product, detail::join_path(cfg.out_dir,
                                                   std::string("checkpoint_") + tag + ".json"));
        emit(std::string("checkpoint_") + tag + ".json");
    };

    Network net0 = init_params(cfg.arch, cfg.seed);
    out.params_before = net0.param_count();

    TrainConfig plain = cfg.train;
    plain.gamma_sp = 0.0;
    out.dense_tr = train(net0, make_network_system(net0), ds.u0, ds.train, &ds.test, plain);
    stage_files("dense", out.dense_tr, out.dense_tr.best);

    // The sparsity stage continues from the dense best and runs in blocks,
    // keeping the checkpoint whose activation record prunes narrowest: ADAM
    // at fixed lr parks silenced weights in a limit cycle of amplitude ~lr,
    // so node activity dips below gamma_pr intermittently instead of
    // settling there. Blocks stop once the width has stopped improving
    // (convergence judged structurally, not by loss).
    constexpr int kSparseBlocks = 12, kSparsePatience = 4;
    Network sparse_product = out.dense_tr.best;
    {
        Network cur = out.dense_tr.best;
        int best_width = std::numeric_limits<int>::max();
        int since = 0;
        for (int b = 0; b < kSparseBlocks && since < kSparsePatience; ++b, ++since) {
            TrainResult tr =
                train(cur, make_network_system(cur), ds.u0, ds.train, &ds.test, cfg.train);
            cur = tr.net;
            for (LossReport r : tr.history) {
                r.epoch += b * int(cfg.train.epochs);
                out.sparse_tr.history.push_back(r);
            }
            out.sparse_tr.divergences += tr.divergences;
            if (tr.best_mse < out.sparse_tr.best_mse) {
                out.sparse_tr.best_mse = tr.best_mse;
                out.sparse_tr.best = tr.best;
            }
            int width = std::numeric_limits<int>::max();
            try {
                const auto dims =
                    prune(cur, record_activations(cur, ds.train.states), cfg.gamma_pr)
                        .level_dims();
                width = 0;
                for (size_t k = 1; k + 1 < dims.size(); ++k) width += dims[k];
            } catch (const ContractError&) {
                // this block's record would empty a layer; not a candidate
            }
            if (width < best_width) {
                best_width = width;
                sparse_product = cur;
                since = 0;
            }
        }
        out.sparse_tr.net = cur;
    }
    stage_files("sparse", out.sparse_tr, sparse_product);

    // node activity is judged on the training inputs, then thresholded
    auto rec = record_activations(sparse_product, ds.train.states);
    out.pruned = prune(sparse_product, rec, cfg.gamma_pr);
    out.params_after = out.pruned.param_count();
    const auto dims = out.pruned.level_dims();
    for (size_t k = 1; k + 1 < dims.size(); ++k) out.hidden_widths.push_back(dims[size_t(k)]);
    save_checkpoint(out.pruned, detail::join_path(cfg.out_dir, "checkpoint_pruned.json"));
    emit("checkpoint_pruned.json");

    out.retrain_tr = train(out.pruned, make_network_system(out.pruned), ds.u0, ds.train,
                           &ds.test, plain);
    stage_files("retrained", out.retrain_tr, out.retrain_tr.best);
    const Network& model = out.retrain_tr.best;

    // sample the learned model's own orbit densely across the training window
    std::vector<std::vector<double>> samples;
    try {
        auto ts = linspace(ds.train.times.front(), ds.train.times.back(), 351);
        OdeSystem msys = make_network_system(model);
        Trajectory orbit = tsit5_solve(msys, ds.u0, ts.front(), ts.back(), model.flatten(), ts,
                                       cfg.train.rtol, cfg.train.atol);
        samples = orbit.states;
    } catch (const SolveDiverged&) {
        samples = ds.train.states;
    }

    // per-edge Pareto fronts over the node inputs those samples produce
    {
        const bool normalize = model.norm == InputNorm::Tanh;
        NetWorkspace ws(model);
        std::vector<std::vector<std::vector<double>>> node_in(model.kan_layers.size());
        for (size_t k = 0; k < node_in.size(); ++k)
            node_in[k].resize(size_t(model.kan_layers[k].in_dim));
        for (const auto& s : samples) {
            net_forward_ws(model, s, ws);
            for (size_t k = 0; k < node_in.size(); ++k)
                for (size_t b = 0; b < node_in[k].size(); ++b)
                    node_in[k][b].push_back(ws.values[k][b]);
        }
        std::string csv = "layer,out,in,complexity,loss,expression\n";
        std::string txt;
        for (size_t k = 0; k < model.kan_layers.size(); ++k) {
            const auto& l = model.kan_layers[k];
            SymbolicLayer sl;
            sl.in = l.in_dim;
            sl.out = l.out_dim;
            for (int a = 0; a < l.out_dim; ++a)
                for (int b = 0; b < l.in_dim; ++b) {
                    auto curve = activation_curve(l, a, b, node_in[k][size_t(b)], normalize);
                    auto front = fit_activation(node_in[k][size_t(b)], curve,
                                                BasisGrammar::arithmetic(), 3);
                    const auto& best = front.back();
                    sl.fits.push_back(best);
                    for (const auto& fr : front)
                        csv += std::to_string(k) + "," + std::to_string(a) + "," +
                               std::to_string(b) + "," + std::to_string(fr.complexity) + "," +
                               fmt_g17(fr.loss) + "," + render_expression(fr) + "\n";
                    txt += "layer " + std::to_string(k) + " edge (" + std::to_string(a) + "," +
                           std::to_string(b) + ")\n" + report_text(front) + "\n";
                    out.fronts.push_back(std::move(front));
                }
            out.symbolic.layers.push_back(std::move(sl));
        }
        write_file(detail::join_path(cfg.out_dir, "symbolic_edges.csv"), csv);
        emit("symbolic_edges.csv");
        write_file(detail::join_path(cfg.out_dir, "symbolic_edges.txt"), txt);
        emit("symbolic_edges.txt");
    }

    // global sparse regression of the learned vector field
    {
        auto lib = CandidateLibrary::quadratic_2d();
        std::vector<std::vector<double>> outputs;
        outputs.reserve(samples.size());
        for (const auto& s : samples) outputs.push_back(net_forward(model, s));
        std::string txt;
        try {
            out.global_coefs = fit_global(samples, outputs, lib);
            const std::vector<std::string> vars = {"x", "y"};
            std::vector<std::vector<double>> rows;
            for (size_t d = 0; d < out.global_coefs.size(); ++d) {
                txt += "d" + vars[d] + "/dt = " +
                       render_library_fit(out.global_coefs[d], lib, vars) + "\n";
                rows.push_back(out.global_coefs[d]);
            }
            write_csv(detail::join_path(cfg.out_dir, "global_fit.csv"),
                      {"x", "y", "xy", "x2", "y2", "one"}, rows);
            emit("global_fit.csv");
        } catch (const std::exception& e) {
            out.global_note = e.what();
            txt = std::string("global fit failed: ") + e.what() + "\n";
        }
        write_file(detail::join_path(cfg.out_dir, "global_fit.txt"), txt);
        emit("global_fit.txt");
    }

    {
        std::string s;
        s += "params before: " + std::to_string(out.params_before) + "\n";
        s += "params after:  " + std::to_string(out.params_after) + "\n";
        s += "hidden widths:";
        for (int w : out.hidden_widths) s += " " + std::to_string(w);
        s += "\nretrained best train mse: " + fmt_g17(out.retrain_tr.best_mse) + "\n";
        write_file(detail::join_path(cfg.out_dir, "summary.txt"), s);
        emit("summary.txt");
    }

    auto manifest = collect_manifest(render_config(cfg), cfg.seed, cfg.out_dir, out.files,
                                     started, iso_utc_now());
    write_manifest(cfg.out_dir, manifest);
    out.files.push_back("manifest.json");
    return out;
}

}  // namespace kanode
