// kanode command line: config-driven training runs, scaling studies,
// generalization landscapes, and symbolic extraction from checkpoints.
//
// Exit codes: 0 success, 2 bad configuration or input files, 3 numerical
// failure.

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <random>
#include <string>

#include "kanode/experiments.hpp"

using namespace kanode;

namespace {

struct Overrides {
    std::optional<uint64_t> seed;
    std::optional<long> epochs;
    std::optional<std::string> out;
};

ExperimentConfig load_config(const std::string& path, const Overrides& ov) {
    ExperimentConfig cfg = parse_config(read_file(path));
    if (ov.seed) {
        cfg.seed = *ov.seed;
        cfg.train.seed = *ov.seed;
    }
    if (ov.epochs) {
        if (*ov.epochs < 1) throw ConfigError({"'--epochs' must be >= 1"});
        cfg.train.epochs = *ov.epochs;
    }
    if (ov.out) cfg.out_dir = *ov.out;
    return cfg;
}

void say_files(const std::string& dir, const std::vector<std::string>& files) {
    for (const auto& f : files) std::printf("wrote %s\n", detail::join_path(dir, f).c_str());
}

int cmd_run(const std::string& config_path, const Overrides& ov) {
    ExperimentConfig cfg = load_config(config_path, ov);
    if (cfg.id == "lv-sparse") {
        SparseResult res = run_sparse_pipeline(cfg);
        std::printf("pruned %d -> %d parameters (hidden width", res.params_before,
                    res.params_after);
        for (int w : res.hidden_widths) std::printf(" %d", w);
        std::printf(")\nretrained train mse %.6g\n", res.retrain_tr.best_mse);
        if (!res.global_note.empty()) std::printf("global fit: %s\n", res.global_note.c_str());
        say_files(cfg.out_dir, res.files);
        return 0;
    }
    RunResult res = run_experiment(cfg);
    std::printf("train mse %.6g  test mse %.6g  field mse %.6g\n", res.train_mse, res.test_mse,
                res.field_mse);
    if (res.training.early_stopped) std::printf("early stop reached\n");
    say_files(cfg.out_dir, res.files);
    return 0;
}

int cmd_scale(const std::string& config_path, const Overrides& ov) {
    ExperimentConfig cfg = load_config(config_path, ov);
    ScalingResult res = run_scaling_study(cfg);
    std::printf("%10s %14s %14s  %s\n", "params", "train_loss", "test_loss", "status");
    for (const auto& r : res.rows)
        std::printf("%10d %14.6g %14.6g  %s\n", r.params, r.train_loss, r.test_loss,
                    r.ok ? "ok" : r.note.c_str());
    std::printf("log-log slope %.4g\n", res.slope);
    say_files(cfg.out_dir, res.files);
    return 0;
}

int cmd_landscape(const std::string& ckpt_path, const std::string& config_path,
                  const Overrides& ov) {
    ExperimentConfig cfg = load_config(config_path, ov);
    auto defs = detail::id_defaults(cfg.id);
    if (!defs || defs->state_in != 2 || defs->state_out != 2)
        throw ConfigError({"landscape maps need an lv-family experiment id"});
    Network net = load_checkpoint(ckpt_path);
    if (net.input_dim() != 2 || net.output_dim() != 2)
        throw ConfigError({"checkpoint must hold a 2 -> 2 network, got " +
                           std::to_string(net.input_dim()) + " -> " +
                           std::to_string(net.output_dim())});
    auto truth = [](double x, double y) { return lotka_volterra_rhs(x, y); };
    LandscapeField f = gradient_error_landscape(network_rhs2(net), truth,
                                                LandscapeGrid::lv_box());
    auto files = write_landscape(cfg.out_dir, f, lv_contour());
    auto manifest = collect_manifest(render_config(cfg), cfg.seed, cfg.out_dir, files,
                                     iso_utc_now(), iso_utc_now());
    write_manifest(cfg.out_dir, manifest);
    files.push_back("manifest.json");
    std::printf("mean gradient error %.6g\n", f.mean_err);
    say_files(cfg.out_dir, files);
    return 0;
}

int cmd_symbolic(const std::string& ckpt_path, const std::string& out_dir, double lo, double hi,
                 const std::string& grammar_name, int max_terms, int n_samples) {
    if (hi <= lo) throw ConfigError({"'--hi' must exceed '--lo'"});
    Network net = load_checkpoint(ckpt_path);
    if (net.kind != NetworkKind::Kan)
        throw ConfigError({"symbolic extraction needs a KAN checkpoint"});
    const BasisGrammar grammar =
        grammar_name == "arithmetic" ? BasisGrammar::arithmetic() : BasisGrammar::full();
    std::filesystem::create_directories(out_dir);

    if (net.input_dim() == 1 && net.output_dim() == 1) {
        auto xs = linspace(lo, hi, n_samples);
        std::vector<double> ys(xs.size());
        for (size_t i = 0; i < xs.size(); ++i)
            ys[i] = net_forward(net, std::span<const double>(&xs[i], 1))[0];
        auto front = fit_activation(xs, ys, grammar, max_terms);
        std::fputs(report_text(front).c_str(), stdout);
        write_file(detail::join_path(out_dir, "symbolic.csv"), report_csv(front));
        std::printf("wrote %s\n", detail::join_path(out_dir, "symbolic.csv").c_str());
        return 0;
    }

    // multi-input net: fit every edge on a seeded sample cloud over the box
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> box(lo, hi);
    std::vector<std::vector<double>> samples(size_t(std::max(n_samples, 64)));
    for (auto& s : samples) {
        s.resize(size_t(net.input_dim()));
        for (auto& v : s) v = box(rng);
    }
    SymbolicNet sn = fit_network(net, samples, grammar, max_terms);
    std::string txt;
    for (size_t k = 0; k < sn.layers.size(); ++k)
        for (int a = 0; a < sn.layers[k].out; ++a)
            for (int b = 0; b < sn.layers[k].in; ++b) {
                const auto& fit = sn.layers[k].fits[size_t(a * sn.layers[k].in + b)];
                txt += "layer " + std::to_string(k) + " edge (" + std::to_string(a) + "," +
                       std::to_string(b) + "): " + render_expression(fit) +
                       "   [complexity " + std::to_string(fit.complexity) + ", loss " +
                       fmt_g17(fit.loss) + "]\n";
            }
    std::fputs(txt.c_str(), stdout);
    write_file(detail::join_path(out_dir, "symbolic_net.txt"), txt);
    std::printf("wrote %s\n", detail::join_path(out_dir, "symbolic_net.txt").c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"KAN ordinary-differential-equation training and analysis"};
    app.set_version_flag("--version", std::string(kCodeVersion));
    app.require_subcommand(1);

    std::string config_path, ckpt_path;
    Overrides ov;
    auto add_overrides = [&](CLI::App* cmd) {
        cmd->add_option("--seed", ov.seed, "override the run seed");
        cmd->add_option("--epochs", ov.epochs, "override the epoch budget");
        cmd->add_option("--out", ov.out, "override the output directory");
    };

    CLI::App* run = app.add_subcommand("run", "train one configured experiment");
    run->add_option("config", config_path, "experiment config JSON")->required();
    add_overrides(run);

    CLI::App* scale = app.add_subcommand("scale", "architecture scaling study");
    scale->add_option("config", config_path, "experiment config JSON")->required();
    add_overrides(scale);

    CLI::App* landscape =
        app.add_subcommand("landscape", "gradient-error map of a trained checkpoint");
    landscape->add_option("checkpoint", ckpt_path, "network checkpoint")->required();
    landscape->add_option("config", config_path, "experiment config JSON")->required();
    add_overrides(landscape);

    std::string sym_out = ".";
    std::string grammar_name = "full";
    double sym_lo = -2.0, sym_hi = 2.0;
    int max_terms = 3, n_samples = 401;
    CLI::App* symbolic =
        app.add_subcommand("symbolic", "fit closed-form expressions to a checkpoint");
    symbolic->add_option("checkpoint", ckpt_path, "network checkpoint")->required();
    symbolic->add_option("--out", sym_out, "output directory");
    symbolic->add_option("--lo", sym_lo, "lower end of the fit window");
    symbolic->add_option("--hi", sym_hi, "upper end of the fit window");
    symbolic->add_option("--grammar", grammar_name, "basis grammar: full or arithmetic")
        ->check(CLI::IsMember({"full", "arithmetic"}));
    symbolic->add_option("--max-terms", max_terms, "basis terms per expression")
        ->check(CLI::PositiveNumber);
    symbolic->add_option("--samples", n_samples, "sample count across the window")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(run)) return cmd_run(config_path, ov);
        if (app.got_subcommand(scale)) return cmd_scale(config_path, ov);
        if (app.got_subcommand(landscape)) return cmd_landscape(ckpt_path, config_path, ov);
        return cmd_symbolic(ckpt_path, sym_out, sym_lo, sym_hi, grammar_name, max_terms,
                            n_samples);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "kanode: %s\n", e.what());
        return 2;
    } catch (const IoError& e) {
        std::fprintf(stderr, "kanode: %s\n", e.what());
        return 2;
    } catch (const SolveDiverged& e) {
        std::fprintf(stderr, "kanode: numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "kanode: %s\n", e.what());
        return 3;
    }
}
