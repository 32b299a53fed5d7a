#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kanode/kan.hpp"
#include "kanode/training.hpp"

// Serialization shared by the CLI and the experiment runners: checkpoints
// (JSON, version "kanode-ckpt-v1"), numeric CSV with exact double round-trip,
// strict config parsing with enumerated validation errors, and run manifests.

namespace kanode {

inline constexpr const char* kCheckpointFormat = "kanode-ckpt-v1";
inline constexpr const char* kCodeVersion = "kanode 0.1.0";

/// File-level I/O failure (unreadable path, write error).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Checkpoint carries a format string other than kanode-ckpt-v1.
struct CheckpointVersionError : IoError {
    using IoError::IoError;
};

/// Checkpoint is not parseable as the documented JSON shape.
struct CheckpointCorruptError : IoError {
    using IoError::IoError;
};

/// Checkpoint parses but its dimensions are inconsistent (layers do not
/// chain, or the flat parameter vector has the wrong length).
struct CheckpointDimensionError : IoError {
    using IoError::IoError;
};

/// Config rejected; problems lists every independent issue found.
struct ConfigError : std::runtime_error {
    std::vector<std::string> problems;
    explicit ConfigError(std::vector<std::string> p)
        : std::runtime_error(join(p)), problems(std::move(p)) {}

  private:
    static std::string join(const std::vector<std::string>& p) {
        std::string s = "config invalid:";
        for (const auto& q : p) s += "\n  - " + q;
        return s;
    }
};

// ---- small helpers ----

/// Shortest text that round-trips the double exactly.
inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    if (!out) throw IoError("write failed for " + path);
}

/// FNV-1a 64-bit checksum of a file's bytes, as 16 hex digits.
inline std::string file_checksum(const std::string& path) {
    const std::string bytes = read_file(path);
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string iso_utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---- checkpoints ----

inline void save_checkpoint(const Network& net, const std::string& path) {
    const auto theta = net.flatten();
    for (double v : theta)
        require(std::isfinite(v), "save_checkpoint: non-finite parameter");
    nlohmann::json j;
    j["format"] = kCheckpointFormat;
    j["kind"] = net.kind == NetworkKind::Kan ? "kan" : "mlp";
    j["normalization"] = net.norm == InputNorm::Tanh ? "tanh" : "none";
    const NetSpec spec = net.spec();
    if (net.kind == NetworkKind::Kan)
        j["layers"] = spec.kan_layers;
    else
        j["widths"] = spec.mlp_widths;
    j["params"] = theta;
    write_file(path, j.dump(2) + "\n");
}

inline Network load_checkpoint(const std::string& path) {
    const std::string text = read_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointCorruptError("checkpoint " + path + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("format") || !j["format"].is_string())
        throw CheckpointCorruptError("checkpoint " + path + ": missing format field");
    if (j["format"].get<std::string>() != kCheckpointFormat)
        throw CheckpointVersionError("checkpoint " + path + ": format '" +
                                     j["format"].get<std::string>() + "', expected " +
                                     kCheckpointFormat);

    NetSpec spec;
    try {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "kan")
            spec.kind = NetworkKind::Kan;
        else if (kind == "mlp")
            spec.kind = NetworkKind::Mlp;
        else
            throw CheckpointCorruptError("checkpoint " + path + ": bad kind '" + kind + "'");
        const std::string norm = j.at("normalization").get<std::string>();
        if (norm == "tanh")
            spec.norm = InputNorm::Tanh;
        else if (norm == "none")
            spec.norm = InputNorm::None;
        else
            throw CheckpointCorruptError("checkpoint " + path + ": bad normalization '" + norm +
                                         "'");
        if (spec.kind == NetworkKind::Kan)
            spec.kan_layers = j.at("layers").get<std::vector<std::array<int, 3>>>();
        else
            spec.mlp_widths = j.at("widths").get<std::vector<int>>();
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointCorruptError("checkpoint " + path + ": " + e.what());
    }

    Network net;
    try {
        net = Network::from_spec(spec);
    } catch (const ContractError& e) {
        throw CheckpointDimensionError("checkpoint " + path + ": " + e.what());
    }

    std::vector<double> theta;
    try {
        theta = j.at("params").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointCorruptError("checkpoint " + path + ": " + e.what());
    }
    if (int(theta.size()) != net.param_count())
        throw CheckpointDimensionError("checkpoint " + path + ": " +
                                       std::to_string(theta.size()) + " params for a " +
                                       std::to_string(net.param_count()) + "-param architecture");
    return net.with_params(theta);
}

// ---- CSV ----

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    require(!header.empty(), "write_csv: empty header");
    std::string out;
    for (size_t i = 0; i < header.size(); ++i) {
        if (i) out += ",";
        out += header[i];
    }
    out += "\n";
    for (const auto& row : rows) {
        require(row.size() == header.size(), "write_csv: row width does not match header");
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out += ",";
            out += fmt_g17(row[i]);
        }
        out += "\n";
    }
    write_file(path, out);
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv(const std::string& path) {
    std::istringstream in(read_file(path));
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw IoError("csv " + path + ": empty file");
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) t.header.push_back(cell);
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0')
                throw IoError("csv " + path + ": bad number '" + cell + "' at line " +
                              std::to_string(lineno));
            row.push_back(v);
        }
        if (row.size() != t.header.size())
            throw IoError("csv " + path + ": ragged row at line " + std::to_string(lineno));
        t.rows.push_back(std::move(row));
    }
    return t;
}

// ---- experiment configs ----

struct ExperimentConfig {
    std::string id;
    NetSpec arch;
    TrainConfig train;
    double gamma_pr = 0.0;
    std::string out_dir = "out";
    uint64_t seed = 1;
};

namespace detail {

struct IdDefaults {
    NetSpec arch;
    long epochs;
    int state_in, state_out;
    double gamma_sp = 0.0;
    double gamma_pr = 0.0;
    std::optional<double> early_stop = std::nullopt;
};

inline NetSpec kan_spec(std::vector<std::array<int, 3>> layers) {
    NetSpec s;
    s.kind = NetworkKind::Kan;
    s.norm = InputNorm::Tanh;
    s.kan_layers = std::move(layers);
    return s;
}

inline std::optional<IdDefaults> id_defaults(const std::string& id) {
    if (id == "lv" || id == "lv-scaling")
        return IdDefaults{kan_spec({{2, 10, 5}, {10, 2, 5}}), 10000, 2, 2};
    if (id == "lv-sparse")
        return IdDefaults{kan_spec({{2, 10, 5}, {10, 2, 5}}), 10000, 2, 2, 5e-4, 1e-2};
    if (id == "fisher-kpp") return IdDefaults{kan_spec({{1, 1, 10}}), 5000, 1, 1};
    if (id == "burgers") return IdDefaults{kan_spec({{41, 10, 5}, {10, 41, 5}}), 20000, 41, 41};
    if (id == "schrodinger")
        return IdDefaults{kan_spec({{402, 10, 10}, {10, 402, 10}}), 10000, 402, 402};
    if (id == "allen-cahn-hidden")
        return IdDefaults{kan_spec({{1, 1, 10}}), 500000, 1, 1, 0.0, 0.0, 1e-7};
    if (id == "allen-cahn-surrogate")
        return IdDefaults{kan_spec({{41, 10, 10}, {10, 41, 10}}), 20000, 41, 41};
    return std::nullopt;
}

}  // namespace detail

/// Strict parse of a JSON experiment config. Unknown keys are rejected,
/// defaults are filled per experiment id, and every validation problem is
/// reported in one ConfigError rather than stopping at the first.
inline ExperimentConfig parse_config(const std::string& text) {
    std::vector<std::string> problems;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError({std::string("syntax error: ") + e.what()});
    }
    if (!j.is_object()) throw ConfigError({"config root must be a JSON object"});

    static const std::vector<std::string> known = {
        "id",        "epochs",     "seed",      "out",       "lr",        "gamma_sp",
        "gamma_pr",  "rtol",       "atol",      "early_stop", "test_every", "grad_mode",
        "architecture"};
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            problems.push_back("unknown key '" + key + "'");

    ExperimentConfig cfg;
    std::optional<detail::IdDefaults> defs;
    if (!j.contains("id")) {
        problems.push_back("missing required key 'id'");
    } else if (!j["id"].is_string()) {
        problems.push_back("'id' must be a string");
    } else {
        cfg.id = j["id"].get<std::string>();
        defs = detail::id_defaults(cfg.id);
        if (!defs) problems.push_back("unknown experiment id '" + cfg.id + "'");
    }
    if (defs) {
        cfg.arch = defs->arch;
        cfg.train.epochs = defs->epochs;
        cfg.train.gamma_sp = defs->gamma_sp;
        cfg.gamma_pr = defs->gamma_pr;
        cfg.train.early_stop_loss = defs->early_stop;
    }

    auto get_long = [&](const char* key, long lo, long& out) {
        if (!j.contains(key)) return;
        const auto& v = j[key];
        double d = 0.0;
        if (v.is_number_integer() || v.is_number_unsigned())
            d = double(v.get<long long>());
        else if (v.is_number_float() && v.get<double>() == std::floor(v.get<double>()))
            d = v.get<double>();
        else {
            problems.push_back(std::string("'") + key + "' must be an integer");
            return;
        }
        if (d < double(lo)) {
            problems.push_back(std::string("'") + key + "' must be >= " + std::to_string(lo));
            return;
        }
        out = long(d);
    };
    auto get_real = [&](const char* key, bool positive, double& out) {
        if (!j.contains(key)) return;
        if (!j[key].is_number()) {
            problems.push_back(std::string("'") + key + "' must be a number");
            return;
        }
        const double v = j[key].get<double>();
        if (positive ? v <= 0.0 : v < 0.0) {
            problems.push_back(std::string("'") + key + "' must be " +
                               (positive ? "positive" : "non-negative"));
            return;
        }
        out = v;
    };

    get_long("epochs", 1, cfg.train.epochs);
    get_long("test_every", 1, cfg.train.test_every);
    long seed_l = long(cfg.seed);
    get_long("seed", 0, seed_l);
    cfg.seed = uint64_t(seed_l);
    get_real("lr", false, cfg.train.lr);
    get_real("gamma_sp", false, cfg.train.gamma_sp);
    get_real("gamma_pr", false, cfg.gamma_pr);
    get_real("rtol", true, cfg.train.rtol);
    get_real("atol", true, cfg.train.atol);
    if (j.contains("early_stop")) {
        double es = 0.0;
        get_real("early_stop", true, es);
        if (es > 0.0) cfg.train.early_stop_loss = es;
    }
    if (j.contains("out")) {
        if (j["out"].is_string())
            cfg.out_dir = j["out"].get<std::string>();
        else
            problems.push_back("'out' must be a string");
    }
    if (j.contains("grad_mode")) {
        const std::string m = j["grad_mode"].is_string() ? j["grad_mode"].get<std::string>() : "";
        if (m == "adjoint")
            cfg.train.grad_mode = GradMode::Adjoint;
        else if (m == "discrete")
            cfg.train.grad_mode = GradMode::Discrete;
        else
            problems.push_back("'grad_mode' must be \"adjoint\" or \"discrete\"");
    }

    if (j.contains("architecture")) {
        const auto& a = j["architecture"];
        if (!a.is_object()) {
            problems.push_back("'architecture' must be an object");
        } else {
            static const std::vector<std::string> arch_known = {"kind", "normalization", "layers",
                                                                "widths"};
            for (const auto& [key, _] : a.items())
                if (std::find(arch_known.begin(), arch_known.end(), key) == arch_known.end())
                    problems.push_back("unknown key 'architecture." + key + "'");
            NetSpec spec;
            spec.kind = NetworkKind::Kan;
            spec.norm = InputNorm::Tanh;
            bool ok = true;
            if (a.contains("kind")) {
                const std::string k = a["kind"].is_string() ? a["kind"].get<std::string>() : "";
                if (k == "kan")
                    spec.kind = NetworkKind::Kan;
                else if (k == "mlp")
                    spec.kind = NetworkKind::Mlp;
                else {
                    problems.push_back("'architecture.kind' must be \"kan\" or \"mlp\"");
                    ok = false;
                }
            }
            if (a.contains("normalization")) {
                const std::string nrm =
                    a["normalization"].is_string() ? a["normalization"].get<std::string>() : "";
                if (nrm == "tanh")
                    spec.norm = InputNorm::Tanh;
                else if (nrm == "none")
                    spec.norm = InputNorm::None;
                else {
                    problems.push_back("'architecture.normalization' must be \"tanh\" or \"none\"");
                    ok = false;
                }
            }
            if (spec.kind == NetworkKind::Kan) {
                if (a.contains("widths"))
                    problems.push_back("'architecture.widths' requires kind \"mlp\"");
                if (!a.contains("layers")) {
                    if (defs) spec.kan_layers = defs->arch.kan_layers;
                    else ok = false;
                } else {
                    try {
                        spec.kan_layers = a["layers"].get<std::vector<std::array<int, 3>>>();
                    } catch (const nlohmann::json::exception&) {
                        problems.push_back(
                            "'architecture.layers' must be an array of [in, out, grid] triples");
                        ok = false;
                    }
                    for (const auto& l : spec.kan_layers)
                        if (l[0] < 1 || l[1] < 1 || l[2] < 1) {
                            problems.push_back("'architecture.layers' entries must be >= 1");
                            ok = false;
                            break;
                        }
                    for (size_t k = 0; ok && k + 1 < spec.kan_layers.size(); ++k)
                        if (spec.kan_layers[k][1] != spec.kan_layers[k + 1][0]) {
                            problems.push_back("architecture layers do not chain at position " +
                                               std::to_string(k));
                            ok = false;
                        }
                    if (spec.kan_layers.empty()) {
                        problems.push_back("'architecture.layers' must be non-empty");
                        ok = false;
                    }
                }
            } else {
                if (a.contains("layers"))
                    problems.push_back("'architecture.layers' requires kind \"kan\"");
                if (!a.contains("widths")) {
                    problems.push_back("'architecture.widths' required for kind \"mlp\"");
                    ok = false;
                } else {
                    try {
                        spec.mlp_widths = a["widths"].get<std::vector<int>>();
                    } catch (const nlohmann::json::exception&) {
                        problems.push_back("'architecture.widths' must be an array of integers");
                        ok = false;
                    }
                    if (spec.mlp_widths.size() < 2) {
                        problems.push_back("'architecture.widths' needs at least 2 entries");
                        ok = false;
                    }
                    for (int w : spec.mlp_widths)
                        if (w < 1) {
                            problems.push_back("'architecture.widths' entries must be >= 1");
                            ok = false;
                            break;
                        }
                }
            }
            if (ok) cfg.arch = spec;
        }
    }

    // cross-field: network I/O dims must match the experiment's state dims
    if (defs) {
        int in = 0, out = 0;
        if (cfg.arch.kind == NetworkKind::Kan && !cfg.arch.kan_layers.empty()) {
            in = cfg.arch.kan_layers.front()[0];
            out = cfg.arch.kan_layers.back()[1];
        } else if (cfg.arch.kind == NetworkKind::Mlp && cfg.arch.mlp_widths.size() >= 2) {
            in = cfg.arch.mlp_widths.front();
            out = cfg.arch.mlp_widths.back();
        }
        if (in != 0 && (in != defs->state_in || out != defs->state_out))
            problems.push_back("architecture is " + std::to_string(in) + " -> " +
                               std::to_string(out) + " but experiment '" + cfg.id + "' needs " +
                               std::to_string(defs->state_in) + " -> " +
                               std::to_string(defs->state_out));
    }

    if (!problems.empty()) throw ConfigError(std::move(problems));
    cfg.train.seed = cfg.seed;
    return cfg;
}

/// Effective config as JSON text; parse_config(render_config(c)) reproduces c.
inline std::string render_config(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["id"] = cfg.id;
    j["epochs"] = cfg.train.epochs;
    j["seed"] = cfg.seed;
    j["out"] = cfg.out_dir;
    j["lr"] = cfg.train.lr;
    j["gamma_sp"] = cfg.train.gamma_sp;
    j["gamma_pr"] = cfg.gamma_pr;
    j["rtol"] = cfg.train.rtol;
    j["atol"] = cfg.train.atol;
    if (cfg.train.early_stop_loss) j["early_stop"] = *cfg.train.early_stop_loss;
    j["test_every"] = cfg.train.test_every;
    j["grad_mode"] = cfg.train.grad_mode == GradMode::Adjoint ? "adjoint" : "discrete";
    nlohmann::json arch;
    arch["kind"] = cfg.arch.kind == NetworkKind::Kan ? "kan" : "mlp";
    arch["normalization"] = cfg.arch.norm == InputNorm::Tanh ? "tanh" : "none";
    if (cfg.arch.kind == NetworkKind::Kan)
        arch["layers"] = cfg.arch.kan_layers;
    else
        arch["widths"] = cfg.arch.mlp_widths;
    j["architecture"] = arch;
    return j.dump(2) + "\n";
}

// ---- run manifests ----

struct RunManifest {
    std::string config;  // verbatim config text
    uint64_t seed = 0;
    std::string version = kCodeVersion;
    std::string started;
    std::string finished;
    std::vector<std::pair<std::string, std::string>> checksums;  // file name -> fnv1a-64
};

/// Checksums every named file under dir and returns the filled manifest.
inline RunManifest collect_manifest(const std::string& config_text, uint64_t seed,
                                    const std::string& dir,
                                    const std::vector<std::string>& files,
                                    const std::string& started, const std::string& finished) {
    RunManifest m;
    m.config = config_text;
    m.seed = seed;
    m.started = started;
    m.finished = finished;
    for (const auto& f : files) m.checksums.emplace_back(f, file_checksum(dir + "/" + f));
    return m;
}

inline void write_manifest(const std::string& dir, const RunManifest& m) {
    nlohmann::json j;
    j["config"] = m.config;
    j["seed"] = m.seed;
    j["version"] = m.version;
    j["started"] = m.started;
    j["finished"] = m.finished;
    nlohmann::json files = nlohmann::json::object();
    for (const auto& [name, sum] : m.checksums) files[name] = sum;
    j["files"] = files;
    write_file(dir + "/manifest.json", j.dump(2) + "\n");
}

}  // namespace kanode
