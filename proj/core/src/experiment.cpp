#include "qec3/experiment.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace qec3 {

namespace {

std::string fd(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.12g", v);
    return b;
}

bool parse_bool(const std::string& v) {
    if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "off" || v == "no") return false;
    throw ConfigError("not a boolean: '" + v + "'");
}

double parse_double(const std::string& v, const std::string& key) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("not a number for key '" + key + "': '" + v + "'");
    }
}

long parse_long(const std::string& v, const std::string& key) {
    try {
        size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("not an integer for key '" + key + "': '" + v + "'");
    }
}

Structure parse_structure(const std::string& s) {
    if (s == "E" || s == "e") return Structure::E;
    if (s == "V" || s == "v") return Structure::V;
    if (s == "Lambda" || s == "lambda" || s == "L") return Structure::Lambda;
    throw ConfigError("unknown structure '" + s + "' (expected E, V or Lambda)");
}

const std::vector<std::string>& sweepable() {
    static const std::vector<std::string> keys = {"tau", "eta", "alpha", "beta", "delta_var"};
    return keys;
}

} // namespace

void ExperimentConfig::validate() const {
    if (unraveling != "jump" && unraveling != "diffusion" && unraveling != "none")
        throw ConfigError("unraveling must be jump, diffusion or none, got '" + unraveling + "'");
    if (!structure.empty()) {
        parse_structure(structure);
        if (feedback) throw ConfigError("feedback requires the recyclable ladder channels, "
                                        "not a named structure");
    }
    if (feedback && unraveling == "none")
        throw ConfigError("feedback requires an unraveling (jump or diffusion)");
    if (!sweep.parameter.empty()) {
        if (std::find(sweepable().begin(), sweepable().end(), sweep.parameter) ==
            sweepable().end())
            throw ConfigError("sweep parameter must be one of tau, eta, alpha, beta, delta_var; "
                              "got '" + sweep.parameter + "'");
        if (sweep.values.empty()) throw ConfigError("sweep has no values");
    }
    if (n_traj < 1) throw ConfigError("n_traj must be positive");
    if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must lie in [0, 1]");
    if (beta < 0.0) throw ConfigError("beta must be non-negative");
    try {
        params.validate(feedback);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    named_initial_state(initial_state); // throws on unknown names
}

Ket named_initial_state(const std::string& name) {
    const double s2 = 1.0 / std::sqrt(2.0);
    if (name == "bell12_21") {
        Vector v = Vector::Zero(9);
        v(5) = s2; // |12>
        v(7) = s2; // |21>
        return Ket{{3, 3}, v};
    }
    if (name == "plus11_22") {
        Vector v = Vector::Zero(9);
        v(4) = s2;
        v(8) = s2;
        return Ket{{3, 3}, v};
    }
    if (name == "bell00_22") {
        Vector v = Vector::Zero(9);
        v(0) = s2;
        v(8) = s2;
        return Ket{{3, 3}, v};
    }
    if (name == "w3") {
        Vector v = Vector::Zero(27);
        const double s3 = 1.0 / std::sqrt(3.0);
        v(3 * 3 * 1 + 3 * 1 + 2) = s3; // |112>
        v(3 * 3 * 1 + 3 * 2 + 1) = s3; // |121>
        v(3 * 3 * 2 + 3 * 1 + 1) = s3; // |211>
        return Ket{{3, 3, 3}, v};
    }
    double a, b, c;
    if (std::sscanf(name.c_str(), "coeffs(%lf,%lf,%lf)", &a, &b, &c) == 3) {
        const InitialCoeffs k = make_coeffs(a, b, c);
        return coeffs_state(k);
    }
    throw ConfigError("unknown initial state '" + name +
                      "' (expected bell12_21, plus11_22, bell00_22, w3 or coeffs(a,b,c))");
}

std::vector<std::string> preset_names() {
    return {"delay-sweep",    "single-delay",        "efficiency-sweep",
            "efficiency-single", "distinguishability-sweep", "rate-imbalance-sweep",
            "disorder-sweep", "diffusion-protection", "custom"};
}

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig cfg;
    cfg.experiment = name;
    cfg.params.seed = 1;
    cfg.params.dt = 1e-3;
    cfg.params.t_max = 5.0;
    cfg.params.record_stride = 50;
    cfg.n_traj = 200;
    if (name == "delay-sweep") {
        cfg.sweep.parameter = "tau";
        for (int i = 0; i <= 10; ++i) cfg.sweep.values.push_back(0.1 * i);
    } else if (name == "single-delay") {
        cfg.params.tau = 0.7;
        cfg.params.t_max = 10.0;
        cfg.params.record_stride = 10;
        cfg.n_traj = 1;
    } else if (name == "efficiency-sweep") {
        cfg.sweep.parameter = "eta";
        cfg.sweep.values = {0.8, 0.85, 0.9, 0.95, 0.98, 1.0};
    } else if (name == "efficiency-single") {
        cfg.params.eta = 0.98;
        cfg.params.t_max = 10.0;
        cfg.params.record_stride = 10;
        cfg.n_traj = 1;
    } else if (name == "distinguishability-sweep") {
        cfg.split_channels = true;
        cfg.sweep.parameter = "alpha";
        cfg.sweep.values = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    } else if (name == "rate-imbalance-sweep") {
        cfg.sweep.parameter = "beta";
        cfg.sweep.values = {1.0, 1.25, 1.5, 2.0};
    } else if (name == "disorder-sweep") {
        cfg.sweep.parameter = "delta_var";
        cfg.sweep.values = {0.0, 0.01, 0.05, 0.1, 0.2};
    } else if (name == "diffusion-protection") {
        cfg.unraveling = "diffusion";
        cfg.initial_state = "bell00_22";
        cfg.params.dt = 1e-4;
        cfg.params.t_max = 2.0;
        cfg.params.record_stride = 200;
        cfg.n_traj = 100;
    } else if (name == "custom") {
        // defaults as-is
    } else {
        throw ConfigError("unknown experiment preset '" + name + "'");
    }
    return cfg;
}

namespace {

ChannelSet build_channels(const ExperimentConfig& cfg, double alpha, double beta, int n_sites) {
    ChannelSet site_set;
    if (!cfg.structure.empty()) {
        site_set = structure_ops(parse_structure(cfg.structure), cfg.gamma, cfg.gamma);
    } else if (cfg.split_channels) {
        site_set = ladder_general(cfg.gamma, alpha, beta);
    } else {
        site_set = ladder_indistinguishable(cfg.gamma, beta);
    }
    ChannelSet full = embed(site_set, 0, n_sites);
    for (int s = 1; s < n_sites; ++s) full = merge(full, embed(site_set, s, n_sites));
    return full;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows; // ragged rows are padded on write
};

void write_csv(const std::string& path, const Table& table) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    for (size_t i = 0; i < table.header.size(); ++i)
        out << (i ? "," : "") << table.header[i];
    out << "\n";
    for (const auto& row : table.rows) {
        for (size_t i = 0; i < table.header.size(); ++i) {
            if (i) out << ",";
            if (i < row.size()) out << row[i];
        }
        out << "\n";
    }
    if (!out) throw ConfigError("write failed for '" + path + "'");
}

const char* event_kind_name(EventKind k) {
    return k == EventKind::jump ? "jump" : "feedback";
}

Table trajectory_table(const TrajectoryRecord& rec) {
    size_t k_max = 0;
    for (const auto& s : rec.pt_spectra) k_max = std::max(k_max, s.size());
    Table t;
    t.header = {"t", "mean_negativity", "stderr", "n_traj"};
    for (size_t k = 0; k < k_max; ++k) t.header.push_back("neg_eig_" + std::to_string(k + 1));
    t.header.insert(t.header.end(), {"event_time", "site", "kind"});
    const size_t n_rows = std::max(rec.times.size(), rec.events.size());
    for (size_t i = 0; i < n_rows; ++i) {
        std::vector<std::string> row;
        if (i < rec.times.size()) {
            row = {fd(rec.times[i]), fd(rec.negativity[i]), fd(0.0), "1"};
            for (size_t k = 0; k < k_max; ++k)
                row.push_back(k < rec.pt_spectra[i].size() ? fd(rec.pt_spectra[i][k]) : "");
        } else {
            row.assign(4 + k_max, "");
        }
        if (i < rec.events.size()) {
            const auto& ev = rec.events[i];
            row.push_back(fd(ev.time));
            row.push_back(std::to_string(ev.site));
            row.push_back(event_kind_name(ev.kind));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table master_table(const MasterSeries& series, const std::vector<int>& part) {
    std::vector<std::vector<double>> spectra;
    spectra.reserve(series.states.size());
    size_t k_max = 0;
    for (const auto& st : series.states) {
        spectra.push_back(pt_negative_spectrum(st, part));
        k_max = std::max(k_max, spectra.back().size());
    }
    Table t;
    t.header = {"t", "mean_negativity", "stderr", "n_traj"};
    for (size_t k = 0; k < k_max; ++k) t.header.push_back("neg_eig_" + std::to_string(k + 1));
    for (size_t i = 0; i < series.times.size(); ++i) {
        double neg = 0.0;
        for (double v : spectra[i]) neg += -2.0 * v;
        std::vector<std::string> row = {fd(series.times[i]), fd(neg), fd(0.0), "0"};
        for (size_t k = 0; k < k_max; ++k)
            row.push_back(k < spectra[i].size() ? fd(spectra[i][k]) : "");
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table ensemble_table(const EnsembleResult& res) {
    Table t;
    t.header = {"t", "mean_negativity", "stderr", "n_traj"};
    for (size_t i = 0; i < res.times.size(); ++i)
        t.rows.push_back({fd(res.times[i]), fd(res.mean_negativity[i]),
                          fd(res.stderr_negativity[i]), std::to_string(res.n_traj)});
    return t;
}

nlohmann::json config_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["experiment"] = cfg.experiment;
    j["unraveling"] = cfg.unraveling;
    j["feedback"] = cfg.feedback;
    j["initial_state"] = cfg.initial_state;
    j["structure"] = cfg.structure;
    j["gamma"] = cfg.gamma;
    j["alpha"] = cfg.alpha;
    j["beta"] = cfg.beta;
    j["split_channels"] = cfg.split_channels;
    j["dt"] = cfg.params.dt;
    j["t_max"] = cfg.params.t_max;
    j["eta"] = cfg.params.eta;
    j["tau"] = cfg.params.tau;
    j["delta_var"] = cfg.params.delta_var;
    j["seed"] = cfg.params.seed;
    j["record_stride"] = cfg.params.record_stride;
    j["bipartition"] = cfg.params.bipartition;
    j["n_traj"] = cfg.n_traj;
    j["sweep_parameter"] = cfg.sweep.parameter;
    j["sweep_values"] = cfg.sweep.values;
    j["output_dir"] = cfg.output_dir;
    return j;
}

} // namespace

RunOutputs run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t_start = std::chrono::steady_clock::now();
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);

    const Ket psi0 = named_initial_state(cfg.initial_state);
    const int n_sites = static_cast<int>(psi0.dims.size());

    const bool sweeping = !cfg.sweep.parameter.empty();
    std::vector<double> values = sweeping ? cfg.sweep.values : std::vector<double>{0.0};

    RunOutputs outputs;
    nlohmann::json files = nlohmann::json::array();

    for (size_t vi = 0; vi < values.size(); ++vi) {
        SimParams params = cfg.params;
        double alpha = cfg.alpha, beta = cfg.beta;
        if (sweeping) {
            const std::string& key = cfg.sweep.parameter;
            if (key == "tau") params.tau = values[vi];
            else if (key == "eta") params.eta = values[vi];
            else if (key == "alpha") alpha = values[vi];
            else if (key == "beta") beta = values[vi];
            else if (key == "delta_var") params.delta_var = values[vi];
        }
        const ChannelSet channels = build_channels(cfg, alpha, beta, n_sites);
        std::optional<CodeSpec> code;
        if (cfg.feedback)
            code = cfg.unraveling == "jump" ? jump_code(cfg.gamma) : diffusion_code(cfg.gamma);

        std::string name = cfg.experiment;
        if (sweeping) name += "_" + cfg.sweep.parameter + "=" + fd(values[vi]);
        const std::string path = (fs::path(cfg.output_dir) / (name + ".csv")).string();

        Table table;
        if (cfg.unraveling == "none") {
            const MasterSeries series = master_evolve(to_density(psi0), channels, std::nullopt,
                                                      params);
            table = master_table(series, params.bipartition);
        } else if (cfg.n_traj == 1) {
            SimParams tp = params;
            tp.record_event_negativity = true;
            const TrajectoryRecord rec =
                cfg.unraveling == "jump"
                    ? jump_trajectory(psi0, channels, code, tp, 0)
                    : diffusion_trajectory(psi0, channels, code, tp, 0);
            table = trajectory_table(rec);
        } else {
            EnsembleConfig ec;
            ec.unraveling = cfg.unraveling == "jump" ? EnsembleConfig::Unraveling::jump
                                                     : EnsembleConfig::Unraveling::diffusion;
            ec.psi0 = psi0;
            ec.channels = channels;
            ec.code = code;
            ec.params = params;
            ec.params.record_event_negativity = false;
            ec.n_threads = cfg.n_threads;
            table = ensemble_table(ensemble_run(ec, cfg.n_traj));
        }
        write_csv(path, table);
        outputs.csv_paths.push_back(path);
        nlohmann::json f;
        f["path"] = fs::path(path).filename().string();
        if (sweeping) f[cfg.sweep.parameter] = values[vi];
        files.push_back(f);
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    nlohmann::json manifest;
    manifest["config"] = config_json(cfg);
#ifdef QEC3_VERSION
    manifest["version"] = QEC3_VERSION;
#else
    manifest["version"] = "unknown";
#endif
    manifest["files"] = files;
    manifest["wall_clock_seconds"] = wall;
    manifest["generated_unix"] = static_cast<long>(std::time(nullptr));
    const std::string mpath =
        (fs::path(cfg.output_dir) / (cfg.experiment + "_manifest.json")).string();
    std::ofstream mout(mpath, std::ios::binary);
    if (!mout) throw ConfigError("cannot write '" + mpath + "'");
    mout << manifest.dump(2) << "\n";
    outputs.manifest_path = mpath;
    return outputs;
}

int classify_map(Structure kind, int resolution, const std::string& out_path) {
    if (resolution < 5) throw ConfigError("classify-map resolution must be at least 5");
    Table t;
    t.header = {"a", "b", "c", "sudden_changes", "terminal"};
    auto add_row = [&](double a, double b, double c) {
        const RegimeLabel label = classify_regime(kind, make_coeffs(a, b, c));
        t.rows.push_back({fd(a), fd(b), fd(c), std::to_string(label.sudden_changes),
                          to_string(label.terminal)});
    };
    // Documented reference amplitude triples, ahead of the grid rows.
    add_row(0.179, 0.2386, 0.9545);
    add_row(0.2386, 0.9545, 0.1790);
    add_row(0.9545, 0.2386, 0.179);
    for (int i = 0; i < resolution; ++i)
        for (int j = 0; i + j < resolution; ++j) {
            const double wa = (i + 0.5) / resolution;
            const double wb = (j + 0.5) / resolution;
            const double wc = 1.0 - wa - wb;
            if (wc <= 1e-12) continue; // keep the wc = 0 diagonal out despite fp noise
            add_row(std::sqrt(wa), std::sqrt(wb), std::sqrt(wc));
        }
    write_csv(out_path, t);
    return static_cast<int>(t.rows.size());
}

namespace {

double frob(const Matrix& m) { return m.norm(); }

void line(std::string& out, const char* fmt, double v, bool* ok, double gate) {
    char b[160];
    const bool pass = v <= gate;
    std::snprintf(b, sizeof b, fmt, v);
    out += b;
    out += pass ? "  [pass]\n" : "  [FAIL]\n";
    if (!pass && ok) *ok = false;
}

} // namespace

std::string verify_codes_report(double gamma, double alpha, double beta,
                                const std::string& structure, bool* all_ok) {
    bool ok = true;
    std::string out;
    char b[256];

    if (!structure.empty()) {
        const ChannelSet cs = structure_ops(parse_structure(structure), gamma, gamma);
        const Matrix a0 = cs.channels[0].op.mat.adjoint() * cs.channels[0].op.mat;
        const Matrix a1 = cs.channels[1].op.mat.adjoint() * cs.channels[1].op.mat;
        const cplx fit = (a0.adjoint() * a1).trace() / (a0.adjoint() * a0).trace();
        const double resid = frob(a1 - fit * a0) / frob(a1);
        std::snprintf(b, sizeof b, "structure %s: || Pi2^dag Pi2 - fit * Pi1^dag Pi1 || / || . || = %.3g\n",
                      structure.c_str(), resid);
        out += b;
        if (resid > 1e-10) {
            out += "no codespace: channels distinguishable (Pi_k^dag Pi_k not proportional);\n"
                   "local recycling cannot protect entanglement for this structure.\n";
        } else {
            out += "Pi_k^dag Pi_k proportional, but the common support is one-dimensional;\n"
                   "a recycler would need two orthonormal levels mapped to one. No codespace.\n";
        }
        ok = false;
        if (all_ok) *all_ok = ok;
        return out;
    }

    const CodeSpec jc = jump_code(gamma);
    std::snprintf(b, sizeof b, "jump code (gamma = %g):\n  lambda = %.12g  (2*pi/(3*sqrt(3)))\n",
                  gamma, jc.lambda_mag);
    out += b;
    const Matrix& pi = jc.channel.mat;
    const Matrix& pc = jc.codespace_projector.mat;
    const Matrix& r = jc.recycler->mat;
    line(out, "  || Pi^dag Pi - gamma P_C ||      = %.3g", frob(pi.adjoint() * pi - gamma * pc),
         &ok, 1e-10);
    line(out, "  || R Pi - sqrt(gamma) P_C ||     = %.3g",
         frob(r * pi - std::sqrt(gamma) * pc), &ok, 1e-10);
    line(out, "  || R^dag R - I ||                = %.3g",
         frob(r.adjoint() * r - Matrix::Identity(3, 3)), &ok, 1e-10);
    line(out, "  || exp(-iF) - R ||               = %.3g",
         frob(matrix_exponential(Matrix(cplx(0.0, -1.0) * jc.feedback_generator.mat)) - r), &ok,
         1e-10);

    const CodeSpec dc = diffusion_code(gamma);
    out += "diffusion code:\n";
    const OperatorParts parts = operator_decompose(dc.channel);
    const Matrix& s = dc.stabilizer->mat;
    const Matrix& x = parts.x.mat;
    const Matrix& f = dc.feedback_generator.mat;
    line(out, "  || S X + X S ||                  = %.3g", frob(s * x + x * s), &ok, 1e-12);
    line(out, "  || F - F^dag ||                  = %.3g", frob(f - Matrix(f.adjoint())), &ok,
         1e-12);
    line(out, "  || (Pi - iF) P_C ||              = %.3g",
         frob((dc.channel.mat - cplx(0.0, 1.0) * f) * dc.codespace_projector.mat), &ok, 1e-12);
    {
        const double dt = 1e-3;
        const Matrix one_minus_s = Matrix::Identity(3, 3) - s;
        double worst = 0.0;
        for (double q : {-1.0, 0.0, 0.3}) {
            const Matrix step = Matrix::Identity(3, 3) -
                                (0.5 * gamma * dt * Matrix::Identity(3, 3) + q * x) * one_minus_s;
            for (int basis : {0, 2}) {
                Vector v = Vector::Zero(3);
                v(basis) = 1.0;
                worst = std::max(worst, (step * v - v).norm());
            }
        }
        line(out, "  one-step codespace identity      = %.3g", worst, &ok, 1e-12);
    }

    const NoGoReport ng = qubit_no_go_check();
    std::snprintf(b, sizeof b,
                  "qubit scan: %d stabilizer candidates, %d anticommuting, max protected dim %d\n",
                  ng.candidates_scanned, ng.anticommuting_found, ng.max_protected_dim);
    out += b;
    out += ng.no_qubit_code ? "  no qubit analogue of the recycling code  [pass]\n"
                            : "  unexpected qubit code candidate found  [FAIL]\n";
    if (!ng.no_qubit_code) ok = false;

    {
        const ChannelSet whole = ladder_indistinguishable(gamma, beta);
        const ChannelSet split = ladder_general(gamma, alpha, beta);
        const Matrix d_whole = dissipator_matrix({whole.channels[0].op});
        const Matrix d_split =
            dissipator_matrix({split.channels[0].op, split.channels[1].op});
        const double resid = frob(d_whole - d_split);
        std::snprintf(b, sizeof b, "alpha-split dissipator identity (alpha = %g): residual = %.3g",
                      alpha, resid);
        out += b;
        if (alpha == 0.5) {
            out += resid <= 1e-14 ? "  [pass]\n" : "  [FAIL]\n";
            if (resid > 1e-14) ok = false;
        } else {
            out += resid > 1e-14 ? "  [violated, as expected away from alpha = 1/2]\n"
                                 : "  [unexpectedly zero]\n";
            ok = false;
        }
    }

    if (beta != 1.0) {
        const ChannelSet imb = ladder_indistinguishable(gamma, beta);
        const RecyclabilityReport rr =
            verify_recyclability(imb.channels[0].op, jc.codespace_projector, *jc.recycler);
        std::snprintf(b, sizeof b,
                      "rate imbalance beta = %g: Pi^dag Pi fit residual = %.3g -> "
                      "recyclability violated\n",
                      beta, rr.residual1);
        out += b;
        ok = false;
    }

    if (all_ok) *all_ok = ok;
    return out;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    ExperimentConfig cfg;
    bool preset_loaded = false;
    std::string raw;
    int lineno = 0;
    std::vector<std::pair<std::string, std::string>> pairs;
    while (std::getline(in, raw)) {
        ++lineno;
        const size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const auto strip = [](std::string s) {
            const size_t b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const size_t e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        raw = strip(raw);
        if (raw.empty()) continue;
        const size_t eq = raw.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = strip(raw.substr(0, eq));
        const std::string value = strip(raw.substr(eq + 1));
        if (key == "experiment") {
            cfg = preset_config(value);
            preset_loaded = true;
        } else {
            pairs.emplace_back(key, value);
        }
    }
    (void)preset_loaded;
    for (const auto& [key, value] : pairs) apply_override(cfg, key, value);
    return cfg;
}

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "experiment") {
        const ExperimentConfig base = preset_config(value);
        cfg = base;
    } else if (key == "unraveling") {
        cfg.unraveling = value;
    } else if (key == "feedback") {
        cfg.feedback = parse_bool(value);
    } else if (key == "initial_state") {
        cfg.initial_state = value;
    } else if (key == "structure") {
        cfg.structure = value;
    } else if (key == "gamma") {
        cfg.gamma = parse_double(value, key);
    } else if (key == "alpha") {
        cfg.alpha = parse_double(value, key);
    } else if (key == "beta") {
        cfg.beta = parse_double(value, key);
    } else if (key == "split_channels") {
        cfg.split_channels = parse_bool(value);
    } else if (key == "dt") {
        cfg.params.dt = parse_double(value, key);
    } else if (key == "t_max") {
        cfg.params.t_max = parse_double(value, key);
    } else if (key == "eta") {
        cfg.params.eta = parse_double(value, key);
    } else if (key == "tau") {
        cfg.params.tau = parse_double(value, key);
    } else if (key == "delta_var") {
        cfg.params.delta_var = parse_double(value, key);
    } else if (key == "seed") {
        cfg.params.seed = static_cast<std::uint64_t>(parse_long(value, key));
    } else if (key == "record_stride") {
        cfg.params.record_stride = static_cast<int>(parse_long(value, key));
    } else if (key == "n_traj") {
        cfg.n_traj = static_cast<int>(parse_long(value, key));
    } else if (key == "n_threads") {
        cfg.n_threads = static_cast<unsigned>(parse_long(value, key));
    } else if (key == "out" || key == "output_dir") {
        cfg.output_dir = value;
    } else if (key == "bipartition") {
        std::vector<int> sites;
        std::stringstream ss(value);
        std::string tok;
        while (std::getline(ss, tok, ','))
            sites.push_back(static_cast<int>(parse_long(tok, key)));
        cfg.params.bipartition = sites;
    } else if (key == "sweep") {
        const size_t colon = value.find(':');
        if (colon == std::string::npos)
            throw ConfigError("sweep must look like 'tau:0,0.1,0.2', got '" + value + "'");
        SweepSpec sw;
        sw.parameter = value.substr(0, colon);
        std::stringstream ss(value.substr(colon + 1));
        std::string tok;
        while (std::getline(ss, tok, ',')) sw.values.push_back(parse_double(tok, key));
        cfg.sweep = sw;
    } else {
        throw ConfigError("unknown configuration key '" + key + "'");
    }
}

} // namespace qec3
