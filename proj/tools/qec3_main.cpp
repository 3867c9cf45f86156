#include "qec3/experiment.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>

namespace {

// Flag values that should only override a preset when explicitly given.
template <typename T>
struct Maybe {
    T value{};
    bool set = false;
};

int run_cmd(qec3::ExperimentConfig cfg) {
    const qec3::RunOutputs out = qec3::run_experiment(cfg);
    for (const auto& p : out.csv_paths) std::cout << "wrote " << p << "\n";
    std::cout << "wrote " << out.manifest_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continuous error correction of dissipative qutrits: trajectory "
                 "simulator and disentanglement analysis"};
    app.require_subcommand(1);

    const char* env_out = std::getenv("QEC3_OUT_DIR");
    const std::string default_out = env_out ? env_out : ".";

    // ---- run ----
    auto* run = app.add_subcommand("run", "Run an experiment preset or a custom configuration");
    std::string experiment = "custom";
    std::string config_path;
    std::vector<std::string> overrides;
    Maybe<std::uint64_t> seed;
    Maybe<int> n_traj;
    Maybe<double> dt, t_max, tau, eta, alpha, beta, delta_var;
    Maybe<std::string> out_dir, unraveling, initial_state;
    run->add_option("--experiment", experiment,
                    "Preset name (see --list-experiments) or 'custom'");
    bool list_experiments = false;
    run->add_flag("--list-experiments", list_experiments, "Print preset names and exit");
    run->add_option("--config", config_path, "key = value configuration file");
    auto opt = [&](const char* flag, auto& m, const char* help) {
        return run->add_option(flag, m.value, help)->each([&m](const std::string&) { m.set = true; });
    };
    opt("--seed", seed, "Base RNG seed");
    opt("--n-traj", n_traj, "Trajectories per ensemble (1 = annotated trajectory export)");
    opt("--dt", dt, "Integrator step, units of 1/gamma");
    opt("--t-max", t_max, "Evolution span, units of 1/gamma");
    opt("--tau", tau, "Feedback delay");
    opt("--eta", eta, "Detector efficiency in (0, 1]");
    opt("--alpha", alpha, "Which-path distinguishability of the split ladder");
    opt("--beta", beta, "Upper/lower decay rate ratio");
    opt("--delta-var", delta_var, "Feedback disorder variance");
    opt("--out", out_dir, "Output directory (default $QEC3_OUT_DIR or '.')");
    opt("--unraveling", unraveling, "jump | diffusion | none");
    opt("--initial-state", initial_state,
        "bell12_21 | plus11_22 | bell00_22 | w3 | coeffs(a,b,c)");
    run->add_option("--set", overrides, "Extra key=value overrides (repeatable)");

    // ---- classify-map ----
    auto* cmap = app.add_subcommand("classify-map",
                                    "Disentanglement regime over the (a,b,c) simplex");
    std::string structure = "E";
    int resolution = 15;
    std::string cmap_out;
    cmap->add_option("--structure", structure, "E | V | Lambda")->required();
    cmap->add_option("--resolution", resolution, "Simplex grid resolution (>= 5)");
    cmap->add_option("--out", cmap_out, "Output CSV path");

    // ---- verify-codes ----
    auto* verify = app.add_subcommand("verify-codes", "Check the code-algebra conditions");
    double v_gamma = 1.0, v_alpha = 0.5, v_beta = 1.0;
    std::string v_structure;
    verify->add_option("--gamma", v_gamma, "Decay rate");
    verify->add_option("--alpha", v_alpha, "Split-channel distinguishability to test");
    verify->add_option("--beta", v_beta, "Rate imbalance to test");
    verify->add_option("--structure", v_structure,
                       "Check a decay structure (E | V | Lambda) for a recyclable codespace");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) {
            if (list_experiments) {
                for (const auto& name : qec3::preset_names()) std::cout << name << "\n";
                return 0;
            }
            qec3::ExperimentConfig cfg;
            if (!config_path.empty()) {
                cfg = qec3::load_config_file(config_path);
                if (run->count("--experiment")) qec3::apply_override(cfg, "experiment", experiment);
            } else {
                cfg = qec3::preset_config(experiment);
            }
            cfg.output_dir = default_out;
            if (seed.set) cfg.params.seed = seed.value;
            if (n_traj.set) cfg.n_traj = n_traj.value;
            if (dt.set) cfg.params.dt = dt.value;
            if (t_max.set) cfg.params.t_max = t_max.value;
            if (tau.set) cfg.params.tau = tau.value;
            if (eta.set) cfg.params.eta = eta.value;
            if (alpha.set) cfg.alpha = alpha.value;
            if (beta.set) cfg.beta = beta.value;
            if (delta_var.set) cfg.params.delta_var = delta_var.value;
            if (out_dir.set) cfg.output_dir = out_dir.value;
            if (unraveling.set) cfg.unraveling = unraveling.value;
            if (initial_state.set) cfg.initial_state = initial_state.value;
            for (const auto& kv : overrides) {
                const size_t eq = kv.find('=');
                if (eq == std::string::npos)
                    throw qec3::ConfigError("--set expects key=value, got '" + kv + "'");
                qec3::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
            }
            return run_cmd(cfg);
        }
        if (cmap->parsed()) {
            qec3::Structure kind;
            if (structure == "E" || structure == "e") kind = qec3::Structure::E;
            else if (structure == "V" || structure == "v") kind = qec3::Structure::V;
            else if (structure == "Lambda" || structure == "lambda" || structure == "L")
                kind = qec3::Structure::Lambda;
            else throw qec3::ConfigError("unknown structure '" + structure + "'");
            if (cmap_out.empty())
                cmap_out = default_out + "/classify_map_" + structure + ".csv";
            const int rows = qec3::classify_map(kind, resolution, cmap_out);
            std::cout << "wrote " << rows << " rows to " << cmap_out << "\n";
            return 0;
        }
        if (verify->parsed()) {
            bool ok = true;
            std::cout << qec3::verify_codes_report(v_gamma, v_alpha, v_beta, v_structure, &ok);
            return ok ? 0 : 2;
        }
    } catch (const qec3::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const qec3::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
