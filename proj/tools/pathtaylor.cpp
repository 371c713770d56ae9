#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ptx/experiments.hpp"

namespace {

int g_exit = 0;

ptx::ExperimentConfig load_config(const std::string& path) {
    if (path.empty()) return ptx::ExperimentConfig{};
    std::ifstream in(path);
    if (!in) throw ptx::ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;
    return ptx::ExperimentConfig::from_json(j);
}

void write_out(const std::string& out, const nlohmann::json& summary,
               const std::string& csv) {
    if (out.empty()) {
        std::cout << summary.dump(2) << "\n";
        return;
    }
    std::ofstream js(out + ".json");
    js << summary.dump(2) << "\n";
    std::ofstream cs(out + ".csv");
    cs << csv;
    std::cout << "wrote " << out << ".json and " << out << ".csv\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pathwise expansion experiments for functionals of Brownian paths"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    bool strict = false;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--out", out_path, "output basename (.json and .csv)");
    app.add_flag("--strict", strict, "exit nonzero when acceptance thresholds fail");
    app.add_option("--threads", threads, "worker threads for ensemble loops");

    auto* identities = app.add_subcommand("identities", "machine-precision and "
                                                        "refinement-order checks");
    auto* scaling = app.add_subcommand("scaling", "Monte Carlo remainder-scaling fit");
    auto* norms = app.add_subcommand("norms", "empirical norm diagnostics");
    auto* expand_cmd = app.add_subcommand("expand", "print one expansion term table");
    for (auto* sub : {identities, scaling, norms, expand_cmd}) sub->fallthrough();

    double q_t = -1.0, q_delta = 0.0, q_x = 0.0, q_h = 0.0;
    expand_cmd->add_option("--t", q_t, "base time (default: 7/16 of the horizon)");
    expand_cmd->add_option("--delta", q_delta, "signed offset (default: horizon/8)");
    expand_cmd->add_option("--x", q_x, "base point, fields only");
    expand_cmd->add_option("--dx", q_h, "spatial offset, fields only");

    CLI11_PARSE(app, argc, argv);

    try {
        ptx::ExperimentConfig cfg = load_config(config_path);
        if (seed) cfg.seed = *seed;
        if (threads) cfg.threads = *threads;
        cfg.validate();

        if (identities->parsed()) {
            cfg.experiment = "identities";
            const ptx::IdentityReport rep = ptx::run_identity_suite(cfg);
            write_out(out_path, rep.to_json(), rep.to_csv());
            for (const auto& e : rep.entries)
                std::cout << (e.skipped ? "SKIP " : (e.pass ? "PASS " : "FAIL "))
                          << e.name << "  worst=" << e.worst_error
                          << " tol=" << e.tolerance
                          << (e.note.empty() ? "" : "  [" + e.note + "]") << "\n";
            if (!rep.all_pass) g_exit = 1;
        } else if (scaling->parsed()) {
            cfg.experiment = "scaling";
            const ptx::ScalingReport rep = ptx::run_scaling(cfg);
            write_out(out_path, rep.to_json(), rep.to_csv());
            std::printf("slope=%.6f (target %.2f)  r2=%.6f  pathwise_max=%.6g%s\n",
                        rep.slope, rep.slope_target, rep.r_squared, rep.pathwise_max,
                        rep.exact_floor ? "  [exact floor]" : "");
            if (strict && !rep.exact_floor &&
                std::abs(rep.slope - rep.slope_target) > 0.15)
                g_exit = 1;
        } else if (norms->parsed()) {
            cfg.experiment = "norms";
            const ptx::NormReport rep = ptx::estimate_norms(cfg);
            write_out(out_path, rep.to_json(), rep.to_csv());
            std::printf("norm=%.6g (se %.3g)  holder=%.6g (se %.3g, half-ratio %.3f)\n",
                        rep.norm, rep.norm_std_error, rep.holder_seminorm,
                        rep.holder_std_error, rep.holder_half_ratio);
        } else if (expand_cmd->parsed()) {
            const ptx::TimeGrid grid(cfg.horizon, cfg.grid_n);
            if (q_t < 0.0) q_t = grid.node(grid.step_count() * 7 / 16);
            if (q_delta == 0.0) q_delta = grid.node(grid.step_count() / 8);
            const ptx::SamplePath path =
                ptx::simulate_path(grid, 1, ptx::mix_seed(cfg.seed, 0));
            ptx::ExpansionQuery q;
            q.t = q_t;
            q.delta = q_delta;
            q.m = cfg.m;
            ptx::ExpansionResult res;
            bool field_mode = true;
            try {
                const auto field = ptx::make_random_field(cfg.functional);
                q.x = {q_x};
                q.h = {q_h};
                res = ptx::expand_field(*field, path, q);
            } catch (const ptx::ConfigError&) {
                field_mode = false;
            }
            if (!field_mode) {
                const auto u = ptx::make_path_functional(cfg.functional);
                const ptx::SamplePath upath =
                    ptx::simulate_path(grid, u->driver_dim(), ptx::mix_seed(cfg.seed, 0));
                res = ptx::expand(*u, upath, q);
            }
            std::printf("%-24s %22s %22s %14s %22s\n", "index", "coefficient", "integral",
                        "monomial", "contribution");
            for (const auto& term : res.terms)
                std::printf("%-24s %22.14g %22.14g %14.8g %22.14g\n",
                            term.index.to_string().c_str(), term.coefficient,
                            term.integral, term.monomial, term.contribution());
            std::printf("predicted=%.14g actual=%.14g remainder=%.14g\n", res.predicted,
                        res.actual, res.remainder);
            if (!out_path.empty()) {
                nlohmann::json terms = nlohmann::json::array();
                for (const auto& term : res.terms)
                    terms.push_back({{"index", term.index.to_string()},
                                     {"coefficient", term.coefficient},
                                     {"integral", term.integral},
                                     {"monomial", term.monomial}});
                nlohmann::json summary{{"config", cfg.to_json()},
                                       {"t", q_t},
                                       {"delta", q_delta},
                                       {"terms", terms},
                                       {"predicted", res.predicted},
                                       {"actual", res.actual},
                                       {"remainder", res.remainder}};
                std::ofstream js(out_path + ".json");
                js << summary.dump(2) << "\n";
            }
        }
    } catch (const ptx::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return g_exit;
}
