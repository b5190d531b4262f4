// Command-line front end: classify criterion matrices, check model configs,
// trace attractivity bounds, and simulate trajectories.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hopfield/builtin_examples.hpp"
#include "hopfield/criterion.hpp"
#include "hopfield/reports.hpp"
#include "hopfield/simulator.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_error = 1;
constexpr int exit_inconclusive = 2;

hopfield::model_spec load_config(const std::string& source) {
    if (hopfield::is_builtin(source)) return hopfield::load_builtin(source);
    std::ifstream in(source);
    if (!in) throw hopfield::config_error("cannot open config file '" + source + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return hopfield::load_model(ss.str());
}

hopfield::square_matrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw hopfield::config_error("cannot open matrix file '" + path + "'");
    return hopfield::parse_matrix_stream(in);
}

hopfield::initial_condition default_initial_condition(const hopfield::model_spec& spec,
                                                      const std::string& source) {
    if (hopfield::is_builtin(source)) return hopfield::builtin_initial_condition();
    hopfield::initial_condition ic;
    ic.sigma = 0;
    ic.tail.assign(spec.n, 0.0);
    ic.support.push_back(std::vector<double>(spec.n, 1.0));
    return ic;
}

std::vector<double> parse_vector(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw hopfield::config_error("malformed vector component '" + tok + "'");
        }
    }
    if (out.empty()) throw hopfield::config_error("empty vector");
    return out;
}

struct sink {
    std::ofstream file;
    std::ostream* os = &std::cout;
    explicit sink(const std::string& path) {
        if (!path.empty()) {
            file.open(path);
            if (!file) throw hopfield::config_error("cannot open output file '" + path + "'");
            os = &file;
        }
    }
    std::ostream& stream() { return *os; }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Global attractivity analysis of discrete-time Hopfield networks with unbounded delays"};
    app.require_subcommand(1);

    std::string config, matrix_path, output, format = "report", start_vector;
    long horizon = 10000, steps = 2000, conv_window = 50;
    double eps_trunc = 1e-12, conv_tol = 1e-3, tol_minor = 1e-9, tol_fix = 1e-9;
    int q_cap = 10000;
    std::string regime = "hat";

    auto* analyze = app.add_subcommand("analyze", "Full classification report for a matrix file");
    analyze->add_option("matrix", matrix_path, "matrix file (first line n, then n rows; fractions ok)")
        ->required();
    analyze->add_option("--tol-minor", tol_minor, "zero threshold relative to the matrix norm");
    analyze->add_option("--output", output, "write the report to a file instead of stdout");

    auto* matrix_cmd = app.add_subcommand("matrix", "One-line classification of a matrix file");
    matrix_cmd->add_option("matrix", matrix_path, "matrix file")->required();
    matrix_cmd->add_option("--tol-minor", tol_minor, "zero threshold relative to the matrix norm");

    auto* check = app.add_subcommand("check", "Attractivity verdict for a model config");
    check->add_option("config", config, "config file or builtin name (example-4.1, example-4.2)")
        ->required();
    check->add_option("--horizon", horizon, "sampling horizon for hypothesis checks");
    check->add_option("--start-vector", start_vector, "comma-separated start for the plus-regime bound");
    check->add_option("--output", output, "write the report to a file");
    check->add_option("--format", format, "report output format")
        ->check(CLI::IsMember({"report"}));

    auto* bound = app.add_subcommand("bound", "Bound-iteration trace as CSV (columns q, S_1..S_n)");
    bound->add_option("config", config, "config file or builtin name")->required();
    bound->add_option("--regime", regime, "hat (limsup summaries) or plus (sup summaries)")
        ->check(CLI::IsMember({"hat", "plus"}));
    bound->add_option("--start-vector", start_vector, "comma-separated start (plus regime)");
    bound->add_option("--q-cap", q_cap, "iteration cap");
    bound->add_option("--tol-fix", tol_fix, "fixed-point stopping tolerance");
    bound->add_option("--horizon", horizon, "sampling horizon for coefficient summaries");
    bound->add_option("--output", output, "write the CSV to a file");
    bound->add_option("--format", format, "trace output format")->check(CLI::IsMember({"csv"}));

    auto* simulate = app.add_subcommand("simulate", "Trajectory CSV (columns m, x_1..x_n, sup_norm, tail_err)");
    simulate->add_option("config", config, "config file or builtin name")->required();
    simulate->add_option("--steps", steps, "number of forward steps");
    simulate->add_option("--eps-trunc", eps_trunc, "certified kernel-tail truncation budget per step");
    simulate->add_option("--conv-tol", conv_tol, "convergence threshold on the sup norm");
    simulate->add_option("--conv-window", conv_window, "window length for convergence detection");
    simulate->add_option("--horizon", horizon, "sampling horizon for the boundedness monitor");
    simulate->add_option("--output", output, "write the CSV to a file");
    simulate->add_option("--format", format, "trajectory output format")->check(CLI::IsMember({"csv"}));

    auto* example = app.add_subcommand("example", "Run check + simulate on a builtin example");
    example->add_option("name", config, "example-4.1 or example-4.2")->required();
    example->add_option("--steps", steps, "simulation steps");
    example->add_option("--eps-trunc", eps_trunc, "truncation budget");
    example->add_option("--conv-tol", conv_tol, "convergence threshold");
    example->add_option("--conv-window", conv_window, "convergence window");
    example->add_option("--horizon", horizon, "sampling horizon");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) {
            sink out(output);
            auto m = load_matrix(matrix_path);
            out.stream() << "matrix analysis of " << matrix_path << "\n";
            hopfield::write_matrix_report(out.stream(), m, hopfield::classify(m, tol_minor));
            return exit_ok;
        }

        if (*matrix_cmd) {
            auto m = load_matrix(matrix_path);
            auto cls = hopfield::classify(m, tol_minor);
            std::cout << to_string(cls.m_class) << (cls.is_z ? "" : " (not a Z-matrix)")
                      << (cls.irreducible ? ", irreducible" : ", reducible") << "\n";
            return exit_ok;
        }

        if (*check) {
            auto spec = load_config(config);
            hopfield::decide_options opts;
            opts.horizon = horizon;
            opts.tol_minor = tol_minor;
            if (!start_vector.empty()) opts.start_vector = parse_vector(start_vector);
            auto rep = hopfield::decide(spec, opts);
            sink out(output);
            hopfield::write_criterion_report(out.stream(), rep, spec.name.empty() ? config : spec.name);
            return rep.attractive() ? exit_ok : exit_inconclusive;
        }

        if (*bound) {
            auto spec = load_config(config);
            auto summary = hopfield::summarize_coefficients(spec, horizon);
            std::vector<double> start;
            if (!start_vector.empty()) start = parse_vector(start_vector);
            auto regime_kind =
                regime == "hat" ? hopfield::bound_regime::hat : hopfield::bound_regime::plus;
            auto it = hopfield::iterate_bound(spec, summary, regime_kind, start, q_cap, tol_fix);
            sink out(output);
            hopfield::write_bound_csv(out.stream(), it);
            return exit_ok;
        }

        if (*simulate) {
            auto spec = load_config(config);
            hopfield::sim_options opts;
            opts.eps_trunc = eps_trunc;
            opts.conv_tol = conv_tol;
            opts.conv_window = conv_window;
            try {
                auto hyp = hopfield::check_hypotheses(spec, horizon);
                auto summary = hopfield::summarize_coefficients(spec, horizon);
                opts.monitor = hopfield::make_bound_monitor(spec, summary, hyp.input_total_bounds);
            } catch (const hopfield::error&) {
                // no monitor when summaries are unavailable; simulation still runs
            }
            auto ic = default_initial_condition(spec, config);
            auto rep = hopfield::run(spec, ic, steps, opts);
            sink out(output);
            hopfield::write_trajectory_csv(out.stream(), rep);
            if (rep.converged_at)
                std::cerr << "converged at m = " << *rep.converged_at << "\n";
            else
                std::cerr << "no convergence within " << steps << " steps (tol " << conv_tol << ")\n";
            if (rep.bounded_flag) std::cerr << "warning: a-priori boundedness estimate exceeded\n";
            return exit_ok;
        }

        if (*example) {
            const hopfield::builtin_example* ex = hopfield::find_builtin(config);
            if (!ex) throw hopfield::config_error("unknown example '" + config + "' (try example-4.1)");
            auto spec = hopfield::load_builtin(config);
            hopfield::decide_options opts;
            opts.horizon = horizon;
            auto rep = hopfield::decide(spec, opts);

            std::cout << "== " << ex->name << ": " << ex->summary << " ==\n\n";
            const hopfield::square_matrix& computed =
                ex->ref_kind == hopfield::reference_matrix_kind::hat ? rep.m_hat : rep.m_plus;
            std::cout << (ex->ref_kind == hopfield::reference_matrix_kind::hat
                              ? "limsup criterion matrix, reference vs computed:\n"
                              : "sup criterion matrix, reference vs computed:\n");
            auto refm = hopfield::builtin_reference_matrix(*ex);
            for (int i = 0; i < 3; ++i) {
                std::cout << "  [";
                for (int j = 0; j < 3; ++j)
                    std::cout << (j ? " " : "") << hopfield::format_sig(refm.at(i, j), 6);
                std::cout << "]   [";
                for (int j = 0; j < 3; ++j)
                    std::cout << (j ? " " : "") << hopfield::format_sig(computed.at(i, j), 6);
                std::cout << "]\n";
            }
            std::cout << "\n";
            hopfield::write_criterion_report(std::cout, rep, std::string(ex->name));

            hopfield::sim_options sopts;
            sopts.eps_trunc = eps_trunc;
            sopts.conv_tol = conv_tol;
            sopts.conv_window = conv_window;
            sopts.monitor = hopfield::make_bound_monitor(spec, rep.summaries,
                                                         rep.hypotheses.input_total_bounds);
            auto sim = hopfield::run(spec, hopfield::builtin_initial_condition(), steps, sopts);
            std::cout << "\nsimulation (" << steps << " steps from the reference pre-history): ";
            if (sim.converged_at)
                std::cout << "sup norm below " << conv_tol << " from m = " << *sim.converged_at << "\n";
            else
                std::cout << "no convergence detected\n";
            if (sim.bounded_flag) std::cout << "warning: a-priori boundedness estimate exceeded\n";
            return rep.attractive() ? exit_ok : exit_inconclusive;
        }
    } catch (const hopfield::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_error;
    }
    return exit_error;
}
