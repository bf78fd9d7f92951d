#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sylva/enliven.hpp"
#include "sylva/errors.hpp"
#include "sylva/evaluate.hpp"
#include "sylva/portfolio.hpp"
#include "sylva/procedure.hpp"
#include "sylva/rng.hpp"
#include "sylva/tree_io.hpp"
#include "sylva/truncate.hpp"

namespace {

void write_output(const std::string& path, const std::string& content) {
    if (path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) {
        throw sylva::DomainError("cannot write file '" + path + "'");
    }
}

std::string join_numbers(const sylva::Vector& values) {
    std::string out;
    for (const double value : values) {
        if (!out.empty()) {
            out += ' ';
        }
        out += sylva::format_number(value);
    }
    return out;
}

void print_matrix(const std::string& name, const sylva::Matrix& matrix) {
    for (const sylva::Vector& row : matrix) {
        std::cout << name << ' ' << join_numbers(row) << '\n';
    }
}

const char* yes_no(bool value) {
    return value ? "yes" : "no";
}

int run_validate(const std::string& file, const std::string& dot_path) {
    const sylva::TreeFile loaded = sylva::load_tree_file(file);
    const sylva::ValidationReport report = sylva::validate(loaded.tree);
    std::cout << report.to_string();
    std::cout << (report.ok() ? "valid" : "invalid") << " (" << loaded.tree.nodes().size()
              << " nodes)\n";
    if (!dot_path.empty()) {
        write_output(dot_path, sylva::to_dot(loaded.tree));
    }
    return report.ok() ? 0 : 1;
}

int run_evaluate(const std::string& file, const std::string& csv_path) {
    const sylva::TreeFile loaded = sylva::load_tree_file(file);
    const sylva::EvaluationReport report =
        sylva::evaluate(loaded.tree, loaded.belief, loaded.utility);
    for (const auto& [node, value] : report.value) {
        std::cout << "value " << node << ' ' << sylva::format_number(value) << '\n';
    }
    for (const auto& [node, choice] : report.policy) {
        std::cout << "choice " << node << ' ' << choice << '\n';
    }
    if (!csv_path.empty()) {
        std::string csv = "node,value,choice\n";
        for (const auto& [node, value] : report.value) {
            csv += node;
            csv += ',';
            csv += sylva::format_number(value);
            csv += ',';
            auto it = report.policy.find(node);
            if (it != report.policy.end()) {
                csv += it->second;
            }
            csv += '\n';
        }
        write_output(csv_path, csv);
    }
    return 0;
}

int run_truncate(const std::string& file, const std::vector<std::string>& cuts,
                 const std::string& out_path) {
    const sylva::TreeFile loaded = sylva::load_tree_file(file);
    const sylva::CutSet cut_set(cuts.begin(), cuts.end());
    const sylva::DecisionTree truncated = sylva::truncate(loaded.tree, cut_set);
    write_output(out_path,
                 sylva::serialize_tree_file({truncated, loaded.belief, loaded.utility}));
    return 0;
}

int run_estimate(const std::string& file, const std::string& node, std::uint64_t rollouts,
                 std::uint64_t seed) {
    const sylva::TreeFile loaded = sylva::load_tree_file(file);
    const sylva::RolloutStats stats = sylva::mcts_estimate_stats(
        loaded.tree, node, loaded.belief, loaded.utility, {rollouts, seed});
    std::cout << "mean " << sylva::format_number(stats.mean) << '\n';
    std::cout << "variance " << sylva::format_number(stats.variance) << '\n';
    std::cout << "rollouts " << stats.count << '\n';
    return 0;
}

int run_enliven(const std::string& file, const std::string& script_path,
                const std::string& out_path) {
    const sylva::TreeFile loaded = sylva::load_tree_file(file);
    std::vector<sylva::EnlivenmentStep> steps;
    for (sylva::ScriptEntry& entry : sylva::load_script_file(script_path)) {
        steps.push_back(std::move(entry.step));
    }
    const sylva::EnlivenedModel model =
        sylva::apply_script(loaded.tree, loaded.belief, loaded.utility, steps);
    write_output(out_path, sylva::serialize_tree_file({model.tree, model.belief, model.utility}));
    return 0;
}

int run_simulate(const std::string& file, const std::string& model_path,
                 const std::string& script_path, int depth, std::uint64_t rollouts,
                 std::uint64_t seed, std::uint64_t episodes) {
    const sylva::TreeFile truth = sylva::load_tree_file(file);
    sylva::AgentConfig cfg;
    cfg.depth = depth;
    cfg.rollout_cfg.rollouts = rollouts;
    if (!script_path.empty()) {
        cfg.script = sylva::load_script_file(script_path);
    }
    if (!model_path.empty()) {
        const sylva::TreeFile model = sylva::load_tree_file(model_path);
        cfg.initial_model = sylva::EnlivenedModel{model.tree, model.belief, model.utility};
    }

    double total_regret = 0.0;
    for (std::uint64_t episode = 0; episode < episodes; ++episode) {
        const sylva::EpisodeTrace trace =
            sylva::run_procedure(truth.tree, truth.belief, truth.utility, cfg,
                                 sylva::substream_state(seed, episode));
        std::string path;
        for (const sylva::NodeId& node : trace.path) {
            if (!path.empty()) {
                path += ',';
            }
            path += node;
        }
        const double episode_regret = sylva::regret(truth.tree, truth.belief, truth.utility,
                                                    trace);
        total_regret += episode_regret;
        std::cout << "episode " << episode << " path " << path << '\n';
        std::cout << "episode " << episode << " realized "
                  << sylva::format_number(trace.realized_utility) << '\n';
        std::cout << "episode " << episode << " model_nodes "
                  << trace.final_model.nodes().size() << '\n';
        std::cout << "episode " << episode << " regret " << sylva::format_number(episode_regret)
                  << '\n';
    }
    std::cout << "mean_regret "
              << sylva::format_number(total_regret / static_cast<double>(episodes)) << '\n';
    return 0;
}

int run_portfolio_solve(const std::string& file) {
    const sylva::PortfolioProblem problem = sylva::load_portfolio_file(file);
    const sylva::FirstPeriodReduction reduction = sylva::reduce_first_period(problem);
    const sylva::FirstPeriodSolution solution = sylva::solve_first_period(problem);
    std::cout << "d " << sylva::format_number(reduction.d) << '\n';
    print_matrix("second_moment", reduction.second_moment);
    print_matrix("S", reduction.s);
    std::cout << "b_star " << join_numbers(reduction.b_star) << '\n';
    std::cout << "c " << sylva::format_number(reduction.c) << '\n';
    std::cout << "constant " << sylva::format_number(reduction.constant) << '\n';
    std::cout << "lambda1 " << sylva::format_number(solution.multiplier) << '\n';
    std::cout << "x1 " << join_numbers(solution.x1) << '\n';
    std::cout << "b " << join_numbers(solution.b) << '\n';
    std::cout << "separation_gap " << sylva::format_number(solution.separation_gap) << '\n';
    std::cout << "sensible_multiplier " << yes_no(solution.sensible_multiplier) << '\n';
    std::cout << "sensible_separation " << yes_no(solution.sensible_separation) << '\n';
    std::cout << "ill_conditioned " << yes_no(solution.warn_ill_conditioned) << '\n';
    return 0;
}

int run_portfolio_enlivened(const std::string& file) {
    const std::vector<sylva::EnlivenedScenario> scenarios = sylva::load_enlivened_file(file);
    const sylva::EnlivenedObjective objective = sylva::enlivened_objective(scenarios);
    print_matrix("S_hat", objective.s_hat);
    std::cout << "b_hat_star " << join_numbers(objective.b_hat_star) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"decision tree toolkit: evaluation, truncation, enlivenment, portfolios"};
    app.require_subcommand(1);

    std::string file;
    std::string dot_path;
    std::string csv_path;
    std::string out_path = "-";
    std::string script_path;
    std::string model_path;
    std::string node;
    std::vector<std::string> cuts;
    int depth = 1;
    std::uint64_t rollouts = 1000;
    std::uint64_t seed = 0;
    std::uint64_t episodes = 1;

    CLI::App* validate_cmd = app.add_subcommand("validate", "Check a tree file's invariants");
    validate_cmd->add_option("file", file, "Tree file")->required();
    validate_cmd->add_option("--dot", dot_path, "Write a Graphviz rendering ('-' for stdout)");

    CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "Backward-recurse values and policy");
    evaluate_cmd->add_option("file", file, "Tree file")->required();
    evaluate_cmd->add_option("--csv", csv_path, "Write node,value,choice rows to a file");

    CLI::App* truncate_cmd = app.add_subcommand("truncate", "Cut subtrees at the given nodes");
    truncate_cmd->add_option("file", file, "Tree file")->required();
    truncate_cmd->add_option("--cut", cuts, "Node to cut at (repeatable)");
    truncate_cmd->add_option("--out", out_path, "Output path ('-' for stdout)");

    CLI::App* estimate_cmd =
        app.add_subcommand("estimate", "Estimate a node's continuation value by rollouts");
    estimate_cmd->add_option("file", file, "Tree file")->required();
    estimate_cmd->add_option("--node", node, "Node to estimate")->required();
    estimate_cmd->add_option("--rollouts", rollouts, "Rollout budget (default 1000)");
    estimate_cmd->add_option("--seed", seed, "RNG seed")->required();

    CLI::App* enliven_cmd = app.add_subcommand("enliven", "Apply an enlivenment script");
    enliven_cmd->add_option("file", file, "Tree file")->required();
    enliven_cmd->add_option("--script", script_path, "Script file")->required();
    enliven_cmd->add_option("--out", out_path, "Output path ('-' for stdout)");

    CLI::App* simulate_cmd =
        app.add_subcommand("simulate", "Run the depth-limited agent on a truth tree");
    simulate_cmd->add_option("file", file, "Truth tree file")->required();
    simulate_cmd->add_option("--model", model_path, "Agent's initial model (default: the truth)");
    simulate_cmd->add_option("--script", script_path, "Triggered enlivenment script");
    simulate_cmd->add_option("--depth", depth, "Lookahead depth in edges")->required();
    simulate_cmd->add_option("--rollouts", rollouts, "Rollouts per cut estimate (default 1000)");
    simulate_cmd->add_option("--seed", seed, "RNG seed")->required();
    simulate_cmd->add_option("--episodes", episodes, "Episode count (default 1)");

    CLI::App* portfolio_cmd = app.add_subcommand("portfolio", "Two-period portfolio problems");
    portfolio_cmd->require_subcommand(1);
    CLI::App* solve_cmd =
        portfolio_cmd->add_subcommand("solve", "Reduce and solve a two-period problem");
    solve_cmd->add_option("file", file, "Portfolio file")->required();
    CLI::App* enlivened_cmd = portfolio_cmd->add_subcommand(
        "enlivened", "Fold scenario penalties into one quadratic");
    enlivened_cmd->add_option("file", file, "Enlivened scenario file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*validate_cmd) {
            return run_validate(file, dot_path);
        }
        if (*evaluate_cmd) {
            return run_evaluate(file, csv_path);
        }
        if (*truncate_cmd) {
            return run_truncate(file, cuts, out_path);
        }
        if (*estimate_cmd) {
            return run_estimate(file, node, rollouts, seed);
        }
        if (*enliven_cmd) {
            return run_enliven(file, script_path, out_path);
        }
        if (*simulate_cmd) {
            return run_simulate(file, model_path, script_path, depth, rollouts, seed, episodes);
        }
        if (*solve_cmd) {
            return run_portfolio_solve(file);
        }
        if (*enlivened_cmd) {
            return run_portfolio_enlivened(file);
        }
    } catch (const sylva::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
