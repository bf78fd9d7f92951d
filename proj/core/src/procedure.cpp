#include "sylva/procedure.hpp"

#include <algorithm>
#include <deque>
#include <utility>
#include <vector>

#include "sylva/errors.hpp"
#include "sylva/rng.hpp"

namespace sylva {

namespace {

struct AgentState {
    DecisionTree tree;
    Belief belief;
    BernoulliUtility utility;
};

double terminal_value(const NodeId& id, const Node& node, const Belief& belief,
                      const BernoulliUtility& utility) {
    if (const auto* lottery = std::get_if<AaLottery>(&*node.payload)) {
        return aa_expected_utility(*lottery, belief, utility.values());
    }
    const auto& evaluation = std::get<Evaluation>(*node.payload);
    if (!evaluation.value.has_value()) {
        throw DomainError("terminal '" + id + "' carries an unset evaluation");
    }
    return *evaluation.value;
}

/// Non-terminal nodes exactly `depth` edges below the continuation's root.
CutSet cuts_at_depth(const DecisionTree& cont, int depth) {
    CutSet cuts;
    std::deque<std::pair<NodeId, int>> frontier{{cont.root(), 0}};
    while (!frontier.empty()) {
        const auto [id, level] = frontier.front();
        frontier.pop_front();
        const Node& node = cont.node(id);
        if (level == depth) {
            if (node.kind != NodeKind::Terminal) {
                cuts.insert(id);
            }
            continue;
        }
        for (const NodeId& child : node.children) {
            frontier.emplace_back(child, level + 1);
        }
    }
    return cuts;
}

struct PlanResult {
    EvaluationReport report;
    std::map<NodeId, double> estimates;
};

/// One planning cycle: truncate the agent's continuation at the lookahead
/// depth, estimate each cut by rollouts in the truth, and evaluate what is
/// left. Streams for the estimates are consumed from next_stream.
PlanResult plan_from(const NodeId& at, const AgentState& agent, const DecisionTree& truth,
                     const AgentConfig& cfg, std::uint64_t seed, std::uint64_t& next_stream) {
    if (!agent.tree.contains(at)) {
        throw DomainError("the agent's model does not contain node '" + at + "'");
    }
    const DecisionTree cont = continuation(agent.tree, at);
    const CutSet cuts = cuts_at_depth(cont, cfg.depth);
    DecisionTree truncated = truncate(cont, cuts);
    std::map<NodeId, double> estimates;
    for (const NodeId& cut : cuts) {
        if (!truth.contains(cut)) {
            throw DomainError("cut node '" + cut + "' is not part of the truth tree");
        }
        const RolloutConfig rollout_cfg{cfg.rollout_cfg.rollouts,
                                        substream_state(seed, next_stream++)};
        const double gamma_hat = mcts_estimate(truth, cut, agent.belief, agent.utility,
                                               rollout_cfg);
        truncated = attach_evaluation(truncated, cut, gamma_hat);
        estimates.emplace(cut, gamma_hat);
    }
    return PlanResult{evaluate(truncated, agent.belief, agent.utility), std::move(estimates)};
}

NodeId sample_move(const DecisionTree& truth, const Node& node, const Belief& world_belief,
                   SplitMix64& rng) {
    const double u = rng.next_unit();
    double cumulative = 0.0;
    NodeId picked = node.children.back();
    for (const NodeId& child : node.children) {
        cumulative += node.kind == NodeKind::Chance
                          ? node.edge_probs.at(child)
                          : cond_prob(world_belief, truth.node(child).event, node.event);
        if (u < cumulative) {
            picked = child;
            break;
        }
    }
    return picked;
}

} // namespace

EpisodeTrace run_procedure(const DecisionTree& truth, const Belief& belief,
                           const BernoulliUtility& utility, const AgentConfig& cfg,
                           std::uint64_t seed) {
    if (cfg.depth < 1) {
        throw DomainError("lookahead depth must be at least 1");
    }
    if (cfg.rollout_cfg.rollouts == 0) {
        throw DomainError("rollout budget must be at least 1");
    }
    ValidationReport truth_report = validate(truth);
    if (!truth_report.ok()) {
        throw DomainError("truth tree fails validation:\n" + truth_report.to_string());
    }
    for (const State& state : truth.node(truth.root()).event) {
        if (!belief.contains(state)) {
            throw DomainError("belief has no mass for root-event state '" + state + "'");
        }
    }

    AgentState agent = cfg.initial_model.has_value()
                           ? AgentState{cfg.initial_model->tree, cfg.initial_model->belief,
                                        cfg.initial_model->utility}
                           : AgentState{truth, belief, utility};
    if (cfg.initial_model.has_value()) {
        ValidationReport model_report = validate(agent.tree);
        if (!model_report.ok()) {
            throw DomainError("initial model fails validation:\n" + model_report.to_string());
        }
    }

    std::vector<bool> applied(cfg.script.size(), false);
    auto apply_entry = [&](std::size_t index) {
        try {
            DecisionTree next = apply_step(agent.tree, cfg.script[index].step);
            Belief next_belief = extend_beliefs(agent.belief, cfg.script[index].step.extension);
            BernoulliUtility next_utility =
                extend_utility(agent.utility, cfg.script[index].step.extension);
            agent = AgentState{std::move(next), std::move(next_belief), std::move(next_utility)};
        } catch (const InternalError&) {
            throw;
        } catch (const Error& error) {
            throw DomainError("script entry " + std::to_string(index) + ": " + error.what());
        }
        applied[index] = true;
    };
    for (std::size_t i = 0; i < cfg.script.size(); ++i) {
        if (!cfg.script[i].trigger.has_value()) {
            apply_entry(i);
        }
    }

    EpisodeTrace trace{{}, {}, 0.0, {}, agent.tree, agent.belief, agent.utility};
    std::uint64_t next_stream = 0;
    NodeId current = truth.root();
    while (true) {
        trace.path.push_back(current);
        for (std::size_t i = 0; i < cfg.script.size(); ++i) {
            if (!applied[i] && cfg.script[i].trigger == current) {
                apply_entry(i);
            }
        }

        const Node& truth_node = truth.node(current);
        StepRecord record;
        record.node = current;
        record.model_nodes = agent.tree.nodes().size();

        if (truth_node.kind == NodeKind::Terminal) {
            trace.realized_utility = terminal_value(current, truth_node, agent.belief,
                                                    agent.utility);
            trace.steps.push_back(std::move(record));
            break;
        }

        PlanResult plan = plan_from(current, agent, truth, cfg, seed, next_stream);
        record.estimates = plan.estimates;
        for (const auto& [node, choice] : plan.report.policy) {
            trace.induced_policy[node] = choice;
        }

        NodeId chosen;
        if (truth_node.kind == NodeKind::Decision) {
            auto it = plan.report.policy.find(current);
            if (it == plan.report.policy.end()) {
                throw DomainError("the agent has no plan at decision node '" + current + "'");
            }
            chosen = it->second;
            if (std::find(truth_node.children.begin(), truth_node.children.end(), chosen) ==
                truth_node.children.end()) {
                throw DomainError("the agent chose '" + chosen +
                                  "', which the world does not offer at '" + current + "'");
            }
        } else {
            SplitMix64 rng = substream(seed, next_stream++);
            chosen = sample_move(truth, truth_node, belief, rng);
        }
        record.chosen = chosen;
        trace.steps.push_back(std::move(record));
        current = chosen;
    }

    // The sampled walk covers one branch of each chance and event node, while
    // regret needs a choice at every decision node its policy can reach.
    // Re-plan at the first uncovered one until none is left; the walk's own
    // choices are never overwritten.
    auto covered = [&](const NodeId& id) {
        auto it = trace.induced_policy.find(id);
        if (it == trace.induced_policy.end()) {
            return false;
        }
        const auto& children = truth.node(id).children;
        return std::find(children.begin(), children.end(), it->second) != children.end();
    };
    while (true) {
        NodeId uncovered;
        bool found = false;
        std::vector<NodeId> stack{truth.root()};
        while (!stack.empty() && !found) {
            const NodeId id = stack.back();
            stack.pop_back();
            const Node& node = truth.node(id);
            if (node.kind == NodeKind::Decision) {
                if (covered(id)) {
                    stack.push_back(trace.induced_policy.at(id));
                } else {
                    uncovered = id;
                    found = true;
                }
            } else {
                stack.insert(stack.end(), node.children.rbegin(), node.children.rend());
            }
        }
        if (!found) {
            break;
        }
        PlanResult plan = plan_from(uncovered, agent, truth, cfg, seed, next_stream);
        for (const auto& [node, choice] : plan.report.policy) {
            if (!covered(node)) {
                trace.induced_policy[node] = choice;
            }
        }
        if (!covered(uncovered)) {
            throw DomainError("completion cannot cover decision node '" + uncovered + "'");
        }
    }

    trace.final_model = agent.tree;
    trace.final_belief = agent.belief;
    trace.final_utility = agent.utility;
    return trace;
}

double regret(const DecisionTree& truth, const Belief& belief, const BernoulliUtility& utility,
              const EpisodeTrace& trace) {
    const double best = evaluate(truth, belief, utility).value.at(truth.root());
    const double achieved =
        evaluate_policy(truth, belief, utility, trace.induced_policy).value.at(truth.root());
    return best - achieved;
}

} // namespace sylva
