#include "sylva/truncate.hpp"

#include <cmath>
#include <deque>
#include <utility>
#include <vector>

#include "sylva/errors.hpp"
#include "sylva/rng.hpp"

namespace sylva {

namespace {

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

/// Walks one random play from `at` and returns the reached terminal's score.
double rollout(const DecisionTree& tree, const NodeId& at, const Belief& belief,
               const BernoulliUtility& utility, SplitMix64& rng) {
    NodeId current = at;
    while (true) {
        const Node& node = tree.node(current);
        switch (node.kind) {
        case NodeKind::Terminal:
            return terminal_value(current, node, belief, utility);
        case NodeKind::Decision:
            current = node.children[rng.next_index(node.children.size())];
            break;
        case NodeKind::Chance: {
            const double u = rng.next_unit();
            double cumulative = 0.0;
            NodeId picked = node.children.back();
            for (const NodeId& child : node.children) {
                cumulative += node.edge_probs.at(child);
                if (u < cumulative) {
                    picked = child;
                    break;
                }
            }
            current = picked;
            break;
        }
        case NodeKind::Event: {
            const double u = rng.next_unit();
            double cumulative = 0.0;
            NodeId picked = node.children.back();
            for (const NodeId& child : node.children) {
                cumulative += cond_prob(belief, tree.node(child).event, node.event);
                if (u < cumulative) {
                    picked = child;
                    break;
                }
            }
            current = picked;
            break;
        }
        }
    }
}

} // namespace

DecisionTree truncate(const DecisionTree& tree, const CutSet& cuts) {
    if (cuts.empty()) {
        return tree;
    }
    for (const NodeId& cut : cuts) {
        const Node& node = tree.node(cut);
        if (node.kind == NodeKind::Terminal) {
            throw DomainError("cut node '" + cut + "' is a terminal");
        }
        if (cut == tree.root()) {
            throw DomainError("the root cannot be cut");
        }
        // Nested cuts are ambiguous, so reject a cut below another cut.
        std::deque<NodeId> frontier(node.children.begin(), node.children.end());
        while (!frontier.empty()) {
            const NodeId id = frontier.front();
            frontier.pop_front();
            if (cuts.count(id) != 0) {
                throw DomainError("cut node '" + id + "' lies below cut node '" + cut + "'");
            }
            const auto& children = tree.node(id).children;
            frontier.insert(frontier.end(), children.begin(), children.end());
        }
    }

    std::map<NodeId, Node> nodes;
    std::deque<NodeId> frontier{tree.root()};
    while (!frontier.empty()) {
        const NodeId id = frontier.front();
        frontier.pop_front();
        const Node& node = tree.node(id);
        if (cuts.count(id) != 0) {
            Node stub;
            stub.kind = NodeKind::Terminal;
            stub.event = node.event;
            stub.payload = Evaluation{};
            nodes.emplace(id, std::move(stub));
            continue;
        }
        nodes.emplace(id, node);
        frontier.insert(frontier.end(), node.children.begin(), node.children.end());
    }
    return DecisionTree(tree.root(), std::move(nodes));
}

DecisionTree attach_evaluation(const DecisionTree& tree, const NodeId& at, double gamma_hat) {
    const Node& node = tree.node(at);
    if (node.kind != NodeKind::Terminal || !node.payload.has_value() ||
        !std::holds_alternative<Evaluation>(*node.payload)) {
        throw DomainError("node '" + at + "' is not an evaluation terminal");
    }
    if (!std::isfinite(gamma_hat)) {
        throw DomainError("attached evaluation must be finite");
    }
    std::map<NodeId, Node> nodes = tree.nodes();
    nodes.at(at).payload = Evaluation{gamma_hat};
    return DecisionTree(tree.root(), std::move(nodes));
}

RolloutStats mcts_estimate_stats(const DecisionTree& tree, const NodeId& at, const Belief& belief,
                                 const BernoulliUtility& utility, const RolloutConfig& cfg) {
    if (cfg.rollouts == 0) {
        throw DomainError("rollout budget must be at least 1");
    }
    // Reject unset evaluations up front; a rollout that reaches one has no
    // score, and whether one is reached would depend on the seed.
    std::deque<NodeId> frontier{at};
    std::set<NodeId> seen{at};
    while (!frontier.empty()) {
        const NodeId id = frontier.front();
        frontier.pop_front();
        const Node& node = tree.node(id);
        if (node.kind == NodeKind::Terminal && node.payload.has_value()) {
            if (const auto* evaluation = std::get_if<Evaluation>(&*node.payload)) {
                if (!evaluation->value.has_value()) {
                    throw DomainError("terminal '" + id + "' carries an unset evaluation");
                }
            }
        }
        for (const NodeId& child : node.children) {
            if (seen.insert(child).second) {
                frontier.push_back(child);
            }
        }
    }

    std::vector<double> values;
    values.reserve(cfg.rollouts);
    for (std::uint64_t i = 0; i < cfg.rollouts; ++i) {
        SplitMix64 rng = substream(cfg.seed, i);
        values.push_back(rollout(tree, at, belief, utility, rng));
    }

    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    const double mean = sum / static_cast<double>(values.size());

    double squared = 0.0;
    for (double v : values) {
        squared += (v - mean) * (v - mean);
    }
    const double variance =
        values.size() > 1 ? squared / static_cast<double>(values.size() - 1) : 0.0;

    return RolloutStats{mean, variance, cfg.rollouts};
}

double mcts_estimate(const DecisionTree& tree, const NodeId& at, const Belief& belief,
                     const BernoulliUtility& utility, const RolloutConfig& cfg) {
    return mcts_estimate_stats(tree, at, belief, utility, cfg).mean;
}

} // namespace sylva
