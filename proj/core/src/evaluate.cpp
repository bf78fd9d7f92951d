#include "sylva/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "sylva/errors.hpp"

namespace sylva {

namespace {

void require_evaluable(const DecisionTree& tree, const Belief& belief) {
    ValidationReport report = validate(tree);
    if (!report.ok()) {
        throw DomainError("tree fails validation:\n" + report.to_string());
    }
    for (const State& state : tree.node(tree.root()).event) {
        if (!belief.contains(state)) {
            throw DomainError("belief has no mass for root-event state '" + state + "'");
        }
    }
}

/// Pre-order listing; reversing it puts every child before its parent.
std::vector<NodeId> preorder(const DecisionTree& tree, const NodeId& from) {
    std::vector<NodeId> order;
    std::vector<NodeId> stack{from};
    while (!stack.empty()) {
        const NodeId id = stack.back();
        stack.pop_back();
        order.push_back(id);
        const auto& children = tree.node(id).children;
        stack.insert(stack.end(), children.begin(), children.end());
    }
    return order;
}

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

} // namespace

BernoulliUtility::BernoulliUtility(UtilityMap values, Outcome y_low, Outcome y_high)
    : values_(std::move(values)), y_low_(std::move(y_low)), y_high_(std::move(y_high)) {
    for (const auto& [outcome, value] : values_) {
        if (!std::isfinite(value)) {
            throw DomainError("utility of consequence '" + outcome + "' is not finite");
        }
    }
    auto low = values_.find(y_low_);
    auto high = values_.find(y_high_);
    if (low == values_.end() || high == values_.end()) {
        throw DomainError("utility anchors must have values");
    }
    if (!(high->second > low->second)) {
        throw DomainError("utility anchors must satisfy u(y_high) > u(y_low)");
    }
}

double BernoulliUtility::at(const Outcome& outcome) const {
    auto it = values_.find(outcome);
    if (it == values_.end()) {
        throw LookupError("no utility value for consequence '" + outcome + "'");
    }
    return it->second;
}

BernoulliUtility BernoulliUtility::normalize() const {
    const double low = values_.at(y_low_);
    const double high = values_.at(y_high_);
    const double span = high - low;
    UtilityMap scaled;
    for (const auto& [outcome, value] : values_) {
        scaled.emplace(outcome, (value - low) / span);
    }
    scaled[y_low_] = 0.0;
    scaled[y_high_] = 1.0;
    return BernoulliUtility(std::move(scaled), y_low_, y_high_);
}

double cond_prob(const Belief& belief, const std::set<State>& child_event,
                 const std::set<State>& parent_event) {
    if (!std::includes(parent_event.begin(), parent_event.end(), child_event.begin(),
                       child_event.end())) {
        throw DomainError("conditioning event does not contain the conditioned one");
    }
    const double parent_mass = belief.mass_of(parent_event);
    if (parent_mass <= 0.0) {
        throw DomainError("conditioning event has no belief mass");
    }
    return belief.mass_of(child_event) / parent_mass;
}

EvaluationReport evaluate(const DecisionTree& tree, const Belief& belief,
                          const BernoulliUtility& utility) {
    require_evaluable(tree, belief);

    const std::vector<NodeId> order = preorder(tree, tree.root());
    EvaluationReport report;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const NodeId& id = *it;
        const Node& node = tree.node(id);
        double value = 0.0;
        switch (node.kind) {
        case NodeKind::Terminal:
            value = terminal_value(id, node, belief, utility);
            break;
        case NodeKind::Decision: {
            const NodeId* best = nullptr;
            for (const NodeId& child : node.children) {
                const double child_value = report.value.at(child);
                if (best == nullptr || child_value > value) {
                    best = &child;
                    value = child_value;
                }
            }
            report.policy[id] = *best;
            break;
        }
        case NodeKind::Chance:
            for (const NodeId& child : node.children) {
                value += node.edge_probs.at(child) * report.value.at(child);
            }
            break;
        case NodeKind::Event:
            for (const NodeId& child : node.children) {
                const double weight = cond_prob(belief, tree.node(child).event, node.event);
                value += weight * report.value.at(child);
            }
            break;
        }
        report.value.emplace(id, value);
    }
    return report;
}

EvaluationReport evaluate_policy(const DecisionTree& tree, const Belief& belief,
                                 const BernoulliUtility& utility, const Policy& pol) {
    require_evaluable(tree, belief);

    // Pre-order over the nodes reachable when pol picks every decision.
    std::vector<NodeId> order;
    std::vector<NodeId> stack{tree.root()};
    while (!stack.empty()) {
        const NodeId id = stack.back();
        stack.pop_back();
        order.push_back(id);
        const Node& node = tree.node(id);
        if (node.kind == NodeKind::Decision) {
            auto it = pol.find(id);
            if (it == pol.end()) {
                throw DomainError("policy has no choice at decision node '" + id + "'");
            }
            if (std::find(node.children.begin(), node.children.end(), it->second) ==
                node.children.end()) {
                throw DomainError("policy choice '" + it->second + "' is not a child of '" + id +
                                  "'");
            }
            stack.push_back(it->second);
        } else {
            stack.insert(stack.end(), node.children.begin(), node.children.end());
        }
    }

    EvaluationReport report;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const NodeId& id = *it;
        const Node& node = tree.node(id);
        double value = 0.0;
        switch (node.kind) {
        case NodeKind::Terminal:
            value = terminal_value(id, node, belief, utility);
            break;
        case NodeKind::Decision: {
            const NodeId& chosen = pol.at(id);
            value = report.value.at(chosen);
            report.policy[id] = chosen;
            break;
        }
        case NodeKind::Chance:
            for (const NodeId& child : node.children) {
                value += node.edge_probs.at(child) * report.value.at(child);
            }
            break;
        case NodeKind::Event:
            for (const NodeId& child : node.children) {
                const double weight = cond_prob(belief, tree.node(child).event, node.event);
                value += weight * report.value.at(child);
            }
            break;
        }
        report.value.emplace(id, value);
    }
    return report;
}

} // namespace sylva
