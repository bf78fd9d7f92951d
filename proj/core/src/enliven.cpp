#include "sylva/enliven.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <utility>
#include <vector>

#include "sylva/errors.hpp"

namespace sylva {

namespace {

void require_valid(const DecisionTree& tree, const char* what) {
    ValidationReport report = validate(tree);
    if (!report.ok()) {
        throw DomainError(std::string(what) + " fails validation:\n" + report.to_string());
    }
}

std::map<NodeId, NodeId> parents_of(const DecisionTree& tree) {
    std::map<NodeId, NodeId> parent;
    for (const auto& [id, node] : tree.nodes()) {
        for (const NodeId& child : node.children) {
            parent.emplace(child, id);
        }
    }
    return parent;
}

void replace_child(Node& parent, const NodeId& old_child, const NodeId& new_child) {
    for (NodeId& child : parent.children) {
        if (child == old_child) {
            child = new_child;
            break;
        }
    }
    auto it = parent.edge_probs.find(old_child);
    if (it != parent.edge_probs.end()) {
        const double p = it->second;
        parent.edge_probs.erase(it);
        parent.edge_probs.emplace(new_child, p);
    }
}

/// Pushes the deviation states through a subtree that sits off the enlivened
/// path: every node's event absorbs them, event nodes fold them into their
/// first stored cell, and terminal lotteries replicate the row of their first
/// original carrier state.
void flood_deviation(std::map<NodeId, Node>& nodes, const NodeId& start,
                     const std::set<State>& deviation) {
    std::vector<NodeId> stack{start};
    while (!stack.empty()) {
        const NodeId id = stack.back();
        stack.pop_back();
        Node& node = nodes.at(id);
        node.event.insert(deviation.begin(), deviation.end());
        switch (node.kind) {
        case NodeKind::Decision:
        case NodeKind::Chance:
            stack.insert(stack.end(), node.children.begin(), node.children.end());
            break;
        case NodeKind::Event:
            stack.push_back(node.children.front());
            break;
        case NodeKind::Terminal:
            if (const auto* lottery = std::get_if<AaLottery>(&*node.payload)) {
                std::map<State, Lottery> rows = lottery->rows();
                const Lottery first = rows.begin()->second;
                for (const State& state : deviation) {
                    rows.emplace(state, first);
                }
                node.payload = AaLottery::over(rows);
            }
            break;
        }
    }
}

DecisionTree apply_terminal(const DecisionTree& tree, const TerminalEnlivenment& action) {
    const Node& target = tree.node(action.at);
    if (target.kind != NodeKind::Terminal) {
        throw DomainError("enlivened node '" + action.at + "' is not a terminal");
    }
    require_valid(action.subtree, "grafted subtree");
    const Node& graft_root = action.subtree.node(action.subtree.root());
    if (graft_root.event != target.event) {
        throw DomainError("graft root must carry the replaced terminal's event");
    }
    for (const auto& [id, node] : action.subtree.nodes()) {
        if (id != action.at && tree.contains(id)) {
            throw DomainError("graft node id '" + id + "' already exists in the tree");
        }
    }

    std::map<NodeId, NodeId> parent = parents_of(tree);
    std::map<NodeId, Node> nodes = tree.nodes();
    nodes.erase(action.at);
    for (const auto& [id, node] : action.subtree.nodes()) {
        nodes.emplace(id, node);
    }

    NodeId root = tree.root();
    if (action.at == tree.root()) {
        root = action.subtree.root();
    } else {
        replace_child(nodes.at(parent.at(action.at)), action.at, action.subtree.root());
    }
    return DecisionTree(std::move(root), std::move(nodes));
}

DecisionTree apply_edge(const DecisionTree& tree, const EdgeEnlivenment& action,
                        const DomainExtension& ext) {
    const Node& from_node = tree.node(action.from);
    tree.node(action.to);
    if (std::find(from_node.children.begin(), from_node.children.end(), action.to) ==
        from_node.children.end()) {
        throw DomainError("'" + action.to + "' is not a child of '" + action.from + "'");
    }
    if (action.deviation_states.empty()) {
        throw DomainError("edge enlivenment needs at least one deviation state");
    }
    for (const State& state : action.deviation_states) {
        if (ext.new_state_mass.count(state) == 0) {
            throw DomainError("deviation state '" + state +
                              "' is not among the step's new states");
        }
    }
    const std::set<State>& root_event = tree.node(tree.root()).event;
    for (const State& state : action.deviation_states) {
        if (root_event.count(state) != 0) {
            throw DomainError("deviation state '" + state + "' already occurs in the tree");
        }
    }
    require_valid(action.subtree, "grafted subtree");
    if (action.subtree.node(action.subtree.root()).event != action.deviation_states) {
        throw DomainError("graft root must carry exactly the deviation states");
    }
    if (tree.contains(action.event_node) || action.subtree.contains(action.event_node)) {
        throw DomainError("event node id '" + action.event_node + "' is not fresh");
    }
    for (const auto& [id, node] : action.subtree.nodes()) {
        if (tree.contains(id)) {
            throw DomainError("graft node id '" + id + "' already exists in the tree");
        }
    }

    std::map<NodeId, NodeId> parent = parents_of(tree);
    std::map<NodeId, Node> nodes = tree.nodes();
    for (const auto& [id, node] : action.subtree.nodes()) {
        nodes.emplace(id, node);
    }

    Node spliced;
    spliced.kind = NodeKind::Event;
    spliced.children = {action.to, action.subtree.root()};
    spliced.event = tree.node(action.to).event;
    spliced.event.insert(action.deviation_states.begin(), action.deviation_states.end());
    nodes.emplace(action.event_node, std::move(spliced));
    replace_child(nodes.at(action.from), action.to, action.event_node);

    // Every ancestor's event absorbs the deviation states. Where the ancestor
    // is a decision or chance node its off-path children must absorb them
    // too; at event ancestors only the path cell grows, which the walk itself
    // covers.
    NodeId path_child = action.event_node;
    NodeId current = action.from;
    while (true) {
        Node& node = nodes.at(current);
        node.event.insert(action.deviation_states.begin(), action.deviation_states.end());
        if (node.kind == NodeKind::Decision || node.kind == NodeKind::Chance) {
            for (const NodeId& child : node.children) {
                if (child != path_child) {
                    flood_deviation(nodes, child, action.deviation_states);
                }
            }
        }
        auto it = parent.find(current);
        if (it == parent.end()) {
            break;
        }
        path_child = current;
        current = it->second;
    }

    return DecisionTree(tree.root(), std::move(nodes));
}

} // namespace

double DomainExtension::epsilon() const {
    double total = 0.0;
    for (const auto& [state, mass] : new_state_mass) {
        total += mass;
    }
    return total;
}

BernoulliUtility extend_utility(const BernoulliUtility& utility, const DomainExtension& ext) {
    UtilityMap values = utility.values();
    for (const auto& [outcome, value] : ext.new_consequences) {
        if (!values.emplace(outcome, value).second) {
            throw DomainError("consequence '" + outcome + "' already has a utility value");
        }
    }
    return BernoulliUtility(std::move(values), utility.y_low(), utility.y_high());
}

Belief extend_beliefs(const Belief& belief, const DomainExtension& ext) {
    const double eps = ext.epsilon();
    if (!(eps < 1.0)) {
        throw DomainError("new states must receive total mass below 1");
    }
    std::map<State, double> mass;
    for (const auto& [state, p] : belief.mass()) {
        mass.emplace(state, (1.0 - eps) * p);
    }
    for (const auto& [state, p] : ext.new_state_mass) {
        if (!std::isfinite(p) || p <= 0.0) {
            throw DomainError("mass of new state '" + state + "' must be positive");
        }
        if (!mass.emplace(state, p).second) {
            throw DomainError("state '" + state + "' already has belief mass");
        }
    }
    return Belief::over(mass);
}

bool check_reverse_bayes(const Belief& p_plus, const Belief& p, const std::set<State>& old_states,
                         double tol) {
    if (p.mass().size() != old_states.size()) {
        throw DomainError("reference belief must be defined exactly on the old states");
    }
    double total = 0.0;
    for (const State& state : old_states) {
        if (!p.contains(state)) {
            throw DomainError("reference belief must be defined exactly on the old states");
        }
        total += p_plus.at(state);
    }
    for (const State& state : old_states) {
        if (std::abs(p_plus.at(state) / total - p.at(state)) > tol) {
            return false;
        }
    }
    return true;
}

DecisionTree apply_step(const DecisionTree& tree, const EnlivenmentStep& step) {
    require_valid(tree, "input tree");
    DecisionTree result = std::holds_alternative<TerminalEnlivenment>(step.action)
                              ? apply_terminal(tree, std::get<TerminalEnlivenment>(step.action))
                              : apply_edge(tree, std::get<EdgeEnlivenment>(step.action),
                                           step.extension);
    ValidationReport report = validate(result);
    if (!report.ok()) {
        throw InternalError("enlivenment produced an invalid tree:\n" + report.to_string());
    }
    return result;
}

EnlivenedModel apply_script(const DecisionTree& tree, const Belief& belief,
                            const BernoulliUtility& utility,
                            const std::vector<EnlivenmentStep>& script) {
    EnlivenedModel model{tree, belief, utility};
    for (std::size_t i = 0; i < script.size(); ++i) {
        try {
            DecisionTree next = apply_step(model.tree, script[i]);
            Belief next_belief = extend_beliefs(model.belief, script[i].extension);
            BernoulliUtility next_utility = extend_utility(model.utility, script[i].extension);
            model = EnlivenedModel{std::move(next), std::move(next_belief),
                                   std::move(next_utility)};
        } catch (const InternalError&) {
            throw;
        } catch (const Error& error) {
            throw DomainError("script step " + std::to_string(i) + ": " + error.what());
        }
    }
    return model;
}

CollapseResult collapse(const DecisionTree& tree, const Belief& belief,
                        const std::set<State>& old_states) {
    const Node& root_node = tree.node(tree.root());
    const bool root_alive =
        std::any_of(root_node.event.begin(), root_node.event.end(),
                    [&](const State& state) { return old_states.count(state) != 0; });
    if (!root_alive) {
        throw DomainError("the root event has no old state left");
    }

    auto intersects = [&](const std::set<State>& event) {
        return std::any_of(event.begin(), event.end(),
                           [&](const State& state) { return old_states.count(state) != 0; });
    };

    // Top-down: which children survive, and which event nodes get spliced out
    // because the removal left them with a single cell.
    std::map<NodeId, std::vector<NodeId>> kept_children;
    std::map<NodeId, bool> spliced;
    std::deque<NodeId> frontier{tree.root()};
    while (!frontier.empty()) {
        const NodeId id = frontier.front();
        frontier.pop_front();
        const Node& node = tree.node(id);
        std::vector<NodeId> kept;
        for (const NodeId& child : node.children) {
            if (intersects(tree.node(child).event)) {
                kept.push_back(child);
            }
        }
        const bool reduced = kept.size() < node.children.size();
        spliced[id] = node.kind == NodeKind::Event && reduced && kept.size() == 1;
        for (const NodeId& child : kept) {
            frontier.push_back(child);
        }
        kept_children.emplace(id, std::move(kept));
    }

    auto resolve = [&](NodeId id) {
        while (spliced.at(id)) {
            id = kept_children.at(id).front();
        }
        return id;
    };

    std::map<NodeId, Node> nodes;
    for (const auto& [id, kept] : kept_children) {
        if (spliced.at(id)) {
            continue;
        }
        const Node& node = tree.node(id);
        Node rebuilt;
        rebuilt.kind = node.kind;
        for (const NodeId& child : kept) {
            const NodeId target = resolve(child);
            rebuilt.children.push_back(target);
            auto it = node.edge_probs.find(child);
            if (it != node.edge_probs.end()) {
                rebuilt.edge_probs.emplace(target, it->second);
            }
        }
        for (const State& state : node.event) {
            if (old_states.count(state) != 0) {
                rebuilt.event.insert(state);
            }
        }
        if (node.payload.has_value()) {
            if (const auto* lottery = std::get_if<AaLottery>(&*node.payload)) {
                std::map<State, Lottery> rows;
                for (const auto& [state, row] : lottery->rows()) {
                    if (old_states.count(state) != 0) {
                        rows.emplace(state, row);
                    }
                }
                rebuilt.payload = AaLottery::over(rows);
            } else {
                rebuilt.payload = node.payload;
            }
        }
        nodes.emplace(id, std::move(rebuilt));
    }

    double total = 0.0;
    for (const State& state : old_states) {
        total += belief.at(state);
    }
    std::map<State, double> conditioned;
    for (const State& state : old_states) {
        conditioned.emplace(state, belief.at(state) / total);
    }

    return CollapseResult{DecisionTree(resolve(tree.root()), std::move(nodes)),
                          Belief::over(conditioned)};
}

} // namespace sylva
