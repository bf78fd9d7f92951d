#include "sylva/tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <utility>

#include "sylva/errors.hpp"

namespace sylva {

namespace {

constexpr double kProbabilityTol = 1e-9;

void add_issue(ValidationReport& report, ValidationIssue::Severity severity, const NodeId& node,
               std::string clause, std::string message) {
    report.issues.push_back({severity, node, std::move(clause), std::move(message)});
}

void add_error(ValidationReport& report, const NodeId& node, std::string clause,
               std::string message) {
    add_issue(report, ValidationIssue::Severity::Error, node, std::move(clause),
              std::move(message));
}

std::string join_states(const std::set<State>& states) {
    std::string out = "{";
    bool first = true;
    for (const State& state : states) {
        if (!first) {
            out += ", ";
        }
        out += state;
        first = false;
    }
    out += "}";
    return out;
}

} // namespace

DecisionTree::DecisionTree(NodeId root, std::map<NodeId, Node> nodes)
    : root_(std::move(root)), nodes_(std::move(nodes)) {}

const Node& DecisionTree::node(const NodeId& id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) {
        throw LookupError("unknown node '" + id + "'");
    }
    return it->second;
}

bool ValidationReport::ok() const {
    return std::none_of(issues.begin(), issues.end(), [](const ValidationIssue& issue) {
        return issue.severity == ValidationIssue::Severity::Error;
    });
}

std::string ValidationReport::to_string() const {
    std::ostringstream out;
    for (const ValidationIssue& issue : issues) {
        out << (issue.severity == ValidationIssue::Severity::Error ? "error" : "warning");
        out << " [" << issue.clause << "] node '" << issue.node << "': " << issue.message << "\n";
    }
    return out.str();
}

ValidationReport validate(const DecisionTree& tree) {
    ValidationReport report;
    const auto& nodes = tree.nodes();

    if (!tree.contains(tree.root())) {
        add_error(report, tree.root(), "tree", "root id is not a node");
        return report;
    }

    // Tree-ness: dangling child references and parent multiplicity.
    std::map<NodeId, std::size_t> parent_count;
    bool references_ok = true;
    for (const auto& [id, node] : nodes) {
        for (const NodeId& child : node.children) {
            if (nodes.count(child) == 0) {
                add_error(report, id, "tree", "child '" + child + "' is not a node");
                references_ok = false;
            } else {
                ++parent_count[child];
            }
        }
    }
    if (parent_count.count(tree.root()) != 0) {
        add_error(report, tree.root(), "tree", "root appears as a child");
    }
    for (const auto& [id, count] : parent_count) {
        if (count > 1) {
            add_error(report, id, "tree",
                      "node has " + std::to_string(count) + " parents, expected 1");
        }
    }

    // Reachability (guarded against cycles so the walk always terminates).
    if (references_ok) {
        std::set<NodeId> seen{tree.root()};
        std::deque<NodeId> frontier{tree.root()};
        while (!frontier.empty()) {
            const NodeId id = frontier.front();
            frontier.pop_front();
            for (const NodeId& child : tree.node(id).children) {
                if (seen.insert(child).second) {
                    frontier.push_back(child);
                }
            }
        }
        for (const auto& [id, node] : nodes) {
            if (seen.count(id) == 0) {
                add_error(report, id, "tree", "node is unreachable from the root");
            }
        }
    }

    // Per-node shape and the event correspondence.
    for (const auto& [id, node] : nodes) {
        if (node.event.empty()) {
            add_error(report, id, "events", "event is empty");
        }

        if (node.kind != NodeKind::Chance && !node.edge_probs.empty()) {
            add_error(report, id, "shape", "edge probabilities on a non-chance node");
        }
        if (node.kind != NodeKind::Terminal && node.payload.has_value()) {
            add_error(report, id, "shape", "payload on a non-terminal node");
        }

        switch (node.kind) {
        case NodeKind::Decision:
        case NodeKind::Chance:
            if (node.children.empty()) {
                add_error(report, id, "shape", "no children");
                break;
            }
            for (const NodeId& child : node.children) {
                if (nodes.count(child) == 0) {
                    continue;
                }
                const Node& child_node = tree.node(child);
                if (child_node.event != node.event) {
                    add_error(report, child, "events",
                              "event " + join_states(child_node.event) +
                                  " differs from parent's " + join_states(node.event));
                }
            }
            if (node.kind == NodeKind::Chance) {
                double total = 0.0;
                for (const NodeId& child : node.children) {
                    auto it = node.edge_probs.find(child);
                    if (it == node.edge_probs.end()) {
                        add_error(report, id, "probabilities",
                                  "no probability for child '" + child + "'");
                        continue;
                    }
                    const double p = it->second;
                    if (!std::isfinite(p) || p <= 0.0 || p > 1.0) {
                        add_error(report, id, "probabilities",
                                  "probability for child '" + child + "' is outside (0, 1]");
                    } else {
                        total += p;
                    }
                }
                if (node.edge_probs.size() > node.children.size()) {
                    add_error(report, id, "probabilities",
                              "probabilities name edges that do not exist");
                }
                if (node.edge_probs.size() == node.children.size() &&
                    std::abs(total - 1.0) > kProbabilityTol) {
                    add_error(report, id, "probabilities",
                              "edge probabilities sum to " + std::to_string(total) +
                                  ", expected 1");
                }
            }
            break;
        case NodeKind::Event: {
            if (node.children.empty()) {
                add_error(report, id, "shape", "no children");
                break;
            }
            if (node.children.size() == 1) {
                add_issue(report, ValidationIssue::Severity::Warning, id, "events",
                          "event node with a single child refines nothing");
            }
            std::set<State> covered;
            bool cells_ok = true;
            for (const NodeId& child : node.children) {
                if (nodes.count(child) == 0) {
                    cells_ok = false;
                    continue;
                }
                const Node& child_node = tree.node(child);
                for (const State& state : child_node.event) {
                    if (!covered.insert(state).second) {
                        add_error(report, id, "events",
                                  "children overlap in state '" + state + "'");
                        cells_ok = false;
                    }
                    if (node.event.count(state) == 0) {
                        add_error(report, child, "events",
                                  "state '" + state + "' lies outside the parent event");
                        cells_ok = false;
                    }
                }
            }
            if (cells_ok && covered != node.event) {
                std::set<State> missing;
                std::set_difference(node.event.begin(), node.event.end(), covered.begin(),
                                    covered.end(), std::inserter(missing, missing.begin()));
                add_error(report, id, "events",
                          "children do not cover states " + join_states(missing));
            }
            break;
        }
        case NodeKind::Terminal:
            if (!node.children.empty()) {
                add_error(report, id, "shape", "terminal node has children");
            }
            if (!node.payload.has_value()) {
                add_error(report, id, "shape", "terminal node has no payload");
                break;
            }
            if (const auto* lottery = std::get_if<AaLottery>(&*node.payload)) {
                if (lottery->carrier() != node.event) {
                    add_error(report, id, "events",
                              "lottery carrier " + join_states(lottery->carrier()) +
                                  " differs from the event " + join_states(node.event));
                }
            }
            break;
        }
    }

    return report;
}

DecisionTree continuation(const DecisionTree& tree, const NodeId& at) {
    std::map<NodeId, Node> sub;
    std::deque<NodeId> frontier{at};
    sub.emplace(at, tree.node(at));
    while (!frontier.empty()) {
        const NodeId id = frontier.front();
        frontier.pop_front();
        for (const NodeId& child : tree.node(id).children) {
            if (sub.emplace(child, tree.node(child)).second) {
                frontier.push_back(child);
            }
        }
    }
    return DecisionTree(at, std::move(sub));
}

const std::vector<NodeId>& immediate_successors(const DecisionTree& tree, const NodeId& at) {
    return tree.node(at).children;
}

} // namespace sylva
