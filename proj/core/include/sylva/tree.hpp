#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "sylva/lottery.hpp"

namespace sylva {

using NodeId = std::string;

enum class NodeKind { Decision, Chance, Event, Terminal };

/// Payload of a truncation terminal: a scalar stand-in for the value of the
/// subtree that was cut away. Starts unset; attach_evaluation fills it in.
struct Evaluation {
    std::optional<double> value;

    bool operator==(const Evaluation& other) const = default;
};

/// Terminal payload: either a state-contingent consequence lottery or a
/// scalar evaluation left behind by truncation.
using TerminalPayload = std::variant<AaLottery, Evaluation>;

struct Node {
    NodeKind kind = NodeKind::Terminal;
    /// Children in stored order; the order is meaningful (argmax ties break
    /// toward the first child).
    std::vector<NodeId> children;
    /// The event of the node: states still possible in its continuation.
    std::set<State> event;
    /// Chance nodes only: probability attached to each child edge.
    std::map<NodeId, double> edge_probs;
    /// Terminal nodes only.
    std::optional<TerminalPayload> payload;

    bool operator==(const Node& other) const = default;
};

/// A finite rooted decision tree together with its event correspondence.
/// Immutable value; every transformation returns a new tree.
class DecisionTree {
public:
    /// An empty tree; invalid until replaced (validate reports a missing
    /// root). Exists so trees can sit in default-constructed aggregates.
    DecisionTree() = default;

    DecisionTree(NodeId root, std::map<NodeId, Node> nodes);

    const NodeId& root() const { return root_; }
    const std::map<NodeId, Node>& nodes() const { return nodes_; }

    bool contains(const NodeId& id) const { return nodes_.count(id) != 0; }

    /// LookupError when the id is unknown.
    const Node& node(const NodeId& id) const;

    bool operator==(const DecisionTree& other) const = default;

private:
    NodeId root_;
    std::map<NodeId, Node> nodes_;
};

struct ValidationIssue {
    enum class Severity { Error, Warning };

    Severity severity = Severity::Error;
    NodeId node;
    std::string clause;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    /// True when no issue has Error severity (warnings are fine).
    bool ok() const;

    /// Formats every issue, one per line.
    std::string to_string() const;
};

/// Checks every structural invariant and reports all violations instead of
/// throwing: tree-ness (single root, one parent each, all reachable, no
/// dangling child ids), node-class shape (children, payloads, edge
/// probabilities), and the event correspondence (non-empty events, equal
/// events across decision/chance children, children of an event node
/// partition its event, terminal lottery carriers match their event).
/// A single-child event node is reported as a warning only.
ValidationReport validate(const DecisionTree& tree);

/// The continuation subtree rooted at a node, as a tree of its own. Node ids
/// and payloads are preserved. LookupError for an unknown id.
DecisionTree continuation(const DecisionTree& tree, const NodeId& at);

/// Children of a node in stored order. LookupError for an unknown id.
const std::vector<NodeId>& immediate_successors(const DecisionTree& tree, const NodeId& at);

} // namespace sylva
