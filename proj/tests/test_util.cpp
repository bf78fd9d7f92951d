#include "test_util.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <sys/wait.h>

#include "sylva/rng.hpp"

namespace sylva::testutil {

namespace {

/// k strictly positive integers summing to total, uniform-ish.
std::vector<int> composition(SplitMix64& rng, int k, int total) {
    std::vector<int> parts(static_cast<std::size_t>(k), 1);
    for (int extra = total - k; extra > 0; --extra) {
        parts[rng.next_index(parts.size())] += 1;
    }
    return parts;
}

struct Generator {
    SplitMix64 rng;
    const GenConfig& cfg;
    int next_id = 0;
    std::map<NodeId, Node> nodes;
    std::vector<Outcome> outcomes;

    Generator(std::uint64_t seed, const GenConfig& config) : rng(seed), cfg(config) {
        for (int i = 0; i < cfg.n_outcomes; ++i) {
            outcomes.push_back("o" + std::to_string(i));
        }
    }

    NodeId fresh() { return "n" + std::to_string(next_id++); }

    Lottery random_lottery() {
        const std::size_t k =
            1 + rng.next_index(std::min<std::size_t>(2, outcomes.size()));
        std::set<Outcome> support;
        while (support.size() < k) {
            support.insert(outcomes[rng.next_index(outcomes.size())]);
        }
        const std::vector<int> parts = composition(rng, static_cast<int>(k), 8);
        std::map<Outcome, double> weights;
        std::size_t i = 0;
        for (const Outcome& outcome : support) {
            weights[outcome] = parts[i++] / 8.0;
        }
        return Lottery::from_weights(weights);
    }

    AaLottery random_terminal_lottery(const std::set<State>& event) {
        std::map<State, Lottery> rows;
        for (const State& state : event) {
            rows.emplace(state, random_lottery());
        }
        return AaLottery::over(rows);
    }

    /// Splits the event into k non-empty cells.
    std::vector<std::set<State>> partition(const std::set<State>& event, std::size_t k) {
        std::vector<std::set<State>> cells(k);
        for (const State& state : event) {
            cells[rng.next_index(k)].insert(state);
        }
        for (std::size_t i = 0; i < k; ++i) {
            if (!cells[i].empty()) {
                continue;
            }
            for (std::size_t j = 0; j < k; ++j) {
                if (cells[j].size() >= 2) {
                    const State moved = *cells[j].begin();
                    cells[j].erase(moved);
                    cells[i].insert(moved);
                    break;
                }
            }
        }
        return cells;
    }

    /// Emits one node and its subtree, spending at most `budget` nodes.
    NodeId emit(const std::set<State>& event, int budget, bool force_decision) {
        const NodeId id = fresh();
        const int child_budget = budget - 1;

        std::vector<NodeKind> candidates = {NodeKind::Terminal};
        if (child_budget >= 1) {
            if (cfg.with_decisions) {
                candidates.push_back(NodeKind::Decision);
                candidates.push_back(NodeKind::Decision);
            }
            candidates.push_back(NodeKind::Chance);
            candidates.push_back(NodeKind::Chance);
        }
        if (cfg.with_events && event.size() >= 2 && child_budget >= 2) {
            candidates.push_back(NodeKind::Event);
            candidates.push_back(NodeKind::Event);
        }
        NodeKind kind = force_decision ? NodeKind::Decision
                                       : candidates[rng.next_index(candidates.size())];

        Node node;
        node.event = event;
        node.kind = kind;
        if (kind == NodeKind::Terminal) {
            node.payload = random_terminal_lottery(event);
        } else if (kind == NodeKind::Event) {
            const std::size_t max_parts = std::min<std::size_t>(
                {static_cast<std::size_t>(cfg.max_children), event.size(),
                 static_cast<std::size_t>(child_budget)});
            const std::size_t k = 2 + rng.next_index(max_parts - 1);
            const std::vector<int> budgets =
                composition(rng, static_cast<int>(k), child_budget);
            const auto cells = partition(event, k);
            for (std::size_t i = 0; i < k; ++i) {
                node.children.push_back(emit(cells[i], budgets[i], false));
            }
        } else {
            const std::size_t max_kids = std::min<std::size_t>(
                static_cast<std::size_t>(cfg.max_children),
                static_cast<std::size_t>(child_budget));
            std::size_t k = 1 + rng.next_index(max_kids);
            if (force_decision && max_kids >= 2) {
                k = std::max<std::size_t>(k, 2);
            }
            const std::vector<int> budgets =
                composition(rng, static_cast<int>(k), child_budget);
            std::vector<int> probs;
            if (kind == NodeKind::Chance) {
                probs = composition(rng, static_cast<int>(k), 8);
            }
            for (std::size_t i = 0; i < k; ++i) {
                const NodeId child = emit(event, budgets[i], false);
                node.children.push_back(child);
                if (kind == NodeKind::Chance) {
                    node.edge_probs[child] = probs[i] / 8.0;
                }
            }
        }
        nodes.emplace(id, std::move(node));
        return id;
    }
};

} // namespace

Instance random_instance(std::uint64_t seed, const GenConfig& cfg) {
    if (cfg.max_nodes < 3 || cfg.n_states < 1 || cfg.n_outcomes < 2 ||
        cfg.max_children < 2 || cfg.max_children > 8) {
        throw std::invalid_argument("random_instance: config out of range");
    }
    Generator gen(seed, cfg);

    std::set<State> universe;
    for (int i = 0; i < cfg.n_states; ++i) {
        universe.insert("s" + std::to_string(i));
    }
    const NodeId root = gen.emit(universe, cfg.max_nodes, cfg.decision_root);

    const std::vector<int> masses = composition(gen.rng, cfg.n_states, 1000);
    std::map<State, double> mass;
    int i = 0;
    for (const State& state : universe) {
        mass[state] = masses[i++] / 1000.0;
    }

    UtilityMap values;
    for (const Outcome& outcome : gen.outcomes) {
        if (cfg.normalized_utility) {
            values[outcome] = static_cast<double>(gen.rng.next_index(1001)) / 1000.0;
        } else {
            values[outcome] =
                (static_cast<double>(gen.rng.next_index(3001)) - 1000.0) / 1000.0;
        }
    }
    const Outcome& low = gen.outcomes.front();
    const Outcome& high = gen.outcomes.back();
    values[low] = cfg.normalized_utility ? 0.0 : -1.0;
    values[high] = cfg.normalized_utility ? 1.0 : 2.0;

    return Instance{DecisionTree(root, std::move(gen.nodes)), Belief::over(mass),
                    BernoulliUtility(std::move(values), low, high)};
}

Node terminal_node(const std::set<State>& event, const Outcome& outcome) {
    Node node;
    node.kind = NodeKind::Terminal;
    node.event = event;
    std::map<State, Lottery> rows;
    for (const State& state : event) {
        rows.emplace(state, Lottery::degenerate(outcome));
    }
    node.payload = AaLottery::over(rows);
    return node;
}

Node eval_node(const std::set<State>& event, std::optional<double> value) {
    Node node;
    node.kind = NodeKind::Terminal;
    node.event = event;
    node.payload = Evaluation{value};
    return node;
}

Node decision_node(const std::set<State>& event, const std::vector<NodeId>& children) {
    Node node;
    node.kind = NodeKind::Decision;
    node.event = event;
    node.children = children;
    return node;
}

Node chance_node(const std::set<State>& event,
                 const std::vector<std::pair<NodeId, double>>& edges) {
    Node node;
    node.kind = NodeKind::Chance;
    node.event = event;
    for (const auto& [child, prob] : edges) {
        node.children.push_back(child);
        node.edge_probs[child] = prob;
    }
    return node;
}

Node event_node(const std::set<State>& event, const std::vector<NodeId>& children) {
    Node node;
    node.kind = NodeKind::Event;
    node.event = event;
    node.children = children;
    return node;
}

namespace {

double oracle_mass(const Belief& belief, const std::set<State>& event) {
    double total = 0.0;
    for (const State& state : event) {
        total += belief.mass().at(state);
    }
    return total;
}

double oracle_node_value(const DecisionTree& tree, const NodeId& id, const Belief& belief,
                         const BernoulliUtility& utility, const Policy& pol) {
    const Node& node = tree.node(id);
    switch (node.kind) {
    case NodeKind::Terminal: {
        const TerminalPayload& payload = *node.payload;
        if (const auto* eval = std::get_if<Evaluation>(&payload)) {
            return *eval->value;
        }
        const auto& lottery = std::get<AaLottery>(payload);
        double weighted = 0.0;
        double total = 0.0;
        for (const auto& [state, row] : lottery.rows()) {
            double eu = 0.0;
            for (const auto& [outcome, weight] : row.weights()) {
                eu += weight * utility.values().at(outcome);
            }
            const double p = belief.mass().at(state);
            weighted += p * eu;
            total += p;
        }
        return weighted / total;
    }
    case NodeKind::Decision:
        return oracle_node_value(tree, pol.at(id), belief, utility, pol);
    case NodeKind::Chance: {
        double value = 0.0;
        for (const NodeId& child : node.children) {
            value += node.edge_probs.at(child) *
                     oracle_node_value(tree, child, belief, utility, pol);
        }
        return value;
    }
    case NodeKind::Event: {
        const double parent_mass = oracle_mass(belief, node.event);
        double value = 0.0;
        for (const NodeId& child : node.children) {
            value += oracle_mass(belief, tree.node(child).event) / parent_mass *
                     oracle_node_value(tree, child, belief, utility, pol);
        }
        return value;
    }
    }
    throw std::logic_error("unreachable");
}

} // namespace

double oracle_policy_value(const DecisionTree& tree, const Belief& belief,
                           const BernoulliUtility& utility, const Policy& pol) {
    return oracle_node_value(tree, tree.root(), belief, utility, pol);
}

std::vector<Policy> enumerate_policies(const DecisionTree& tree) {
    std::vector<NodeId> decisions;
    for (const auto& [id, node] : tree.nodes()) {
        if (node.kind == NodeKind::Decision) {
            decisions.push_back(id);
        }
    }
    std::vector<Policy> out;
    std::vector<std::size_t> odometer(decisions.size(), 0);
    while (true) {
        Policy pol;
        for (std::size_t i = 0; i < decisions.size(); ++i) {
            pol[decisions[i]] = tree.node(decisions[i]).children[odometer[i]];
        }
        out.push_back(std::move(pol));
        std::size_t i = 0;
        for (; i < decisions.size(); ++i) {
            odometer[i] += 1;
            if (odometer[i] < tree.node(decisions[i]).children.size()) {
                break;
            }
            odometer[i] = 0;
        }
        if (i == decisions.size()) {
            break;
        }
    }
    return out;
}

double brute_force_root_value(const DecisionTree& tree, const Belief& belief,
                              const BernoulliUtility& utility) {
    double best = 0.0;
    bool first = true;
    for (const Policy& pol : enumerate_policies(tree)) {
        const double value = oracle_policy_value(tree, belief, utility, pol);
        if (first || value > best) {
            best = value;
            first = false;
        }
    }
    return best;
}

bool isomorphic(const DecisionTree& a, const DecisionTree& b) {
    if (a.nodes().size() != b.nodes().size()) {
        return false;
    }
    std::map<NodeId, NodeId> mapped;
    std::vector<std::pair<NodeId, NodeId>> pending = {{a.root(), b.root()}};
    while (!pending.empty()) {
        const auto [x, y] = pending.back();
        pending.pop_back();
        const auto [it, inserted] = mapped.emplace(x, y);
        if (!inserted) {
            if (it->second != y) {
                return false;
            }
            continue;
        }
        const Node& nx = a.node(x);
        const Node& ny = b.node(y);
        if (nx.kind != ny.kind || nx.event != ny.event ||
            nx.children.size() != ny.children.size() || nx.payload != ny.payload) {
            return false;
        }
        for (std::size_t i = 0; i < nx.children.size(); ++i) {
            if (nx.kind == NodeKind::Chance &&
                nx.edge_probs.at(nx.children[i]) != ny.edge_probs.at(ny.children[i])) {
                return false;
            }
            pending.emplace_back(nx.children[i], ny.children[i]);
        }
    }
    return true;
}

DecisionTree decisions_to_uniform_chance(const DecisionTree& tree) {
    std::map<NodeId, Node> nodes = tree.nodes();
    for (auto& [id, node] : nodes) {
        if (node.kind != NodeKind::Decision) {
            continue;
        }
        node.kind = NodeKind::Chance;
        const double p = 1.0 / static_cast<double>(node.children.size());
        for (const NodeId& child : node.children) {
            node.edge_probs[child] = p;
        }
    }
    return DecisionTree(tree.root(), std::move(nodes));
}

int tree_depth(const DecisionTree& tree) {
    int deepest = 0;
    std::queue<std::pair<NodeId, int>> pending;
    pending.emplace(tree.root(), 0);
    while (!pending.empty()) {
        const auto [id, depth] = pending.front();
        pending.pop();
        deepest = std::max(deepest, depth);
        for (const NodeId& child : tree.node(id).children) {
            pending.emplace(child, depth + 1);
        }
    }
    return deepest;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string fixture_path(const std::string& name) {
    return std::string(SYLVA_FIXTURE_DIR) + "/" + name;
}

CliResult run_cli(const std::string& args) {
    const std::string command = std::string(SYLVA_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(command.c_str(), "r");
    if (pipe == nullptr) {
        throw std::runtime_error("popen failed for: " + command);
    }
    CliResult result;
    char buffer[4096];
    std::size_t n = 0;
    while ((n = fread(buffer, 1, sizeof buffer, pipe)) > 0) {
        result.output.append(buffer, n);
    }
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

} // namespace sylva::testutil
