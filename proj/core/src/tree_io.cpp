#include "sylva/tree_io.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "sylva/errors.hpp"

namespace sylva {

namespace {

using nlohmann::json;

json parse_json(const std::string& text) {
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) {
        throw ParseError("input is not valid JSON");
    }
    return value;
}

const json& require_key(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ParseError(where + " is missing key '" + key + "'");
    }
    return *it;
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (const auto& item : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* key) { return item.key() == key; });
        if (!known) {
            throw ParseError(where + " has unknown key '" + item.key() + "'");
        }
    }
}

const json& as_object(const json& value, const std::string& where) {
    if (!value.is_object()) {
        throw ParseError(where + " must be an object");
    }
    return value;
}

const json& as_array(const json& value, const std::string& where) {
    if (!value.is_array()) {
        throw ParseError(where + " must be an array");
    }
    return value;
}

std::string as_string(const json& value, const std::string& where) {
    if (!value.is_string()) {
        throw ParseError(where + " must be a string");
    }
    return value.get<std::string>();
}

double as_number(const json& value, const std::string& where) {
    if (!value.is_number()) {
        throw ParseError(where + " must be a number");
    }
    return value.get<double>();
}

void check_format(const json& obj, const std::string& where) {
    const json& format = require_key(obj, "format", where);
    if (!format.is_number_integer() || format.get<int>() != 1) {
        throw ParseError(where + " has an unsupported format; expected 1");
    }
}

std::map<std::string, double> as_number_map(const json& value, const std::string& where) {
    as_object(value, where);
    std::map<std::string, double> out;
    for (const auto& item : value.items()) {
        out.emplace(item.key(), as_number(item.value(), where + " entry '" + item.key() + "'"));
    }
    return out;
}

std::set<std::string> as_string_set(const json& value, const std::string& where) {
    as_array(value, where);
    std::set<std::string> out;
    for (const json& item : value) {
        if (!out.insert(as_string(item, where + " entry")).second) {
            throw ParseError(where + " has a duplicate entry");
        }
    }
    return out;
}

Vector as_vector(const json& value, const std::string& where) {
    as_array(value, where);
    Vector out;
    for (const json& item : value) {
        out.push_back(as_number(item, where + " entry"));
    }
    return out;
}

Matrix as_matrix(const json& value, const std::string& where) {
    as_array(value, where);
    Matrix out;
    for (const json& row : value) {
        out.push_back(as_vector(row, where + " row"));
    }
    return out;
}

NodeKind parse_kind(const std::string& text, const std::string& where) {
    if (text == "decision") {
        return NodeKind::Decision;
    }
    if (text == "chance") {
        return NodeKind::Chance;
    }
    if (text == "event") {
        return NodeKind::Event;
    }
    if (text == "terminal") {
        return NodeKind::Terminal;
    }
    throw ParseError(where + " has unknown kind '" + text + "'");
}

struct ParsedNodes {
    std::map<NodeId, Node> nodes;
    std::map<NodeId, bool> has_event;
};

ParsedNodes parse_nodes(const json& value, const std::string& where) {
    as_object(value, where);
    ParsedNodes parsed;
    for (const auto& item : value.items()) {
        const std::string node_where = where + " node '" + item.key() + "'";
        const json& body = as_object(item.value(), node_where);
        check_keys(body, {"kind", "children", "probs", "event", "lottery", "eval"}, node_where);

        Node node;
        node.kind = parse_kind(as_string(require_key(body, "kind", node_where), node_where),
                               node_where);
        if (body.contains("children")) {
            as_array(body["children"], node_where + " children");
            for (const json& child : body["children"]) {
                node.children.push_back(as_string(child, node_where + " child"));
            }
        }
        if (body.contains("probs")) {
            node.edge_probs = as_number_map(body["probs"], node_where + " probs");
        }
        bool has_event = false;
        if (body.contains("event")) {
            node.event = as_string_set(body["event"], node_where + " event");
            has_event = true;
        }
        if (body.contains("lottery") && body.contains("eval")) {
            throw ParseError(node_where + " has both a lottery and an evaluation");
        }
        if (body.contains("lottery")) {
            const json& rows_json = as_object(body["lottery"], node_where + " lottery");
            std::map<State, Lottery> rows;
            for (const auto& row : rows_json.items()) {
                rows.emplace(row.key(),
                             Lottery::from_weights(as_number_map(
                                 row.value(), node_where + " lottery row '" + row.key() + "'")));
            }
            node.payload = AaLottery::over(rows);
        }
        if (body.contains("eval")) {
            const json& eval = body["eval"];
            if (eval.is_null()) {
                node.payload = Evaluation{};
            } else {
                node.payload = Evaluation{as_number(eval, node_where + " eval")};
            }
        }
        parsed.nodes.emplace(item.key(), std::move(node));
        parsed.has_event.emplace(item.key(), has_event);
    }
    return parsed;
}

/// Fills omitted events: the root takes `root_default` and every other node
/// inherits its parent's event. Nodes unreachable from the root keep what
/// they declared; validation reports them anyway.
void inherit_events(ParsedNodes& parsed, const NodeId& root,
                    const std::set<State>& root_default) {
    auto it = parsed.nodes.find(root);
    if (it == parsed.nodes.end()) {
        return;
    }
    if (!parsed.has_event.at(root)) {
        it->second.event = root_default;
    }
    std::set<NodeId> visited{root};
    std::deque<NodeId> frontier{root};
    while (!frontier.empty()) {
        const NodeId id = frontier.front();
        frontier.pop_front();
        const std::set<State> parent_event = parsed.nodes.at(id).event;
        for (const NodeId& child : parsed.nodes.at(id).children) {
            auto child_it = parsed.nodes.find(child);
            if (child_it == parsed.nodes.end() || !visited.insert(child).second) {
                continue;
            }
            if (!parsed.has_event.at(child)) {
                child_it->second.event = parent_event;
            }
            frontier.push_back(child);
        }
    }
}

DecisionTree parse_subtree(const json& value, const std::string& where) {
    const json& body = as_object(value, where);
    check_keys(body, {"root", "nodes"}, where);
    const NodeId root = as_string(require_key(body, "root", where), where + " root");
    ParsedNodes parsed = parse_nodes(require_key(body, "nodes", where), where);
    auto it = parsed.has_event.find(root);
    if (it != parsed.has_event.end() && !it->second) {
        throw ParseError(where + " root '" + root + "' needs an explicit event");
    }
    inherit_events(parsed, root, {});
    return DecisionTree(root, std::move(parsed.nodes));
}

DomainExtension parse_extension(const json& value, const std::string& where) {
    const json& body = as_object(value, where);
    check_keys(body, {"consequences", "states"}, where);
    DomainExtension ext;
    if (body.contains("consequences")) {
        ext.new_consequences = as_number_map(body["consequences"], where + " consequences");
    }
    if (body.contains("states")) {
        ext.new_state_mass = as_number_map(body["states"], where + " states");
    }
    return ext;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot read file '" + path + "'");
    }
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void append_escaped(std::string& out, const std::string& text) {
    out += '"';
    for (const char c : text) {
        switch (c) {
        case '"':
            out += "\\\"";
            break;
        case '\\':
            out += "\\\\";
            break;
        case '\b':
            out += "\\b";
            break;
        case '\f':
            out += "\\f";
            break;
        case '\n':
            out += "\\n";
            break;
        case '\r':
            out += "\\r";
            break;
        case '\t':
            out += "\\t";
            break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buffer[8];
                std::snprintf(buffer, sizeof(buffer), "\\u%04x", c);
                out += buffer;
            } else {
                out += c;
            }
        }
    }
    out += '"';
}

void append_string_array(std::string& out, const std::set<std::string>& values) {
    out += '[';
    bool first = true;
    for (const std::string& value : values) {
        if (!first) {
            out += ", ";
        }
        append_escaped(out, value);
        first = false;
    }
    out += ']';
}

void append_number_map(std::string& out, const std::map<std::string, double>& values) {
    out += '{';
    bool first = true;
    for (const auto& [key, value] : values) {
        if (!first) {
            out += ", ";
        }
        append_escaped(out, key);
        out += ": ";
        out += format_number(value);
        first = false;
    }
    out += '}';
}

const char* kind_name(NodeKind kind) {
    switch (kind) {
    case NodeKind::Decision:
        return "decision";
    case NodeKind::Chance:
        return "chance";
    case NodeKind::Event:
        return "event";
    case NodeKind::Terminal:
        return "terminal";
    }
    return "terminal";
}

} // namespace

std::string format_number(double value) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(9) << value;
    std::string text = out.str();
    if (text == "-0.000000000") {
        text.erase(0, 1);
    }
    return text;
}

TreeFile parse_tree_file(const std::string& text) {
    const json root = parse_json(text);
    const std::string where = "tree file";
    as_object(root, where);
    check_keys(root, {"format", "states", "belief", "consequences", "anchors", "root", "nodes"},
               where);
    check_format(root, where);

    const std::set<State> states =
        as_string_set(require_key(root, "states", where), where + " states");
    const std::map<State, double> mass =
        as_number_map(require_key(root, "belief", where), where + " belief");
    for (const State& state : states) {
        if (mass.count(state) == 0) {
            throw ParseError(where + " belief is missing state '" + state + "'");
        }
    }
    if (mass.size() != states.size()) {
        throw ParseError(where + " belief names states outside the state list");
    }
    const Belief belief = Belief::over(mass);

    const UtilityMap values =
        as_number_map(require_key(root, "consequences", where), where + " consequences");
    const json& anchors = as_object(require_key(root, "anchors", where), where + " anchors");
    check_keys(anchors, {"low", "high"}, where + " anchors");
    const BernoulliUtility utility(
        values, as_string(require_key(anchors, "low", where + " anchors"), where + " anchor low"),
        as_string(require_key(anchors, "high", where + " anchors"), where + " anchor high"));

    const NodeId tree_root = as_string(require_key(root, "root", where), where + " root");
    ParsedNodes parsed = parse_nodes(require_key(root, "nodes", where), where);
    inherit_events(parsed, tree_root, states);
    return TreeFile{DecisionTree(tree_root, std::move(parsed.nodes)), belief, utility};
}

TreeFile load_tree_file(const std::string& path) {
    return parse_tree_file(read_file(path));
}

std::string serialize_tree_file(const TreeFile& file) {
    std::string out = "{\n";
    out += "  \"format\": 1,\n";

    out += "  \"states\": ";
    std::set<State> states;
    for (const auto& [state, mass] : file.belief.mass()) {
        states.insert(state);
    }
    append_string_array(out, states);
    out += ",\n";

    out += "  \"belief\": ";
    append_number_map(out, file.belief.mass());
    out += ",\n";

    out += "  \"consequences\": ";
    append_number_map(out, file.utility.values());
    out += ",\n";

    out += "  \"anchors\": {\"low\": ";
    append_escaped(out, file.utility.y_low());
    out += ", \"high\": ";
    append_escaped(out, file.utility.y_high());
    out += "},\n";

    out += "  \"root\": ";
    append_escaped(out, file.tree.root());
    out += ",\n";

    out += "  \"nodes\": {\n";
    bool first_node = true;
    for (const auto& [id, node] : file.tree.nodes()) {
        if (!first_node) {
            out += ",\n";
        }
        first_node = false;
        out += "    ";
        append_escaped(out, id);
        out += ": {\"kind\": \"";
        out += kind_name(node.kind);
        out += "\", \"event\": ";
        append_string_array(out, node.event);
        if (node.kind != NodeKind::Terminal) {
            out += ", \"children\": [";
            bool first_child = true;
            for (const NodeId& child : node.children) {
                if (!first_child) {
                    out += ", ";
                }
                append_escaped(out, child);
                first_child = false;
            }
            out += ']';
        }
        if (node.kind == NodeKind::Chance) {
            out += ", \"probs\": ";
            append_number_map(out, node.edge_probs);
        }
        if (node.kind == NodeKind::Terminal && node.payload.has_value()) {
            if (const auto* lottery = std::get_if<AaLottery>(&*node.payload)) {
                out += ", \"lottery\": {";
                bool first_row = true;
                for (const auto& [state, row] : lottery->rows()) {
                    if (!first_row) {
                        out += ", ";
                    }
                    append_escaped(out, state);
                    out += ": ";
                    append_number_map(out, row.weights());
                    first_row = false;
                }
                out += '}';
            } else {
                const auto& evaluation = std::get<Evaluation>(*node.payload);
                out += ", \"eval\": ";
                out += evaluation.value.has_value() ? format_number(*evaluation.value) : "null";
            }
        }
        out += '}';
    }
    out += "\n  }\n}\n";
    return out;
}

std::vector<ScriptEntry> parse_script_file(const std::string& text) {
    const json root = parse_json(text);
    const std::string where = "script file";
    as_object(root, where);
    check_keys(root, {"format", "steps"}, where);
    check_format(root, where);

    std::vector<ScriptEntry> entries;
    const json& steps = as_array(require_key(root, "steps", where), where + " steps");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const std::string step_where = where + " step " + std::to_string(i);
        const json& body = as_object(steps[i], step_where);
        const std::string kind =
            as_string(require_key(body, "kind", step_where), step_where + " kind");

        ScriptEntry entry;
        if (body.contains("trigger")) {
            entry.trigger = as_string(body["trigger"], step_where + " trigger");
        }
        if (body.contains("extension")) {
            entry.step.extension = parse_extension(body["extension"], step_where + " extension");
        }
        if (kind == "terminal") {
            check_keys(body, {"kind", "trigger", "at", "subtree", "extension"}, step_where);
            TerminalEnlivenment action{
                as_string(require_key(body, "at", step_where), step_where + " at"),
                parse_subtree(require_key(body, "subtree", step_where), step_where + " subtree")};
            entry.step.action = std::move(action);
        } else if (kind == "edge") {
            check_keys(body,
                       {"kind", "trigger", "from", "to", "event_node", "deviation_states",
                        "subtree", "extension"},
                       step_where);
            EdgeEnlivenment action{
                as_string(require_key(body, "from", step_where), step_where + " from"),
                as_string(require_key(body, "to", step_where), step_where + " to"),
                as_string(require_key(body, "event_node", step_where), step_where + " event_node"),
                as_string_set(require_key(body, "deviation_states", step_where),
                              step_where + " deviation_states"),
                parse_subtree(require_key(body, "subtree", step_where), step_where + " subtree")};
            entry.step.action = std::move(action);
        } else {
            throw ParseError(step_where + " has unknown kind '" + kind + "'");
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

std::vector<ScriptEntry> load_script_file(const std::string& path) {
    return parse_script_file(read_file(path));
}

PortfolioProblem parse_portfolio_file(const std::string& text) {
    const json root = parse_json(text);
    const std::string where = "portfolio file";
    as_object(root, where);
    check_keys(root,
               {"format", "Q1", "Q2", "a1", "p1", "p2", "q", "m1", "endowment_scenarios",
                "return_scenarios"},
               where);
    check_format(root, where);

    PortfolioProblem problem;
    problem.q1 = as_matrix(require_key(root, "Q1", where), where + " Q1");
    problem.q2 = as_matrix(require_key(root, "Q2", where), where + " Q2");
    problem.a1 = as_vector(require_key(root, "a1", where), where + " a1");
    problem.p1 = as_vector(require_key(root, "p1", where), where + " p1");
    problem.p2 = as_vector(require_key(root, "p2", where), where + " p2");
    problem.asset_prices = as_vector(require_key(root, "q", where), where + " q");
    problem.m1 = as_number(require_key(root, "m1", where), where + " m1");

    const json& spots = as_array(require_key(root, "endowment_scenarios", where),
                                 where + " endowment_scenarios");
    for (std::size_t i = 0; i < spots.size(); ++i) {
        const std::string spot_where = where + " endowment scenario " + std::to_string(i);
        const json& body = as_object(spots[i], spot_where);
        check_keys(body, {"prob", "a2", "m2"}, spot_where);
        problem.spot.push_back(
            SpotScenario{as_number(require_key(body, "prob", spot_where), spot_where + " prob"),
                         as_vector(require_key(body, "a2", spot_where), spot_where + " a2"),
                         as_number(require_key(body, "m2", spot_where), spot_where + " m2")});
    }

    const json& returns =
        as_array(require_key(root, "return_scenarios", where), where + " return_scenarios");
    for (std::size_t i = 0; i < returns.size(); ++i) {
        const std::string return_where = where + " return scenario " + std::to_string(i);
        const json& body = as_object(returns[i], return_where);
        check_keys(body, {"prob", "r"}, return_where);
        problem.returns.push_back(ReturnScenario{
            as_number(require_key(body, "prob", return_where), return_where + " prob"),
            as_vector(require_key(body, "r", return_where), return_where + " r")});
    }
    return problem;
}

PortfolioProblem load_portfolio_file(const std::string& path) {
    return parse_portfolio_file(read_file(path));
}

std::vector<EnlivenedScenario> parse_enlivened_file(const std::string& text) {
    const json root = parse_json(text);
    const std::string where = "enlivened file";
    as_object(root, where);
    check_keys(root, {"format", "scenarios"}, where);
    check_format(root, where);

    std::vector<EnlivenedScenario> scenarios;
    const json& list = as_array(require_key(root, "scenarios", where), where + " scenarios");
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string scenario_where = where + " scenario " + std::to_string(i);
        const json& body = as_object(list[i], scenario_where);
        check_keys(body, {"prob", "b_star", "S"}, scenario_where);
        scenarios.push_back(EnlivenedScenario{
            as_number(require_key(body, "prob", scenario_where), scenario_where + " prob"),
            as_vector(require_key(body, "b_star", scenario_where), scenario_where + " b_star"),
            as_matrix(require_key(body, "S", scenario_where), scenario_where + " S")});
    }
    return scenarios;
}

std::vector<EnlivenedScenario> load_enlivened_file(const std::string& path) {
    return parse_enlivened_file(read_file(path));
}

std::string to_dot(const DecisionTree& tree) {
    std::string out = "digraph tree {\n  rankdir=LR;\n";
    auto escape = [](const std::string& text) {
        std::string escaped;
        for (const char c : text) {
            if (c == '"' || c == '\\') {
                escaped += '\\';
            }
            escaped += c;
        }
        return escaped;
    };
    for (const auto& [id, node] : tree.nodes()) {
        std::string label = escape(id);
        const char* shape = "plaintext";
        switch (node.kind) {
        case NodeKind::Decision:
            shape = "box";
            break;
        case NodeKind::Chance:
            shape = "circle";
            break;
        case NodeKind::Event:
            shape = "diamond";
            break;
        case NodeKind::Terminal:
            if (node.payload.has_value()) {
                if (const auto* evaluation = std::get_if<Evaluation>(&*node.payload)) {
                    label += "\\neval=";
                    label += evaluation->value.has_value() ? format_number(*evaluation->value)
                                                           : "unset";
                }
            }
            break;
        }
        out += "  \"" + escape(id) + "\" [shape=" + shape + ", label=\"" + label + "\"];\n";
    }
    for (const auto& [id, node] : tree.nodes()) {
        for (const NodeId& child : node.children) {
            out += "  \"" + escape(id) + "\" -> \"" + escape(child) + "\"";
            auto it = node.edge_probs.find(child);
            if (it != node.edge_probs.end()) {
                out += " [label=\"" + format_number(it->second) + "\"]";
            }
            out += ";\n";
        }
    }
    out += "}\n";
    return out;
}

} // namespace sylva
