#pragma once

#include <string>
#include <vector>

#include "sylva/enliven.hpp"
#include "sylva/evaluate.hpp"
#include "sylva/lottery.hpp"
#include "sylva/portfolio.hpp"
#include "sylva/procedure.hpp"
#include "sylva/tree.hpp"

namespace sylva {

/// A tree together with the belief and utility it is meant to be evaluated
/// under; the unit a tree file stores.
struct TreeFile {
    DecisionTree tree;
    Belief belief;
    BernoulliUtility utility;
};

/// Fixed-point rendering with nine digits after the decimal point; the one
/// number format every serializer here uses, so equal inputs give equal bytes.
std::string format_number(double value);

/// Parses the JSON tree format ("format": 1). ParseError on malformed input;
/// the structural checks that validate() covers are left to validate().
TreeFile parse_tree_file(const std::string& text);
TreeFile load_tree_file(const std::string& path);

/// Serializes in key-sorted order with format_number for every float; the
/// output parses back to an equal TreeFile and is byte-stable across runs.
std::string serialize_tree_file(const TreeFile& file);

/// Parses the JSON script format ("format": 1) into trigger/step entries.
std::vector<ScriptEntry> parse_script_file(const std::string& text);
std::vector<ScriptEntry> load_script_file(const std::string& path);

/// Parses the JSON portfolio format ("format": 1).
PortfolioProblem parse_portfolio_file(const std::string& text);
PortfolioProblem load_portfolio_file(const std::string& path);

/// Parses the JSON enlivened-scenario format ("format": 1).
std::vector<EnlivenedScenario> parse_enlivened_file(const std::string& text);
std::vector<EnlivenedScenario> load_enlivened_file(const std::string& path);

/// Graphviz rendering: decisions as boxes, chance nodes as circles, event
/// nodes as diamonds, terminals as plain labels; edges carry probabilities
/// where the parent is a chance node.
std::string to_dot(const DecisionTree& tree);

} // namespace sylva
