#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sylva/enliven.hpp"
#include "sylva/evaluate.hpp"
#include "sylva/lottery.hpp"
#include "sylva/tree.hpp"
#include "sylva/truncate.hpp"

namespace sylva {

/// One scripted enlivenment with the node whose visit triggers it. An entry
/// with no trigger fires before the walk starts.
struct ScriptEntry {
    std::optional<NodeId> trigger;
    EnlivenmentStep step;
};

struct AgentConfig {
    /// Lookahead horizon in edges; nodes deeper than this below the current
    /// one are cut and estimated. Must be at least 1.
    int depth = 1;
    /// Rollout budget and seed policy for the cut-node estimates. The seed
    /// field is ignored; per-estimate streams are derived from the episode
    /// seed instead.
    RolloutConfig rollout_cfg;
    std::vector<ScriptEntry> script;
    /// The agent's view at the start of the episode: its tree together with
    /// the belief and utility that cover that tree's vocabulary. Unset means
    /// the agent starts from the truth and the caller's belief and utility.
    std::optional<EnlivenedModel> initial_model;
};

/// What the agent saw and did at one visited node.
struct StepRecord {
    NodeId node;
    /// Size of the agent's model when this node was planned from.
    std::size_t model_nodes = 0;
    /// Cut-node estimates computed for this plan, keyed by cut node.
    std::map<NodeId, double> estimates;
    /// Child moved to, empty at terminals.
    NodeId chosen;
};

struct EpisodeTrace {
    std::vector<StepRecord> steps;
    /// Visited truth nodes, root to terminal.
    std::vector<NodeId> path;
    /// Utility of the realized terminal under the agent's final utility and
    /// belief (expected over states for a lottery payload).
    double realized_utility = 0.0;
    /// Choice at every truth decision node reachable under this policy: the
    /// walk's choices where visited, completed by re-planning elsewhere.
    Policy induced_policy;
    DecisionTree final_model;
    Belief final_belief;
    BernoulliUtility final_utility;
};

/// Runs one episode of the truncation-based procedure on the truth tree.
/// `belief` and `utility` describe reality: chance and event moves are drawn
/// from them, and regret is measured against them. The agent plans from its
/// own model: at each visited node it applies any newly triggered script
/// steps, truncates its continuation at the lookahead depth, estimates cut
/// nodes by rollout in the truth under its current belief and utility,
/// evaluates, and moves (argmax at decisions; sampled at chance and event
/// nodes). All randomness derives from `seed`.
EpisodeTrace run_procedure(const DecisionTree& truth, const Belief& belief,
                           const BernoulliUtility& utility, const AgentConfig& cfg,
                           std::uint64_t seed);

/// Shortfall of the episode's induced policy against the optimum, both
/// evaluated in the truth: evaluate(truth).value at the root minus
/// evaluate_policy(truth, induced_policy).value at the root.
double regret(const DecisionTree& truth, const Belief& belief,
              const BernoulliUtility& utility, const EpisodeTrace& trace);

} // namespace sylva
