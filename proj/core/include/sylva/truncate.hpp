#pragma once

#include <cstdint>
#include <set>

#include "sylva/evaluate.hpp"
#include "sylva/tree.hpp"

namespace sylva {

/// Nodes at which a tree is cut. Valid cuts are non-terminal, never the
/// root, and no cut is an ancestor of another.
using CutSet = std::set<NodeId>;

/// Cuts the tree: each cut node loses its descendants and becomes a terminal
/// carrying an unset Evaluation; everything else is preserved. An empty cut
/// set returns the tree unchanged. Invalid cut sets raise DomainError
/// (LookupError for unknown ids).
DecisionTree truncate(const DecisionTree& tree, const CutSet& cuts);

/// Sets the scalar evaluation of a truncation terminal. The target must be a
/// terminal with an Evaluation payload; gamma_hat must be finite.
DecisionTree attach_evaluation(const DecisionTree& tree, const NodeId& at, double gamma_hat);

struct RolloutConfig {
    std::uint64_t rollouts = 1;
    std::uint64_t seed = 0;
};

struct RolloutStats {
    double mean = 0.0;
    /// Unbiased sample variance (0 when a single rollout was drawn).
    double variance = 0.0;
    std::uint64_t count = 0;
};

/// Estimates the worth of the continuation at a node by random play:
/// each rollout walks from the node picking a uniformly random child at
/// decision nodes, sampling edge probabilities at chance nodes and
/// belief-conditional probabilities at event nodes, and scores the reached
/// terminal (conditional expected utility, or the attached evaluation).
/// Rollout i draws from substream(cfg.seed, i) and the rollouts are averaged
/// in index order, so the result is a deterministic function of
/// (tree, node, belief, utility, cfg). The continuation must contain no
/// unset evaluation and cfg.rollouts must be at least 1.
double mcts_estimate(const DecisionTree& tree, const NodeId& at, const Belief& belief,
                     const BernoulliUtility& utility, const RolloutConfig& cfg);

/// Same estimator, returning sample statistics for diagnostics.
RolloutStats mcts_estimate_stats(const DecisionTree& tree, const NodeId& at, const Belief& belief,
                                 const BernoulliUtility& utility, const RolloutConfig& cfg);

} // namespace sylva
