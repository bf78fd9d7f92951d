#pragma once

#include <set>
#include <variant>
#include <vector>

#include "sylva/evaluate.hpp"
#include "sylva/tree.hpp"

namespace sylva {

/// The vocabulary a model gains in one enlivenment step: consequences with
/// their utility values, and states with their enlivened belief mass. The
/// total new mass must stay below 1.
struct DomainExtension {
    std::map<Outcome, double> new_consequences;
    std::map<State, double> new_state_mass;

    /// Total belief mass granted to the new states.
    double epsilon() const;

    bool empty() const { return new_consequences.empty() && new_state_mass.empty(); }
};

/// Extends a utility function to the new consequences. Existing values and
/// anchors are untouched; a clash with an existing consequence id raises
/// DomainError.
BernoulliUtility extend_utility(const BernoulliUtility& utility, const DomainExtension& ext);

/// Extends a belief to the new states: every old state keeps its relative
/// weight, scaled down by (1 - epsilon); each new state receives its granted
/// mass. Requires epsilon < 1, every new mass positive, and no state clash.
Belief extend_beliefs(const Belief& belief, const DomainExtension& ext);

/// True when conditioning the enlivened belief on the old state space
/// recovers the original belief: |p_plus(s)/p_plus(old) - p(s)| <= tol for
/// every old state. p must be defined exactly on old_states and p_plus must
/// cover them.
bool check_reverse_bayes(const Belief& p_plus, const Belief& p,
                         const std::set<State>& old_states, double tol = 1e-9);

/// Replaces a terminal node with the root of a new continuation subtree; the
/// old payload is discarded. The graft's root must carry exactly the
/// replaced terminal's event, and the graft's node ids must not clash with
/// the remaining tree (the replaced id becomes free).
struct TerminalEnlivenment {
    NodeId at;
    DecisionTree subtree;
};

/// Splices a new event node into the edge from -> to. The spliced node keeps
/// `to` as its first child and adds the graft's root as the deviation
/// branch; its event is to's event plus the deviation states. The deviation
/// states are propagated to every ancestor (joining the path cell at event
/// nodes) and down the off-path subtrees of decision and chance ancestors,
/// where sibling event nodes absorb them into their first stored cell and
/// sibling terminals replicate their first original state's lottery.
struct EdgeEnlivenment {
    NodeId from;
    NodeId to;
    /// Id of the spliced event node; must be fresh.
    NodeId event_node;
    /// New states in which the deviation occurs; a non-empty subset of the
    /// step extension's new states. The graft's root event must equal it.
    std::set<State> deviation_states;
    DecisionTree subtree;
};

struct EnlivenmentStep {
    std::variant<TerminalEnlivenment, EdgeEnlivenment> action;
    DomainExtension extension;
};

/// Applies a single enlivenment to the tree. The grafted subtree must be
/// valid on its own. The result always passes validate; a failure there is
/// an InternalError.
DecisionTree apply_step(const DecisionTree& tree, const EnlivenmentStep& step);

struct EnlivenedModel {
    DecisionTree tree;
    Belief belief;
    BernoulliUtility utility;
};

/// Left fold of apply_step / extend_beliefs / extend_utility over the
/// script. The first invalid step aborts the fold with a DomainError naming
/// its zero-based index.
EnlivenedModel apply_script(const DecisionTree& tree, const Belief& belief,
                            const BernoulliUtility& utility,
                            const std::vector<EnlivenmentStep>& script);

struct CollapseResult {
    DecisionTree tree;
    Belief belief;
};

/// Constructive inverse of enlivenment: removes every branch whose event is
/// disjoint from old_states, splices out event nodes left with one child,
/// restricts events and terminal lotteries to old_states, and conditions the
/// belief on them. Requires the root event to intersect old_states.
CollapseResult collapse(const DecisionTree& tree, const Belief& belief,
                        const std::set<State>& old_states);

} // namespace sylva
