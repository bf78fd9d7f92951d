#pragma once

#include <map>

#include "sylva/tree.hpp"

namespace sylva {

/// A utility function over consequences with two reference outcomes. The
/// anchors order the scale: values[y_high] > values[y_low]. All values are
/// finite reals.
class BernoulliUtility {
public:
    BernoulliUtility(UtilityMap values, Outcome y_low, Outcome y_high);

    const UtilityMap& values() const { return values_; }
    const Outcome& y_low() const { return y_low_; }
    const Outcome& y_high() const { return y_high_; }

    /// LookupError when the outcome has no value.
    double at(const Outcome& outcome) const;

    /// The affine rescaling with u(y_low) = 0 and u(y_high) = 1 exactly.
    BernoulliUtility normalize() const;

private:
    UtilityMap values_;
    Outcome y_low_;
    Outcome y_high_;
};

/// Conditional probability of a sub-event given a containing event:
/// mass(child) / mass(parent). Requires child_event to be a subset of
/// parent_event and the parent mass to be positive.
double cond_prob(const Belief& belief, const std::set<State>& child_event,
                 const std::set<State>& parent_event);

/// A pure plan: the chosen child for each decision node.
using Policy = std::map<NodeId, NodeId>;

struct EvaluationReport {
    /// value[n] is the worth of the continuation at n, conditional on n's
    /// event.
    std::map<NodeId, double> value;
    /// Chosen child per decision node (first argmax in stored child order).
    Policy policy;
};

/// Backward recursion over the whole tree: terminal consequence nodes score
/// their lottery's conditional expected utility, terminal evaluations their
/// attached scalar, chance nodes the probability-weighted child average,
/// event nodes the belief-conditional child average, and decision nodes the
/// maximum over children. Implemented iteratively, so depth is bounded only
/// by memory. Requires a tree that passes validate, a belief covering the
/// root event, utilities covering every referenced consequence, and no unset
/// evaluations.
EvaluationReport evaluate(const DecisionTree& tree, const Belief& belief,
                          const BernoulliUtility& utility);

/// Same recursion with decisions pinned by pol instead of maximized. Only
/// nodes reachable under pol are visited and reported; a reachable decision
/// node missing from pol, or a pol entry naming a non-child, raises
/// DomainError.
EvaluationReport evaluate_policy(const DecisionTree& tree, const Belief& belief,
                                 const BernoulliUtility& utility, const Policy& pol);

} // namespace sylva
