#pragma once

#include <map>
#include <set>
#include <string>

namespace sylva {

/// Opaque identifier of a consequence (an outcome the agent ultimately cares
/// about).
using Outcome = std::string;

/// Opaque identifier of a state of the world.
using State = std::string;

/// Utility values keyed by consequence id.
using UtilityMap = std::map<Outcome, double>;

/// A finite-support probability distribution over consequences. Immutable;
/// validated at construction: weights are strictly positive (zero weights are
/// excised), finite, and sum to 1 within 1e-9.
class Lottery {
public:
    /// Lottery assigning probability 1 to a single outcome.
    static Lottery degenerate(const Outcome& outcome);

    /// Builds a lottery from raw weights. Entries with weight exactly 0 are
    /// dropped; negative, non-finite, or badly normalized weights raise
    /// DomainError.
    static Lottery from_weights(const std::map<Outcome, double>& weights);

    const std::map<Outcome, double>& weights() const { return weights_; }

    /// Probability of an outcome; 0 when outside the support.
    double probability(const Outcome& outcome) const;

    bool operator==(const Lottery& other) const = default;

private:
    explicit Lottery(std::map<Outcome, double> weights) : weights_(std::move(weights)) {}

    std::map<Outcome, double> weights_;
};

/// Convex combination alpha * a + (1 - alpha) * b. Requires alpha in [0, 1];
/// outcomes whose mixed weight is 0 are dropped.
Lottery mix(const Lottery& a, const Lottery& b, double alpha);

/// Expected utility of a lottery. Every support outcome must have a utility
/// value; otherwise DomainError.
double expected_utility(const Lottery& lottery, const UtilityMap& utility);

/// A state-contingent lottery: one consequence lottery per state of its
/// carrier event. Immutable; the carrier is the key set and must be
/// non-empty.
class AaLottery {
public:
    static AaLottery over(const std::map<State, Lottery>& rows);

    const std::map<State, Lottery>& rows() const { return rows_; }

    /// States the lottery is contingent on.
    std::set<State> carrier() const;

    const Lottery& row(const State& state) const;

    bool operator==(const AaLottery& other) const = default;

private:
    explicit AaLottery(std::map<State, Lottery> rows) : rows_(std::move(rows)) {}

    std::map<State, Lottery> rows_;
};

/// A subjective probability over states. Immutable; every mass is strictly
/// positive and the total is 1 within 1e-9.
class Belief {
public:
    static Belief over(const std::map<State, double>& mass);

    const std::map<State, double>& mass() const { return mass_; }

    /// Mass of one state; LookupError when the state is unknown.
    double at(const State& state) const;

    /// Total mass of a set of states; every member must be known.
    double mass_of(const std::set<State>& states) const;

    bool contains(const State& state) const { return mass_.count(state) != 0; }

private:
    explicit Belief(std::map<State, double> mass) : mass_(std::move(mass)) {}

    std::map<State, double> mass_;
};

/// Subjective expected utility of a state-contingent lottery, conditional on
/// its carrier: sum_s P(s) EU(f_s) / sum_s P(s). Every carrier state needs a
/// belief mass and every outcome a utility value.
double aa_expected_utility(const AaLottery& f, const Belief& belief, const UtilityMap& utility);

} // namespace sylva
