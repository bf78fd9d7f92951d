#include "sylva/lottery.hpp"

#include <cmath>
#include <utility>

#include "sylva/errors.hpp"

namespace sylva {

namespace {

constexpr double kNormalizationTol = 1e-9;

} // namespace

Lottery Lottery::degenerate(const Outcome& outcome) {
    return Lottery(std::map<Outcome, double>{{outcome, 1.0}});
}

Lottery Lottery::from_weights(const std::map<Outcome, double>& weights) {
    std::map<Outcome, double> support;
    double total = 0.0;
    for (const auto& [outcome, weight] : weights) {
        if (!std::isfinite(weight)) {
            throw DomainError("lottery weight for '" + outcome + "' is not finite");
        }
        if (weight < 0.0) {
            throw DomainError("lottery weight for '" + outcome + "' is negative");
        }
        if (weight == 0.0) {
            continue;
        }
        support.emplace(outcome, weight);
        total += weight;
    }
    if (support.empty()) {
        throw DomainError("lottery has empty support");
    }
    if (std::abs(total - 1.0) > kNormalizationTol) {
        throw DomainError("lottery weights sum to " + std::to_string(total) + ", expected 1");
    }
    return Lottery(std::move(support));
}

double Lottery::probability(const Outcome& outcome) const {
    auto it = weights_.find(outcome);
    return it == weights_.end() ? 0.0 : it->second;
}

Lottery mix(const Lottery& a, const Lottery& b, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw DomainError("mix weight must lie in [0, 1]");
    }
    std::map<Outcome, double> mixed;
    for (const auto& [outcome, weight] : a.weights()) {
        mixed[outcome] += alpha * weight;
    }
    for (const auto& [outcome, weight] : b.weights()) {
        mixed[outcome] += (1.0 - alpha) * weight;
    }
    return Lottery::from_weights(mixed);
}

double expected_utility(const Lottery& lottery, const UtilityMap& utility) {
    double total = 0.0;
    for (const auto& [outcome, weight] : lottery.weights()) {
        auto it = utility.find(outcome);
        if (it == utility.end()) {
            throw DomainError("no utility value for consequence '" + outcome + "'");
        }
        total += weight * it->second;
    }
    return total;
}

AaLottery AaLottery::over(const std::map<State, Lottery>& rows) {
    if (rows.empty()) {
        throw DomainError("state-contingent lottery needs a non-empty carrier");
    }
    return AaLottery(rows);
}

std::set<State> AaLottery::carrier() const {
    std::set<State> states;
    for (const auto& [state, lottery] : rows_) {
        states.insert(state);
    }
    return states;
}

const Lottery& AaLottery::row(const State& state) const {
    auto it = rows_.find(state);
    if (it == rows_.end()) {
        throw LookupError("state '" + state + "' is outside the lottery's carrier");
    }
    return it->second;
}

Belief Belief::over(const std::map<State, double>& mass) {
    if (mass.empty()) {
        throw DomainError("belief needs a non-empty state space");
    }
    double total = 0.0;
    for (const auto& [state, p] : mass) {
        if (!std::isfinite(p)) {
            throw DomainError("belief mass for state '" + state + "' is not finite");
        }
        if (p <= 0.0) {
            throw DomainError("belief mass for state '" + state + "' must be positive");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > kNormalizationTol) {
        throw DomainError("belief masses sum to " + std::to_string(total) + ", expected 1");
    }
    return Belief(mass);
}

double Belief::at(const State& state) const {
    auto it = mass_.find(state);
    if (it == mass_.end()) {
        throw LookupError("belief has no mass for state '" + state + "'");
    }
    return it->second;
}

double Belief::mass_of(const std::set<State>& states) const {
    double total = 0.0;
    for (const State& state : states) {
        total += at(state);
    }
    return total;
}

double aa_expected_utility(const AaLottery& f, const Belief& belief, const UtilityMap& utility) {
    double weighted = 0.0;
    double mass = 0.0;
    for (const auto& [state, lottery] : f.rows()) {
        const double p = belief.at(state);
        weighted += p * expected_utility(lottery, utility);
        mass += p;
    }
    return weighted / mass;
}

} // namespace sylva
