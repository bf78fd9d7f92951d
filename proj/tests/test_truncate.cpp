#include <doctest.h>

#include <cmath>

#include "sylva/errors.hpp"
#include "sylva/truncate.hpp"
#include "sylva/tree_io.hpp"
#include "test_util.hpp"

using namespace sylva;
using namespace sylva::testutil;

namespace {

const std::set<State> kSea = {"sea"};

BernoulliUtility binary_utility() {
    return BernoulliUtility({{"lo", 0.0}, {"hi", 1.0}}, "lo", "hi");
}

const Belief kSeaBelief = Belief::over({{"sea", 1.0}});

} // namespace

TEST_CASE("truncate replaces the cut node with an unset evaluation") {
    const TreeFile fig4 = load_tree_file(fixture_path("fig4.tree"));
    const DecisionTree cut = truncate(fig4.tree, {"wax"});
    CHECK(cut.nodes().size() == 5);
    CHECK(cut.node("wax").kind == NodeKind::Terminal);
    CHECK(cut.node("wax").event == kSea);
    CHECK(cut.node("wax").payload == TerminalPayload{Evaluation{}});
    CHECK_FALSE(cut.contains("bind"));
    CHECK_FALSE(cut.contains("die"));
    CHECK(validate(cut).ok());
    CHECK(cut.node("start") == fig4.tree.node("start"));
}

TEST_CASE("truncate with several independent cuts") {
    const TreeFile fig4 = load_tree_file(fixture_path("fig4.tree"));
    const DecisionTree cut = truncate(fig4.tree, {"avoid", "go_near"});
    CHECK(cut.nodes().size() == 3);
    CHECK(validate(cut).ok());
}

TEST_CASE("truncate rejects bad cut sets") {
    const TreeFile fig4 = load_tree_file(fixture_path("fig4.tree"));
    CHECK(truncate(fig4.tree, {}) == fig4.tree);
    CHECK_THROWS_AS(truncate(fig4.tree, {"start"}), DomainError);
    CHECK_THROWS_AS(truncate(fig4.tree, {"hear"}), DomainError);
    CHECK_THROWS_AS(truncate(fig4.tree, {"wax", "bind"}), DomainError);
    CHECK_THROWS_AS(truncate(fig4.tree, {"nope"}), LookupError);
}

TEST_CASE("attach_evaluation fills in a cut node's value") {
    const TreeFile fig4 = load_tree_file(fixture_path("fig4.tree"));
    const DecisionTree cut = truncate(fig4.tree, {"wax"});
    const DecisionTree filled = attach_evaluation(cut, "wax", 0.75);
    CHECK(filled.node("wax").payload == TerminalPayload{Evaluation{0.75}});

    CHECK_THROWS_AS(attach_evaluation(cut, "late", 0.5), DomainError);
    CHECK_THROWS_AS(attach_evaluation(cut, "start", 0.5), DomainError);
    CHECK_THROWS_AS(attach_evaluation(cut, "nope", 0.5), LookupError);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(attach_evaluation(cut, "wax", inf), DomainError);
}

TEST_CASE("attaching the exact continuation value preserves the evaluation") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Instance inst = random_instance(seed, {.max_nodes = 16});
        const EvaluationReport full = evaluate(inst.tree, inst.belief, inst.utility);

        NodeId target;
        for (const auto& [id, node] : inst.tree.nodes()) {
            if (id != inst.tree.root() && node.kind != NodeKind::Terminal) {
                target = id;
                break;
            }
        }
        if (target.empty()) {
            continue;
        }
        const DecisionTree cut = truncate(inst.tree, {target});
        CHECK_THROWS_AS(evaluate(cut, inst.belief, inst.utility), DomainError);
        const DecisionTree filled = attach_evaluation(cut, target, full.value.at(target));
        const EvaluationReport again = evaluate(filled, inst.belief, inst.utility);
        INFO("seed ", seed, " target ", target);
        CHECK(again.value.at(inst.tree.root()) ==
              doctest::Approx(full.value.at(inst.tree.root())).epsilon(1e-12));
    }
}

TEST_CASE("rollout estimates are deterministic in the seed") {
    const TreeFile fig4 = load_tree_file(fixture_path("fig4.tree"));
    const RolloutConfig cfg{.rollouts = 500, .seed = 42};
    const double first = mcts_estimate(fig4.tree, "go_near", fig4.belief, fig4.utility, cfg);
    const double second = mcts_estimate(fig4.tree, "go_near", fig4.belief, fig4.utility, cfg);
    CHECK(first == second);

    const RolloutConfig other{.rollouts = 500, .seed = 43};
    const double third = mcts_estimate(fig4.tree, "go_near", fig4.belief, fig4.utility, other);
    CHECK(first != third);
}

TEST_CASE("rollouts through a choice-free chain are exact") {
    const std::map<NodeId, Node> nodes = {
        {"r", decision_node(kSea, {"t"})},
        {"t", terminal_node(kSea, "hi")},
    };
    const DecisionTree tree("r", nodes);
    const RolloutStats stats =
        mcts_estimate_stats(tree, "r", kSeaBelief, binary_utility(), {.rollouts = 64, .seed = 9});
    CHECK(stats.mean == 1.0);
    CHECK(stats.variance == 0.0);
    CHECK(stats.count == 64);
}

TEST_CASE("rollouts draw decisions uniformly") {
    const std::map<NodeId, Node> nodes = {
        {"r", decision_node(kSea, {"x", "y"})},
        {"x", terminal_node(kSea, "hi")},
        {"y", terminal_node(kSea, "lo")},
    };
    const DecisionTree tree("r", nodes);
    const std::uint64_t n = 4096;
    const RolloutStats stats =
        mcts_estimate_stats(tree, "r", kSeaBelief, binary_utility(), {.rollouts = n, .seed = 3});
    const double se = std::sqrt(0.25 / static_cast<double>(n));
    CHECK(std::abs(stats.mean - 0.5) <= 4 * se);
    CHECK(stats.variance == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("rollouts weight event branches by conditional belief") {
    const std::map<NodeId, Node> nodes = {
        {"r", event_node({"a", "b"}, {"x", "y"})},
        {"x", terminal_node({"a"}, "hi")},
        {"y", terminal_node({"b"}, "lo")},
    };
    const DecisionTree tree("r", nodes);
    const Belief belief = Belief::over({{"a", 0.2}, {"b", 0.8}});
    const std::uint64_t n = 4096;
    const RolloutStats stats =
        mcts_estimate_stats(tree, "r", belief, binary_utility(), {.rollouts = n, .seed = 5});
    const double se = std::sqrt(0.2 * 0.8 / static_cast<double>(n));
    CHECK(std::abs(stats.mean - 0.2) <= 4 * se);
}

TEST_CASE("rollout estimates reject bad inputs") {
    const TreeFile fig4 = load_tree_file(fixture_path("fig4.tree"));
    CHECK_THROWS_AS(
        mcts_estimate(fig4.tree, "wax", fig4.belief, fig4.utility, {.rollouts = 0, .seed = 1}),
        DomainError);
    CHECK_THROWS_AS(
        mcts_estimate(fig4.tree, "nope", fig4.belief, fig4.utility, {.rollouts = 1, .seed = 1}),
        LookupError);

    const DecisionTree cut = truncate(fig4.tree, {"wax"});
    CHECK_THROWS_AS(
        mcts_estimate(cut, "go_near", fig4.belief, fig4.utility, {.rollouts = 1, .seed = 1}),
        DomainError);

    const DecisionTree filled = attach_evaluation(cut, "wax", 0.9);
    CHECK(mcts_estimate(filled, "go_near", fig4.belief, fig4.utility,
                        {.rollouts = 8, .seed = 1}) == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("estimates at an event child condition on its event") {
    const std::map<NodeId, Node> nodes = {
        {"r", event_node({"a", "b"}, {"x", "y"})},
        {"x", terminal_node({"a"}, "hi")},
        {"y", terminal_node({"b"}, "lo")},
    };
    const DecisionTree tree("r", nodes);
    const Belief belief = Belief::over({{"a", 0.125}, {"b", 0.875}});
    CHECK(mcts_estimate(tree, "x", belief, binary_utility(), {.rollouts = 4, .seed = 0}) == 1.0);
    CHECK(mcts_estimate(tree, "y", belief, binary_utility(), {.rollouts = 4, .seed = 0}) == 0.0);
}
