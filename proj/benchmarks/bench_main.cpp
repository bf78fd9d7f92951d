#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "sylva/evaluate.hpp"
#include "sylva/lottery.hpp"
#include "sylva/tree.hpp"
#include "sylva/truncate.hpp"

namespace {

using namespace sylva;

/// Complete binary tree of the given edge depth, alternating decision and
/// chance levels over a single state. Terminals cycle through five outcomes.
DecisionTree layered_tree(int depth) {
    std::map<NodeId, Node> nodes;
    std::uint64_t next = 0;
    std::vector<std::pair<NodeId, int>> pending;

    const auto fresh = [&next]() { return "n" + std::to_string(next++); };
    const std::set<State> event = {"s"};

    const NodeId root = fresh();
    pending.emplace_back(root, 0);
    while (!pending.empty()) {
        const auto [id, level] = pending.back();
        pending.pop_back();
        Node node;
        node.event = event;
        if (level == depth) {
            node.kind = NodeKind::Terminal;
            const Outcome outcome = "o" + std::to_string(next % 5);
            node.payload = AaLottery::over({{"s", Lottery::degenerate(outcome)}});
        } else {
            node.kind = level % 2 == 0 ? NodeKind::Decision : NodeKind::Chance;
            for (int i = 0; i < 2; ++i) {
                const NodeId child = fresh();
                node.children.push_back(child);
                if (node.kind == NodeKind::Chance) {
                    node.edge_probs[child] = 0.5;
                }
                pending.emplace_back(child, level + 1);
            }
        }
        nodes.emplace(id, std::move(node));
    }
    return DecisionTree(root, std::move(nodes));
}

BernoulliUtility bench_utility() {
    UtilityMap values;
    for (int i = 0; i < 5; ++i) {
        values["o" + std::to_string(i)] = 0.25 * i;
    }
    return BernoulliUtility(std::move(values), "o0", "o4");
}

void BM_Validate(benchmark::State& state) {
    const DecisionTree tree = layered_tree(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(validate(tree));
    }
    state.SetComplexityN(static_cast<std::int64_t>(tree.nodes().size()));
}
BENCHMARK(BM_Validate)->DenseRange(4, 12, 2)->Complexity(benchmark::oN);

void BM_Evaluate(benchmark::State& state) {
    const DecisionTree tree = layered_tree(static_cast<int>(state.range(0)));
    const Belief belief = Belief::over({{"s", 1.0}});
    const BernoulliUtility utility = bench_utility();
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate(tree, belief, utility));
    }
    state.SetComplexityN(static_cast<std::int64_t>(tree.nodes().size()));
}
BENCHMARK(BM_Evaluate)->DenseRange(4, 12, 2)->Complexity(benchmark::oN);

void BM_MctsEstimate(benchmark::State& state) {
    const DecisionTree tree = layered_tree(8);
    const Belief belief = Belief::over({{"s", 1.0}});
    const BernoulliUtility utility = bench_utility();
    RolloutConfig cfg;
    cfg.rollouts = static_cast<std::uint64_t>(state.range(0));
    cfg.seed = 42;
    for (auto _ : state) {
        benchmark::DoNotOptimize(mcts_estimate(tree, tree.root(), belief, utility, cfg));
    }
}
BENCHMARK(BM_MctsEstimate)->RangeMultiplier(4)->Range(64, 16384);

} // namespace

int main(int argc, char** argv) {
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) {
        return 1;
    }
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
