#include <doctest.h>

#include <string>

#include "sylva/enliven.hpp"
#include "sylva/errors.hpp"
#include "sylva/tree_io.hpp"
#include "test_util.hpp"

using namespace sylva;
using namespace sylva::testutil;

namespace {

const std::set<State> kSea = {"sea"};

BernoulliUtility binary_utility() {
    return BernoulliUtility({{"lo", 0.0}, {"hi", 1.0}}, "lo", "hi");
}

/// Chance root over {x: hi, y: lo}; the canvas for edge enlivenments.
DecisionTree coin_tree() {
    return DecisionTree("r", {{"r", chance_node({"s0"}, {{"x", 0.5}, {"y", 0.5}})},
                              {"x", terminal_node({"s0"}, "hi")},
                              {"y", terminal_node({"s0"}, "lo")}});
}

EnlivenmentStep boom_step() {
    Node gx;
    gx.kind = NodeKind::Terminal;
    gx.event = {"d"};
    gx.payload = AaLottery::over({{"d", Lottery::degenerate("boom")}});

    EdgeEnlivenment edge;
    edge.from = "r";
    edge.to = "x";
    edge.event_node = "ev";
    edge.deviation_states = {"d"};
    edge.subtree = DecisionTree("gx", {{"gx", gx}});

    DomainExtension ext;
    ext.new_consequences = {{"boom", 5.0}};
    ext.new_state_mass = {{"d", 0.2}};
    return EnlivenmentStep{edge, ext};
}

} // namespace

TEST_CASE("epsilon is the total new state mass") {
    DomainExtension ext;
    CHECK(ext.epsilon() == 0.0);
    CHECK(ext.empty());
    ext.new_state_mass = {{"a", 0.125}, {"b", 0.25}};
    CHECK(ext.epsilon() == doctest::Approx(0.375));
    CHECK_FALSE(ext.empty());
}

TEST_CASE("extend_utility adds consequences without touching old ones") {
    const BernoulliUtility u = binary_utility();
    DomainExtension ext;
    ext.new_consequences = {{"boom", 5.0}};
    const BernoulliUtility extended = extend_utility(u, ext);
    CHECK(extended.at("boom") == 5.0);
    CHECK(extended.at("lo") == 0.0);
    CHECK(extended.at("hi") == 1.0);
    CHECK(extended.y_low() == "lo");
    CHECK(extended.y_high() == "hi");

    DomainExtension clash;
    clash.new_consequences = {{"hi", 2.0}};
    CHECK_THROWS_AS(extend_utility(u, clash), DomainError);
}

TEST_CASE("extend_beliefs scales the old states down by one minus epsilon") {
    const Belief p = Belief::over({{"a", 0.25}, {"b", 0.75}});
    DomainExtension ext;
    ext.new_state_mass = {{"c", 0.2}};
    const Belief plus = extend_beliefs(p, ext);
    CHECK(plus.at("a") == doctest::Approx(0.2));
    CHECK(plus.at("b") == doctest::Approx(0.6));
    CHECK(plus.at("c") == 0.2);

    CHECK(extend_beliefs(p, DomainExtension{}).mass() == p.mass());

    DomainExtension too_much;
    too_much.new_state_mass = {{"c", 1.0}};
    CHECK_THROWS_AS(extend_beliefs(p, too_much), DomainError);

    DomainExtension zero;
    zero.new_state_mass = {{"c", 0.0}};
    CHECK_THROWS_AS(extend_beliefs(p, zero), DomainError);

    DomainExtension clash;
    clash.new_state_mass = {{"b", 0.1}};
    CHECK_THROWS_AS(extend_beliefs(p, clash), DomainError);
}

TEST_CASE("check_reverse_bayes accepts extensions and spots tampering") {
    const Belief p = Belief::over({{"a", 0.25}, {"b", 0.75}});
    DomainExtension ext;
    ext.new_state_mass = {{"c", 0.125}, {"d", 0.125}};
    const Belief plus = extend_beliefs(p, ext);
    CHECK(check_reverse_bayes(plus, p, {"a", "b"}));

    const Belief skewed = Belief::over({{"a", 0.3}, {"b", 0.45}, {"c", 0.125}, {"d", 0.125}});
    CHECK_FALSE(check_reverse_bayes(skewed, p, {"a", "b"}));

    CHECK_THROWS_AS(check_reverse_bayes(plus, p, {"a"}), DomainError);
    CHECK_THROWS_AS(check_reverse_bayes(p, p, {"a", "b", "z"}), DomainError);
}

TEST_CASE("a terminal graft rebuilds fig2 from fig1") {
    const TreeFile fig1 = load_tree_file(fixture_path("fig1.tree"));
    const TreeFile fig2 = load_tree_file(fixture_path("fig2.tree"));

    TerminalEnlivenment graft;
    graft.at = "early";
    graft.subtree = continuation(fig2.tree, "go_on");
    DomainExtension ext;
    ext.new_consequences = {{"die", 0.0}};

    const DecisionTree grown = apply_step(fig1.tree, {graft, ext});
    CHECK(grown == fig2.tree);
}

TEST_CASE("the shipped script walks fig1 through the odyssey shapes") {
    const TreeFile fig1 = load_tree_file(fixture_path("fig1.tree"));
    const TreeFile fig2 = load_tree_file(fixture_path("fig2.tree"));
    const TreeFile fig3 = load_tree_file(fixture_path("fig3.tree"));
    const TreeFile fig4 = load_tree_file(fixture_path("fig4.tree"));
    const auto entries = load_script_file(fixture_path("odyssey.script"));
    REQUIRE(entries.size() == 3);

    const DecisionTree step1 = apply_step(fig1.tree, entries[0].step);
    CHECK(isomorphic(step1, fig2.tree));
    CHECK_FALSE(step1 == fig2.tree);

    const DecisionTree step2 = apply_step(step1, entries[1].step);
    CHECK(step2 == fig3.tree);

    const DecisionTree step3 = apply_step(step2, entries[2].step);
    CHECK(step3 == fig4.tree);

    std::vector<EnlivenmentStep> script;
    for (const auto& entry : entries) {
        script.push_back(entry.step);
    }
    const EnlivenedModel model =
        apply_script(fig1.tree, fig1.belief, fig1.utility, script);
    CHECK(model.tree == fig4.tree);
    CHECK(model.belief.mass() == fig4.belief.mass());
    CHECK(model.utility.values() == fig4.utility.values());

    const EvaluationReport report = evaluate(model.tree, model.belief, model.utility);
    CHECK(report.value.at("start") == doctest::Approx(1.0));
}

TEST_CASE("terminal grafts reject bad targets") {
    const TreeFile fig1 = load_tree_file(fixture_path("fig1.tree"));
    const DecisionTree graft("g", {{"g", terminal_node(kSea, "late")}});

    CHECK_THROWS_AS(apply_step(fig1.tree, {TerminalEnlivenment{"go_near", graft}, {}}),
                    DomainError);
    CHECK_THROWS_AS(apply_step(fig1.tree, {TerminalEnlivenment{"nope", graft}, {}}),
                    LookupError);

    const DecisionTree off_event("g", {{"g", terminal_node({"land"}, "late")}});
    CHECK_THROWS_AS(apply_step(fig1.tree, {TerminalEnlivenment{"early", off_event}, {}}),
                    DomainError);

    const DecisionTree clashing("start", {{"start", terminal_node(kSea, "late")}});
    CHECK_THROWS_AS(apply_step(fig1.tree, {TerminalEnlivenment{"early", clashing}, {}}),
                    DomainError);
}

TEST_CASE("a terminal graft may reuse the replaced id") {
    const TreeFile fig1 = load_tree_file(fixture_path("fig1.tree"));
    const DecisionTree graft("early", {{"early", terminal_node(kSea, "late")}});
    const DecisionTree grown =
        apply_step(fig1.tree, {TerminalEnlivenment{"early", graft}, {}});
    CHECK(grown.nodes().size() == fig1.tree.nodes().size());
    CHECK(grown.node("early").payload ==
          TerminalPayload{AaLottery::over({{"sea", Lottery::degenerate("late")}})});
}

TEST_CASE("replacing the root swaps in the whole graft") {
    const DecisionTree tiny("r", {{"r", terminal_node(kSea, "lo")}});
    const DecisionTree graft("g", {{"g", decision_node(kSea, {"t"})},
                                   {"t", terminal_node(kSea, "hi")}});
    const DecisionTree grown = apply_step(tiny, {TerminalEnlivenment{"r", graft}, {}});
    CHECK(grown.root() == "g");
    CHECK(grown.nodes().size() == 2);
}

TEST_CASE("an edge graft splices an event node and floods siblings") {
    const DecisionTree grown = apply_step(coin_tree(), boom_step());
    CHECK(validate(grown).ok());
    CHECK(grown.nodes().size() == 5);

    const std::set<State> both = {"d", "s0"};
    CHECK(grown.node("r").event == both);
    CHECK(grown.node("r").children == std::vector<NodeId>{"ev", "y"});
    CHECK(grown.node("r").edge_probs.at("ev") == 0.5);
    CHECK(grown.node("ev").kind == NodeKind::Event);
    CHECK(grown.node("ev").event == both);
    CHECK(grown.node("ev").children == std::vector<NodeId>{"x", "gx"});
    CHECK(grown.node("x").event == std::set<State>{"s0"});
    CHECK(grown.node("gx").event == std::set<State>{"d"});

    const Node& y = grown.node("y");
    CHECK(y.event == both);
    const auto& rows = std::get<AaLottery>(*y.payload).rows();
    CHECK(rows.at("d") == rows.at("s0"));
}

TEST_CASE("the enlivened coin evaluates with the extended belief") {
    const EnlivenedModel model = apply_script(coin_tree(), Belief::over({{"s0", 1.0}}),
                                              binary_utility(), {boom_step()});
    CHECK(check_reverse_bayes(model.belief, Belief::over({{"s0", 1.0}}), {"s0"}));
    const EvaluationReport report = evaluate(model.tree, model.belief, model.utility);
    CHECK(report.value.at("ev") == doctest::Approx(0.8 * 1.0 + 0.2 * 5.0));
    CHECK(report.value.at("r") == doctest::Approx(0.5 * 1.8 + 0.5 * 0.0));
}

TEST_CASE("edge grafts reject malformed splices") {
    const DecisionTree tree = coin_tree();

    EnlivenmentStep step = boom_step();
    std::get<EdgeEnlivenment>(step.action).to = "r";
    CHECK_THROWS_AS(apply_step(tree, step), DomainError);
    std::get<EdgeEnlivenment>(step.action).to = "nope";
    CHECK_THROWS_AS(apply_step(tree, step), LookupError);

    step = boom_step();
    std::get<EdgeEnlivenment>(step.action).deviation_states = {};
    CHECK_THROWS_AS(apply_step(tree, step), DomainError);

    step = boom_step();
    std::get<EdgeEnlivenment>(step.action).deviation_states = {"other"};
    CHECK_THROWS_AS(apply_step(tree, step), DomainError);

    step = boom_step();
    std::get<EdgeEnlivenment>(step.action).event_node = "y";
    CHECK_THROWS_AS(apply_step(tree, step), DomainError);

    step = boom_step();
    std::get<EdgeEnlivenment>(step.action).deviation_states = {"s0"};
    step.extension.new_state_mass = {{"s0", 0.2}};
    CHECK_THROWS_AS(apply_step(tree, step), DomainError);
}

TEST_CASE("apply_script names the failing step") {
    const DecisionTree tree = coin_tree();
    EnlivenmentStep bad = boom_step();
    std::get<EdgeEnlivenment>(bad.action).to = "nope";
    try {
        apply_script(tree, Belief::over({{"s0", 1.0}}), binary_utility(),
                     {boom_step(), bad});
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("script step 1") == 0);
    }
}

TEST_CASE("collapse inverts an edge enlivenment") {
    const DecisionTree original = coin_tree();
    const Belief prior = Belief::over({{"s0", 1.0}});
    const EnlivenedModel model =
        apply_script(original, prior, binary_utility(), {boom_step()});

    const CollapseResult result = collapse(model.tree, model.belief, {"s0"});
    CHECK(result.tree == original);
    CHECK(result.belief.mass() == prior.mass());
}

TEST_CASE("collapse keeps single-child event nodes that lost nothing") {
    const DecisionTree tree("r", {{"r", event_node(kSea, {"t"})},
                                  {"t", terminal_node(kSea, "hi")}});
    const CollapseResult result = collapse(tree, Belief::over({{"sea", 1.0}}), kSea);
    CHECK(result.tree == tree);
}

TEST_CASE("collapse requires the root to intersect the kept states") {
    const DecisionTree tree = coin_tree();
    CHECK_THROWS_AS(collapse(tree, Belief::over({{"s0", 1.0}}), {"elsewhere"}),
                    DomainError);
}
