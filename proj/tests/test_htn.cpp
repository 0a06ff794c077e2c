#include <gtest/gtest.h>

#include <set>

#include "d4gr/domains.hpp"
#include "d4gr/htn.hpp"
#include "oracle/joint_filter.hpp"
#include "oracle/micro_domains.hpp"

using namespace d4gr;

namespace {

std::set<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

Json minimal_doc() {
  return Json::parse(R"({
    "schema": 1, "domain": "tiny",
    "vars": [{"id": "x", "kind": "ss", "initial": false}],
    "primitives": [{"id": "a", "pre": [], "eff": [["x", true]]},
                   {"id": "b", "pre": [["x", true]], "eff": [["x", false]]}],
    "methods": [{"id": "m", "task": "g", "subtasks": ["a", "b"], "ordering": "ordered", "prob": 1.0}],
    "goals": ["g"]
  })");
}

template <class E>
std::string load_error(const Json& doc) {
  try {
    load_tasknet(doc);
  } catch (const E& e) {
    return e.what();
  }
  return "<no error>";
}

// Worlds from applying effects by hand.
World run_plan(const TaskNet& net, const std::vector<std::size_t>& plan, std::size_t k) {
  World w = net.initial_world();
  for (std::size_t i = 0; i < k; ++i)
    for (const auto& l : net.primitives()[plan[i]].eff) w[l.var] = l.value;
  return w;
}

// Reference for valid_next on prefix worlds: the most advanced plan prefixes
// of the goal that reach exactly this world, their next steps, filtered by
// preconditions.
std::set<std::size_t> oracle_valid(const TaskNet& net, const std::vector<oracle::Hypothesis>& hyps, std::size_t goal,
                                   const World& world) {
  std::size_t best = 0;
  bool any = false;
  std::set<std::size_t> out;
  for (const auto& h : hyps) {
    if (h.goal != goal) continue;
    for (std::size_t k = 0; k <= h.plan.size(); ++k) {
      if (run_plan(net, h.plan, k) != world) continue;
      if (!any || k > best) {
        best = k;
        out.clear();
        any = true;
      }
      if (k == best && k < h.plan.size() && net.preconditions_hold(h.plan[k], world)) out.insert(h.plan[k]);
    }
  }
  return out;
}

void check_valid_next_against_oracle(const TaskNet& net) {
  const auto hyps = oracle::enumerate_hypotheses(net);
  std::set<std::pair<std::size_t, World>> seen;
  for (const auto& h : hyps)
    for (std::size_t k = 0; k <= h.plan.size(); ++k) {
      World w = run_plan(net, h.plan, k);
      if (!seen.insert({h.goal, w}).second) continue;
      const auto got = valid_next_primitives(net, w, h.goal);
      EXPECT_EQ(std::set<std::size_t>(got.begin(), got.end()), oracle_valid(net, hyps, h.goal, w))
          << net.domain() << " goal " << net.goal_id(h.goal) << " prefix " << k;
    }
}

}  // namespace

TEST(LoadTaskNet, KitchenGoals) {
  const auto net = load_domain("kitchen");
  std::set<std::string> goals;
  for (std::size_t g = 0; g < net.num_goals(); ++g) goals.insert(net.goal_id(g));
  EXPECT_EQ(goals, (std::set<std::string>{"wash_hands", "make_tea", "make_coffee"}));
}

TEST(LoadTaskNet, BlocksGoals) {
  const auto net = load_domain("blocks");
  std::set<std::string> goals;
  for (std::size_t g = 0; g < net.num_goals(); ++g) goals.insert(net.goal_id(g));
  EXPECT_EQ(goals, (std::set<std::string>{"rote", "tone", "tune", "hawk", "capstone"}));
}

TEST(LoadTaskNet, MethodProbsOverOne) {
  Json doc = minimal_doc();
  doc["methods"] = Json::parse(R"([
    {"id": "m1", "task": "g", "subtasks": ["a"], "ordering": "ordered", "prob": 0.6},
    {"id": "m2", "task": "g", "subtasks": ["b"], "ordering": "ordered", "prob": 0.6}])");
  EXPECT_NE(load_error<ValidationError>(doc).find("method probs for task 'g'"), std::string::npos);
}

TEST(LoadTaskNet, DanglingIds) {
  Json doc = minimal_doc();
  doc["methods"][0]["subtasks"] = {"a", "nope"};
  EXPECT_NE(load_error<ValidationError>(doc).find("dangling id"), std::string::npos);

  doc = minimal_doc();
  doc["primitives"][0]["eff"] = Json::parse(R"([["ghost", true]])");
  EXPECT_NE(load_error<ValidationError>(doc).find("unknown variable 'ghost'"), std::string::npos);

  doc = minimal_doc();
  doc["goals"] = {"missing"};
  EXPECT_NE(load_error<ValidationError>(doc).find("dangling id"), std::string::npos);
}

TEST(LoadTaskNet, Cycle) {
  Json doc = minimal_doc();
  doc["methods"] = Json::parse(R"([
    {"id": "m", "task": "g", "subtasks": ["a", "h"], "ordering": "ordered", "prob": 1.0},
    {"id": "mh", "task": "h", "subtasks": ["g"], "ordering": "ordered", "prob": 1.0}])");
  EXPECT_NE(load_error<ValidationError>(doc).find("cycle"), std::string::npos);
}

TEST(LoadTaskNet, ParseErrors) {
  EXPECT_THROW(load_tasknet(std::string_view("{not json")), ParseError);
  Json doc = minimal_doc();
  doc["schema"] = 2;
  EXPECT_THROW(load_tasknet(doc), ParseError);
  doc = minimal_doc();
  doc["vars"][0]["kind"] = "sensor";
  EXPECT_THROW(load_tasknet(doc), ParseError);
  doc = minimal_doc();
  doc.erase("goals");
  EXPECT_THROW(load_tasknet(doc), ParseError);
}

TEST(LoadTaskNet, DuplicatesAndBadProb) {
  Json doc = minimal_doc();
  doc["vars"].push_back(doc["vars"][0]);
  EXPECT_THROW(load_tasknet(doc), ValidationError);
  doc = minimal_doc();
  doc["methods"][0]["prob"] = 0.0;
  EXPECT_THROW(load_tasknet(doc), ValidationError);
}

TEST(LoadTaskNet, RoundTrip) {
  for (const auto& text : oracle::micro_domain_docs()) {
    const auto net = load_tasknet(std::string_view(text));
    const Json once = to_json(net);
    EXPECT_EQ(to_json(load_tasknet(once)), once);
  }
  for (const auto& [name, n] : shipped_domains()) {
    const auto net = load_domain(name);
    const Json once = to_json(net);
    EXPECT_EQ(to_json(load_tasknet(once)), once) << name;
  }
}

TEST(ValidNext, KitchenInitialWashHands) {
  const auto net = load_domain("kitchen");
  EXPECT_EQ(as_set(valid_next_primitives(net, net.initial_world(), "wash_hands")),
            (std::set<std::string>{"turn_on_faucet"}));
}

TEST(ValidNext, BlocksRoteAfterRot) {
  const auto net = load_domain("blocks");
  World w = net.initial_world();
  for (auto p : {"pick_up_r", "pick_up_o", "pick_up_t", "pick_up_e", "place_r", "place_o", "place_t"})
    w = apply_primitive(net, w, p);
  EXPECT_EQ(as_set(valid_next_primitives(net, w, "rote")), (std::set<std::string>{"place_e"}));
}

TEST(ValidNext, NoPreconditionsHold) {
  Json doc = minimal_doc();
  doc["primitives"][0]["pre"] = Json::parse(R"([["x", true]])");
  const auto net = load_tasknet(doc);
  EXPECT_TRUE(valid_next_primitives(net, net.initial_world(), "g").empty());
}

TEST(ValidNext, UnknownGoal) {
  const auto net = load_domain("kitchen");
  EXPECT_THROW(valid_next_primitives(net, net.initial_world(), "make_soup"), UnknownIdError);
  EXPECT_THROW(valid_next_primitives(net, net.initial_world(), std::size_t{9}), UnknownIdError);
}

TEST(ValidNext, MatchesLinearizationOracle) {
  for (const auto& text : oracle::micro_domain_docs()) check_valid_next_against_oracle(load_tasknet(std::string_view(text)));
  check_valid_next_against_oracle(load_domain("kitchen"));
  check_valid_next_against_oracle(load_domain("blocks"));
}

TEST(WrongActions, KitchenFaucetOn) {
  const auto net = load_domain("kitchen");
  const World w = apply_primitive(net, net.initial_world(), "turn_on_faucet");
  const auto wrong = as_set(wrong_action_set(net, w, "wash_hands"));
  EXPECT_TRUE(wrong.count("turn_off_faucet"));
  EXPECT_FALSE(wrong.count("use_soap"));
}

TEST(WrongActions, OnlyValidExecutable) {
  Json doc = minimal_doc();
  doc["vars"].push_back({{"id", "y"}, {"kind", "att"}, {"initial", false}});
  doc["primitives"][1]["eff"] = Json::parse(R"([["y", true]])");
  const auto net = load_tasknet(doc);
  // Only `a` is executable initially and it is the valid step.
  EXPECT_TRUE(wrong_action_set(net, net.initial_world(), "g").empty());
}

TEST(WrongActions, RevertedWorldReadsAsFinished) {
  // a then b restores the initial world; validity is read off the world, and
  // the most advanced matching progress wins.
  const auto net = load_tasknet(minimal_doc());
  EXPECT_TRUE(valid_next_primitives(net, net.initial_world(), "g").empty());
  const World after_a = apply_primitive(net, net.initial_world(), "a");
  EXPECT_EQ(as_set(valid_next_primitives(net, after_a, "g")), (std::set<std::string>{"b"}));
}

TEST(WrongActions, SharedPrefixSetDifference) {
  const auto net = load_tasknet(std::string_view(oracle::kSharedPrefix));
  // After `a` both goals advance via b and c; repeating a advances nothing and
  // d needs y.
  World w = apply_primitive(net, net.initial_world(), "a");
  EXPECT_EQ(as_set(wrong_action_set(net, w, "g1")), (std::set<std::string>{"a"}));
  // After a, b: g1 done, g2 still wants c. a and b advance nothing; d is now
  // executable too.
  w = apply_primitive(net, w, "b");
  EXPECT_EQ(as_set(valid_next_primitives(net, w, "g2")), (std::set<std::string>{"c"}));
  EXPECT_EQ(as_set(wrong_action_set(net, w, "g1")), (std::set<std::string>{"a", "b", "d"}));
}

TEST(WrongActions, DisjointFromValidAndExecutable) {
  for (const auto& text : oracle::micro_domain_docs()) {
    const auto net = load_tasknet(std::string_view(text));
    for (std::size_t bits = 0; bits < (1u << net.num_vars()); ++bits) {
      World w(net.num_vars());
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = (bits >> i) & 1;
      for (std::size_t g = 0; g < net.num_goals(); ++g) {
        const auto valid = valid_next_primitives(net, w, g);
        const auto wrong = wrong_action_set(net, w, g);
        for (auto p : valid) {
          EXPECT_TRUE(net.preconditions_hold(p, w));
          EXPECT_EQ(std::count(wrong.begin(), wrong.end(), p), 0);
        }
        for (auto p : wrong) EXPECT_TRUE(net.preconditions_hold(p, w));
      }
    }
  }
}

TEST(ApplyPrimitive, KitchenFaucet) {
  const auto net = load_domain("kitchen");
  const World w = apply_primitive(net, net.initial_world(), "turn_on_faucet");
  EXPECT_TRUE(w[net.var_index("faucet_on")]);
  EXPECT_FALSE(net.initial_world()[net.var_index("faucet_on")]);
}

TEST(ApplyPrimitive, IdempotentAndUnknown) {
  const auto net = load_domain("kitchen");
  const World once = apply_primitive(net, net.initial_world(), "take_out_cup");
  EXPECT_EQ(apply_primitive(net, once, "take_out_cup"), once);
  EXPECT_THROW(apply_primitive(net, once, "juggle"), UnknownIdError);
}

TEST(ApplyPrimitive, FrameExhaustive) {
  for (const auto& text : oracle::micro_domain_docs()) {
    const auto net = load_tasknet(std::string_view(text));
    for (std::size_t bits = 0; bits < (1u << net.num_vars()); ++bits) {
      World w(net.num_vars());
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = (bits >> i) & 1;
      for (std::size_t p = 0; p < net.num_primitives(); ++p) {
        const World next = apply_primitive(net, w, p);
        for (std::size_t i = 0; i < w.size(); ++i) {
          const Literal* eff = nullptr;
          for (const auto& l : net.primitives()[p].eff)
            if (l.var == i) eff = &l;
          EXPECT_EQ(static_cast<bool>(next[i]), eff ? eff->value : static_cast<bool>(w[i]));
        }
      }
    }
  }
}

TEST(TaskTree, SuccessorWeightsSumToOne) {
  const auto net = load_tasknet(std::string_view(oracle::kMethods));
  for (std::size_t g = 0; g < net.num_goals(); ++g) {
    double total = 0.0;
    for (const auto& s : net.successors(net.root_tree(g))) total += s.weight;
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}
