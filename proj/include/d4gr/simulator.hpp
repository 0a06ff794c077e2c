#pragma once

// Virtual human traces for the four test categories and closed-loop episodes
// against the agent policies.

#include <algorithm>
#include <array>
#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "d4gr/belief.hpp"
#include "d4gr/momdp.hpp"
#include "d4gr/planner.hpp"
#include "d4gr/rng.hpp"

namespace d4gr {

enum class Category { SingleCorrect, MultiCorrect, SingleWrong, MultiWrong };

inline constexpr std::array<Category, 4> kAllCategories{Category::SingleCorrect, Category::MultiCorrect,
                                                        Category::SingleWrong, Category::MultiWrong};

inline std::string to_string(Category c) {
  switch (c) {
    case Category::SingleCorrect: return "single-correct";
    case Category::MultiCorrect: return "multi-correct";
    case Category::SingleWrong: return "single-wrong";
    default: return "multi-wrong";
  }
}

inline Category parse_category(std::string_view s) {
  for (auto c : kAllCategories)
    if (to_string(c) == s) return c;
  throw ParseError("unknown category '" + std::string(s) + "'");
}

inline bool is_multi(Category c) { return c == Category::MultiCorrect || c == Category::MultiWrong; }
inline bool has_wrong_steps(Category c) { return c == Category::SingleWrong || c == Category::MultiWrong; }

enum class Policy { D4gr, Htn, AlwaysAsk, RandomAsk };

inline constexpr std::array<Policy, 4> kAllPolicies{Policy::D4gr, Policy::Htn, Policy::AlwaysAsk, Policy::RandomAsk};

inline std::string to_string(Policy p) {
  switch (p) {
    case Policy::D4gr: return "d4gr";
    case Policy::Htn: return "htn";
    case Policy::AlwaysAsk: return "always-ask";
    default: return "random-ask";
  }
}

inline Policy parse_policy(std::string_view s) {
  for (auto p : kAllPolicies)
    if (to_string(p) == s) return p;
  throw ParseError("unknown policy '" + std::string(s) + "'");
}

struct TraceStep {
  std::size_t goal = 0;
  std::size_t action = 0;
  bool wrong = false;
};

struct HumanTrace {
  std::string domain;
  Category category = Category::SingleCorrect;
  std::uint64_t seed = 0;
  std::vector<TraceStep> steps;
};

inline constexpr std::size_t kMaxTraceSteps = 400;
inline constexpr int kMinRunLength = 2;

/// Walks the net from the initial world. Correct steps are uniform over the
/// active goal's valid next primitives; in the wrong categories each step is
/// replaced with probability 1-C by a uniform draw from the wrong-action set
/// (when it is non-empty). Multi-goal traces switch between unfinished goals
/// after runs of at least two steps.
inline HumanTrace generate_trace(const TaskNet& net, Category category, double c, const std::vector<std::size_t>& goals,
                                 Rng& rng, std::uint64_t seed = 0) {
  if (goals.empty()) throw ValidationError("trace needs at least one goal");
  if (!is_multi(category) && goals.size() != 1) throw ValidationError("single-goal categories take exactly one goal");
  if (is_multi(category) && goals.size() < 2) throw ValidationError("multi-goal categories take at least two goals");
  for (std::size_t i = 0; i < goals.size(); ++i) {
    if (goals[i] >= net.num_goals()) throw UnknownIdError("unknown goal index " + std::to_string(goals[i]));
    for (std::size_t j = 0; j < i; ++j)
      if (goals[i] == goals[j]) throw ValidationError("duplicate goal in trace request");
  }
  if (!(c >= 0.0 && c <= 1.0)) throw ValidationError("C must lie in [0,1]");

  HumanTrace trace{net.domain(), category, seed, {}};
  World world = net.initial_world();
  std::vector<std::size_t> open = goals;
  std::size_t active = rng.index(open.size());
  int run = 0;
  const bool wrong_ok = has_wrong_steps(category);

  while (!open.empty()) {
    if (trace.steps.size() >= kMaxTraceSteps)
      throw Error("trace generation did not finish within " + std::to_string(kMaxTraceSteps) + " steps");
    auto valid = valid_next_primitives(net, world, open[active]);
    if (valid.empty()) {
      open.erase(open.begin() + static_cast<std::ptrdiff_t>(active));
      if (open.empty()) break;
      active = rng.index(open.size());
      run = 0;
      continue;
    }
    if (open.size() > 1 && run >= kMinRunLength && rng.bernoulli(0.5)) {
      std::size_t other = rng.index(open.size() - 1);
      active = other >= active ? other + 1 : other;
      run = 0;
      continue;
    }
    const std::size_t goal = open[active];
    if (wrong_ok && rng.uniform() >= c) {
      auto wrong = wrong_action_set(net, world);
      if (!wrong.empty()) {
        const auto p = wrong[rng.index(wrong.size())];
        trace.steps.push_back({goal, p, true});
        world = apply_primitive(net, world, p);
        ++run;
        continue;
      }
    }
    const auto p = valid[rng.index(valid.size())];
    trace.steps.push_back({goal, p, false});
    world = apply_primitive(net, world, p);
    ++run;
  }
  if (trace.steps.empty()) throw Error("generated an empty trace");
  return trace;
}

inline Json trace_to_json(const HumanTrace& t, const TaskNet& net) {
  Json j{{"domain", t.domain}, {"category", to_string(t.category)}, {"seed", t.seed}, {"steps", Json::array()}};
  for (const auto& s : t.steps)
    j["steps"].push_back({{"goal", net.goal_id(s.goal)}, {"action", net.primitive_id(s.action)}, {"wrong", s.wrong}});
  return j;
}

inline HumanTrace trace_from_json(const Json& j, const TaskNet& net) {
  try {
    HumanTrace t;
    t.domain = j.at("domain").get<std::string>();
    if (t.domain != net.domain()) throw ValidationError("trace is for domain '" + t.domain + "', not '" + net.domain() + "'");
    t.category = parse_category(j.at("category").get<std::string>());
    t.seed = j.value("seed", std::uint64_t{0});
    for (const auto& s : j.at("steps"))
      t.steps.push_back({net.goal_index(s.at("goal").get<std::string>()),
                         net.primitive_index(s.at("action").get<std::string>()), s.value("wrong", false)});
    return t;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed trace: ") + e.what());
  }
}

struct EpisodeConfig {
  double correct_step_prob = 0.99;
  double sensor_reliability = 0.9;
  double compliance_prob = 1.0;
  double wait_reward = 0.0;
  double goal_switch_prob = 0.0;  // recognizer's belief that the human interleaves goals
  bool beam_pruning = false;
  PlannerConfig planner;

  BeliefParams belief_params() const {
    BeliefParams p;
    p.correct_step_prob = correct_step_prob;
    p.sensor_reliability = sensor_reliability;
    p.goal_switch_prob = goal_switch_prob;
    p.beam_pruning = beam_pruning;
    return p;
  }
  SimParams sim_params() const {
    SimParams p;
    p.correct_step_prob = correct_step_prob;
    p.sensor_reliability = sensor_reliability;
    p.wait_reward = wait_reward;
    return p;
  }
};

struct StepRecord {
  std::size_t step = 0;
  std::size_t goal = 0;
  std::size_t action = 0;
  bool wrong = false;
  bool complied = false;  // action replaced by the previous Inform
  World world;
  World ow;
  AgentAction agent;
  LanguageLabel answer = LanguageLabel::None;
  std::optional<std::size_t> inform;
  double reward = 0.0;
  std::size_t predicted_goal = 0;
  std::size_t predicted_next = 0;
  double decision_s = 0.0;
  Json snapshot;
};

struct EpisodeLog {
  Policy policy = Policy::Htn;
  std::vector<StepRecord> records;
  double cumulative_return = 0.0;
  int questions = 0;
  double decision_s_total = 0.0;
};

namespace detail {
enum StreamTag : std::uint64_t { kSense = 1, kAnswer = 2, kComply = 3 };
}

/// Closed loop over the trace. Sensor noise, answers and compliance draws are
/// keyed by (noise_key, step), so every policy run on the same trace with the
/// same key sees the same noise; `rng` drives the planner and RANDOM-ASK.
inline EpisodeLog run_episode(const TaskNet& net, const HumanTrace& trace, Policy policy, const EpisodeConfig& cfg,
                              std::uint64_t noise_key, Rng& rng) {
  cfg.planner.validate();
  const auto bp = cfg.belief_params();
  const auto sp = cfg.sim_params();
  EpisodeLog log;
  log.policy = policy;
  Belief b = init_belief(net, bp);
  World world = net.initial_world();
  std::optional<std::size_t> inform;

  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    StepRecord r;
    r.step = t;
    r.goal = trace.steps[t].goal;
    r.action = trace.steps[t].action;
    r.wrong = trace.steps[t].wrong;
    if (inform && keyed_uniform(stream_key({noise_key, t, detail::kComply})) < cfg.compliance_prob) {
      r.complied = r.action != *inform;
      if (r.complied) {
        const auto wrong = wrong_action_set(net, world);
        r.action = *inform;
        r.wrong = std::binary_search(wrong.begin(), wrong.end(), r.action);
      }
    }
    inform.reset();
    world = apply_primitive(net, world, r.action);
    r.world = world;
    r.ow = sense_keyed(world, cfg.sensor_reliability, stream_key({noise_key, t, detail::kSense}));

    const Belief prev = b;
    b = belief_step(prev, r.ow, LanguageLabel::None, AgentAction::wait(), net, bp);

    const auto t0 = std::chrono::steady_clock::now();
    switch (policy) {
      case Policy::D4gr: r.agent = plan_action(b, net, cfg.planner, sp, rng); break;
      case Policy::Htn: r.agent = AgentAction::wait(); break;
      case Policy::AlwaysAsk: r.agent = AgentAction::ask(r.action); break;
      case Policy::RandomAsk: r.agent = AgentAction::ask(rng.index(net.num_primitives())); break;
    }
    r.decision_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    TrueState truth{world, r.goal, r.action, r.wrong, b.q};
    r.reward = reward(truth, r.agent, cfg.wait_reward);
    if (r.agent.is_ask()) {
      ++log.questions;
      r.answer = sample_answer(r.action, r.agent.target, keyed_uniform(stream_key({noise_key, t, detail::kAnswer})));
      b = belief_step(prev, r.ow, r.answer, r.agent, net, bp);
      if (r.answer == LanguageLabel::Negative) {
        inform = predict_next_action(b, net);
        r.inform = inform;
      }
    }
    r.predicted_goal = argmax_goal(b.goal_dist, net);
    r.predicted_next = predict_next_action(b, net);
    r.snapshot = snapshot_json(b, net);
    log.cumulative_return += r.reward;
    log.decision_s_total += r.decision_s;
    log.records.push_back(std::move(r));
  }
  return log;
}

inline Json record_to_json(const StepRecord& r, const TaskNet& net) {
  auto bits = [](const World& w) {
    std::string s;
    for (auto x : w) s.push_back(x ? '1' : '0');
    return s;
  };
  Json j{{"step", r.step},
         {"goal", net.goal_id(r.goal)},
         {"action", net.primitive_id(r.action)},
         {"wrong", r.wrong},
         {"complied", r.complied},
         {"world", bits(r.world)},
         {"ow", bits(r.ow)},
         {"agent", describe(r.agent, net)},
         {"answer", to_string(r.answer)},
         {"inform", r.inform ? Json(net.primitive_id(*r.inform)) : Json(nullptr)},
         {"reward", r.reward},
         {"predicted_goal", net.goal_id(r.predicted_goal)},
         {"predicted_next", net.primitive_id(r.predicted_next)},
         {"belief", r.snapshot}};
  return j;
}

/// One JSON object per line.
inline std::string episode_to_jsonl(const EpisodeLog& log, const TaskNet& net) {
  std::string out;
  for (const auto& r : log.records) out += record_to_json(r, net).dump() + "\n";
  return out;
}

}  // namespace d4gr
