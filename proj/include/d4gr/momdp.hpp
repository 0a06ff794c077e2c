#pragma once

// The mixed-observability decision process: agent actions, ground-truth
// state, reward, question dynamics, utterance classification, the sensor and
// answer models, and the generative step sampled by the planner.

#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "d4gr/htn.hpp"
#include "d4gr/rng.hpp"

namespace d4gr {

enum class LanguageLabel { None, Positive, Negative };

inline std::string_view to_string(LanguageLabel l) {
  switch (l) {
    case LanguageLabel::Positive: return "Positive";
    case LanguageLabel::Negative: return "Negative";
    default: return "None";
  }
}

/// Full sensor vector for one tick, or nullopt when nothing was observed.
using WorldObservation = std::optional<World>;

struct AgentAction {
  enum class Kind { Wait, Ask, Inform };
  Kind kind = Kind::Wait;
  std::size_t target = 0;  // primitive index; meaningful for Ask and Inform

  static AgentAction wait() { return {}; }
  static AgentAction ask(std::size_t p) { return {Kind::Ask, p}; }
  static AgentAction inform(std::size_t p) { return {Kind::Inform, p}; }

  bool is_wait() const { return kind == Kind::Wait; }
  bool is_ask() const { return kind == Kind::Ask; }
  bool is_inform() const { return kind == Kind::Inform; }

  friend bool operator==(const AgentAction& a, const AgentAction& b) {
    return a.kind == b.kind && (a.kind == Kind::Wait || a.target == b.target);
  }
};

inline std::string describe(const AgentAction& a, const TaskNet& net) {
  switch (a.kind) {
    case AgentAction::Kind::Ask: return "Ask(" + net.primitive_id(a.target) + ")";
    case AgentAction::Kind::Inform: return "Inform(" + net.primitive_id(a.target) + ")";
    default: return "Wait";
  }
}

struct TrueState {
  World world;
  std::size_t active_goal = 0;
  std::optional<std::size_t> current;  // primitive the human just executed
  bool wrong_step = false;
  std::optional<std::size_t> q;
};

struct PlannerConfig {
  int depth = 19;
  int obs_samples = 6;
  int simulations = 500;
  double ucb_c = 5.0;
  double gamma = 0.95;

  void validate() const {
    if (depth < 1) throw ValidationError("planner depth must be >= 1");
    if (obs_samples < 1) throw ValidationError("planner obs-samples must be >= 1");
    if (simulations < 1) throw ValidationError("planner simulations must be >= 1");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("planner gamma must lie in (0,1]");
    if (!(ucb_c >= 0.0)) throw ValidationError("planner ucb-c must be non-negative");
  }
};

struct SimParams {
  double correct_step_prob = 0.99;  // C
  double sensor_reliability = 0.9;  // sr
  double goal_switch_prob = 0.0;
  double wait_reward = 0.0;
};

inline constexpr double kAskReward = 5.0;

/// +5 for a pertinent question about a wrong step, -5 for any other
/// question, `wait_reward` (0 by default) for Wait, 0 for Inform.
inline double reward(const TrueState& s, const AgentAction& a, double wait_reward = 0.0) {
  switch (a.kind) {
    case AgentAction::Kind::Ask:
      return (s.wrong_step && s.current && *s.current == a.target) ? kAskReward : -kAskReward;
    case AgentAction::Kind::Wait: return wait_reward;
    default: return 0.0;
  }
}

inline std::optional<std::size_t> q_next(std::optional<std::size_t> q, const AgentAction& a) {
  return a.is_ask() ? std::optional<std::size_t>(a.target) : q;
}

/// Bag-of-words intent: any negative word wins over any positive word.
inline LanguageLabel classify_utterance(std::string_view text) {
  static constexpr std::array<std::string_view, 4> kNegative{"no", "nope", "other", "not"};
  static constexpr std::array<std::string_view, 4> kPositive{"yes", "yeah", "sure", "yup"};
  bool pos = false, neg = false;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    for (auto w : kNegative) neg = neg || token == w;
    for (auto w : kPositive) pos = pos || token == w;
    token.clear();
  };
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    else flush();
  }
  flush();
  if (neg) return LanguageLabel::Negative;
  if (pos) return LanguageLabel::Positive;
  return LanguageLabel::None;
}

inline constexpr double kAnswerMatch = 0.99;
inline constexpr double kAnswerMismatch = 0.01;
inline constexpr double kAnswerNoQuestion = 0.5;

/// p(answer | alpha, q). A None label carries no evidence and returns 1.
inline double answer_likelihood(LanguageLabel ol, std::size_t alpha, std::optional<std::size_t> q) {
  if (ol == LanguageLabel::None) return 1.0;
  if (!q) return kAnswerNoQuestion;
  const bool agrees = (alpha == *q) == (ol == LanguageLabel::Positive);
  return agrees ? kAnswerMatch : kAnswerMismatch;
}

/// Truthful-but-noisy simulated answer to "did you just do q?".
inline LanguageLabel sample_answer(std::size_t alpha, std::optional<std::size_t> q, double u) {
  const double yes = !q ? kAnswerNoQuestion : (alpha == *q ? kAnswerMatch : kAnswerMismatch);
  return u < yes ? LanguageLabel::Positive : LanguageLabel::Negative;
}

inline LanguageLabel sample_answer(std::size_t alpha, std::optional<std::size_t> q, Rng& rng) {
  return sample_answer(alpha, q, rng.uniform());
}

/// Each variable reported truthfully with probability sr, independently.
inline World sense(const World& world, double sr, Rng& rng) {
  World out(world.size());
  for (std::size_t i = 0; i < world.size(); ++i) out[i] = rng.uniform() < sr ? world[i] : !world[i];
  return out;
}

/// Counter-based variant: the draw for variable i depends only on (key, i),
/// so every policy evaluated on the same trial sees the same noise.
inline World sense_keyed(const World& world, double sr, std::uint64_t key) {
  World out(world.size());
  for (std::size_t i = 0; i < world.size(); ++i)
    out[i] = keyed_uniform(stream_key({key, i})) < sr ? world[i] : !world[i];
  return out;
}

/// Samples the human's next step: a valid successor of the active goal with
/// probability C, otherwise a wrong step; falls back to whichever set is
/// non-empty. Returns nullopt at a dead end.
inline std::optional<std::pair<std::size_t, bool>> sample_human_step(const TaskNet& net, const World& world,
                                                                      std::size_t goal, double c, Rng& rng) {
  auto valid = valid_next_primitives(net, world, goal);
  auto wrong = wrong_action_set(net, world);
  const bool take_valid = rng.uniform() < c;
  if (!valid.empty() && (take_valid || wrong.empty())) return std::pair{valid[rng.index(valid.size())], false};
  if (!wrong.empty()) return std::pair{wrong[rng.index(wrong.size())], true};
  return std::nullopt;
}

struct StepOutcome {
  TrueState next;
  WorldObservation ow;
  LanguageLabel ol = LanguageLabel::None;
  double reward = 0.0;
  bool terminal = false;
};

/// One draw from the generative model used by the planner. The reward and the
/// answer concern the step the human just did (`s.current`); the human then
/// takes the next step and the sensors report the resulting world.
inline StepOutcome generative_step(const TrueState& s, const AgentAction& a, const TaskNet& net, const SimParams& params,
                                   Rng& rng) {
  StepOutcome out;
  out.reward = reward(s, a, params.wait_reward);
  const auto q = q_next(s.q, a);
  if (a.is_ask() && s.current) out.ol = sample_answer(*s.current, q, rng);

  out.next = s;
  if (params.goal_switch_prob > 0.0 && net.num_goals() > 1 && rng.uniform() < params.goal_switch_prob) {
    std::size_t g = rng.index(net.num_goals() - 1);
    out.next.active_goal = g >= s.active_goal ? g + 1 : g;
  }
  auto step = sample_human_step(net, s.world, out.next.active_goal, params.correct_step_prob, rng);
  if (!step) {
    out.terminal = true;
    return out;
  }
  out.next.current = step->first;
  out.next.wrong_step = step->second;
  out.next.world = apply_primitive(net, s.world, step->first);
  out.next.q = a.is_ask() ? std::nullopt : q;
  out.ow = sense(out.next.world, params.sensor_reliability, rng);
  return out;
}

}  // namespace d4gr
