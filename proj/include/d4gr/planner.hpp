#pragma once

// POUCT: Monte-Carlo tree search over action/observation histories, driven
// by a generative model. The search is generic over the model; D4grModel
// binds it to the belief engine and the TaskNet dynamics.
//
// A model provides
//   using State = ...;
//   std::size_t num_actions() const;          // action 0 wins ties
//   State sample_root(Rng&) const;
//   Transition<State> step(const State&, std::size_t a, Rng&) const;
//   double rollout(const State&, int depth, double gamma, Rng&) const;

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "d4gr/belief.hpp"
#include "d4gr/momdp.hpp"
#include "d4gr/rng.hpp"

namespace d4gr {

template <class State>
struct Transition {
  State next;
  std::uint64_t obs = 0;
  double reward = 0.0;
  bool terminal = false;
};

struct ActionStats {
  int visits = 0;
  double value = 0.0;
};

struct SearchResult {
  std::size_t action = 0;
  std::vector<ActionStats> root;
  std::size_t nodes = 0;
};

template <class Model>
class Pouct {
 public:
  using State = typename Model::State;

  Pouct(const Model& model, const PlannerConfig& cfg) : model_(model), cfg_(cfg) { cfg_.validate(); }

  SearchResult search(Rng& rng) {
    nodes_.clear();
    nodes_.push_back(make_node());
    for (int i = 0; i < cfg_.simulations; ++i) {
      State s = model_.sample_root(rng);
      simulate(s, 0, cfg_.depth, rng);
    }
    SearchResult r;
    const Node& root = nodes_[0];
    r.root.resize(root.stats.size());
    for (std::size_t a = 0; a < root.stats.size(); ++a) r.root[a] = root.stats[a];
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < root.stats.size(); ++a)
      if (root.stats[a].visits > 0 && root.stats[a].value > best) {
        best = root.stats[a].value;
        r.action = a;
      }
    r.nodes = nodes_.size();
    return r;
  }

 private:
  struct Node {
    int visits = 0;
    std::vector<ActionStats> stats;
    std::vector<std::vector<std::pair<std::uint64_t, std::size_t>>> children;  // per action: (obs, node)
  };

  Node make_node() const {
    Node n;
    n.stats.resize(model_.num_actions());
    n.children.resize(model_.num_actions());
    return n;
  }

  std::size_t select(const Node& n) const {
    for (std::size_t a = 0; a < n.stats.size(); ++a)
      if (n.stats[a].visits == 0) return a;
    const double log_n = std::log(static_cast<double>(n.visits));
    std::size_t best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n.stats.size(); ++a) {
      const double v = n.stats[a].value + cfg_.ucb_c * std::sqrt(log_n / n.stats[a].visits);
      if (v > best_v) {
        best_v = v;
        best = a;
      }
    }
    return best;
  }

  std::size_t child(std::size_t node, std::size_t a, std::uint64_t obs, Rng& rng) {
    auto& kids = nodes_[node].children[a];
    for (const auto& [key, idx] : kids)
      if (key == obs) return idx;
    if (kids.size() >= static_cast<std::size_t>(cfg_.obs_samples)) return kids[rng.index(kids.size())].second;
    const std::size_t idx = nodes_.size();
    nodes_.push_back(make_node());
    nodes_[node].children[a].emplace_back(obs, idx);
    return idx;
  }

  double simulate(const State& s, std::size_t node, int depth, Rng& rng) {
    if (depth == 0) return 0.0;
    if (nodes_[node].visits == 0) {
      nodes_[node].visits = 1;
      return model_.rollout(s, depth, cfg_.gamma, rng);
    }
    const std::size_t a = select(nodes_[node]);
    auto t = model_.step(s, a, rng);
    double ret = t.reward;
    if (!t.terminal && depth > 1) {
      const std::size_t c = child(node, a, t.obs, rng);
      ret += cfg_.gamma * simulate(t.next, c, depth - 1, rng);
    }
    Node& n = nodes_[node];
    n.visits += 1;
    auto& st = n.stats[a];
    st.visits += 1;
    st.value += (ret - st.value) / st.visits;
    return ret;
  }

  const Model& model_;
  PlannerConfig cfg_;
  std::vector<Node> nodes_;
};

/// Draws an index from an unnormalised distribution; throws when it has no
/// mass.
inline std::size_t sample_index(const std::vector<double>& dist, Rng& rng, const char* name) {
  double total = 0.0;
  for (double x : dist) total += x;
  if (!(total > 0.0)) throw DegenerateBeliefError(std::string("cannot sample from zero-support ") + name);
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] <= 0.0) continue;
    if (u < dist[i]) return i;
    u -= dist[i];
  }
  for (std::size_t i = dist.size(); i-- > 0;)
    if (dist[i] > 0.0) return i;
  return 0;
}

/// The agent's decision problem. Actions: 0 = Wait, 1 = Ask(target), where
/// target is the MAP estimate of the step the human just did.
class D4grModel {
 public:
  using State = TrueState;

  D4grModel(const Belief& b, const TaskNet& net, const SimParams& params)
      : b_(b), net_(net), params_(params), target_(map_action(b, net)) {
    if (b.goal_dist.size() != net.num_goals() || b.action_dist.size() != net.num_primitives() ||
        b.world_marginals.size() != net.num_vars())
      throw ValidationError("belief does not match the domain");
  }

  std::size_t num_actions() const { return 2; }
  std::size_t ask_target() const { return target_; }

  AgentAction action(std::size_t a) const { return a == 0 ? AgentAction::wait() : AgentAction::ask(target_); }

  TrueState sample_root(Rng& rng) const {
    TrueState s;
    s.active_goal = sample_index(b_.goal_dist, rng, "goal distribution");
    if (b_.step > 0) {
      const std::size_t alpha = sample_index(b_.action_dist, rng, "action distribution");
      s.current = alpha;
      s.wrong_step = rng.uniform() * b_.action_dist[alpha] < b_.offplan_dist[alpha];
    }
    s.world.resize(net_.num_vars());
    for (std::size_t i = 0; i < net_.num_vars(); ++i) s.world[i] = rng.uniform() < b_.world_marginals[i];
    s.q = b_.q;
    return s;
  }

  Transition<TrueState> step(const TrueState& s, std::size_t a, Rng& rng) const {
    auto out = generative_step(s, action(a), net_, params_, rng);
    Transition<TrueState> t;
    t.reward = out.reward;
    t.terminal = out.terminal;
    if (out.terminal) return t;
    std::uint64_t key = stream_key({static_cast<std::uint64_t>(out.ol)});
    for (auto i : net_.touched_vars(*out.next.current)) key = stream_key({key, i, (*out.ow)[i]});
    t.obs = key;
    t.next = std::move(out.next);
    return t;
  }

  /// Wait-only rollout: the reward does not depend on the trajectory, so the
  /// discounted sum has a closed form.
  double rollout(const TrueState&, int depth, double gamma, Rng&) const {
    if (params_.wait_reward == 0.0) return 0.0;
    const double g = gamma == 1.0 ? depth : (1.0 - std::pow(gamma, depth)) / (1.0 - gamma);
    return params_.wait_reward * g;
  }

 private:
  const Belief& b_;
  const TaskNet& net_;
  SimParams params_;
  std::size_t target_;
};

struct Decision {
  AgentAction action;
  SearchResult search;
};

inline Decision plan_decision(const Belief& b, const TaskNet& net, const PlannerConfig& cfg, const SimParams& params,
                              Rng& rng) {
  D4grModel model(b, net, params);
  Pouct<D4grModel> pouct(model, cfg);
  auto r = pouct.search(rng);
  return {model.action(r.action), std::move(r)};
}

inline AgentAction plan_action(const Belief& b, const TaskNet& net, const PlannerConfig& cfg, const SimParams& params,
                               Rng& rng) {
  return plan_decision(b, net, cfg, params, rng).action;
}

}  // namespace d4gr
