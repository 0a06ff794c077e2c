#pragma once

// Factored belief over (goal, current primitive, world) and its update from
// world-sensor and language evidence.
//
// Model, per step:
//   * The human's step is drawn from an explanation e (one partially
//     decomposed tree per goal plus the goal being served): with probability
//     C a valid successor of e, weighted by goal choice, slot share and
//     expand-probs; otherwise an off-plan step drawn uniformly over all
//     primitives, which leaves e unchanged. A complete explanation only emits
//     off-plan steps.
//   * Each variable moves through the per-variable kernel
//     K(w'|w,a) = hit if a's precondition on the variable holds and w' is
//     the expected value, miss otherwise.
//   * Each sensor reports its variable correctly with probability sr.
//   * An answer to a question about q follows the answer CPT.
// The world prior is the product of the current marginals. Every quantity
// below is exact under this model.

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "d4gr/htn.hpp"
#include "d4gr/momdp.hpp"

namespace d4gr {

struct BeliefParams {
  double correct_step_prob = 0.99;  // C
  double sensor_reliability = 0.9;  // sr
  double goal_switch_prob = 0.0;    // chance a step serves a different unfinished goal
  double transition_hit = 0.999;
  double transition_miss = 0.001;
  bool beam_pruning = false;
  double prune_epsilon = 1e-6;
};

/// One way to advance an explanation: `goal`'s tree takes `primitive`.
struct ForestStep {
  std::size_t goal = 0;
  std::size_t primitive = 0;
  TaskTree tree;
  double weight = 0.0;  // goal choice x slot share x expand-probs
};

/// A forest with one tree per goal, plus the goal the human is serving.
struct Explanation {
  std::size_t goal = 0;
  std::vector<TaskTree> forest;
  double prob = 0.0;
  std::vector<ForestStep> next;      // ways to advance by one primitive
  std::vector<std::size_t> pending;  // ready primitives of the goal being served, sorted

  bool complete() const { return next.empty(); }

  std::string key() const {
    std::string k = std::to_string(goal);
    for (const auto& t : forest) k += '/' + t.key();
    return k;
  }
};

/// Successor weights: the active goal keeps 1-s and the other unfinished
/// goals share s. A finished active goal hands over to the unfinished ones
/// when switching is enabled; otherwise the explanation is complete.
inline Explanation make_explanation(const TaskNet& net, std::size_t goal, std::vector<TaskTree> forest, double prob,
                                    double switch_prob = 0.0) {
  Explanation e{goal, std::move(forest), prob, {}, {}};
  std::vector<std::size_t> others;
  if (switch_prob > 0.0)
    for (std::size_t h = 0; h < e.forest.size(); ++h)
      if (h != goal && !e.forest[h].complete()) others.push_back(h);
  const bool active_open = !e.forest[goal].complete();
  auto add = [&](std::size_t h, double share) {
    for (auto& st : net.successors(e.forest[h])) {
      e.next.push_back({h, st.primitive, std::move(st.tree), share * st.weight});
      if (share > 0.0 && (h == goal || !active_open)) e.pending.push_back(st.primitive);
    }
  };
  if (active_open) {
    add(goal, others.empty() ? 1.0 : 1.0 - switch_prob);
    for (auto h : others) add(h, switch_prob / static_cast<double>(others.size()));
  } else {
    for (auto h : others) add(h, 1.0 / static_cast<double>(others.size()));
  }
  std::erase_if(e.next, [](const ForestStep& s) { return s.weight <= 0.0; });
  std::sort(e.pending.begin(), e.pending.end());
  e.pending.erase(std::unique(e.pending.begin(), e.pending.end()), e.pending.end());
  return e;
}

inline std::vector<TaskTree> root_forest(const TaskNet& net) {
  std::vector<TaskTree> f;
  for (std::size_t g = 0; g < net.num_goals(); ++g) f.push_back(net.root_tree(g));
  return f;
}

struct Belief {
  std::vector<double> goal_dist;        // by goal index
  std::vector<double> action_dist;      // by primitive index
  std::vector<double> offplan_dist;     // part of action_dist explained as an off-plan step
  std::vector<double> world_marginals;  // p(var = true)
  std::vector<Explanation> explaset;
  std::optional<std::size_t> q;
  int step = 0;
};

namespace detail {

inline double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

inline void normalize(std::vector<double>& v) {
  const double z = sum(v);
  if (z > 0.0)
    for (auto& x : v) x /= z;
}

/// Primitive indices ordered by id, for lexicographic tie-breaking.
inline std::vector<std::size_t> lexicographic_order(const TaskNet& net) {
  std::vector<std::size_t> order(net.num_primitives());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](auto a, auto b) { return net.primitive_id(a) < net.primitive_id(b); });
  return order;
}

}  // namespace detail

/// argmax with ties broken by the smallest primitive id.
inline std::size_t argmax_primitive(const std::vector<double>& scores, const TaskNet& net) {
  std::size_t best = 0;
  bool found = false;
  for (auto p : detail::lexicographic_order(net))
    if (!found || scores[p] > scores[best]) {
      best = p;
      found = true;
    }
  return best;
}

/// argmax with ties broken by the smallest goal id.
inline std::size_t argmax_goal(const std::vector<double>& dist, const TaskNet& net) {
  std::size_t best = 0;
  for (std::size_t g = 1; g < dist.size(); ++g)
    if (dist[g] > dist[best] || (dist[g] == dist[best] && net.goal_id(g) < net.goal_id(best))) best = g;
  return best;
}

inline std::vector<double> goal_distribution(const std::vector<Explanation>& explaset, std::size_t num_goals) {
  std::vector<double> dist(num_goals, 0.0);
  for (const auto& e : explaset) dist[e.goal] += e.prob;
  return dist;
}

/// Uniform goal prior, one root explanation per goal, world from the
/// initial assignment, action distribution uniform over the initial pending
/// primitives.
inline Belief init_belief(const TaskNet& net, const BeliefParams& params = {}) {
  Belief b;
  const double share = 1.0 / static_cast<double>(net.num_goals());
  const auto forest = root_forest(net);
  for (std::size_t g = 0; g < net.num_goals(); ++g)
    b.explaset.push_back(make_explanation(net, g, forest, share, params.goal_switch_prob));
  b.goal_dist = goal_distribution(b.explaset, net.num_goals());
  b.action_dist.assign(net.num_primitives(), 0.0);
  for (const auto& e : b.explaset)
    for (auto p : e.pending) b.action_dist[p] = 1.0;
  detail::normalize(b.action_dist);
  b.offplan_dist.assign(net.num_primitives(), 0.0);
  for (std::size_t i = 0; i < net.num_vars(); ++i) b.world_marginals.push_back(net.vars()[i].initial ? 1.0 : 0.0);
  return b;
}

/// Prior over the human's next primitive implied by the explanation set,
/// split into its on-plan and off-plan parts.
struct ActionPrior {
  std::vector<double> onplan;
  std::vector<double> offplan;
  double at(std::size_t p) const { return onplan[p] + offplan[p]; }
};

inline ActionPrior action_prior(const Belief& b, const TaskNet& net, const BeliefParams& params) {
  const std::size_t k = net.num_primitives();
  ActionPrior prior{std::vector<double>(k, 0.0), std::vector<double>(k, 0.0)};
  const double c = params.correct_step_prob;
  const double inv_k = 1.0 / static_cast<double>(k);
  double off_mass = 0.0;
  for (const auto& e : b.explaset) {
    if (e.complete()) {
      off_mass += e.prob;
      continue;
    }
    off_mass += e.prob * (1.0 - c);
    for (const auto& s : e.next) prior.onplan[s.primitive] += e.prob * c * s.weight;
  }
  for (auto& x : prior.offplan) x = off_mass * inv_k;
  return prior;
}

namespace detail {

struct VarEvidence {
  double like[2];  // sensor likelihood of w' = false / true
};

inline VarEvidence sensor_evidence(const WorldObservation& ow, std::size_t i, double sr) {
  if (!ow) return {{1.0, 1.0}};
  const bool r = (*ow)[i];
  return {{r ? 1.0 - sr : sr, r ? sr : 1.0 - sr}};
}

/// Unnormalised p(w'_i, o_i | a) for w'_i in {false,true}, marginalising the
/// previous value under its prior marginal. `pre`/`eff` are the action's
/// literals on variable i, if any.
inline std::array<double, 2> local_joint(double marginal, const Literal* pre, const Literal* eff, const VarEvidence& ev,
                                         const BeliefParams& params) {
  std::array<double, 2> out{0.0, 0.0};
  for (int w = 0; w < 2; ++w) {
    const double pw = w ? marginal : 1.0 - marginal;
    if (pw == 0.0) continue;
    const bool pre_ok = !pre || static_cast<int>(pre->value) == w;
    const int expected = eff ? static_cast<int>(eff->value) : w;
    for (int w2 = 0; w2 < 2; ++w2) {
      const double k = (pre_ok && w2 == expected) ? params.transition_hit : params.transition_miss;
      out[w2] += pw * k * ev.like[w2];
    }
  }
  return out;
}

inline const Literal* literal_on(const std::vector<Literal>& ls, std::size_t var) {
  for (const auto& l : ls)
    if (l.var == var) return &l;
  return nullptr;
}

}  // namespace detail

/// Posterior over the primitive just executed given the world observation:
/// prior(a) * prod_i sum_{w,w'} p(w) K(w'|w,a) p(o_i|w'), normalised. Only
/// variables the action touches differ from the frame factor, so the product
/// runs over those as a ratio against the frame.
inline std::vector<double> action_posterior(const Belief& b, const WorldObservation& ow, const TaskNet& net,
                                            const BeliefParams& params) {
  if (ow && ow->size() != net.num_vars()) throw ValidationError("world observation does not cover the domain's variables");
  const auto prior = action_prior(b, net, params);
  std::vector<double> post(net.num_primitives(), 0.0);
  for (std::size_t p = 0; p < net.num_primitives(); ++p) {
    double w = prior.at(p);
    if (w == 0.0) continue;
    const auto& prim = net.primitives()[p];
    for (auto i : net.touched_vars(p)) {
      const auto ev = detail::sensor_evidence(ow, i, params.sensor_reliability);
      const auto act = detail::local_joint(b.world_marginals[i], detail::literal_on(prim.pre, i),
                                           detail::literal_on(prim.eff, i), ev, params);
      const auto frame = detail::local_joint(b.world_marginals[i], nullptr, nullptr, ev, params);
      w *= (act[0] + act[1]) / (frame[0] + frame[1]);
    }
    post[p] = w;
  }
  if (detail::sum(post) <= 0.0)
    throw RecognitionError("no candidate primitive explains the observation (empty candidate set)");
  detail::normalize(post);
  return post;
}

inline std::vector<double> language_reweight(const std::vector<double>& act_post, std::optional<std::size_t> q,
                                             LanguageLabel ol) {
  if (q && *q >= act_post.size()) throw UnknownIdError("question target is not a primitive of the domain");
  if (ol == LanguageLabel::None) return act_post;
  std::vector<double> out(act_post.size());
  for (std::size_t p = 0; p < act_post.size(); ++p) out[p] = act_post[p] * answer_likelihood(ol, p, q);
  detail::normalize(out);
  return out;
}

/// Per-variable marginal after the step: a mixture over actions of the
/// local posterior p(w'_i | a, o_i).
inline std::vector<double> world_posterior(const Belief& b, const std::vector<double>& act_post,
                                           const WorldObservation& ow, const TaskNet& net, const BeliefParams& params) {
  std::vector<double> out(net.num_vars());
  std::vector<double> frame_post(net.num_vars());
  for (std::size_t i = 0; i < net.num_vars(); ++i) {
    const auto ev = detail::sensor_evidence(ow, i, params.sensor_reliability);
    const auto f = detail::local_joint(b.world_marginals[i], nullptr, nullptr, ev, params);
    frame_post[i] = f[1] / (f[0] + f[1]);
    out[i] = frame_post[i];
  }
  for (std::size_t p = 0; p < net.num_primitives(); ++p) {
    if (act_post[p] == 0.0) continue;
    const auto& prim = net.primitives()[p];
    for (auto i : net.touched_vars(p)) {
      const auto ev = detail::sensor_evidence(ow, i, params.sensor_reliability);
      const auto a = detail::local_joint(b.world_marginals[i], detail::literal_on(prim.pre, i),
                                         detail::literal_on(prim.eff, i), ev, params);
      out[i] += act_post[p] * (a[1] / (a[0] + a[1]) - frame_post[i]);
    }
  }
  for (auto& m : out) m = std::clamp(m, 0.0, 1.0);
  return out;
}

/// Advances every explanation by recognition (a pending primitive completes,
/// decomposing tasks on the way) or keeps it unchanged for an off-plan step.
/// New probability = parent prob x step prob under the explanation x
/// evidence likelihood of the primitive, where the likelihood is recovered as
/// act_post / prior. Identical successors are merged.
inline std::vector<Explanation> explaset_update(const Belief& b, const std::vector<double>& act_post, const TaskNet& net,
                                                const BeliefParams& params) {
  const auto prior = action_prior(b, net, params);
  const std::size_t k = net.num_primitives();
  std::vector<double> lambda(k, 0.0);
  double lambda_sum = 0.0;
  for (std::size_t p = 0; p < k; ++p) {
    const double pr = prior.at(p);
    lambda[p] = pr > 0.0 ? act_post[p] / pr : 0.0;
    lambda_sum += lambda[p];
  }
  const double c = params.correct_step_prob;
  const double inv_k = 1.0 / static_cast<double>(k);

  std::vector<Explanation> out;
  std::unordered_map<std::string, std::size_t> index;
  auto add = [&](const Explanation& from, const ForestStep* step, double w) {
    if (w <= 0.0) return;
    if (!step) {
      auto [it, fresh] = index.emplace(from.key(), out.size());
      if (fresh) {
        out.push_back(from);
        out.back().prob = w;
      } else {
        out[it->second].prob += w;
      }
      return;
    }
    auto forest = from.forest;
    forest[step->goal] = step->tree;
    std::string key = std::to_string(step->goal);
    for (const auto& t : forest) key += '/' + t.key();
    auto [it, fresh] = index.emplace(std::move(key), out.size());
    if (fresh)
      out.push_back(make_explanation(net, step->goal, std::move(forest), w, params.goal_switch_prob));
    else
      out[it->second].prob += w;
  };
  for (const auto& e : b.explaset) {
    if (e.prob <= 0.0) continue;
    const double stay = e.complete() ? inv_k : (1.0 - c) * inv_k;
    add(e, nullptr, e.prob * stay * lambda_sum);
    if (c > 0.0)
      for (const auto& st : e.next) add(e, &st, e.prob * c * st.weight * lambda[st.primitive]);
  }
  double z = 0.0;
  for (const auto& e : out) z += e.prob;
  if (z <= 0.0) throw RecognitionError("no explanation survives the update");
  for (auto& e : out) e.prob /= z;
  if (params.beam_pruning) {
    std::erase_if(out, [&](const Explanation& e) { return e.prob < params.prune_epsilon; });
    double z2 = 0.0;
    for (const auto& e : out) z2 += e.prob;
    for (auto& e : out) e.prob /= z2;
  }
  return out;
}

/// One full update: world evidence, then the answer (if any) reweights the
/// action posterior before it feeds the world and explanation updates.
/// `a_prev` is the agent action whose answer `ol` responds to; the question
/// is consumed once an answer is incorporated.
inline Belief belief_step(const Belief& b, const WorldObservation& ow, LanguageLabel ol, const AgentAction& a_prev,
                          const TaskNet& net, const BeliefParams& params) {
  const auto q = q_next(b.q, a_prev);
  auto post = action_posterior(b, ow, net, params);
  post = language_reweight(post, q, ol);

  Belief next;
  next.world_marginals = world_posterior(b, post, ow, net, params);
  next.explaset = explaset_update(b, post, net, params);
  next.goal_dist = goal_distribution(next.explaset, net.num_goals());

  const auto prior = action_prior(b, net, params);
  next.offplan_dist.assign(net.num_primitives(), 0.0);
  for (std::size_t p = 0; p < net.num_primitives(); ++p) {
    const double pr = prior.at(p);
    if (pr > 0.0) next.offplan_dist[p] = post[p] * prior.offplan[p] / pr;
  }
  next.action_dist = std::move(post);
  next.q = ol == LanguageLabel::None ? q : std::nullopt;
  next.step = b.step + 1;
  return next;
}

/// Most probable primitive just executed (the question target).
inline std::size_t map_action(const Belief& b, const TaskNet& net) { return argmax_primitive(b.action_dist, net); }

/// Most supported next primitive: sum over explanations of prob times
/// membership of the primitive in the explanation's pending set.
inline std::size_t predict_next_action(const Belief& b, const TaskNet& net) {
  std::vector<double> score(net.num_primitives(), 0.0);
  for (const auto& e : b.explaset)
    for (auto p : e.pending) score[p] += e.prob;
  return argmax_primitive(score, net);
}

/// Flat snapshot used by logs and the session service.
inline Json snapshot_json(const Belief& b, const TaskNet& net) {
  Json j;
  j["step"] = b.step;
  j["goal_dist"] = Json::object();
  for (std::size_t g = 0; g < net.num_goals(); ++g) j["goal_dist"][net.goal_id(g)] = b.goal_dist[g];
  j["action_dist"] = Json::object();
  for (std::size_t p = 0; p < net.num_primitives(); ++p) j["action_dist"][net.primitive_id(p)] = b.action_dist[p];
  j["world_marginals"] = Json::object();
  for (std::size_t i = 0; i < net.num_vars(); ++i) j["world_marginals"][net.var_id(i)] = b.world_marginals[i];
  j["q"] = b.q ? Json(net.primitive_id(*b.q)) : Json(nullptr);
  j["n_explanations"] = b.explaset.size();
  return j;
}

}  // namespace d4gr
