#pragma once

// Brute-force reference filter for micro-domains.
//
// Recognition: enumerates every complete plan hypothesis (goal, method
// choice at every compound task, full step order) with its prior, and runs a
// forward filter over (hypothesis, steps done). Step choice inside an
// unordered method is uniform over its unfinished children.
//
// World: the prior at each step is the product of the current marginals; the
// step enumerates the full joint over (w, alpha, w').
//
// Only structure is read from TaskNet; none of its inference code is used.

#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "d4gr/htn.hpp"
#include "d4gr/momdp.hpp"

namespace oracle {

using d4gr::TaskNet;

struct Hypothesis {
  std::size_t goal;
  std::vector<std::size_t> plan;
  double prior;
};

namespace detail {

// Fully decomposed plan tree.
struct PNode {
  bool leaf = false;
  std::size_t prim = 0;
  bool ordered = true;
  std::vector<PNode> kids;
};

inline std::vector<std::pair<PNode, double>> decompositions(const TaskNet& net, d4gr::TaskRef ref) {
  if (ref.primitive) {
    PNode n;
    n.leaf = true;
    n.prim = ref.index;
    return {{n, 1.0}};
  }
  std::vector<std::pair<PNode, double>> out;
  for (auto mi : net.tasks()[ref.index].methods) {
    const auto& m = net.methods()[mi];
    std::vector<std::pair<PNode, double>> partial{{PNode{false, 0, m.ordering == d4gr::Ordering::Ordered, {}}, m.prob}};
    for (const auto& sub : m.resolved) {
      std::vector<std::pair<PNode, double>> next;
      for (const auto& [node, w] : partial)
        for (const auto& [child, cw] : decompositions(net, sub)) {
          PNode n = node;
          n.kids.push_back(child);
          next.emplace_back(std::move(n), w * cw);
        }
      partial = std::move(next);
    }
    for (auto& p : partial) out.push_back(std::move(p));
  }
  return out;
}

inline std::size_t leaf_count(const PNode& n) {
  if (n.leaf) return 1;
  std::size_t c = 0;
  for (const auto& k : n.kids) c += leaf_count(k);
  return c;
}

// Progress of a plan tree: number of leaves done under each node, in
// preorder. The next-step distribution follows the tree.
struct Walker {
  const PNode* root;
  std::vector<std::size_t> done;  // per node, preorder
  std::vector<std::size_t> size;

  void index(const PNode& n) {
    done.push_back(0);
    size.push_back(leaf_count(n));
    for (const auto& k : n.kids) index(k);
  }

  // Enumerates (primitive, prob, path of preorder ids) for the next step.
  void next(const PNode& n, std::size_t id, double w,
            std::vector<std::tuple<std::size_t, double, std::vector<std::size_t>>>& out,
            std::vector<std::size_t>& path) const {
    path.push_back(id);
    if (n.leaf) {
      out.emplace_back(n.prim, w, path);
    } else {
      std::vector<std::pair<const PNode*, std::size_t>> open;
      std::size_t cid = id + 1;
      for (const auto& k : n.kids) {
        if (done[cid] < size[cid]) open.emplace_back(&k, cid);
        cid += subtree_nodes(k);
      }
      if (n.ordered) {
        if (!open.empty()) next(*open.front().first, open.front().second, w, out, path);
      } else {
        for (const auto& [k, kid] : open) next(*k, kid, w / static_cast<double>(open.size()), out, path);
      }
    }
    path.pop_back();
  }

  static std::size_t subtree_nodes(const PNode& n) {
    std::size_t c = 1;
    for (const auto& k : n.kids) c += subtree_nodes(k);
    return c;
  }
};

inline void linearize(Walker& w, std::size_t goal, double p, std::vector<std::size_t>& plan, std::vector<Hypothesis>& out) {
  if (w.done[0] == w.size[0]) {
    out.push_back({goal, plan, p});
    return;
  }
  std::vector<std::tuple<std::size_t, double, std::vector<std::size_t>>> steps;
  std::vector<std::size_t> path;
  w.next(*w.root, 0, 1.0, steps, path);
  for (const auto& [prim, sw, ids] : steps) {
    for (auto id : ids) ++w.done[id];
    plan.push_back(prim);
    linearize(w, goal, p * sw, plan, out);
    plan.pop_back();
    for (auto id : ids) --w.done[id];
  }
}

}  // namespace detail

/// Every complete plan of every goal, priors summing to 1.
inline std::vector<Hypothesis> enumerate_hypotheses(const TaskNet& net) {
  std::vector<Hypothesis> out;
  const double goal_prior = 1.0 / static_cast<double>(net.num_goals());
  for (std::size_t g = 0; g < net.num_goals(); ++g) {
    d4gr::TaskRef root{false, static_cast<std::uint32_t>(net.goals()[g])};
    for (const auto& [tree, w] : detail::decompositions(net, root)) {
      if (w == 0.0) continue;
      detail::Walker walker{&tree, {}, {}};
      walker.index(tree);
      std::vector<std::size_t> plan;
      detail::linearize(walker, g, goal_prior * w, plan, out);
    }
  }
  // Merge identical (goal, plan) pairs.
  std::map<std::pair<std::size_t, std::vector<std::size_t>>, double> merged;
  for (const auto& h : out) merged[{h.goal, h.plan}] += h.prior;
  out.clear();
  for (const auto& [k, p] : merged) out.push_back({k.first, k.second, p});
  return out;
}

struct OracleParams {
  double c = 0.99;
  double sr = 0.9;
  double hit = 0.999;
  double miss = 0.001;
};

struct OracleOutput {
  std::vector<double> goal_dist;
  std::vector<double> action_dist;
  std::vector<double> offplan_dist;
  std::vector<double> world;
};

class JointFilter {
 public:
  JointFilter(const TaskNet& net, OracleParams params) : net_(net), params_(params), hyps_(enumerate_hypotheses(net)) {
    for (const auto& h : hyps_) {
      std::vector<double> pk(h.plan.size() + 1, 0.0);
      pk[0] = h.prior;
      belief_.push_back(pk);
    }
    for (const auto& v : net.vars()) marginals_.push_back(v.initial ? 1.0 : 0.0);
  }

  std::size_t num_hypotheses() const { return hyps_.size(); }

  /// `ol` is evidence about the step just taken, relative to question `q`.
  OracleOutput step(const d4gr::WorldObservation& ow, d4gr::LanguageLabel ol, std::optional<std::size_t> q) {
    const std::size_t k_prims = net_.num_primitives(), n = net_.num_vars();
    const double inv_k = 1.0 / static_cast<double>(k_prims);
    const double c = params_.c;

    // Per-action evidence: sum over (w, w') of the joint, plus per-var mass
    // with w'_i = true.
    std::vector<double> like(k_prims, 0.0);
    std::vector<std::vector<double>> like_true(k_prims, std::vector<double>(n, 0.0));
    for (std::size_t a = 0; a < k_prims; ++a) {
      const double lang = d4gr::answer_likelihood(ol, a, q);
      for (std::size_t w = 0; w < (1u << n); ++w) {
        double pw = 1.0;
        for (std::size_t i = 0; i < n; ++i) pw *= ((w >> i) & 1) ? marginals_[i] : 1.0 - marginals_[i];
        if (pw == 0.0) continue;
        for (std::size_t w2 = 0; w2 < (1u << n); ++w2) {
          double p = pw * lang;
          for (std::size_t i = 0; i < n; ++i) {
            const int wi = (w >> i) & 1, w2i = (w2 >> i) & 1;
            p *= kernel(a, i, wi, w2i);
            if (ow) p *= (w2i == (*ow)[i]) ? params_.sr : 1.0 - params_.sr;
          }
          like[a] += p;
          for (std::size_t i = 0; i < n; ++i)
            if ((w2 >> i) & 1) like_true[a][i] += p;
        }
      }
    }

    OracleOutput out;
    out.action_dist.assign(k_prims, 0.0);
    out.offplan_dist.assign(k_prims, 0.0);
    std::vector<std::vector<double>> next(hyps_.size());
    double z = 0.0;
    for (std::size_t h = 0; h < hyps_.size(); ++h) {
      const auto& plan = hyps_[h].plan;
      next[h].assign(plan.size() + 1, 0.0);
      for (std::size_t k = 0; k <= plan.size(); ++k) {
        const double p = belief_[h][k];
        if (p == 0.0) continue;
        const bool done = k == plan.size();
        const double off = done ? inv_k : (1.0 - c) * inv_k;
        for (std::size_t a = 0; a < k_prims; ++a) {
          const double m = p * off * like[a];
          next[h][k] += m;
          out.action_dist[a] += m;
          out.offplan_dist[a] += m;
          z += m;
        }
        if (!done) {
          const double m = p * c * like[plan[k]];
          next[h][k + 1] += m;
          out.action_dist[plan[k]] += m;
          z += m;
        }
      }
    }
    for (auto& row : next)
      for (auto& x : row) x /= z;
    for (auto& x : out.action_dist) x /= z;
    for (auto& x : out.offplan_dist) x /= z;
    belief_ = std::move(next);

    out.world.assign(n, 0.0);
    for (std::size_t a = 0; a < k_prims; ++a)
      if (like[a] > 0.0)
        for (std::size_t i = 0; i < n; ++i) out.world[i] += out.action_dist[a] * like_true[a][i] / like[a];
    marginals_ = out.world;

    out.goal_dist.assign(net_.num_goals(), 0.0);
    for (std::size_t h = 0; h < hyps_.size(); ++h)
      for (double x : belief_[h]) out.goal_dist[hyps_[h].goal] += x;
    return out;
  }

 private:
  double kernel(std::size_t a, std::size_t i, int w, int w2) const {
    const auto& prim = net_.primitives()[a];
    const d4gr::Literal* pre = nullptr;
    const d4gr::Literal* eff = nullptr;
    for (const auto& l : prim.pre)
      if (l.var == i) pre = &l;
    for (const auto& l : prim.eff)
      if (l.var == i) eff = &l;
    if (!pre && !eff) return w2 == w ? params_.hit : params_.miss;
    const bool pre_ok = !pre || static_cast<int>(pre->value) == w;
    const int expected = eff ? static_cast<int>(eff->value) : w;
    return (pre_ok && w2 == expected) ? params_.hit : params_.miss;
  }

  const TaskNet& net_;
  OracleParams params_;
  std::vector<Hypothesis> hyps_;
  std::vector<std::vector<double>> belief_;  // [hypothesis][steps done]
  std::vector<double> marginals_;
};

}  // namespace oracle
