#pragma once

// Two-state, two-action, two-observation MOMDPs with an exact finite-horizon
// expectimax over beliefs, plus an adapter so Pouct can search them.

#include <array>
#include <string>
#include <vector>

#include "d4gr/planner.hpp"

namespace oracle {

struct MicroMomdp {
  std::string name;
  double b0 = 0.5;                                   // P(state 1) at the root
  std::array<std::array<double, 2>, 2> reward{};     // [state][action]
  std::array<std::array<double, 2>, 2> stay{};       // P(s' = s | s, a), [state][action]
  std::array<std::array<double, 2>, 2> obs_true{};   // P(o = 1 | s', a), [state'][action]
};

/// Action 0 = Wait, action 1 = Ask. The reward is paid on the state before
/// the transition, as in the agent's model.
inline std::vector<MicroMomdp> hand_built_momdps() {
  std::vector<MicroMomdp> out;
  // Human certainly erred: asking pays +5.
  out.push_back({"certain_error", 1.0, {{{0.0, -5.0}, {0.0, 5.0}}}, {{{0.9, 0.9}, {0.2, 0.2}}}, {{{0.2, 0.2}, {0.8, 0.8}}}});
  // Human certainly correct: asking costs 5.
  out.push_back({"certain_correct", 0.0, {{{0.0, -5.0}, {0.0, 5.0}}}, {{{0.9, 0.9}, {0.2, 0.2}}}, {{{0.2, 0.2}, {0.8, 0.8}}}});
  // Likely erred.
  out.push_back({"likely_error", 0.8, {{{0.0, -5.0}, {0.0, 5.0}}}, {{{0.8, 0.8}, {0.5, 0.5}}}, {{{0.1, 0.1}, {0.9, 0.9}}}});
  // Likely correct.
  out.push_back({"likely_correct", 0.25, {{{0.0, -5.0}, {0.0, 5.0}}}, {{{0.8, 0.8}, {0.5, 0.5}}}, {{{0.1, 0.1}, {0.9, 0.9}}}});
  // Waiting has a small cost and asking resets the state: information and
  // future value matter.
  out.push_back({"costly_wait", 0.4, {{{-1.0, -3.0}, {-2.0, 4.0}}}, {{{0.9, 0.1}, {0.9, 0.1}}}, {{{0.2, 0.5}, {0.8, 0.5}}}});
  // Same dynamics, low prior: the best action alternates with the horizon.
  out.push_back({"depth_flip", 0.05, {{{-1.0, -3.0}, {-2.0, 4.0}}}, {{{0.9, 0.1}, {0.9, 0.1}}}, {{{0.2, 0.5}, {0.8, 0.5}}}});
  return out;
}

struct ExpectimaxResult {
  std::array<double, 2> q{};
  std::size_t action = 0;
};

inline double expectimax_value(const MicroMomdp& m, double b, int depth, double gamma);

inline ExpectimaxResult expectimax(const MicroMomdp& m, double b, int depth, double gamma) {
  ExpectimaxResult r;
  for (std::size_t a = 0; a < 2; ++a) {
    double q = (1.0 - b) * m.reward[0][a] + b * m.reward[1][a];
    if (depth > 1) {
      // Predicted next-state belief, then observation split.
      const double p1 = (1.0 - b) * (1.0 - m.stay[0][a]) + b * m.stay[1][a];
      for (int o = 0; o < 2; ++o) {
        const double l1 = o ? m.obs_true[1][a] : 1.0 - m.obs_true[1][a];
        const double l0 = o ? m.obs_true[0][a] : 1.0 - m.obs_true[0][a];
        const double po = p1 * l1 + (1.0 - p1) * l0;
        if (po <= 0.0) continue;
        q += gamma * po * expectimax_value(m, p1 * l1 / po, depth - 1, gamma);
      }
    }
    r.q[a] = q;
  }
  r.action = r.q[1] > r.q[0] ? 1 : 0;
  return r;
}

inline double expectimax_value(const MicroMomdp& m, double b, int depth, double gamma) {
  if (depth <= 0) return 0.0;
  const auto r = expectimax(m, b, depth, gamma);
  return std::max(r.q[0], r.q[1]);
}

/// Generative view of a MicroMomdp for Pouct.
class MicroModel {
 public:
  using State = int;

  explicit MicroModel(const MicroMomdp& m) : m_(m) {}

  std::size_t num_actions() const { return 2; }

  int sample_root(d4gr::Rng& rng) const { return rng.uniform() < m_.b0 ? 1 : 0; }

  d4gr::Transition<int> step(int s, std::size_t a, d4gr::Rng& rng) const {
    d4gr::Transition<int> t;
    t.reward = m_.reward[s][a];
    t.next = rng.uniform() < m_.stay[s][a] ? s : 1 - s;
    t.obs = rng.uniform() < m_.obs_true[t.next][a] ? 1 : 0;
    return t;
  }

  /// Wait-only rollout, simulated.
  double rollout(int s, int depth, double gamma, d4gr::Rng& rng) const {
    double ret = 0.0, disc = 1.0;
    for (int k = 0; k < depth; ++k) {
      auto t = step(s, 0, rng);
      ret += disc * t.reward;
      disc *= gamma;
      s = t.next;
    }
    return ret;
  }

 private:
  MicroMomdp m_;
};

}  // namespace oracle
