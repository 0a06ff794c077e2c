#pragma once

// Stateful sessions in which a live human plays the acting user.

#include <chrono>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "d4gr/domains.hpp"
#include "d4gr/planner.hpp"
#include "d4gr/simulator.hpp"

namespace d4gr {

inline constexpr int kProtocolVersion = 1;

inline std::string question_text(const TaskNet& net, std::size_t alpha) {
  return "I believe that you just did action (" + net.primitive_id(alpha) + "), is this correct?";
}

inline std::string instruction_text(const TaskNet& net, std::size_t alpha) {
  return "I think the correct next step is (" + net.primitive_id(alpha) + ").";
}

inline Json action_json(const AgentAction& a, const TaskNet& net) {
  switch (a.kind) {
    case AgentAction::Kind::Ask: return {{"kind", "Ask"}, {"target", net.primitive_id(a.target)}};
    case AgentAction::Kind::Inform: return {{"kind", "Inform"}, {"target", net.primitive_id(a.target)}};
    default: return {{"kind", "Wait"}, {"target", nullptr}};
  }
}

/// Session settings; every field optional in the request body.
struct SessionConfig {
  EpisodeConfig episode;
  std::uint64_t seed = 0;

  static SessionConfig from_json(const Json& j) {
    SessionConfig c;
    if (j.is_null()) return c;
    if (!j.is_object()) throw ValidationError("cfg must be an object");
    try {
      c.episode.sensor_reliability = j.value("sr", c.episode.sensor_reliability);
      c.episode.correct_step_prob = j.value("C", c.episode.correct_step_prob);
      c.episode.goal_switch_prob = j.value("goal_switch_prob", c.episode.goal_switch_prob);
      c.seed = j.value("seed", c.seed);
      if (j.contains("planner")) {
        const auto& p = j.at("planner");
        auto& pc = c.episode.planner;
        pc.depth = p.value("depth", pc.depth);
        pc.obs_samples = p.value("obs_samples", pc.obs_samples);
        pc.simulations = p.value("simulations", pc.simulations);
        pc.ucb_c = p.value("ucb_c", pc.ucb_c);
        pc.gamma = p.value("gamma", pc.gamma);
      }
    } catch (const Json::exception& e) {
      throw ValidationError(std::string("bad cfg: ") + e.what());
    }
    const double sr = c.episode.sensor_reliability, cc = c.episode.correct_step_prob;
    if (!(sr >= 0.5 && sr <= 1.0)) throw ValidationError("sr must lie in [0.5, 1.0]");
    if (!(cc > 0.0 && cc <= 1.0)) throw ValidationError("C must lie in (0, 1]");
    c.episode.planner.validate();
    return c;
  }

  Json to_json() const {
    const auto& p = episode.planner;
    return {{"sr", episode.sensor_reliability},
            {"C", episode.correct_step_prob},
            {"goal_switch_prob", episode.goal_switch_prob},
            {"seed", seed},
            {"planner",
             {{"depth", p.depth}, {"obs_samples", p.obs_samples}, {"simulations", p.simulations}, {"ucb_c", p.ucb_c},
              {"gamma", p.gamma}}}};
  }
};

class Session {
 public:
  Session(std::string id, std::string domain, std::shared_ptr<const TaskNet> net, SessionConfig cfg)
      : id_(std::move(id)),
        domain_(std::move(domain)),
        net_(std::move(net)),
        cfg_(cfg),
        belief_(init_belief(*net_, cfg.episode.belief_params())),
        prev_(belief_),
        world_(net_->initial_world()),
        rng_(stream_key({cfg.seed, 0x706c616eULL})) {}

  const std::string& id() const { return id_; }

  /// The human executes a primitive; the agent observes and decides.
  Json submit_step(const std::string& primitive) {
    auto lock = acquire();
    if (closed_) throw ProtocolError("session '" + id_ + "' is closed");
    const std::size_t p = net_->primitive_index(primitive);
    const std::size_t t = static_cast<std::size_t>(belief_.step);
    append({{"kind", "human_step"}, {"action", primitive}});
    current_ = p;
    world_ = apply_primitive(*net_, world_, p);
    last_ow_ = sense_keyed(world_, cfg_.episode.sensor_reliability, stream_key({cfg_.seed, t, detail::kSense}));
    prev_ = belief_;
    belief_ = belief_step(prev_, last_ow_, LanguageLabel::None, AgentAction::wait(), *net_, cfg_.episode.belief_params());
    const auto a = plan_action(belief_, *net_, cfg_.episode.planner, cfg_.episode.sim_params(), rng_);
    pending_ = a.is_ask() ? std::optional<std::size_t>(a.target) : std::nullopt;
    return agent_turn(a);
  }

  /// The human answers the pending question.
  Json submit_utterance(const std::string& text) {
    auto lock = acquire();
    if (closed_) throw ProtocolError("session '" + id_ + "' is closed");
    if (!pending_) throw ProtocolError("no question is pending in session '" + id_ + "'");
    const auto label = classify_utterance(text);
    append({{"kind", "utterance"}, {"text", text}, {"label", to_string(label)}});
    if (label == LanguageLabel::None) {
      const auto a = plan_action(belief_, *net_, cfg_.episode.planner, cfg_.episode.sim_params(), rng_);
      pending_ = a.is_ask() ? std::optional<std::size_t>(a.target) : std::nullopt;
      return agent_turn(a);
    }
    const auto q = *pending_;
    belief_ = belief_step(prev_, last_ow_, label, AgentAction::ask(q), *net_, cfg_.episode.belief_params());
    pending_.reset();
    if (label == LanguageLabel::Negative) return agent_turn(AgentAction::inform(predict_next_action(belief_, *net_)));
    return agent_turn(AgentAction::wait());
  }

  void close() {
    auto lock = acquire();
    closed_ = true;
    append({{"kind", "closed"}});
  }

  Json snapshot(bool reveal_truth = true) const {
    std::lock_guard lock(mu_);
    Json j{{"v", kProtocolVersion},
           {"id", id_},
           {"domain", domain_},
           {"cfg", cfg_.to_json()},
           {"closed", closed_},
           {"belief", snapshot_json(belief_, *net_)},
           {"pending_question", pending_ ? Json(net_->primitive_id(*pending_)) : Json(nullptr)},
           {"transcript", transcript_}};
    if (reveal_truth) {
      Json world = Json::object();
      for (std::size_t i = 0; i < net_->num_vars(); ++i) world[net_->var_id(i)] = static_cast<bool>(world_[i]);
      j["truth"] = {{"world", world}, {"current", current_ ? Json(net_->primitive_id(*current_)) : Json(nullptr)}};
    }
    return j;
  }

  /// Agent turns with index > `after`, waiting up to `timeout` for one.
  std::vector<Json> events_after(std::size_t after, std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return agent_turns_.size() > after || closed_; });
    return {agent_turns_.begin() + static_cast<std::ptrdiff_t>(std::min(after, agent_turns_.size())), agent_turns_.end()};
  }

  bool closed() const {
    std::lock_guard lock(mu_);
    return closed_;
  }

 private:
  /// One turn at a time: a concurrent submit is rejected, not queued.
  std::unique_lock<std::mutex> acquire() {
    std::unique_lock lock(mu_, std::try_to_lock);
    if (!lock.owns_lock()) throw ProtocolError("a turn is already in flight for session '" + id_ + "'");
    return lock;
  }

  void append(Json entry) {
    entry["turn"] = transcript_.size();
    transcript_.push_back(std::move(entry));
  }

  Json agent_turn(const AgentAction& a) {
    Json text = nullptr;
    if (a.is_ask()) text = question_text(*net_, a.target);
    if (a.is_inform()) text = instruction_text(*net_, a.target);
    Json turn{{"v", kProtocolVersion},
              {"session", id_},
              {"event", agent_turns_.size()},
              {"belief", snapshot_json(belief_, *net_)},
              {"agent_action", action_json(a, *net_)},
              {"text", text}};
    append({{"kind", "agent"}, {"agent_action", turn["agent_action"]}, {"text", text}});
    agent_turns_.push_back(turn);
    cv_.notify_all();
    return turn;
  }

  std::string id_;
  std::string domain_;
  std::shared_ptr<const TaskNet> net_;
  SessionConfig cfg_;
  Belief belief_;
  Belief prev_;
  World world_;
  World last_ow_;
  std::optional<std::size_t> current_;
  std::optional<std::size_t> pending_;
  Rng rng_;
  bool closed_ = false;
  Json transcript_ = Json::array();
  std::vector<Json> agent_turns_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
};

class SessionManager {
 public:
  std::string create(const std::string& domain, const Json& cfg = nullptr) {
    auto config = SessionConfig::from_json(cfg);
    auto net = domain_net(domain);
    std::unique_lock lock(mu_);
    std::string id = "s" + std::to_string(++counter_);
    sessions_.emplace(id, std::make_shared<Session>(id, domain, std::move(net), config));
    return id;
  }

  std::shared_ptr<Session> get(const std::string& id) const {
    std::shared_lock lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw UnknownIdError("unknown session '" + id + "'");
    return it->second;
  }

  /// Shipped domains with their goal, primitive and variable inventories.
  Json domains() {
    Json out = Json::array();
    for (const auto& [name, unused] : shipped_domains()) {
      auto net = domain_net(name);
      Json d{{"id", name}, {"goals", Json::array()}, {"primitives", Json::array()}, {"vars", Json::array()}};
      for (std::size_t g = 0; g < net->num_goals(); ++g) d["goals"].push_back(net->goal_id(g));
      for (std::size_t p = 0; p < net->num_primitives(); ++p) d["primitives"].push_back(net->primitive_id(p));
      for (std::size_t v = 0; v < net->num_vars(); ++v) d["vars"].push_back(net->var_id(v));
      out.push_back(std::move(d));
    }
    return {{"v", kProtocolVersion}, {"domains", out}};
  }

 private:
  std::shared_ptr<const TaskNet> domain_net(const std::string& name) {
    std::lock_guard lock(net_mu_);
    auto it = nets_.find(name);
    if (it != nets_.end()) return it->second;
    auto net = std::make_shared<const TaskNet>(load_domain(name));
    nets_.emplace(name, net);
    return net;
  }

  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::size_t counter_ = 0;
  std::mutex net_mu_;
  std::map<std::string, std::shared_ptr<const TaskNet>> nets_;
};

}  // namespace d4gr
