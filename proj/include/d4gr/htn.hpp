#pragma once

// Hierarchical task network ("TaskNet") model: variables, primitives, methods,
// goals, the partially decomposed task trees used for recognition, and the
// execution semantics (valid next steps, wrong steps, effect application).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "d4gr/error.hpp"

namespace d4gr {

using Json = nlohmann::json;

enum class VarKind { SmartSensor, Attribute };

inline std::string_view to_string(VarKind k) { return k == VarKind::SmartSensor ? "ss" : "att"; }

struct WorldVar {
  std::string id;
  VarKind kind = VarKind::Attribute;
  bool initial = false;
};

struct Literal {
  std::size_t var = 0;
  bool value = false;
};

struct Primitive {
  std::string id;
  std::vector<Literal> pre;
  std::vector<Literal> eff;
};

enum class Ordering { Ordered, Unordered };

/// A node of the task graph: either a primitive (index into primitives) or a
/// compound task (index into compound tasks).
struct TaskRef {
  bool primitive = false;
  std::uint32_t index = 0;
  friend bool operator==(TaskRef, TaskRef) = default;
};

struct Method {
  std::string id;
  std::string task;
  std::vector<std::string> subtasks;
  Ordering ordering = Ordering::Ordered;
  double prob = 1.0;
  std::vector<TaskRef> resolved;  // subtasks resolved against the net
};

struct CompoundTask {
  std::string id;
  std::vector<std::size_t> methods;
};

/// One value per variable, indexed like TaskNet::vars().
using World = std::vector<std::uint8_t>;

class TaskNet;

/// Partially decomposed task tree rooted at one goal. Nodes are stored flat;
/// the children of an expanded node are contiguous.
struct TaskTree {
  struct Node {
    TaskRef task;
    std::int32_t method = -1;  // chosen decomposition, -1 while undecomposed
    std::int32_t parent = -1;
    std::uint32_t first_child = 0;
    std::uint32_t n_children = 0;
    bool complete = false;
  };
  std::vector<Node> nodes;

  bool complete() const { return !nodes.empty() && nodes.front().complete; }

  /// Canonical encoding, independent of the order in which branches were expanded.
  std::string key() const {
    std::string out;
    out.reserve(nodes.size() * 3);
    append_key(0, out);
    return out;
  }

 private:
  void append_key(std::uint32_t idx, std::string& out) const {
    const Node& n = nodes[idx];
    out.push_back(n.complete ? 'c' : 'o');
    if (n.task.primitive) return;
    if (n.method < 0) {
      out.push_back('-');
      return;
    }
    out += std::to_string(n.method);
    out.push_back('(');
    for (std::uint32_t c = 0; c < n.n_children; ++c) append_key(n.first_child + c, out);
    out.push_back(')');
  }
};

/// One way to advance a tree by a single primitive.
struct TreeStep {
  std::size_t primitive = 0;
  TaskTree tree;
  double weight = 1.0;  // slot share x product of expand-probs traversed
};

/// Progress snapshot of one goal used for world-based step validity.
struct ProgressState {
  World world;
  std::size_t progress = 0;
  std::vector<std::size_t> ready;
  std::vector<std::size_t> written;  // vars set by the steps taken so far
};

class TaskNet {
 public:
  const std::string& domain() const { return domain_; }
  const std::vector<WorldVar>& vars() const { return vars_; }
  const std::vector<Primitive>& primitives() const { return primitives_; }
  const std::vector<Method>& methods() const { return methods_; }
  const std::vector<CompoundTask>& tasks() const { return tasks_; }
  /// Goals as indices into tasks().
  const std::vector<std::size_t>& goals() const { return goals_; }

  std::size_t num_vars() const { return vars_.size(); }
  std::size_t num_primitives() const { return primitives_.size(); }
  std::size_t num_goals() const { return goals_.size(); }

  const std::string& goal_id(std::size_t g) const { return tasks_[goals_.at(g)].id; }
  const std::string& primitive_id(std::size_t p) const { return primitives_.at(p).id; }
  const std::string& var_id(std::size_t v) const { return vars_.at(v).id; }

  std::size_t goal_index(std::string_view id) const {
    for (std::size_t g = 0; g < goals_.size(); ++g)
      if (tasks_[goals_[g]].id == id) return g;
    throw UnknownIdError("unknown goal id '" + std::string(id) + "'");
  }
  std::size_t primitive_index(std::string_view id) const {
    auto it = prim_index_.find(std::string(id));
    if (it == prim_index_.end()) throw UnknownIdError("unknown primitive id '" + std::string(id) + "'");
    return it->second;
  }
  std::optional<std::size_t> find_primitive(std::string_view id) const {
    auto it = prim_index_.find(std::string(id));
    if (it == prim_index_.end()) return std::nullopt;
    return it->second;
  }
  std::size_t var_index(std::string_view id) const {
    auto it = var_index_.find(std::string(id));
    if (it == var_index_.end()) throw UnknownIdError("unknown variable id '" + std::string(id) + "'");
    return it->second;
  }

  World initial_world() const {
    World w(vars_.size());
    for (std::size_t i = 0; i < vars_.size(); ++i) w[i] = vars_[i].initial;
    return w;
  }

  bool preconditions_hold(std::size_t p, const World& w) const {
    for (const auto& l : primitives_[p].pre)
      if (static_cast<bool>(w[l.var]) != l.value) return false;
    return true;
  }

  /// Variables a primitive reads or writes, sorted and unique.
  const std::vector<std::size_t>& touched_vars(std::size_t p) const { return touched_[p]; }

  /// Goal-relevant variables: those written by some primitive under the goal.
  const std::vector<std::size_t>& goal_vars(std::size_t g) const { return goal_vars_[g]; }
  const std::vector<ProgressState>& progress_states(std::size_t g) const { return progress_[g]; }

  /// Longest root-to-primitive edge count over all goals.
  std::size_t depth() const {
    std::size_t d = 0;
    for (auto g : goals_) d = std::max(d, task_depth(g));
    return d;
  }

  TaskTree root_tree(std::size_t goal) const {
    TaskTree t;
    TaskTree::Node root;
    root.task = TaskRef{false, static_cast<std::uint32_t>(goals_.at(goal))};
    t.nodes.push_back(root);
    return t;
  }

  /// All ways to execute one more primitive in `tree`, decomposing
  /// undecomposed tasks on the way. Ordered tasks expose their first
  /// incomplete child; unordered tasks share weight uniformly across their
  /// incomplete children. Weights over the returned steps sum to 1 unless the
  /// tree is complete (empty result).
  std::vector<TreeStep> successors(const TaskTree& tree) const {
    std::vector<TreeStep> out;
    if (!tree.nodes.empty()) expand_steps(tree, 0, 1.0, out);
    return out;
  }

  friend TaskNet load_tasknet(const Json& doc);

 private:
  std::size_t task_depth(std::size_t t) const {
    std::size_t best = 0;
    for (auto m : tasks_[t].methods)
      for (auto r : methods_[m].resolved) best = std::max(best, 1 + (r.primitive ? 0 : task_depth(r.index)));
    return best;
  }

  static void complete_up(TaskTree& t, std::int32_t idx) {
    t.nodes[idx].complete = true;
    std::int32_t p = t.nodes[idx].parent;
    while (p >= 0) {
      auto& pn = t.nodes[p];
      for (std::uint32_t c = 0; c < pn.n_children; ++c)
        if (!t.nodes[pn.first_child + c].complete) return;
      pn.complete = true;
      p = pn.parent;
    }
  }

  void decompose(TaskTree& t, std::int32_t idx, std::size_t m) const {
    const auto& method = methods_[m];
    auto first = static_cast<std::uint32_t>(t.nodes.size());
    for (auto r : method.resolved) {
      TaskTree::Node child;
      child.task = r;
      child.parent = idx;
      t.nodes.push_back(child);
    }
    auto& n = t.nodes[idx];
    n.method = static_cast<std::int32_t>(m);
    n.first_child = first;
    n.n_children = static_cast<std::uint32_t>(method.resolved.size());
  }

  void expand_steps(const TaskTree& t, std::int32_t idx, double w, std::vector<TreeStep>& out) const {
    const TaskTree::Node& n = t.nodes[idx];
    if (n.complete) return;
    if (n.task.primitive) {
      TaskTree next = t;
      complete_up(next, idx);
      out.push_back(TreeStep{n.task.index, std::move(next), w});
      return;
    }
    if (n.method < 0) {
      for (auto m : tasks_[n.task.index].methods) {
        TaskTree next = t;
        decompose(next, idx, m);
        expand_steps(next, idx, w * methods_[m].prob, out);
      }
      return;
    }
    std::vector<std::int32_t> ready;
    const bool ordered = methods_[n.method].ordering == Ordering::Ordered;
    for (std::uint32_t c = 0; c < n.n_children; ++c) {
      auto ci = static_cast<std::int32_t>(n.first_child + c);
      if (t.nodes[ci].complete) continue;
      ready.push_back(ci);
      if (ordered) break;
    }
    const double share = w / static_cast<double>(ready.size());
    for (auto ci : ready) expand_steps(t, ci, share, out);
  }

  void build_indices();
  void build_progress_tables();

  std::string domain_;
  std::vector<WorldVar> vars_;
  std::vector<Primitive> primitives_;
  std::vector<Method> methods_;
  std::vector<CompoundTask> tasks_;
  std::vector<std::size_t> goals_;

  std::unordered_map<std::string, std::size_t> prim_index_;
  std::unordered_map<std::string, std::size_t> var_index_;
  std::vector<std::vector<std::size_t>> touched_;
  std::vector<std::vector<std::size_t>> goal_vars_;
  std::vector<std::vector<ProgressState>> progress_;
};

namespace detail {

inline bool as_bool(const Json& j, const char* what) {
  if (!j.is_boolean()) throw ParseError(std::string(what) + " must be a boolean");
  return j.get<bool>();
}

inline std::string as_string(const Json& j, const char* what) {
  if (!j.is_string()) throw ParseError(std::string(what) + " must be a string");
  return j.get<std::string>();
}

inline const Json& field(const Json& obj, const char* key) {
  if (!obj.is_object()) throw ParseError(std::string("expected an object holding '") + key + "'");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + key + "'");
  return *it;
}

inline const Json& array_field(const Json& obj, const char* key) {
  const Json& a = field(obj, key);
  if (!a.is_array()) throw ParseError(std::string("field '") + key + "' must be an array");
  return a;
}

}  // namespace detail

/// Upper bound on the per-goal progress table; larger nets are rejected.
inline constexpr std::size_t kMaxProgressStates = 200000;

inline void TaskNet::build_indices() {
  touched_.assign(primitives_.size(), {});
  for (std::size_t p = 0; p < primitives_.size(); ++p) {
    auto& t = touched_[p];
    for (const auto& l : primitives_[p].pre) t.push_back(l.var);
    for (const auto& l : primitives_[p].eff) t.push_back(l.var);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
  }
}

inline void TaskNet::build_progress_tables() {
  goal_vars_.assign(goals_.size(), {});
  progress_.assign(goals_.size(), {});
  for (std::size_t g = 0; g < goals_.size(); ++g) {
    struct Item {
      TaskTree tree;
      World world;
      std::size_t progress;
      std::vector<std::size_t> written;
    };
    std::vector<Item> frontier{{root_tree(g), initial_world(), 0, {}}};
    std::unordered_set<std::string> seen;
    std::vector<char> written(vars_.size(), 0);
    auto state_key = [](const TaskTree& t, const World& w) {
      std::string k = t.key();
      k.push_back('|');
      for (auto b : w) k.push_back(b ? '1' : '0');
      return k;
    };
    seen.insert(state_key(frontier.front().tree, frontier.front().world));
    while (!frontier.empty()) {
      Item item = std::move(frontier.back());
      frontier.pop_back();
      ProgressState ps{item.world, item.progress, {}, item.written};
      for (auto& step : successors(item.tree)) {
        ps.ready.push_back(step.primitive);
        World next = item.world;
        auto next_written = item.written;
        for (const auto& l : primitives_[step.primitive].eff) {
          next[l.var] = l.value;
          written[l.var] = 1;
          next_written.push_back(l.var);
        }
        std::sort(next_written.begin(), next_written.end());
        next_written.erase(std::unique(next_written.begin(), next_written.end()), next_written.end());
        auto k = state_key(step.tree, next);
        if (seen.insert(k).second)
          frontier.push_back(Item{std::move(step.tree), std::move(next), item.progress + 1, std::move(next_written)});
      }
      std::sort(ps.ready.begin(), ps.ready.end());
      ps.ready.erase(std::unique(ps.ready.begin(), ps.ready.end()), ps.ready.end());
      progress_[g].push_back(std::move(ps));
      if (progress_[g].size() > kMaxProgressStates)
        throw ValidationError("goal '" + goal_id(g) + "' has too many progress states");
    }
    for (std::size_t v = 0; v < vars_.size(); ++v)
      if (written[v]) goal_vars_[g].push_back(v);
  }
}

/// Parses and validates a TaskNet document (schema 1).
inline TaskNet load_tasknet(const Json& doc) {
  using namespace detail;
  TaskNet net;
  if (!doc.is_object()) throw ParseError("TaskNet document must be an object");
  const Json& schema = field(doc, "schema");
  if (!schema.is_number_integer() || schema.get<int>() != 1) throw ParseError("unsupported schema version");
  net.domain_ = as_string(field(doc, "domain"), "domain");

  for (const auto& v : array_field(doc, "vars")) {
    WorldVar var;
    var.id = as_string(field(v, "id"), "var id");
    auto kind = as_string(field(v, "kind"), "var kind");
    if (kind == "ss") var.kind = VarKind::SmartSensor;
    else if (kind == "att") var.kind = VarKind::Attribute;
    else throw ParseError("var kind must be 'ss' or 'att', got '" + kind + "'");
    var.initial = as_bool(field(v, "initial"), "var initial");
    if (!net.var_index_.emplace(var.id, net.vars_.size()).second)
      throw ValidationError("duplicate variable id '" + var.id + "'");
    net.vars_.push_back(std::move(var));
  }

  auto literals = [&](const Json& arr, const std::string& owner, const char* what) {
    std::vector<Literal> out;
    if (!arr.is_array()) throw ParseError(owner + ": '" + what + "' must be an array");
    for (const auto& pair : arr) {
      if (!pair.is_array() || pair.size() != 2) throw ParseError(owner + ": literal must be [var, bool]");
      auto vid = as_string(pair[0], "literal var");
      auto it = net.var_index_.find(vid);
      if (it == net.var_index_.end())
        throw ValidationError("dangling id: primitive '" + owner + "' references unknown variable '" + vid + "'");
      out.push_back(Literal{it->second, as_bool(pair[1], "literal value")});
    }
    return out;
  };

  for (const auto& p : array_field(doc, "primitives")) {
    Primitive prim;
    prim.id = as_string(field(p, "id"), "primitive id");
    prim.pre = literals(field(p, "pre"), prim.id, "pre");
    prim.eff = literals(field(p, "eff"), prim.id, "eff");
    if (prim.eff.empty()) throw ValidationError("primitive '" + prim.id + "' has no effects");
    if (!net.prim_index_.emplace(prim.id, net.primitives_.size()).second)
      throw ValidationError("duplicate primitive id '" + prim.id + "'");
    net.primitives_.push_back(std::move(prim));
  }

  std::unordered_map<std::string, std::size_t> task_index;
  std::unordered_set<std::string> method_ids;
  for (const auto& m : array_field(doc, "methods")) {
    Method method;
    method.id = as_string(field(m, "id"), "method id");
    method.task = as_string(field(m, "task"), "method task");
    for (const auto& s : array_field(m, "subtasks")) method.subtasks.push_back(as_string(s, "subtask"));
    auto ord = as_string(field(m, "ordering"), "ordering");
    if (ord == "ordered") method.ordering = Ordering::Ordered;
    else if (ord == "unordered") method.ordering = Ordering::Unordered;
    else throw ParseError("method '" + method.id + "': ordering must be 'ordered' or 'unordered'");
    const Json& prob = field(m, "prob");
    if (!prob.is_number()) throw ParseError("method '" + method.id + "': prob must be a number");
    method.prob = prob.get<double>();
    if (!(method.prob > 0.0 && method.prob <= 1.0))
      throw ValidationError("method '" + method.id + "': prob must lie in (0,1]");
    if (method.subtasks.empty()) throw ValidationError("method '" + method.id + "' has no subtasks");
    if (!method_ids.insert(method.id).second) throw ValidationError("duplicate method id '" + method.id + "'");
    if (net.prim_index_.count(method.task))
      throw ValidationError("method '" + method.id + "' decomposes primitive '" + method.task + "'");
    auto [it, fresh] = task_index.emplace(method.task, net.tasks_.size());
    if (fresh) net.tasks_.push_back(CompoundTask{method.task, {}});
    net.tasks_[it->second].methods.push_back(net.methods_.size());
    net.methods_.push_back(std::move(method));
  }

  for (auto& method : net.methods_) {
    for (const auto& s : method.subtasks) {
      if (auto p = net.prim_index_.find(s); p != net.prim_index_.end())
        method.resolved.push_back(TaskRef{true, static_cast<std::uint32_t>(p->second)});
      else if (auto t = task_index.find(s); t != task_index.end())
        method.resolved.push_back(TaskRef{false, static_cast<std::uint32_t>(t->second)});
      else
        throw ValidationError("dangling id: method '" + method.id + "' references unknown task '" + s + "'");
    }
  }

  for (const auto& t : net.tasks_) {
    double sum = 0.0;
    for (auto m : t.methods) sum += net.methods_[m].prob;
    if (std::abs(sum - 1.0) > 1e-9) {
      std::ostringstream os;
      os << "method probs for task '" << t.id << "' sum to " << sum << ", expected 1";
      throw ValidationError(os.str());
    }
  }

  // Cycle check by DFS colouring over compound tasks.
  std::vector<int> colour(net.tasks_.size(), 0);
  auto visit = [&](auto&& self, std::size_t t) -> void {
    colour[t] = 1;
    for (auto m : net.tasks_[t].methods)
      for (auto r : net.methods_[m].resolved) {
        if (r.primitive) continue;
        if (colour[r.index] == 1) throw ValidationError("cycle: task '" + net.tasks_[r.index].id + "' reaches itself");
        if (colour[r.index] == 0) self(self, r.index);
      }
    colour[t] = 2;
  };
  for (std::size_t t = 0; t < net.tasks_.size(); ++t)
    if (colour[t] == 0) visit(visit, t);

  std::unordered_set<std::string> goal_ids;
  for (const auto& g : array_field(doc, "goals")) {
    auto id = as_string(g, "goal");
    auto it = task_index.find(id);
    if (it == task_index.end()) throw ValidationError("dangling id: goal '" + id + "' has no method");
    if (!goal_ids.insert(id).second) throw ValidationError("duplicate goal '" + id + "'");
    net.goals_.push_back(it->second);
  }
  if (net.goals_.empty()) throw ValidationError("TaskNet declares no goals");

  net.build_indices();
  net.build_progress_tables();
  return net;
}

inline TaskNet load_tasknet(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("TaskNet is not valid JSON: ") + e.what());
  }
  return load_tasknet(doc);
}

inline TaskNet load_tasknet_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open TaskNet file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_tasknet(std::string_view(ss.str()));
}

/// Canonical JSON encoding; load_tasknet(to_json(net)) reproduces `net`.
inline Json to_json(const TaskNet& net) {
  Json doc;
  doc["schema"] = 1;
  doc["domain"] = net.domain();
  doc["vars"] = Json::array();
  for (const auto& v : net.vars())
    doc["vars"].push_back({{"id", v.id}, {"kind", to_string(v.kind)}, {"initial", v.initial}});
  auto lits = [&](const std::vector<Literal>& ls) {
    Json a = Json::array();
    for (const auto& l : ls) a.push_back(Json::array({net.var_id(l.var), l.value}));
    return a;
  };
  doc["primitives"] = Json::array();
  for (const auto& p : net.primitives())
    doc["primitives"].push_back({{"id", p.id}, {"pre", lits(p.pre)}, {"eff", lits(p.eff)}});
  doc["methods"] = Json::array();
  for (const auto& m : net.methods())
    doc["methods"].push_back({{"id", m.id},
                              {"task", m.task},
                              {"subtasks", m.subtasks},
                              {"ordering", m.ordering == Ordering::Ordered ? "ordered" : "unordered"},
                              {"prob", m.prob}});
  doc["goals"] = Json::array();
  for (std::size_t g = 0; g < net.num_goals(); ++g) doc["goals"].push_back(net.goal_id(g));
  return doc;
}

/// Primitives that advance `goal` from `world`.
///
/// Progress is read off the world. Among the goal's reachable progress states
/// (enumerated from the initial world at load time) we keep those whose
/// already-written variables all match `world`, then those closest to `world`
/// in Hamming distance over the goal's written variables, then the most
/// advanced, and return their ready primitives whose preconditions hold.
/// Undoing an earlier effect therefore makes the undone step valid again, and
/// effects left by another goal on shared variables do not count as progress.
inline std::vector<std::size_t> valid_next_primitives(const TaskNet& net, const World& world, std::size_t goal) {
  if (goal >= net.num_goals()) throw UnknownIdError("unknown goal index " + std::to_string(goal));
  const auto& vars = net.goal_vars(goal);
  std::size_t best_dist = SIZE_MAX, best_progress = 0;
  std::vector<const ProgressState*> best;
  for (const auto& ps : net.progress_states(goal)) {
    if (!std::all_of(ps.written.begin(), ps.written.end(), [&](auto v) { return ps.world[v] == world[v]; })) continue;
    std::size_t d = 0;
    for (auto v : vars) d += (ps.world[v] != world[v]);
    if (d < best_dist || (d == best_dist && ps.progress > best_progress)) {
      best_dist = d;
      best_progress = ps.progress;
      best.clear();
    }
    if (d == best_dist && ps.progress == best_progress) best.push_back(&ps);
  }
  std::vector<std::size_t> out;
  for (const auto* ps : best)
    for (auto p : ps->ready)
      if (net.preconditions_hold(p, world)) out.push_back(p);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline std::vector<std::string> valid_next_primitives(const TaskNet& net, const World& world, std::string_view goal) {
  std::vector<std::string> ids;
  for (auto p : valid_next_primitives(net, world, net.goal_index(goal))) ids.push_back(net.primitive_id(p));
  std::sort(ids.begin(), ids.end());
  return ids;
}

/// Executable primitives that advance no goal of the net.
inline std::vector<std::size_t> wrong_action_set(const TaskNet& net, const World& world) {
  std::vector<char> valid(net.num_primitives(), 0);
  for (std::size_t g = 0; g < net.num_goals(); ++g)
    for (auto p : valid_next_primitives(net, world, g)) valid[p] = 1;
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < net.num_primitives(); ++p)
    if (!valid[p] && net.preconditions_hold(p, world)) out.push_back(p);
  return out;
}

/// The goal argument only has to name a goal of the net: wrongness is judged
/// against every goal, so a step toward another goal is not wrong.
inline std::vector<std::size_t> wrong_action_set(const TaskNet& net, const World& world, std::size_t goal) {
  if (goal >= net.num_goals()) throw UnknownIdError("unknown goal index " + std::to_string(goal));
  return wrong_action_set(net, world);
}

inline std::vector<std::string> wrong_action_set(const TaskNet& net, const World& world, std::string_view goal) {
  std::vector<std::string> ids;
  for (auto p : wrong_action_set(net, world, net.goal_index(goal))) ids.push_back(net.primitive_id(p));
  std::sort(ids.begin(), ids.end());
  return ids;
}

/// Ground-truth dynamics: effects always apply, preconditions or not.
inline World apply_primitive(const TaskNet& net, const World& world, std::size_t p) {
  if (p >= net.num_primitives()) throw UnknownIdError("unknown primitive index " + std::to_string(p));
  World next = world;
  for (const auto& l : net.primitives()[p].eff) next[l.var] = l.value;
  return next;
}

inline World apply_primitive(const TaskNet& net, const World& world, std::string_view p) {
  return apply_primitive(net, world, net.primitive_index(p));
}

}  // namespace d4gr
