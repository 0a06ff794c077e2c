#pragma once

// Shipped domain bundles and the domain linter.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "d4gr/htn.hpp"

#ifndef D4GR_DOMAIN_DIR
#define D4GR_DOMAIN_DIR "domains"
#endif

namespace d4gr {

struct DomainBundle {
  std::string name;
  Json doc;
  std::size_t expected_var_count = 0;
  std::string provenance;
};

inline const std::vector<std::pair<std::string, std::size_t>>& shipped_domains() {
  static const std::vector<std::pair<std::string, std::size_t>> kDomains{{"kitchen", 18}, {"blocks", 26}};
  return kDomains;
}

/// $D4GR_DOMAIN_DIR if set, else the directory baked in at build time.
inline std::filesystem::path domain_dir() {
  if (const char* env = std::getenv("D4GR_DOMAIN_DIR"); env && *env) return env;
  return D4GR_DOMAIN_DIR;
}

inline std::filesystem::path domain_path(const std::string& name) {
  return domain_dir() / (name + ".tasknet.json");
}

inline DomainBundle load_bundle_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open domain file '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("invalid JSON in '") + path + "': " + e.what());
  }
  DomainBundle b;
  b.name = doc.value("domain", std::string{});
  b.doc = std::move(doc);
  b.provenance = b.doc.value("provenance", std::string{});
  for (const auto& [n, count] : shipped_domains())
    if (n == b.name) b.expected_var_count = count;
  return b;
}

inline DomainBundle load_bundle(const std::string& name) {
  for (const auto& [n, count] : shipped_domains())
    if (n == name) return load_bundle_file(domain_path(name).string());
  throw UnknownIdError("unknown domain '" + name + "'");
}

inline TaskNet load_domain(const std::string& name) { return load_tasknet(load_bundle(name).doc); }

struct LintReport {
  std::vector<std::string> warnings;
  bool empty() const { return warnings.empty(); }
};

/// Unreachable primitives, variables never read or written, methods naming
/// the same subtask twice, and a variable count differing from the expected
/// one. Load failures propagate.
inline LintReport lint_domain(const DomainBundle& bundle) {
  const TaskNet net = load_tasknet(bundle.doc);
  LintReport r;

  std::vector<char> reached_task(net.tasks().size(), 0), reached_prim(net.num_primitives(), 0);
  std::vector<std::size_t> stack(net.goals().begin(), net.goals().end());
  for (auto t : stack) reached_task[t] = 1;
  while (!stack.empty()) {
    const auto t = stack.back();
    stack.pop_back();
    for (auto m : net.tasks()[t].methods)
      for (const auto& ref : net.methods()[m].resolved) {
        if (ref.primitive) {
          reached_prim[ref.index] = 1;
        } else if (!reached_task[ref.index]) {
          reached_task[ref.index] = 1;
          stack.push_back(ref.index);
        }
      }
  }
  for (std::size_t p = 0; p < net.num_primitives(); ++p)
    if (!reached_prim[p]) r.warnings.push_back("primitive '" + net.primitive_id(p) + "' is unreachable from every goal");
  for (std::size_t t = 0; t < net.tasks().size(); ++t)
    if (!reached_task[t]) r.warnings.push_back("task '" + net.tasks()[t].id + "' is unreachable from every goal");

  std::vector<char> used(net.num_vars(), 0);
  for (const auto& p : net.primitives()) {
    for (const auto& l : p.pre) used[l.var] = 1;
    for (const auto& l : p.eff) used[l.var] = 1;
  }
  for (std::size_t v = 0; v < net.num_vars(); ++v)
    if (!used[v]) r.warnings.push_back("variable '" + net.var_id(v) + "' is never read or written");

  for (const auto& m : net.methods()) {
    std::set<std::string> seen;
    for (const auto& s : m.subtasks)
      if (!seen.insert(s).second) r.warnings.push_back("method '" + m.id + "' lists subtask '" + s + "' more than once");
  }

  if (bundle.expected_var_count && net.num_vars() != bundle.expected_var_count)
    r.warnings.push_back("domain declares " + std::to_string(net.num_vars()) + " variables, expected " +
                         std::to_string(bundle.expected_var_count));
  return r;
}

}  // namespace d4gr
