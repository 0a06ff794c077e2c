#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "d4gr/bench.hpp"
#include "d4gr/domains.hpp"

namespace {

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void add_planner_flags(CLI::App& app, d4gr::PlannerConfig& p) {
  app.add_option("--depth", p.depth, "search depth")->capture_default_str();
  app.add_option("--obs-samples", p.obs_samples, "observation keys kept per node")->capture_default_str();
  app.add_option("--sims", p.simulations, "simulations per decision")->capture_default_str();
  app.add_option("--ucb-c", p.ucb_c, "UCB1 exploration constant")->capture_default_str();
  app.add_option("--gamma", p.gamma, "discount")->capture_default_str();
}

d4gr::TaskNet load_net(const std::string& domain) {
  if (domain.find(".json") != std::string::npos) return d4gr::load_tasknet_file(domain);
  return d4gr::load_domain(domain);
}

int run(const d4gr::BenchConfig& cfg, const std::string& out, bool timing, bool quiet) {
  const auto net = load_net(cfg.domain);
  d4gr::BenchProgress progress;
  if (!quiet) progress.log = [](const std::string& m) { std::cerr << m << "\n"; };
  const auto table = d4gr::run_benchmark(cfg, net, progress);
  d4gr::write_bench_outputs(table, out, timing);
  for (const auto& c : table.aborted)
    std::cerr << "aborted cell " << c.policy << " sr=" << c.sr << " " << c.category << ": " << c.reason << "\n";
  if (!quiet) std::cerr << "wrote " << table.rows.size() << " rows to " << out << "\n";
  return table.aborted.empty() ? 0 : 2;
}

int replay(const std::string& trace_path, const std::string& policy, const std::string& domain, double sr, double c,
           std::uint64_t seed, const d4gr::PlannerConfig& planner) {
  std::ifstream in(trace_path);
  if (!in) throw d4gr::Error("cannot open trace '" + trace_path + "'");
  d4gr::Json doc;
  try {
    doc = d4gr::Json::parse(in);
  } catch (const d4gr::Json::parse_error& e) {
    throw d4gr::ParseError(std::string("invalid trace JSON: ") + e.what());
  }
  const auto net = load_net(domain.empty() ? doc.value("domain", std::string{}) : domain);
  const auto trace = d4gr::trace_from_json(doc, net);
  d4gr::EpisodeConfig ecfg;
  ecfg.sensor_reliability = sr;
  ecfg.correct_step_prob = c;
  ecfg.planner = planner;
  d4gr::Rng rng(d4gr::stream_key({seed, trace.seed}));
  const auto log = d4gr::run_episode(net, trace, d4gr::parse_policy(policy), ecfg, d4gr::stream_key({seed, trace.seed, 1}), rng);
  std::cout << d4gr::episode_to_jsonl(log, net);
  std::cerr << "return " << log.cumulative_return << ", questions " << log.questions << "/" << log.records.size() << "\n";
  return 0;
}

int lint(const std::string& path) {
  const auto bundle = d4gr::load_bundle_file(path);
  const auto report = d4gr::lint_domain(bundle);
  for (const auto& w : report.warnings) std::cout << "warning: " << w << "\n";
  if (report.empty()) std::cout << path << ": ok\n";
  return report.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark runner for the clarification-question agent"};
  app.require_subcommand(1);

  d4gr::BenchConfig cfg;
  std::string policies = "d4gr,htn,always-ask,random-ask", srs = "0.8,0.9,0.95,0.99", categories = "all";
  std::string out = "bench_out";
  bool timing = false, quiet = false;
  auto* run_cmd = app.add_subcommand("run", "run the benchmark grid");
  run_cmd->add_option("--domain", cfg.domain, "kitchen, blocks, or a TaskNet file")->capture_default_str();
  run_cmd->add_option("--policy", policies, "comma-separated policies")->capture_default_str();
  run_cmd->add_option("--sr", srs, "comma-separated sensor reliabilities")->capture_default_str();
  run_cmd->add_option("--category", categories, "comma-separated categories or 'all'")->capture_default_str();
  run_cmd->add_option("--trials", cfg.trials, "trials per cell")->capture_default_str();
  run_cmd->add_option("--seed", cfg.seed, "master seed")->capture_default_str();
  run_cmd->add_option("--out", out, "output directory")->capture_default_str();
  run_cmd->add_option("--threads", cfg.threads, "worker threads")->capture_default_str();
  run_cmd->add_option("--C", cfg.correct_step_prob, "correct-step probability, correct categories")->capture_default_str();
  run_cmd->add_option("--C-wrong", cfg.wrong_category_c, "correct-step probability, wrong categories")->capture_default_str();
  run_cmd->add_option("--compliance", cfg.compliance_prob, "probability the human follows an Inform")->capture_default_str();
  run_cmd->add_option("--switch-prob", cfg.goal_switch_prob, "recognizer goal-switch probability")->capture_default_str();
  run_cmd->add_flag("--beam", cfg.beam_pruning, "prune explanations below 1e-6");
  run_cmd->add_flag("--timing", timing, "write measured decision times (output no longer reproducible)");
  run_cmd->add_flag("--quiet", quiet, "no progress output");
  add_planner_flags(*run_cmd, cfg.planner);

  std::string trace_path, policy = "d4gr", replay_domain;
  double replay_sr = 0.9, replay_c = 0.99;
  std::uint64_t replay_seed = 0;
  d4gr::PlannerConfig replay_planner;
  auto* replay_cmd = app.add_subcommand("replay", "run one policy on a recorded trace; prints JSON lines");
  replay_cmd->add_option("--trace", trace_path, "trace file")->required();
  replay_cmd->add_option("--policy", policy, "policy")->capture_default_str();
  replay_cmd->add_option("--domain", replay_domain, "override the trace's domain");
  replay_cmd->add_option("--sr", replay_sr, "sensor reliability")->capture_default_str();
  replay_cmd->add_option("--C", replay_c, "correct-step probability")->capture_default_str();
  replay_cmd->add_option("--seed", replay_seed, "seed")->capture_default_str();
  add_planner_flags(*replay_cmd, replay_planner);

  std::string lint_path;
  auto* lint_cmd = app.add_subcommand("lint", "lint a TaskNet file");
  lint_cmd->add_option("--domain", lint_path, "TaskNet file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      cfg.policies.clear();
      for (const auto& p : split(policies)) cfg.policies.push_back(d4gr::parse_policy(p));
      cfg.srs.clear();
      for (const auto& s : split(srs)) cfg.srs.push_back(std::stod(s));
      cfg.categories.clear();
      if (categories == "all")
        cfg.categories.assign(d4gr::kAllCategories.begin(), d4gr::kAllCategories.end());
      else
        for (const auto& c : split(categories)) cfg.categories.push_back(d4gr::parse_category(c));
      return run(cfg, out, timing, quiet);
    }
    if (*replay_cmd) return replay(trace_path, policy, replay_domain, replay_sr, replay_c, replay_seed, replay_planner);
    if (*lint_cmd) return lint(lint_path);
  } catch (const std::invalid_argument&) {
    std::cerr << "error: malformed numeric list\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
