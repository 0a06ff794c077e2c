#pragma once

// Benchmark grid: paired traces per cell, metrics, CSV and SVG output.

#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "d4gr/simulator.hpp"

namespace d4gr {

struct BenchConfig {
  std::string domain = "kitchen";
  std::vector<Policy> policies{kAllPolicies.begin(), kAllPolicies.end()};
  std::vector<double> srs{0.8, 0.9, 0.95, 0.99};
  std::vector<Category> categories{kAllCategories.begin(), kAllCategories.end()};
  int trials = 20;
  double correct_step_prob = 0.99;
  double wrong_category_c = 0.837;
  double compliance_prob = 1.0;
  double goal_switch_prob = 0.0;
  bool beam_pruning = false;
  PlannerConfig planner;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const {
    if (policies.empty()) throw ValidationError("no policies selected");
    if (categories.empty()) throw ValidationError("no categories selected");
    if (srs.empty()) throw ValidationError("empty sr grid");
    for (double sr : srs)
      if (!(sr >= 0.5 && sr <= 1.0)) throw ValidationError("sr values must lie in [0.5, 1.0]");
    if (trials < 1) throw ValidationError("trials per cell must be >= 1");
    if (threads < 1) throw ValidationError("threads must be >= 1");
    planner.validate();
  }

  double c_for(Category c) const { return has_wrong_steps(c) ? wrong_category_c : correct_step_prob; }
};

struct MetricsRow {
  std::string policy;
  std::string domain;
  double sr = 0.0;
  std::string category;
  double goal_acc = 0.0;
  double plan_acc = 0.0;
  double q_freq = 0.0;
  double return_mean = 0.0;
  double return_sd = 0.0;
  double runtime_s = 0.0;
  int trials = 0;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

struct AbortedCell {
  std::string policy;
  double sr = 0.0;
  std::string category;
  std::string reason;
};

struct MetricsTable {
  std::vector<MetricsRow> rows;
  std::vector<AbortedCell> aborted;

  const MetricsRow* find(const std::string& policy, double sr, const std::string& category) const {
    for (const auto& r : rows)
      if (r.policy == policy && r.sr == sr && r.category == category) return &r;
    return nullptr;
  }
};

/// Goal-top1 and plan-top1 pool steps across trials; question frequency is
/// the per-trial Asks/steps averaged over trials; return is undiscounted.
/// Plan-top1 compares the prediction at step t with the primitive actually
/// executed at t+1, so the last step of each trial is not scored.
inline MetricsRow compute_metrics(const std::vector<EpisodeLog>& logs, const std::vector<HumanTrace>& traces) {
  if (logs.empty()) throw ValidationError("no episode logs to summarise");
  if (logs.size() != traces.size()) throw ValidationError("logs and traces differ in length");
  MetricsRow row;
  std::size_t goal_hits = 0, goal_n = 0, plan_hits = 0, plan_n = 0, decisions = 0;
  double q_sum = 0.0, ret_sum = 0.0, ret_sq = 0.0, time_sum = 0.0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const auto& recs = logs[i].records;
    if (recs.size() != traces[i].steps.size()) throw ValidationError("episode log does not match its trace length");
    for (std::size_t t = 0; t < recs.size(); ++t) {
      goal_hits += recs[t].predicted_goal == recs[t].goal;
      ++goal_n;
      if (t + 1 < recs.size()) {
        plan_hits += recs[t].predicted_next == recs[t + 1].action;
        ++plan_n;
      }
      time_sum += recs[t].decision_s;
      ++decisions;
    }
    q_sum += recs.empty() ? 0.0 : static_cast<double>(logs[i].questions) / static_cast<double>(recs.size());
    ret_sum += logs[i].cumulative_return;
    ret_sq += logs[i].cumulative_return * logs[i].cumulative_return;
  }
  const double n = static_cast<double>(logs.size());
  row.trials = static_cast<int>(logs.size());
  row.goal_acc = goal_n ? static_cast<double>(goal_hits) / static_cast<double>(goal_n) : 0.0;
  row.plan_acc = plan_n ? static_cast<double>(plan_hits) / static_cast<double>(plan_n) : 0.0;
  row.q_freq = q_sum / n;
  row.return_mean = ret_sum / n;
  row.return_sd = logs.size() > 1 ? std::sqrt(std::max(0.0, (ret_sq - n * row.return_mean * row.return_mean) / (n - 1))) : 0.0;
  row.runtime_s = decisions ? time_sum / static_cast<double>(decisions) : 0.0;
  return row;
}

namespace detail {

inline std::uint64_t category_tag(Category c) { return static_cast<std::uint64_t>(c) + 1; }

}  // namespace detail

/// The trace for (category, trial) depends only on the seed, so every sr
/// level and every policy replays the same human.
inline HumanTrace bench_trace(const TaskNet& net, const BenchConfig& cfg, Category category, int trial) {
  const std::uint64_t key = stream_key({cfg.seed, detail::category_tag(category), static_cast<std::uint64_t>(trial)});
  Rng rng(key);
  std::vector<std::size_t> goals;
  if (is_multi(category)) {
    if (net.num_goals() < 2) throw ValidationError("multi-goal categories need at least two goals");
    const std::size_t a = rng.index(net.num_goals());
    std::size_t b = rng.index(net.num_goals() - 1);
    if (b >= a) ++b;
    goals = {a, b};
  } else {
    goals = {rng.index(net.num_goals())};
  }
  const double c = has_wrong_steps(category) ? cfg.c_for(category) : 1.0;
  return generate_trace(net, category, c, goals, rng, key);
}

inline std::uint64_t bench_noise_key(const BenchConfig& cfg, Category category, int trial) {
  return stream_key({cfg.seed, detail::category_tag(category), static_cast<std::uint64_t>(trial), 0x6e6f697365ULL});
}

inline EpisodeConfig bench_episode_config(const BenchConfig& cfg, double sr, Category category) {
  EpisodeConfig e;
  e.correct_step_prob = cfg.c_for(category);
  e.sensor_reliability = sr;
  e.compliance_prob = cfg.compliance_prob;
  e.goal_switch_prob = cfg.goal_switch_prob;
  e.beam_pruning = cfg.beam_pruning;
  e.planner = cfg.planner;
  return e;
}

/// Runs `fn(i)` for i in [0, n) on `threads` workers. Exceptions are
/// captured per index.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

struct BenchProgress {
  std::function<void(const std::string&)> log;
};

inline MetricsTable run_benchmark(const BenchConfig& cfg, const TaskNet& net, const BenchProgress& progress = {}) {
  cfg.validate();
  const std::size_t n_cat = cfg.categories.size(), n_sr = cfg.srs.size(), n_pol = cfg.policies.size();
  const auto trials = static_cast<std::size_t>(cfg.trials);

  // Traces first: they are shared by every sr and policy.
  std::vector<HumanTrace> traces(n_cat * trials);
  std::vector<std::string> trace_errors(n_cat * trials);
  parallel_for(traces.size(), cfg.threads, [&](std::size_t i) {
    try {
      traces[i] = bench_trace(net, cfg, cfg.categories[i / trials], static_cast<int>(i % trials));
    } catch (const std::exception& e) {
      trace_errors[i] = e.what();
    }
  });

  const std::size_t n_jobs = n_cat * n_sr * n_pol * trials;
  std::vector<EpisodeLog> logs(n_jobs);
  std::vector<std::string> errors(n_jobs);
  std::mutex log_mu;
  std::atomic<std::size_t> done{0};
  parallel_for(n_jobs, cfg.threads, [&](std::size_t j) {
    const std::size_t trial = j % trials;
    const std::size_t pol = (j / trials) % n_pol;
    const std::size_t sr = (j / trials / n_pol) % n_sr;
    const std::size_t cat = j / trials / n_pol / n_sr;
    const std::size_t ti = cat * trials + trial;
    if (!trace_errors[ti].empty()) {
      errors[j] = "trace generation failed: " + trace_errors[ti];
      return;
    }
    try {
      const Category category = cfg.categories[cat];
      const auto ecfg = bench_episode_config(cfg, cfg.srs[sr], category);
      Rng rng(stream_key({cfg.seed, detail::category_tag(category), trial, static_cast<std::uint64_t>(cfg.policies[pol]) + 1,
                          static_cast<std::uint64_t>(std::llround(cfg.srs[sr] * 1e6))}));
      logs[j] = run_episode(net, traces[ti], cfg.policies[pol], ecfg, bench_noise_key(cfg, category, static_cast<int>(trial)), rng);
    } catch (const std::exception& e) {
      errors[j] = e.what();
    }
    const auto d = ++done;
    if (progress.log && (d % 100 == 0 || d == n_jobs)) {
      std::lock_guard lock(log_mu);
      progress.log(std::to_string(d) + "/" + std::to_string(n_jobs) + " episodes");
    }
  });

  MetricsTable table;
  for (std::size_t cat = 0; cat < n_cat; ++cat)
    for (std::size_t sr = 0; sr < n_sr; ++sr)
      for (std::size_t pol = 0; pol < n_pol; ++pol) {
        const std::size_t base = ((cat * n_sr + sr) * n_pol + pol) * trials;
        std::string reason;
        for (std::size_t t = 0; t < trials && reason.empty(); ++t) reason = errors[base + t];
        if (!reason.empty()) {
          table.aborted.push_back({to_string(cfg.policies[pol]), cfg.srs[sr], to_string(cfg.categories[cat]), reason});
          continue;
        }
        std::vector<EpisodeLog> cell(logs.begin() + static_cast<std::ptrdiff_t>(base),
                                     logs.begin() + static_cast<std::ptrdiff_t>(base + trials));
        std::vector<HumanTrace> cell_traces(traces.begin() + static_cast<std::ptrdiff_t>(cat * trials),
                                            traces.begin() + static_cast<std::ptrdiff_t>((cat + 1) * trials));
        auto row = compute_metrics(cell, cell_traces);
        row.policy = to_string(cfg.policies[pol]);
        row.domain = cfg.domain;
        row.sr = cfg.srs[sr];
        row.category = to_string(cfg.categories[cat]);
        table.rows.push_back(std::move(row));
      }
  return table;
}

inline constexpr const char* kCsvHeader = "policy,domain,sr,category,goal_acc,plan_acc,q_freq,return_mean,return_sd,runtime_s,trials";

/// Shortest text that parses back to the same double.
inline std::string format_double(double x) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

/// With `timing` off the runtime column is written as 0 so that repeated
/// runs produce identical files.
inline std::string metrics_to_csv(const MetricsTable& t, bool timing = false) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : t.rows) {
    out += r.policy + ',' + r.domain + ',' + format_double(r.sr) + ',' + r.category + ',' + format_double(r.goal_acc) +
           ',' + format_double(r.plan_acc) + ',' + format_double(r.q_freq) + ',' + format_double(r.return_mean) + ',' +
           format_double(r.return_sd) + ',' + format_double(timing ? r.runtime_s : 0.0) + ',' +
           std::to_string(r.trials) + '\n';
  }
  return out;
}

inline MetricsTable metrics_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw ParseError("metrics CSV has an unexpected header");
  MetricsTable t;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 11) throw ParseError("metrics CSV row has " + std::to_string(f.size()) + " fields");
    try {
      MetricsRow r{f[0], f[1], std::stod(f[2]), f[3], std::stod(f[4]), std::stod(f[5]), std::stod(f[6]),
                   std::stod(f[7]), std::stod(f[8]), std::stod(f[9]), std::stoi(f[10])};
      t.rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw ParseError("metrics CSV row has a non-numeric field: " + line);
    }
  }
  return t;
}

/// Line chart of one metric against sr, one line per policy, averaged over
/// categories.
inline std::string metric_svg(const MetricsTable& t, const std::string& metric) {
  auto value = [&](const MetricsRow& r) {
    if (metric == "goal_acc") return r.goal_acc;
    if (metric == "plan_acc") return r.plan_acc;
    if (metric == "q_freq") return r.q_freq;
    if (metric == "return_mean") return r.return_mean;
    if (metric == "runtime_s") return r.runtime_s;
    throw ValidationError("unknown metric '" + metric + "'");
  };
  std::map<std::string, std::map<double, std::pair<double, int>>> series;
  for (const auto& r : t.rows) {
    auto& cell = series[r.policy][r.sr];
    cell.first += value(r);
    cell.second += 1;
  }
  double lo = 0.0, hi = 0.0, xmin = 1.0, xmax = 0.5;
  bool first = true;
  for (const auto& [p, pts] : series)
    for (const auto& [sr, acc] : pts) {
      const double v = acc.first / acc.second;
      if (first) lo = hi = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      xmin = std::min(xmin, sr);
      xmax = std::max(xmax, sr);
      first = false;
    }
  if (hi - lo < 1e-12) hi = lo + 1.0;
  if (xmax - xmin < 1e-12) xmax = xmin + 0.01;
  const double w = 520, h = 320, m = 50;
  auto px = [&](double sr) { return m + (sr - xmin) / (xmax - xmin) * (w - 2 * m); };
  auto py = [&](double v) { return h - m - (v - lo) / (hi - lo) * (h - 2 * m); };
  static const char* kColors[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e"};
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  s << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\">" << metric << " vs sr</text>\n";
  s << "<line x1=\"" << m << "\" y1=\"" << h - m << "\" x2=\"" << w - m << "\" y2=\"" << h - m << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << m << "\" y1=\"" << m << "\" x2=\"" << m << "\" y2=\"" << h - m << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << m - 5 << "\" y=\"" << py(lo) << "\" text-anchor=\"end\" font-size=\"10\">" << format_double(std::round(lo * 1e4) / 1e4) << "</text>\n";
  s << "<text x=\"" << m - 5 << "\" y=\"" << py(hi) << "\" text-anchor=\"end\" font-size=\"10\">" << format_double(std::round(hi * 1e4) / 1e4) << "</text>\n";
  int k = 0;
  for (const auto& [policy, pts] : series) {
    const char* color = kColors[k % 5];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
    for (const auto& [sr, acc] : pts) s << px(sr) << ',' << py(acc.first / acc.second) << ' ';
    s << "\"/>\n";
    for (const auto& [sr, acc] : pts)
      s << "<circle cx=\"" << px(sr) << "\" cy=\"" << py(acc.first / acc.second) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    s << "<text x=\"" << w - m + 5 << "\" y=\"" << m + 14 * k << "\" font-size=\"10\" fill=\"" << color << "\">" << policy << "</text>\n";
    ++k;
  }
  for (const auto& [sr, unused] : series.begin()->second)
    s << "<text x=\"" << px(sr) << "\" y=\"" << h - m + 14 << "\" text-anchor=\"middle\" font-size=\"10\">" << sr << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

inline const std::vector<std::string>& plotted_metrics() {
  static const std::vector<std::string> kMetrics{"goal_acc", "plan_acc", "q_freq", "return_mean", "runtime_s"};
  return kMetrics;
}

/// metrics.csv, one SVG per metric, aborted.txt when any cell failed, and
/// with `timing` runtime.csv holding measured decision times.
inline void write_bench_outputs(const MetricsTable& t, const std::filesystem::path& dir, bool timing = false) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error("cannot write '" + (dir / name).string() + "'");
    out << body;
  };
  write("metrics.csv", metrics_to_csv(t, timing));
  if (timing) {
    std::string rt = "policy,domain,sr,category,runtime_s\n";
    for (const auto& r : t.rows)
      rt += r.policy + ',' + r.domain + ',' + format_double(r.sr) + ',' + r.category + ',' + format_double(r.runtime_s) + '\n';
    write("runtime.csv", rt);
  }
  if (!t.rows.empty())
    for (const auto& m : plotted_metrics())
      if (m != "runtime_s" || timing) write(m + ".svg", metric_svg(t, m));
  if (!t.aborted.empty()) {
    std::string a;
    for (const auto& c : t.aborted)
      a += c.policy + ',' + format_double(c.sr) + ',' + c.category + ": " + c.reason + '\n';
    write("aborted.txt", a);
  }
}

}  // namespace d4gr
