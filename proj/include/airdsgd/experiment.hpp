#pragma once

// Scenario sweep over (sigma, tau_factor, scheme, trial) with CSV/JSON output.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

#include "airdsgd/dataset.hpp"
#include "airdsgd/dsgd.hpp"
#include "airdsgd/errors.hpp"
#include "airdsgd/mixing.hpp"
#include "airdsgd/random.hpp"
#include "airdsgd/scheduling.hpp"
#include "airdsgd/tasks.hpp"
#include "airdsgd/topology.hpp"

namespace airdsgd {

inline constexpr std::string_view version = "0.1.0";
inline constexpr std::string_view mnist_env_var = "AIRDSGD_MNIST_DIR";

struct ExperimentConfig {
  std::size_t n = 20;
  std::vector<double> sigma{2.0, 5.0};
  std::vector<double> tau_factor{0.8, 1.2, 1.6};
  std::vector<Scheme> schemes{Scheme::mac, Scheme::p2p};
  std::size_t trials = 50;
  std::size_t iterations = 250;
  double learning_rate = 0.1;
  double learning_rate_decay = 0.0;
  double noise_std = 1.0;
  double power = 1.0;
  double norm_bound = 0.0;  // 0: 10x the largest initial norm
  bool interference = false;
  std::string coloring = "saturation";  // or "degree"
  std::size_t max_attempts = 1000;

  std::string task = "quadratic";  // or "logistic"
  std::size_t dim = 10;            // quadratic
  double gradient_noise = 0.1;     // quadratic
  std::string mnist_dir;           // logistic; falls back to $AIRDSGD_MNIST_DIR
  std::size_t train_samples = 2000;
  std::size_t test_samples = 1000;
  std::size_t batch = 32;
  double l2 = 1e-4;

  std::size_t eval_interval = 10;
  bool track_disagreement = true;
  bool traces = true;
  std::uint64_t seed = 1;
  std::string out_dir = "results";
  std::size_t workers = 1;
};

/// Reduced grid for CI runs.
inline void apply_quick_preset(ExperimentConfig& c) {
  c.n = 10;
  c.trials = 3;
  c.iterations = 40;
  c.task = "quadratic";
  c.dim = 5;
  c.eval_interval = 5;
}

// ---------------------------------------------------------------------------
// Config keys

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& key, std::string_view raw) {
  std::string s = trim(raw);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') throw ConfigError(key, "unterminated list '" + s + "'");
    s = s.substr(1, s.size() - 2);
  }
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError(key, "empty list element in '" + std::string(raw) + "'");
    out.push_back(item);
  }
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  }
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError(key, "integer out of range: '" + v + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key, "expected true/false, got '" + v + "'");
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& xs, const std::function<std::string(const T&)>& f) {
  std::string out = "[";
  for (std::size_t k = 0; k < xs.size(); ++k) out += (k ? ", " : "") + f(xs[k]);
  return out + "]";
}

}  // namespace detail

struct ConfigKey {
  std::string name;
  std::string help;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

/// Every key accepted in config files and as --<key> (underscores may be
/// written as dashes on the command line).
inline const std::vector<ConfigKey>& config_keys() {
  using C = ExperimentConfig;
  using namespace detail;
  auto size_key = [](std::string name, std::string help, std::size_t C::*field) {
    return ConfigKey{name, std::move(help),
                     [name, field](C& c, const std::string& v) { c.*field = parse_uint(name, v); },
                     [field](const C& c) { return std::to_string(c.*field); }};
  };
  auto double_key = [](std::string name, std::string help, double C::*field) {
    return ConfigKey{name, std::move(help),
                     [name, field](C& c, const std::string& v) { c.*field = parse_double(name, v); },
                     [field](const C& c) { return format_double(c.*field); }};
  };
  auto bool_key = [](std::string name, std::string help, bool C::*field) {
    return ConfigKey{name, std::move(help),
                     [name, field](C& c, const std::string& v) { c.*field = parse_bool(name, v); },
                     [field](const C& c) { return std::string(c.*field ? "true" : "false"); }};
  };
  auto string_key = [](std::string name, std::string help, std::string C::*field) {
    return ConfigKey{name, std::move(help), [field](C& c, const std::string& v) { c.*field = v; },
                     [field](const C& c) { return c.*field; }};
  };
  auto double_list_key = [](std::string name, std::string help, std::vector<double> C::*field) {
    return ConfigKey{name, std::move(help),
                     [name, field](C& c, const std::string& v) {
                       std::vector<double> xs;
                       for (const auto& s : split_list(name, v)) xs.push_back(parse_double(name, s));
                       c.*field = std::move(xs);
                     },
                     [field](const C& c) {
                       return join<double>(c.*field, [](const double& x) { return format_double(x); });
                     }};
  };

  static const std::vector<ConfigKey> keys = {
      size_key("n", "number of nodes", &C::n),
      double_list_key("sigma", "Rayleigh scale parameters", &C::sigma),
      double_list_key("tau_factor", "thresholds as multiples of sigma", &C::tau_factor),
      ConfigKey{"scheme", "schemes to run (mac, p2p, ideal)",
                [](C& c, const std::string& v) {
                  std::vector<Scheme> xs;
                  for (const auto& s : split_list("scheme", v)) {
                    try {
                      xs.push_back(parse_scheme(s));
                    } catch (const InvalidArgument& e) {
                      throw ConfigError("scheme", e.what());
                    }
                  }
                  c.schemes = std::move(xs);
                },
                [](const C& c) {
                  return join<Scheme>(c.schemes, [](const Scheme& s) { return std::string(to_string(s)); });
                }},
      size_key("trials", "trials per scenario", &C::trials),
      size_key("iterations", "DSGD iterations per trial", &C::iterations),
      double_key("learning_rate", "step size alpha", &C::learning_rate),
      double_key("learning_rate_decay", "alpha_t = alpha / (1 + decay * t)", &C::learning_rate_decay),
      double_key("noise_std", "receiver noise standard deviation", &C::noise_std),
      double_key("power", "transmit power limit P", &C::power),
      double_key("norm_bound", "agreed model norm bound B (0 = automatic)", &C::norm_bound),
      bool_key("interference", "model sub-threshold interference", &C::interference),
      string_key("coloring", "coloring heuristic: saturation or degree", &C::coloring),
      size_key("max_attempts", "topology rejection-sampling cap", &C::max_attempts),
      string_key("task", "learning task: quadratic or logistic", &C::task),
      size_key("dim", "quadratic task dimension", &C::dim),
      double_key("gradient_noise", "quadratic task gradient noise std", &C::gradient_noise),
      string_key("mnist_dir", "directory with MNIST IDX files", &C::mnist_dir),
      size_key("train_samples", "training samples used by the logistic task", &C::train_samples),
      size_key("test_samples", "test samples used by the logistic task", &C::test_samples),
      size_key("batch", "minibatch size", &C::batch),
      double_key("l2", "L2 regularization", &C::l2),
      size_key("eval_interval", "iterations between evaluations", &C::eval_interval),
      bool_key("track_disagreement", "compute max disagreement", &C::track_disagreement),
      bool_key("traces", "write per-iteration trace files", &C::traces),
      ConfigKey{"seed", "base seed",
                [](C& c, const std::string& v) { c.seed = detail::parse_uint("seed", v); },
                [](const C& c) { return std::to_string(c.seed); }},
      string_key("out_dir", "output directory", &C::out_dir),
      size_key("workers", "concurrent trials", &C::workers),
  };
  return keys;
}

inline void set_config_value(ExperimentConfig& c, std::string key, const std::string& value) {
  std::replace(key.begin(), key.end(), '-', '_');
  for (const auto& k : config_keys()) {
    if (k.name == key) {
      k.set(c, detail::trim(value));
      return;
    }
  }
  throw ConfigError(key, "unknown key");
}

/// Parses `key = value` lines. '#' starts a comment; lists are written as
/// `[a, b, c]` or `a, b, c`.
inline void parse_config_text(std::string_view text, ExperimentConfig& c) {
  std::stringstream ss{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno), "expected 'key = value', got '" + t + "'");
    }
    set_config_value(c, detail::trim(t.substr(0, eq)), t.substr(eq + 1));
  }
}

inline void load_config_file(const std::filesystem::path& path, ExperimentConfig& c) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open config");
  std::stringstream buf;
  buf << in.rdbuf();
  parse_config_text(buf.str(), c);
}

inline void validate_config(const ExperimentConfig& c) {
  if (c.n < 1) throw ConfigError("n", "must be >= 1");
  if (c.sigma.empty()) throw ConfigError("sigma", "must not be empty");
  if (c.tau_factor.empty()) throw ConfigError("tau_factor", "must not be empty");
  if (c.schemes.empty()) throw ConfigError("scheme", "must not be empty");
  for (double s : c.sigma) {
    if (!(s > 0.0)) throw ConfigError("sigma", "entries must be positive");
  }
  for (double t : c.tau_factor) {
    if (!(t > 0.0)) throw ConfigError("tau_factor", "entries must be positive");
  }
  if (c.trials < 1) throw ConfigError("trials", "must be >= 1");
  if (!(c.learning_rate > 0.0)) throw ConfigError("learning_rate", "must be positive");
  if (c.learning_rate_decay < 0.0) throw ConfigError("learning_rate_decay", "must be >= 0");
  if (!(c.noise_std >= 0.0)) throw ConfigError("noise_std", "must be >= 0");
  if (!(c.power > 0.0)) throw ConfigError("power", "must be positive");
  if (!(c.norm_bound >= 0.0)) throw ConfigError("norm_bound", "must be >= 0");
  if (c.coloring != "saturation" && c.coloring != "degree") {
    throw ConfigError("coloring", "expected saturation or degree, got '" + c.coloring + "'");
  }
  if (c.max_attempts < 1) throw ConfigError("max_attempts", "must be >= 1");
  if (c.task != "quadratic" && c.task != "logistic") {
    throw ConfigError("task", "expected quadratic or logistic, got '" + c.task + "'");
  }
  if (c.task == "quadratic" && c.dim < 1) throw ConfigError("dim", "must be >= 1");
  if (c.task == "logistic") {
    if (c.batch < 1) throw ConfigError("batch", "must be >= 1");
    if (c.train_samples < c.n) throw ConfigError("train_samples", "must be >= n");
    if (c.l2 < 0.0) throw ConfigError("l2", "must be >= 0");
    if (c.norm_bound <= 0.0) {
      throw ConfigError("norm_bound", "logistic models start at zero, so the bound must be set explicitly");
    }
  }
  if (c.eval_interval < 1) throw ConfigError("eval_interval", "must be >= 1");
  if (c.workers < 1) throw ConfigError("workers", "must be >= 1");
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& k : config_keys()) j[k.name] = k.get(c);
  return j;
}

// ---------------------------------------------------------------------------
// Running

struct TrialRecord {
  double sigma = 0.0;
  double tau_factor = 0.0;
  std::size_t sigma_index = 0;
  std::size_t tau_index = 0;
  std::size_t trial = 0;
  Scheme scheme = Scheme::mac;
  std::uint64_t seed = 0;
  std::string status = "ok";  // or the failure kind
  std::string message;
  std::size_t slots = 0;
  std::size_t edges = 0;
  std::size_t d_max = 0;
  std::size_t attempts = 0;
  std::optional<double> final_metric;
  std::optional<double> best_metric;
  std::vector<IterationRecord> records;

  bool ok() const { return status == "ok"; }
};

struct SummaryRow {
  double sigma = 0.0;
  double tau_factor = 0.0;
  Scheme scheme = Scheme::mac;
  std::size_t trials_ok = 0;
  std::size_t trials_failed = 0;
  double t_mean = 0.0;
  double t_std = 0.0;
  std::optional<double> acc_final_mean;
  std::optional<double> acc_final_std;
  std::optional<double> acc_best_mean;
};

struct ExperimentResult {
  std::vector<TrialRecord> trials;
  std::vector<SummaryRow> summary;
  std::string metric_name;
};

inline std::uint64_t trial_seed(std::uint64_t base, std::size_t sigma_index, std::size_t tau_index,
                                std::size_t trial) {
  return derive_seed(base, {sigma_index, tau_index, trial});
}

namespace detail {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

// Sample standard deviation; 0 for fewer than two values.
inline MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd r;
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return r;
}

}  // namespace detail

/// One row per (sigma, tau_factor, scheme), ordered sigma asc, tau asc, then
/// MAC, P2P, ideal. Failed trials only count toward trials_failed.
inline std::vector<SummaryRow> summarize_table(const std::vector<TrialRecord>& trials) {
  using Key = std::tuple<double, double, Scheme>;
  std::map<Key, std::vector<const TrialRecord*>> groups;
  for (const auto& t : trials) groups[{t.sigma, t.tau_factor, t.scheme}].push_back(&t);

  std::vector<SummaryRow> rows;
  for (const auto& [key, members] : groups) {
    SummaryRow row;
    std::tie(row.sigma, row.tau_factor, row.scheme) = key;
    std::vector<double> slots, final_m, best_m;
    for (const TrialRecord* t : members) {
      if (!t->ok()) {
        ++row.trials_failed;
        continue;
      }
      ++row.trials_ok;
      slots.push_back(static_cast<double>(t->slots));
      if (t->final_metric) final_m.push_back(*t->final_metric);
      if (t->best_metric) best_m.push_back(*t->best_metric);
    }
    const auto s = detail::mean_std(slots);
    row.t_mean = s.mean;
    row.t_std = s.std;
    if (!final_m.empty()) {
      const auto f = detail::mean_std(final_m);
      row.acc_final_mean = f.mean;
      row.acc_final_std = f.std;
    }
    if (!best_m.empty()) row.acc_best_mean = detail::mean_std(best_m).mean;
    rows.push_back(row);
  }
  return rows;
}

/// Builds the task selected by the config. Logistic tasks read MNIST from
/// mnist_dir or $AIRDSGD_MNIST_DIR.
inline std::shared_ptr<const Task> make_task(const ExperimentConfig& c) {
  if (c.task == "quadratic") {
    return std::make_shared<QuadraticTask>(
        QuadraticTask::random(c.n, c.dim, derive_seed(c.seed, {0x7A5C}), c.gradient_noise));
  }
  std::string dir = c.mnist_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv(std::string(mnist_env_var).c_str())) dir = env;
  }
  if (dir.empty()) {
    throw ConfigError("mnist_dir", "logistic task needs mnist_dir or $" + std::string(mnist_env_var));
  }
  MnistSplit split = load_mnist_dir(dir, c.train_samples, c.test_samples);
  auto parts = partition_iid(split.train, c.n, derive_seed(c.seed, {0xDA7A}));
  LogisticTask::Options opt;
  opt.l2 = c.l2;
  opt.batch = c.batch;
  auto test = std::make_shared<const Dataset>(std::move(split.test));
  return std::make_shared<LogisticTask>(split.train, parts, std::move(test), opt);
}

/// Runs every (sigma, tau_factor, trial) job; within a job all schemes share
/// the topology, mixing matrix and DSGD seed.
inline ExperimentResult run_experiment(const ExperimentConfig& c, std::shared_ptr<const Task> task = nullptr) {
  validate_config(c);
  if (!task) task = make_task(c);
  if (task->node_count() != c.n) throw ConfigError("n", "does not match the task's node count");

  const ColoringPolicy policy =
      c.coloring == "degree" ? ColoringPolicy::largest_degree_first : ColoringPolicy::saturation_first;
  DsgdConfig dcfg;
  dcfg.learning_rate = c.learning_rate;
  dcfg.learning_rate_decay = c.learning_rate_decay;
  dcfg.iterations = c.iterations;
  dcfg.channel.power_limit = c.power;
  dcfg.channel.noise_std = c.noise_std;
  dcfg.channel.sub_threshold_interference = c.interference;
  dcfg.norm_bound = c.norm_bound;
  dcfg.eval_interval = c.eval_interval;
  dcfg.track_disagreement = c.track_disagreement;

  struct Job {
    std::size_t a, b, k;
  };
  std::vector<Job> jobs;
  for (std::size_t a = 0; a < c.sigma.size(); ++a) {
    for (std::size_t b = 0; b < c.tau_factor.size(); ++b) {
      for (std::size_t k = 0; k < c.trials; ++k) jobs.push_back({a, b, k});
    }
  }
  std::vector<std::vector<TrialRecord>> results(jobs.size());

  auto run_job = [&](std::size_t idx) {
    const Job& job = jobs[idx];
    const double sigma = c.sigma[job.a];
    const double tf = c.tau_factor[job.b];
    const std::uint64_t seed = trial_seed(c.seed, job.a, job.b, job.k);
    std::vector<TrialRecord>& out = results[idx];
    for (Scheme s : c.schemes) {
      TrialRecord r;
      r.sigma = sigma;
      r.tau_factor = tf;
      r.sigma_index = job.a;
      r.tau_index = job.b;
      r.trial = job.k;
      r.scheme = s;
      r.seed = seed;
      out.push_back(std::move(r));
    }
    auto fail_all = [&](const std::string& kind, const std::string& msg) {
      for (auto& r : out) {
        r.status = kind;
        r.message = msg;
      }
    };

    std::optional<NetworkInstance> net;
    try {
      net = sample_connected_topology(c.n, sigma, tf * sigma, seed, c.max_attempts);
    } catch (const TopologyGenerationFailure& e) {
      fail_all("topology-generation-failure", e.what());
      return;
    }
    const MixingMatrix mixing = laplacian_mixing(net->topology);
    const std::uint64_t run_seed = derive_seed(seed, {0xD5});

    for (auto& r : out) {
      r.edges = net->topology.edge_count();
      r.d_max = net->topology.d_max;
      r.attempts = net->attempts;
      Schedule schedule;
      if (r.scheme != Scheme::ideal) {
        schedule = build_schedule(r.scheme, net->topology, policy);
        r.slots = schedule.length();
      }
      try {
        TrainLog log = run_dsgd(*task, net->gains, net->topology, mixing, schedule, r.scheme, dcfg, run_seed);
        r.final_metric = log.final_metric;
        r.best_metric = log.best_metric;
        if (c.traces) r.records = std::move(log.records);
      } catch (const NumericalDivergence& e) {
        r.status = "numerical-divergence";
        r.message = e.what();
      } catch (const PowerBoundViolation& e) {
        r.status = "power-bound-violation";
        r.message = e.what();
      }
    }
  };

  const std::size_t workers = std::min<std::size_t>(c.workers, std::max<std::size_t>(jobs.size(), 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run_job(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
          try {
            run_job(i);
          } catch (...) {
            std::lock_guard lock(err_mutex);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  ExperimentResult res;
  res.metric_name = task->metric_name();
  for (auto& group : results) {
    for (auto& r : group) res.trials.push_back(std::move(r));
  }
  res.summary = summarize_table(res.trials);
  return res;
}

// ---------------------------------------------------------------------------
// Output

inline std::string scenario_id(double sigma, double tau_factor, Scheme s) {
  return "sigma" + detail::format_double(sigma) + "_tau" + detail::format_double(tau_factor) + "_" +
         std::string(to_string(s));
}

namespace detail {

inline std::string opt_str(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError(p.string() + ": cannot create");
  return out;
}

}  // namespace detail

inline void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  using detail::format_double;
  using detail::opt_str;
  out << "sigma,tau_factor,scheme,trials_ok,trials_failed,T_mean,T_std,acc_final_mean,acc_final_std,"
         "acc_best_mean\n";
  for (const auto& r : rows) {
    out << format_double(r.sigma) << ',' << format_double(r.tau_factor) << ',' << to_string(r.scheme)
        << ',' << r.trials_ok << ',' << r.trials_failed << ',' << format_double(r.t_mean) << ','
        << format_double(r.t_std) << ',' << opt_str(r.acc_final_mean) << ',' << opt_str(r.acc_final_std)
        << ',' << opt_str(r.acc_best_mean) << '\n';
  }
}

inline void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& trials) {
  out << "sigma,tau_factor,scheme,trial,seed,status,T,edges,d_max,attempts,final_metric,best_metric\n";
  for (const auto& t : trials) {
    out << detail::format_double(t.sigma) << ',' << detail::format_double(t.tau_factor) << ','
        << to_string(t.scheme) << ',' << t.trial << ',' << t.seed << ',' << t.status << ',' << t.slots
        << ',' << t.edges << ',' << t.d_max << ',' << t.attempts << ',' << detail::opt_str(t.final_metric)
        << ',' << detail::opt_str(t.best_metric) << '\n';
  }
}

/// Writes summary.csv, trials.csv, traces/<scenario>.csv and meta.json.
inline void write_experiment_outputs(const ExperimentResult& res, const ExperimentConfig& c,
                                     const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    auto out = detail::open_out(dir / "summary.csv");
    write_summary_csv(out, res.summary);
  }
  {
    auto out = detail::open_out(dir / "trials.csv");
    write_trials_csv(out, res.trials);
  }
  if (c.traces) {
    fs::create_directories(dir / "traces");
    std::map<std::string, std::vector<const TrialRecord*>> by_scenario;
    for (const auto& t : res.trials) by_scenario[scenario_id(t.sigma, t.tau_factor, t.scheme)].push_back(&t);
    for (const auto& [id, members] : by_scenario) {
      auto out = detail::open_out(dir / "traces" / (id + ".csv"));
      out << "scenario,trial,iteration,max_disagreement,consensus_distance,test_metric\n";
      for (const TrialRecord* t : members) {
        for (const auto& rec : t->records) {
          out << id << ',' << t->trial << ',' << rec.iteration << ',' << detail::opt_str(rec.max_disagreement)
              << ',' << detail::format_double(rec.consensus_distance) << ',' << detail::opt_str(rec.test_metric)
              << '\n';
        }
      }
    }
  }
  nlohmann::json meta;
  meta["version"] = std::string(version);
  meta["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                          "." + std::to_string(EIGEN_MINOR_VERSION);
  meta["config"] = config_to_json(c);
  meta["metric"] = res.metric_name;
  nlohmann::json seeds = nlohmann::json::array();
  for (std::size_t a = 0; a < c.sigma.size(); ++a) {
    for (std::size_t b = 0; b < c.tau_factor.size(); ++b) {
      for (std::size_t k = 0; k < c.trials; ++k) {
        seeds.push_back({{"sigma", c.sigma[a]}, {"tau_factor", c.tau_factor[b]}, {"trial", k},
                         {"seed", trial_seed(c.seed, a, b, k)}});
      }
    }
  }
  meta["trial_seeds"] = std::move(seeds);
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& t : res.trials) {
    if (!t.ok()) {
      failures.push_back({{"scenario", scenario_id(t.sigma, t.tau_factor, t.scheme)},
                          {"trial", t.trial},
                          {"status", t.status},
                          {"message", t.message}});
    }
  }
  meta["failures"] = std::move(failures);
  auto out = detail::open_out(dir / "meta.json");
  out << meta.dump(2) << '\n';
}

}  // namespace airdsgd
