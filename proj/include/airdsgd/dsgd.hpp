#pragma once

// The decentralized SGD loop. Each iteration:
//   1. every node draws a stochastic gradient at its current model,
//   2. the models go through one consensus round over the simulated channel,
//   3. each node steps from its consensus estimate: theta <- consensus - alpha * g.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "airdsgd/airsim.hpp"
#include "airdsgd/errors.hpp"
#include "airdsgd/mixing.hpp"
#include "airdsgd/random.hpp"
#include "airdsgd/scheduling.hpp"
#include "airdsgd/tasks.hpp"
#include "airdsgd/topology.hpp"

namespace airdsgd {

struct DsgdConfig {
  double learning_rate = 0.1;
  // alpha_t = learning_rate / (1 + learning_rate_decay * t); 0 keeps it constant.
  double learning_rate_decay = 0.0;
  std::size_t iterations = 250;
  ChannelConfig channel;
  // Agreed bound on every ||theta_i||. 0 selects 10x the largest initial norm.
  double norm_bound = 0.0;
  std::size_t eval_interval = 10;
  bool track_disagreement = true;
};

/// Models of all nodes (one per row) with the running sums behind
/// theta_hat_i(t) = (1/t) sum_{l <= t} theta_i(l).
struct NodeStates {
  Eigen::MatrixXd theta;
  Eigen::MatrixXd running_sum;
  std::size_t step_count = 0;

  explicit NodeStates(Eigen::MatrixXd initial)
      : theta(std::move(initial)), running_sum(Eigen::MatrixXd::Zero(theta.rows(), theta.cols())) {}

  void accumulate() {
    running_sum += theta;
    ++step_count;
  }

  // Falls back to the current models before the first update.
  Eigen::MatrixXd running_average() const {
    if (step_count == 0) return theta;
    return running_sum / static_cast<double>(step_count);
  }
};

/// max_i ||theta_i - mean_j theta_j||
inline double consensus_distance(const Eigen::MatrixXd& states) {
  if (states.rows() == 0) throw InvalidArgument("consensus_distance: no nodes");
  const Eigen::RowVectorXd mean = states.colwise().mean();
  return (states.rowwise() - mean).rowwise().norm().maxCoeff();
}

/// max_i |f(theta_hat_i) - f(theta*)| over the running averages.
inline double max_disagreement(const NodeStates& states, const Task& task) {
  const std::optional<double> ref = task.optimal_loss();
  if (!ref) throw UnsupportedMetric(task.name() + " has no reference optimum");
  const Eigen::MatrixXd avg = states.running_average();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < avg.rows(); ++i) {
    worst = std::max(worst, std::abs(task.loss(avg.row(i).transpose()) - *ref));
  }
  return worst;
}

struct IterationRecord {
  std::size_t iteration = 0;
  std::optional<double> max_disagreement;
  double consensus_distance = 0.0;
  std::optional<double> test_metric;  // mean over nodes; eval iterations only
};

struct TrainLog {
  Scheme scheme = Scheme::ideal;
  std::uint64_t seed = 0;
  std::size_t slots = 0;  // T
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t d_max = 0;
  double norm_bound = 0.0;
  std::optional<double> reference_loss;
  std::vector<IterationRecord> records;
  std::optional<double> final_metric;
  std::optional<double> best_metric;
  Eigen::MatrixXd final_states;
};

using IterationObserver = std::function<void(std::size_t iteration, const Eigen::MatrixXd& states)>;

namespace detail {

inline double mean_metric(const Task& task, const Eigen::MatrixXd& states, bool& available) {
  double acc = 0.0;
  available = true;
  for (Eigen::Index i = 0; i < states.rows(); ++i) {
    const auto m = task.evaluate(states.row(i).transpose());
    if (!m) {
      available = false;
      return 0.0;
    }
    acc += *m;
  }
  return acc / static_cast<double>(states.rows());
}

}  // namespace detail

/// Runs `cfg.iterations` DSGD iterations. Gradient sampling and channel noise
/// use separate streams derived from `seed`, so runs of different schemes
/// with one seed see identical minibatches.
///
/// `schedule` is ignored for Scheme::ideal.
inline TrainLog run_dsgd(const Task& task, const ChannelGains& gains, const Topology& topology,
                         const MixingMatrix& mixing, const Schedule& schedule, Scheme scheme,
                         const DsgdConfig& cfg, std::uint64_t seed,
                         const IterationObserver& observer = {}) {
  const std::size_t n = topology.n;
  if (task.node_count() != n || mixing.size() != n || gains.n != n) {
    throw InvalidArgument("run_dsgd: task, gains, topology and mixing disagree on node count");
  }
  if (scheme != Scheme::ideal && schedule.scheme != scheme) {
    throw InvalidArgument("run_dsgd: schedule built for " + std::string(to_string(schedule.scheme)) +
                          ", run requested " + std::string(to_string(scheme)));
  }
  if (cfg.eval_interval == 0) throw InvalidArgument("run_dsgd: eval_interval must be >= 1");

  Engine init_rng = make_engine(derive_seed(seed, {0}));
  Engine grad_rng = make_engine(derive_seed(seed, {1}));
  Engine noise_rng = make_engine(derive_seed(seed, {2}));

  NodeStates states(task.initial_states(init_rng));
  if (static_cast<std::size_t>(states.theta.rows()) != n ||
      static_cast<std::size_t>(states.theta.cols()) != task.dimension()) {
    throw InvalidArgument("run_dsgd: task produced initial states of the wrong shape");
  }

  TrainLog log;
  log.scheme = scheme;
  log.seed = seed;
  log.slots = scheme == Scheme::ideal ? 0 : schedule.length();
  log.nodes = n;
  log.edges = topology.edge_count();
  log.d_max = topology.d_max;

  double bound = cfg.norm_bound;
  if (bound <= 0.0) {
    bound = 10.0 * states.theta.rowwise().norm().maxCoeff();
    if (!(bound > 0.0)) {
      throw InvalidArgument("run_dsgd: all initial states are zero; set norm_bound explicitly");
    }
  }
  log.norm_bound = bound;

  ScalingPlan plan;
  if (scheme != Scheme::ideal) plan = make_scaling_plan(schedule, gains, mixing, cfg.channel, bound);

  const bool want_disagreement = cfg.track_disagreement && task.optimal_loss().has_value();
  if (want_disagreement) log.reference_loss = task.optimal_loss();

  const auto rows = static_cast<Eigen::Index>(n);
  const auto dim = static_cast<Eigen::Index>(task.dimension());
  Eigen::MatrixXd grads(rows, dim);
  log.records.reserve(cfg.iterations);

  for (std::size_t t = 0; t < cfg.iterations; ++t) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      grads.row(i) = task.stochastic_gradient(static_cast<std::size_t>(i),
                                              states.theta.row(i).transpose(), grad_rng).transpose();
    }

    Eigen::MatrixXd consensus;
    switch (scheme) {
      case Scheme::ideal: consensus = ideal_round(states.theta, mixing); break;
      case Scheme::p2p:
        consensus = p2p_round(states.theta, schedule, gains, mixing, cfg.channel, plan, noise_rng);
        break;
      case Scheme::mac:
        consensus = mac_round(states.theta, schedule, gains, mixing, cfg.channel, plan, noise_rng);
        break;
    }

    const double alpha = cfg.learning_rate / (1.0 + cfg.learning_rate_decay * static_cast<double>(t));
    states.theta = consensus - alpha * grads;
    if (!states.theta.allFinite()) {
      throw NumericalDivergence(t + 1, "run_dsgd: non-finite state at iteration " + std::to_string(t + 1));
    }
    states.accumulate();

    IterationRecord rec;
    rec.iteration = t + 1;
    rec.consensus_distance = consensus_distance(states.theta);
    const bool eval = (t + 1) % cfg.eval_interval == 0 || t + 1 == cfg.iterations;
    if (eval) {
      bool available = false;
      const double m = detail::mean_metric(task, states.theta, available);
      if (available) {
        rec.test_metric = m;
        log.final_metric = m;
        if (!log.best_metric ||
            (task.higher_metric_is_better() ? m > *log.best_metric : m < *log.best_metric)) {
          log.best_metric = m;
        }
      }
      if (want_disagreement) rec.max_disagreement = max_disagreement(states, task);
    }
    log.records.push_back(rec);
    if (observer) observer(t + 1, states.theta);
  }

  log.final_states = std::move(states.theta);
  return log;
}

}  // namespace airdsgd
