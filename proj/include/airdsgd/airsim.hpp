#pragma once

// One consensus round over the analog channel.
//
// Every node knows its own channel gains and the agreed norm bound B, so
// transmitters can pre-scale and receivers can undo the scaling:
//
//   P2P   tx j -> rx i sends x = (sqrt(P) / B) theta_j and the receiver
//         weights what it hears by p~_ij B / (h_ij sqrt(P)).
//   MAC   all neighbors j of receiver r send x_j = gamma_r (p~_rj / h_rj) theta_j
//         at once; r hears gamma_r sum_j p~_rj theta_j + noise and divides by
//         gamma_r. gamma_r = sqrt(P) min_j h_rj / (p~_rj B) is the largest
//         common gain that keeps every ||x_j||^2 <= P.
//
// With zero noise both reduce to theta <- P~ theta.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "airdsgd/errors.hpp"
#include "airdsgd/mixing.hpp"
#include "airdsgd/random.hpp"
#include "airdsgd/scheduling.hpp"
#include "airdsgd/topology.hpp"

namespace airdsgd {

struct ChannelConfig {
  double power_limit = 1.0;  // P
  double noise_std = 1.0;    // per-component std of the receiver noise
  // Same-slot transmissions leak into non-neighbor receivers through the
  // full gain matrix.
  bool sub_threshold_interference = false;
};

struct LinkScaling {
  double tx_gain = 0.0;         // w
  double combine_weight = 0.0;  // p
};

/// Transmit and combining coefficients for one schedule, aligned with
/// schedule.slots[t].links. For MAC, `alignment[t][q]` is gamma for
/// schedule.slots[t].receivers[q].
struct ScalingPlan {
  double norm_bound = 1.0;
  double power_limit = 1.0;
  std::vector<std::vector<LinkScaling>> links;
  std::vector<std::vector<double>> alignment;
};

inline ScalingPlan make_scaling_plan(const Schedule& schedule, const ChannelGains& gains,
                                     const MixingMatrix& mixing, const ChannelConfig& cfg,
                                     double norm_bound) {
  if (!(cfg.power_limit > 0.0)) throw InvalidArgument("power_limit must be positive");
  if (!(norm_bound > 0.0)) throw InvalidArgument("norm_bound must be positive");
  ScalingPlan plan;
  plan.norm_bound = norm_bound;
  plan.power_limit = cfg.power_limit;
  const double root_p = std::sqrt(cfg.power_limit);
  plan.links.resize(schedule.slots.size());
  plan.alignment.resize(schedule.slots.size());

  for (std::size_t t = 0; t < schedule.slots.size(); ++t) {
    const Slot& slot = schedule.slots[t];
    auto& scal = plan.links[t];
    scal.resize(slot.links.size());
    if (schedule.scheme == Scheme::p2p) {
      for (std::size_t k = 0; k < slot.links.size(); ++k) {
        const auto [j, i] = slot.links[k];
        scal[k].tx_gain = root_p / norm_bound;
        scal[k].combine_weight = mixing(i, j) * norm_bound / (gains(i, j) * root_p);
      }
      continue;
    }
    auto& gamma = plan.alignment[t];
    gamma.assign(slot.receivers.size(), 0.0);
    for (std::size_t q = 0; q < slot.receivers.size(); ++q) {
      const std::size_t r = slot.receivers[q];
      double g = std::numeric_limits<double>::infinity();
      for (const auto& l : slot.links) {
        if (l.rx == r) g = std::min(g, root_p * gains(r, l.tx) / (mixing(r, l.tx) * norm_bound));
      }
      gamma[q] = std::isfinite(g) ? g : 0.0;
    }
    for (std::size_t k = 0; k < slot.links.size(); ++k) {
      const auto [j, r] = slot.links[k];
      const auto q = static_cast<std::size_t>(
          std::find(slot.receivers.begin(), slot.receivers.end(), r) - slot.receivers.begin());
      if (q == slot.receivers.size()) throw InvalidArgument("MAC link targets an inactive receiver");
      scal[k].tx_gain = gamma[q] * mixing(r, j) / gains(r, j);
      scal[k].combine_weight = 1.0 / gamma[q];
    }
  }
  return plan;
}

/// Realized weights sum_k p_ik h_ij w_jk plus p_ii on the diagonal.
/// Matches the mixing matrix when the plan is consistent.
inline Eigen::MatrixXd composite_weights(const Schedule& schedule, const ScalingPlan& plan,
                                         const ChannelGains& gains, const MixingMatrix& mixing) {
  const auto n = static_cast<Eigen::Index>(mixing.size());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) w(i, i) = mixing.weights(i, i);
  for (std::size_t t = 0; t < schedule.slots.size(); ++t) {
    const auto& slot = schedule.slots[t];
    for (std::size_t k = 0; k < slot.links.size(); ++k) {
      const auto [j, i] = slot.links[k];
      const auto& s = plan.links[t][k];
      w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
          s.combine_weight * gains(i, j) * s.tx_gain;
    }
  }
  return w;
}

/// Optional per-round diagnostics.
struct RoundStats {
  double max_tx_power = 0.0;  // max ||x||^2 over all transmissions
  std::size_t transmissions = 0;
};

namespace detail {

inline void check_norm_bound(const Eigen::MatrixXd& states, double bound) {
  const double limit = bound * (1.0 + 1e-12);
  for (Eigen::Index i = 0; i < states.rows(); ++i) {
    const double norm = states.row(i).norm();
    if (!(norm <= limit)) {
      throw PowerBoundViolation("node " + std::to_string(i) + " state norm " + std::to_string(norm) +
                                " exceeds norm bound " + std::to_string(bound));
    }
  }
}

inline Eigen::MatrixXd self_weighted(const Eigen::MatrixXd& states, const MixingMatrix& mixing) {
  return mixing.weights.diagonal().asDiagonal() * states;
}

inline void add_noise(Engine& rng, double noise_std, Eigen::VectorXd& buf) {
  if (noise_std > 0.0) {
    fill_normal(rng, std::span<double>(buf.data(), static_cast<std::size_t>(buf.size())), noise_std);
  } else {
    buf.setZero();
  }
}

inline void check_scheme(const Schedule& s, const ScalingPlan& plan, Scheme expected) {
  if (s.scheme != expected) {
    throw InvalidArgument(std::string(to_string(expected)) + " round given a " +
                          std::string(to_string(s.scheme)) + " schedule");
  }
  if (plan.links.size() != s.slots.size()) throw InvalidArgument("scaling plan does not match schedule");
}

}  // namespace detail

/// Noiseless consensus: mixing * states. Rows are nodes.
inline Eigen::MatrixXd ideal_round(const Eigen::MatrixXd& states, const MixingMatrix& mixing) {
  return mixing.weights * states;
}

inline Eigen::MatrixXd p2p_round(const Eigen::MatrixXd& states, const Schedule& schedule,
                                 const ChannelGains& gains, const MixingMatrix& mixing,
                                 const ChannelConfig& cfg, const ScalingPlan& plan, Engine& rng,
                                 RoundStats* stats = nullptr) {
  detail::check_scheme(schedule, plan, Scheme::p2p);
  detail::check_norm_bound(states, plan.norm_bound);
  const Eigen::Index d = states.cols();
  Eigen::MatrixXd out = detail::self_weighted(states, mixing);
  Eigen::VectorXd y(d), noise(d);

  for (std::size_t t = 0; t < schedule.slots.size(); ++t) {
    const auto& slot = schedule.slots[t];
    const auto& scal = plan.links[t];
    for (std::size_t k = 0; k < slot.links.size(); ++k) {
      const auto [j, i] = slot.links[k];
      const auto ji = static_cast<Eigen::Index>(j);
      const auto ii = static_cast<Eigen::Index>(i);
      y = (gains(i, j) * scal[k].tx_gain) * states.row(ji).transpose();
      if (cfg.sub_threshold_interference) {
        for (std::size_t q = 0; q < slot.links.size(); ++q) {
          const std::size_t other = slot.links[q].tx;
          if (other == j) continue;
          y += (gains(i, other) * scal[q].tx_gain) * states.row(static_cast<Eigen::Index>(other)).transpose();
        }
      }
      detail::add_noise(rng, cfg.noise_std, noise);
      y += noise;
      out.row(ii) += scal[k].combine_weight * y.transpose();
      if (stats) {
        const double x = scal[k].tx_gain * states.row(ji).norm();
        stats->max_tx_power = std::max(stats->max_tx_power, x * x);
        ++stats->transmissions;
      }
    }
  }
  return out;
}

inline Eigen::MatrixXd mac_round(const Eigen::MatrixXd& states, const Schedule& schedule,
                                 const ChannelGains& gains, const MixingMatrix& mixing,
                                 const ChannelConfig& cfg, const ScalingPlan& plan, Engine& rng,
                                 RoundStats* stats = nullptr) {
  detail::check_scheme(schedule, plan, Scheme::mac);
  detail::check_norm_bound(states, plan.norm_bound);
  const Eigen::Index d = states.cols();
  Eigen::MatrixXd out = detail::self_weighted(states, mixing);
  Eigen::VectorXd y(d), noise(d);

  for (std::size_t t = 0; t < schedule.slots.size(); ++t) {
    const auto& slot = schedule.slots[t];
    const auto& scal = plan.links[t];
    for (std::size_t q = 0; q < slot.receivers.size(); ++q) {
      const std::size_t r = slot.receivers[q];
      const auto ri = static_cast<Eigen::Index>(r);
      y.setZero();
      bool served = false;
      for (std::size_t k = 0; k < slot.links.size(); ++k) {
        const auto [j, target] = slot.links[k];
        if (target != r && !cfg.sub_threshold_interference) continue;
        if (target == r) served = true;
        y += (gains(r, j) * scal[k].tx_gain) * states.row(static_cast<Eigen::Index>(j)).transpose();
      }
      if (!served) continue;  // isolated node: nothing to combine
      detail::add_noise(rng, cfg.noise_std, noise);
      y += noise;
      out.row(ri) += (1.0 / plan.alignment[t][q]) * y.transpose();
    }
    if (stats) {
      for (std::size_t k = 0; k < slot.links.size(); ++k) {
        const double x = scal[k].tx_gain * states.row(static_cast<Eigen::Index>(slot.links[k].tx)).norm();
        stats->max_tx_power = std::max(stats->max_tx_power, x * x);
        ++stats->transmissions;
      }
    }
  }
  return out;
}

/// Per-component variance of the noise each node adds to its consensus
/// estimate in one round:
///   P2P_i = (s^2 B^2 / P) * sum_{j in N(i)} (p~_ij / h_ij)^2
///   MAC_i = (s^2 B^2 / P) * max_{j in N(i)} (p~_ij / h_ij)^2
inline std::vector<double> effective_noise_variance(Scheme scheme, const ChannelGains& gains,
                                                    const Topology& topology,
                                                    const MixingMatrix& mixing,
                                                    const ChannelConfig& cfg, double norm_bound) {
  std::vector<double> v(topology.n, 0.0);
  if (scheme == Scheme::ideal) return v;
  const double scale = cfg.noise_std * cfg.noise_std * norm_bound * norm_bound / cfg.power_limit;
  for (std::size_t i = 0; i < topology.n; ++i) {
    double acc = 0.0;
    for (std::size_t j : topology.neighbors[i]) {
      const double r = mixing(i, j) / gains(i, j);
      acc = scheme == Scheme::p2p ? acc + r * r : std::max(acc, r * r);
    }
    v[i] = scale * acc;
  }
  return v;
}

}  // namespace airdsgd
