#include <gtest/gtest.h>

#include <cmath>

#include "airdsgd/airsim.hpp"

namespace airdsgd {
namespace {

ChannelGains unit_gains(const Topology& t) {
  ChannelGains g;
  g.n = t.n;
  g.gains = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(t.n), static_cast<Eigen::Index>(t.n));
  g.gains.diagonal().setZero();
  return g;
}

Eigen::MatrixXd round(Scheme s, const Eigen::MatrixXd& x, const Schedule& sched, const ChannelGains& g,
                      const MixingMatrix& m, const ChannelConfig& cfg, const ScalingPlan& plan, Engine& rng,
                      RoundStats* stats = nullptr) {
  return s == Scheme::p2p ? p2p_round(x, sched, g, m, cfg, plan, rng, stats)
                          : mac_round(x, sched, g, m, cfg, plan, rng, stats);
}

// Per-node output variance over rounds of an all-zero state, pooled over
// components.
std::vector<double> monte_carlo_variance(Scheme s, const ChannelGains& g, const Topology& t,
                                         const MixingMatrix& m, const ChannelConfig& cfg, double bound,
                                         std::size_t dim, std::size_t rounds, std::uint64_t seed) {
  const Schedule sched = build_schedule(s, t);
  const ScalingPlan plan = make_scaling_plan(sched, g, m, cfg, bound);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t.n), static_cast<Eigen::Index>(dim));
  Engine rng = make_engine(seed);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(t.n));
  Eigen::VectorXd sq = sum;
  for (std::size_t r = 0; r < rounds; ++r) {
    const Eigen::MatrixXd out = round(s, zero, sched, g, m, cfg, plan, rng);
    sum += out.rowwise().sum();
    sq += out.array().square().matrix().rowwise().sum();
  }
  const double count = static_cast<double>(rounds * dim);
  std::vector<double> v(t.n);
  for (std::size_t i = 0; i < t.n; ++i) {
    const double mean = sum(static_cast<Eigen::Index>(i)) / count;
    v[i] = sq(static_cast<Eigen::Index>(i)) / count - mean * mean;
  }
  return v;
}

const Topology path3 = make_topology(3, {{0, 1}, {1, 2}});

TEST(IdealRound, PathOfThree) {
  const auto m = laplacian_mixing(path3);
  Eigen::MatrixXd x(3, 1);
  x << 0, 3, 6;
  const Eigen::MatrixXd y = ideal_round(x, m);
  EXPECT_NEAR(y(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(y(1, 0), 3.0, 1e-15);
  EXPECT_NEAR(y(2, 0), 5.0, 1e-15);
}

TEST(Rounds, NoiselessEqualsIdeal) {
  ChannelConfig cfg;
  cfg.noise_std = 0.0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto net = sample_connected_topology(12, 2.0, 2.4, seed);
    const auto m = laplacian_mixing(net.topology);
    Engine rng = make_engine(seed);
    Eigen::MatrixXd x(12, 4);
    for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = standard_normal(rng);
    const double bound = x.rowwise().norm().maxCoeff();
    const Eigen::MatrixXd expected = ideal_round(x, m);
    for (Scheme s : {Scheme::mac, Scheme::p2p}) {
      const auto sched = build_schedule(s, net.topology);
      const auto plan = make_scaling_plan(sched, net.gains, m, cfg, bound);
      EXPECT_LE((round(s, x, sched, net.gains, m, cfg, plan, rng) - expected).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LE((composite_weights(sched, plan, net.gains, m) - m.weights).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(Rounds, TransmitPowerWithinLimit) {
  ChannelConfig cfg;
  cfg.power_limit = 2.5;
  const auto net = sample_connected_topology(15, 2.0, 2.0, 9);
  const auto m = laplacian_mixing(net.topology);
  Engine rng = make_engine(1);
  Eigen::MatrixXd x(15, 3);
  for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = standard_normal(rng);
  x.rowwise().normalize();  // every node sits on the bound
  for (Scheme s : {Scheme::mac, Scheme::p2p}) {
    const auto sched = build_schedule(s, net.topology);
    const auto plan = make_scaling_plan(sched, net.gains, m, cfg, 1.0);
    RoundStats stats;
    round(s, x, sched, net.gains, m, cfg, plan, rng, &stats);
    EXPECT_LE(stats.max_tx_power, cfg.power_limit * (1.0 + 1e-12));
    EXPECT_EQ(stats.transmissions, 2 * net.topology.edge_count());
    if (s == Scheme::p2p) {
      EXPECT_NEAR(stats.max_tx_power, cfg.power_limit, 1e-12);
    }
  }
}

TEST(Rounds, NormBoundEnforced) {
  const auto m = laplacian_mixing(path3);
  const auto g = unit_gains(path3);
  ChannelConfig cfg;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(3, 2);
  x(1, 0) = 1.5;
  Engine rng = make_engine(2);
  for (Scheme s : {Scheme::mac, Scheme::p2p}) {
    const auto sched = build_schedule(s, path3);
    const auto plan = make_scaling_plan(sched, g, m, cfg, 1.0);
    EXPECT_THROW(round(s, x, sched, g, m, cfg, plan, rng), PowerBoundViolation);
  }
}

TEST(Rounds, SchemeMismatchRejected) {
  const auto m = laplacian_mixing(path3);
  const auto g = unit_gains(path3);
  const auto sched = build_schedule(Scheme::mac, path3);
  const auto plan = make_scaling_plan(sched, g, m, ChannelConfig{}, 1.0);
  Engine rng = make_engine(2);
  EXPECT_THROW(p2p_round(Eigen::MatrixXd::Zero(3, 1), sched, g, m, ChannelConfig{}, plan, rng), InvalidArgument);
}

TEST(NoiseVariance, PathCenterClosedForm) {
  // Unit gains, B = P = 1: center weights are 1/3 for both neighbors.
  const auto m = laplacian_mixing(path3);
  const auto g = unit_gains(path3);
  const ChannelConfig cfg;
  const auto p2p = effective_noise_variance(Scheme::p2p, g, path3, m, cfg, 1.0);
  const auto mac = effective_noise_variance(Scheme::mac, g, path3, m, cfg, 1.0);
  EXPECT_NEAR(p2p[1], 2.0 / 9.0, 1e-15);
  EXPECT_NEAR(mac[1], 1.0 / 9.0, 1e-15);
  EXPECT_NEAR(p2p[0], 1.0 / 9.0, 1e-15);  // degree one: identical
  EXPECT_NEAR(mac[0], 1.0 / 9.0, 1e-15);

  const auto v_p2p = monte_carlo_variance(Scheme::p2p, g, path3, m, cfg, 1.0, 10, 10000, 5);
  const auto v_mac = monte_carlo_variance(Scheme::mac, g, path3, m, cfg, 1.0, 10, 10000, 6);
  EXPECT_NEAR(v_p2p[1] / p2p[1], 1.0, 0.02);
  EXPECT_NEAR(v_mac[1] / mac[1], 1.0, 0.02);
}

TEST(NoiseVariance, ScalesWithNoisePowerAndBound) {
  const auto m = laplacian_mixing(path3);
  const auto g = unit_gains(path3);
  ChannelConfig cfg;
  cfg.noise_std = 2.0;
  cfg.power_limit = 4.0;
  const auto v = effective_noise_variance(Scheme::p2p, g, path3, m, cfg, 3.0);
  EXPECT_NEAR(v[1], (4.0 * 9.0 / 4.0) * 2.0 / 9.0, 1e-14);
  EXPECT_EQ(effective_noise_variance(Scheme::ideal, g, path3, m, cfg, 3.0), std::vector<double>(3, 0.0));
}

TEST(NoiseVariance, MacNeverWorseThanP2P) {
  const ChannelConfig cfg;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto net = sample_connected_topology(20, 2.0, 2.4, seed);
    const auto m = laplacian_mixing(net.topology);
    const auto p2p = effective_noise_variance(Scheme::p2p, net.gains, net.topology, m, cfg, 1.0);
    const auto mac = effective_noise_variance(Scheme::mac, net.gains, net.topology, m, cfg, 1.0);
    for (std::size_t i = 0; i < 20; ++i) {
      if (net.topology.degrees[i] >= 2) {
        EXPECT_LT(mac[i], p2p[i]);
      } else {
        EXPECT_DOUBLE_EQ(mac[i], p2p[i]);
      }
    }
  }
}

TEST(NoiseVariance, MonteCarloMatchesOnRandomNetwork) {
  const ChannelConfig cfg;
  const auto net = sample_connected_topology(8, 2.0, 2.4, 21);
  const auto m = laplacian_mixing(net.topology);
  for (Scheme s : {Scheme::mac, Scheme::p2p}) {
    const auto expected = effective_noise_variance(s, net.gains, net.topology, m, cfg, 1.0);
    const auto measured = monte_carlo_variance(s, net.gains, net.topology, m, cfg, 1.0, 10, 10000, 77);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(measured[i] / expected[i], 1.0, 0.02) << "node " << i;
  }
}

TEST(Interference, LeakageChangesMacOutput) {
  // Unit gains everywhere, so any same-slot transmitter that is not a
  // neighbor of the receiver leaks in once leakage is on.
  const Topology t = make_topology(4, {{0, 1}, {1, 2}, {2, 3}});
  const auto m = laplacian_mixing(t);
  const auto g = unit_gains(t);
  ChannelConfig cfg;
  cfg.noise_std = 0.0;
  Eigen::MatrixXd x(4, 1);
  x << 0.1, 0.2, 0.3, 0.4;
  const auto sched = build_schedule(Scheme::mac, t);
  const auto plan = make_scaling_plan(sched, g, m, cfg, 1.0);
  Engine rng = make_engine(3);
  EXPECT_LE((mac_round(x, sched, g, m, cfg, plan, rng) - ideal_round(x, m)).norm(), 1e-14);
  cfg.sub_threshold_interference = true;
  EXPECT_GT((mac_round(x, sched, g, m, cfg, plan, rng) - ideal_round(x, m)).norm(), 1e-3);
}

}  // namespace
}  // namespace airdsgd
