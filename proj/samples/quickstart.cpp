// Samples one network, schedules it both ways and compares the noise each
// scheme adds per consensus round.

#include <cstdio>
#include <numeric>

#include "airdsgd/airdsgd.hpp"

int main() {
  using namespace airdsgd;

  const auto net = sample_connected_topology(/*n=*/20, /*sigma=*/2.0, /*tau=*/1.2 * 2.0, /*seed=*/7);
  const MixingMatrix mixing = laplacian_mixing(net.topology);
  std::printf("edges=%zu d_max=%zu spectral_gap=%.4f\n", net.topology.edge_count(), net.topology.d_max,
              spectral_gap(mixing));

  ChannelConfig channel;
  for (Scheme s : {Scheme::mac, Scheme::p2p}) {
    const Schedule schedule = build_schedule(s, net.topology);
    const auto noise = effective_noise_variance(s, net.gains, net.topology, mixing, channel, 1.0);
    const double mean = std::accumulate(noise.begin(), noise.end(), 0.0) / static_cast<double>(noise.size());
    std::printf("%-4s T=%-3zu violations=%zu mean_noise_var=%.5f\n", std::string(to_string(s)).c_str(),
                schedule.length(), validate_schedule(schedule, net.topology).size(), mean);
  }

  const auto task = quadratic_task(20, 5, 11);
  DsgdConfig cfg;
  cfg.iterations = 200;
  cfg.channel.noise_std = 0.0;
  const Schedule schedule = build_schedule(Scheme::mac, net.topology);
  const TrainLog log = run_dsgd(task, net.gains, net.topology, mixing, schedule, Scheme::mac, cfg, 3);
  std::printf("noiseless MAC run: final consensus distance %.3g, optimality gap %.3g\n",
              log.records.back().consensus_distance, *log.final_metric);
  return 0;
}
