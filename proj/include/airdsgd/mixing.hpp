#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "airdsgd/errors.hpp"
#include "airdsgd/topology.hpp"

namespace airdsgd {

/// Consensus weights: entry (i, j) is the share of node j's model in node i's
/// post-consensus estimate.
struct MixingMatrix {
  Eigen::MatrixXd weights;

  std::size_t size() const { return static_cast<std::size_t>(weights.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
};

/// I - (D - A) / (d_max + 1). Symmetric and doubly stochastic, with support
/// equal to the adjacency plus the diagonal.
inline MixingMatrix laplacian_mixing(const Topology& topology) {
  if (!is_connected(topology)) {
    throw InvalidTopology("laplacian_mixing: topology is disconnected");
  }
  const auto n = static_cast<Eigen::Index>(topology.n);
  const double scale = 1.0 / static_cast<double>(topology.d_max + 1);
  MixingMatrix m;
  m.weights = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& nbrs = topology.neighbors[static_cast<std::size_t>(i)];
    for (std::size_t j : nbrs) m.weights(i, static_cast<Eigen::Index>(j)) = scale;
    m.weights(i, i) = 1.0 - static_cast<double>(nbrs.size()) * scale;
  }
  return m;
}

struct StochasticityReport {
  double max_row_deviation = 0.0;
  double max_column_deviation = 0.0;
  double min_entry = 0.0;
  // max |w_ij - w_ji|
  double asymmetry = 0.0;
  bool passed = false;
};

inline StochasticityReport verify_doubly_stochastic(const MixingMatrix& m, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("verify_doubly_stochastic: tol must be positive");
  StochasticityReport r;
  const Eigen::MatrixXd& w = m.weights;
  if (w.size() == 0) {
    r.passed = w.rows() == w.cols();
    return r;
  }
  r.max_row_deviation = (w.rowwise().sum().array() - 1.0).abs().maxCoeff();
  r.max_column_deviation = (w.colwise().sum().array() - 1.0).abs().maxCoeff();
  r.min_entry = w.minCoeff();
  r.asymmetry = w.rows() == w.cols() ? (w - w.transpose()).cwiseAbs().maxCoeff()
                                     : std::numeric_limits<double>::infinity();
  r.passed = w.rows() == w.cols() && r.max_row_deviation <= tol &&
             r.max_column_deviation <= tol && r.min_entry >= 0.0 && r.asymmetry <= tol;
  return r;
}

/// 1 - |lambda_2|, with lambda_2 the second-largest eigenvalue in magnitude.
/// Diagnostic only.
inline double spectral_gap(const MixingMatrix& m) {
  if (m.size() <= 1) return 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.weights, Eigen::EigenvaluesOnly);
  std::vector<double> mags(static_cast<std::size_t>(solver.eigenvalues().size()));
  for (std::size_t k = 0; k < mags.size(); ++k) {
    mags[k] = std::abs(solver.eigenvalues()(static_cast<Eigen::Index>(k)));
  }
  std::sort(mags.begin(), mags.end(), std::greater<>());
  return 1.0 - mags[1];
}

}  // namespace airdsgd
