#pragma once

// Learning tasks: per-node losses f_i, stochastic gradients and a test metric.
// The global objective is f = (1/n) sum_i f_i.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "airdsgd/dataset.hpp"
#include "airdsgd/errors.hpp"
#include "airdsgd/random.hpp"

namespace airdsgd {

using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

/// Implementations must be safe to share read-only between threads.
class Task {
 public:
  virtual ~Task() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::size_t node_count() const = 0;

  virtual double local_loss(std::size_t node, const VectorRef& theta) const = 0;
  virtual Eigen::VectorXd local_gradient(std::size_t node, const VectorRef& theta) const = 0;
  virtual Eigen::VectorXd stochastic_gradient(std::size_t node, const VectorRef& theta,
                                              Engine& rng) const = 0;

  virtual double loss(const VectorRef& theta) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < node_count(); ++i) acc += local_loss(i, theta);
    return acc / static_cast<double>(node_count());
  }

  virtual Eigen::VectorXd gradient(const VectorRef& theta) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.size());
    for (std::size_t i = 0; i < node_count(); ++i) g += local_gradient(i, theta);
    return g / static_cast<double>(node_count());
  }

  /// f(theta*), exact or best found. Empty when the task has none.
  virtual std::optional<double> optimal_loss() const { return std::nullopt; }

  /// Test metric for a single model; empty when the task has none.
  virtual std::optional<double> evaluate(const VectorRef& theta) const = 0;
  virtual std::string metric_name() const = 0;
  virtual bool higher_metric_is_better() const = 0;

  /// Starting models, one row per node.
  virtual Eigen::MatrixXd initial_states(Engine& rng) const = 0;
};

/// f_i(theta) = 1/2 ||theta - c_i||^2, optimum at the mean of the centers.
/// Stochastic gradient: (theta - c_i) + xi with xi ~ N(0, s^2 I).
class QuadraticTask final : public Task {
 public:
  QuadraticTask(Eigen::MatrixXd centers, double gradient_noise_std = 0.0)
      : centers_(std::move(centers)), noise_std_(gradient_noise_std) {
    if (centers_.rows() == 0 || centers_.cols() == 0) {
      throw InvalidArgument("QuadraticTask: need at least one node and one dimension");
    }
    optimum_ = centers_.colwise().mean().transpose();
    optimal_loss_ = loss(optimum_);
  }

  /// Centers drawn i.i.d. N(0, center_scale^2) per coordinate.
  static QuadraticTask random(std::size_t n, std::size_t d, std::uint64_t seed,
                              double gradient_noise_std = 0.0, double center_scale = 1.0) {
    if (n == 0 || d == 0) throw InvalidArgument("quadratic_task: n and d must be >= 1");
    Engine rng = make_engine(seed);
    Eigen::MatrixXd c(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      for (Eigen::Index k = 0; k < c.cols(); ++k) c(i, k) = center_scale * standard_normal(rng);
    }
    return QuadraticTask(std::move(c), gradient_noise_std);
  }

  std::string name() const override { return "quadratic"; }
  std::size_t dimension() const override { return static_cast<std::size_t>(centers_.cols()); }
  std::size_t node_count() const override { return static_cast<std::size_t>(centers_.rows()); }

  double local_loss(std::size_t node, const VectorRef& theta) const override {
    return 0.5 * (theta - center(node)).squaredNorm();
  }

  Eigen::VectorXd local_gradient(std::size_t node, const VectorRef& theta) const override {
    return theta - center(node);
  }

  Eigen::VectorXd stochastic_gradient(std::size_t node, const VectorRef& theta,
                                      Engine& rng) const override {
    Eigen::VectorXd g = theta - center(node);
    if (noise_std_ > 0.0) {
      Eigen::VectorXd xi(g.size());
      fill_normal(rng, std::span<double>(xi.data(), static_cast<std::size_t>(xi.size())), noise_std_);
      g += xi;
    }
    return g;
  }

  std::optional<double> optimal_loss() const override { return optimal_loss_; }

  // Optimality gap f(theta) - f(theta*).
  std::optional<double> evaluate(const VectorRef& theta) const override {
    return loss(theta) - optimal_loss_;
  }
  std::string metric_name() const override { return "optimality_gap"; }
  bool higher_metric_is_better() const override { return false; }

  // Same distribution as the centers, so the default norm bound scales with
  // the problem.
  Eigen::MatrixXd initial_states(Engine& rng) const override {
    Eigen::MatrixXd s(centers_.rows(), centers_.cols());
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      for (Eigen::Index k = 0; k < s.cols(); ++k) s(i, k) = standard_normal(rng);
    }
    return s;
  }

  const Eigen::VectorXd& optimum() const { return optimum_; }
  const Eigen::MatrixXd& centers() const { return centers_; }

 private:
  Eigen::VectorXd center(std::size_t node) const {
    return centers_.row(static_cast<Eigen::Index>(node)).transpose();
  }

  Eigen::MatrixXd centers_;
  double noise_std_;
  Eigen::VectorXd optimum_;
  double optimal_loss_ = 0.0;
};

inline QuadraticTask quadratic_task(std::size_t n, std::size_t d, std::uint64_t seed,
                                    double gradient_noise_std = 0.0) {
  return QuadraticTask::random(n, d, seed, gradient_noise_std);
}

/// Multinomial logistic regression with L2 penalty (l2 / 2) ||theta||^2.
///
/// theta is the column-major flattening of a K x (p + 1) matrix whose last
/// column is the bias. Node i owns one partition of the training set and
/// samples minibatches uniformly with replacement from it.
class LogisticTask final : public Task {
 public:
  struct Options {
    double l2 = 1e-4;
    std::size_t batch = 32;
    std::size_t reference_iterations = 300;  // full-batch solver for f(theta*)
  };

  LogisticTask(const Dataset& train, const std::vector<std::vector<std::size_t>>& partitions,
               std::shared_ptr<const Dataset> test, Options opt)
      : test_(std::move(test)), opt_(opt) {
    if (partitions.empty()) throw InvalidPartition("logistic_task: no partitions");
    if (opt_.batch == 0) throw InvalidArgument("logistic_task: batch must be >= 1");
    classes_ = train.class_count;
    if (test_) classes_ = std::max(classes_, test_->class_count);
    features_ = train.feature_count();
    for (std::size_t i = 0; i < partitions.size(); ++i) {
      if (partitions[i].empty()) {
        throw InvalidPartition("logistic_task: partition " + std::to_string(i) + " is empty");
      }
      nodes_.push_back(train.subset(partitions[i]));
    }
    reference_ = std::make_unique<Reference>();
  }

  std::string name() const override { return "logistic"; }
  std::size_t dimension() const override {
    return static_cast<std::size_t>(classes_) * (features_ + 1);
  }
  std::size_t node_count() const override { return nodes_.size(); }
  int class_count() const { return classes_; }

  double local_loss(std::size_t node, const VectorRef& theta) const override {
    return data_loss(nodes_[node], theta) + 0.5 * opt_.l2 * theta.squaredNorm();
  }

  Eigen::VectorXd local_gradient(std::size_t node, const VectorRef& theta) const override {
    const Dataset& ds = nodes_[node];
    return batch_gradient(ds.features, ds.labels, theta);
  }

  Eigen::VectorXd stochastic_gradient(std::size_t node, const VectorRef& theta,
                                      Engine& rng) const override {
    const Dataset& ds = nodes_[node];
    const auto b = static_cast<Eigen::Index>(opt_.batch);
    Eigen::MatrixXd x(b, ds.features.cols());
    std::vector<int> y(opt_.batch);
    for (Eigen::Index k = 0; k < b; ++k) {
      const auto row = uniform_index(rng, ds.size());
      x.row(k) = ds.features.row(static_cast<Eigen::Index>(row));
      y[static_cast<std::size_t>(k)] = ds.labels[row];
    }
    return batch_gradient(x, y, theta);
  }

  std::optional<double> optimal_loss() const override {
    std::call_once(reference_->once, [this] { reference_->value = solve_reference(); });
    return reference_->value;
  }

  // Test accuracy in [0, 1].
  std::optional<double> evaluate(const VectorRef& theta) const override {
    if (!test_ || test_->size() == 0) return std::nullopt;
    const Eigen::MatrixXd scores = logits(test_->features, theta);
    std::size_t correct = 0;
    for (Eigen::Index s = 0; s < scores.rows(); ++s) {
      Eigen::Index best = 0;
      scores.row(s).maxCoeff(&best);
      correct += static_cast<int>(best) == test_->labels[static_cast<std::size_t>(s)];
    }
    return static_cast<double>(correct) / static_cast<double>(test_->size());
  }
  std::string metric_name() const override { return "accuracy"; }
  bool higher_metric_is_better() const override { return true; }

  Eigen::MatrixXd initial_states(Engine&) const override {
    return Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(node_count()),
                                 static_cast<Eigen::Index>(dimension()));
  }

 private:
  struct Reference {
    std::once_flag once;
    double value = 0.0;
  };

  using ParamMap = Eigen::Map<const Eigen::MatrixXd>;

  ParamMap params(const VectorRef& theta) const {
    return ParamMap(theta.data(), classes_, static_cast<Eigen::Index>(features_ + 1));
  }

  // samples x K
  Eigen::MatrixXd logits(const Eigen::MatrixXd& x, const VectorRef& theta) const {
    const ParamMap w = params(theta);
    const auto p = static_cast<Eigen::Index>(features_);
    Eigen::MatrixXd s = x * w.leftCols(p).transpose();
    s.rowwise() += w.col(p).transpose();
    return s;
  }

  // Row-wise softmax in place; returns per-row log-sum-exp.
  static Eigen::VectorXd softmax_rows(Eigen::MatrixXd& s) {
    Eigen::VectorXd lse(s.rows());
    for (Eigen::Index r = 0; r < s.rows(); ++r) {
      const double m = s.row(r).maxCoeff();
      s.row(r) = (s.row(r).array() - m).exp();
      const double z = s.row(r).sum();
      s.row(r) /= z;
      lse(r) = m + std::log(z);
    }
    return lse;
  }

  double data_loss(const Dataset& ds, const VectorRef& theta) const {
    Eigen::MatrixXd s = logits(ds.features, theta);
    double acc = 0.0;
    for (Eigen::Index r = 0; r < s.rows(); ++r) {
      const double m = s.row(r).maxCoeff();
      const double lse = m + std::log((s.row(r).array() - m).exp().sum());
      acc += lse - s(r, ds.labels[static_cast<std::size_t>(r)]);
    }
    return acc / static_cast<double>(s.rows());
  }

  Eigen::VectorXd batch_gradient(const Eigen::MatrixXd& x, const std::vector<int>& y,
                                 const VectorRef& theta) const {
    Eigen::MatrixXd prob = logits(x, theta);
    softmax_rows(prob);
    for (Eigen::Index r = 0; r < prob.rows(); ++r) prob(r, y[static_cast<std::size_t>(r)]) -= 1.0;
    const double inv_m = 1.0 / static_cast<double>(x.rows());
    const auto p = static_cast<Eigen::Index>(features_);
    Eigen::MatrixXd g(classes_, p + 1);
    g.leftCols(p).noalias() = inv_m * prob.transpose() * x;
    g.col(p) = inv_m * prob.colwise().sum().transpose();
    Eigen::VectorXd out = Eigen::Map<Eigen::VectorXd>(g.data(), g.size());
    out += opt_.l2 * theta;
    return out;
  }

  // Nesterov accelerated gradient with step 1/L and gradient restart.
  // L <= max ||[x, 1]||^2 / 2 + l2 bounds the Hessian of the softmax loss.
  double solve_reference() const {
    double max_sq = 0.0;
    for (const auto& ds : nodes_) max_sq = std::max(max_sq, ds.features.rowwise().squaredNorm().maxCoeff());
    const double step = 1.0 / (0.5 * (max_sq + 1.0) + opt_.l2);
    const auto d = static_cast<Eigen::Index>(dimension());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(d), x_prev = x, y = x;
    double t = 1.0;
    for (std::size_t it = 0; it < opt_.reference_iterations; ++it) {
      const Eigen::VectorXd g = gradient(y);
      if (g.norm() <= 1e-8) break;
      x_prev = x;
      x = y - step * g;
      if (g.dot(x - x_prev) > 0.0) {
        t = 1.0;  // restart
        y = x;
        continue;
      }
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = x + ((t - 1.0) / t_next) * (x - x_prev);
      t = t_next;
    }
    return loss(x);
  }

  std::vector<Dataset> nodes_;
  std::shared_ptr<const Dataset> test_;
  Options opt_;
  int classes_ = 0;
  std::size_t features_ = 0;
  std::unique_ptr<Reference> reference_;
};

inline LogisticTask logistic_task(const Dataset& train,
                                  const std::vector<std::vector<std::size_t>>& partitions,
                                  std::shared_ptr<const Dataset> test,
                                  LogisticTask::Options opt = {}) {
  return LogisticTask(train, partitions, std::move(test), opt);
}

}  // namespace airdsgd
