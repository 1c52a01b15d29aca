#ifndef ACLDQN_NEURAL_HPP_
#define ACLDQN_NEURAL_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "acldqn/domain.hpp"

namespace acldqn {

// Weights of a one-hidden-layer tanh MLP. Matrices are (fan_out x fan_in).
struct MlpParams {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;

  static MlpParams zeros(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim);

  std::size_t input_dim() const { return static_cast<std::size_t>(w1.cols()); }
  std::size_t hidden_dim() const { return static_cast<std::size_t>(w1.rows()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(w2.rows()); }
  std::size_t count() const;
  double squared_norm() const;
  bool same_shape(const MlpParams& other) const;

  // Flat views in the order w1 (row-major), b1, w2 (row-major), b2.
  std::vector<double> flatten() const;
  void assign(const std::vector<double>& flat);

  friend bool operator==(const MlpParams& a, const MlpParams& b);
};

enum class ParamSet : std::uint8_t { kOnline, kTarget };

struct Minibatch {
  Eigen::MatrixXd states;       // B x input_dim
  std::vector<int> actions;     // B
  Eigen::VectorXd rewards;      // B
  Eigen::MatrixXd next_states;  // B x input_dim
  std::vector<bool> terminal;   // B

  std::size_t size() const { return actions.size(); }
};

struct QFunctionConfig {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 80;
  std::size_t output_dim = 0;
  double learning_rate = 1e-3;
  double clip_norm = 1.0;
};

struct TdGradient {
  double loss = 0.0;
  MlpParams grad;
};

// Q(s, .) = W2 tanh(W1 s + b1) + b2 with an online parameter set trained by
// plain mini-batch gradient descent and a target copy refreshed by
// sync_target().
class QFunction {
 public:
  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
  QFunction(const QFunctionConfig& config, Rng& rng);
  QFunction(const QFunctionConfig& config, MlpParams online);

  const QFunctionConfig& config() const { return config_; }
  std::size_t input_dim() const { return config_.input_dim; }
  std::size_t output_dim() const { return config_.output_dim; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }

  Eigen::VectorXd forward(const Eigen::VectorXd& state, ParamSet set = ParamSet::kOnline) const;
  // Row i holds the action values of states.row(i).
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& states,
                                ParamSet set = ParamSet::kOnline) const;

  // Mean squared TD error against targets from the target parameters, and
  // its gradient with respect to the online parameters (unclipped).
  TdGradient td_gradient(const Minibatch& batch, double gamma) const;

  // One clipped gradient step; returns the loss before the step.
  double td_train_step(const Minibatch& batch, double gamma);

  void sync_target() { target_ = online_; }

  // RMS of all online parameters.
  double param_scalar() const;

  const MlpParams& online() const { return online_; }
  const MlpParams& target() const { return target_; }
  void set_online(MlpParams params);

 private:
  const MlpParams& params(ParamSet set) const {
    return set == ParamSet::kOnline ? online_ : target_;
  }
  void check_batch(const Minibatch& batch) const;

  QFunctionConfig config_;
  MlpParams online_;
  MlpParams target_;
};

// Rescales `grad` so its global L2 norm is at most max_norm. Returns the
// norm before clipping.
double clip_by_global_norm(MlpParams& grad, double max_norm);

double param_scalar(const QFunction& q);

// Text checkpoint of the online parameters; see README for the layout.
void save_checkpoint(const QFunction& q, const std::filesystem::path& path);
QFunction load_checkpoint(const std::filesystem::path& path);

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace acldqn

#endif  // ACLDQN_NEURAL_HPP_
