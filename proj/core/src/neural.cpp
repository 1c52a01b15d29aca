#include "acldqn/neural.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>

namespace acldqn {
namespace {

constexpr std::string_view kCheckpointMagic = "acldqn-qfunction";
constexpr int kCheckpointVersion = 1;

void check_config(const QFunctionConfig& c) {
  if (c.input_dim == 0 || c.hidden_dim == 0 || c.output_dim == 0) {
    throw ContractViolation("QFunction dimensions must be positive");
  }
  if (c.learning_rate < 0.0 || c.clip_norm <= 0.0) {
    throw ContractViolation("QFunction needs learning_rate >= 0 and clip_norm > 0");
  }
}

}  // namespace

MlpParams MlpParams::zeros(std::size_t input_dim, std::size_t hidden_dim, std::size_t output_dim) {
  const auto in = static_cast<Eigen::Index>(input_dim);
  const auto hid = static_cast<Eigen::Index>(hidden_dim);
  const auto out = static_cast<Eigen::Index>(output_dim);
  return {Eigen::MatrixXd::Zero(hid, in), Eigen::VectorXd::Zero(hid),
          Eigen::MatrixXd::Zero(out, hid), Eigen::VectorXd::Zero(out)};
}

std::size_t MlpParams::count() const {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size());
}

double MlpParams::squared_norm() const {
  return w1.squaredNorm() + b1.squaredNorm() + w2.squaredNorm() + b2.squaredNorm();
}

bool MlpParams::same_shape(const MlpParams& o) const {
  return w1.rows() == o.w1.rows() && w1.cols() == o.w1.cols() && b1.size() == o.b1.size() &&
         w2.rows() == o.w2.rows() && w2.cols() == o.w2.cols() && b2.size() == o.b2.size();
}

std::vector<double> MlpParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(count());
  for (Eigen::Index r = 0; r < w1.rows(); ++r)
    for (Eigen::Index c = 0; c < w1.cols(); ++c) flat.push_back(w1(r, c));
  for (Eigen::Index i = 0; i < b1.size(); ++i) flat.push_back(b1(i));
  for (Eigen::Index r = 0; r < w2.rows(); ++r)
    for (Eigen::Index c = 0; c < w2.cols(); ++c) flat.push_back(w2(r, c));
  for (Eigen::Index i = 0; i < b2.size(); ++i) flat.push_back(b2(i));
  return flat;
}

void MlpParams::assign(const std::vector<double>& flat) {
  if (flat.size() != count()) throw ContractViolation("flat parameter vector has wrong length");
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < w1.rows(); ++r)
    for (Eigen::Index c = 0; c < w1.cols(); ++c) w1(r, c) = flat[k++];
  for (Eigen::Index i = 0; i < b1.size(); ++i) b1(i) = flat[k++];
  for (Eigen::Index r = 0; r < w2.rows(); ++r)
    for (Eigen::Index c = 0; c < w2.cols(); ++c) w2(r, c) = flat[k++];
  for (Eigen::Index i = 0; i < b2.size(); ++i) b2(i) = flat[k++];
}

bool operator==(const MlpParams& a, const MlpParams& b) {
  return a.same_shape(b) && a.w1 == b.w1 && a.b1 == b.b1 && a.w2 == b.w2 && a.b2 == b.b2;
}

QFunction::QFunction(const QFunctionConfig& config, Rng& rng) : config_(config) {
  check_config(config_);
  online_ = MlpParams::zeros(config_.input_dim, config_.hidden_dim, config_.output_dim);
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(config_.input_dim));
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(config_.hidden_dim));
  std::uniform_real_distribution<double> u1(-bound1, bound1);
  std::uniform_real_distribution<double> u2(-bound2, bound2);
  for (Eigen::Index r = 0; r < online_.w1.rows(); ++r)
    for (Eigen::Index c = 0; c < online_.w1.cols(); ++c) online_.w1(r, c) = u1(rng);
  for (Eigen::Index r = 0; r < online_.w2.rows(); ++r)
    for (Eigen::Index c = 0; c < online_.w2.cols(); ++c) online_.w2(r, c) = u2(rng);
  target_ = online_;
}

QFunction::QFunction(const QFunctionConfig& config, MlpParams online) : config_(config) {
  check_config(config_);
  set_online(std::move(online));
  target_ = online_;
}

void QFunction::set_online(MlpParams params) {
  const auto expected = MlpParams::zeros(config_.input_dim, config_.hidden_dim, config_.output_dim);
  if (!params.same_shape(expected)) throw ContractViolation("parameter shapes do not match config");
  online_ = std::move(params);
}

Eigen::VectorXd QFunction::forward(const Eigen::VectorXd& state, ParamSet set) const {
  if (static_cast<std::size_t>(state.size()) != config_.input_dim) {
    throw ContractViolation(fmt::format("state has {} entries, expected {}", state.size(),
                                        config_.input_dim));
  }
  const MlpParams& p = params(set);
  const Eigen::VectorXd hidden = (p.w1 * state + p.b1).array().tanh().matrix();
  return p.w2 * hidden + p.b2;
}

Eigen::MatrixXd QFunction::forward_batch(const Eigen::MatrixXd& states, ParamSet set) const {
  if (static_cast<std::size_t>(states.cols()) != config_.input_dim) {
    throw ContractViolation("batch state width does not match input_dim");
  }
  const MlpParams& p = params(set);
  const Eigen::MatrixXd hidden =
      ((p.w1 * states.transpose()).colwise() + p.b1).array().tanh().matrix();
  return ((p.w2 * hidden).colwise() + p.b2).transpose();
}

void QFunction::check_batch(const Minibatch& batch) const {
  const auto b = static_cast<Eigen::Index>(batch.size());
  if (b == 0) throw ContractViolation("empty minibatch");
  if (batch.states.rows() != b || batch.next_states.rows() != b || batch.rewards.size() != b ||
      batch.terminal.size() != batch.size()) {
    throw ContractViolation("minibatch fields disagree on batch size");
  }
  if (static_cast<std::size_t>(batch.states.cols()) != config_.input_dim ||
      static_cast<std::size_t>(batch.next_states.cols()) != config_.input_dim) {
    throw ContractViolation("minibatch state width does not match input_dim");
  }
  for (int a : batch.actions) {
    if (a < 0 || static_cast<std::size_t>(a) >= config_.output_dim) {
      throw ContractViolation(fmt::format("action {} out of range", a));
    }
  }
}

TdGradient QFunction::td_gradient(const Minibatch& batch, double gamma) const {
  check_batch(batch);
  if (gamma < 0.0 || gamma > 1.0) throw ContractViolation("gamma must lie in [0, 1]");

  const auto b = static_cast<Eigen::Index>(batch.size());
  const Eigen::MatrixXd next_q = forward_batch(batch.next_states, ParamSet::kTarget);

  const MlpParams& p = online_;
  const Eigen::MatrixXd hidden =
      ((p.w1 * batch.states.transpose()).colwise() + p.b1).array().tanh().matrix();  // H x B
  const Eigen::MatrixXd q = (p.w2 * hidden).colwise() + p.b2;                        // A x B

  Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(q.rows(), b);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    double y = batch.rewards(i);
    if (!batch.terminal[static_cast<std::size_t>(i)]) y += gamma * next_q.row(i).maxCoeff();
    const double delta = q(batch.actions[static_cast<std::size_t>(i)], i) - y;
    loss += delta * delta;
    dq(batch.actions[static_cast<std::size_t>(i)], i) = 2.0 * delta / static_cast<double>(b);
  }
  loss /= static_cast<double>(b);

  TdGradient out;
  out.loss = loss;
  out.grad.w2 = dq * hidden.transpose();
  out.grad.b2 = dq.rowwise().sum();
  const Eigen::MatrixXd dz =
      ((p.w2.transpose() * dq).array() * (1.0 - hidden.array().square())).matrix();
  out.grad.w1 = dz * batch.states;
  out.grad.b1 = dz.rowwise().sum();
  return out;
}

double QFunction::td_train_step(const Minibatch& batch, double gamma) {
  TdGradient g = td_gradient(batch, gamma);
  if (config_.learning_rate == 0.0) return g.loss;
  clip_by_global_norm(g.grad, config_.clip_norm);
  const double lr = config_.learning_rate;
  online_.w1 -= lr * g.grad.w1;
  online_.b1 -= lr * g.grad.b1;
  online_.w2 -= lr * g.grad.w2;
  online_.b2 -= lr * g.grad.b2;
  return g.loss;
}

double QFunction::param_scalar() const {
  return std::sqrt(online_.squared_norm() / static_cast<double>(online_.count()));
}

double param_scalar(const QFunction& q) { return q.param_scalar(); }

double clip_by_global_norm(MlpParams& grad, double max_norm) {
  const double norm = std::sqrt(grad.squared_norm());
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    grad.w1 *= scale;
    grad.b1 *= scale;
    grad.w2 *= scale;
    grad.b2 *= scale;
  }
  return norm;
}

void save_checkpoint(const QFunction& q, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
  const MlpParams& p = q.online();
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << p.input_dim() << ' ' << p.hidden_dim() << ' ' << p.output_dim() << '\n';
  auto write_matrix = [&out](const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << fmt::format("{}", m(r, c));
      out << '\n';
    }
  };
  auto write_vector = [&out](const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << fmt::format("{}", v(i));
    out << '\n';
  };
  write_matrix(p.w1);
  write_vector(p.b1);
  write_matrix(p.w2);
  write_vector(p.b2);
  if (!out) throw CheckpointError("failed writing " + path.string());
}

QFunction load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open " + path.string());
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kCheckpointMagic) {
    throw CheckpointError(path.string() + " is not a Q-function checkpoint");
  }
  if (version != kCheckpointVersion) {
    throw CheckpointError(fmt::format("unsupported checkpoint version {}", version));
  }
  long long in_dim = 0, hid = 0, out_dim = 0;
  if (!(in >> in_dim >> hid >> out_dim) || in_dim <= 0 || hid <= 0 || out_dim <= 0 ||
      in_dim > 1'000'000 || hid > 1'000'000 || out_dim > 1'000'000) {
    throw CheckpointError("bad checkpoint dimensions header");
  }
  QFunctionConfig config;
  config.input_dim = static_cast<std::size_t>(in_dim);
  config.hidden_dim = static_cast<std::size_t>(hid);
  config.output_dim = static_cast<std::size_t>(out_dim);
  MlpParams p = MlpParams::zeros(config.input_dim, config.hidden_dim, config.output_dim);
  std::vector<double> flat(p.count());
  for (double& v : flat) {
    if (!(in >> v)) throw CheckpointError("checkpoint truncated");
  }
  std::string trailing;
  if (in >> trailing) throw CheckpointError("trailing data after checkpoint weights");
  p.assign(flat);
  return QFunction(config, std::move(p));
}

}  // namespace acldqn
