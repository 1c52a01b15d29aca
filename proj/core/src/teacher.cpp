#include "acldqn/teacher.hpp"

#include <algorithm>
#include <limits>

#include "acldqn/student.hpp"

namespace acldqn {

void RecentOutcomes::push(bool success, double total_reward) {
  outcomes_.emplace_back(success, total_reward);
  if (outcomes_.size() > window_) outcomes_.pop_front();
}

double RecentOutcomes::success_rate() const {
  if (outcomes_.empty()) return 0.0;
  std::size_t n = 0;
  for (const auto& [success, reward] : outcomes_) n += success ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(outcomes_.size());
}

double RecentOutcomes::mean_reward() const {
  if (outcomes_.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [success, reward] : outcomes_) sum += reward;
  return sum / static_cast<double>(outcomes_.size());
}

Eigen::VectorXd teacher_state(const TeacherView& view, const GoalCorpus& corpus) {
  using namespace teacher_features;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kDim));
  x(kSummaryOffset) = view.success_rate;
  x(kSummaryOffset + 1) = std::clamp(view.mean_reward / kSuccessReward, -1.0, 1.0);
  const double span = corpus.size() > 1 ? static_cast<double>(corpus.size() - 1) : 1.0;
  auto encode_goal = [&](const std::optional<PlayedGoal>& played, std::size_t offset) {
    if (!played) return;
    x(static_cast<Eigen::Index>(offset)) = static_cast<double>(played->goal) / span;
    x(static_cast<Eigen::Index>(offset + 1 + static_cast<std::size_t>(corpus.tier_of(played->goal)))) = 1.0;
  };
  encode_goal(view.current, kCurrentGoalOffset);
  encode_goal(view.last, kLastGoalOffset);
  if (view.current) x(kCurrentParamOffset) = view.current->param_scalar;
  if (view.last) x(kLastParamOffset) = view.last->param_scalar;
  return x;
}

TeacherReward teacher_reward(double r_or, double x_now, GoalRewardTable& table, GoalIndex goal) {
  TeacherReward out;
  out.r_or = r_or;
  out.x_now = x_now;
  out.x_prev = table.get(goal);
  out.r = r_or + x_now - out.x_prev;
  table.set(goal, x_now);
  return out;
}

GoalIndex teacher_act(const QFunction& q, const Eigen::VectorXd& state,
                      std::span<const GoalIndex> allowed, double epsilon, Rng& rng) {
  if (allowed.empty()) throw ContractViolation("teacher action set is empty");
  if (epsilon < 0.0 || epsilon > 1.0) throw ContractViolation("epsilon must lie in [0, 1]");
  for (GoalIndex g : allowed) {
    if (g >= q.output_dim()) throw ContractViolation("goal outside the teacher's action space");
  }
  if (allowed.size() == 1) return allowed.front();
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) {
      std::uniform_int_distribution<std::size_t> pick(0, allowed.size() - 1);
      return allowed[pick(rng)];
    }
  }
  const Eigen::VectorXd values = q.forward(state);
  GoalIndex best = allowed.front();
  double best_value = -std::numeric_limits<double>::infinity();
  for (GoalIndex g : allowed) {
    const double v = values(static_cast<Eigen::Index>(g));
    if (v > best_value || (v == best_value && g < best)) {
      best = g;
      best_value = v;
    }
  }
  return best;
}

void record_teacher_transition(ReplayBuffer& buffer, const Eigen::VectorXd& state, GoalIndex goal,
                               double reward, const Eigen::VectorXd& next_state) {
  buffer.push(Transition{state, static_cast<int>(goal), reward, next_state, false});
}

std::optional<double> teacher_train_step(QFunction& q, const ReplayBuffer& buffer, Rng& rng,
                                         double gamma) {
  auto batch = buffer.sample(kBatchSize, rng);
  if (!batch) return std::nullopt;
  return q.td_train_step(*batch, gamma);
}

QFunctionConfig teacher_q_config(std::size_t num_goals) {
  QFunctionConfig config;
  config.input_dim = teacher_features::kDim;
  config.output_dim = num_goals;
  return config;
}

}  // namespace acldqn
