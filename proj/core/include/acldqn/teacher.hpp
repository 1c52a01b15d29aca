#ifndef ACLDQN_TEACHER_HPP_
#define ACLDQN_TEACHER_HPP_

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "acldqn/domain.hpp"
#include "acldqn/neural.hpp"
#include "acldqn/replay.hpp"

namespace acldqn {

// Teacher actions are goal positions in the corpus (0 .. |corpus|-1).
using GoalIndex = std::size_t;

// Teacher state layout:
//   [0]      student success rate over the last 20 episodes
//   [1]      mean episode reward over the last 20 episodes / 80
//   [2, 6)   current goal: position / (|G|-1), tier one-hot
//   [6, 10)  previous goal: same layout
//   [10]     student param_scalar after the current goal's episode
//   [11]     student param_scalar after the previous goal's episode
// Goal blocks are zero until that many goals have been played.
namespace teacher_features {
inline constexpr std::size_t kSummaryOffset = 0;
inline constexpr std::size_t kCurrentGoalOffset = 2;
inline constexpr std::size_t kLastGoalOffset = 6;
inline constexpr std::size_t kCurrentParamOffset = 10;
inline constexpr std::size_t kLastParamOffset = 11;
inline constexpr std::size_t kDim = 12;
}  // namespace teacher_features

// Rolling success / reward summary of the most recent student episodes.
class RecentOutcomes {
 public:
  explicit RecentOutcomes(std::size_t window = 20) : window_(window) {}

  void push(bool success, double total_reward);
  double success_rate() const;
  double mean_reward() const;
  std::size_t size() const { return outcomes_.size(); }

 private:
  std::size_t window_;
  std::deque<std::pair<bool, double>> outcomes_;
};

struct PlayedGoal {
  GoalIndex goal = 0;
  double param_scalar = 0.0;
};

// Inputs for the teacher state; `current` is the most recently played goal
// and `last` the one before it.
struct TeacherView {
  double success_rate = 0.0;
  double mean_reward = 0.0;
  std::optional<PlayedGoal> current;
  std::optional<PlayedGoal> last;
};

Eigen::VectorXd teacher_state(const TeacherView& view, const GoalCorpus& corpus);

// Last episode total reward per goal; never-played goals read as -40.
class GoalRewardTable {
 public:
  static constexpr double kDefault = -40.0;

  explicit GoalRewardTable(std::size_t num_goals) : x_(num_goals, kDefault) {}

  double get(GoalIndex goal) const { return x_.at(goal); }
  void set(GoalIndex goal, double x) { x_.at(goal) = x; }
  std::size_t size() const { return x_.size(); }

 private:
  std::vector<double> x_;
};

struct TeacherReward {
  double r = 0.0;       // r_or + x_now - x_prev
  double r_or = 0.0;
  double x_now = 0.0;
  double x_prev = 0.0;
};

// Reward for having chosen `goal`: r_or plus the change in the student's
// episode total reward on it. The table is updated to x_now afterwards.
TeacherReward teacher_reward(double r_or, double x_now, GoalRewardTable& table, GoalIndex goal);

// Epsilon-greedy restricted to `allowed`; greedy picks the masked argmax
// (ties to the lowest goal position).
GoalIndex teacher_act(const QFunction& q, const Eigen::VectorXd& state,
                      std::span<const GoalIndex> allowed, double epsilon, Rng& rng);

// Stores one non-terminal teacher transition.
void record_teacher_transition(ReplayBuffer& buffer, const Eigen::VectorXd& state, GoalIndex goal,
                               double reward, const Eigen::VectorXd& next_state);

std::optional<double> teacher_train_step(QFunction& q, const ReplayBuffer& buffer, Rng& rng,
                                         double gamma = 0.9);

QFunctionConfig teacher_q_config(std::size_t num_goals);

}  // namespace acldqn

#endif  // ACLDQN_TEACHER_HPP_
