#ifndef ACLDQN_STUDENT_HPP_
#define ACLDQN_STUDENT_HPP_

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "acldqn/domain.hpp"
#include "acldqn/neural.hpp"
#include "acldqn/replay.hpp"
#include "acldqn/user_sim.hpp"

namespace acldqn {

// Student state layout (all entries in [0, 1]):
//   [0, 20)    current user act: act-type one-hot, then slot mention flags
//   [20, 40)   last system act: same layout, all zero before the first one
//   [40, 67)   per slot: constraint resolved, request pending, request answered
//   [67, 108)  turn / 40, then a 40-way turn one-hot
//   [108]      KB rows matching the tracked constraints / KB size
namespace features {
inline constexpr std::size_t kActBlock = kNumActTypes + kNumSlots;
inline constexpr std::size_t kUserOffset = 0;
inline constexpr std::size_t kSystemOffset = kUserOffset + kActBlock;
inline constexpr std::size_t kBeliefOffset = kSystemOffset + kActBlock;
inline constexpr std::size_t kBeliefPerSlot = 3;
inline constexpr std::size_t kTurnOffset = kBeliefOffset + kBeliefPerSlot * kNumSlots;
inline constexpr std::size_t kTurnScalar = kTurnOffset;
inline constexpr std::size_t kTurnOneHot = kTurnOffset + 1;
inline constexpr std::size_t kKbOffset = kTurnOneHot + kMaxTurns;
inline constexpr std::size_t kDim = kKbOffset + 1;
}  // namespace features

Eigen::VectorXd featurize(const DialogueTracker& tracker);

// Fixed system action inventory; the position of an act is its Q-output index:
// request(slot) x9, inform(slot) x9, confirm_question, confirm_answer, book,
// closing, greeting.
class SystemActionSet {
 public:
  static constexpr std::size_t kRequestOffset = 0;
  static constexpr std::size_t kInformOffset = kNumSlots;
  static constexpr std::size_t kConfirmQuestion = 2 * kNumSlots;
  static constexpr std::size_t kConfirmAnswer = kConfirmQuestion + 1;
  static constexpr std::size_t kBook = kConfirmQuestion + 2;
  static constexpr std::size_t kClosing = kConfirmQuestion + 3;
  static constexpr std::size_t kGreeting = kConfirmQuestion + 4;
  static constexpr std::size_t kSize = kGreeting + 1;

  std::size_t size() const { return kSize; }

  // Grounds an action in the current dialogue. inform(slot) takes its value
  // from the first KB row matching the tracked constraints and degrades to
  // not_sure(slot) when no row matches.
  DialogueAct realize(int action, const DialogueTracker& tracker) const;

  // Inverse of realize() for grounded acts; throws ContractViolation for acts
  // outside the inventory.
  int index_of(const DialogueAct& act) const;

  std::string describe(int action) const;
};

// Picks the action to take in the tracked dialogue given its features.
using DialoguePolicy = std::function<int(const DialogueTracker&, const Eigen::VectorXd&)>;
using TransitionSink = std::function<void(Transition)>;

inline constexpr double kSuccessReward = 2.0 * kMaxTurns;   // 80
inline constexpr double kFailureReward = -1.0 * kMaxTurns;  // -40
inline constexpr double kTurnReward = -1.0;

// Reward of one system turn: -1, plus the terminal bonus or penalty.
double step_reward(DialogueStatus outcome);

// Total reward of a finished episode: -turns + (80 or -40).
double episode_total_reward(DialogueStatus outcome, int turns);

struct EpisodeResult {
  GoalId goal_id = 0;
  DialogueStatus status = DialogueStatus::kOngoing;
  int turns = 0;
  double total_reward = 0.0;

  bool success() const { return status == DialogueStatus::kSuccess; }
};

// Plays one dialogue to completion, handing every transition to `sink`.
EpisodeResult run_episode(const UserGoal& goal, const KnowledgeBase& kb,
                          const SystemActionSet& actions, const DialoguePolicy& policy, Rng& rng,
                          const TransitionSink& sink = {});

// Index of the largest value; ties go to the lowest index.
int argmax(const Eigen::VectorXd& values);

// Epsilon-greedy over all system actions.
int student_act(const QFunction& q, const Eigen::VectorXd& state, double epsilon, Rng& rng);

// Linear decay from `start` to `end` over the first `decay_epochs` epochs,
// constant afterwards. Epochs are counted from 0.
struct EpsilonSchedule {
  double start = 0.3;
  double end = 0.01;
  int decay_epochs = 200;

  double at(int epoch) const;
};

// One TD update on a minibatch drawn from D^S; nothing when the buffer
// holds fewer than kBatchSize transitions.
std::optional<double> student_train_step(QFunction& q, const ReplayBuffer& buffer, Rng& rng,
                                         double gamma = 0.9);

QFunctionConfig student_q_config();

}  // namespace acldqn

#endif  // ACLDQN_STUDENT_HPP_
