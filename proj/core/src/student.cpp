#include "acldqn/student.hpp"

#include <algorithm>
#include <string>

namespace acldqn {
namespace {

void encode_act(const DialogueAct& act, Eigen::VectorXd& out, std::size_t offset) {
  out(static_cast<Eigen::Index>(offset + static_cast<std::size_t>(act.type))) = 1.0;
  for (const auto& [slot, value] : act.payload) {
    out(static_cast<Eigen::Index>(offset + kNumActTypes + slot_index(slot))) = 1.0;
  }
}

}  // namespace

Eigen::VectorXd featurize(const DialogueTracker& tracker) {
  using namespace features;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kDim));
  if (tracker.last_user_act()) encode_act(*tracker.last_user_act(), x, kUserOffset);
  if (tracker.last_system_act()) encode_act(*tracker.last_system_act(), x, kSystemOffset);
  for (Slot s : kAllSlots) {
    const auto base = static_cast<Eigen::Index>(kBeliefOffset + kBeliefPerSlot * slot_index(s));
    x(base) = tracker.slot_resolved(s) ? 1.0 : 0.0;
    x(base + 1) = tracker.pending_requests().contains(s) ? 1.0 : 0.0;
    x(base + 2) = tracker.answered_requests().contains(s) ? 1.0 : 0.0;
  }
  const int turn = std::clamp(tracker.turn(), 1, kMaxTurns);
  x(static_cast<Eigen::Index>(kTurnScalar)) = static_cast<double>(turn) / kMaxTurns;
  x(static_cast<Eigen::Index>(kTurnOneHot) + turn - 1) = 1.0;
  const double kb_size = static_cast<double>(std::max<std::size_t>(tracker.kb().size(), 1));
  x(static_cast<Eigen::Index>(kKbOffset)) =
      std::min(1.0, static_cast<double>(tracker.kb_result().count) / kb_size);
  return x;
}

DialogueAct SystemActionSet::realize(int action, const DialogueTracker& tracker) const {
  if (action < 0 || static_cast<std::size_t>(action) >= kSize) {
    throw ContractViolation("system action index out of range: " + std::to_string(action));
  }
  const auto a = static_cast<std::size_t>(action);
  if (a < kInformOffset) {
    const std::array<Slot, 1> one = {kAllSlots[a - kRequestOffset]};
    return make_request(Actor::kSystem, one);
  }
  if (a < kConfirmQuestion) {
    const Slot slot = kAllSlots[a - kInformOffset];
    if (auto value = kb_value_for(tracker, slot)) {
      return make_inform(Actor::kSystem, {{slot, *value}});
    }
    DialogueAct act = make_act(Actor::kSystem, ActType::kNotSure);
    act.payload.emplace(slot, std::string(kUnknownValue));
    return act;
  }
  switch (a) {
    case kConfirmQuestion:
      return make_act(Actor::kSystem, ActType::kConfirmQuestion);
    case kConfirmAnswer:
      return make_act(Actor::kSystem, ActType::kConfirmAnswer);
    case kBook:
      return make_act(Actor::kSystem, ActType::kBook);
    case kClosing:
      return make_act(Actor::kSystem, ActType::kClosing);
    default:
      return make_act(Actor::kSystem, ActType::kGreeting);
  }
}

int SystemActionSet::index_of(const DialogueAct& act) const {
  auto single_slot = [&act]() {
    if (act.payload.size() != 1) throw ContractViolation("expected a single-slot act: " + to_string(act));
    return slot_index(act.payload.begin()->first);
  };
  switch (act.type) {
    case ActType::kRequest:
      return static_cast<int>(kRequestOffset + single_slot());
    case ActType::kInform:
    case ActType::kNotSure:
      return static_cast<int>(kInformOffset + single_slot());
    case ActType::kConfirmQuestion:
      return static_cast<int>(kConfirmQuestion);
    case ActType::kConfirmAnswer:
      return static_cast<int>(kConfirmAnswer);
    case ActType::kBook:
      return static_cast<int>(kBook);
    case ActType::kClosing:
      return static_cast<int>(kClosing);
    case ActType::kGreeting:
      return static_cast<int>(kGreeting);
    default:
      throw ContractViolation("act is not in the system action set: " + to_string(act));
  }
}

std::string SystemActionSet::describe(int action) const {
  const auto a = static_cast<std::size_t>(action);
  if (a < kInformOffset) return "request(" + std::string(slot_name(kAllSlots[a])) + ")";
  if (a < kConfirmQuestion) {
    return "inform(" + std::string(slot_name(kAllSlots[a - kInformOffset])) + ")";
  }
  static constexpr std::array<std::string_view, 5> kNames = {
      "confirm_question", "confirm_answer", "book", "closing", "greeting"};
  return std::string(kNames.at(a - kConfirmQuestion));
}

double step_reward(DialogueStatus outcome) {
  switch (outcome) {
    case DialogueStatus::kSuccess:
      return kTurnReward + kSuccessReward;
    case DialogueStatus::kFailure:
      return kTurnReward + kFailureReward;
    default:
      return kTurnReward;
  }
}

double episode_total_reward(DialogueStatus outcome, int turns) {
  const double bonus = outcome == DialogueStatus::kSuccess ? kSuccessReward : kFailureReward;
  return kTurnReward * turns + bonus;
}

EpisodeResult run_episode(const UserGoal& goal, const KnowledgeBase& kb,
                          const SystemActionSet& actions, const DialoguePolicy& policy, Rng& rng,
                          const TransitionSink& sink) {
  auto [session, opening] = SimulatorSession::reset(goal, kb, rng);
  DialogueTracker tracker(kb);
  tracker.observe_user(opening);
  Eigen::VectorXd state = featurize(tracker);

  EpisodeResult result;
  result.goal_id = goal.id();
  while (session.status() == DialogueStatus::kOngoing) {
    const int action = policy(tracker, state);
    const DialogueAct system_act = actions.realize(action, tracker);
    tracker.observe_system(system_act);
    const UserTurn reply = session.step(system_act);
    tracker.observe_user(reply.act);

    const double reward = step_reward(reply.status);
    result.total_reward += reward;
    Eigen::VectorXd next_state = featurize(tracker);
    if (sink) {
      sink(Transition{state, action, reward, next_state,
                      reply.status != DialogueStatus::kOngoing});
    }
    state = std::move(next_state);
  }
  result.status = session.status();
  result.turns = session.turn();
  return result;
}

int argmax(const Eigen::VectorXd& values) {
  if (values.size() == 0) throw ContractViolation("argmax of an empty vector");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    if (values(i) > values(best)) best = i;
  }
  return static_cast<int>(best);
}

int student_act(const QFunction& q, const Eigen::VectorXd& state, double epsilon, Rng& rng) {
  if (epsilon < 0.0 || epsilon > 1.0) throw ContractViolation("epsilon must lie in [0, 1]");
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) {
      std::uniform_int_distribution<int> pick(0, static_cast<int>(q.output_dim()) - 1);
      return pick(rng);
    }
  }
  return argmax(q.forward(state));
}

double EpsilonSchedule::at(int epoch) const {
  if (decay_epochs <= 0 || epoch >= decay_epochs) return end;
  const double frac = static_cast<double>(std::max(epoch, 0)) / decay_epochs;
  return start + (end - start) * frac;
}

std::optional<double> student_train_step(QFunction& q, const ReplayBuffer& buffer, Rng& rng,
                                         double gamma) {
  auto batch = buffer.sample(kBatchSize, rng);
  if (!batch) return std::nullopt;
  return q.td_train_step(*batch, gamma);
}

QFunctionConfig student_q_config() {
  QFunctionConfig config;
  config.input_dim = features::kDim;
  config.output_dim = SystemActionSet::kSize;
  return config;
}

}  // namespace acldqn
