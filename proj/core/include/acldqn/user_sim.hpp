#ifndef ACLDQN_USER_SIM_HPP_
#define ACLDQN_USER_SIM_HPP_

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <utility>

#include "acldqn/domain.hpp"
#include "acldqn/knowledge_base.hpp"

namespace acldqn {

// Hard cap on system turns per dialogue; reaching it without success fails.
inline constexpr int kMaxTurns = 40;

enum class DialogueStatus : std::uint8_t { kOngoing, kSuccess, kFailure };

struct UserTurn {
  DialogueAct act;
  DialogueStatus status = DialogueStatus::kOngoing;
};

// Deterministic agenda-based user. The agenda front is the next act the user
// volunteers when the system gives it the floor.
//
// The user's target is the first KB row matching all of its constraints.
//
// Response rules for a system act:
//   closing            -> failure
//   book               -> success (thanks) if every request is filled,
//                         otherwise failure (deny)
//   request(s)         -> inform(s) if s is a constraint, request(s) if the
//                         user wants s, otherwise not_sure(s)
//   inform(s=v)        -> if s is requested and v is the target row's value
//                         it is recorded, otherwise the user reveals its
//                         first unstated constraint (deny when none is left)
//   anything else      -> next agenda item, then reminders, then book
class SimulatorSession {
 public:
  static std::pair<SimulatorSession, DialogueAct> reset(const UserGoal& goal,
                                                        const KnowledgeBase& kb, Rng& rng);

  // Throws ContractViolation once the session is terminal.
  UserTurn step(const DialogueAct& system_act);

  const UserGoal& goal() const { return goal_; }
  int turn() const { return turn_; }
  DialogueStatus status() const { return status_; }
  const std::deque<DialogueAct>& agenda() const { return agenda_; }
  const std::map<Slot, std::string>& filled_requests() const { return filled_; }
  const std::set<Slot>& revealed_constraints() const { return revealed_; }

 private:
  SimulatorSession(UserGoal goal, const KnowledgeBase& kb) : goal_(std::move(goal)), kb_(&kb) {}

  DialogueAct respond(const DialogueAct& system_act);
  DialogueAct next_agenda_act();
  DialogueAct reveal_constraint(Slot slot);
  bool matches_target(Slot slot, const std::string& value) const;
  std::optional<Slot> first_unfilled_request() const;
  void drop_request_from_agenda(Slot slot);

  UserGoal goal_;
  const KnowledgeBase* kb_;
  std::optional<std::size_t> target_row_;
  std::deque<DialogueAct> agenda_;
  int turn_ = 0;
  std::map<Slot, std::string> filled_;
  std::set<Slot> revealed_;
  DialogueStatus status_ = DialogueStatus::kOngoing;
};

// Independent success validator: every requested slot is filled with the
// value of the first KB row matching all of the goal's constraints.
bool goal_satisfied(const UserGoal& goal, const KnowledgeBase& kb,
                    const std::map<Slot, std::string>& filled);

// What the system side can observe of a dialogue. Both the rule agent and the
// learned student act from this view only; it never sees the user's goal.
class DialogueTracker {
 public:
  explicit DialogueTracker(const KnowledgeBase& kb);

  void observe_user(const DialogueAct& act);
  void observe_system(const DialogueAct& act);

  const KnowledgeBase& kb() const { return *kb_; }
  const std::optional<DialogueAct>& last_user_act() const { return last_user_; }
  const std::optional<DialogueAct>& last_system_act() const { return last_system_; }
  // 1 before the first system act; incremented by every system act.
  int turn() const { return turn_; }

  const std::map<Slot, std::string>& constraints() const { return constraints_; }
  const std::set<Slot>& dont_care() const { return dont_care_; }
  const std::set<Slot>& pending_requests() const { return pending_; }
  const std::set<Slot>& answered_requests() const { return answered_; }
  const std::set<Slot>& asked_slots() const { return asked_; }
  // Slots the system informed at least once, accepted or not.
  const std::set<Slot>& informed_slots() const { return informed_; }
  bool slot_resolved(Slot s) const { return constraints_.contains(s) || dont_care_.contains(s); }

  const KbResult& kb_result() const { return kb_result_; }

 private:
  const KnowledgeBase* kb_;
  std::optional<DialogueAct> last_user_;
  std::optional<DialogueAct> last_system_;
  int turn_ = 1;
  std::map<Slot, std::string> constraints_;
  std::set<Slot> dont_care_;
  std::set<Slot> pending_;
  std::set<Slot> answered_;
  std::set<Slot> asked_;
  std::set<Slot> informed_;
  KbResult kb_result_;
};

// Value the system would inform for `slot`: the slot's value in the first KB
// row matching the tracked constraints, or nothing when no row matches.
std::optional<std::string> kb_value_for(const DialogueTracker& tracker, Slot slot);

// Naive hand-written agent used to seed the student replay buffer: asks for
// city, date and movie_name, answers each request once from the KB, books
// when nothing is pending and gives up on a rejected answer.
DialogueAct rule_agent_act(const DialogueTracker& tracker);

}  // namespace acldqn

#endif  // ACLDQN_USER_SIM_HPP_
