#include "acldqn/user_sim.hpp"

#include <algorithm>
#include <array>

namespace acldqn {

std::pair<SimulatorSession, DialogueAct> SimulatorSession::reset(const UserGoal& goal,
                                                                 const KnowledgeBase& kb,
                                                                 Rng& rng) {
  SimulatorSession session(goal, kb);
  session.target_row_ = kb.query(goal.inform_slots()).row;
  std::bernoulli_distribution coin(0.5);
  std::map<Slot, std::string> opening;
  for (const auto& [slot, value] : goal.inform_slots()) {
    if (coin(rng)) opening.emplace(slot, value);
  }
  if (!opening.empty()) session.agenda_.push_back(make_inform(Actor::kUser, std::move(opening)));
  for (Slot s : goal.request_slots()) {
    const std::array<Slot, 1> one = {s};
    session.agenda_.push_back(make_request(Actor::kUser, one));
  }

  DialogueAct first = session.next_agenda_act();
  session.turn_ = 1;
  return {std::move(session), std::move(first)};
}

UserTurn SimulatorSession::step(const DialogueAct& system_act) {
  if (status_ != DialogueStatus::kOngoing) {
    throw ContractViolation("step() called on a finished dialogue");
  }
  DialogueAct reply = respond(system_act);
  if (status_ == DialogueStatus::kOngoing) {
    if (turn_ >= kMaxTurns) {
      status_ = DialogueStatus::kFailure;
    } else {
      ++turn_;
    }
  }
  return {std::move(reply), status_};
}

DialogueAct SimulatorSession::respond(const DialogueAct& system_act) {
  switch (system_act.type) {
    case ActType::kClosing:
      status_ = DialogueStatus::kFailure;
      return make_act(Actor::kUser, ActType::kClosing);

    case ActType::kBook: {
      if (first_unfilled_request()) {
        status_ = DialogueStatus::kFailure;
        return make_act(Actor::kUser, ActType::kDeny);
      }
      status_ = DialogueStatus::kSuccess;
      return make_act(Actor::kUser, ActType::kThanks);
    }

    case ActType::kRequest: {
      if (system_act.payload.empty()) return next_agenda_act();
      const Slot slot = system_act.payload.begin()->first;
      if (goal_.inform_slots().contains(slot)) return reveal_constraint(slot);
      if (goal_.request_slots().contains(slot)) {
        drop_request_from_agenda(slot);
        const std::array<Slot, 1> one = {slot};
        return make_request(Actor::kUser, one);
      }
      DialogueAct not_sure = make_act(Actor::kUser, ActType::kNotSure);
      not_sure.payload.emplace(slot, std::string(kUnknownValue));
      return not_sure;
    }

    case ActType::kInform: {
      if (system_act.payload.empty()) return next_agenda_act();
      const auto& [slot, value] = *system_act.payload.begin();
      if (!goal_.request_slots().contains(slot)) return next_agenda_act();
      if (matches_target(slot, value)) {
        filled_[slot] = value;
        drop_request_from_agenda(slot);
        return next_agenda_act();
      }
      for (const auto& [constraint, v] : goal_.inform_slots()) {
        if (!revealed_.contains(constraint)) return reveal_constraint(constraint);
      }
      DialogueAct deny = make_act(Actor::kUser, ActType::kDeny);
      deny.payload.emplace(slot, value);
      return deny;
    }

    default:
      return next_agenda_act();
  }
}

DialogueAct SimulatorSession::next_agenda_act() {
  while (!agenda_.empty()) {
    DialogueAct act = std::move(agenda_.front());
    agenda_.pop_front();
    if (act.type == ActType::kRequest) {
      const Slot s = act.payload.begin()->first;
      if (filled_.contains(s)) continue;
    }
    if (act.type == ActType::kInform) {
      for (const auto& [slot, value] : act.payload) revealed_.insert(slot);
    }
    return act;
  }
  if (auto missing = first_unfilled_request()) {
    const std::array<Slot, 1> one = {*missing};
    return make_request(Actor::kUser, one);
  }
  return make_act(Actor::kUser, ActType::kBook);
}

DialogueAct SimulatorSession::reveal_constraint(Slot slot) {
  revealed_.insert(slot);
  return make_inform(Actor::kUser, {{slot, goal_.inform_slots().at(slot)}});
}

bool SimulatorSession::matches_target(Slot slot, const std::string& value) const {
  return target_row_ && kb_->row(*target_row_)[slot_index(slot)] == value;
}

std::optional<Slot> SimulatorSession::first_unfilled_request() const {
  for (Slot s : goal_.request_slots()) {
    if (!filled_.contains(s)) return s;
  }
  return std::nullopt;
}

void SimulatorSession::drop_request_from_agenda(Slot slot) {
  std::erase_if(agenda_, [slot](const DialogueAct& act) {
    return act.type == ActType::kRequest && act.payload.contains(slot);
  });
}

bool goal_satisfied(const UserGoal& goal, const KnowledgeBase& kb,
                    const std::map<Slot, std::string>& filled) {
  for (Slot s : goal.request_slots()) {
    if (!filled.contains(s)) return false;
  }
  std::optional<std::size_t> target;
  for (std::size_t row = 0; row < kb.size() && !target; ++row) {
    if (kb.matches(row, goal.inform_slots())) target = row;
  }
  if (!target) return false;
  for (const auto& [slot, value] : filled) {
    if (!goal.request_slots().contains(slot)) return false;
    if (kb.row(*target)[slot_index(slot)] != value) return false;
  }
  return true;
}

DialogueTracker::DialogueTracker(const KnowledgeBase& kb) : kb_(&kb), kb_result_(kb.query({})) {}

void DialogueTracker::observe_user(const DialogueAct& act) {
  // An inform or deny right after a system inform means the answer was rejected.
  const bool after_inform = last_system_ && last_system_->type == ActType::kInform &&
                            !last_system_->payload.empty();
  const bool rejected = after_inform && (act.type == ActType::kInform || act.type == ActType::kDeny);
  if (rejected) {
    const Slot s = last_system_->payload.begin()->first;
    if (answered_.erase(s) > 0) pending_.insert(s);
  }

  switch (act.type) {
    case ActType::kInform:
      for (const auto& [slot, value] : act.payload) {
        constraints_[slot] = value;
        dont_care_.erase(slot);
      }
      kb_result_ = kb_->query(constraints_);
      break;
    case ActType::kRequest:
      for (const auto& [slot, value] : act.payload) {
        answered_.erase(slot);
        pending_.insert(slot);
      }
      break;
    case ActType::kNotSure:
      for (const auto& [slot, value] : act.payload) {
        if (!constraints_.contains(slot)) dont_care_.insert(slot);
      }
      break;
    default:
      break;
  }
  last_user_ = act;
}

void DialogueTracker::observe_system(const DialogueAct& act) {
  for (const auto& [slot, value] : act.payload) {
    if (act.type == ActType::kRequest) asked_.insert(slot);
    if (act.type == ActType::kInform) {
      informed_.insert(slot);
      if (pending_.erase(slot) > 0) answered_.insert(slot);
    }
  }
  last_system_ = act;
  ++turn_;
}

std::optional<std::string> kb_value_for(const DialogueTracker& tracker, Slot slot) {
  const auto& result = tracker.kb_result();
  if (!result.row) return std::nullopt;
  return tracker.kb().row(*result.row)[slot_index(slot)];
}

DialogueAct rule_agent_act(const DialogueTracker& tracker) {
  static constexpr std::array<Slot, 3> kAskOrder = {Slot::kCity, Slot::kDate, Slot::kMovieName};
  for (Slot s : kAskOrder) {
    if (!tracker.slot_resolved(s) && !tracker.asked_slots().contains(s) &&
        !tracker.pending_requests().contains(s)) {
      const std::array<Slot, 1> one = {s};
      return make_request(Actor::kSystem, one);
    }
  }
  for (Slot s : tracker.pending_requests()) {
    if (tracker.informed_slots().contains(s)) continue;
    if (auto value = kb_value_for(tracker, s)) {
      return make_inform(Actor::kSystem, {{s, *value}});
    }
  }
  if (!tracker.pending_requests().empty()) return make_act(Actor::kSystem, ActType::kClosing);
  return make_act(Actor::kSystem, ActType::kBook);
}

}  // namespace acldqn
