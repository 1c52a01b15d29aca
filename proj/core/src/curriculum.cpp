#include "acldqn/curriculum.hpp"

#include <numeric>
#include <string>
#include <vector>

namespace acldqn {

std::string_view phase_name(Phase phase) {
  switch (phase) {
    case Phase::kSimple:
      return "simple";
    case Phase::kMedium:
      return "medium";
    case Phase::kDifficult:
      return "difficult";
    default:
      return "all";
  }
}

std::string_view trigger_name(PhaseTrigger trigger) {
  return trigger == PhaseTrigger::kBudget ? "budget" : "mastery";
}

double orp_penalty(std::size_t og) {
  const double n = static_cast<double>(og);
  return -kOrpLength * n / (n + kOrpSmoothing);
}

OverRepetitionCounter::OverRepetitionCounter(std::span<const GoalIndex> active) { reset(active); }

void OverRepetitionCounter::reset(std::span<const GoalIndex> active) {
  counts_.assign(active.size(), 0);
  slot_of_.clear();
  for (std::size_t i = 0; i < active.size(); ++i) slot_of_.emplace(active[i], i);
}

double OverRepetitionCounter::on_goal_sampled(GoalIndex goal) {
  auto it = slot_of_.find(goal);
  if (it == slot_of_.end()) {
    throw ContractViolation("goal " + std::to_string(goal) + " is not in the active set");
  }
  const double penalty = orp_penalty(counts_[it->second]);
  ++counts_[it->second];
  return penalty;
}

std::size_t OverRepetitionCounter::count(GoalIndex goal) const {
  auto it = slot_of_.find(goal);
  return it == slot_of_.end() ? 0 : counts_[it->second];
}

bool mastery_reached(std::span<const double> window, double alpha, std::size_t t) {
  if (window.size() < t) return false;
  std::size_t n = 0;
  for (double p : window.last(t)) n += p >= alpha ? 1 : 0;
  return n >= t;
}

bool MasteryTracker::record(bool success) {
  ++n_sampled_;
  if (success) ++n_success_;
  snapshots_.push_back(p_success());
  if (snapshots_.size() > window_) snapshots_.pop_front();
  const std::vector<double> recent(snapshots_.begin(), snapshots_.end());
  return mastery_reached(recent, alpha_, window_);
}

void MasteryTracker::reset() {
  n_success_ = 0;
  n_sampled_ = 0;
  snapshots_.clear();
}

double MasteryTracker::p_success() const {
  if (n_sampled_ == 0) return 0.0;
  return static_cast<double>(n_success_) / static_cast<double>(n_sampled_);
}

std::array<std::size_t, kNumTiers> phase_budgets(const TierSizes& sizes, std::size_t epoch_size) {
  const std::size_t total = sizes.total();
  if (total == 0) return {0, 0, 0};
  // Integer floor of |G_phase| * epoch_size / |G|.
  return {sizes.simple * epoch_size / total, sizes.medium * epoch_size / total,
          sizes.difficult * epoch_size / total};
}

PhaseMachine::PhaseMachine(Schedule schedule, const TierSizes& sizes, std::size_t epoch_size)
    : schedule_(schedule),
      phase_(schedule == Schedule::kA ? Phase::kAll : Phase::kSimple),
      budgets_(phase_budgets(sizes, epoch_size)) {}

std::size_t PhaseMachine::budget(Phase phase) const {
  if (phase == Phase::kAll) return 0;
  return budgets_[static_cast<std::size_t>(phase)];
}

bool PhaseMachine::record_episode() {
  ++episodes_in_phase_;
  return !is_final_phase() && episodes_in_phase_ >= budget(phase_);
}

void PhaseMachine::advance() {
  if (is_final_phase()) return;
  phase_ = static_cast<Phase>(static_cast<std::uint8_t>(phase_) + 1);
  episodes_in_phase_ = 0;
}

Phase schedule_b_advance(PhaseMachine& machine) {
  if (machine.record_episode()) machine.advance();
  return machine.phase();
}

std::optional<PhaseTrigger> schedule_c_advance(PhaseMachine& machine, MasteryTracker& tracker,
                                               bool success) {
  const bool budget_spent = machine.record_episode();
  if (machine.is_final_phase()) return std::nullopt;
  std::optional<PhaseTrigger> trigger;
  if (tracker.record(success)) {
    trigger = PhaseTrigger::kMastery;
  } else if (budget_spent) {
    trigger = PhaseTrigger::kBudget;
  }
  if (trigger) {
    machine.advance();
    tracker.reset();
  }
  return trigger;
}

std::vector<GoalIndex> active_goal_set(Schedule schedule, Phase phase, const GoalCorpus& corpus) {
  if (schedule == Schedule::kA || phase == Phase::kAll) {
    std::vector<GoalIndex> all(corpus.size());
    std::iota(all.begin(), all.end(), GoalIndex{0});
    return all;
  }
  return corpus.tier(static_cast<Tier>(static_cast<std::uint8_t>(phase)));
}

CurriculumController::CurriculumController(const CurriculumConfig& config, const GoalCorpus& corpus)
    : config_(config),
      corpus_(&corpus),
      machine_(config.schedule,
               TierSizes{corpus.tier(Tier::kSimple).size(), corpus.tier(Tier::kMedium).size(),
                         corpus.tier(Tier::kDifficult).size()},
               config.epoch_size),
      mastery_(config.alpha, config.mastery_window),
      counter_(std::span<const GoalIndex>{}) {
  enter_phase();
}

void CurriculumController::enter_phase() {
  active_ = active_goal_set(config_.schedule, machine_.phase(), *corpus_);
  counter_.reset(active_);
  mastery_.reset();
}

double CurriculumController::on_goal_sampled(GoalIndex goal) {
  const double penalty = counter_.on_goal_sampled(goal);
  return config_.orp_enabled ? penalty : 0.0;
}

std::optional<PhaseTransition> CurriculumController::on_episode_end(bool success, int epoch) {
  const Phase before = machine_.phase();
  std::optional<PhaseTrigger> trigger;
  switch (config_.schedule) {
    case Schedule::kA:
      machine_.record_episode();
      break;
    case Schedule::kB:
      if (machine_.record_episode()) {
        machine_.advance();
        trigger = PhaseTrigger::kBudget;
      }
      break;
    case Schedule::kC:
      trigger = schedule_c_advance(machine_, mastery_, success);
      break;
  }
  if (!trigger) return std::nullopt;
  enter_phase();
  return PhaseTransition{epoch, before, machine_.phase(), *trigger};
}

}  // namespace acldqn
