#ifndef ACLDQN_CURRICULUM_HPP_
#define ACLDQN_CURRICULUM_HPP_

#include <array>
#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "acldqn/domain.hpp"
#include "acldqn/teacher.hpp"

namespace acldqn {

enum class Schedule : std::uint8_t { kA, kB, kC };
enum class Phase : std::uint8_t { kSimple, kMedium, kDifficult, kAll };
enum class PhaseTrigger : std::uint8_t { kBudget, kMastery };

std::string_view phase_name(Phase phase);
std::string_view trigger_name(PhaseTrigger trigger);

inline constexpr double kOrpLength = 40.0;
inline constexpr double kOrpSmoothing = 10.0;

// -L * og / (og + K): 0 for an unsampled goal, strictly decreasing, and
// bounded below by -L without reaching it.
double orp_penalty(std::size_t og);

// Sample counts og_i for the goals of the current action set.
class OverRepetitionCounter {
 public:
  explicit OverRepetitionCounter(std::span<const GoalIndex> active);

  // Penalty for the count before this sample, then og_i += 1. Throws
  // ContractViolation for goals outside the active set.
  double on_goal_sampled(GoalIndex goal);

  std::size_t count(GoalIndex goal) const;
  std::size_t size() const { return counts_.size(); }
  // Zero vector over a new active set.
  void reset(std::span<const GoalIndex> active);

 private:
  std::vector<std::size_t> counts_;
  std::unordered_map<GoalIndex, std::size_t> slot_of_;
};

// True when `window` holds at least `t` entries and `t` of them reach alpha.
bool mastery_reached(std::span<const double> window, double alpha, std::size_t t);

// Within-phase success rate snapshots. p_success = n_success / N_sampled is
// cumulative over the phase; only the last T snapshots are kept.
class MasteryTracker {
 public:
  MasteryTracker(double alpha = 0.5, std::size_t window = 5) : alpha_(alpha), window_(window) {}

  // Records one episode and reports whether all of the last T snapshots
  // reach alpha.
  bool record(bool success);
  void reset();

  double p_success() const;
  const std::deque<double>& window() const { return snapshots_; }
  std::size_t n_success() const { return n_success_; }
  std::size_t n_sampled() const { return n_sampled_; }
  double alpha() const { return alpha_; }
  std::size_t window_size() const { return window_; }

 private:
  double alpha_;
  std::size_t window_;
  std::size_t n_success_ = 0;
  std::size_t n_sampled_ = 0;
  std::deque<double> snapshots_;
};

// Number of teacher episodes per phase: floor(|G_phase| / |G| * epoch_size).
std::array<std::size_t, kNumTiers> phase_budgets(const TierSizes& sizes, std::size_t epoch_size);

// Phase progression simple -> medium -> difficult (schedules B and C) or a
// single `all` phase (schedule A). Never moves backwards.
class PhaseMachine {
 public:
  PhaseMachine(Schedule schedule, const TierSizes& sizes, std::size_t epoch_size);

  Schedule schedule() const { return schedule_; }
  Phase phase() const { return phase_; }
  std::size_t episodes_in_phase() const { return episodes_in_phase_; }
  std::size_t budget(Phase phase) const;
  bool is_final_phase() const { return phase_ == Phase::kAll || phase_ == Phase::kDifficult; }

  // Counts a finished episode; true when the current phase's budget is used
  // up and a later phase exists.
  bool record_episode();
  // Moves to the next phase (no-op in the final phase).
  void advance();

 private:
  Schedule schedule_;
  Phase phase_;
  std::array<std::size_t, kNumTiers> budgets_;
  std::size_t episodes_in_phase_ = 0;
};

// Schedule B step: counts one episode and advances when the budget is met.
Phase schedule_b_advance(PhaseMachine& machine);

// Schedule C step: records the outcome; advances on mastery, or on the
// schedule B budget as a ceiling. The tracker resets on any advance.
std::optional<PhaseTrigger> schedule_c_advance(PhaseMachine& machine, MasteryTracker& tracker,
                                               bool success);

std::vector<GoalIndex> active_goal_set(Schedule schedule, Phase phase, const GoalCorpus& corpus);

struct CurriculumConfig {
  Schedule schedule = Schedule::kA;
  std::size_t epoch_size = 500;
  double alpha = 0.5;
  std::size_t mastery_window = 5;
  bool orp_enabled = true;
};

struct PhaseTransition {
  int epoch = 0;
  Phase from = Phase::kSimple;
  Phase to = Phase::kMedium;
  PhaseTrigger trigger = PhaseTrigger::kBudget;

  friend bool operator==(const PhaseTransition&, const PhaseTransition&) = default;
};

// Schedule state owned by one training run: phase, active goal set, the
// over-repetition counter and the mastery tracker.
class CurriculumController {
 public:
  CurriculumController(const CurriculumConfig& config, const GoalCorpus& corpus);

  Phase phase() const { return machine_.phase(); }
  std::span<const GoalIndex> active_goals() const { return active_; }
  const OverRepetitionCounter& counter() const { return counter_; }
  const MasteryTracker& mastery() const { return mastery_; }
  const PhaseMachine& machine() const { return machine_; }

  // Over-repetition reward for the sampled goal (0 when ORP is disabled;
  // counts are kept either way).
  double on_goal_sampled(GoalIndex goal);

  std::optional<PhaseTransition> on_episode_end(bool success, int epoch);

 private:
  void enter_phase();

  CurriculumConfig config_;
  const GoalCorpus* corpus_;
  PhaseMachine machine_;
  MasteryTracker mastery_;
  std::vector<GoalIndex> active_;
  OverRepetitionCounter counter_;
};

}  // namespace acldqn

#endif  // ACLDQN_CURRICULUM_HPP_
