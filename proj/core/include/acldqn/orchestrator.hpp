#ifndef ACLDQN_ORCHESTRATOR_HPP_
#define ACLDQN_ORCHESTRATOR_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "acldqn/curriculum.hpp"
#include "acldqn/domain.hpp"
#include "acldqn/knowledge_base.hpp"
#include "acldqn/neural.hpp"
#include "acldqn/student.hpp"

namespace acldqn {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class AgentKind : std::uint8_t { kDqn, kAclA, kAclB, kAclC, kAclANoOrp };

std::string_view agent_name(AgentKind kind);  // dqn, acl-a, acl-b, acl-c, acl-a-noorp
std::optional<AgentKind> parse_agent_kind(std::string_view name);
std::vector<std::string_view> agent_names();

struct TrainConfig {
  AgentKind agent = AgentKind::kDqn;
  int num_epochs = 500;
  // Schedule B/C phase budgets are computed against this; defaults to
  // num_epochs.
  std::optional<std::size_t> epoch_size;
  double gamma = 0.9;
  double alpha = 0.5;
  std::size_t mastery_window = 5;
  int eval_every = 5;
  int eval_dialogues = 50;
  std::size_t rbs_dialogues = 100;
  std::size_t student_buffer = kStudentBufferCapacity;
  std::size_t teacher_buffer = kTeacherBufferCapacity;
  std::size_t hidden_dim = 80;
  double learning_rate = 1e-3;
  double clip_norm = 1.0;
  // Student minibatch updates per collected dialogue turn.
  int student_updates_per_turn = 20;
  // Teacher minibatch updates per finished episode.
  int teacher_updates_per_episode = 20;
  EpsilonSchedule student_epsilon;
  EpsilonSchedule teacher_epsilon;

  std::size_t effective_epoch_size() const {
    return epoch_size.value_or(static_cast<std::size_t>(num_epochs));
  }
  bool uses_teacher() const { return agent != AgentKind::kDqn; }
  Schedule schedule() const;
  bool orp_enabled() const { return agent != AgentKind::kAclANoOrp; }

  // Throws ConfigError describing the first inconsistency.
  void validate() const;
  void validate_against(const GoalCorpus& corpus, const KnowledgeBase& kb) const;
};

struct EvalRow {
  int epoch = 0;
  double success = 0.0;
  double reward = 0.0;
  double turns = 0.0;

  friend bool operator==(const EvalRow&, const EvalRow&) = default;
};

struct EpisodeRow {
  int epoch = 0;
  GoalId goal_id = 0;
  Tier tier = Tier::kSimple;
  bool success = false;
  int turns = 0;
  double reward = 0.0;

  friend bool operator==(const EpisodeRow&, const EpisodeRow&) = default;
};

struct TeacherLogRow {
  int epoch = 0;
  GoalId goal_id = 0;
  std::size_t og = 0;  // samples of this goal in the current phase, including this one
  double r_or = 0.0;
  double x_now = 0.0;
  double x_prev = 0.0;
  double r = 0.0;

  friend bool operator==(const TeacherLogRow&, const TeacherLogRow&) = default;
};

struct MetricsSeries {
  std::vector<EvalRow> evals;
  std::vector<EpisodeRow> episodes;
  std::vector<TeacherLogRow> teacher_log;
  std::vector<PhaseTransition> phase_log;
  std::vector<std::size_t> selection_counts;  // by corpus position

  friend bool operator==(const MetricsSeries&, const MetricsSeries&) = default;
};

struct TrainingRun {
  MetricsSeries metrics;
  QFunction student;
  std::optional<QFunction> teacher;
};

TrainingRun run_training(const TrainConfig& config, std::uint64_t seed, const GoalCorpus& corpus,
                         const KnowledgeBase& kb);

struct EvalResult {
  double success_rate = 0.0;
  double avg_reward = 0.0;
  double avg_turns = 0.0;
  int dialogues = 0;
};

// Greedy rollouts on goals drawn uniformly from the whole corpus. Touches
// neither parameters nor buffers.
EvalResult evaluate_policy(const QFunction& student, const GoalCorpus& corpus,
                           const KnowledgeBase& kb, int n_dialogues, Rng& rng);
EvalResult evaluate_with(const DialoguePolicy& policy, const GoalCorpus& corpus,
                         const KnowledgeBase& kb, int n_dialogues, Rng& rng);

// Independent sub-seed for one random stream of a run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

struct CurvePoint {
  int epoch = 0;
  double success_mean = 0.0;
  double success_var = 0.0;
  double reward_mean = 0.0;
  double turns_mean = 0.0;
};

struct LabeledConfig {
  std::string label;
  TrainConfig config;
};

struct ComparisonEntry {
  std::string label;
  TrainConfig config;
  std::vector<std::uint64_t> seeds;
  std::vector<MetricsSeries> runs;  // parallel to seeds
  std::vector<CurvePoint> curve;

  // Evaluated success of every seed at `epoch` (the last eval when absent).
  std::vector<double> success_at(std::optional<int> epoch = std::nullopt) const;
};

struct ComparisonReport {
  std::vector<ComparisonEntry> entries;

  const ComparisonEntry& entry(std::string_view label) const;
};

// Runs every (config, seed) pair, on up to `workers` threads, and
// aggregates per-epoch means and sample variances across seeds.
ComparisonReport run_comparison(const std::vector<LabeledConfig>& configs,
                                const std::vector<std::uint64_t>& seeds, const GoalCorpus& corpus,
                                const KnowledgeBase& kb, unsigned workers = 0);

// Schedule C runs for each mastery threshold, labeled "alpha=<value>".
ComparisonReport sweep_alpha(const TrainConfig& base, const std::vector<double>& alphas,
                             const std::vector<std::uint64_t>& seeds, const GoalCorpus& corpus,
                             const KnowledgeBase& kb, unsigned workers = 0);

std::vector<CurvePoint> aggregate_curve(const std::vector<MetricsSeries>& runs);

double mean_of(const std::vector<double>& values);
// Sample variance (n - 1 denominator); 0 for fewer than two values.
double variance_of(const std::vector<double>& values);

// CSV writers; headers are part of the file format.
void write_metrics_csv(const std::vector<EvalRow>& rows, const std::filesystem::path& path);
void write_teacher_log_csv(const std::vector<TeacherLogRow>& rows,
                           const std::filesystem::path& path);
void write_phase_log_csv(const std::vector<PhaseTransition>& rows,
                         const std::filesystem::path& path);
void write_episodes_csv(const std::vector<EpisodeRow>& rows, const std::filesystem::path& path);
void write_curve_csv(const std::vector<CurvePoint>& curve, const std::filesystem::path& path);
void write_stability_csv(const ComparisonReport& report, const std::filesystem::path& path);
void write_selection_csv(const ComparisonReport& report, const GoalCorpus& corpus,
                         const std::filesystem::path& path);

std::vector<EvalRow> read_metrics_csv(const std::filesystem::path& path);
std::vector<TeacherLogRow> read_teacher_log_csv(const std::filesystem::path& path);

}  // namespace acldqn

#endif  // ACLDQN_ORCHESTRATOR_HPP_
