#include "acldqn/orchestrator.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "acldqn/replay.hpp"
#include "acldqn/teacher.hpp"

namespace acldqn {
namespace {

constexpr std::array<std::string_view, 5> kAgentNames = {"dqn", "acl-a", "acl-b", "acl-c",
                                                         "acl-a-noorp"};

// Random streams of a training run.
enum Stream : std::uint64_t {
  kStudentInit = 1,
  kTeacherInit = 2,
  kWarmStart = 3,
  kTraining = 4,
  kEvaluation = 5,
};

std::ofstream open_csv(const std::filesystem::path& path, std::string_view header) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << header << '\n';
  return out;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               std::string_view header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw std::runtime_error(path.string() + ": unexpected header");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  return rows;
}

void run_parallel(std::size_t jobs, unsigned workers, const std::function<void(std::size_t)>& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, jobs));
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::string_view agent_name(AgentKind kind) { return kAgentNames.at(static_cast<std::size_t>(kind)); }

std::optional<AgentKind> parse_agent_kind(std::string_view name) {
  for (std::size_t i = 0; i < kAgentNames.size(); ++i) {
    if (kAgentNames[i] == name) return static_cast<AgentKind>(i);
  }
  return std::nullopt;
}

std::vector<std::string_view> agent_names() { return {kAgentNames.begin(), kAgentNames.end()}; }

Schedule TrainConfig::schedule() const {
  switch (agent) {
    case AgentKind::kAclB:
      return Schedule::kB;
    case AgentKind::kAclC:
      return Schedule::kC;
    default:
      return Schedule::kA;
  }
}

void TrainConfig::validate() const {
  if (num_epochs < 1) throw ConfigError("epochs must be >= 1");
  if (epoch_size && *epoch_size == 0) throw ConfigError("epoch size must be >= 1");
  if (gamma < 0.0 || gamma > 1.0) throw ConfigError("gamma must lie in [0, 1]");
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be non-negative");
  if (mastery_window == 0) throw ConfigError("mastery window must be >= 1");
  if (eval_every < 1) throw ConfigError("eval-every must be >= 1");
  if (eval_dialogues < 1) throw ConfigError("eval-dialogues must be >= 1");
  if (student_buffer < kBatchSize || teacher_buffer < kBatchSize) {
    throw ConfigError("replay buffers must hold at least one minibatch");
  }
  if (hidden_dim == 0) throw ConfigError("hidden size must be >= 1");
  if (learning_rate < 0.0 || clip_norm <= 0.0) throw ConfigError("bad optimizer settings");
  if (student_updates_per_turn < 0) throw ConfigError("updates per turn must be >= 0");
  if (teacher_updates_per_episode < 0) throw ConfigError("updates per episode must be >= 0");
  for (const auto* eps : {&student_epsilon, &teacher_epsilon}) {
    if (eps->start < 0.0 || eps->start > 1.0 || eps->end < 0.0 || eps->end > 1.0) {
      throw ConfigError("epsilon schedule must stay within [0, 1]");
    }
  }
}

void TrainConfig::validate_against(const GoalCorpus& corpus, const KnowledgeBase& kb) const {
  validate();
  if (corpus.empty()) throw ConfigError("goal corpus is empty");
  if (kb.size() == 0) throw ConfigError("knowledge base is empty");
  for (const auto& goal : corpus.goals()) {
    if (kb.query(goal.inform_slots()).count == 0) {
      throw ConfigError(fmt::format("goal {} matches no KB row", goal.id()));
    }
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

EvalResult evaluate_with(const DialoguePolicy& policy, const GoalCorpus& corpus,
                         const KnowledgeBase& kb, int n_dialogues, Rng& rng) {
  EvalResult result;
  if (n_dialogues <= 0 || corpus.empty()) return result;
  const SystemActionSet actions;
  std::uniform_int_distribution<std::size_t> pick(0, corpus.size() - 1);
  double reward = 0.0;
  double turns = 0.0;
  int successes = 0;
  for (int i = 0; i < n_dialogues; ++i) {
    const EpisodeResult episode = run_episode(corpus.at(pick(rng)), kb, actions, policy, rng);
    successes += episode.success() ? 1 : 0;
    reward += episode.total_reward;
    turns += episode.turns;
  }
  result.dialogues = n_dialogues;
  result.success_rate = static_cast<double>(successes) / n_dialogues;
  result.avg_reward = reward / n_dialogues;
  result.avg_turns = turns / n_dialogues;
  return result;
}

EvalResult evaluate_policy(const QFunction& student, const GoalCorpus& corpus,
                           const KnowledgeBase& kb, int n_dialogues, Rng& rng) {
  const DialoguePolicy greedy = [&student](const DialogueTracker&, const Eigen::VectorXd& state) {
    return argmax(student.forward(state));
  };
  return evaluate_with(greedy, corpus, kb, n_dialogues, rng);
}

TrainingRun run_training(const TrainConfig& config, std::uint64_t seed, const GoalCorpus& corpus,
                         const KnowledgeBase& kb) {
  config.validate_against(corpus, kb);

  QFunctionConfig student_config = student_q_config();
  student_config.hidden_dim = config.hidden_dim;
  student_config.learning_rate = config.learning_rate;
  student_config.clip_norm = config.clip_norm;
  Rng student_init(derive_seed(seed, kStudentInit));
  QFunction student(student_config, student_init);

  std::optional<QFunction> teacher;
  if (config.uses_teacher()) {
    QFunctionConfig teacher_config = teacher_q_config(corpus.size());
    teacher_config.hidden_dim = config.hidden_dim;
    teacher_config.learning_rate = config.learning_rate;
    teacher_config.clip_norm = config.clip_norm;
    Rng teacher_init(derive_seed(seed, kTeacherInit));
    teacher.emplace(teacher_config, teacher_init);
  }

  ReplayBuffer student_buffer(config.student_buffer, features::kDim);
  const RbsStats rbs =
      rbs_prefill(student_buffer, corpus, kb, config.rbs_dialogues, derive_seed(seed, kWarmStart));
  spdlog::debug("{} seed {}: warm start {} dialogues, {} successes, {} transitions",
                agent_name(config.agent), seed, rbs.dialogues, rbs.successes, rbs.transitions);

  ReplayBuffer teacher_buffer(config.teacher_buffer, teacher_features::kDim);
  GoalRewardTable reward_table(corpus.size());
  CurriculumConfig curriculum_config;
  curriculum_config.schedule = config.schedule();
  curriculum_config.epoch_size = config.effective_epoch_size();
  curriculum_config.alpha = config.alpha;
  curriculum_config.mastery_window = config.mastery_window;
  curriculum_config.orp_enabled = config.orp_enabled();
  CurriculumController curriculum(curriculum_config, corpus);

  Rng rng(derive_seed(seed, kTraining));
  const SystemActionSet actions;
  RecentOutcomes recent;
  TeacherView view;
  Eigen::VectorXd teacher_s = teacher_state(view, corpus);

  MetricsSeries metrics;
  metrics.selection_counts.assign(corpus.size(), 0);

  for (int epoch = 1; epoch <= config.num_epochs; ++epoch) {
    const double student_eps = config.student_epsilon.at(epoch - 1);
    student.sync_target();
    if (teacher) teacher->sync_target();

    GoalIndex goal = 0;
    if (teacher) {
      goal = teacher_act(*teacher, teacher_s, curriculum.active_goals(),
                         config.teacher_epsilon.at(epoch - 1), rng);
    } else {
      std::uniform_int_distribution<GoalIndex> pick(0, corpus.size() - 1);
      goal = pick(rng);
    }
    const double r_or = curriculum.on_goal_sampled(goal);
    ++metrics.selection_counts[goal];

    const DialoguePolicy behaviour = [&](const DialogueTracker&, const Eigen::VectorXd& state) {
      return student_act(student, state, student_eps, rng);
    };
    const TransitionSink learn = [&](Transition t) {
      student_buffer.push(std::move(t));
      for (int k = 0; k < config.student_updates_per_turn; ++k) {
        student_train_step(student, student_buffer, rng, config.gamma);
      }
    };
    const EpisodeResult episode = run_episode(corpus.at(goal), kb, actions, behaviour, rng, learn);
    const double x_now = episode.total_reward;
    if (x_now != episode_total_reward(episode.status, episode.turns)) {
      throw std::logic_error("episode reward accounting mismatch");
    }
    recent.push(episode.success(), x_now);
    metrics.episodes.push_back(EpisodeRow{epoch, corpus.at(goal).id(), corpus.tier_of(goal),
                                          episode.success(), episode.turns, x_now});

    if (teacher) {
      const TeacherReward reward = teacher_reward(r_or, x_now, reward_table, goal);
      view.last = view.current;
      view.current = PlayedGoal{goal, student.param_scalar()};
      view.success_rate = recent.success_rate();
      view.mean_reward = recent.mean_reward();
      const Eigen::VectorXd next_s = teacher_state(view, corpus);
      record_teacher_transition(teacher_buffer, teacher_s, goal, reward.r, next_s);
      for (int k = 0; k < config.teacher_updates_per_episode; ++k) {
        teacher_train_step(*teacher, teacher_buffer, rng, config.gamma);
      }
      metrics.teacher_log.push_back(TeacherLogRow{epoch, corpus.at(goal).id(),
                                                  curriculum.counter().count(goal), reward.r_or,
                                                  reward.x_now, reward.x_prev, reward.r});
      teacher_s = next_s;
    }

    if (auto transition = curriculum.on_episode_end(episode.success(), epoch)) {
      metrics.phase_log.push_back(*transition);
      spdlog::debug("{} seed {}: epoch {} phase {} -> {} ({})", agent_name(config.agent), seed,
                    epoch, phase_name(transition->from), phase_name(transition->to),
                    trigger_name(transition->trigger));
    }

    if (epoch % config.eval_every == 0) {
      Rng eval_rng(derive_seed(derive_seed(seed, kEvaluation), static_cast<std::uint64_t>(epoch)));
      const EvalResult eval = evaluate_policy(student, corpus, kb, config.eval_dialogues, eval_rng);
      metrics.evals.push_back(EvalRow{epoch, eval.success_rate, eval.avg_reward, eval.avg_turns});
      spdlog::debug("{} seed {}: epoch {} success {:.3f} reward {:.2f} turns {:.2f}",
                    agent_name(config.agent), seed, epoch, eval.success_rate, eval.avg_reward,
                    eval.avg_turns);
    }
  }

  return TrainingRun{std::move(metrics), std::move(student), std::move(teacher)};
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double variance_of(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double m = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return ss / static_cast<double>(values.size() - 1);
}

std::vector<CurvePoint> aggregate_curve(const std::vector<MetricsSeries>& runs) {
  std::vector<CurvePoint> curve;
  if (runs.empty()) return curve;
  const std::size_t points = runs.front().evals.size();
  for (const auto& run : runs) {
    if (run.evals.size() != points) throw std::logic_error("runs disagree on evaluation count");
  }
  for (std::size_t i = 0; i < points; ++i) {
    std::vector<double> success, reward, turns;
    for (const auto& run : runs) {
      success.push_back(run.evals[i].success);
      reward.push_back(run.evals[i].reward);
      turns.push_back(run.evals[i].turns);
    }
    curve.push_back(CurvePoint{runs.front().evals[i].epoch, mean_of(success),
                               variance_of(success), mean_of(reward), mean_of(turns)});
  }
  return curve;
}

std::vector<double> ComparisonEntry::success_at(std::optional<int> epoch) const {
  std::vector<double> out;
  for (const auto& run : runs) {
    if (run.evals.empty()) throw std::logic_error("run has no evaluations");
    if (!epoch) {
      out.push_back(run.evals.back().success);
      continue;
    }
    auto it = std::find_if(run.evals.begin(), run.evals.end(),
                           [&](const EvalRow& row) { return row.epoch == *epoch; });
    if (it == run.evals.end()) throw std::out_of_range(fmt::format("no evaluation at epoch {}", *epoch));
    out.push_back(it->success);
  }
  return out;
}

const ComparisonEntry& ComparisonReport::entry(std::string_view label) const {
  for (const auto& e : entries) {
    if (e.label == label) return e;
  }
  throw std::out_of_range("no comparison entry labeled " + std::string(label));
}

ComparisonReport run_comparison(const std::vector<LabeledConfig>& configs,
                                const std::vector<std::uint64_t>& seeds, const GoalCorpus& corpus,
                                const KnowledgeBase& kb, unsigned workers) {
  if (configs.empty()) throw ConfigError("comparison needs at least one configuration");
  if (seeds.empty()) throw ConfigError("comparison needs at least one seed");
  for (const auto& c : configs) c.config.validate_against(corpus, kb);

  ComparisonReport report;
  for (const auto& c : configs) {
    report.entries.push_back(ComparisonEntry{c.label, c.config, seeds, {}, {}});
    report.entries.back().runs.resize(seeds.size());
  }
  run_parallel(configs.size() * seeds.size(), workers, [&](std::size_t job) {
    const std::size_t c = job / seeds.size();
    const std::size_t s = job % seeds.size();
    spdlog::info("run {} seed {}", configs[c].label, seeds[s]);
    report.entries[c].runs[s] = run_training(configs[c].config, seeds[s], corpus, kb).metrics;
  });
  for (auto& entry : report.entries) entry.curve = aggregate_curve(entry.runs);
  return report;
}

ComparisonReport sweep_alpha(const TrainConfig& base, const std::vector<double>& alphas,
                             const std::vector<std::uint64_t>& seeds, const GoalCorpus& corpus,
                             const KnowledgeBase& kb, unsigned workers) {
  if (base.agent != AgentKind::kAclC) throw ConfigError("alpha sweep requires agent acl-c");
  if (alphas.empty()) throw ConfigError("alpha sweep needs at least one alpha");
  std::vector<LabeledConfig> configs;
  for (double a : alphas) {
    TrainConfig c = base;
    c.alpha = a;
    configs.push_back(LabeledConfig{fmt::format("alpha={}", a), c});
  }
  return run_comparison(configs, seeds, corpus, kb, workers);
}

void write_metrics_csv(const std::vector<EvalRow>& rows, const std::filesystem::path& path) {
  auto out = open_csv(path, "epoch,success,reward,turns");
  for (const auto& r : rows) out << fmt::format("{},{},{},{}\n", r.epoch, r.success, r.reward, r.turns);
}

void write_teacher_log_csv(const std::vector<TeacherLogRow>& rows,
                           const std::filesystem::path& path) {
  auto out = open_csv(path, "epoch,goal_id,og,r_or,x_now,x_prev,r");
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{}\n", r.epoch, r.goal_id, r.og, r.r_or, r.x_now,
                       r.x_prev, r.r);
  }
}

void write_phase_log_csv(const std::vector<PhaseTransition>& rows,
                         const std::filesystem::path& path) {
  auto out = open_csv(path, "epoch,from,to,trigger");
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{}\n", r.epoch, phase_name(r.from), phase_name(r.to),
                       trigger_name(r.trigger));
  }
}

void write_episodes_csv(const std::vector<EpisodeRow>& rows, const std::filesystem::path& path) {
  auto out = open_csv(path, "epoch,goal_id,tier,success,turns,reward");
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{}\n", r.epoch, r.goal_id, tier_name(r.tier),
                       r.success ? 1 : 0, r.turns, r.reward);
  }
}

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::filesystem::path& path) {
  auto out = open_csv(path, "epoch,success_mean,success_var,reward_mean,turns_mean");
  for (const auto& p : curve) {
    out << fmt::format("{},{},{},{},{}\n", p.epoch, p.success_mean, p.success_var, p.reward_mean,
                       p.turns_mean);
  }
}

void write_stability_csv(const ComparisonReport& report, const std::filesystem::path& path) {
  auto out = open_csv(path, "agent,seed,final_epoch,final_success");
  for (const auto& entry : report.entries) {
    for (std::size_t s = 0; s < entry.seeds.size(); ++s) {
      const auto& evals = entry.runs[s].evals;
      if (evals.empty()) continue;
      out << fmt::format("{},{},{},{}\n", entry.label, entry.seeds[s], evals.back().epoch,
                         evals.back().success);
    }
  }
}

void write_selection_csv(const ComparisonReport& report, const GoalCorpus& corpus,
                         const std::filesystem::path& path) {
  auto out = open_csv(path, "agent,seed,goal_id,tier,count");
  for (const auto& entry : report.entries) {
    for (std::size_t s = 0; s < entry.seeds.size(); ++s) {
      const auto& counts = entry.runs[s].selection_counts;
      for (std::size_t g = 0; g < counts.size(); ++g) {
        out << fmt::format("{},{},{},{},{}\n", entry.label, entry.seeds[s], corpus.at(g).id(),
                           tier_name(corpus.tier_of(g)), counts[g]);
      }
    }
  }
}

std::vector<EvalRow> read_metrics_csv(const std::filesystem::path& path) {
  std::vector<EvalRow> rows;
  for (const auto& f : read_csv(path, "epoch,success,reward,turns")) {
    if (f.size() != 4) throw std::runtime_error(path.string() + ": malformed metrics row");
    rows.push_back(EvalRow{std::stoi(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3])});
  }
  return rows;
}

std::vector<TeacherLogRow> read_teacher_log_csv(const std::filesystem::path& path) {
  std::vector<TeacherLogRow> rows;
  for (const auto& f : read_csv(path, "epoch,goal_id,og,r_or,x_now,x_prev,r")) {
    if (f.size() != 7) throw std::runtime_error(path.string() + ": malformed teacher log row");
    rows.push_back(TeacherLogRow{std::stoi(f[0]), static_cast<GoalId>(std::stoul(f[1])),
                                 std::stoul(f[2]), std::stod(f[3]), std::stod(f[4]),
                                 std::stod(f[5]), std::stod(f[6])});
  }
  return rows;
}

}  // namespace acldqn
