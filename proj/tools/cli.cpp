#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "acldqn/knowledge_base.hpp"
#include "acldqn/logging.hpp"
#include "acldqn/orchestrator.hpp"
#include "chat.hpp"

namespace acldqn::cli {
namespace {

namespace fs = std::filesystem;

// Corpus and KB used when --goals / --kb are not given.
constexpr std::uint64_t kDataSeed = 7;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Options {
  std::string agent = "dqn";
  std::string agents = "dqn,acl-a,acl-b,acl-c";
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> data_seed;
  std::string seeds = "1..5";
  int epochs = 500;
  double alpha = 0.5;
  std::string alphas = "0.3,0.4,0.5,0.6,0.7,0.8";
  std::string goals;
  std::string kb;
  std::string out = ".";
  std::string checkpoint;
  int eval_every = 5;
  int eval_dialogues = 50;
  std::string sizes = "30,72,26";
  unsigned threads = 0;
  int sessions = 1;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, sep)) parts.push_back(part);
  return parts;
}

std::uint64_t parse_u64(const std::string& text) {
  std::size_t used = 0;
  if (text.empty() || text.front() == '-') throw UsageError("not a non-negative integer: '" + text + "'");
  const unsigned long long v = std::stoull(text, &used);
  if (used != text.size()) throw UsageError("not a non-negative integer: '" + text + "'");
  return v;
}

TierSizes parse_sizes(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) throw UsageError("--sizes expects three comma-separated counts");
  return {parse_u64(parts[0]), parse_u64(parts[1]), parse_u64(parts[2])};
}

std::vector<double> parse_alphas(const std::string& text) {
  std::vector<double> alphas;
  for (const auto& part : split(text, ',')) {
    std::size_t used = 0;
    double a = 0.0;
    try {
      a = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size()) throw UsageError("bad --alphas entry '" + part + "'");
    alphas.push_back(a);
  }
  if (alphas.empty()) throw UsageError("--alphas is empty");
  return alphas;
}

std::vector<AgentKind> parse_agents(const std::string& text) {
  std::vector<AgentKind> kinds;
  for (const auto& name : split(text, ',')) {
    const auto kind = parse_agent_kind(name);
    if (!kind) {
      std::string valid;
      for (auto n : agent_names()) valid += (valid.empty() ? "" : ", ") + std::string(n);
      throw UsageError("unknown agent '" + name + "' (valid: " + valid + ")");
    }
    kinds.push_back(*kind);
  }
  if (kinds.empty()) throw UsageError("--agents is empty");
  return kinds;
}

struct Data {
  KnowledgeBase kb;
  GoalCorpus corpus;
};

Data load_data(const Options& o) {
  KnowledgeBase kb = o.kb.empty() ? generate_kb(kDataSeed) : load_kb(o.kb);
  GoalCorpus corpus = o.goals.empty() ? generate_corpus(kDataSeed, {}, default_ontology(), kb)
                                      : load_corpus(o.goals);
  return {std::move(kb), std::move(corpus)};
}

TrainConfig train_config(const Options& o, AgentKind agent) {
  TrainConfig c;
  c.agent = agent;
  c.num_epochs = o.epochs;
  c.alpha = o.alpha;
  c.eval_every = o.eval_every;
  c.eval_dialogues = o.eval_dialogues;
  c.validate();
  return c;
}

fs::path out_dir(const Options& o) {
  fs::path dir(o.out);
  fs::create_directories(dir);
  return dir;
}

// Routes the default logger to stderr and a file inside --out while alive.
class RunLog {
 public:
  explicit RunLog(const fs::path& file) : previous_(spdlog::default_logger()) {
    auto console = std::make_shared<spdlog::sinks::stderr_sink_mt>();
    console->set_level(previous_->level());
    auto sink = std::make_shared<spdlog::sinks::basic_file_sink_mt>(file.string(), true);
    sink->set_level(spdlog::level::debug);
    auto logger = std::make_shared<spdlog::logger>("acldqn", spdlog::sinks_init_list{console, sink});
    logger->set_level(spdlog::level::debug);
    spdlog::set_default_logger(logger);
  }
  ~RunLog() {
    spdlog::default_logger()->flush();
    spdlog::set_default_logger(previous_);
  }
  RunLog(const RunLog&) = delete;
  RunLog& operator=(const RunLog&) = delete;

 private:
  std::shared_ptr<spdlog::logger> previous_;
};

QFunction load_student(const std::string& path) {
  QFunction q = load_checkpoint(path);
  const QFunctionConfig want = student_q_config();
  if (q.input_dim() != want.input_dim || q.output_dim() != want.output_dim) {
    throw CheckpointError(fmt::format("{}: not a student checkpoint ({} -> {})", path, q.input_dim(),
                                      q.output_dim()));
  }
  return q;
}

int cmd_gen_goals(const Options& o, std::ostream& out) {
  const TierSizes sizes = parse_sizes(o.sizes);
  const KnowledgeBase kb = o.kb.empty() ? generate_kb(kDataSeed) : load_kb(o.kb);
  const GoalCorpus corpus = generate_corpus(o.data_seed.value_or(kDataSeed), sizes, default_ontology(), kb);
  const fs::path path = out_dir(o) / "goals.jsonl";
  save_corpus(corpus, path);
  out << fmt::format("wrote {} goals to {}\n", corpus.size(), path.string());
  return kExitOk;
}

int cmd_gen_kb(const Options& o, std::ostream& out) {
  const KnowledgeBase kb = generate_kb(o.data_seed.value_or(kDataSeed));
  const fs::path path = out_dir(o) / "kb.jsonl";
  save_kb(kb, path);
  out << fmt::format("wrote {} rows to {}\n", kb.size(), path.string());
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  const auto kinds = parse_agents(o.agent);
  if (kinds.size() != 1) throw UsageError("--agent takes a single agent");
  const TrainConfig config = train_config(o, kinds.front());
  const Data data = load_data(o);
  config.validate_against(data.corpus, data.kb);
  const fs::path dir = out_dir(o);

  TrainingRun run = [&] {
    RunLog log(dir / "train.log");
    spdlog::info("training {} seed {} for {} epochs", agent_name(config.agent), o.seed, config.num_epochs);
    return run_training(config, o.seed, data.corpus, data.kb);
  }();
  write_metrics_csv(run.metrics.evals, dir / "metrics.csv");
  write_episodes_csv(run.metrics.episodes, dir / "episodes.csv");
  write_phase_log_csv(run.metrics.phase_log, dir / "phase_log.csv");
  save_checkpoint(run.student, dir / "student.ckpt");
  if (run.teacher) {
    write_teacher_log_csv(run.metrics.teacher_log, dir / "teacher_log.csv");
    save_checkpoint(*run.teacher, dir / "teacher.ckpt");
  }
  const double final_success = run.metrics.evals.empty() ? 0.0 : run.metrics.evals.back().success;
  out << fmt::format("final success rate: {:.4f}\n", final_success);
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  if (o.eval_dialogues < 1) throw UsageError("--eval-dialogues must be >= 1");
  const QFunction student = load_student(o.checkpoint);
  const Data data = load_data(o);
  Rng rng(o.seed);
  const EvalResult r = evaluate_policy(student, data.corpus, data.kb, o.eval_dialogues, rng);
  out << fmt::format("dialogues {} success {:.4f} reward {:.3f} turns {:.3f}\n", r.dialogues,
                     r.success_rate, r.avg_reward, r.avg_turns);
  return kExitOk;
}

void write_report(const ComparisonReport& report, const GoalCorpus& corpus, const fs::path& dir,
                  std::ostream& out) {
  for (const auto& e : report.entries) {
    write_curve_csv(e.curve, dir / fmt::format("curve_{}.csv", e.label));
    const auto final_success = e.success_at();
    out << fmt::format("{:<12} final success mean {:.4f} var {:.5f}\n", e.label, mean_of(final_success),
                       variance_of(final_success));
  }
  write_stability_csv(report, dir / "stability.csv");
  write_selection_csv(report, corpus, dir / "selection.csv");
}

int cmd_compare(const Options& o, std::ostream& out) {
  std::vector<LabeledConfig> configs;
  for (AgentKind kind : parse_agents(o.agents)) {
    configs.push_back({std::string(agent_name(kind)), train_config(o, kind)});
  }
  const auto seeds = parse_seeds(o.seeds);
  const Data data = load_data(o);
  for (const auto& c : configs) c.config.validate_against(data.corpus, data.kb);
  const fs::path dir = out_dir(o);
  ComparisonReport report = [&] {
    RunLog log(dir / "compare.log");
    return run_comparison(configs, seeds, data.corpus, data.kb, o.threads);
  }();
  write_report(report, data.corpus, dir, out);
  return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const TrainConfig base = train_config(o, AgentKind::kAclC);
  const auto alphas = parse_alphas(o.alphas);
  const auto seeds = parse_seeds(o.seeds);
  const Data data = load_data(o);
  base.validate_against(data.corpus, data.kb);
  const fs::path dir = out_dir(o);
  ComparisonReport report = [&] {
    RunLog log(dir / "sweep.log");
    return sweep_alpha(base, alphas, seeds, data.corpus, data.kb, o.threads);
  }();
  write_report(report, data.corpus, dir, out);
  return kExitOk;
}

int cmd_chat(const Options& o, std::istream& in, std::ostream& out) {
  if (o.sessions < 1) throw UsageError("--sessions must be >= 1");
  const QFunction student = load_student(o.checkpoint);
  const Data data = load_data(o);
  const fs::path dir = out_dir(o);
  const fs::path log_path = dir / "chat_log.csv";

  int session = 0;
  if (fs::exists(log_path)) {
    std::ifstream existing(log_path);
    std::string line;
    while (std::getline(existing, line)) ++session;
    session = std::max(session - 1, 0);
  }
  const bool fresh = session == 0 && !fs::exists(log_path);
  std::ofstream log(log_path, std::ios::app);
  std::ofstream transcripts(dir / "chat_transcripts.txt", std::ios::app);
  if (!log || !transcripts) throw std::runtime_error("cannot write chat logs in " + dir.string());
  if (fresh) log << "session,checkpoint,goal_id,tier,success,abandoned,turns,score\n";

  Rng rng(o.seed);
  std::uniform_int_distribution<std::size_t> pick(0, data.corpus.size() - 1);
  for (int i = 0; i < o.sessions; ++i) {
    const std::size_t pos = pick(rng);
    const UserGoal& goal = data.corpus.at(pos);
    ++session;
    out << fmt::format("\n=== session {} ===\n", session);
    const ChatResult r = chat_session(student, goal, data.kb, in, out);
    log << fmt::format("{},{},{},{},{},{},{},{}\n", session, o.checkpoint, goal.id(),
                       tier_name(data.corpus.tier_of(pos)), r.success ? 1 : 0, r.abandoned ? 1 : 0,
                       r.turns, r.score ? std::to_string(*r.score) : "");
    transcripts << fmt::format("=== session {} ({}) ===\n{}", session, o.checkpoint, r.transcript);
    log.flush();
    transcripts.flush();
    if (!in) break;
  }
  return kExitOk;
}

}  // namespace

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const std::uint64_t lo = parse_u64(text.substr(0, dots));
    const std::uint64_t hi = parse_u64(text.substr(dots + 2));
    if (hi < lo) throw UsageError("empty seed range '" + text + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  for (const auto& part : split(text, ',')) seeds.push_back(parse_u64(part));
  if (seeds.empty()) throw UsageError("no seeds given");
  return seeds;
}

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  configure_logging_from_env();
  Options o;
  CLI::App app{"Curriculum-driven DQN dialogue policy training", "acldqn"};
  app.require_subcommand(1);

  std::string agents_help;
  for (auto n : agent_names()) agents_help += (agents_help.empty() ? "" : ", ") + std::string(n);

  auto add_data = [&](CLI::App* cmd) {
    cmd->add_option("--goals", o.goals, "Goal corpus (JSONL); generated from seed 7 when omitted")
        ->check(CLI::ExistingFile);
    cmd->add_option("--kb", o.kb, "Knowledge base (JSONL); generated from seed 7 when omitted")
        ->check(CLI::ExistingFile);
  };
  auto add_training = [&](CLI::App* cmd) {
    cmd->add_option("--epochs", o.epochs, "Training epochs (one dialogue each)");
    cmd->add_option("--alpha", o.alpha, "Mastery threshold for acl-c");
    cmd->add_option("--eval-every", o.eval_every, "Epochs between evaluations");
    cmd->add_option("--eval-dialogues", o.eval_dialogues, "Dialogues per evaluation");
  };
  auto add_out = [&](CLI::App* cmd) { cmd->add_option("--out", o.out, "Output directory"); };

  auto* gen_goals = app.add_subcommand("gen-goals", "Write a synthetic goal corpus to OUT/goals.jsonl");
  gen_goals->add_option("--seed", o.data_seed, "Generator seed (default 7)");
  gen_goals->add_option("--sizes", o.sizes, "Tier sizes simple,medium,difficult");
  gen_goals->add_option("--kb", o.kb, "Knowledge base the goals are drawn from")->check(CLI::ExistingFile);
  add_out(gen_goals);

  auto* gen_kb = app.add_subcommand("gen-kb", "Write a synthetic knowledge base to OUT/kb.jsonl");
  gen_kb->add_option("--seed", o.data_seed, "Generator seed (default 7)");
  add_out(gen_kb);

  auto* train = app.add_subcommand("train", "Train one agent");
  train->add_option("--agent", o.agent, "One of: " + agents_help);
  train->add_option("--seed", o.seed, "Run seed");
  add_training(train);
  add_data(train);
  add_out(train);

  auto* eval = app.add_subcommand("eval", "Evaluate a student checkpoint greedily");
  eval->add_option("--checkpoint", o.checkpoint, "Student checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_option("--seed", o.seed, "Evaluation seed");
  eval->add_option("--eval-dialogues", o.eval_dialogues, "Dialogues to run");
  add_data(eval);

  auto* compare = app.add_subcommand("compare", "Train several agents over several seeds");
  compare->add_option("--agents", o.agents, "Comma-separated agents");
  compare->add_option("--seeds", o.seeds, "Seed list (1,2,3) or range (1..5)");
  compare->add_option("--threads", o.threads, "Worker threads (0: all cores)");
  add_training(compare);
  add_data(compare);
  add_out(compare);

  auto* sweep = app.add_subcommand("sweep-alpha", "Train acl-c for several mastery thresholds");
  sweep->add_option("--alphas", o.alphas, "Comma-separated thresholds");
  sweep->add_option("--seeds", o.seeds, "Seed list (1,2,3) or range (1..5)");
  sweep->add_option("--threads", o.threads, "Worker threads (0: all cores)");
  add_training(sweep);
  add_data(sweep);
  add_out(sweep);

  auto* chat = app.add_subcommand("chat", "Talk to a student checkpoint as the user");
  chat->add_option("--checkpoint", o.checkpoint, "Student checkpoint")->required()->check(CLI::ExistingFile);
  chat->add_option("--seed", o.seed, "Seed for drawing goals");
  chat->add_option("--sessions", o.sessions, "Number of dialogues");
  add_data(chat);
  add_out(chat);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*gen_goals) return cmd_gen_goals(o, out);
    if (*gen_kb) return cmd_gen_kb(o, out);
    if (*train) return cmd_train(o, out);
    if (*eval) return cmd_eval(o, out);
    if (*compare) return cmd_compare(o, out);
    if (*sweep) return cmd_sweep(o, out);
    if (*chat) return cmd_chat(o, in, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace acldqn::cli
