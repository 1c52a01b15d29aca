// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. ACLDQN_ACCEPTANCE_WORKERS sets the number
// of training threads (default: hardware concurrency).

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "acldqn/curriculum.hpp"
#include "acldqn/logging.hpp"
#include "acldqn/neural.hpp"
#include "acldqn/orchestrator.hpp"
#include "acldqn/student.hpp"

namespace acldqn {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void report(int id, std::string_view name, const Outcome& o) {
  std::printf("[%s] criterion %d: %.*s -- %s\n", o.pass ? "PASS" : "FAIL", id,
              static_cast<int>(name.size()), name.data(), o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++g_failures;
}

std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t max_selection(const MetricsSeries& run) {
  std::size_t m = 0;
  for (std::size_t c : run.selection_counts) m = std::max(m, c);
  return m;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += fmt::format("{}{:.2f}", out.empty() ? "" : " ", x);
  return out;
}

// --- 2, 3, 4 -------------------------------------------------------------

Outcome ordering(const ComparisonReport& r) {
  const double dqn400 = mean_of(r.entry("dqn").success_at(400));
  const double c400 = mean_of(r.entry("acl-c").success_at(400));
  const double dqn = mean_of(r.entry("dqn").success_at());
  const double a = mean_of(r.entry("acl-a").success_at());
  const double c = mean_of(r.entry("acl-c").success_at());
  constexpr double kBand = 0.03;
  const bool margin = c400 >= dqn400 + 0.05;
  const bool order = c + kBand >= a && a + kBand >= dqn;
  return {margin && order,
          fmt::format("epoch 400: acl-c {:.3f} vs dqn {:.3f} (need +0.05); final: acl-c {:.3f}, "
                      "acl-a {:.3f}, dqn {:.3f} (need c >= a >= dqn within 0.03)",
                      c400, dqn400, c, a, dqn)};
}

Outcome stability(const ComparisonReport& r) {
  const auto c = r.entry("acl-c").success_at();
  const auto dqn = r.entry("dqn").success_at();
  const double vc = variance_of(c);
  const double vd = variance_of(dqn);
  return {vc < vd, fmt::format("final success variance acl-c {:.4f} [{}] vs dqn {:.4f} [{}]", vc,
                               join(c), vd, join(dqn))};
}

Outcome orp_ablation(const ComparisonReport& r) {
  const auto& with = r.entry("acl-a").runs;
  const auto& without = r.entry("acl-a-noorp").runs;
  int wins = 0;
  std::string counts;
  for (std::size_t i = 0; i < with.size(); ++i) {
    const std::size_t a = max_selection(with[i]);
    const std::size_t b = max_selection(without[i]);
    wins += b > a ? 1 : 0;
    counts += fmt::format("{}{}/{}", counts.empty() ? "" : " ", b, a);
  }
  return {wins >= 4, fmt::format("noorp > acl-a max selection on {} of {} seeds (noorp/acl-a: {})",
                                 wins, with.size(), counts)};
}

// --- 5 -------------------------------------------------------------------

Outcome reward_identity(const ComparisonReport& r, const std::filesystem::path& dir) {
  std::size_t rows = 0;
  std::size_t bad = 0;
  for (const auto& entry : r.entries) {
    for (std::size_t i = 0; i < entry.runs.size(); ++i) {
      const auto path = dir / fmt::format("teacher_{}_{}.csv", entry.label, entry.seeds[i]);
      write_teacher_log_csv(entry.runs[i].teacher_log, path);
      for (const auto& row : read_teacher_log_csv(path)) {
        ++rows;
        if (row.r != row.r_or + row.x_now - row.x_prev) ++bad;
      }
    }
  }
  return {rows > 0 && bad == 0,
          fmt::format("{} logged teacher transitions, {} violations", rows, bad)};
}

// --- 6 -------------------------------------------------------------------

Outcome gradient_suite() {
  Rng rng(20260);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  constexpr double kEps = 1e-5;
  double worst = 0.0;
  double worst_norm = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    QFunctionConfig c;
    c.input_dim = 1 + rng() % 6;
    c.hidden_dim = 1 + rng() % 8;
    c.output_dim = 1 + rng() % 5;
    const std::size_t b = 1 + rng() % 6;
    QFunction q(c, rng);
    q.set_online(QFunction(c, rng).online());
    Minibatch batch;
    batch.states = Eigen::MatrixXd::NullaryExpr(static_cast<Eigen::Index>(b),
                                                static_cast<Eigen::Index>(c.input_dim), [&] { return u(rng); });
    batch.next_states = Eigen::MatrixXd::NullaryExpr(
        static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(c.input_dim), [&] { return u(rng); });
    batch.rewards = Eigen::VectorXd::NullaryExpr(static_cast<Eigen::Index>(b), [&] { return 40.0 * u(rng); });
    for (std::size_t i = 0; i < b; ++i) {
      batch.actions.push_back(static_cast<int>(rng() % c.output_dim));
      batch.terminal.push_back(rng() % 2 == 0);
    }
    const double gamma = 0.9;
    TdGradient g = q.td_gradient(batch, gamma);
    const std::vector<double> analytic = g.grad.flatten();
    std::vector<double> theta = q.online().flatten();
    MlpParams probe = q.online();
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const double saved = theta[k];
      theta[k] = saved + kEps;
      probe.assign(theta);
      q.set_online(probe);
      const double up = q.td_gradient(batch, gamma).loss;
      theta[k] = saved - kEps;
      probe.assign(theta);
      q.set_online(probe);
      const double down = q.td_gradient(batch, gamma).loss;
      theta[k] = saved;
      const double numeric = (up - down) / (2.0 * kEps);
      const double denom = std::max(1e-7, std::abs(numeric) + std::abs(analytic[k]));
      worst = std::max(worst, std::abs(numeric - analytic[k]) / denom);
    }
    clip_by_global_norm(g.grad, 1.0);
    worst_norm = std::max(worst_norm, std::sqrt(g.grad.squared_norm()));
  }
  return {worst < 1e-4 && worst_norm <= 1.0 + 1e-12,
          fmt::format("max relative error {:.3e} (< 1e-4), max post-clip norm {:.12f} (<= 1)", worst,
                      worst_norm)};
}

// --- 7 -------------------------------------------------------------------

Outcome schedule_b(const ComparisonReport& r) {
  std::size_t ok = 0;
  std::string seen;
  for (const auto& run : r.entry("acl-b").runs) {
    std::vector<int> epochs;
    for (const auto& t : run.phase_log) epochs.push_back(t.epoch);
    if (epochs == std::vector<int>{117, 398}) ++ok;
    if (seen.empty()) {
      for (int e : epochs) seen += fmt::format("{} ", e);
    }
  }
  const std::size_t runs = r.entry("acl-b").runs.size();
  return {ok == runs && runs > 0,
          fmt::format("{} of {} runs transition at exactly 117 and 398 (first run: {})", ok, runs, seen)};
}

// --- 8 -------------------------------------------------------------------

// Line-by-line transcription of the mastery loop, without the budget ceiling.
struct ReferenceMasteryGate {
  double alpha;
  std::size_t t;
  int phase = 0;
  double n_success = 0;
  double n_sampled = 0;
  std::deque<double> window;

  static bool window_passes(const std::deque<double>& w, double alpha, std::size_t t) {
    std::size_t n = 0;
    for (double p : w) {
      if (p >= alpha) n = n + 1;
    }
    return n >= t;
  }

  void episode(bool success) {
    if (phase == 2) return;
    n_sampled = n_sampled + 1;
    if (success) n_success = n_success + 1;
    const double p_success = n_success / n_sampled;
    window.push_back(p_success);
    if (window.size() > t) window.pop_front();
    if (window_passes(window, alpha, t)) {
      phase = phase + 1;
      n_success = 0;
      n_sampled = 0;
      window.clear();
    }
  }
};

Outcome schedule_c_gate() {
  std::string detail;
  bool scenarios = true;
  const std::vector<std::pair<std::vector<double>, bool>> cases = {
      {{0.6, 0.6, 0.6, 0.6, 0.6}, true}, {{0.6, 0.6, 0.4, 0.6, 0.6}, false}, {{0.6, 0.6, 0.6, 0.6}, false}};
  for (const auto& [window, expected] : cases) {
    const std::deque<double> w(window.begin(), window.end());
    const bool ref = ReferenceMasteryGate::window_passes(w, 0.5, 5) && w.size() >= 5;
    const bool lib = mastery_reached(window, 0.5, 5);
    scenarios = scenarios && ref == expected && lib == expected;
  }
  detail += fmt::format("window scenarios {}; ", scenarios ? "agree" : "DISAGREE");

  Rng rng(31337);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const TierSizes sizes = default_tier_sizes(128);
  std::size_t mismatched = 0;
  std::size_t advances = 0;
  for (int stream = 0; stream < 10000; ++stream) {
    const double alpha = 0.1 * static_cast<double>(1 + rng() % 9);
    const double p = u(rng);
    // Large epoch size so the budget ceiling never binds.
    PhaseMachine machine(Schedule::kC, sizes, 1000000);
    MasteryTracker tracker(alpha, 5);
    ReferenceMasteryGate ref{alpha, 5};
    const std::size_t length = 1 + rng() % 200;
    for (std::size_t i = 0; i < length; ++i) {
      const bool success = u(rng) < p;
      if (schedule_c_advance(machine, tracker, success)) ++advances;
      ref.episode(success);
      if (static_cast<int>(machine.phase()) != ref.phase) {
        ++mismatched;
        break;
      }
    }
  }
  detail += fmt::format("{} of 10000 random streams diverge ({} advances seen)", mismatched, advances);
  return {scenarios && mismatched == 0 && advances > 0, detail};
}

// --- 9 -------------------------------------------------------------------

Outcome orp_properties() {
  bool ok = orp_penalty(0) == 0.0;
  double prev = orp_penalty(0);
  for (std::size_t og = 1; og <= 10000; ++og) {
    const double p = orp_penalty(og);
    ok = ok && p > -40.0 && p <= 0.0 && p < prev;
    prev = p;
  }
  return {ok, fmt::format("og in [0, 10000]: ORP(0) = {}, ORP(10000) = {:.6f}", orp_penalty(0),
                          orp_penalty(10000))};
}

// --- 10 ------------------------------------------------------------------

Outcome reward_accounting(const GoalCorpus& corpus, const KnowledgeBase& kb) {
  Rng rng(4242);
  const SystemActionSet actions;
  std::uniform_int_distribution<int> any(0, static_cast<int>(actions.size()) - 1);
  const DialoguePolicy random_policy = [&](const DialogueTracker&, const Eigen::VectorXd&) {
    return any(rng);
  };
  std::size_t bad = 0;
  std::size_t successes = 0;
  for (int i = 0; i < 1000; ++i) {
    double summed = 0.0;
    const EpisodeResult r = run_episode(corpus.at(rng() % corpus.size()), kb, actions, random_policy,
                                        rng, [&](Transition t) { summed += t.reward; });
    const double expected = -static_cast<double>(r.turns) + (r.success() ? 80.0 : -40.0);
    if (r.total_reward != expected || summed != expected) ++bad;
    successes += r.success() ? 1 : 0;
  }
  return {bad == 0, fmt::format("1000 random episodes ({} successes), {} mismatches", successes, bad)};
}

// --- 11 ------------------------------------------------------------------

Outcome determinism(const ComparisonReport& r, const GoalCorpus& corpus, const KnowledgeBase& kb,
                    const std::filesystem::path& dir) {
  const ComparisonEntry& entry = r.entry("acl-c");
  const TrainingRun rerun = run_training(entry.config, entry.seeds.front(), corpus, kb);
  write_metrics_csv(entry.runs.front().evals, dir / "metrics_a.csv");
  write_metrics_csv(rerun.metrics.evals, dir / "metrics_b.csv");
  write_episodes_csv(entry.runs.front().episodes, dir / "episodes_a.csv");
  write_episodes_csv(rerun.metrics.episodes, dir / "episodes_b.csv");
  const std::string a = read_bytes(dir / "metrics_a.csv");
  const std::string b = read_bytes(dir / "metrics_b.csv");
  const bool same = !a.empty() && a == b &&
                    read_bytes(dir / "episodes_a.csv") == read_bytes(dir / "episodes_b.csv");
  return {same, fmt::format("acl-c seed {}: metrics.csv {} bytes, identical: {}", entry.seeds.front(),
                            a.size(), same ? "yes" : "no")};
}

// --- 12 ------------------------------------------------------------------

Outcome alpha_sweep(const GoalCorpus& corpus, const KnowledgeBase& kb, unsigned workers,
                    const std::filesystem::path& dir) {
  const std::vector<double> alphas = {0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  TrainConfig base;
  base.agent = AgentKind::kAclC;
  const ComparisonReport sweep = sweep_alpha(base, alphas, {1, 2, 3}, corpus, kb, workers);
  std::size_t files = 0;
  std::string finals;
  for (const auto& e : sweep.entries) {
    const auto path = dir / fmt::format("curve_{}.csv", e.label);
    write_curve_csv(e.curve, path);
    if (std::filesystem::exists(path) && e.curve.size() == 100) ++files;
    finals += fmt::format("{}{} {:.2f}", finals.empty() ? "" : ", ", e.label, e.curve.back().success_mean);
  }
  return {sweep.entries.size() == alphas.size() && files == alphas.size(),
          fmt::format("{} curves of 100 points written (3 seeds x 500 epochs; final success: {})", files,
                      finals)};
}

int run() {
  configure_logging_from_env();
  unsigned workers = 0;
  if (const char* w = std::getenv("ACLDQN_ACCEPTANCE_WORKERS")) workers = static_cast<unsigned>(std::atoi(w));

  const KnowledgeBase kb = generate_kb(7);
  const GoalCorpus corpus = generate_corpus(7, {}, default_ontology(), kb);
  const auto dir = std::filesystem::temp_directory_path() /
                   fmt::format("acldqn-acceptance-{}", std::random_device{}());
  std::filesystem::create_directories(dir);

  std::printf("criterion 1: exact table values are not reproducible on a synthetic corpus; "
              "criteria 2-4 check the ordering, stability and ablation claims instead\n");

  // Fast checks first.
  report(6, "gradient suite", gradient_suite());
  report(8, "schedule C gate", schedule_c_gate());
  report(9, "ORP properties", orp_properties());
  report(10, "reward accounting", reward_accounting(corpus, kb));

  std::vector<LabeledConfig> configs;
  for (AgentKind kind : {AgentKind::kDqn, AgentKind::kAclA, AgentKind::kAclB, AgentKind::kAclC,
                         AgentKind::kAclANoOrp}) {
    TrainConfig c;
    c.agent = kind;
    configs.push_back({std::string(agent_name(kind)), c});
  }
  const ComparisonReport report_all = run_comparison(configs, {1, 2, 3, 4, 5}, corpus, kb, workers);

  report(2, "ordering", ordering(report_all));
  report(3, "stability", stability(report_all));
  report(4, "ORP ablation", orp_ablation(report_all));
  report(5, "teacher reward identity", reward_identity(report_all, dir));
  report(7, "schedule B budgets", schedule_b(report_all));
  report(11, "determinism", determinism(report_all, corpus, kb, dir));
  report(12, "mastery sweep", alpha_sweep(corpus, kb, workers, dir));

  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
  std::printf("%d criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace acldqn

int main() { return acldqn::run(); }
