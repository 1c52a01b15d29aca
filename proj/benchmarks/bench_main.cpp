#include <benchmark/benchmark.h>

#include "acldqn/knowledge_base.hpp"
#include "acldqn/neural.hpp"
#include "acldqn/replay.hpp"
#include "acldqn/student.hpp"

namespace {

using namespace acldqn;

struct Fixture {
  KnowledgeBase kb = generate_kb(7);
  GoalCorpus corpus = generate_corpus(7, {}, default_ontology(), kb);
};

const Fixture& data() {
  static const Fixture f;
  return f;
}

void BM_StudentForward(benchmark::State& state) {
  Rng rng(1);
  const QFunction q(student_q_config(), rng);
  const Eigen::VectorXd s = Eigen::VectorXd::Random(static_cast<Eigen::Index>(q.input_dim()));
  for (auto _ : state) benchmark::DoNotOptimize(q.forward(s));
}
BENCHMARK(BM_StudentForward);

void BM_StudentTrainStep(benchmark::State& state) {
  Rng rng(1);
  QFunction q(student_q_config(), rng);
  ReplayBuffer buffer(kStudentBufferCapacity, q.input_dim());
  rbs_prefill(buffer, data().corpus, data().kb, 100, 1);
  for (auto _ : state) benchmark::DoNotOptimize(student_train_step(q, buffer, rng));
}
BENCHMARK(BM_StudentTrainStep);

void BM_RuleAgentEpisode(benchmark::State& state) {
  Rng rng(1);
  const SystemActionSet actions;
  const DialoguePolicy rule = [&](const DialogueTracker& t, const Eigen::VectorXd&) {
    return actions.index_of(rule_agent_act(t));
  };
  std::size_t i = 0;
  for (auto _ : state) {
    const UserGoal& goal = data().corpus.at(i++ % data().corpus.size());
    benchmark::DoNotOptimize(run_episode(goal, data().kb, actions, rule, rng));
  }
}
BENCHMARK(BM_RuleAgentEpisode);

void BM_StudentEpisode(benchmark::State& state) {
  Rng rng(1);
  const QFunction q(student_q_config(), rng);
  const SystemActionSet actions;
  const DialoguePolicy greedy = [&](const DialogueTracker&, const Eigen::VectorXd& s) {
    return argmax(q.forward(s));
  };
  std::size_t i = 0;
  for (auto _ : state) {
    const UserGoal& goal = data().corpus.at(i++ % data().corpus.size());
    benchmark::DoNotOptimize(run_episode(goal, data().kb, actions, greedy, rng));
  }
}
BENCHMARK(BM_StudentEpisode);

}  // namespace

BENCHMARK_MAIN();
