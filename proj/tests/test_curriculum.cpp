#include <gtest/gtest.h>

#include <deque>

#include "acldqn/curriculum.hpp"
#include "test_util.hpp"

namespace acldqn {
namespace {

TEST(Orp, ExhaustiveProperties) {
  EXPECT_EQ(orp_penalty(0), 0.0);
  double previous = orp_penalty(0);
  for (std::size_t og = 1; og <= 10000; ++og) {
    const double p = orp_penalty(og);
    ASSERT_GT(p, -40.0) << og;
    ASSERT_LE(p, 0.0) << og;
    ASSERT_LT(p, previous) << og;
    previous = p;
  }
}

TEST(Orp, Examples) {
  EXPECT_DOUBLE_EQ(orp_penalty(10), -20.0);
  EXPECT_DOUBLE_EQ(orp_penalty(30), -30.0);
}

TEST(OverRepetitionCounter, PenaltyUsesCountBeforeSample) {
  const std::vector<GoalIndex> active = {4, 9};
  OverRepetitionCounter counter(active);
  EXPECT_EQ(counter.on_goal_sampled(9), 0.0);
  EXPECT_EQ(counter.count(9), 1u);
  EXPECT_DOUBLE_EQ(counter.on_goal_sampled(9), orp_penalty(1));
  EXPECT_EQ(counter.count(4), 0u);
  EXPECT_THROW(counter.on_goal_sampled(5), ContractViolation);
  const std::vector<GoalIndex> next = {5};
  counter.reset(next);
  EXPECT_EQ(counter.size(), 1u);
  EXPECT_EQ(counter.count(9), 0u);
  EXPECT_EQ(counter.on_goal_sampled(5), 0.0);
}

// Straightforward transcription of the mastery window rule used as an oracle.
class ReferenceGate {
 public:
  ReferenceGate(double alpha, std::size_t t) : alpha_(alpha), t_(t) {}

  bool step(bool success) {
    n_sampled_ += 1;
    if (success) n_success_ += 1;
    const double p_success = static_cast<double>(n_success_) / static_cast<double>(n_sampled_);
    window_.push_back(p_success);
    if (window_.size() > t_) window_.pop_front();
    std::size_t n = 0;
    for (double w : window_) {
      if (w >= alpha_) n += 1;
    }
    if (n >= t_) {
      n_success_ = 0;
      n_sampled_ = 0;
      window_.clear();
      return true;
    }
    return false;
  }

 private:
  double alpha_;
  std::size_t t_;
  int n_success_ = 0;
  int n_sampled_ = 0;
  std::deque<double> window_;
};

// Runs outcomes through the tracker and reports whether the last one
// triggered.
bool tracker_after(const std::vector<bool>& outcomes, double alpha = 0.5) {
  MasteryTracker tracker(alpha, 5);
  bool result = false;
  for (bool o : outcomes) result = tracker.record(o);
  return result;
}

TEST(Mastery, WindowExamples) {
  // Snapshots 1, 1, 2/3, 3/4, 3/5: all >= 0.5.
  EXPECT_TRUE(tracker_after({true, true, false, true, false}));
  // Snapshots 1, 0.5, 1/3, 0.5, 0.6: one entry below alpha.
  EXPECT_FALSE(tracker_after({true, false, false, true, true}));
  // Fewer than five snapshots never trigger.
  EXPECT_FALSE(tracker_after({true, true, true, true}));
}

TEST(Mastery, WindowPredicate) {
  const std::vector<double> all = {0.6, 0.6, 0.6, 0.6, 0.6};
  const std::vector<double> one_low = {0.6, 0.6, 0.4, 0.6, 0.6};
  const std::vector<double> short_window = {0.9, 0.9, 0.9, 0.9};
  EXPECT_TRUE(mastery_reached(all, 0.5, 5));
  EXPECT_FALSE(mastery_reached(one_low, 0.5, 5));
  EXPECT_FALSE(mastery_reached(short_window, 0.5, 5));
  EXPECT_TRUE(mastery_reached(all, 0.6, 5));
  EXPECT_FALSE(mastery_reached(all, 0.61, 5));
}

TEST(Mastery, WindowContents) {
  MasteryTracker tracker(0.5, 5);
  for (bool o : {true, false, false, true, true, true}) tracker.record(o);
  const std::deque<double> expected = {0.5, 1.0 / 3.0, 0.5, 0.6, 4.0 / 6.0};
  EXPECT_EQ(tracker.window(), expected);
  EXPECT_EQ(tracker.n_sampled(), 6u);
  EXPECT_EQ(tracker.n_success(), 4u);
  tracker.reset();
  EXPECT_TRUE(tracker.window().empty());
  EXPECT_EQ(tracker.p_success(), 0.0);
}

TEST(Mastery, GateMatchesReferenceOnRandomStreams) {
  Rng rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::array<double, 6> alphas = {0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  for (int stream = 0; stream < 10000; ++stream) {
    const double alpha = alphas[static_cast<std::size_t>(stream) % alphas.size()];
    const double p = u(rng);
    const std::size_t length = 1 + rng() % 60;
    ReferenceGate reference(alpha, 5);
    MasteryTracker tracker(alpha, 5);
    for (std::size_t i = 0; i < length; ++i) {
      const bool success = u(rng) < p;
      const bool fired = tracker.record(success);
      if (fired) {
        for (double w : tracker.window()) ASSERT_GE(w, alpha);
        tracker.reset();
      }
      ASSERT_EQ(fired, reference.step(success)) << "stream " << stream << " step " << i;
    }
  }
}

TEST(PhaseBudgets, DefaultSizes) {
  const TierSizes sizes = default_tier_sizes(128);
  EXPECT_EQ(phase_budgets(sizes, 500), (std::array<std::size_t, 3>{117, 281, 101}));
  EXPECT_EQ(phase_budgets(sizes, 128), (std::array<std::size_t, 3>{30, 72, 26}));
}

TEST(ScheduleB, TransitionsAtBudget) {
  PhaseMachine machine(Schedule::kB, default_tier_sizes(128), 500);
  std::vector<std::pair<int, Phase>> changes;
  Phase last = machine.phase();
  for (int episode = 1; episode <= 500; ++episode) {
    const Phase now = schedule_b_advance(machine);
    if (now != last) changes.emplace_back(episode, now);
    if (episode == 116) EXPECT_EQ(now, Phase::kSimple);
    last = now;
  }
  const std::vector<std::pair<int, Phase>> expected = {{117, Phase::kMedium},
                                                       {398, Phase::kDifficult}};
  EXPECT_EQ(changes, expected);
}

TEST(ScheduleC, BudgetIsCeiling) {
  PhaseMachine machine(Schedule::kC, default_tier_sizes(128), 500);
  MasteryTracker tracker(0.5, 5);
  std::optional<PhaseTrigger> trigger;
  int episode = 0;
  while (!trigger) {
    ++episode;
    trigger = schedule_c_advance(machine, tracker, false);
  }
  EXPECT_EQ(episode, 117);
  EXPECT_EQ(trigger, PhaseTrigger::kBudget);
  EXPECT_EQ(machine.phase(), Phase::kMedium);
  EXPECT_EQ(tracker.n_sampled(), 0u);
}

TEST(ScheduleC, MasteryAdvancesEarly) {
  PhaseMachine machine(Schedule::kC, default_tier_sizes(128), 500);
  MasteryTracker tracker(0.5, 5);
  for (int i = 0; i < 4; ++i) EXPECT_FALSE(schedule_c_advance(machine, tracker, true));
  EXPECT_EQ(schedule_c_advance(machine, tracker, true), PhaseTrigger::kMastery);
  EXPECT_EQ(machine.phase(), Phase::kMedium);
  EXPECT_EQ(machine.episodes_in_phase(), 0u);
}

TEST(ActiveGoalSet, Examples) {
  const GoalCorpus& corpus = testing::default_corpus();
  EXPECT_EQ(active_goal_set(Schedule::kA, Phase::kAll, corpus).size(), 128u);
  EXPECT_EQ(active_goal_set(Schedule::kC, Phase::kSimple, corpus), corpus.tier(Tier::kSimple));
  EXPECT_EQ(active_goal_set(Schedule::kC, Phase::kSimple, corpus).size(), 30u);
  EXPECT_EQ(active_goal_set(Schedule::kB, Phase::kDifficult, corpus).size(), 26u);
}

TEST(CurriculumController, ResetsCountersOnlyAtTransitions) {
  const GoalCorpus& corpus = testing::default_corpus();
  CurriculumConfig config;
  config.schedule = Schedule::kB;
  CurriculumController controller(config, corpus);
  const GoalIndex first = controller.active_goals().front();
  std::vector<PhaseTransition> log;
  for (int epoch = 1; epoch <= 500; ++epoch) {
    const auto goals = controller.active_goals();
    const GoalIndex g = goals[static_cast<std::size_t>(epoch) % goals.size()];
    const std::size_t before = controller.counter().count(g);
    controller.on_goal_sampled(g);
    EXPECT_EQ(controller.counter().count(g), before + 1);
    if (auto t = controller.on_episode_end(epoch % 2 == 0, epoch)) {
      log.push_back(*t);
      for (GoalIndex a : controller.active_goals()) EXPECT_EQ(controller.counter().count(a), 0u);
    }
  }
  EXPECT_EQ(controller.counter().count(first), 0u);
  const std::vector<PhaseTransition> expected = {
      {117, Phase::kSimple, Phase::kMedium, PhaseTrigger::kBudget},
      {398, Phase::kMedium, Phase::kDifficult, PhaseTrigger::kBudget}};
  EXPECT_EQ(log, expected);
}

TEST(CurriculumController, OrpDisabledStillCounts) {
  CurriculumConfig config;
  config.orp_enabled = false;
  CurriculumController controller(config, testing::default_corpus());
  for (int i = 0; i < 3; ++i) EXPECT_EQ(controller.on_goal_sampled(7), 0.0);
  EXPECT_EQ(controller.counter().count(7), 3u);
  config.orp_enabled = true;
  CurriculumController with_orp(config, testing::default_corpus());
  with_orp.on_goal_sampled(7);
  EXPECT_DOUBLE_EQ(with_orp.on_goal_sampled(7), orp_penalty(1));
}

TEST(CurriculumController, PhasesAreMonotone) {
  Rng rng(12);
  for (int run = 0; run < 50; ++run) {
    CurriculumConfig config;
    config.schedule = run % 2 == 0 ? Schedule::kB : Schedule::kC;
    config.alpha = 0.3 + 0.1 * (run % 6);
    CurriculumController controller(config, testing::default_corpus());
    const double p = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    std::vector<Phase> seen = {controller.phase()};
    for (int epoch = 1; epoch <= 500; ++epoch) {
      const bool success = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
      if (auto t = controller.on_episode_end(success, epoch)) {
        EXPECT_EQ(t->from, seen.back());
        seen.push_back(t->to);
      }
    }
    const std::vector<Phase> order = {Phase::kSimple, Phase::kMedium, Phase::kDifficult};
    ASSERT_LE(seen.size(), order.size());
    for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_EQ(seen[i], order[i]);
  }
}

TEST(CurriculumController, ScheduleANeverTransitions) {
  CurriculumController controller(CurriculumConfig{}, testing::default_corpus());
  for (int epoch = 1; epoch <= 600; ++epoch) EXPECT_FALSE(controller.on_episode_end(true, epoch));
  EXPECT_EQ(controller.phase(), Phase::kAll);
  EXPECT_EQ(controller.active_goals().size(), 128u);
}

}  // namespace
}  // namespace acldqn
