#include "acldqn/replay.hpp"

#include <vector>

#include "acldqn/student.hpp"
#include "acldqn/user_sim.hpp"

namespace acldqn {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t state_dim)
    : capacity_(capacity), state_dim_(state_dim) {
  if (capacity_ == 0) throw ContractViolation("replay buffer capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (static_cast<std::size_t>(t.state.size()) != state_dim_ ||
      static_cast<std::size_t>(t.next_state.size()) != state_dim_) {
    throw ContractViolation("transition dimension does not match replay buffer");
  }
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(std::move(t));
}

std::optional<Minibatch> ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
  if (batch_size == 0 || items_.size() < batch_size) return std::nullopt;
  const auto b = static_cast<Eigen::Index>(batch_size);
  const auto d = static_cast<Eigen::Index>(state_dim_);
  Minibatch batch;
  batch.states.resize(b, d);
  batch.next_states.resize(b, d);
  batch.rewards.resize(b);
  batch.actions.resize(batch_size);
  batch.terminal.resize(batch_size);
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  for (std::size_t i = 0; i < batch_size; ++i) {
    const Transition& t = items_[pick(rng)];
    const auto row = static_cast<Eigen::Index>(i);
    batch.states.row(row) = t.state.transpose();
    batch.next_states.row(row) = t.next_state.transpose();
    batch.rewards(row) = t.reward;
    batch.actions[i] = t.action;
    batch.terminal[i] = t.terminal;
  }
  return batch;
}

RbsStats rbs_prefill(ReplayBuffer& buffer, const GoalCorpus& corpus, const KnowledgeBase& kb,
                     std::size_t n_dialogues, std::uint64_t seed) {
  RbsStats stats;
  if (n_dialogues == 0) return stats;
  if (corpus.empty()) throw ContractViolation("cannot prefill from an empty corpus");

  const SystemActionSet actions;
  const DialoguePolicy rule_policy = [&actions](const DialogueTracker& tracker, const Eigen::VectorXd&) {
    return actions.index_of(rule_agent_act(tracker));
  };

  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(seed + attempt);
    std::uniform_int_distribution<std::size_t> pick(0, corpus.size() - 1);
    std::vector<Transition> collected;
    std::size_t successes = 0;
    for (std::size_t d = 0; d < n_dialogues; ++d) {
      const UserGoal& goal = corpus.at(pick(rng));
      const EpisodeResult episode =
          run_episode(goal, kb, actions, rule_policy, rng,
                      [&collected](Transition t) { collected.push_back(std::move(t)); });
      if (episode.status == DialogueStatus::kSuccess) ++successes;
    }
    if (successes == 0 && attempt < 100) {
      ++stats.reseeds;
      continue;
    }
    for (auto& t : collected) buffer.push(std::move(t));
    stats.dialogues = n_dialogues;
    stats.successes = successes;
    stats.transitions = collected.size();
    return stats;
  }
}

}  // namespace acldqn
