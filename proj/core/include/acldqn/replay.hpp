#ifndef ACLDQN_REPLAY_HPP_
#define ACLDQN_REPLAY_HPP_

#include <cstddef>
#include <deque>
#include <optional>

#include <Eigen/Dense>

#include "acldqn/domain.hpp"
#include "acldqn/knowledge_base.hpp"
#include "acldqn/neural.hpp"

namespace acldqn {

struct Transition {
  Eigen::VectorXd state;
  int action = 0;
  double reward = 0.0;
  Eigen::VectorXd next_state;
  bool terminal = false;
};

inline constexpr std::size_t kStudentBufferCapacity = 5000;
inline constexpr std::size_t kTeacherBufferCapacity = 2000;
inline constexpr std::size_t kBatchSize = 16;

// Bounded FIFO store; pushing into a full buffer evicts the oldest item.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t state_dim);

  void push(Transition t);

  // Uniform with replacement. Returns nothing while fewer than batch_size
  // items are stored; the caller skips that training step.
  std::optional<Minibatch> sample(std::size_t batch_size, Rng& rng) const;

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t state_dim() const { return state_dim_; }
  const Transition& at(std::size_t i) const { return items_.at(i); }
  const std::deque<Transition>& items() const { return items_; }

 private:
  std::size_t capacity_;
  std::size_t state_dim_;
  std::deque<Transition> items_;
};

struct RbsStats {
  std::size_t dialogues = 0;
  std::size_t successes = 0;
  std::size_t transitions = 0;
  std::size_t reseeds = 0;
};

// Replay buffer spiking: runs n_dialogues rule-agent dialogues on uniformly
// drawn goals and pushes every student transition. If the batch contains no
// successful dialogue it is discarded and redrawn from the next seed.
RbsStats rbs_prefill(ReplayBuffer& buffer, const GoalCorpus& corpus, const KnowledgeBase& kb,
                     std::size_t n_dialogues, std::uint64_t seed);

}  // namespace acldqn

#endif  // ACLDQN_REPLAY_HPP_
