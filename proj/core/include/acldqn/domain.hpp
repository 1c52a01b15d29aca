#ifndef ACLDQN_DOMAIN_HPP_
#define ACLDQN_DOMAIN_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace acldqn {

using Rng = std::mt19937_64;

// Errors raised while building or reading a goal corpus / knowledge base.
class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public CorpusError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : CorpusError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Caller broke an operation precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Movie-booking ontology. Declaration order is the canonical slot order used
// by feature layouts, action indices and the simulator's tie-breaking rules.
enum class Slot : std::uint8_t {
  kMovieName,
  kTheater,
  kCity,
  kDate,
  kStartTime,
  kNumTickets,
  kPrice,
  kGenre,
  kRating,
};
inline constexpr std::size_t kNumSlots = 9;

inline constexpr std::array<Slot, kNumSlots> kAllSlots = {
    Slot::kMovieName, Slot::kTheater,    Slot::kCity,
    Slot::kDate,      Slot::kStartTime,  Slot::kNumTickets,
    Slot::kPrice,     Slot::kGenre,      Slot::kRating};

std::string_view slot_name(Slot slot);
std::optional<Slot> parse_slot(std::string_view name);
inline std::size_t slot_index(Slot slot) { return static_cast<std::size_t>(slot); }

using Ontology = std::vector<Slot>;
inline Ontology default_ontology() { return {kAllSlots.begin(), kAllSlots.end()}; }

enum class Actor : std::uint8_t { kUser, kSystem };

enum class ActType : std::uint8_t {
  kRequest,
  kInform,
  kConfirmQuestion,
  kConfirmAnswer,
  kDeny,
  kThanks,
  kClosing,
  kGreeting,
  kNotSure,
  kMultipleChoice,
  kBook,
};
inline constexpr std::size_t kNumActTypes = 11;

std::string_view act_type_name(ActType type);
std::optional<ActType> parse_act_type(std::string_view name);

// Value carried by request acts in place of a concrete slot value.
inline constexpr std::string_view kUnknownValue = "UNK";

struct DialogueAct {
  Actor actor = Actor::kUser;
  ActType type = ActType::kGreeting;
  std::map<Slot, std::string> payload;

  friend bool operator==(const DialogueAct&, const DialogueAct&) = default;
};

// Builders that keep the request/inform payload invariants.
DialogueAct make_act(Actor actor, ActType type);
DialogueAct make_request(Actor actor, std::span<const Slot> slots);
DialogueAct make_inform(Actor actor, std::map<Slot, std::string> values);

// Throws ContractViolation if a request carries a concrete value or an
// inform carries UNK.
void validate_act(const DialogueAct& act);

std::string to_string(const DialogueAct& act);

using GoalId = std::uint32_t;

class UserGoal {
 public:
  // Throws CorpusError when the goal is malformed (overlapping or empty
  // request set).
  UserGoal(GoalId id, std::map<Slot, std::string> inform_slots,
           std::set<Slot> request_slots);

  GoalId id() const { return id_; }
  const std::map<Slot, std::string>& inform_slots() const { return inform_slots_; }
  const std::set<Slot>& request_slots() const { return request_slots_; }
  int difficulty() const { return difficulty_; }

  friend bool operator==(const UserGoal&, const UserGoal&) = default;

 private:
  GoalId id_;
  std::map<Slot, std::string> inform_slots_;
  std::set<Slot> request_slots_;
  int difficulty_;
};

int difficulty_of(const UserGoal& goal);

enum class Tier : std::uint8_t { kSimple, kMedium, kDifficult };
inline constexpr std::size_t kNumTiers = 3;
std::string_view tier_name(Tier tier);

struct TierSizes {
  std::size_t simple = 30;
  std::size_t medium = 72;
  std::size_t difficult = 26;

  std::size_t total() const { return simple + medium + difficult; }
  friend bool operator==(const TierSizes&, const TierSizes&) = default;
};

// 30/72/26 for 128 goals; other corpus sizes are split in the same
// proportion with the remainder going to the medium tier.
TierSizes default_tier_sizes(std::size_t num_goals);

// Goals in their original (file / generation) order plus a difficulty
// partition expressed as positions into that order.
class GoalCorpus {
 public:
  GoalCorpus() = default;

  const std::vector<UserGoal>& goals() const { return goals_; }
  std::size_t size() const { return goals_.size(); }
  bool empty() const { return goals_.empty(); }
  const UserGoal& at(std::size_t position) const { return goals_.at(position); }

  const std::vector<std::size_t>& tier(Tier t) const {
    return partition_[static_cast<std::size_t>(t)];
  }
  Tier tier_of(std::size_t position) const { return tier_of_.at(position); }
  std::optional<std::size_t> position_of(GoalId id) const;

  friend bool operator==(const GoalCorpus&, const GoalCorpus&) = default;

 private:
  friend GoalCorpus partition_corpus(std::vector<UserGoal> goals, TierSizes sizes);
  friend GoalCorpus make_empty_corpus();

  std::vector<UserGoal> goals_;
  std::array<std::vector<std::size_t>, kNumTiers> partition_;
  std::vector<Tier> tier_of_;
};

// Sorts by (difficulty, id) and cuts the sorted order into three tiers.
// Throws CorpusError on size mismatch, zero-size tiers or duplicate ids.
GoalCorpus partition_corpus(std::vector<UserGoal> goals, TierSizes sizes);
GoalCorpus make_empty_corpus();

class KnowledgeBase;

// Draws a corpus whose tiers occupy the difficulty bands {2,3}, {4,5,6}
// and {7,8,9}. Every goal's constraints are copied from one KB row.
GoalCorpus generate_corpus(std::uint64_t seed, TierSizes sizes,
                           const Ontology& ontology, const KnowledgeBase& kb);

void save_corpus(const GoalCorpus& corpus, const std::filesystem::path& path);
// Partitions with `sizes` when given, otherwise default_tier_sizes().
GoalCorpus load_corpus(const std::filesystem::path& path,
                       std::optional<TierSizes> sizes = std::nullopt);

}  // namespace acldqn

#endif  // ACLDQN_DOMAIN_HPP_
