#include "acldqn/domain.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "acldqn/knowledge_base.hpp"

namespace acldqn {
namespace {

constexpr std::array<std::string_view, kNumSlots> kSlotNames = {
    "movie_name", "theater", "city",  "date",  "start_time",
    "num_tickets", "price",  "genre", "rating"};

constexpr std::array<std::string_view, kNumActTypes> kActNames = {
    "request", "inform",  "confirm_question", "confirm_answer",
    "deny",    "thanks",  "closing",          "greeting",
    "not_sure", "multiple_choice", "book"};

constexpr std::array<std::string_view, kNumTiers> kTierNames = {"simple", "medium",
                                                                "difficult"};

}  // namespace

std::string_view slot_name(Slot slot) { return kSlotNames.at(slot_index(slot)); }

std::optional<Slot> parse_slot(std::string_view name) {
  for (std::size_t i = 0; i < kNumSlots; ++i) {
    if (kSlotNames[i] == name) return static_cast<Slot>(i);
  }
  return std::nullopt;
}

std::string_view act_type_name(ActType type) {
  return kActNames.at(static_cast<std::size_t>(type));
}

std::optional<ActType> parse_act_type(std::string_view name) {
  for (std::size_t i = 0; i < kNumActTypes; ++i) {
    if (kActNames[i] == name) return static_cast<ActType>(i);
  }
  return std::nullopt;
}

std::string_view tier_name(Tier tier) { return kTierNames.at(static_cast<std::size_t>(tier)); }

DialogueAct make_act(Actor actor, ActType type) { return DialogueAct{actor, type, {}}; }

DialogueAct make_request(Actor actor, std::span<const Slot> slots) {
  DialogueAct act{actor, ActType::kRequest, {}};
  for (Slot s : slots) act.payload.emplace(s, std::string(kUnknownValue));
  return act;
}

DialogueAct make_inform(Actor actor, std::map<Slot, std::string> values) {
  DialogueAct act{actor, ActType::kInform, std::move(values)};
  validate_act(act);
  return act;
}

void validate_act(const DialogueAct& act) {
  for (const auto& [slot, value] : act.payload) {
    const bool unknown = value == kUnknownValue;
    if (act.type == ActType::kRequest && !unknown) {
      throw ContractViolation("request act carries a concrete value for " +
                              std::string(slot_name(slot)));
    }
    if (act.type == ActType::kInform && (unknown || value.empty())) {
      throw ContractViolation("inform act carries no value for " +
                              std::string(slot_name(slot)));
    }
  }
}

std::string to_string(const DialogueAct& act) {
  std::ostringstream out;
  out << (act.actor == Actor::kUser ? "user:" : "system:") << act_type_name(act.type) << '(';
  bool first = true;
  for (const auto& [slot, value] : act.payload) {
    if (!first) out << ", ";
    first = false;
    out << slot_name(slot);
    if (value != kUnknownValue) out << '=' << value;
  }
  out << ')';
  return out.str();
}

UserGoal::UserGoal(GoalId id, std::map<Slot, std::string> inform_slots,
                   std::set<Slot> request_slots)
    : id_(id),
      inform_slots_(std::move(inform_slots)),
      request_slots_(std::move(request_slots)),
      difficulty_(static_cast<int>(inform_slots_.size() + request_slots_.size())) {
  if (request_slots_.empty()) {
    throw CorpusError("goal " + std::to_string(id_) + " has no request slots");
  }
  for (Slot s : request_slots_) {
    if (inform_slots_.contains(s)) {
      throw CorpusError("goal " + std::to_string(id_) + " both informs and requests " +
                        std::string(slot_name(s)));
    }
  }
  for (const auto& [slot, value] : inform_slots_) {
    if (value.empty() || value == kUnknownValue) {
      throw CorpusError("goal " + std::to_string(id_) + " has no value for " +
                        std::string(slot_name(slot)));
    }
  }
}

int difficulty_of(const UserGoal& goal) {
  return static_cast<int>(goal.inform_slots().size() + goal.request_slots().size());
}

TierSizes default_tier_sizes(std::size_t num_goals) {
  if (num_goals == 0) return {0, 0, 0};
  if (num_goals < 3) throw CorpusError("a partitioned corpus needs at least 3 goals");
  TierSizes sizes;
  sizes.simple = std::max<std::size_t>(1, num_goals * 30 / 128);
  sizes.difficult = std::max<std::size_t>(1, num_goals * 26 / 128);
  sizes.medium = num_goals - sizes.simple - sizes.difficult;
  return sizes;
}

std::optional<std::size_t> GoalCorpus::position_of(GoalId id) const {
  for (std::size_t i = 0; i < goals_.size(); ++i) {
    if (goals_[i].id() == id) return i;
  }
  return std::nullopt;
}

GoalCorpus make_empty_corpus() { return GoalCorpus{}; }

GoalCorpus partition_corpus(std::vector<UserGoal> goals, TierSizes sizes) {
  if (sizes.total() != goals.size()) {
    throw CorpusError("tier sizes sum to " + std::to_string(sizes.total()) + " but corpus has " +
                      std::to_string(goals.size()) + " goals");
  }
  if (sizes.simple == 0 || sizes.medium == 0 || sizes.difficult == 0) {
    throw CorpusError("every tier needs at least one goal");
  }
  std::unordered_set<GoalId> seen;
  for (const auto& g : goals) {
    if (!seen.insert(g.id()).second) {
      throw CorpusError("duplicate goal id " + std::to_string(g.id()));
    }
  }

  std::vector<std::size_t> order(goals.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ga = goals[a];
    const auto& gb = goals[b];
    if (ga.difficulty() != gb.difficulty()) return ga.difficulty() < gb.difficulty();
    return ga.id() < gb.id();
  });

  GoalCorpus corpus;
  corpus.tier_of_.resize(goals.size());
  const std::array<std::size_t, kNumTiers> bounds = {sizes.simple, sizes.simple + sizes.medium,
                                                      sizes.total()};
  std::size_t t = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    while (rank >= bounds[t]) ++t;
    corpus.partition_[t].push_back(order[rank]);
    corpus.tier_of_[order[rank]] = static_cast<Tier>(t);
  }
  corpus.goals_ = std::move(goals);
  return corpus;
}

GoalCorpus generate_corpus(std::uint64_t seed, TierSizes sizes, const Ontology& ontology,
                           const KnowledgeBase& kb) {
  struct Band {
    int lo;
    int hi;
  };
  constexpr std::array<Band, kNumTiers> kBands = {{{2, 3}, {4, 6}, {7, 9}}};

  const std::set<Slot> unique(ontology.begin(), ontology.end());
  if (unique.size() != ontology.size()) throw CorpusError("ontology lists a slot twice");
  const int max_difficulty = static_cast<int>(ontology.size());
  if (max_difficulty < kBands[2].lo) {
    throw CorpusError("ontology of " + std::to_string(max_difficulty) +
                      " slots cannot realize the difficult tier");
  }
  if (kb.size() == 0) throw CorpusError("cannot generate satisfiable goals from an empty KB");
  if (sizes.simple == 0 || sizes.medium == 0 || sizes.difficult == 0) {
    throw CorpusError("every tier needs at least one goal");
  }

  Rng rng(seed);
  const std::array<std::size_t, kNumTiers> counts = {sizes.simple, sizes.medium, sizes.difficult};
  std::vector<UserGoal> drafts;
  drafts.reserve(sizes.total());
  std::uniform_int_distribution<std::size_t> pick_row(0, kb.size() - 1);

  for (std::size_t t = 0; t < kNumTiers; ++t) {
    const int hi = std::min(kBands[t].hi, max_difficulty);
    std::uniform_int_distribution<int> pick_difficulty(kBands[t].lo, hi);
    for (std::size_t k = 0; k < counts[t]; ++k) {
      const int difficulty = pick_difficulty(rng);
      // Requests grow with difficulty, capped at 4; at least one constraint
      // is left so the KB lookup matters.
      const int num_requests = std::clamp(difficulty / 2, 1, 4);
      const int num_informs = difficulty - num_requests;

      Ontology slots = ontology;
      std::shuffle(slots.begin(), slots.end(), rng);
      const KbRow& row = kb.row(pick_row(rng));
      std::map<Slot, std::string> informs;
      std::set<Slot> requests;
      for (int i = 0; i < num_informs; ++i) {
        informs.emplace(slots[i], row[slot_index(slots[i])]);
      }
      for (int i = 0; i < num_requests; ++i) requests.insert(slots[num_informs + i]);
      drafts.emplace_back(0, std::move(informs), std::move(requests));
    }
  }

  // Ids are assigned after a shuffle so that id order carries no difficulty
  // information.
  std::shuffle(drafts.begin(), drafts.end(), rng);
  std::vector<UserGoal> goals;
  goals.reserve(drafts.size());
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    goals.emplace_back(static_cast<GoalId>(i), drafts[i].inform_slots(),
                       drafts[i].request_slots());
  }
  return partition_corpus(std::move(goals), sizes);
}

void save_corpus(const GoalCorpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw CorpusError("cannot open " + path.string() + " for writing");
  for (const auto& goal : corpus.goals()) {
    nlohmann::ordered_json record;
    record["id"] = goal.id();
    nlohmann::ordered_json informs = nlohmann::ordered_json::object();
    for (const auto& [slot, value] : goal.inform_slots()) informs[std::string(slot_name(slot))] = value;
    record["inform_slots"] = std::move(informs);
    nlohmann::ordered_json requests = nlohmann::ordered_json::array();
    for (Slot s : goal.request_slots()) requests.push_back(std::string(slot_name(s)));
    record["request_slots"] = std::move(requests);
    out << record.dump() << '\n';
  }
  if (!out) throw CorpusError("failed writing " + path.string());
}

namespace {

Slot slot_or_throw(const std::string& name, std::size_t line) {
  auto slot = parse_slot(name);
  if (!slot) throw ParseError(line, "unknown slot '" + name + "'");
  return *slot;
}

}  // namespace

GoalCorpus load_corpus(const std::filesystem::path& path, std::optional<TierSizes> sizes) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open " + path.string());

  std::vector<UserGoal> goals;
  std::unordered_set<GoalId> seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line, std::string("malformed record: ") + e.what());
    }
    if (!record.is_object() || !record.contains("id") || !record.contains("inform_slots") ||
        !record.contains("request_slots")) {
      throw ParseError(line, "record needs id, inform_slots and request_slots");
    }
    const auto& id_field = record["id"];
    if (!id_field.is_number_unsigned()) throw ParseError(line, "id must be a non-negative integer");
    const auto& informs_field = record["inform_slots"];
    const auto& requests_field = record["request_slots"];
    if (!informs_field.is_object()) throw ParseError(line, "inform_slots must be an object");
    if (!requests_field.is_array()) throw ParseError(line, "request_slots must be a list");

    std::map<Slot, std::string> informs;
    for (const auto& [name, value] : informs_field.items()) {
      if (!value.is_string()) throw ParseError(line, "inform value for '" + name + "' must be a string");
      informs.emplace(slot_or_throw(name, line), value.get<std::string>());
    }
    std::set<Slot> requests;
    for (const auto& value : requests_field) {
      if (!value.is_string()) throw ParseError(line, "request slot names must be strings");
      requests.insert(slot_or_throw(value.get<std::string>(), line));
    }

    const auto id = id_field.get<GoalId>();
    if (!seen.insert(id).second) {
      throw CorpusError("line " + std::to_string(line) + ": duplicate goal id " + std::to_string(id));
    }
    try {
      goals.emplace_back(id, std::move(informs), std::move(requests));
    } catch (const CorpusError& e) {
      throw ParseError(line, e.what());
    }
  }

  if (goals.empty()) return make_empty_corpus();
  const TierSizes tiers = sizes.value_or(default_tier_sizes(goals.size()));
  return partition_corpus(std::move(goals), tiers);
}

}  // namespace acldqn
