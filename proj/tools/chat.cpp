#include "chat.hpp"

#include <array>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "acldqn/student.hpp"
#include "acldqn/user_sim.hpp"

namespace acldqn::cli {
namespace {

std::string readable(Slot slot) {
  std::string name(slot_name(slot));
  for (char& c : name) {
    if (c == '_') c = ' ';
  }
  return name;
}

// Numbered menu; returns the 0-based choice or nothing at end of input.
std::optional<std::size_t> choose(std::istream& in, std::ostream& out, const std::string& title,
                                  const std::vector<std::string>& options) {
  out << title << "\n";
  for (std::size_t i = 0; i < options.size(); ++i) out << "  " << i + 1 << ") " << options[i] << "\n";
  std::string line;
  while (true) {
    out << "> " << std::flush;
    if (!std::getline(in, line)) return std::nullopt;
    try {
      std::size_t used = 0;
      const int pick = std::stoi(line, &used);
      if (pick >= 1 && static_cast<std::size_t>(pick) <= options.size()) {
        return static_cast<std::size_t>(pick - 1);
      }
    } catch (const std::exception&) {
    }
    out << "Please enter a number between 1 and " << options.size() << ".\n";
  }
}

std::optional<Slot> choose_slot(std::istream& in, std::ostream& out) {
  std::vector<std::string> names;
  for (Slot s : kAllSlots) names.push_back(readable(s));
  const auto pick = choose(in, out, "Which slot?", names);
  if (!pick) return std::nullopt;
  return kAllSlots[*pick];
}

enum class Menu : std::size_t { kInform, kRequest, kDeny, kThanks, kNotSure, kEnd };

// Reads one user act; nothing means the human ended the dialogue.
std::optional<DialogueAct> read_user_act(std::istream& in, std::ostream& out) {
  static const std::vector<std::string> kMenu = {
      "inform a slot value", "ask for a slot", "say that is wrong", "say thanks",
      "say you don't care about a slot", "end the dialogue (counts as failed)"};
  while (true) {
    const auto pick = choose(in, out, "Your turn:", kMenu);
    if (!pick) return std::nullopt;
    switch (static_cast<Menu>(*pick)) {
      case Menu::kInform: {
        const auto slot = choose_slot(in, out);
        if (!slot) return std::nullopt;
        const auto& vocab = slot_vocabulary(*slot);
        const auto value = choose(in, out, "Which value?", vocab);
        if (!value) return std::nullopt;
        return make_inform(Actor::kUser, {{*slot, vocab[*value]}});
      }
      case Menu::kRequest: {
        const auto slot = choose_slot(in, out);
        if (!slot) return std::nullopt;
        const std::array<Slot, 1> one = {*slot};
        return make_request(Actor::kUser, one);
      }
      case Menu::kDeny:
        return make_act(Actor::kUser, ActType::kDeny);
      case Menu::kThanks:
        return make_act(Actor::kUser, ActType::kThanks);
      case Menu::kNotSure: {
        const auto slot = choose_slot(in, out);
        if (!slot) return std::nullopt;
        DialogueAct act = make_act(Actor::kUser, ActType::kNotSure);
        act.payload.emplace(*slot, std::string(kUnknownValue));
        return act;
      }
      case Menu::kEnd:
        return std::nullopt;
    }
  }
}

std::string describe_goal(const UserGoal& goal) {
  std::ostringstream s;
  s << "Your goal (#" << goal.id() << "): book movie tickets where";
  bool first = true;
  for (const auto& [slot, value] : goal.inform_slots()) {
    s << (first ? " " : ", ") << readable(slot) << " = " << value;
    first = false;
  }
  if (first) s << " anything goes";
  s << ".\nFind out:";
  first = true;
  for (Slot slot : goal.request_slots()) {
    s << (first ? " " : ", ") << readable(slot);
    first = false;
  }
  s << ".\n";
  return s.str();
}

std::optional<int> read_score(std::istream& in, std::ostream& out) {
  std::string line;
  while (true) {
    out << "Rate the system from 1 (worst) to 10 (best): " << std::flush;
    if (!std::getline(in, line)) return std::nullopt;
    try {
      const int score = std::stoi(line);
      if (score >= 1 && score <= 10) return score;
    } catch (const std::exception&) {
    }
  }
}

}  // namespace

std::string render_system_act(const DialogueAct& act) {
  const std::string slot = act.payload.empty() ? "" : readable(act.payload.begin()->first);
  const std::string value = act.payload.empty() ? "" : act.payload.begin()->second;
  switch (act.type) {
    case ActType::kRequest:
      return "Which " + slot + " would you like?";
    case ActType::kInform:
      return "The " + slot + " is " + value + ".";
    case ActType::kNotSure:
      return "Sorry, I could not find a " + slot + " that fits.";
    case ActType::kConfirmQuestion:
      return "Could you confirm that?";
    case ActType::kConfirmAnswer:
      return "Yes, that is right.";
    case ActType::kBook:
      return "Great, your tickets are booked.";
    case ActType::kClosing:
      return "Sorry, I can't help with that. Goodbye.";
    case ActType::kGreeting:
      return "Hello, how can I help you?";
    default:
      return to_string(act);
  }
}

ChatResult chat_session(const QFunction& student, const UserGoal& goal, const KnowledgeBase& kb,
                        std::istream& in, std::ostream& out) {
  const SystemActionSet actions;
  DialogueTracker tracker(kb);
  std::map<Slot, std::string> answered;
  ChatResult result;
  std::ostringstream transcript;

  const std::string intro = describe_goal(goal);
  out << intro;
  transcript << intro;
  bool finished = false;
  while (!finished) {
    const auto user_act = read_user_act(in, out);
    if (!user_act) {
      result.abandoned = true;
      transcript << "user ended the dialogue\n";
      break;
    }
    transcript << "user: " << to_string(*user_act) << "\n";
    tracker.observe_user(*user_act);

    const int action = argmax(student.forward(featurize(tracker)));
    const DialogueAct system_act = actions.realize(action, tracker);
    tracker.observe_system(system_act);
    const std::string text = render_system_act(system_act);
    out << "system: " << text << "\n";
    transcript << "system: " << to_string(system_act) << " | " << text << "\n";

    if (system_act.type == ActType::kInform) {
      for (const auto& [slot, value] : system_act.payload) {
        if (goal.request_slots().contains(slot)) answered[slot] = value;
      }
    }
    if (system_act.type == ActType::kBook) {
      result.success = goal_satisfied(goal, kb, answered);
      finished = true;
    } else if (system_act.type == ActType::kClosing || tracker.turn() > kMaxTurns) {
      finished = true;
    }
  }
  result.turns = tracker.turn() - 1;
  const std::string verdict = result.success ? "success" : "failed";
  out << "Dialogue " << verdict << " after " << result.turns << " system turns.\n";
  transcript << "result: " << verdict << "\n";
  result.score = read_score(in, out);
  if (result.score) transcript << "score: " << *result.score << "\n";
  result.transcript = transcript.str();
  return result;
}

}  // namespace acldqn::cli
