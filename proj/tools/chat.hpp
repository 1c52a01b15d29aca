#ifndef ACLDQN_TOOLS_CHAT_HPP_
#define ACLDQN_TOOLS_CHAT_HPP_

#include <iosfwd>
#include <optional>
#include <string>

#include "acldqn/domain.hpp"
#include "acldqn/knowledge_base.hpp"
#include "acldqn/neural.hpp"

namespace acldqn::cli {

struct ChatResult {
  bool success = false;
  bool abandoned = false;  // the human ended the dialogue early
  int turns = 0;
  std::optional<int> score;  // 1-10
  std::string transcript;
};

// One human-evaluation session: the human plays the user side of `goal`
// through numbered menus, the student answers greedily. Never changes
// `student`. End of input counts as ending the dialogue.
ChatResult chat_session(const QFunction& student, const UserGoal& goal, const KnowledgeBase& kb,
                        std::istream& in, std::ostream& out);

// Template text for a system act.
std::string render_system_act(const DialogueAct& act);

}  // namespace acldqn::cli

#endif  // ACLDQN_TOOLS_CHAT_HPP_
