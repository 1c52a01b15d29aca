#include "acldqn/logging.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/spdlog.h>

namespace acldqn {

void configure_logging_from_env() {
  spdlog::set_level(spdlog::level::info);
  const char* value = std::getenv("ACLDQN_LOG");
  if (value == nullptr) return;
  const auto level = spdlog::level::from_str(value);
  // from_str maps unknown names to off; only honour an explicit "off".
  if (level != spdlog::level::off || std::string(value) == "off") spdlog::set_level(level);
}

}  // namespace acldqn
