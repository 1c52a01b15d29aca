#ifndef ACLDQN_LOGGING_HPP_
#define ACLDQN_LOGGING_HPP_

namespace acldqn {

// Sets the spdlog level from ACLDQN_LOG (trace, debug, info, warn, error,
// critical, off). Unset or unrecognized values leave the level at info.
void configure_logging_from_env();

}  // namespace acldqn

#endif  // ACLDQN_LOGGING_HPP_
