#pragma once

#include <spdlog/spdlog.h>

namespace stagekin::log {

/// Applies the STAGEKIN_LOG environment variable (error|warn|info|debug)
/// to the global spdlog level. Unset or unknown values fall back to warn.
void init_from_env();

}  // namespace stagekin::log
