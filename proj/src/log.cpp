#include "stagekin/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>

#include <cstdlib>
#include <string>

namespace stagekin::log {

void init_from_env() {
  // Keep stdout clean for command output.
  spdlog::set_default_logger(spdlog::stderr_color_mt("stagekin"));
  const char* value = std::getenv("STAGEKIN_LOG");
  spdlog::level::level_enum level = spdlog::level::warn;
  if (value != nullptr) {
    const std::string v(value);
    if (v == "error") {
      level = spdlog::level::err;
    } else if (v == "warn") {
      level = spdlog::level::warn;
    } else if (v == "info") {
      level = spdlog::level::info;
    } else if (v == "debug") {
      level = spdlog::level::debug;
    } else {
      spdlog::warn("unknown STAGEKIN_LOG value '{}', using 'warn'", v);
    }
  }
  spdlog::set_level(level);
}

}  // namespace stagekin::log
