#pragma once

#include <stdexcept>
#include <string>

namespace tsmotif {

// Exit-code mapping for the CLI: config/manifest problems -> 2,
// bad or degenerate data -> 3, anything else -> 4.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct data_error : std::runtime_error {
  explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct resource_limit_error : std::runtime_error {
  explicit resource_limit_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tsmotif
