#pragma once

// Run manifests: the resolved configuration of one command, its content
// hash, and the files it produced.

#include <string>
#include <vector>

#include "dynetrack/cli/config.hpp"

namespace dynetrack::cli {

std::string tool_version();

struct RunManifest {
  std::string command;
  Config config;
  std::string tool_version = cli::tool_version();
  std::string timestamp;  ///< UTC, ISO 8601; not hashed
  std::vector<std::string> outputs;  ///< file names relative to the output directory
  double wall_seconds = 0.0;

  /// FNV-1a 64 of command, tool version and every key=value in key order,
  /// as 16 hex digits. Timestamp, outputs and provenance are excluded.
  std::string hash() const;

  std::string to_json() const;
  /// Inverse of to_json; values keep their recorded provenance.
  static RunManifest from_json(const std::string& text);
};

std::string utc_timestamp();

}  // namespace dynetrack::cli
