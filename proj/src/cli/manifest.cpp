#include "dynetrack/cli/manifest.hpp"

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>

#include <json.hpp>

#include "dynetrack/errors.hpp"

#ifndef DYNETRACK_VERSION
#define DYNETRACK_VERSION "0.0.0"
#endif

namespace dynetrack::cli {

namespace {

std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Provenance provenance_from(const std::string& s) {
  if (s == "default") return Provenance::kDefault;
  if (s == "file") return Provenance::kFile;
  if (s == "flag") return Provenance::kFlag;
  throw ConfigError("manifest: unknown provenance '" + s + "'");
}

}  // namespace

std::string tool_version() { return DYNETRACK_VERSION; }

std::string RunManifest::hash() const {
  std::uint64_t h = fnv1a("command=" + command + "\n");
  h = fnv1a("tool_version=" + tool_version + "\n", h);
  for (const auto& [key, e] : config.entries()) h = fnv1a(key + "=" + e.value + "\n", h);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["manifest_hash"] = hash();
  j["command"] = command;
  j["tool_version"] = tool_version;
  j["seed"] = config.integer("seed");
  j["timestamp"] = timestamp;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [key, e] : config.entries()) {
    cfg[key] = {{"value", e.value}, {"provenance", std::string(to_string(e.provenance))}};
  }
  j["config"] = cfg;
  j["outputs"] = outputs;
  j["wall_seconds"] = wall_seconds;
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("manifest: malformed JSON: ") + e.what());
  }
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.timestamp = j.value("timestamp", "");
    for (const auto& [key, e] : j.at("config").items()) {
      m.config.set(key, e.at("value").get<std::string>(),
                   provenance_from(e.at("provenance").get<std::string>()));
    }
    m.outputs = j.value("outputs", std::vector<std::string>{});
    m.wall_seconds = j.value("wall_seconds", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  return m;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace dynetrack::cli
