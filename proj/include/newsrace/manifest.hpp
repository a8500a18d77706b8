#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "newsrace/chrono.hpp"

namespace newsrace {

// Pipeline stages in execution order.  Per-event progress and run-level
// completion are both expressed against this ladder.
namespace stages {
inline constexpr const char* kSeed = "seed";
inline constexpr const char* kDraft = "draft";
inline constexpr const char* kPull = "pull";
inline constexpr const char* kVerify = "verify";
inline constexpr const char* kProbe = "probe";
inline constexpr const char* kAnalyze = "analyze";
}  // namespace stages

// Index of a stage in execution order, or -1 for an unknown name.
int stage_index(const std::string& stage);
const std::vector<std::string>& stage_order();

struct EventRecord {
  std::string stage_reached;  // last stage completed for this event
  std::optional<std::string> provider_query_id;
  std::optional<double> backfill_percent;
  std::map<std::string, int> pull_counts;          // channel -> mention count
  std::map<std::string, int> verification_counts;  // outcome -> count
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  bool reached(const std::string& stage) const {
    return stage_index(stage_reached) >= stage_index(stage);
  }
};

struct StageRecord {
  bool completed = false;
  TimeMs completed_at = 0;
  // run-root-relative path -> FNV-1a 64 hex checksum at completion time
  std::map<std::string, std::string> outputs;
};

struct LogEntry {
  TimeMs ts = 0;
  std::string stage;
  std::string message;
};

// The run's single structured-text record: config snapshot, per-event state,
// per-stage completion with content checksums, an append-only log, and the
// outbound-request tally.  Within a run the manifest only ever grows —
// entries are added and advanced, never removed.
class RunManifest {
 public:
  std::string run_id;
  TimeMs created_at = 0;
  nlohmann::json config;  // snapshot, never contains secrets
  std::string config_hash;
  std::map<std::string, EventRecord> events;
  std::map<std::string, StageRecord> stages;
  std::vector<LogEntry> log;
  long long request_count = 0;

  void log_line(TimeMs ts, const std::string& stage, std::string message) {
    log.push_back({ts, stage, std::move(message)});
  }

  EventRecord& event(const std::string& event_id) { return events[event_id]; }

  bool stage_completed(const std::string& stage) const {
    auto it = stages.find(stage);
    return it != stages.end() && it->second.completed;
  }

  void complete_stage(const std::string& stage, TimeMs ts,
                      std::map<std::string, std::string> outputs);

  // Advances stage_reached for an event, never moving it backwards.
  void advance_event(const std::string& event_id, const std::string& stage);

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);

  // Atomic save; load throws std::runtime_error with a diagnostic when the
  // file is missing or not parseable (the "corrupt manifest" refusal).
  void save(const std::filesystem::path& path) const;
  static RunManifest load(const std::filesystem::path& path);
};

}  // namespace newsrace
