#include "newsrace/manifest.hpp"

#include <stdexcept>

#include "newsrace/store.hpp"

namespace newsrace {

const std::vector<std::string>& stage_order() {
  static const std::vector<std::string> order = {
      stages::kSeed,   stages::kDraft, stages::kPull,
      stages::kVerify, stages::kProbe, stages::kAnalyze};
  return order;
}

int stage_index(const std::string& stage) {
  const auto& order = stage_order();
  for (size_t i = 0; i < order.size(); ++i) {
    if (order[i] == stage) return static_cast<int>(i);
  }
  return -1;
}

void RunManifest::complete_stage(const std::string& stage, TimeMs ts,
                                 std::map<std::string, std::string> outputs) {
  auto& rec = stages[stage];
  rec.completed = true;
  rec.completed_at = ts;
  rec.outputs = std::move(outputs);
}

void RunManifest::advance_event(const std::string& event_id,
                                const std::string& stage) {
  auto& rec = events[event_id];
  if (stage_index(stage) > stage_index(rec.stage_reached)) {
    rec.stage_reached = stage;
  }
}

namespace {

nlohmann::json event_record_to_json(const EventRecord& e) {
  nlohmann::json j{{"stage_reached", e.stage_reached},
                   {"pull_counts", e.pull_counts},
                   {"verification_counts", e.verification_counts},
                   {"errors", e.errors},
                   {"warnings", e.warnings}};
  if (e.provider_query_id) j["provider_query_id"] = *e.provider_query_id;
  if (e.backfill_percent) j["backfill_percent"] = *e.backfill_percent;
  return j;
}

EventRecord event_record_from_json(const nlohmann::json& j) {
  EventRecord e;
  e.stage_reached = j.at("stage_reached").get<std::string>();
  if (j.contains("provider_query_id")) {
    e.provider_query_id = j.at("provider_query_id").get<std::string>();
  }
  if (j.contains("backfill_percent")) {
    e.backfill_percent = j.at("backfill_percent").get<double>();
  }
  e.pull_counts = j.value("pull_counts", std::map<std::string, int>{});
  e.verification_counts =
      j.value("verification_counts", std::map<std::string, int>{});
  e.errors = j.value("errors", std::vector<std::string>{});
  e.warnings = j.value("warnings", std::vector<std::string>{});
  return e;
}

}  // namespace

nlohmann::json RunManifest::to_json() const {
  nlohmann::json je = nlohmann::json::object();
  for (const auto& [id, rec] : events) je[id] = event_record_to_json(rec);

  nlohmann::json js = nlohmann::json::object();
  for (const auto& [name, rec] : stages) {
    js[name] = {{"completed", rec.completed},
                {"completed_at", rec.completed_at},
                {"outputs", rec.outputs}};
  }

  nlohmann::json jl = nlohmann::json::array();
  for (const auto& entry : log) {
    jl.push_back({{"ts", entry.ts},
                  {"stage", entry.stage},
                  {"message", entry.message}});
  }

  return nlohmann::json{{"run_id", run_id},
                        {"created_at", created_at},
                        {"config", config},
                        {"config_hash", config_hash},
                        {"events", je},
                        {"stages", js},
                        {"log", jl},
                        {"request_count", request_count}};
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  m.run_id = j.at("run_id").get<std::string>();
  m.created_at = j.at("created_at").get<TimeMs>();
  m.config = j.at("config");
  m.config_hash = j.at("config_hash").get<std::string>();
  for (const auto& [id, rec] : j.at("events").items()) {
    m.events[id] = event_record_from_json(rec);
  }
  for (const auto& [name, rec] : j.at("stages").items()) {
    StageRecord s;
    s.completed = rec.at("completed").get<bool>();
    s.completed_at = rec.at("completed_at").get<TimeMs>();
    s.outputs = rec.at("outputs").get<std::map<std::string, std::string>>();
    m.stages[name] = s;
  }
  for (const auto& entry : j.at("log")) {
    m.log.push_back({entry.at("ts").get<TimeMs>(),
                     entry.at("stage").get<std::string>(),
                     entry.at("message").get<std::string>()});
  }
  m.request_count = j.at("request_count").get<long long>();
  return m;
}

void RunManifest::save(const std::filesystem::path& path) const {
  atomic_write_file(path, to_json().dump(2) + "\n");
}

RunManifest RunManifest::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw std::runtime_error("manifest not found: " + path.string());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
    return from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("corrupt manifest at " + path.string() + ": " +
                             e.what());
  }
}

}  // namespace newsrace
