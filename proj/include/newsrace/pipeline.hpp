#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "newsrace/chrono.hpp"
#include "newsrace/drafting.hpp"
#include "newsrace/manifest.hpp"
#include "newsrace/provider.hpp"
#include "newsrace/store.hpp"
#include "newsrace/types.hpp"

namespace newsrace {

// Declarative run configuration.  Credentials are NOT part of the config:
// live modes read them from environment variables at startup, and the
// manifest's config snapshot therefore never contains a secret.
struct RunConfig {
  std::string run_id;
  std::filesystem::path runs_root = "runs";

  std::string provider_mode = "mock";     // mock | live
  std::string backend_mode = "fallback";  // fallback | remote
  std::string model_name;                 // remote backend only

  std::filesystem::path fixtures_dir = "fixtures";
  std::filesystem::path prompts_dir = "data/prompts";
  std::filesystem::path lexicon_path = "data/us_lexicon.txt";

  // Seeding.
  bool seed_wcep_enabled = true;
  bool seed_polymarket_enabled = true;
  DateWindow wcep_window;
  int wcep_top = 50;
  int wcep_per_article_cap = 3;
  DateWindow polymarket_window;
  long long polymarket_floor_cents = 10'000'000;  // $100,000
  int polymarket_top = 130;
  TimeMs spike_window_ms = kMsPerHour;

  // Provider interaction.
  int rate_cap = 28;
  TimeMs rate_window_ms = 600 * kMsPerSecond;
  double backfill_floor = 50.0;
  TimeMs backfill_cap_ms = 90 * kMsPerSecond;
  TimeMs backfill_poll_ms = 5 * kMsPerSecond;
  TimeMs window_pre_ms = 30 * kMsPerMinute;
  TimeMs window_post_ms = 24 * kMsPerHour;
  int page_size = 100;

  // Drafting / verification / probe.
  double specificity_threshold = 0.5;
  bool clamp_pre_event = false;  // drop pre-t_e candidates before the walk
  int probe_levels = 5;
  int probe_max_events = 1;  // zero-hit events probed, 0 disables the stage

  // Strict parse: unknown keys are rejected so config typos surface early.
  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  // Empty when valid, otherwise the first problem found.  Checks numeric
  // positivity, mode names, and (for live modes) required env credentials.
  std::string validate() const;

  // Content hash of the canonical JSON form; resume refuses a mismatch.
  std::string hash() const;
};

// Per-event request ceiling and the wall-clock floor it implies under the
// provider cap.
struct BudgetProjection {
  int per_event_requests = 0;      // 1 create + polls + 2 pulls + 1 delete
  long long total_requests = 0;
  double projected_hours = 0.0;    // total / cap * window, lower bound
};

BudgetProjection project_budget(const RunConfig& config, int event_count);

// Outcome of one stage or one whole run.
enum class RunOutcome { ok = 0, partial = 2, fatal = 1 };

// Stage orchestration over one run directory.  Stages are idempotent: a
// stage whose manifest record is complete and whose recorded outputs still
// checksum-match is skipped; anything downstream of a stale or missing
// output is re-executed.
class Pipeline {
 public:
  Pipeline(RunConfig config, Clock& clock);

  RunOutcome run_stage(const std::string& stage);
  RunOutcome full_run();

  // Loads an existing run and continues from the first incomplete or stale
  // stage.  Throws std::runtime_error when the manifest is missing/corrupt
  // or when `expected_config_hash` (if given) does not match the run's.
  static RunOutcome resume(const std::filesystem::path& runs_root,
                           const std::string& run_id, Clock& clock,
                           const std::optional<std::string>& expected_config_hash =
                               std::nullopt);

  const RunManifest& manifest() const { return manifest_; }
  const RunStore& store() const { return store_; }
  const RunConfig& config() const { return config_; }

 private:
  RunOutcome seed();
  RunOutcome draft();
  RunOutcome pull();
  RunOutcome verify_stage();
  RunOutcome probe();
  RunOutcome analyze();

  bool stage_fresh(const std::string& stage) const;
  void save_manifest();
  void log(const std::string& stage, const std::string& message);
  RunOutcome outcome_from_events() const;

  std::unique_ptr<ModelBackend> make_backend();
  std::unique_ptr<ProviderClient> make_provider();
  std::map<std::string, BooleanQuery> load_x_queries();
  std::map<std::string, BooleanQuery> load_news_queries();

  RunConfig config_;
  Clock& clock_;
  RunStore store_;
  RateLimiter limiter_;
  RunManifest manifest_;
};

}  // namespace newsrace
