// Command-line front end for the breaking-news latency pipeline.
//
// A run is configured from an optional JSON file (--config) plus individual
// flag overrides, then driven either end-to-end (full-run) or one stage at a
// time.  Repeating a stage subcommand against the same run directory is safe:
// stages are idempotent and refuse to run ahead of their prerequisites.
//
// Exit status: 0 clean, 2 finished with event-level failures recorded in the
// manifest, 1 fatal (bad configuration, unreadable run, I/O trouble).

#include <cstdint>
#include <memory>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "newsrace/chrono.hpp"
#include "newsrace/manifest.hpp"
#include "newsrace/pipeline.hpp"
#include "newsrace/provider.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace newsrace;

namespace {

struct Overrides {
  std::optional<std::string> run_id, provider, backend, model;
  std::optional<std::string> runs_root, fixtures, prompts, lexicon;
  std::optional<std::string> wcep_from, wcep_to, poly_from, poly_to;
  std::optional<int> wcep_top, wcep_cap, poly_top, probe_levels,
      probe_max_events, rate_cap, page_size;
  std::optional<long long> poly_floor_cents;
  std::optional<std::string> sim_start;
  bool clamp_pre_event = false;
};

Date parse_date_flag(const std::string& flag, const std::string& value) {
  const std::optional<Date> d = parse_date(value);
  if (!d) {
    throw std::runtime_error(flag + " expects YYYY-MM-DD, got '" + value +
                             "'");
  }
  return *d;
}

RunConfig assemble_config(const std::optional<std::string>& config_file,
                          const Overrides& o) {
  RunConfig cfg;
  if (config_file) {
    std::ifstream in(*config_file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read config " + *config_file);
    json j;
    in >> j;
    cfg = RunConfig::from_json(j);
  }
  if (o.run_id) cfg.run_id = *o.run_id;
  if (o.runs_root) cfg.runs_root = *o.runs_root;
  if (o.provider) cfg.provider_mode = *o.provider;
  if (o.backend) cfg.backend_mode = *o.backend;
  if (o.model) cfg.model_name = *o.model;
  if (o.fixtures) cfg.fixtures_dir = *o.fixtures;
  if (o.prompts) cfg.prompts_dir = *o.prompts;
  if (o.lexicon) cfg.lexicon_path = *o.lexicon;
  if (o.wcep_from) cfg.wcep_window.from = parse_date_flag("--wcep-from", *o.wcep_from);
  if (o.wcep_to) cfg.wcep_window.to = parse_date_flag("--wcep-to", *o.wcep_to);
  if (o.poly_from) {
    cfg.polymarket_window.from = parse_date_flag("--poly-from", *o.poly_from);
  }
  if (o.poly_to) {
    cfg.polymarket_window.to = parse_date_flag("--poly-to", *o.poly_to);
  }
  if (o.wcep_top) cfg.wcep_top = *o.wcep_top;
  if (o.wcep_cap) cfg.wcep_per_article_cap = *o.wcep_cap;
  if (o.poly_top) cfg.polymarket_top = *o.poly_top;
  if (o.poly_floor_cents) cfg.polymarket_floor_cents = *o.poly_floor_cents;
  if (o.probe_levels) cfg.probe_levels = *o.probe_levels;
  if (o.probe_max_events) cfg.probe_max_events = *o.probe_max_events;
  if (o.rate_cap) cfg.rate_cap = *o.rate_cap;
  if (o.page_size) cfg.page_size = *o.page_size;
  if (o.clamp_pre_event) cfg.clamp_pre_event = true;
  return cfg;
}

// The mock provider serves a frozen corpus, so the simulated clock must
// start after everything it could pull; two days past the latest window end
// keeps every pull window in the past.
TimeMs sim_start_for(const RunConfig& cfg, const Overrides& o) {
  if (o.sim_start) {
    const std::optional<TimeMs> t = parse_instant(*o.sim_start);
    if (!t) {
      throw std::runtime_error("--sim-start expects an ISO instant, got '" +
                               *o.sim_start + "'");
    }
    return *t;
  }
  TimeMs latest = 0;
  if (cfg.seed_wcep_enabled) {
    latest = std::max(latest, cfg.wcep_window.as_time_window().end);
  }
  if (cfg.seed_polymarket_enabled) {
    latest = std::max(latest, cfg.polymarket_window.as_time_window().end);
  }
  return latest + 2 * kMsPerDay;
}

std::unique_ptr<Clock> make_clock(const RunConfig& cfg, const Overrides& o) {
  if (cfg.provider_mode == "mock") {
    return std::make_unique<SimClock>(sim_start_for(cfg, o));
  }
  return std::make_unique<RealClock>();
}

int drive(const RunConfig& cfg, const Overrides& o,
          const std::string& stage_or_full,
          const std::optional<std::string>& config_file) {
  if (stage_or_full == "resume") {
    // The run's own manifest is authoritative for configuration; a supplied
    // config file only pins the expected hash.
    const fs::path manifest_path =
        cfg.runs_root / cfg.run_id / "manifest.json";
    const RunManifest manifest = RunManifest::load(manifest_path);
    const RunConfig recorded = RunConfig::from_json(manifest.config);
    const std::unique_ptr<Clock> clock = make_clock(recorded, o);
    std::optional<std::string> expected;
    if (config_file) expected = cfg.hash();
    const RunOutcome outcome =
        Pipeline::resume(cfg.runs_root, cfg.run_id, *clock, expected);
    return static_cast<int>(outcome);
  }
  const std::unique_ptr<Clock> clock = make_clock(cfg, o);
  Pipeline pipeline(cfg, *clock);
  const RunOutcome outcome = stage_or_full == "full-run"
                                 ? pipeline.full_run()
                                 : pipeline.run_stage(stage_or_full);
  return static_cast<int>(outcome);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "newsrace: who reports breaking news first, X or everyone else?"};
  app.require_subcommand(1);

  std::optional<std::string> config_file;
  Overrides o;
  app.add_option("--config", config_file, "JSON run configuration file");
  app.add_option("--run-id", o.run_id, "run identifier (directory name)");
  app.add_option("--runs-root", o.runs_root, "parent directory for runs");
  app.add_option("--provider", o.provider, "provider mode: mock | live");
  app.add_option("--backend", o.backend,
                 "adjudication backend: fallback | remote");
  app.add_option("--model", o.model, "model name for the remote backend");
  app.add_option("--fixtures", o.fixtures, "fixture corpus directory");
  app.add_option("--prompts", o.prompts, "prompt template directory");
  app.add_option("--lexicon", o.lexicon, "U.S. relevance lexicon file");
  app.add_option("--wcep-from", o.wcep_from, "Sample A window start");
  app.add_option("--wcep-to", o.wcep_to, "Sample A window end");
  app.add_option("--poly-from", o.poly_from, "Sample B window start");
  app.add_option("--poly-to", o.poly_to, "Sample B window end");
  app.add_option("--wcep-top", o.wcep_top, "Sample A event count");
  app.add_option("--wcep-cap", o.wcep_cap, "per-article bullet cap");
  app.add_option("--poly-top", o.poly_top, "Sample B market count");
  app.add_option("--poly-floor-cents", o.poly_floor_cents,
                 "lifetime-volume floor in cents");
  app.add_option("--probe-levels", o.probe_levels, "recall ladder depth");
  app.add_option("--probe-max-events", o.probe_max_events,
                 "zero-hit events to probe (0 disables)");
  app.add_option("--rate-cap", o.rate_cap, "provider requests per window");
  app.add_option("--page-size", o.page_size, "provider page size");
  app.add_flag("--clamp-pre-event", o.clamp_pre_event,
               "drop pre-event candidates before the earliest-verified walk");
  app.add_option("--sim-start", o.sim_start,
                 "mock clock start instant (default: two days past the "
                 "latest seed window)");

  // Stage subcommands share the global option set; each maps onto one
  // manifest stage of the selected run.
  CLI::App* full = app.add_subcommand("full-run", "run every stage in order");
  CLI::App* seed_wcep = app.add_subcommand(
      "seed-wcep", "seed Sample A events (news-digest surface only)");
  CLI::App* seed_poly = app.add_subcommand(
      "seed-polymarket", "seed Sample B events (market surface only)");
  CLI::App* draft =
      app.add_subcommand("draft", "draft and score boolean queries");
  CLI::App* pull =
      app.add_subcommand("pull", "pull mentions for approved queries");
  CLI::App* verify =
      app.add_subcommand("verify", "verify mentions and walk earliest posts");
  CLI::App* probe =
      app.add_subcommand("probe", "run the recall ladder over zero-hit events");
  CLI::App* analyze = app.add_subcommand("analyze", "render result tables");
  CLI::App* resume = app.add_subcommand(
      "resume", "continue an existing run from its first incomplete stage");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = assemble_config(config_file, o);
    std::string action;
    if (full->parsed()) {
      action = "full-run";
    } else if (seed_wcep->parsed()) {
      cfg.seed_polymarket_enabled = false;
      action = stages::kSeed;
    } else if (seed_poly->parsed()) {
      cfg.seed_wcep_enabled = false;
      action = stages::kSeed;
    } else if (draft->parsed()) {
      action = stages::kDraft;
    } else if (pull->parsed()) {
      action = stages::kPull;
    } else if (verify->parsed()) {
      action = stages::kVerify;
    } else if (probe->parsed()) {
      action = stages::kProbe;
    } else if (analyze->parsed()) {
      action = stages::kAnalyze;
    } else if (resume->parsed()) {
      action = "resume";
    }
    return drive(cfg, o, action, config_file);
  } catch (const std::exception& e) {
    std::cerr << "newsrace: " << e.what() << "\n";
    return 1;
  }
}
