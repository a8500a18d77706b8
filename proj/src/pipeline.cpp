#include "newsrace/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>
#include <utility>

#include "newsrace/analytics.hpp"
#include "newsrace/boolean_query.hpp"
#include "newsrace/channel.hpp"
#include "newsrace/polymarket.hpp"
#include "newsrace/provider_live.hpp"
#include "newsrace/verify.hpp"
#include "newsrace/wcep.hpp"
#include "newsrace/xrecover.hpp"

namespace newsrace {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

DateWindow window_from_json(const json& jw, const std::string& key) {
  for (const auto& [k, v] : jw.items()) {
    (void)v;
    if (k != "from" && k != "to") {
      throw std::runtime_error("unknown key '" + k + "' in " + key);
    }
  }
  auto from = parse_date(jw.at("from").get<std::string>());
  auto to = parse_date(jw.at("to").get<std::string>());
  if (!from || !to) {
    throw std::runtime_error(key + ": dates must be YYYY-MM-DD");
  }
  if (*to < *from) {
    throw std::runtime_error(key + ": 'to' precedes 'from'");
  }
  return {*from, *to};
}

json window_to_json(const DateWindow& w) {
  return json{{"from", format_date(w.from)}, {"to", format_date(w.to)}};
}

bool env_present(const char* name) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0';
}

// "29.2" style one-decimal percent of num/den, round half away from zero.
std::string percent_1dp(long long num, long long den) {
  if (den <= 0) return "0.0";
  long long tenths = (2000 * num + den) / (2 * den);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld.%lld", tenths / 10, tenths % 10);
  return buf;
}

std::string hours_1dp(double h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", h);
  return buf;
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  static const std::set<std::string> known = {
      "run_id",          "provider_mode",
      "backend_mode",    "model_name",
      "fixtures_dir",    "prompts_dir",
      "lexicon_path",    "seed_wcep_enabled",
      "seed_polymarket_enabled", "wcep_window",
      "wcep_top",        "wcep_per_article_cap",
      "polymarket_window", "polymarket_floor_cents",
      "polymarket_top",  "spike_window_ms",
      "rate_cap",        "rate_window_ms",
      "backfill_floor",  "backfill_cap_ms",
      "backfill_poll_ms", "window_pre_ms",
      "window_post_ms",  "page_size",
      "specificity_threshold", "clamp_pre_event",
      "probe_levels",    "probe_max_events"};
  for (const auto& [k, v] : j.items()) {
    (void)v;
    if (!known.count(k)) {
      throw std::runtime_error("unknown config key: " + k);
    }
  }

  RunConfig c;
  auto str = [&](const char* k, std::string& out) {
    if (j.contains(k)) out = j.at(k).get<std::string>();
  };
  auto path = [&](const char* k, fs::path& out) {
    if (j.contains(k)) out = fs::path(j.at(k).get<std::string>());
  };
  auto boolean = [&](const char* k, bool& out) {
    if (j.contains(k)) out = j.at(k).get<bool>();
  };
  auto integer = [&](const char* k, auto& out) {
    if (j.contains(k)) out = j.at(k).get<std::decay_t<decltype(out)>>();
  };

  str("run_id", c.run_id);
  str("provider_mode", c.provider_mode);
  str("backend_mode", c.backend_mode);
  str("model_name", c.model_name);
  path("fixtures_dir", c.fixtures_dir);
  path("prompts_dir", c.prompts_dir);
  path("lexicon_path", c.lexicon_path);
  boolean("seed_wcep_enabled", c.seed_wcep_enabled);
  boolean("seed_polymarket_enabled", c.seed_polymarket_enabled);
  if (j.contains("wcep_window")) {
    c.wcep_window = window_from_json(j.at("wcep_window"), "wcep_window");
  }
  integer("wcep_top", c.wcep_top);
  integer("wcep_per_article_cap", c.wcep_per_article_cap);
  if (j.contains("polymarket_window")) {
    c.polymarket_window =
        window_from_json(j.at("polymarket_window"), "polymarket_window");
  }
  integer("polymarket_floor_cents", c.polymarket_floor_cents);
  integer("polymarket_top", c.polymarket_top);
  integer("spike_window_ms", c.spike_window_ms);
  integer("rate_cap", c.rate_cap);
  integer("rate_window_ms", c.rate_window_ms);
  if (j.contains("backfill_floor")) {
    c.backfill_floor = j.at("backfill_floor").get<double>();
  }
  integer("backfill_cap_ms", c.backfill_cap_ms);
  integer("backfill_poll_ms", c.backfill_poll_ms);
  integer("window_pre_ms", c.window_pre_ms);
  integer("window_post_ms", c.window_post_ms);
  integer("page_size", c.page_size);
  if (j.contains("specificity_threshold")) {
    c.specificity_threshold = j.at("specificity_threshold").get<double>();
  }
  boolean("clamp_pre_event", c.clamp_pre_event);
  integer("probe_levels", c.probe_levels);
  integer("probe_max_events", c.probe_max_events);
  return c;
}

json RunConfig::to_json() const {
  // runs_root is deliberately absent: it is where the run lives, not part of
  // what the run means, so a relocated runs tree still hash-matches.
  return json{
      {"run_id", run_id},
      {"provider_mode", provider_mode},
      {"backend_mode", backend_mode},
      {"model_name", model_name},
      {"fixtures_dir", fixtures_dir.generic_string()},
      {"prompts_dir", prompts_dir.generic_string()},
      {"lexicon_path", lexicon_path.generic_string()},
      {"seed_wcep_enabled", seed_wcep_enabled},
      {"seed_polymarket_enabled", seed_polymarket_enabled},
      {"wcep_window", window_to_json(wcep_window)},
      {"wcep_top", wcep_top},
      {"wcep_per_article_cap", wcep_per_article_cap},
      {"polymarket_window", window_to_json(polymarket_window)},
      {"polymarket_floor_cents", polymarket_floor_cents},
      {"polymarket_top", polymarket_top},
      {"spike_window_ms", spike_window_ms},
      {"rate_cap", rate_cap},
      {"rate_window_ms", rate_window_ms},
      {"backfill_floor", backfill_floor},
      {"backfill_cap_ms", backfill_cap_ms},
      {"backfill_poll_ms", backfill_poll_ms},
      {"window_pre_ms", window_pre_ms},
      {"window_post_ms", window_post_ms},
      {"page_size", page_size},
      {"specificity_threshold", specificity_threshold},
      {"clamp_pre_event", clamp_pre_event},
      {"probe_levels", probe_levels},
      {"probe_max_events", probe_max_events}};
}

std::string RunConfig::validate() const {
  if (run_id.empty()) return "run_id must be set";
  for (char ch : run_id) {
    if (ch == '/' || ch == '\\' || ch == ' ' || ch == '\t') {
      return "run_id may not contain path separators or whitespace";
    }
  }
  if (provider_mode != "mock" && provider_mode != "live") {
    return "provider_mode must be 'mock' or 'live'";
  }
  if (backend_mode != "fallback" && backend_mode != "remote") {
    return "backend_mode must be 'fallback' or 'remote'";
  }
  if (backend_mode == "remote") {
    if (model_name.empty()) return "remote backend requires model_name";
    if (!env_present("NEWSRACE_MODEL_HOST") ||
        !env_present("NEWSRACE_MODEL_KEY")) {
      return "remote backend requires NEWSRACE_MODEL_HOST and "
             "NEWSRACE_MODEL_KEY in the environment";
    }
  }
  if (provider_mode == "live") {
    if (!env_present("NEWSRACE_PROVIDER_HOST") ||
        !env_present("NEWSRACE_PROVIDER_TOKEN")) {
      return "live provider requires NEWSRACE_PROVIDER_HOST and "
             "NEWSRACE_PROVIDER_TOKEN in the environment";
    }
  }
  if (seed_wcep_enabled) {
    if (!is_valid_date(wcep_window.from) || !is_valid_date(wcep_window.to)) {
      return "wcep_window dates are invalid";
    }
    if (wcep_window.to < wcep_window.from) {
      return "wcep_window 'to' precedes 'from'";
    }
  }
  if (seed_polymarket_enabled) {
    if (!is_valid_date(polymarket_window.from) ||
        !is_valid_date(polymarket_window.to)) {
      return "polymarket_window dates are invalid";
    }
    if (polymarket_window.to < polymarket_window.from) {
      return "polymarket_window 'to' precedes 'from'";
    }
  }
  if (wcep_top <= 0) return "wcep_top must be positive";
  if (wcep_per_article_cap <= 0) return "wcep_per_article_cap must be positive";
  if (polymarket_floor_cents < 0) return "polymarket_floor_cents must be >= 0";
  if (polymarket_top <= 0) return "polymarket_top must be positive";
  if (spike_window_ms <= 0) return "spike_window_ms must be positive";
  if (rate_cap <= 0) return "rate_cap must be positive";
  if (rate_window_ms <= 0) return "rate_window_ms must be positive";
  if (backfill_floor < 0.0 || backfill_floor > 100.0) {
    return "backfill_floor must be in [0, 100]";
  }
  if (backfill_cap_ms <= 0) return "backfill_cap_ms must be positive";
  if (backfill_poll_ms <= 0) return "backfill_poll_ms must be positive";
  if (window_pre_ms < 0) return "window_pre_ms must be >= 0";
  if (window_post_ms < 0) return "window_post_ms must be >= 0";
  if (page_size <= 0) return "page_size must be positive";
  if (specificity_threshold < 0.0 || specificity_threshold > 1.0) {
    return "specificity_threshold must be in [0, 1]";
  }
  if (probe_levels < 1) return "probe_levels must be >= 1";
  if (probe_max_events < 0) return "probe_max_events must be >= 0";
  return "";
}

std::string RunConfig::hash() const { return fnv1a64_hex(to_json().dump()); }

BudgetProjection project_budget(const RunConfig& config, int event_count) {
  BudgetProjection p;
  const long long polls =
      (config.backfill_cap_ms + config.backfill_poll_ms - 1) /
      config.backfill_poll_ms;
  p.per_event_requests = static_cast<int>(1 + polls + 2 + 1);
  p.total_requests = static_cast<long long>(p.per_event_requests) * event_count;
  p.projected_hours = static_cast<double>(p.total_requests) / config.rate_cap *
                      static_cast<double>(config.rate_window_ms) / 3600000.0;
  return p;
}

Pipeline::Pipeline(RunConfig config, Clock& clock)
    : config_(std::move(config)),
      clock_(clock),
      store_(config_.runs_root, config_.run_id),
      limiter_(config_.rate_cap, config_.rate_window_ms) {
  const std::string problem = config_.validate();
  if (!problem.empty()) {
    throw std::runtime_error("invalid configuration: " + problem);
  }
  if (store_.exists(store_.manifest_path())) {
    manifest_ = RunManifest::load(store_.manifest_path());
    if (manifest_.config_hash != config_.hash()) {
      throw std::runtime_error(
          "config hash mismatch for run '" + config_.run_id +
          "': manifest records " + manifest_.config_hash +
          ", current configuration hashes to " + config_.hash() +
          " (start a new run or restore the original configuration)");
    }
  } else {
    manifest_.run_id = config_.run_id;
    manifest_.created_at = clock_.now();
    manifest_.config = config_.to_json();
    manifest_.config_hash = config_.hash();
    save_manifest();
  }
}

void Pipeline::save_manifest() { manifest_.save(store_.manifest_path()); }

void Pipeline::log(const std::string& stage, const std::string& message) {
  manifest_.log_line(clock_.now(), stage, message);
  std::fprintf(stderr, "[%s] %s\n", stage.c_str(), message.c_str());
}

RunOutcome Pipeline::outcome_from_events() const {
  for (const auto& [id, rec] : manifest_.events) {
    (void)id;
    if (!rec.errors.empty()) return RunOutcome::partial;
  }
  return RunOutcome::ok;
}

bool Pipeline::stage_fresh(const std::string& stage) const {
  auto it = manifest_.stages.find(stage);
  if (it == manifest_.stages.end() || !it->second.completed) return false;
  for (const auto& [rel, sum] : it->second.outputs) {
    // A later completed stage may legitimately rewrite a file this stage
    // produced (verification statuses land in the mention store); the
    // expected checksum is the one recorded by the last such stage.
    std::string expected = sum;
    for (int idx = stage_index(stage) + 1;
         idx < static_cast<int>(stage_order().size()); ++idx) {
      auto later = manifest_.stages.find(stage_order()[idx]);
      if (later == manifest_.stages.end() || !later->second.completed) continue;
      auto hit = later->second.outputs.find(rel);
      if (hit != later->second.outputs.end()) expected = hit->second;
    }
    const fs::path path = store_.root() / fs::path(rel);
    if (!fs::exists(path)) return false;
    if (file_checksum_hex(path) != expected) return false;
  }
  return true;
}

std::unique_ptr<ModelBackend> Pipeline::make_backend() {
  if (config_.backend_mode == "remote") {
    return std::make_unique<RemoteBackend>(config_.prompts_dir,
                                           config_.model_name);
  }
  return std::make_unique<FallbackBackend>();
}

std::unique_ptr<ProviderClient> Pipeline::make_provider() {
  if (config_.provider_mode == "live") {
    return std::make_unique<LiveProvider>();
  }
  auto mock = std::make_unique<MockProvider>(
      MockProvider::load_docs(config_.fixtures_dir / "provider"));
  // A short ramp below-then-above the floor so mock runs exercise the same
  // poll-until-floor path live runs take.
  mock->set_default_backfill({40.0, 75.0});
  return mock;
}

// ---------------------------------------------------------------------------
// seed

RunOutcome Pipeline::seed() {
  std::vector<Event> events;

  if (config_.seed_wcep_enabled) {
    std::map<std::string, std::string> pages;
    for (const auto& month : months_in_window(config_.wcep_window)) {
      const fs::path page = config_.fixtures_dir / "wcep" / (month + ".html");
      if (fs::exists(page)) pages[month] = read_file(page);
    }
    std::vector<std::string> errors;
    const auto bullets = scrape_wcep(pages, config_.wcep_window, errors);
    for (const auto& e : errors) log(stages::kSeed, "wcep: " + e);

    const auto lexicon = load_lexicon(config_.lexicon_path);
    std::vector<WcepBullet> relevant;
    for (const auto& b : bullets) {
      if (us_filter(b.bullet_text, lexicon)) relevant.push_back(b);
    }
    log(stages::kSeed,
        "wcep: " + std::to_string(bullets.size()) + " bullets scanned, " +
            std::to_string(relevant.size()) + " U.S.-relevant (" +
            percent_1dp(static_cast<long long>(relevant.size()),
                        static_cast<long long>(bullets.size())) +
            "%)");

    const fs::path views_file =
        config_.fixtures_dir / "wcep" / "pageviews.json";
    std::unique_ptr<PageviewSource> views;
    if (fs::exists(views_file)) {
      views = std::make_unique<FixturePageviews>(views_file);
    } else if (config_.provider_mode == "live") {
      views = std::make_unique<LivePageviews>();
    } else {
      throw std::runtime_error("pageview fixture missing: " +
                               views_file.generic_string());
    }
    std::vector<std::string> warnings;
    std::map<std::string, PageviewRecord> views_by_key;
    for (const auto& b : relevant) {
      views_by_key[bullet_view_key(b)] =
          fetch_pageviews(b.linked_article, b.event_date, *views, warnings);
    }
    for (const auto& w : warnings) log(stages::kSeed, "wcep: " + w);

    const auto ranked = rank_and_cap(relevant, views_by_key,
                                     config_.wcep_per_article_cap,
                                     config_.wcep_top);
    log(stages::kSeed,
        "wcep: " + std::to_string(ranked.events.size()) + " events across " +
            std::to_string(ranked.distinct_articles) + " articles");
    if (ranked.shortfall) {
      log(stages::kSeed, "wcep: fewer survivors than requested top-" +
                             std::to_string(config_.wcep_top));
    }
    events.insert(events.end(), ranked.events.begin(), ranked.events.end());
  }

  if (config_.seed_polymarket_enabled) {
    const auto markets =
        load_markets(config_.fixtures_dir / "polymarket" / "markets.jsonl");
    const auto trades =
        load_trades(config_.fixtures_dir / "polymarket" / "trades.jsonl");
    const TimeWindow scan = config_.polymarket_window.as_time_window();
    const auto filtered = filter_markets(
        markets, scan, config_.polymarket_floor_cents, config_.polymarket_top);

    std::map<std::string, std::vector<Trade>> by_market;
    for (const auto& t : trades) by_market[t.market_id].push_back(t);
    for (auto& [id, ts] : by_market) {
      (void)id;
      std::stable_sort(ts.begin(), ts.end(),
                       [](const Trade& a, const Trade& b) { return a.ts < b.ts; });
    }

    const auto pinned =
        pin_events(filtered, by_market, config_.spike_window_ms, scan);
    log(stages::kSeed,
        "polymarket: " + std::to_string(markets.size()) + " markets, " +
            std::to_string(filtered.size()) + " past filters, " +
            std::to_string(pinned.dropped_no_trades) +
            " dropped without in-scan trades, " +
            std::to_string(pinned.events.size()) + " events across " +
            std::to_string(pinned.distinct_event_slugs) + " event slugs");
    events.insert(events.end(), pinned.events.begin(), pinned.events.end());
  }

  std::vector<Event> unique_events;
  std::set<std::string> seen;
  for (const auto& e : events) {
    if (!seen.insert(e.event_id).second) {
      log(stages::kSeed, "duplicate event id " + e.event_id + " dropped (" +
                             e.title + ")");
      continue;
    }
    unique_events.push_back(e);
  }

  store_.write_jsonl(store_.events_path(), unique_events);
  for (const auto& e : unique_events) {
    manifest_.advance_event(e.event_id, stages::kSeed);
  }
  log(stages::kSeed,
      "seeded " + std::to_string(unique_events.size()) + " events");

  std::map<std::string, std::string> outputs;
  outputs[store_.rel(store_.events_path())] =
      store_.checksum(store_.events_path());
  manifest_.complete_stage(stages::kSeed, clock_.now(), std::move(outputs));
  save_manifest();
  return outcome_from_events();
}

// ---------------------------------------------------------------------------
// draft

RunOutcome Pipeline::draft() {
  const auto events = store_.read_jsonl<Event>(store_.events_path());
  auto backend = make_backend();
  FallbackBackend fallback;

  std::vector<json> feature_rows;
  std::vector<json> query_rows;
  int flagged = 0;

  for (const auto& event : events) {
    EventRecord& rec = manifest_.event(event.event_id);

    bool warned = false;
    const FeatureVector features =
        extract_features_safe(event, *backend, warned);
    if (warned) {
      rec.warnings.push_back(
          "feature extraction failed; all axes recorded unknown");
    }
    json frow(features);
    frow["event_id"] = event.event_id;
    feature_rows.push_back(std::move(frow));

    DraftResult dr = draft_booleans_with_retry(event, *backend, fallback);
    if (dr.used_fallback) {
      rec.warnings.push_back(
          "backend draft malformed twice; deterministic drafter used");
    }
    SpecificityScore news_score =
        specificity_gate(dr.news, *backend, config_.specificity_threshold);
    SpecificityScore x_score =
        specificity_gate(dr.x, *backend, config_.specificity_threshold);

    bool manual_review = false;
    if (!news_score.approved || !x_score.approved) {
      DraftResult redraft = draft_booleans_with_retry(event, *backend, fallback);
      SpecificityScore news2 = specificity_gate(redraft.news, *backend,
                                                config_.specificity_threshold);
      SpecificityScore x2 =
          specificity_gate(redraft.x, *backend, config_.specificity_threshold);
      if ((news2.value + x2.value) >= (news_score.value + x_score.value)) {
        dr = std::move(redraft);
        news_score = news2;
        x_score = x2;
      }
      if (!news_score.approved || !x_score.approved) {
        manual_review = true;
        ++flagged;
        rec.warnings.push_back(
            "specificity below threshold after redraft; flagged for manual "
            "review");
      }
    }

    query_rows.push_back(json{
        {"event_id", event.event_id},
        {"news", dr.news.render()},
        {"x", dr.x.render()},
        {"news_specificity", news_score.value},
        {"x_specificity", x_score.value},
        {"approved", !manual_review},
        {"manual_review", manual_review},
        {"used_fallback", dr.used_fallback}});

    manifest_.advance_event(event.event_id, stages::kDraft);
  }

  store_.write_jsonl(store_.features_path(), feature_rows);
  store_.write_jsonl(store_.queries_path(), query_rows);
  log(stages::kDraft,
      "drafted booleans for " + std::to_string(events.size()) + " events" +
          (flagged > 0 ? ", " + std::to_string(flagged) + " flagged for review"
                       : ""));

  std::map<std::string, std::string> outputs;
  outputs[store_.rel(store_.features_path())] =
      store_.checksum(store_.features_path());
  outputs[store_.rel(store_.queries_path())] =
      store_.checksum(store_.queries_path());
  manifest_.complete_stage(stages::kDraft, clock_.now(), std::move(outputs));
  save_manifest();
  return outcome_from_events();
}

// ---------------------------------------------------------------------------
// pull

std::map<std::string, BooleanQuery> Pipeline::load_x_queries() {
  std::map<std::string, BooleanQuery> out;
  for (const auto& line : store_.read_jsonl_raw(store_.queries_path())) {
    const json row = json::parse(line);
    out[row.at("event_id").get<std::string>()] = parse_boolean(
        row.at("x").get<std::string>(), QueryKind::x_permissive);
  }
  return out;
}

std::map<std::string, BooleanQuery> Pipeline::load_news_queries() {
  std::map<std::string, BooleanQuery> out;
  for (const auto& line : store_.read_jsonl_raw(store_.queries_path())) {
    const json row = json::parse(line);
    out[row.at("event_id").get<std::string>()] = parse_boolean(
        row.at("news").get<std::string>(), QueryKind::news_tight);
  }
  return out;
}

RunOutcome Pipeline::pull() {
  const auto events = store_.read_jsonl<Event>(store_.events_path());
  const auto x_queries = load_x_queries();

  const BudgetProjection budget =
      project_budget(config_, static_cast<int>(events.size()));
  log(stages::kPull,
      "budget: " + std::to_string(events.size()) + " events, ceiling " +
          std::to_string(budget.per_event_requests) + " requests each (" +
          std::to_string(budget.total_requests) + " total), >= " +
          hours_1dp(budget.projected_hours) + " h at " +
          std::to_string(config_.rate_cap) + " per window");

  auto provider = make_provider();
  FixtureOembed fixture_oembed(config_.fixtures_dir / "oembed");
  LiveOembed live_oembed;
  OembedClient& oembed_client =
      (config_.provider_mode == "live")
          ? static_cast<OembedClient&>(live_oembed)
          : static_cast<OembedClient&>(fixture_oembed);
  OembedCache oembed_cache(store_.oembed_dir());

  int pulled = 0;
  int skipped = 0;
  int failed = 0;
  for (const auto& event : events) {
    EventRecord& rec = manifest_.event(event.event_id);
    if (rec.reached(stages::kPull) &&
        store_.exists(store_.mentions_path(event.event_id))) {
      ++skipped;
      continue;
    }
    auto qit = x_queries.find(event.event_id);
    if (qit == x_queries.end()) {
      rec.errors.push_back("no drafted x query on record");
      ++failed;
      continue;
    }

    QuerySession session(*provider, limiter_, clock_);
    try {
      const SavedQuery saved = session.create(qit->second);
      rec.provider_query_id = saved.provider_query_id;
      save_manifest();

      rec.backfill_percent = session.await_backfill(
          config_.backfill_floor, config_.backfill_cap_ms,
          config_.backfill_poll_ms);

      const TimeWindow window{event.t_e - config_.window_pre_ms,
                              event.t_e + config_.window_post_ms};
      auto all = session.pull_all(window, config_.page_size);
      const auto tw = session.pull_twitter(window, config_.page_size);
      session.remove();

      std::set<std::pair<std::string, std::string>> keys;
      std::vector<Mention> merged;
      for (const auto& m : all) {
        if (keys.insert({m.channel, m.guid}).second) merged.push_back(m);
      }
      for (const auto& m : tw) {
        if (keys.insert({m.channel, m.guid}).second) merged.push_back(m);
      }

      for (auto& m : merged) {
        if (m.channel != channels::kTwitter) continue;
        if (const auto raw = parse_guid(m.guid)) {
          m.recovered_ts = decode_snowflake(*raw);
        } else {
          rec.warnings.push_back("unparseable twitter guid " + m.guid);
        }
        const auto body = oembed_cache.get_or_fetch(m.guid, std::nullopt,
                                                    oembed_client, clock_.now());
        if (body && !body->text.empty()) m.body = body->text;
      }

      std::stable_sort(merged.begin(), merged.end(),
                       [](const Mention& a, const Mention& b) {
                         if (a.channel != b.channel) return a.channel < b.channel;
                         const auto ta = a.order_ts();
                         const auto tb = b.order_ts();
                         if (ta.has_value() != tb.has_value()) {
                           return ta.has_value();
                         }
                         if (ta && tb && *ta != *tb) return *ta < *tb;
                         return a.guid < b.guid;
                       });

      store_.write_jsonl(store_.mentions_path(event.event_id), merged);
      rec.pull_counts.clear();
      for (const auto& m : merged) ++rec.pull_counts[m.channel];
      manifest_.request_count += session.requests_made();
      manifest_.advance_event(event.event_id, stages::kPull);
      ++pulled;
      save_manifest();
    } catch (const std::exception& e) {
      manifest_.request_count += session.requests_made();
      rec.errors.push_back(std::string("pull failed: ") + e.what());
      if (rec.provider_query_id &&
          session.state() != SessionState::deleted) {
        log(stages::kPull, "provider query " + *rec.provider_query_id +
                               " left behind after failure on event " +
                               event.event_id);
      }
      ++failed;
      save_manifest();
    }
  }

  log(stages::kPull, "pulled " + std::to_string(pulled) + " events, skipped " +
                         std::to_string(skipped) + " already complete, " +
                         std::to_string(failed) + " failed; " +
                         std::to_string(manifest_.request_count) +
                         " provider requests so far");

  std::map<std::string, std::string> outputs;
  for (const auto& event : events) {
    const fs::path p = store_.mentions_path(event.event_id);
    if (fs::exists(p)) outputs[store_.rel(p)] = store_.checksum(p);
  }
  manifest_.complete_stage(stages::kPull, clock_.now(), std::move(outputs));
  save_manifest();
  return outcome_from_events();
}

// ---------------------------------------------------------------------------
// verify

RunOutcome Pipeline::verify_stage() {
  const auto events = store_.read_jsonl<Event>(store_.events_path());
  const auto x_queries = load_x_queries();
  const auto news_queries = load_news_queries();
  auto backend = make_backend();

  std::vector<ChannelEarliest> all_earliest;
  std::vector<AdjudicationRecord> all_transcripts;
  std::vector<fs::path> rewritten;
  int verified_events = 0;

  for (const auto& event : events) {
    EventRecord& rec = manifest_.event(event.event_id);
    const fs::path mentions_file = store_.mentions_path(event.event_id);
    if (!rec.reached(stages::kPull) || !store_.exists(mentions_file)) {
      continue;  // the pull failure is already on record
    }
    auto mentions = store_.read_jsonl<Mention>(mentions_file);
    // Idempotent re-verification: statuses are recomputed from scratch.
    for (auto& m : mentions) m.verification = Verification::unverified;

    const KeywordSet keywords = KeywordSet::from_queries(
        news_queries.at(event.event_id), x_queries.at(event.event_id));

    std::vector<Mention> walk_set;
    walk_set.reserve(mentions.size());
    for (const auto& m : mentions) {
      if (config_.clamp_pre_event) {
        const auto ts = m.order_ts();
        if (ts && *ts < event.t_e) continue;  // pre-event chatter excluded
      }
      walk_set.push_back(m);
    }

    auto by_channel = group_by_channel(walk_set);
    EarliestResult result =
        earliest_verified(event, by_channel, keywords, *backend);

    // Fold the walked statuses back into the full mention list.
    std::map<std::pair<std::string, std::string>, Verification> status;
    for (const auto& [channel, list] : by_channel) {
      (void)channel;
      for (const auto& m : list) status[{m.channel, m.guid}] = m.verification;
    }
    rec.verification_counts.clear();
    for (auto& m : mentions) {
      auto hit = status.find({m.channel, m.guid});
      if (hit != status.end()) m.verification = hit->second;
      ++rec.verification_counts[to_string(m.verification)];
    }

    if (!result.earliest.empty()) ++verified_events;
    all_earliest.insert(all_earliest.end(), result.earliest.begin(),
                        result.earliest.end());
    all_transcripts.insert(all_transcripts.end(), result.transcripts.begin(),
                           result.transcripts.end());

    store_.write_jsonl(mentions_file, mentions);
    rewritten.push_back(mentions_file);
    manifest_.advance_event(event.event_id, stages::kVerify);
  }

  store_.write_jsonl(store_.earliest_path(), all_earliest);
  store_.write_jsonl(store_.adjudications_path(), all_transcripts);
  log(stages::kVerify,
      "verified evidence on " + std::to_string(verified_events) + " of " +
          std::to_string(events.size()) + " events; " +
          std::to_string(all_transcripts.size()) + " adjudications");

  std::map<std::string, std::string> outputs;
  outputs[store_.rel(store_.earliest_path())] =
      store_.checksum(store_.earliest_path());
  outputs[store_.rel(store_.adjudications_path())] =
      store_.checksum(store_.adjudications_path());
  for (const auto& p : rewritten) outputs[store_.rel(p)] = store_.checksum(p);
  manifest_.complete_stage(stages::kVerify, clock_.now(), std::move(outputs));
  save_manifest();
  return outcome_from_events();
}

// ---------------------------------------------------------------------------
// probe

RunOutcome Pipeline::probe() {
  std::map<std::string, std::string> outputs;
  if (config_.probe_max_events <= 0) {
    log(stages::kProbe, "probe disabled (probe_max_events = 0)");
    manifest_.complete_stage(stages::kProbe, clock_.now(), std::move(outputs));
    save_manifest();
    return outcome_from_events();
  }

  const auto events = store_.read_jsonl<Event>(store_.events_path());
  const auto x_queries = load_x_queries();

  std::vector<Event> zero_hit;
  for (const auto& event : events) {
    const EventRecord& rec = manifest_.event(event.event_id);
    if (!rec.reached(stages::kPull)) continue;
    int total = 0;
    for (const auto& [channel, n] : rec.pull_counts) {
      (void)channel;
      total += n;
    }
    if (total == 0) zero_hit.push_back(event);
    if (static_cast<int>(zero_hit.size()) >= config_.probe_max_events) break;
  }

  auto provider = make_provider();
  const size_t grants_before = limiter_.grant_log().size();
  for (const auto& event : zero_hit) {
    const auto ladder = broaden_ladder(x_queries.at(event.event_id), event,
                                       config_.probe_levels);
    const TimeWindow window{event.t_e - config_.window_pre_ms,
                            event.t_e + config_.window_post_ms};
    const ProbeReport report = probe_event(
        event, ladder, *provider, limiter_, clock_, window, config_.page_size,
        config_.backfill_floor, config_.backfill_cap_ms,
        config_.backfill_poll_ms);
    const fs::path out = store_.probe_path(event.event_id);
    atomic_write_file(out, json(report).dump(2) + "\n");
    outputs[store_.rel(out)] = store_.checksum(out);
    manifest_.advance_event(event.event_id, stages::kProbe);

    int yielding = 0;
    for (const auto& lvl : report.levels) {
      if (!lvl.errored && lvl.hits > 0) ++yielding;
    }
    log(stages::kProbe, "probed " + event.event_id + ": " +
                            std::to_string(report.levels.size()) +
                            " levels, " + std::to_string(yielding) +
                            " with hits");
  }
  manifest_.request_count += static_cast<long long>(
      limiter_.grant_log().size() - grants_before);

  if (zero_hit.empty()) log(stages::kProbe, "no zero-hit events to probe");
  manifest_.complete_stage(stages::kProbe, clock_.now(), std::move(outputs));
  save_manifest();
  return outcome_from_events();
}

// ---------------------------------------------------------------------------
// analyze

RunOutcome Pipeline::analyze() {
  const auto events = store_.read_jsonl<Event>(store_.events_path());
  const auto earliest =
      store_.read_jsonl<ChannelEarliest>(store_.earliest_path());

  std::map<std::string, std::vector<ChannelEarliest>> earliest_by_event;
  for (const auto& ce : earliest) earliest_by_event[ce.event_id].push_back(ce);

  std::vector<Event> sample_a;
  std::vector<Event> sample_b;
  for (const auto& e : events) {
    (e.surface == Surface::wcep ? sample_a : sample_b).push_back(e);
  }

  std::vector<std::string> warnings;
  const SampleAnalytics a = analyze_sample(sample_a, earliest_by_event, &warnings);
  const SampleAnalytics b = analyze_sample(sample_b, earliest_by_event, &warnings);
  for (const auto& w : warnings) log(stages::kAnalyze, w);

  std::vector<ProbeReport> reports;
  if (fs::exists(store_.probe_dir())) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(store_.probe_dir())) {
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      reports.push_back(json::parse(read_file(f)).get<ProbeReport>());
    }
  }

  std::map<std::string, std::string> outputs;
  auto emit = [&](const std::string& name, const RenderedTable& table) {
    const std::pair<const char*, const std::string*> parts[] = {
        {"txt", &table.txt}, {"csv", &table.csv}, {"md", &table.md}};
    for (const auto& [ext, content] : parts) {
      const fs::path p = store_.table_path(name, ext);
      atomic_write_file(p, *content);
      outputs[store_.rel(p)] = store_.checksum(p);
    }
  };
  emit("hits", render_hits(a, b));
  emit("winners", render_winners(a, b));
  emit("paired_a", render_paired(a, sample_a, 1));
  emit("paired_b", render_paired(b, sample_b, 2));
  emit("probe", render_probe(reports));

  for (const auto& e : events) {
    manifest_.advance_event(e.event_id, stages::kAnalyze);
  }
  log(stages::kAnalyze,
      "tables written: sample A " + std::to_string(a.verified_events) + "/" +
          std::to_string(sample_a.size()) + " events with evidence, sample B " +
          std::to_string(b.verified_events) + "/" +
          std::to_string(sample_b.size()));

  manifest_.complete_stage(stages::kAnalyze, clock_.now(), std::move(outputs));
  save_manifest();
  return outcome_from_events();
}

// ---------------------------------------------------------------------------
// orchestration

RunOutcome Pipeline::run_stage(const std::string& stage) {
  const int idx = stage_index(stage);
  if (idx < 0) throw std::invalid_argument("unknown stage: " + stage);
  if (idx > 0) {
    const std::string& prev = stage_order()[idx - 1];
    if (!manifest_.stage_completed(prev)) {
      throw std::runtime_error("stage '" + stage + "' requires completed '" +
                               prev + "'");
    }
  }
  if (stage == stages::kSeed) return seed();
  if (stage == stages::kDraft) return draft();
  if (stage == stages::kPull) return pull();
  if (stage == stages::kVerify) return verify_stage();
  if (stage == stages::kProbe) return probe();
  return analyze();
}

RunOutcome Pipeline::full_run() {
  bool upstream_rerun = false;
  for (const auto& stage : stage_order()) {
    if (!upstream_rerun && stage_fresh(stage)) {
      log(stage, "up to date; skipped");
      continue;
    }
    upstream_rerun = true;
    run_stage(stage);
  }
  return outcome_from_events();
}

RunOutcome Pipeline::resume(const fs::path& runs_root,
                            const std::string& run_id, Clock& clock,
                            const std::optional<std::string>& expected_config_hash) {
  const fs::path manifest_path = runs_root / run_id / "manifest.json";
  RunManifest manifest = RunManifest::load(manifest_path);
  if (expected_config_hash &&
      *expected_config_hash != manifest.config_hash) {
    throw std::runtime_error(
        "config hash mismatch: run '" + run_id + "' records " +
        manifest.config_hash + " but the supplied configuration hashes to " +
        *expected_config_hash);
  }
  RunConfig config = RunConfig::from_json(manifest.config);
  config.runs_root = runs_root;
  Pipeline pipeline(std::move(config), clock);
  return pipeline.full_run();
}

}  // namespace newsrace
