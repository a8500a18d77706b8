#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "newsrace/boolean_query.hpp"
#include "newsrace/chrono.hpp"
#include "newsrace/provider.hpp"
#include "newsrace/types.hpp"
#include "newsrace/verify.hpp"

namespace newsrace {

// Events with >=1 verified channel, per category bucket.
struct HitRateRow {
  std::string category;  // bucket key, or "all" for the footer row
  int hits = 0;
  int total = 0;
};

// Earliest-channel wins.  Equal-millisecond ties split one win equally
// across the tied channels; to keep arithmetic exact the split is stored in
// integer units of 1/2520 win (2520 = lcm(1..9), so any way of splitting a
// win across up to nine channels stays integral).
inline constexpr std::int64_t kWinUnit = 2520;

struct WinnerRow {
  std::string channel;
  std::int64_t win_units = 0;  // wins * kWinUnit
  double wins() const { return static_cast<double>(win_units) / kWinUnit; }
};

struct LatencySummary {
  int n = 0;
  std::optional<double> median_min;
  std::optional<double> q1_min;
  std::optional<double> q3_min;
  std::optional<double> x_first_share;
  int x_first_count = 0;

  // Exact integer forms used by the byte-stable renderers.  The median of
  // an even-length list is the mean of the central pair, kept as a
  // numerator/denominator over milliseconds.
  TimeMs median_num_ms = 0;
  int median_den = 1;
  TimeMs q1_ms = 0;
  TimeMs q3_ms = 0;
};

// Everything the tables need for one sample, recomputable from the
// persisted stores alone.
struct SampleAnalytics {
  std::vector<HitRateRow> hits;      // category rows then the "all" row
  std::vector<WinnerRow> winners;    // channels with win_units > 0
  std::vector<PairedDelta> paired;   // events verified on both x and news
  LatencySummary latency;
  int verified_events = 0;           // events with >=1 verified channel
};

// Integer percent with exact round-half-up: round(100*num/den).
int percent_of(std::int64_t num, std::int64_t den);

// Signed fixed-point minutes from a millisecond rational (num/den), rounded
// half away from zero to `decimals` (1 or 2) places, e.g. -1296000/1 -> "-21.6".
std::string format_minutes(TimeMs num_ms, int den, int decimals);

std::string channel_display(const std::string& channel);

SampleAnalytics analyze_sample(
    const std::vector<Event>& events,
    const std::map<std::string, std::vector<ChannelEarliest>>& earliest_by_event,
    std::vector<std::string>* warnings = nullptr);

// The underlying pieces, exposed for direct testing.
std::vector<HitRateRow> hit_rates(
    const std::vector<Event>& events,
    const std::map<std::string, std::vector<ChannelEarliest>>& earliest_by_event,
    std::vector<std::string>* warnings = nullptr);
std::vector<WinnerRow> winner_shares(
    const std::map<std::string, std::vector<ChannelEarliest>>& earliest_by_event);
std::vector<PairedDelta> paired_deltas(
    const std::map<std::string, std::vector<ChannelEarliest>>& earliest_by_event);
LatencySummary summarize_latency(const std::vector<PairedDelta>& deltas);

// ---------------------------------------------------------------------------
// Progressive-broadening probe

struct ProbeLevelResult {
  int level = 0;           // 1-based ladder position
  std::string query;       // rendered boolean
  bool errored = false;    // provider failure at this level
  int hits = 0;
  std::optional<TimeMs> earliest_ts;
  std::optional<std::string> earliest_title;
};

struct ProbeReport {
  std::string event_id;
  std::string event_title;
  std::vector<ProbeLevelResult> levels;
};

void to_json(nlohmann::json& j, const ProbeLevelResult& r);
void from_json(const nlohmann::json& j, ProbeLevelResult& r);
void to_json(nlohmann::json& j, const ProbeReport& r);
void from_json(const nlohmann::json& j, ProbeReport& r);

// Runs every ladder level against the provider (create, backfill, pull,
// delete) and summarises each level's yield.  A provider failure marks the
// level errored and the probe continues with the next level.
ProbeReport probe_event(const Event& event,
                        const std::vector<BooleanQuery>& ladder,
                        ProviderClient& provider, RateLimiter& limiter,
                        Clock& clock, const TimeWindow& window,
                        int page_size = 100, double backfill_floor = 50.0,
                        TimeMs backfill_cap_ms = 90 * kMsPerSecond,
                        TimeMs backfill_poll_ms = 5 * kMsPerSecond);

// ---------------------------------------------------------------------------
// Rendering: aligned text, CSV, and markdown, byte-stable across runs.

struct RenderedTable {
  std::string txt;
  std::string csv;
  std::string md;
};

RenderedTable render_hits(const SampleAnalytics& a, const SampleAnalytics& b);
RenderedTable render_winners(const SampleAnalytics& a,
                             const SampleAnalytics& b);
// `decimals` = 1 for the pageview sample, 2 for the market sample.
RenderedTable render_paired(const SampleAnalytics& s,
                            const std::vector<Event>& events, int decimals);
RenderedTable render_probe(const std::vector<ProbeReport>& reports);

}  // namespace newsrace
