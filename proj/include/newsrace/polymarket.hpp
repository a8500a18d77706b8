#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "newsrace/chrono.hpp"
#include "newsrace/types.hpp"

namespace newsrace {

// One prediction market's metadata row.  Markets that belong to the same
// umbrella prediction event (e.g. the per-team markets of one match) share
// an event_slug while keeping distinct titles.  USD amounts are held as
// integer cents for exact arithmetic.
struct MarketRecord {
  std::string market_id;
  std::string event_slug;
  std::string event_title;
  std::string question;
  TimeMs resolution_start = 0;
  TimeMs resolution_end = 0;
  long long lifetime_volume_cents = 0;
  bool is_binary = false;

  bool operator==(const MarketRecord&) const = default;
};

struct Trade {
  std::string market_id;
  TimeMs ts = 0;  // second resolution upstream, stored as ms
  long long usd_cents = 0;
};

struct SpikeResult {
  std::string market_id;
  TimeMs spike_ts = 0;
  long long window_usd_cents = 0;
};

// Exact dollars-and-cents parse of a decimal string such as "100000",
// "99.5", or "12345.67"; more than two fraction digits is an error, as is
// any negative amount.
long long parse_usd_cents(const std::string& amount);

// Record stores: line-delimited JSON.  A .parquet path is rejected with an
// explicit message since this build reads only the plain-text equivalent of
// the mirror's layout.
std::vector<MarketRecord> load_markets(const std::filesystem::path& path);
std::vector<Trade> load_trades(const std::filesystem::path& path);

// Window-overlap + volume-floor + binary filter, one market per event
// title (highest volume wins, ties to the lexicographically smaller
// market_id), sorted by volume descending (same tie rule), truncated to
// top_k.
std::vector<MarketRecord> filter_markets(const std::vector<MarketRecord>& markets,
                                         const TimeWindow& scan,
                                         long long volume_floor_cents,
                                         int top_k);

// Largest rolling-window USD sum over anchors at in-scan trade timestamps;
// the window is (t - window_len, t].  Ties resolve to the earliest anchor.
// Returns nothing when the market has no in-scan trade.  Trades must be
// sorted ascending by ts.
std::optional<SpikeResult> rolling_spike(const std::vector<Trade>& trades,
                                         TimeMs window_len_ms,
                                         const TimeWindow& scan);

// Keyword-table mapping of a market's title/question onto the four-bucket
// category scheme.
std::string categorize_market(const std::string& event_title,
                              const std::string& question);

struct PinnedSeedResult {
  std::vector<Event> events;
  int dropped_no_trades = 0;
  int distinct_event_slugs = 0;
};

// One event per market with a spike: t_e = spike timestamp,
// attention_prior = lifetime USD volume.  Markets without in-scan trades
// are dropped and counted.
PinnedSeedResult pin_events(
    const std::vector<MarketRecord>& markets,
    const std::map<std::string, std::vector<Trade>>& trades_by_market,
    TimeMs window_len_ms, const TimeWindow& scan);

}  // namespace newsrace
