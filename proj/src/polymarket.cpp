#include "newsrace/polymarket.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "newsrace/text.hpp"

namespace newsrace {

long long parse_usd_cents(const std::string& amount) {
  if (amount.empty()) throw std::invalid_argument("empty USD amount");
  size_t i = 0;
  if (amount[0] == '-') {
    throw std::invalid_argument("negative USD amount: " + amount);
  }
  long long dollars = 0;
  bool any_digit = false;
  for (; i < amount.size() && amount[i] != '.'; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(amount[i]))) {
      throw std::invalid_argument("malformed USD amount: " + amount);
    }
    dollars = dollars * 10 + (amount[i] - '0');
    any_digit = true;
  }
  long long cents = 0;
  if (i < amount.size()) {  // fraction part
    ++i;
    int digits = 0;
    for (; i < amount.size(); ++i, ++digits) {
      if (!std::isdigit(static_cast<unsigned char>(amount[i])) || digits >= 2) {
        throw std::invalid_argument("malformed USD amount: " + amount);
      }
      cents = cents * 10 + (amount[i] - '0');
      any_digit = true;
    }
    if (digits == 1) cents *= 10;
  }
  if (!any_digit) throw std::invalid_argument("malformed USD amount: " + amount);
  return dollars * 100 + cents;
}

namespace {

void reject_parquet(const std::filesystem::path& path) {
  if (path.extension() == ".parquet") {
    throw std::runtime_error(
        "columnar input is not supported by this build: " + path.string() +
        " — convert to the line-delimited .jsonl equivalent "
        "(same fields, one record per line)");
  }
}

long long json_usd_cents(const nlohmann::json& v) {
  if (v.is_string()) return parse_usd_cents(v.get<std::string>());
  if (v.is_number_integer()) {
    const long long dollars = v.get<long long>();
    if (dollars < 0) throw std::invalid_argument("negative USD amount");
    return dollars * 100;
  }
  if (v.is_number_float()) {
    // Fixture amounts carry at most two fraction digits, so scaling by 100
    // and rounding recovers the exact cent count.
    const double cents = v.get<double>() * 100.0;
    if (cents < 0) throw std::invalid_argument("negative USD amount");
    return std::llround(cents);
  }
  throw std::invalid_argument("unsupported USD amount type");
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::vector<MarketRecord> load_markets(const std::filesystem::path& path) {
  reject_parquet(path);
  std::vector<MarketRecord> markets;
  for (const auto& line : read_lines(path)) {
    const auto j = nlohmann::json::parse(line);
    MarketRecord m;
    m.market_id = j.at("market_id").get<std::string>();
    m.event_slug = j.at("event_slug").get<std::string>();
    m.event_title = j.at("event_title").get<std::string>();
    m.question = j.at("question").get<std::string>();
    m.resolution_start = j.at("resolution_start").get<TimeMs>();
    m.resolution_end = j.at("resolution_end").get<TimeMs>();
    m.lifetime_volume_cents = json_usd_cents(j.at("lifetime_volume_usd"));
    m.is_binary = j.at("is_binary").get<bool>();
    if (m.resolution_start > m.resolution_end) {
      throw std::runtime_error("market " + m.market_id +
                               " has an inverted resolution window");
    }
    markets.push_back(std::move(m));
  }
  return markets;
}

std::vector<Trade> load_trades(const std::filesystem::path& path) {
  reject_parquet(path);
  std::vector<Trade> trades;
  for (const auto& line : read_lines(path)) {
    const auto j = nlohmann::json::parse(line);
    Trade t;
    t.market_id = j.at("market_id").get<std::string>();
    t.ts = j.at("ts").get<TimeMs>();
    t.usd_cents = json_usd_cents(j.at("usd_size"));
    trades.push_back(std::move(t));
  }
  return trades;
}

std::vector<MarketRecord> filter_markets(const std::vector<MarketRecord>& markets,
                                         const TimeWindow& scan,
                                         long long volume_floor_cents,
                                         int top_k) {
  // Keep overlapping, liquid, binary markets; then one market per event
  // title.
  std::map<std::string, const MarketRecord*> best_by_title;
  for (const auto& m : markets) {
    const TimeWindow resolution{m.resolution_start, m.resolution_end};
    if (!resolution.overlaps(scan)) continue;
    if (m.lifetime_volume_cents < volume_floor_cents) continue;
    if (!m.is_binary) continue;

    auto [it, inserted] = best_by_title.emplace(m.event_title, &m);
    if (!inserted) {
      const MarketRecord* cur = it->second;
      const bool wins =
          m.lifetime_volume_cents > cur->lifetime_volume_cents ||
          (m.lifetime_volume_cents == cur->lifetime_volume_cents &&
           m.market_id < cur->market_id);
      if (wins) it->second = &m;
    }
  }

  std::vector<MarketRecord> kept;
  kept.reserve(best_by_title.size());
  for (const auto& [_, m] : best_by_title) kept.push_back(*m);
  std::sort(kept.begin(), kept.end(),
            [](const MarketRecord& a, const MarketRecord& b) {
              if (a.lifetime_volume_cents != b.lifetime_volume_cents) {
                return a.lifetime_volume_cents > b.lifetime_volume_cents;
              }
              return a.market_id < b.market_id;
            });
  if (kept.size() > static_cast<size_t>(top_k)) {
    kept.resize(static_cast<size_t>(top_k));
  }
  return kept;
}

std::optional<SpikeResult> rolling_spike(const std::vector<Trade>& trades,
                                         TimeMs window_len_ms,
                                         const TimeWindow& scan) {
  if (!std::is_sorted(trades.begin(), trades.end(),
                      [](const Trade& a, const Trade& b) { return a.ts < b.ts; })) {
    throw std::invalid_argument("trades must be sorted ascending by ts");
  }

  // prefix[i] = cents of trades[0..i); window sums become two lookups.
  std::vector<long long> prefix(trades.size() + 1, 0);
  for (size_t i = 0; i < trades.size(); ++i) {
    prefix[i + 1] = prefix[i] + trades[i].usd_cents;
  }

  std::optional<SpikeResult> best;
  for (size_t i = 0; i < trades.size(); ++i) {
    const TimeMs anchor = trades[i].ts;
    if (!scan.contains(anchor)) continue;

    // First trade with ts > anchor - window (the window is half-open on the
    // left) and last with ts <= anchor.
    const auto lo = std::upper_bound(
        trades.begin(), trades.end(), anchor - window_len_ms,
        [](TimeMs t, const Trade& tr) { return t < tr.ts; });
    const auto hi = std::upper_bound(
        trades.begin(), trades.end(), anchor,
        [](TimeMs t, const Trade& tr) { return t < tr.ts; });
    const long long sum =
        prefix[hi - trades.begin()] - prefix[lo - trades.begin()];

    if (!best || sum > best->window_usd_cents) {
      best = SpikeResult{trades[i].market_id, anchor, sum};
    }
    // Equal sums keep the earlier anchor, which this forward scan already
    // holds.
  }
  return best;
}

std::string categorize_market(const std::string& event_title,
                              const std::string& question) {
  const std::string t = text::to_lower(event_title + " " + question);

  static const std::vector<std::string> kSportsKeys = {
      " vs", " v ", "game", "match", "cup", "league", "nba", "nfl", "ufc",
      "masters", "premier", "liga", "madrid", "barcelona", "champions",
      "playoff", "final", "wins 20", "tournament", "grand prix", "open",
      "kickoff", "semifinal"};
  static const std::vector<std::string> kPoliticsKeys = {
      "election", "president", "prime minister", "minister", "war",
      "conflict", "ceasefire", "senate", "parliament", "congress", "coup",
      "sanction", "treaty", "khamenei", "government", "out by", "resign",
      "impeach", "vote", "referendum", "border", "strike on", "invasion"};
  static const std::vector<std::string> kMacroKeys = {
      "bitcoin", "btc", "ethereum", "eth", "crypto", "fed ", "rate cut",
      "rate hike", "cpi", "inflation", "gdp", "recession", "stock",
      "market cap", "ipo", "apple", "openai", "spacex", "launch", "ai model",
      "chip", "earnings", "tariff"};

  for (const auto& k : kSportsKeys) {
    if (t.find(k) != std::string::npos) return category::kSports;
  }
  for (const auto& k : kPoliticsKeys) {
    if (t.find(k) != std::string::npos) return category::kPolitics;
  }
  for (const auto& k : kMacroKeys) {
    if (t.find(k) != std::string::npos) return category::kMacroCrypto;
  }
  return category::kOther;
}

PinnedSeedResult pin_events(
    const std::vector<MarketRecord>& markets,
    const std::map<std::string, std::vector<Trade>>& trades_by_market,
    TimeMs window_len_ms, const TimeWindow& scan) {
  PinnedSeedResult result;
  std::set<std::string> slugs;
  static const std::vector<Trade> kNoTrades;

  for (const auto& market : markets) {
    const auto it = trades_by_market.find(market.market_id);
    const auto& trades = it == trades_by_market.end() ? kNoTrades : it->second;
    const auto spike = rolling_spike(trades, window_len_ms, scan);
    if (!spike) {
      ++result.dropped_no_trades;
      continue;
    }

    Event event;
    event.surface = Surface::polymarket;
    event.title = market.question;
    event.description = market.event_title + ". " + market.question;
    event.category = categorize_market(market.event_title, market.question);
    event.t_e = spike->spike_ts;
    event.attention_prior =
        static_cast<double>(market.lifetime_volume_cents) / 100.0;
    event.source_key = market.market_id;
    event.event_id =
        make_event_id(event.surface, event.source_key, event.title, event.t_e);
    result.events.push_back(std::move(event));
    slugs.insert(market.event_slug);
  }
  result.distinct_event_slugs = static_cast<int>(slugs.size());
  return result;
}

}  // namespace newsrace
