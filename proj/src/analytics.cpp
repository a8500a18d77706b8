#include "newsrace/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

#include "newsrace/channel.hpp"
#include "newsrace/xrecover.hpp"

namespace newsrace {
namespace {

const std::vector<std::string>& bucket_order() {
  static const std::vector<std::string> kOrder = {
      category::kSports, category::kPolitics, category::kMacroCrypto,
      category::kOther};
  return kOrder;
}

std::string bucket_short(const std::string& bucket) {
  if (bucket == category::kSports) return "spt";
  if (bucket == category::kPolitics) return "pol";
  if (bucket == category::kMacroCrypto) return "mac";
  return "oth";
}

// Fractional win count ("21.5") with trailing zeros trimmed; exact because
// win_units is an integer count of 1/2520 wins.
std::string format_units(std::int64_t units) {
  std::int64_t whole = units / kWinUnit;
  std::int64_t rem = units % kWinUnit;
  std::string out = std::to_string(whole);
  if (rem == 0) return out;
  std::string frac;
  for (int i = 0; i < 6 && rem != 0; ++i) {
    rem *= 10;
    frac += static_cast<char>('0' + rem / kWinUnit);
    rem %= kWinUnit;
  }
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  return frac.empty() ? out : out + "." + frac;
}

std::string csv_field(const std::string& raw) {
  if (raw.find_first_of(",\"\n") == std::string::npos) return raw;
  std::string out = "\"";
  for (char c : raw) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string line;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += csv_field(fields[i]);
  }
  line += '\n';
  return line;
}

std::string md_field(const std::string& raw) {
  std::string out;
  for (char c : raw) {
    if (c == '|') out += "\\|";
    else out += c;
  }
  return out;
}

// Plain-text column layout: first column left-aligned, the rest
// right-aligned, two spaces between columns, dashed rule under the header.
std::string render_text_table(const std::vector<std::string>& headers,
                              const std::vector<std::vector<std::string>>& rows) {
  std::vector<size_t> width(headers.size());
  for (size_t i = 0; i < headers.size(); ++i) width[i] = headers[i].size();
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size() && i < width.size(); ++i) {
      width[i] = std::max(width[i], row[i].size());
    }
  }
  auto emit = [&](const std::vector<std::string>& cells) {
    std::string line;
    for (size_t i = 0; i < width.size(); ++i) {
      const std::string& cell = i < cells.size() ? cells[i] : std::string();
      std::string padded;
      if (i == 0) {
        padded = cell + std::string(width[i] - cell.size(), ' ');
      } else {
        padded = std::string(width[i] - cell.size(), ' ') + cell;
      }
      if (i) line += "  ";
      line += padded;
    }
    // Trim right-edge padding so lines are stable regardless of which
    // column happens to be widest.
    while (!line.empty() && line.back() == ' ') line.pop_back();
    return line + "\n";
  };
  size_t total = 0;
  for (size_t i = 0; i < width.size(); ++i) total += width[i] + (i ? 2 : 0);
  std::string out = emit(headers);
  out += std::string(total, '-') + "\n";
  for (const auto& row : rows) out += emit(row);
  return out;
}

std::string render_md_table(const std::vector<std::string>& headers,
                            const std::vector<std::vector<std::string>>& rows) {
  std::string out = "|";
  for (const auto& h : headers) out += " " + md_field(h) + " |";
  out += "\n|";
  for (size_t i = 0; i < headers.size(); ++i) out += " --- |";
  out += "\n";
  for (const auto& row : rows) {
    out += "|";
    for (size_t i = 0; i < headers.size(); ++i) {
      out += " " + (i < row.size() ? md_field(row[i]) : std::string()) + " |";
    }
    out += "\n";
  }
  return out;
}

std::string hits_cell(const HitRateRow* row) {
  if (row == nullptr || row->total == 0) return "-";
  return std::to_string(row->hits) + "/" + std::to_string(row->total) + " (" +
         std::to_string(percent_of(row->hits, row->total)) + "%)";
}

const HitRateRow* find_bucket(const std::vector<HitRateRow>& rows,
                              const std::string& bucket) {
  for (const auto& r : rows) {
    if (r.category == bucket) return &r;
  }
  return nullptr;
}

std::int64_t units_for(const std::vector<WinnerRow>& rows,
                       const std::string& channel) {
  for (const auto& r : rows) {
    if (r.channel == channel) return r.win_units;
  }
  return 0;
}

std::string signed_pp(int delta) {
  if (delta > 0) return "+" + std::to_string(delta);
  return std::to_string(delta);  // negative includes '-', zero is "0"
}

}  // namespace

int percent_of(std::int64_t num, std::int64_t den) {
  if (den <= 0) return 0;
  return static_cast<int>((200 * num + den) / (2 * den));
}

std::string format_minutes(TimeMs num_ms, int den, int decimals) {
  const std::int64_t divisor =
      (decimals == 1 ? 6000LL : 600LL) * static_cast<std::int64_t>(den);
  const std::int64_t magnitude = std::llabs(num_ms);
  const std::int64_t fixed = (magnitude + divisor / 2) / divisor;
  const std::int64_t scale = decimals == 1 ? 10 : 100;
  std::string out;
  if (num_ms < 0 && fixed != 0) {
    out += '-';
  } else if (num_ms > 0 && fixed != 0) {
    out += '+';
  }
  out += std::to_string(fixed / scale);
  out += '.';
  std::string frac = std::to_string(fixed % scale);
  out += std::string(static_cast<size_t>(decimals) - frac.size(), '0') + frac;
  return out;
}

std::string channel_display(const std::string& channel) {
  std::string out = channel;
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

std::vector<HitRateRow> hit_rates(
    const std::vector<Event>& events,
    const std::map<std::string, std::vector<ChannelEarliest>>& earliest_by_event,
    std::vector<std::string>* warnings) {
  if (events.empty()) return {};
  std::map<std::string, HitRateRow> rows;
  for (const std::string& bucket : bucket_order()) {
    rows[bucket] = HitRateRow{bucket, 0, 0};
  }
  HitRateRow all{"all", 0, 0};
  for (const Event& e : events) {
    std::string bucket = e.category;
    if (rows.find(bucket) == rows.end()) {
      if (warnings != nullptr) {
        warnings->push_back("unknown category '" + e.category + "' on event " +
                            e.event_id + "; bucketed as other");
      }
      bucket = category::kOther;
    }
    const auto it = earliest_by_event.find(e.event_id);
    const bool hit = it != earliest_by_event.end() && !it->second.empty();
    rows[bucket].total += 1;
    all.total += 1;
    if (hit) {
      rows[bucket].hits += 1;
      all.hits += 1;
    }
  }
  std::vector<HitRateRow> out;
  for (const std::string& bucket : bucket_order()) {
    if (rows[bucket].total > 0) out.push_back(rows[bucket]);
  }
  out.push_back(all);
  return out;
}

std::vector<WinnerRow> winner_shares(
    const std::map<std::string, std::vector<ChannelEarliest>>&
        earliest_by_event) {
  std::map<std::string, std::int64_t> units;
  for (const auto& [event_id, list] : earliest_by_event) {
    if (list.empty()) continue;
    TimeMs best = 0;
    bool have = false;
    for (const ChannelEarliest& ce : list) {
      const auto ts = ce.mention.order_ts();
      if (!ts.has_value()) continue;
      if (!have || *ts < best) {
        best = *ts;
        have = true;
      }
    }
    if (!have) continue;
    std::vector<std::string> tied;
    for (const ChannelEarliest& ce : list) {
      const auto ts = ce.mention.order_ts();
      if (ts.has_value() && *ts == best) tied.push_back(ce.channel);
    }
    const std::int64_t each = kWinUnit / static_cast<std::int64_t>(tied.size());
    for (const std::string& channel : tied) units[channel] += each;
  }
  std::vector<WinnerRow> rows;
  for (const auto& [channel, u] : units) {
    if (u > 0) rows.push_back(WinnerRow{channel, u});
  }
  std::sort(rows.begin(), rows.end(), [](const WinnerRow& a, const WinnerRow& b) {
    if (a.win_units != b.win_units) return a.win_units > b.win_units;
    return a.channel < b.channel;
  });
  return rows;
}

std::vector<PairedDelta> paired_deltas(
    const std::map<std::string, std::vector<ChannelEarliest>>&
        earliest_by_event) {
  std::vector<PairedDelta> out;
  for (const auto& [event_id, list] : earliest_by_event) {
    std::optional<TimeMs> t_x;
    std::optional<TimeMs> t_news;
    for (const ChannelEarliest& ce : list) {
      if (ce.channel == channels::kTwitter) t_x = ce.mention.order_ts();
      if (ce.channel == channels::kNews) t_news = ce.mention.order_ts();
    }
    if (t_x.has_value() && t_news.has_value()) {
      PairedDelta d;
      d.event_id = event_id;
      d.t_news = *t_news;
      d.t_x = *t_x;
      out.push_back(d);
    }
  }
  return out;
}

LatencySummary summarize_latency(const std::vector<PairedDelta>& deltas) {
  LatencySummary s;
  s.n = static_cast<int>(deltas.size());
  if (s.n == 0) return s;
  std::vector<TimeMs> ms;
  ms.reserve(deltas.size());
  for (const PairedDelta& d : deltas) {
    ms.push_back(d.delta_ms());
    if (d.delta_ms() > 0) s.x_first_count += 1;
  }
  std::sort(ms.begin(), ms.end());
  const int n = s.n;
  if (n % 2 == 1) {
    s.median_num_ms = ms[n / 2];
    s.median_den = 1;
  } else {
    s.median_num_ms = ms[n / 2 - 1] + ms[n / 2];
    s.median_den = 2;
  }
  s.median_min = (static_cast<double>(s.median_num_ms) / s.median_den) / 60000.0;
  auto rank = [n](int quarter) {
    std::int64_t r = (2LL * (n + 1) * quarter + 4) / 8;
    if (r < 1) r = 1;
    if (r > n) r = n;
    return static_cast<size_t>(r - 1);
  };
  s.q1_ms = ms[rank(1)];
  s.q3_ms = ms[rank(3)];
  s.q1_min = static_cast<double>(s.q1_ms) / 60000.0;
  s.q3_min = static_cast<double>(s.q3_ms) / 60000.0;
  s.x_first_share = static_cast<double>(s.x_first_count) / n;
  return s;
}

SampleAnalytics analyze_sample(
    const std::vector<Event>& events,
    const std::map<std::string, std::vector<ChannelEarliest>>& earliest_by_event,
    std::vector<std::string>* warnings) {
  // The earliest map usually spans both samples; every statistic here must
  // be computed over this sample's events only.
  std::map<std::string, std::vector<ChannelEarliest>> own;
  for (const Event& e : events) {
    const auto it = earliest_by_event.find(e.event_id);
    if (it != earliest_by_event.end()) own[e.event_id] = it->second;
  }

  SampleAnalytics a;
  a.hits = hit_rates(events, own, warnings);
  a.winners = winner_shares(own);
  a.paired = paired_deltas(own);
  a.latency = summarize_latency(a.paired);
  for (const auto& [event_id, list] : own) {
    if (!list.empty()) a.verified_events += 1;
  }
  return a;
}

void to_json(nlohmann::json& j, const ProbeLevelResult& r) {
  j = nlohmann::json{{"level", r.level},
                     {"query", r.query},
                     {"errored", r.errored},
                     {"hits", r.hits}};
  if (r.earliest_ts.has_value()) j["earliest_ts"] = *r.earliest_ts;
  if (r.earliest_title.has_value()) j["earliest_title"] = *r.earliest_title;
}

void from_json(const nlohmann::json& j, ProbeLevelResult& r) {
  j.at("level").get_to(r.level);
  j.at("query").get_to(r.query);
  j.at("errored").get_to(r.errored);
  j.at("hits").get_to(r.hits);
  r.earliest_ts.reset();
  r.earliest_title.reset();
  if (j.contains("earliest_ts")) r.earliest_ts = j["earliest_ts"].get<TimeMs>();
  if (j.contains("earliest_title")) {
    r.earliest_title = j["earliest_title"].get<std::string>();
  }
}

void to_json(nlohmann::json& j, const ProbeReport& r) {
  j = nlohmann::json{{"event_id", r.event_id},
                     {"event_title", r.event_title},
                     {"levels", r.levels}};
}

void from_json(const nlohmann::json& j, ProbeReport& r) {
  j.at("event_id").get_to(r.event_id);
  j.at("event_title").get_to(r.event_title);
  j.at("levels").get_to(r.levels);
}

ProbeReport probe_event(const Event& event,
                        const std::vector<BooleanQuery>& ladder,
                        ProviderClient& provider, RateLimiter& limiter,
                        Clock& clock, const TimeWindow& window,
                        int page_size, double backfill_floor,
                        TimeMs backfill_cap_ms, TimeMs backfill_poll_ms) {
  ProbeReport report;
  report.event_id = event.event_id;
  report.event_title = event.title;
  int level_no = 0;
  for (const BooleanQuery& q : ladder) {
    ProbeLevelResult lvl;
    lvl.level = ++level_no;
    lvl.query = q.render();
    try {
      QuerySession session(provider, limiter, clock);
      session.create(q);
      session.await_backfill(backfill_floor, backfill_cap_ms, backfill_poll_ms);
      std::vector<Mention> mentions = session.pull_all(window, page_size);
      session.pull_twitter(window, page_size);
      session.remove();
      lvl.hits = static_cast<int>(mentions.size());
      for (Mention& m : mentions) {
        if (m.channel == channels::kTwitter && !m.order_ts().has_value()) {
          if (auto raw = parse_guid(m.guid)) {
            m.recovered_ts = decode_snowflake(*raw);
          }
        }
        const auto ts = m.order_ts();
        if (!ts.has_value()) continue;
        if (!lvl.earliest_ts.has_value() || *ts < *lvl.earliest_ts) {
          lvl.earliest_ts = *ts;
          if (m.title.has_value()) {
            lvl.earliest_title = *m.title;
          } else if (m.snippet.has_value()) {
            lvl.earliest_title = *m.snippet;
          } else {
            lvl.earliest_title = m.guid;
          }
        }
      }
    } catch (const std::exception&) {
      lvl.errored = true;
    }
    report.levels.push_back(std::move(lvl));
  }
  return report;
}

RenderedTable render_hits(const SampleAnalytics& a, const SampleAnalytics& b) {
  std::vector<std::string> headers = {"Category", "wcep", "polymarket"};
  std::vector<std::vector<std::string>> rows;
  std::string csv =
      "category,wcep_hits,wcep_total,wcep_pct,polymarket_hits,polymarket_total,"
      "polymarket_pct\n";
  auto csv_side = [](const HitRateRow* r) -> std::vector<std::string> {
    if (r == nullptr || r->total == 0) return {"", "", ""};
    return {std::to_string(r->hits), std::to_string(r->total),
            std::to_string(percent_of(r->hits, r->total))};
  };
  auto add = [&](const std::string& bucket, const std::string& label) {
    const HitRateRow* ra = find_bucket(a.hits, bucket);
    const HitRateRow* rb = find_bucket(b.hits, bucket);
    if ((ra == nullptr || ra->total == 0) && (rb == nullptr || rb->total == 0)) {
      return;
    }
    rows.push_back({label, hits_cell(ra), hits_cell(rb)});
    std::vector<std::string> fields = {bucket};
    for (const std::string& f : csv_side(ra)) fields.push_back(f);
    for (const std::string& f : csv_side(rb)) fields.push_back(f);
    csv += csv_row(fields);
  };
  for (const std::string& bucket : bucket_order()) {
    add(bucket, category_display(bucket));
  }
  add("all", "All");
  RenderedTable out;
  out.txt = render_text_table(headers, rows);
  out.csv = csv;
  out.md = render_md_table(headers, rows);
  return out;
}

RenderedTable render_winners(const SampleAnalytics& a,
                             const SampleAnalytics& b) {
  std::set<std::string> channel_set;
  for (const WinnerRow& r : a.winners) channel_set.insert(r.channel);
  for (const WinnerRow& r : b.winners) channel_set.insert(r.channel);
  std::vector<std::string> channels(channel_set.begin(), channel_set.end());
  std::sort(channels.begin(), channels.end(),
            [&](const std::string& x, const std::string& y) {
              const std::int64_t bx = units_for(b.winners, x);
              const std::int64_t by = units_for(b.winners, y);
              if (bx != by) return bx > by;
              const std::int64_t ax = units_for(a.winners, x);
              const std::int64_t ay = units_for(a.winners, y);
              if (ax != ay) return ax > ay;
              return x < y;
            });

  const std::int64_t a_total = static_cast<std::int64_t>(a.verified_events);
  const std::int64_t b_total = static_cast<std::int64_t>(b.verified_events);
  std::vector<std::string> headers = {"Channel", "wcep", "polymarket", "shift"};
  std::vector<std::vector<std::string>> rows;
  std::string csv =
      "channel,wcep_wins,wcep_share_pct,polymarket_wins,polymarket_share_pct,"
      "shift_pp\n";
  for (const std::string& channel : channels) {
    const std::int64_t au = units_for(a.winners, channel);
    const std::int64_t bu = units_for(b.winners, channel);
    const int apct = percent_of(au, kWinUnit * std::max<std::int64_t>(a_total, 1));
    const int bpct = percent_of(bu, kWinUnit * std::max<std::int64_t>(b_total, 1));
    rows.push_back({channel_display(channel), std::to_string(apct) + "%",
                    std::to_string(bpct) + "%", signed_pp(bpct - apct)});
    csv += csv_row({channel, format_units(au), std::to_string(apct),
                    format_units(bu), std::to_string(bpct),
                    std::to_string(bpct - apct)});
  }
  const std::string footing = "events with evidence: wcep " +
                              std::to_string(a.verified_events) +
                              ", polymarket " +
                              std::to_string(b.verified_events) + "\n";
  RenderedTable out;
  out.txt = render_text_table(headers, rows) + footing;
  out.csv = csv;
  out.md = render_md_table(headers, rows) + "\n" + footing;
  return out;
}

RenderedTable render_paired(const SampleAnalytics& s,
                            const std::vector<Event>& events, int decimals) {
  std::map<std::string, const Event*> by_id;
  for (const Event& e : events) by_id[e.event_id] = &e;

  std::vector<PairedDelta> rows_sorted = s.paired;
  std::sort(rows_sorted.begin(), rows_sorted.end(),
            [&](const PairedDelta& x, const PairedDelta& y) {
              if (x.delta_ms() != y.delta_ms()) {
                return x.delta_ms() < y.delta_ms();
              }
              const Event* ex = by_id.count(x.event_id) ? by_id[x.event_id] : nullptr;
              const Event* ey = by_id.count(y.event_id) ? by_id[y.event_id] : nullptr;
              const std::string tx = ex != nullptr ? ex->title : x.event_id;
              const std::string ty = ey != nullptr ? ey->title : y.event_id;
              return tx < ty;
            });

  const bool pv_column = decimals == 1;
  std::vector<std::string> headers = {
      "Event", pv_column ? "PV" : "cat", "Delta (min)"};
  std::vector<std::vector<std::string>> rows;
  std::string csv = pv_column ? "event,pv,delta_min\n"
                              : "event,category,delta_min\n";
  for (const PairedDelta& d : rows_sorted) {
    const Event* e = by_id.count(d.event_id) ? by_id[d.event_id] : nullptr;
    const std::string title = e != nullptr ? e->title : d.event_id;
    std::string middle;
    if (pv_column) {
      middle = std::to_string(
          static_cast<long long>(std::llround(e != nullptr ? e->attention_prior : 0.0)));
    } else {
      middle = e != nullptr ? bucket_short(e->category) : "oth";
    }
    const std::string delta = format_minutes(d.delta_ms(), 1, decimals);
    rows.push_back({title, middle, delta});
    csv += csv_row({title, middle, delta});
  }
  if (s.latency.n > 0) {
    rows.push_back({"median", "-",
                    format_minutes(s.latency.median_num_ms,
                                   s.latency.median_den, decimals)});
    rows.push_back({"IQR", "-",
                    format_minutes(s.latency.q1_ms, 1, decimals) + " to " +
                        format_minutes(s.latency.q3_ms, 1, decimals)});
    rows.push_back({"x first", "-",
                    std::to_string(s.latency.x_first_count) + "/" +
                        std::to_string(s.latency.n) + " (" +
                        std::to_string(percent_of(s.latency.x_first_count,
                                                  s.latency.n)) +
                        "%)"});
  }
  RenderedTable out;
  if (rows.empty()) {
    out.txt = render_text_table(headers, {}) + "(no paired events)\n";
    out.md = render_md_table(headers, {});
  } else {
    out.txt = render_text_table(headers, rows);
    out.md = render_md_table(headers, rows);
  }
  out.csv = csv;
  return out;
}

RenderedTable render_probe(const std::vector<ProbeReport>& reports) {
  RenderedTable out;
  out.csv = "event_id,level,errored,hits,earliest_ts,earliest_title,query\n";
  std::vector<std::string> headers = {"Level", "Hits", "Earliest",
                                      "Earliest title", "Query"};
  for (size_t i = 0; i < reports.size(); ++i) {
    const ProbeReport& report = reports[i];
    std::vector<std::vector<std::string>> rows;
    for (const ProbeLevelResult& lvl : report.levels) {
      const std::string hits = lvl.errored ? "error" : std::to_string(lvl.hits);
      const std::string ts = lvl.earliest_ts.has_value()
                                 ? format_instant(*lvl.earliest_ts)
                                 : "-";
      const std::string title = lvl.earliest_title.value_or("-");
      rows.push_back({std::to_string(lvl.level), hits, ts, title, lvl.query});
      out.csv += csv_row({report.event_id, std::to_string(lvl.level),
                          lvl.errored ? "true" : "false",
                          std::to_string(lvl.hits),
                          lvl.earliest_ts.has_value()
                              ? std::to_string(*lvl.earliest_ts)
                              : "",
                          lvl.earliest_title.value_or(""), lvl.query});
    }
    const std::string heading = "event: " + report.event_title + " (" +
                                report.event_id + ")\n";
    if (i) {
      out.txt += "\n";
      out.md += "\n";
    }
    out.txt += heading + render_text_table(headers, rows);
    out.md += "**" + heading + "**\n" + render_md_table(headers, rows);
  }
  if (reports.empty()) {
    out.txt = "(no probes)\n";
    out.md = "(no probes)\n";
  }
  return out;
}

}  // namespace newsrace
