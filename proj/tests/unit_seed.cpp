// Seeding tests: Current Events month-page parsing, the relevance lexicon,
// pageview ranking, and the prediction-market filter/spike pipeline.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "newsrace/chrono.hpp"
#include "newsrace/polymarket.hpp"
#include "newsrace/types.hpp"
#include "newsrace/wcep.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace newsrace;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("newsrace-test-" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << content;
}

bool any_contains(const std::vector<std::string>& lines,
                  const std::string& needle) {
  return std::any_of(lines.begin(), lines.end(), [&](const std::string& s) {
    return s.find(needle) != std::string::npos;
  });
}

}  // namespace

// ---------------------------------------------------------------------------
// month-page parsing
// ---------------------------------------------------------------------------

namespace {

const char* kMonthPage = R"HTML(
<div class="current-events" id="2026_April_1">
  <p><b>Armed conflicts and attacks</b></p>
  <ul>
    <li><a href="/wiki/File:Map.png" title="File:Map.png">map</a>
        <a href="/wiki/Border_clash" title="Border clash">Border clash</a>
        reported near the frontier
        (<a href="/wiki/Agency_Reuters" title="Agency Reuters">Agency Reuters</a>)</li>
    <li>Officials confirm the toll rose
      <ul><li><a href="/wiki/Mountain_rescue" title="Mountain rescue">Rescue</a> teams deployed</li></ul>
    </li>
    <li>No links in this navigation row</li>
  </ul>
  <p><b>Politics and elections</b></p>
  <ul>
    <li><a href="/wiki/Smith_%26_Sons" title="Smith &amp; Sons">Smith &amp; Sons</a> wins the contract vote</li>
  </ul>
</div>
<div id="2026_April_2">
  <p><b>Sports</b></p>
  <ul>
    <li><a href="/wiki/Harbor_Regatta">Harbor Regatta</a> opens its qualifying round</li>
  </ul>
</div>
<div id="2026_Selune_3"><ul><li><a href="/wiki/X" title="X">X</a> q</li></ul></div>
<div id="2026_April_33"><ul><li><a href="/wiki/Y" title="Y">Y</a> r</li></ul></div>
<div id="2026_April_4"><p>quiet day, nothing listed</p></div>
<div id="2026_April_9">
  <ul><li><a href="/wiki/Late_Event" title="Late Event">Late Event</a> happens out of window</li></ul>
</div>
)HTML";

}  // namespace

TEST_CASE("month page parsing: links, nesting, categories, bad days") {
  std::vector<std::string> errors;
  const DateWindow window{Date{2026, 4, 1}, Date{2026, 4, 5}};
  const auto bullets = parse_month_page(kMonthPage, window, errors);

  REQUIRE(bullets.size() == 4);

  // Non-article namespaces are skipped, so the first link is the clash.
  CHECK(bullets[0].event_date == Date{2026, 4, 1});
  CHECK(bullets[0].linked_article == "Border clash");
  CHECK(bullets[0].alternate_articles ==
        std::vector<std::string>{"Agency Reuters"});
  CHECK(bullets[0].wcep_category == "Armed conflicts and attacks");

  // A nested sub-item folds into its parent bullet.
  CHECK(bullets[1].linked_article == "Mountain rescue");
  CHECK(bullets[1].bullet_text.find("toll rose") != std::string::npos);
  CHECK(bullets[1].bullet_text.find("teams deployed") != std::string::npos);

  // HTML entities decode in both the text and the link title.
  CHECK(bullets[2].linked_article == "Smith & Sons");
  CHECK(bullets[2].bullet_text.find("Smith & Sons") != std::string::npos);
  CHECK(bullets[2].wcep_category == "Politics and elections");

  // Without a title attribute the href slug is decoded instead.
  CHECK(bullets[3].event_date == Date{2026, 4, 2});
  CHECK(bullets[3].linked_article == "Harbor Regatta");
  CHECK(bullets[3].wcep_category == "Sports");

  CHECK(any_contains(errors, "2026_Selune_3"));
  CHECK(any_contains(errors, "2026_April_33"));
  CHECK(any_contains(errors, "no list items found on 2026-04-04"));
  // The April 9 day is outside the window: neither bullets nor errors.
  CHECK_FALSE(any_contains(errors, "2026-04-09"));
}

TEST_CASE("window spans and missing month pages") {
  CHECK(months_in_window({Date{2026, 4, 1}, Date{2026, 4, 30}}) ==
        std::vector<std::string>{"2026-04"});
  CHECK(months_in_window({Date{2026, 3, 15}, Date{2026, 5, 2}}) ==
        std::vector<std::string>{"2026-03", "2026-04", "2026-05"});
  CHECK(months_in_window({Date{2025, 12, 20}, Date{2026, 1, 10}}) ==
        std::vector<std::string>{"2025-12", "2026-01"});

  std::vector<std::string> errors;
  std::map<std::string, std::string> pages;
  pages["2026-04"] = kMonthPage;
  const auto bullets = scrape_wcep(
      pages, DateWindow{Date{2026, 3, 30}, Date{2026, 4, 5}}, errors);
  CHECK(bullets.size() == 4);
  CHECK(any_contains(errors, "missing month page 2026-03"));
}

// ---------------------------------------------------------------------------
// relevance lexicon
// ---------------------------------------------------------------------------

TEST_CASE("lexicon loading and case rules") {
  const fs::path dir = temp_dir("lexicon");
  write_text(dir / "lex.txt",
             "# relevance terms\n"
             "\n"
             "White House\n"
             "=U.S.\n"
             "  =NASA  \n");
  const auto lexicon = load_lexicon(dir / "lex.txt");
  REQUIRE(lexicon.size() == 3);
  CHECK(lexicon[0].text == "White House");
  CHECK_FALSE(lexicon[0].exact_case);
  CHECK(lexicon[1].text == "U.S.");
  CHECK(lexicon[1].exact_case);
  CHECK(lexicon[2].text == "NASA");
  CHECK(lexicon[2].exact_case);

  CHECK(us_filter("the white house said on Monday", lexicon));
  CHECK(us_filter("U.S. officials responded", lexicon));
  // Exact-case terms must not fire on lowercase look-alikes.
  CHECK_FALSE(us_filter("tell us. more soon", lexicon));
  CHECK_FALSE(us_filter("the nasa. review", lexicon));
  CHECK_FALSE(us_filter("unrelated bulletin", lexicon));
  fs::remove_all(dir);
}

TEST_CASE("section headings map onto the four buckets") {
  CHECK(wcep_bucket("Armed conflicts and attacks") == category::kPolitics);
  CHECK(wcep_bucket("Politics and elections") == category::kPolitics);
  CHECK(wcep_bucket("International relations") == category::kPolitics);
  CHECK(wcep_bucket("Law and crime") == category::kPolitics);
  CHECK(wcep_bucket("Sports") == category::kSports);
  CHECK(wcep_bucket("Business and economy") == category::kMacroCrypto);
  CHECK(wcep_bucket("Science and technology") == category::kMacroCrypto);
  CHECK(wcep_bucket("Arts and culture") == category::kOther);
  CHECK(wcep_bucket("Disasters and accidents") == category::kOther);
}

// ---------------------------------------------------------------------------
// pageviews and ranking
// ---------------------------------------------------------------------------

TEST_CASE("pageview fetch sums two days and warns on gaps") {
  const fs::path dir = temp_dir("views");
  write_text(dir / "views.json",
             R"({"Border clash|2026-04-01": 1200,
                 "Border clash|2026-04-02": 800,
                 "Harbor Regatta|2026-04-02": 300})");
  FixturePageviews source(dir / "views.json");

  std::vector<std::string> warnings;
  const auto full =
      fetch_pageviews("Border clash", Date{2026, 4, 1}, source, warnings);
  CHECK(full.day0_views == 1200);
  CHECK(full.day1_views == 800);
  CHECK(full.total() == 2000);
  CHECK(warnings.empty());

  const auto partial =
      fetch_pageviews("Harbor Regatta", Date{2026, 4, 2}, source, warnings);
  CHECK(partial.day0_views == 300);
  CHECK(partial.day1_views == 0);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("counted as zero") != std::string::npos);
  fs::remove_all(dir);
}

namespace {

WcepBullet bullet(const std::string& article, Date date,
                  const std::string& text,
                  const std::string& heading = "Sports") {
  WcepBullet b;
  b.event_date = date;
  b.bullet_text = text;
  b.linked_article = article;
  b.wcep_category = heading;
  return b;
}

PageviewRecord views(const std::string& article, long long day0,
                     long long day1) {
  PageviewRecord r;
  r.article = article;
  r.day0_views = day0;
  r.day1_views = day1;
  return r;
}

}  // namespace

TEST_CASE("ranking orders by views with a per-article cap") {
  std::vector<WcepBullet> bullets = {
      bullet("Alpha", Date{2026, 4, 3}, "alpha third"),
      bullet("Alpha", Date{2026, 4, 1}, "alpha first"),
      bullet("Alpha", Date{2026, 4, 2}, "alpha second"),
      bullet("Beta", Date{2026, 4, 2}, "beta zig"),
      bullet("Beta", Date{2026, 4, 2}, "beta alef"),
      bullet("Gamma", Date{2026, 4, 4}, "gamma only"),
  };
  std::map<std::string, PageviewRecord> by_key;
  by_key[bullet_view_key(bullets[0])] = views("Alpha", 500, 0);
  by_key[bullet_view_key(bullets[1])] = views("Alpha", 900, 100);
  by_key[bullet_view_key(bullets[2])] = views("Alpha", 600, 100);
  // Both Beta bullets share the same key (same article and date).
  by_key[bullet_view_key(bullets[3])] = views("Beta", 400, 0);
  by_key[bullet_view_key(bullets[5])] = views("Gamma", 100, 0);

  const auto r = rank_and_cap(bullets, by_key, /*per_article_cap=*/2,
                              /*top_n=*/4);
  REQUIRE(r.events.size() == 4);
  // Alpha 1000, Alpha 700, Alpha 500 capped out; Betas tie at 400 and
  // sort by bullet text; Gamma fills the last slot.
  CHECK(r.events[0].description == "alpha first");
  CHECK(r.events[1].description == "alpha second");
  CHECK(r.events[2].description == "beta alef");
  CHECK(r.events[3].description == "beta zig");
  CHECK(r.distinct_articles == 2);
  CHECK_FALSE(r.shortfall);

  CHECK(r.events[0].title == "Alpha");
  CHECK(r.events[0].surface == Surface::wcep);
  CHECK(r.events[0].category == category::kSports);
  CHECK(r.events[0].t_e == midnight_ms(Date{2026, 4, 1}));
  CHECK(r.events[0].attention_prior == doctest::Approx(1000.0));
  CHECK_FALSE(r.events[0].event_id.empty());

  const auto short_run = rank_and_cap(bullets, by_key, 1, 10);
  CHECK(short_run.events.size() == 3);  // one per article
  CHECK(short_run.shortfall);
  CHECK(short_run.distinct_articles == 3);

  std::map<std::string, PageviewRecord> missing = by_key;
  missing.erase(bullet_view_key(bullets[5]));
  CHECK_THROWS_AS(rank_and_cap(bullets, missing, 2, 4),
                  std::invalid_argument);
}

// ---------------------------------------------------------------------------
// market records
// ---------------------------------------------------------------------------

TEST_CASE("usd parsing is exact to the cent") {
  CHECK(parse_usd_cents("100000") == 10'000'000);
  CHECK(parse_usd_cents("99.5") == 9950);
  CHECK(parse_usd_cents("12345.67") == 1'234'567);
  CHECK(parse_usd_cents("0.07") == 7);
  CHECK(parse_usd_cents("7") == 700);
  CHECK_THROWS_AS(parse_usd_cents("12.345"), std::invalid_argument);
  CHECK_THROWS_AS(parse_usd_cents("-3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_usd_cents("abc"), std::invalid_argument);
  CHECK_THROWS_AS(parse_usd_cents(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_usd_cents("."), std::invalid_argument);
}

TEST_CASE("record stores read jsonl and reject columnar files") {
  const fs::path dir = temp_dir("markets");
  write_text(dir / "markets.jsonl",
             R"({"market_id":"m1","event_slug":"s1","event_title":"T1","question":"Q1?","resolution_start":100,"resolution_end":200,"lifetime_volume_usd":"250.75","is_binary":true})"
             "\n"
             R"({"market_id":"m2","event_slug":"s2","event_title":"T2","question":"Q2?","resolution_start":100,"resolution_end":200,"lifetime_volume_usd":1000,"is_binary":false})"
             "\n");
  const auto markets = load_markets(dir / "markets.jsonl");
  REQUIRE(markets.size() == 2);
  CHECK(markets[0].lifetime_volume_cents == 25'075);
  CHECK(markets[1].lifetime_volume_cents == 100'000);
  CHECK_FALSE(markets[1].is_binary);

  write_text(dir / "trades.jsonl",
             R"({"market_id":"m1","ts":5000,"usd_size":12.5})"
             "\n");
  const auto trades = load_trades(dir / "trades.jsonl");
  REQUIRE(trades.size() == 1);
  CHECK(trades[0].usd_cents == 1250);

  CHECK_THROWS_WITH_AS(load_markets(dir / "markets.parquet"),
                       doctest::Contains("columnar input is not supported"),
                       std::runtime_error);

  write_text(dir / "inverted.jsonl",
             R"({"market_id":"m3","event_slug":"s","event_title":"T","question":"Q","resolution_start":300,"resolution_end":200,"lifetime_volume_usd":1,"is_binary":true})"
             "\n");
  CHECK_THROWS_WITH_AS(load_markets(dir / "inverted.jsonl"),
                       doctest::Contains("inverted resolution window"),
                       std::runtime_error);
  fs::remove_all(dir);
}

namespace {

MarketRecord market(const std::string& id, const std::string& title,
                    long long volume_cents, TimeMs start, TimeMs end,
                    bool binary = true) {
  MarketRecord m;
  m.market_id = id;
  m.event_slug = "slug-" + id;
  m.event_title = title;
  m.question = "Will " + title + " settle yes?";
  m.resolution_start = start;
  m.resolution_end = end;
  m.lifetime_volume_cents = volume_cents;
  m.is_binary = binary;
  return m;
}

}  // namespace

TEST_CASE("market filter applies overlap, floor, binary, dedupe, top-k") {
  const TimeWindow scan{1000, 2000};
  const std::vector<MarketRecord> markets = {
      market("m1", "Race A", 500'00, 900, 1100),
      market("m2", "Race A", 800'00, 900, 1100),   // same title, more volume
      market("m9", "Race A", 800'00, 900, 1100),   // tie: larger id loses
      market("m3", "Race B", 900'00, 1999, 3000),
      market("m4", "Race C", 900'00, 1999, 3000),  // tie with m3: id order
      market("m5", "Race D", 50'00, 900, 1100),    // below floor
      market("m6", "Race E", 900'00, 100, 999),    // no overlap
      market("m7", "Race F", 900'00, 2001, 3000),  // no overlap
      market("m8", "Race G", 700'00, 1500, 1600, /*binary=*/false),
  };
  const auto kept = filter_markets(markets, scan, /*floor=*/100'00,
                                   /*top_k=*/3);
  REQUIRE(kept.size() == 3);
  CHECK(kept[0].market_id == "m3");
  CHECK(kept[1].market_id == "m4");
  CHECK(kept[2].market_id == "m2");

  const auto all = filter_markets(markets, scan, 100'00, 100);
  CHECK(all.size() == 3);  // dedupe still collapses Race A to one market
}

// ---------------------------------------------------------------------------
// rolling spike
// ---------------------------------------------------------------------------

namespace {

Trade trade(TimeMs ts, long long cents) {
  Trade t;
  t.market_id = "m";
  t.ts = ts;
  t.usd_cents = cents;
  return t;
}

}  // namespace

TEST_CASE("spike window is half-open on the left") {
  const TimeWindow scan{0, 10'000};
  // len 1000: the trade at t=0 falls outside (0, 1000], so anchor 1000
  // sums only itself; the best window is the pair at 2000/2500.
  const std::vector<Trade> trades = {
      trade(0, 100), trade(1000, 100), trade(2000, 80), trade(2500, 80)};
  const auto spike = rolling_spike(trades, 1000, scan);
  REQUIRE(spike.has_value());
  CHECK(spike->spike_ts == 2500);
  CHECK(spike->window_usd_cents == 160);
}

TEST_CASE("equal sums keep the earliest anchor") {
  const TimeWindow scan{0, 10'000};
  const std::vector<Trade> trades = {trade(1000, 50), trade(5000, 50)};
  const auto spike = rolling_spike(trades, 600, scan);
  REQUIRE(spike.has_value());
  CHECK(spike->spike_ts == 1000);
}

TEST_CASE("anchors outside the scan never win") {
  const TimeWindow scan{3000, 4000};
  const std::vector<Trade> trades = {
      trade(1000, 900), trade(3500, 10), trade(9000, 900)};
  const auto spike = rolling_spike(trades, 1000, scan);
  REQUIRE(spike.has_value());
  CHECK(spike->spike_ts == 3500);
  CHECK(spike->window_usd_cents == 10);

  CHECK_FALSE(rolling_spike({trade(1000, 900)}, 1000, scan).has_value());
  CHECK_FALSE(rolling_spike({}, 1000, scan).has_value());
  CHECK_THROWS_AS(rolling_spike({trade(5, 1), trade(4, 1)}, 1000, scan),
                  std::invalid_argument);
}

TEST_CASE("spike agrees with the quadratic reference on random tapes") {
  std::mt19937_64 rng(20260401);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<Trade> trades;
    const int n = 1 + static_cast<int>(rng() % 60);
    TimeMs ts = 0;
    for (int i = 0; i < n; ++i) {
      ts += static_cast<TimeMs>(rng() % 500);
      trades.push_back(trade(ts, static_cast<long long>(rng() % 1000)));
    }
    const TimeMs len = 1 + static_cast<TimeMs>(rng() % 2000);
    const TimeWindow scan{static_cast<TimeMs>(rng() % 2000),
                          8000 + static_cast<TimeMs>(rng() % 20'000)};

    std::vector<std::pair<long long, long long>> pairs;
    for (const auto& t : trades) pairs.push_back({t.ts, t.usd_cents});
    const auto expected =
        oracle::spike_brute_force(pairs, scan.start, scan.end, len);
    const auto got = rolling_spike(trades, len, scan);
    if (expected.found) {
      REQUIRE(got.has_value());
      CHECK(got->spike_ts == expected.anchor_ms);
      CHECK(got->window_usd_cents == expected.cents);
    } else {
      CHECK_FALSE(got.has_value());
    }
  }
}

// ---------------------------------------------------------------------------
// categorization and pinning
// ---------------------------------------------------------------------------

TEST_CASE("market categorization hits the right bucket") {
  CHECK(categorize_market("Mavericks vs Lakers", "Will Dallas win?") ==
        category::kSports);
  CHECK(categorize_market("Iran leadership", "Will Khamenei remain?") ==
        category::kPolitics);
  CHECK(categorize_market("Bitcoin milestones", "Will it touch 100k?") ==
        category::kMacroCrypto);
  CHECK(categorize_market("Street art sightings", "Will a new mural appear?") ==
        category::kOther);
  // Sports keys take priority over later buckets.
  CHECK(categorize_market("Champions League", "Will the vote pass?") ==
        category::kSports);
}

TEST_CASE("pinning drops tradeless markets and counts slugs") {
  const TimeWindow scan{0, 100'000};
  std::vector<MarketRecord> markets = {
      market("m1", "Race A", 800'00, 0, 100'000),
      market("m2", "Race B", 700'00, 0, 100'000),
      market("m3", "Race C", 600'00, 0, 100'000),
  };
  markets[1].event_slug = markets[0].event_slug;  // same umbrella event

  std::map<std::string, std::vector<Trade>> trades;
  trades["m1"] = {trade(5000, 100)};
  trades["m2"] = {trade(7000, 100)};
  // m3 has no tape at all.

  const auto r = pin_events(markets, trades, 1000, scan);
  REQUIRE(r.events.size() == 2);
  CHECK(r.dropped_no_trades == 1);
  CHECK(r.distinct_event_slugs == 1);

  const Event& e = r.events[0];
  CHECK(e.surface == Surface::polymarket);
  CHECK(e.title == "Will Race A settle yes?");
  CHECK(e.description == "Race A. Will Race A settle yes?");
  CHECK(e.category == category::kOther);  // no bucket keyword in "Race A"
  CHECK(e.t_e == 5000);
  CHECK(e.attention_prior == doctest::Approx(800.0));
  CHECK(e.source_key == "m1");
}
