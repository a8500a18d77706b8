// Core primitive tests: time arithmetic, text helpers, the boolean grammar,
// snowflake/oEmbed recovery, the sliding-window limiter, and the mock
// provider's saved-query lifecycle.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "newsrace/boolean_query.hpp"
#include "newsrace/chrono.hpp"
#include "newsrace/provider.hpp"
#include "newsrace/text.hpp"
#include "newsrace/types.hpp"
#include "newsrace/xrecover.hpp"
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

}  // namespace

// ---------------------------------------------------------------------------
// chrono
// ---------------------------------------------------------------------------

TEST_CASE("delta sign convention: positive means X was earlier") {
  CHECK(delta_minutes(/*t_news=*/120000, /*t_x=*/60000) == doctest::Approx(1.0));
  CHECK(delta_minutes(/*t_news=*/0, /*t_x=*/60000) == doctest::Approx(-1.0));
  CHECK(delta_minutes(90000, 90000) == doctest::Approx(0.0));
}

TEST_CASE("civil date round trips and epoch anchors") {
  CHECK(midnight_ms(Date{1970, 1, 1}) == 0);
  CHECK(days_from_civil(Date{1970, 1, 2}) == 1);
  for (const Date d : {Date{2026, 4, 1}, Date{2026, 12, 31}, Date{2000, 2, 29},
                       Date{1969, 7, 20}}) {
    CHECK(civil_from_days(days_from_civil(d)) == d);
    CHECK(date_of_ms(midnight_ms(d)) == d);
  }
  CHECK(is_valid_date(Date{2024, 2, 29}));
  CHECK_FALSE(is_valid_date(Date{2026, 2, 29}));
  CHECK_FALSE(is_valid_date(Date{2026, 4, 31}));
  CHECK_FALSE(is_valid_date(Date{2026, 13, 1}));
}

TEST_CASE("date and instant parsing") {
  CHECK(parse_date("2026-04-12") == Date{2026, 4, 12});
  CHECK_FALSE(parse_date("2026-4-12").has_value());
  CHECK_FALSE(parse_date("2026-02-30").has_value());
  CHECK(format_date(Date{2026, 4, 2}) == "2026-04-02");

  CHECK(parse_instant("2010-11-04T01:42:54.657Z") == kTwitterEpochMs);
  CHECK(parse_instant("1970-01-01T00:00:00Z") == 0);
  CHECK(parse_instant("2026-04-01") == midnight_ms(Date{2026, 4, 1}));
  CHECK(format_instant(kTwitterEpochMs) == "2010-11-04T01:42:54.657Z");
  const TimeMs t = midnight_ms(Date{2026, 4, 12}) + 3 * kMsPerHour + 250;
  CHECK(parse_instant(format_instant(t)) == t);
}

TEST_CASE("duration strings") {
  CHECK(parse_duration_ms("30m") == 30 * kMsPerMinute);
  CHECK(parse_duration_ms("24h") == 24 * kMsPerHour);
  CHECK(parse_duration_ms("90s") == 90 * kMsPerSecond);
  CHECK(parse_duration_ms("250ms") == 250);
  CHECK(parse_duration_ms("45") == 45 * kMsPerSecond);
  CHECK_FALSE(parse_duration_ms("ten minutes").has_value());
}

TEST_CASE("windows are inclusive on both ends") {
  const TimeWindow w{1000, 2000};
  CHECK(w.contains(1000));
  CHECK(w.contains(2000));
  CHECK_FALSE(w.contains(999));
  CHECK_FALSE(w.contains(2001));
  CHECK(w.overlaps(TimeWindow{2000, 3000}));
  CHECK_FALSE(w.overlaps(TimeWindow{2001, 3000}));

  const DateWindow days{Date{2026, 4, 1}, Date{2026, 4, 30}};
  const TimeWindow span = days.as_time_window();
  CHECK(span.start == midnight_ms(Date{2026, 4, 1}));
  CHECK(span.end == midnight_ms(Date{2026, 4, 30}) + kMsPerDay - 1);
  CHECK(span.contains(midnight_ms(Date{2026, 4, 30}) + kMsPerDay - 1));
  CHECK_FALSE(span.contains(midnight_ms(Date{2026, 5, 1})));
}

// ---------------------------------------------------------------------------
// text
// ---------------------------------------------------------------------------

TEST_CASE("tokenization and whole-word term matching") {
  CHECK(text::tokenize("U.S. Senate votes!") ==
        std::vector<std::string>{"u", "s", "senate", "votes"});
  CHECK(text::normalize_term("U.S. Senate") == "u s senate");
  CHECK(text::normalize_term(text::normalize_term("U.S. Senate")) ==
        "u s senate");

  const auto tokens = text::tokenize("The U.S. Senate voted late");
  CHECK(text::term_matches(tokens, text::normalize_term("U.S. Senate")));
  CHECK(text::term_matches(tokens, "senate"));
  // Whole tokens only: "us" must not match inside "usable".
  CHECK_FALSE(text::term_matches(text::tokenize("a usable tool"), "us"));
  // Multiword terms need contiguous tokens.
  CHECK_FALSE(text::term_matches(text::tokenize("senate of the u s"),
                                 "u s senate"));
}

TEST_CASE("substring helpers and stopwords") {
  CHECK(text::contains_ci("Dallas Mavericks", "mavericks"));
  CHECK_FALSE(text::contains_cs("tell us more", "U.S."));
  CHECK(text::contains_cs("U.S. officials", "U.S."));
  CHECK(text::is_stopword("the"));
  CHECK(text::is_stopword("will"));
  CHECK_FALSE(text::is_stopword("senate"));
}

TEST_CASE("entity decoding and html stripping") {
  CHECK(text::decode_entities("Johnson &amp; Johnson") == "Johnson & Johnson");
  CHECK(text::decode_entities("caf&#233;") == "caf\xC3\xA9");
  CHECK(text::strip_html("<p>Hello <b>world</b></p>") == "Hello world");
  CHECK(text::strip_html("a<script>ignore();</script> b") == "a b");
  CHECK(text::strip_html("x &mdash; y") == "x \xE2\x80\x94 y");
}

// ---------------------------------------------------------------------------
// boolean grammar
// ---------------------------------------------------------------------------

TEST_CASE("render and parse round trip") {
  BooleanQuery q;
  q.kind = QueryKind::x_permissive;
  q.clusters = {{"Mavericks", "Dallas"}, {"Lakers"}};
  CHECK(q.render() == "(\"Mavericks\" OR \"Dallas\") AND (\"Lakers\")");
  CHECK(parse_boolean(q.render(), q.kind) == q);
  CHECK_THROWS_AS(parse_boolean("(\"a\" OR )", QueryKind::x_permissive),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_boolean("no quotes here", QueryKind::x_permissive),
                  std::invalid_argument);
}

TEST_CASE("matching is a case-insensitive substring per cluster") {
  BooleanQuery q;
  q.clusters = {{"Mavericks", "Dallas"}, {"Lakers"}};
  CHECK(q.matches("the dallas crowd watched the LAKERS arrive"));
  CHECK(q.matches("MavericksLakers"));  // substring, not whole word
  CHECK_FALSE(q.matches("the dallas crowd went home"));
  CHECK_FALSE(q.matches("lakers on their own"));
}

TEST_CASE("cluster-count invariants per query kind") {
  BooleanQuery x;
  x.kind = QueryKind::x_permissive;
  x.clusters = {{"a"}};
  CHECK(x.valid());
  x.clusters = {{"a"}, {"b"}};
  CHECK(x.valid());
  x.clusters = {{"a"}, {"b"}, {"c"}};
  CHECK_FALSE(x.valid());

  BooleanQuery news;
  news.kind = QueryKind::news_tight;
  news.clusters = {{"a"}, {"b"}};
  CHECK_FALSE(news.valid());
  news.clusters = {{"a"}, {"b"}, {"c"}};
  CHECK(news.valid());
  news.clusters = {{"a"}, {"b"}, {"c"}, {"d"}};
  CHECK(news.valid());
  news.clusters = {{"a"}, {"b"}, {"c"}, {"d"}, {"e"}};
  CHECK_FALSE(news.valid());

  BooleanQuery bad;
  bad.kind = QueryKind::x_permissive;
  bad.clusters = {{"a", ""}};
  CHECK_FALSE(bad.valid());
  bad.clusters = {{"a\"b"}};
  CHECK_FALSE(bad.valid());
  bad.clusters = {};
  CHECK_FALSE(bad.valid());
}

TEST_CASE("structural broadening recognises weakened conjunctions") {
  BooleanQuery base;
  base.clusters = {{"Alpha"}, {"Beta"}};
  BooleanQuery wider = base;
  wider.clusters[0].push_back("Gamma");
  CHECK(structurally_broadens(base, wider));
  BooleanQuery dropped;
  dropped.clusters = {{"Alpha"}};
  CHECK(structurally_broadens(base, dropped));
  BooleanQuery narrowed;
  narrowed.clusters = {{"Alpha"}, {"Beta"}, {"Delta"}};
  CHECK_FALSE(structurally_broadens(base, narrowed));
}

// ---------------------------------------------------------------------------
// snowflake and oEmbed recovery
// ---------------------------------------------------------------------------

TEST_CASE("snowflake id zero decodes to the epoch instant") {
  CHECK(decode_snowflake(0) == kTwitterEpochMs);
  CHECK(format_instant(decode_snowflake(0)) == "2010-11-04T01:42:54.657Z");
}

TEST_CASE("snowflake decode agrees with decimal-string long division") {
  std::mt19937_64 rng(20260416);
  for (int i = 0; i < 200; ++i) {
    const std::uint64_t raw = rng() >> (i % 3);  // vary magnitudes
    const TimeMs got = decode_snowflake(raw);
    CHECK(std::to_string(got) ==
          oracle::snowflake_ms_decimal(std::to_string(raw)));
  }
}

TEST_CASE("guid parsing takes the trailing digit run") {
  CHECK(parse_guid("1450000000000000000") == 1450000000000000000ull);
  CHECK(parse_guid("https://x.com/i/status/123456") == 123456ull);
  CHECK(parse_guid("tweet-99") == 99ull);
  CHECK_FALSE(parse_guid("12a").has_value());
  CHECK_FALSE(parse_guid("").has_value());
  CHECK_FALSE(parse_guid("99999999999999999999").has_value());  // > 2^64-1
}

TEST_CASE("status url uses the i placeholder when the author is unknown") {
  CHECK(make_status_url(std::string("alice"), "123") ==
        "https://twitter.com/alice/status/123");
  CHECK(make_status_url(std::nullopt, "123") ==
        "https://twitter.com/i/status/123");
}

TEST_CASE("oEmbed payload parsing extracts the first paragraph only") {
  const std::string raw = R"({
    "author_name": "Desk Account",
    "html": "<blockquote class=\"twitter-tweet\"><p lang=\"en\" dir=\"ltr\">Halftime score &amp; notes</p>&mdash; Desk Account (@desk) <a href=\"https://twitter.com/desk/status/1\">April 2026</a></blockquote>"
  })";
  const auto body = parse_oembed_payload(raw, 42);
  REQUIRE(body.has_value());
  CHECK(body->text == "Halftime score & notes");
  CHECK(body->author == "Desk Account");
  CHECK(body->fetched_at == 42);

  CHECK_FALSE(parse_oembed_payload("{}", 0).has_value());
  CHECK_FALSE(parse_oembed_payload("not json", 0).has_value());
  CHECK_FALSE(
      parse_oembed_payload(R"({"html": "<div>no paragraph</div>"})", 0)
          .has_value());
}

TEST_CASE("fixture oEmbed store behaves like the endpoint") {
  const fs::path dir = temp_dir("oembed");
  write_text(dir / "777.json",
             R"({"author_name":"A","html":"<blockquote><p>hello there</p>x</blockquote>"})");
  FixtureOembed store(dir);
  const auto hit = store.fetch_raw("https://twitter.com/i/status/777");
  REQUIRE(hit.has_value());
  CHECK(hit->find("hello there") != std::string::npos);
  CHECK_FALSE(store.fetch_raw("https://twitter.com/i/status/778").has_value());
  fs::remove_all(dir);
}

namespace {

// fetch_raw that always throws: proves the cache short-circuits hits.
class PoisonedOembed : public OembedClient {
 public:
  std::optional<std::string> fetch_raw(const std::string&) override {
    throw std::runtime_error("cache should not have fetched");
  }
};

}  // namespace

TEST_CASE("oEmbed cache serves hits and negative entries without refetching") {
  const fs::path dir = temp_dir("oembed-cache");
  write_text(dir / "fixture" / "900.json",
             R"({"author_name":"A","html":"<blockquote><p>cached words</p></blockquote>"})");
  FixtureOembed endpoint(dir / "fixture");
  OembedCache cache(dir / "cache");

  const auto first = cache.get_or_fetch("900", std::nullopt, endpoint, 5);
  REQUIRE(first.has_value());
  CHECK(first->text == "cached words");
  const auto missing = cache.get_or_fetch("901", std::nullopt, endpoint, 6);
  CHECK_FALSE(missing.has_value());

  PoisonedOembed poisoned;
  const auto second = cache.get_or_fetch("900", std::nullopt, poisoned, 7);
  REQUIRE(second.has_value());
  CHECK(second->text == "cached words");
  CHECK(second->fetched_at == first->fetched_at);
  CHECK_FALSE(cache.get_or_fetch("901", std::nullopt, poisoned, 8).has_value());
  fs::remove_all(dir);
}

// ---------------------------------------------------------------------------
// rate limiter
// ---------------------------------------------------------------------------

TEST_CASE("the 29th request in a burst waits exactly one window") {
  RateLimiter limiter(28, 600 * kMsPerSecond);
  for (int i = 0; i < 28; ++i) {
    CHECK(limiter.grant_at(0) == 0);
  }
  CHECK(limiter.grant_at(0) == 600 * kMsPerSecond);

  SimClock clock(0);
  RateLimiter second(28, 600 * kMsPerSecond);
  for (int i = 0; i < 29; ++i) second.acquire(clock);
  CHECK(clock.now() == 600 * kMsPerSecond);
}

TEST_CASE("every grant log satisfies the sliding-window audit") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int cap = 1 + static_cast<int>(rng() % 10);
    const TimeMs window = 100 + static_cast<TimeMs>(rng() % 1000);
    RateLimiter limiter(cap, window);
    SimClock clock(0);
    const int n = 20 + static_cast<int>(rng() % 60);
    for (int i = 0; i < n; ++i) {
      if (rng() % 3 == 0) {
        clock.sleep_until(clock.now() + static_cast<TimeMs>(rng() % window));
      }
      limiter.acquire(clock);
    }
    const auto log = limiter.grant_log();
    REQUIRE(static_cast<int>(log.size()) == n);
    CHECK(std::is_sorted(log.begin(), log.end()));
    CHECK(oracle::grants_respect_cap(
        std::vector<long long>(log.begin(), log.end()), cap, window));
  }
}

// ---------------------------------------------------------------------------
// mock provider and the query session
// ---------------------------------------------------------------------------

namespace {

FixtureDoc doc(const std::string& channel, const std::string& guid, TimeMs ts,
               const std::string& body_text) {
  FixtureDoc d;
  d.channel = channel;
  d.guid = guid;
  d.ts = ts;
  d.text = body_text;
  return d;
}

BooleanQuery query_for(const std::string& term) {
  BooleanQuery q;
  q.kind = QueryKind::x_permissive;
  q.clusters = {{term}};
  return q;
}

}  // namespace

TEST_CASE("identical booleans map to identical provider query ids") {
  MockProvider provider({});
  const SavedQuery a = provider.create_query(query_for("Alpha"), 10);
  const SavedQuery b = provider.create_query(query_for("Alpha"), 20);
  const SavedQuery c = provider.create_query(query_for("Beta"), 30);
  CHECK(a.provider_query_id == b.provider_query_id);
  CHECK(a.provider_query_id != c.provider_query_id);
  CHECK(a.provider_query_id.rfind("q-", 0) == 0);
}

TEST_CASE("pull window is inclusive and twitter timestamps are redacted") {
  std::vector<FixtureDoc> docs = {
      doc("news", "d1", 999, "alpha before the window"),
      doc("news", "d2", 1000, "alpha at the left edge"),
      doc("news", "d3", 2000, "alpha at the right edge"),
      doc("news", "d4", 2001, "alpha after the window"),
      doc("twitter", "4194304", 1500, "alpha tweet inside"),
  };
  MockProvider provider(std::move(docs));
  const SavedQuery saved = provider.create_query(query_for("alpha"), 0);

  const auto all = provider.pull_mentions(saved.provider_query_id,
                                          TimeWindow{1000, 2000}, std::nullopt,
                                          100);
  REQUIRE(all.size() == 3);
  CHECK(all[0].guid == "d2");
  CHECK(all[1].guid == "4194304");
  CHECK(all[2].guid == "d3");
  for (const Mention& m : all) {
    if (m.channel == "twitter") {
      CHECK_FALSE(m.provider_ts.has_value());
      CHECK_FALSE(m.recovered_ts.has_value());
    } else {
      REQUIRE(m.provider_ts.has_value());
    }
  }

  const auto tweets = provider.pull_mentions(
      saved.provider_query_id, TimeWindow{1000, 2000},
      std::optional<std::string>("twitter"), 100);
  REQUIRE(tweets.size() == 1);
  CHECK(tweets[0].channel == "twitter");
}

TEST_CASE("a page never exceeds page_size and keeps ascending order") {
  std::vector<FixtureDoc> docs;
  for (int i = 0; i < 150; ++i) {
    docs.push_back(doc("news", "d" + std::to_string(i), 10'000 - i,
                       "alpha item"));
  }
  MockProvider provider(std::move(docs));
  const SavedQuery saved = provider.create_query(query_for("alpha"), 0);
  const auto page = provider.pull_mentions(
      saved.provider_query_id, TimeWindow{0, 20'000}, std::nullopt, 100);
  REQUIRE(page.size() == 100);
  for (size_t i = 1; i < page.size(); ++i) {
    CHECK(*page[i - 1].provider_ts <= *page[i].provider_ts);
  }
  // The page holds the earliest 100: timestamps 9851..10000.
  CHECK(*page.front().provider_ts == 9851);
  CHECK(*page.back().provider_ts == 9950);
}

TEST_CASE("session lifecycle counts requests and enforces order") {
  MockProvider provider({doc("news", "d1", 500, "alpha story")});
  provider.set_default_backfill({40.0, 75.0});
  RateLimiter limiter(28, 600 * kMsPerSecond);
  SimClock clock(0);
  QuerySession session(provider, limiter, clock);

  CHECK_THROWS_AS(session.pull_all(TimeWindow{0, 1000}, 100),
                  std::logic_error);
  session.create(query_for("alpha"));
  CHECK_THROWS_AS(session.remove(), std::logic_error);

  const double percent = session.await_backfill(50.0, 90 * kMsPerSecond,
                                                5 * kMsPerSecond);
  CHECK(percent == doctest::Approx(75.0));
  CHECK(clock.now() == 5 * kMsPerSecond);  // second poll hit the floor

  const auto all = session.pull_all(TimeWindow{0, 1000}, 100);
  CHECK(all.size() == 1);
  const auto tweets = session.pull_twitter(TimeWindow{0, 1000}, 100);
  CHECK(tweets.empty());
  session.remove();
  CHECK(session.state() == SessionState::deleted);
  // create + 2 polls + 2 pulls + delete.
  CHECK(session.requests_made() == 6);
  CHECK(limiter.grant_log().size() == 6);
}

TEST_CASE("a stalled backfill proceeds at exactly the cap with partial coverage") {
  MockProvider provider({});
  provider.set_default_backfill({10.0, 20.0, 30.0});
  RateLimiter limiter(100, 600 * kMsPerSecond);
  SimClock clock(0);
  QuerySession session(provider, limiter, clock);
  session.create(query_for("alpha"));

  const double percent = session.await_backfill(50.0, 90 * kMsPerSecond,
                                                5 * kMsPerSecond);
  CHECK(percent == doctest::Approx(30.0));
  CHECK(clock.now() == 90 * kMsPerSecond);
  // One poll every 5s from t=0 through t=85, then the cap.
  CHECK(session.requests_made() == 1 + 18);
}

TEST_CASE("a ramp that crosses the floor returns as soon as it does") {
  MockProvider provider({});
  provider.set_default_backfill({0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0});
  RateLimiter limiter(100, 600 * kMsPerSecond);
  SimClock clock(0);
  QuerySession session(provider, limiter, clock);
  session.create(query_for("alpha"));
  const double percent = session.await_backfill(50.0, 90 * kMsPerSecond,
                                                5 * kMsPerSecond);
  CHECK(percent == doctest::Approx(50.0));
  CHECK(clock.now() == 25 * kMsPerSecond);
}

TEST_CASE("deleting twice is idempotent, unknown deletes succeed") {
  MockProvider provider({});
  provider.delete_query("q-nonexistent");  // must not throw
  const SavedQuery saved = provider.create_query(query_for("alpha"), 0);
  provider.delete_query(saved.provider_query_id);
  provider.delete_query(saved.provider_query_id);
  CHECK_THROWS_AS(
      provider.poll_backfill(saved.provider_query_id, 0),
      ProviderRequestError);
}
