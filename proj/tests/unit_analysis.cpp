// Analysis-layer tests: query drafting and the broadening ladder, the
// two-threshold verifier, latency/winner statistics, rendering, the probe,
// and the persistent run stores.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "newsrace/analytics.hpp"
#include "newsrace/channel.hpp"
#include "newsrace/drafting.hpp"
#include "newsrace/manifest.hpp"
#include "newsrace/provider.hpp"
#include "newsrace/store.hpp"
#include "newsrace/types.hpp"
#include "newsrace/verify.hpp"
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

Event event_of(const std::string& title, const std::string& description,
               Surface surface = Surface::wcep) {
  Event e;
  e.surface = surface;
  e.title = title;
  e.description = description;
  e.category = category::kOther;
  e.t_e = 1'000'000;
  e.source_key = "k";
  e.event_id = make_event_id(surface, e.source_key, title, e.t_e);
  return e;
}

Event match_event() {
  return event_of(
      "Will Qalandar Khel defeat Karachi Trophy in the spring match?",
      "Qalandar Khel faces Karachi Trophy in pakistan. "
      "Will Qalandar Khel defeat Karachi Trophy in the spring match?",
      Surface::polymarket);
}

bool has_term(const std::vector<std::string>& terms, const std::string& t) {
  return std::find(terms.begin(), terms.end(), t) != terms.end();
}

}  // namespace

// ---------------------------------------------------------------------------
// entity, geo, and prohibited-term extraction
// ---------------------------------------------------------------------------

TEST_CASE("entities are capitalized runs broken by stopwords and punctuation") {
  const auto e1 = extract_entities(match_event());
  CHECK(e1 == std::vector<std::string>{"Qalandar Khel", "Karachi Trophy"});

  const auto e2 = extract_entities(
      event_of("Storm hits Dallas, Texas on April 12",
               "Rescue crews from Dallas respond"));
  // The comma splits the run, the month and number never join one, and
  // a repeated entity is deduplicated case-insensitively.
  CHECK(e2 == std::vector<std::string>{"Storm", "Dallas", "Texas"});

  CHECK(extract_entities(event_of("nothing capitalized here", "at all"))
            .empty());
}

TEST_CASE("geo terms come from the country table, any case") {
  const auto geos = geo_terms(
      event_of("Flood reported", "flood damage across pakistan after rains"));
  CHECK(geos == std::vector<std::string>{"Pakistan"});
  CHECK(geo_terms(event_of("Quiet day", "no places named")).empty());
}

TEST_CASE("aliases expand known entities and stay empty otherwise") {
  CHECK(alias_terms("Pakistan") ==
        std::vector<std::string>{"Pakistani", "Islamabad"});
  CHECK(alias_terms("Mavericks") == std::vector<std::string>{"Dallas"});
  CHECK(alias_terms("Zxqv").empty());
}

TEST_CASE("market questions ban outcome words, dates, and numbers") {
  const Event b = event_of("Will Bitcoin close above 100000 by March 15?",
                           "Crypto milestones. Will Bitcoin close above "
                           "100000 by March 15?",
                           Surface::polymarket);
  const auto banned = prohibited_terms(b);
  for (const char* t : {"yes", "no", "win", "out", "above"}) {
    CHECK(has_term(banned, t));
  }
  CHECK(has_term(banned, "march"));
  CHECK(has_term(banned, "15"));
  CHECK(has_term(banned, "100000"));

  // The page-seeded sample has no outcome framing to ban.
  CHECK(prohibited_terms(event_of("Some Article", "bullet text")).empty());
}

// ---------------------------------------------------------------------------
// fallback drafting
// ---------------------------------------------------------------------------

TEST_CASE("the fallback drafter emits valid tight and permissive queries") {
  FallbackBackend backend;
  const auto [news, x] = backend.draft_booleans(match_event());

  CHECK(news.kind == QueryKind::news_tight);
  CHECK(news.valid());
  CHECK(news.clusters.size() >= 3);
  CHECK(news.clusters.size() <= 4);

  CHECK(x.kind == QueryKind::x_permissive);
  CHECK(x.valid());
  CHECK(x.render() ==
        "(\"Qalandar Khel\" OR \"Karachi Trophy\") AND (\"Pakistan\")");

  // Prohibited outcome words never reach the permissive query.
  const auto banned = prohibited_terms(match_event());
  for (const auto& cluster : x.clusters) {
    for (const auto& term : cluster) {
      CHECK_FALSE(has_term(banned, text::to_lower(term)));
    }
  }
}

TEST_CASE("specificity gate evaluates the backend against the threshold") {
  FallbackBackend backend;
  const auto [news, x] = backend.draft_booleans(match_event());

  const auto ok = specificity_gate(x, backend);
  CHECK(ok.approved);
  CHECK(ok.value >= ok.threshold);

  // A threshold above the score range can never approve.
  const auto strict = specificity_gate(x, backend, 1.5);
  CHECK_FALSE(strict.approved);
  CHECK(strict.threshold == doctest::Approx(1.5));

  BooleanQuery invalid;  // no clusters at all
  const auto bad = specificity_gate(invalid, backend);
  CHECK(bad.value == doctest::Approx(0.0));
  CHECK_FALSE(bad.approved);
}

namespace {

// Backend that always fails, counting the attempts it received.
class FailingBackend : public FallbackBackend {
 public:
  int draft_calls = 0;
  bool throw_on_features = false;

  FeatureVector extract_features(const Event& event) override {
    if (throw_on_features) throw BackendError("features unavailable");
    return FallbackBackend::extract_features(event);
  }
  std::pair<BooleanQuery, BooleanQuery> draft_booleans(const Event&) override {
    ++draft_calls;
    throw BackendError("malformed output");
  }
};

// Backend whose drafts are structurally invalid (too few tight clusters).
class InvalidDraftBackend : public FallbackBackend {
 public:
  std::pair<BooleanQuery, BooleanQuery> draft_booleans(const Event&) override {
    BooleanQuery news;
    news.kind = QueryKind::news_tight;
    news.clusters = {{"a"}};  // needs 3-4
    BooleanQuery x;
    x.kind = QueryKind::x_permissive;
    x.clusters = {{"a"}};
    return {news, x};
  }
};

}  // namespace

TEST_CASE("drafting retries once and then uses the fallback") {
  FallbackBackend fallback;
  const Event e = match_event();
  const auto expected = fallback.draft_booleans(e);

  FailingBackend failing;
  const DraftResult r = draft_booleans_with_retry(e, failing, fallback);
  CHECK(failing.draft_calls == 2);
  CHECK(r.used_fallback);
  CHECK(r.news == expected.first);
  CHECK(r.x == expected.second);

  InvalidDraftBackend invalid;
  const DraftResult r2 = draft_booleans_with_retry(e, invalid, fallback);
  CHECK(r2.used_fallback);

  const DraftResult r3 = draft_booleans_with_retry(e, fallback, fallback);
  CHECK_FALSE(r3.used_fallback);
}

TEST_CASE("feature extraction degrades to unknown instead of failing") {
  FailingBackend failing;
  failing.throw_on_features = true;
  bool warned = false;
  const FeatureVector f =
      extract_features_safe(match_event(), failing, warned);
  CHECK(warned);
  CHECK(f == FeatureVector{});  // all five axes "unknown"

  FallbackBackend fallback;
  const FeatureVector ok =
      extract_features_safe(match_event(), fallback, warned);
  CHECK_FALSE(warned);
  CHECK(ok.clock_edge != labels::kUnknown);
}

TEST_CASE("rule-based features follow the keyword tables") {
  FallbackBackend backend;

  const FeatureVector draft = backend.extract_features(
      event_of("NFL Draft", "The NFL Draft first round begins tonight"));
  CHECK(draft.clock_edge == labels::kScheduled);
  CHECK(draft.live_visible == labels::kYes);
  CHECK(draft.institutional_source == labels::kNo);
  CHECK(draft.geographic_scope == labels::kUsNational);
  CHECK(draft.language_primary == labels::kEnglish);

  const FeatureVector blast = backend.extract_features(
      event_of("Factory explosion", "an explosion killed three workers"));
  CHECK(blast.clock_edge == labels::kUnscheduled);
  CHECK(blast.live_visible == labels::kNo);

  const FeatureVector court = backend.extract_features(
      event_of("Court verdict", "the federal court issues its verdict"));
  CHECK(court.institutional_source == labels::kYes);

  const FeatureVector abroad = backend.extract_features(
      event_of("Earthquake in Japan", "an earthquake struck northern Japan"));
  CHECK(abroad.geographic_scope == labels::kInternational);

  const FeatureVector cup = backend.extract_features(
      event_of("World Cup final", "the world cup final kicks off"));
  CHECK(cup.geographic_scope == labels::kGlobal);

  const FeatureVector blank = backend.extract_features(event_of("–", ""));
  CHECK(blank == FeatureVector{});

  std::string cyrillic;
  for (int i = 0; i < 20; ++i) cyrillic += "\xD0\xB4\xD0\xB0 ";
  const FeatureVector nonen =
      backend.extract_features(event_of(cyrillic, "123"));
  CHECK(nonen.language_primary == labels::kNonEnglish);
}

// ---------------------------------------------------------------------------
// broadening ladder
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> corpus_docs() {
  return {
      "Qalandar Khel presses ahead in the second innings",
      "Karachi Trophy organisers confirm the floodlights",
      "breaking update from the stadium",
      "news roundup for the evening",
      "Islamabad weather stays clear",
      "Pakistani broadcasters carry the toss",
      "cricket chatter with no proper nouns",
      "completely unrelated gardening notes",
  };
}

}  // namespace

TEST_CASE("the ladder widens monotonically and ends on geography") {
  FallbackBackend backend;
  const Event e = match_event();
  const auto [news, x] = backend.draft_booleans(e);
  const auto ladder = broaden_ladder(x, e, 5);

  REQUIRE(ladder.size() == 5);
  CHECK(ladder[0] == x);
  for (size_t i = 1; i < ladder.size(); ++i) {
    CHECK(structurally_broadens(ladder[i - 1], ladder[i]));
  }

  // Last level: the geo cluster alone, alias-expanded.
  REQUIRE(ladder[4].clusters.size() == 1);
  CHECK(ladder[4].render() ==
        "(\"Pakistan\" OR \"Pakistani\" OR \"Islamabad\")");

  // Match sets grow (or stay equal) level over level on a fixed corpus.
  const auto docs = corpus_docs();
  std::set<size_t> prev;
  for (const auto& q : ladder) {
    const auto got = oracle::matching_docs(q.clusters, docs);
    CHECK(std::includes(got.begin(), got.end(), prev.begin(), prev.end()));
    // The oracle and the production matcher agree doc by doc.
    for (size_t i = 0; i < docs.size(); ++i) {
      CHECK(q.matches(docs[i]) == (got.count(i) > 0));
    }
    prev = got;
  }
  // The last level matches strictly more than the first here.
  CHECK(oracle::matching_docs(ladder[4].clusters, docs).size() >
        oracle::matching_docs(ladder[0].clusters, docs).size());
}

TEST_CASE("a single-cluster query widens into geography at the end") {
  BooleanQuery x;
  x.kind = QueryKind::x_permissive;
  x.clusters = {{"Mystery Phrase"}};

  const Event no_geo = event_of("Mystery Phrase", "no countries here");
  const auto ladder = broaden_ladder(x, no_geo, 3);
  REQUIRE(ladder.size() == 3);
  CHECK(structurally_broadens(ladder[0], ladder[1]));
  CHECK(structurally_broadens(ladder[1], ladder[2]));
  REQUIRE(ladder[2].clusters.size() == 1);
  CHECK(has_term(ladder[2].clusters[0], "world"));
  CHECK(has_term(ladder[2].clusters[0], "international"));

  CHECK(broaden_ladder(x, no_geo, 1) == std::vector<BooleanQuery>{x});
  CHECK_THROWS_AS(broaden_ladder(x, no_geo, 0), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// verification
// ---------------------------------------------------------------------------

namespace {

KeywordSet keywords_for(const Event& e) {
  FallbackBackend backend;
  const auto [news, x] = backend.draft_booleans(e);
  return KeywordSet::from_queries(news, x);
}

Mention tweet(const std::string& guid, TimeMs recovered,
              const std::optional<std::string>& body) {
  Mention m;
  m.channel = channels::kTwitter;
  m.guid = guid;
  m.recovered_ts = recovered;
  m.body = body;
  return m;
}

Mention item(const std::string& channel, const std::string& guid, TimeMs ts,
             const std::optional<std::string>& title,
             const std::optional<std::string>& snippet = std::nullopt) {
  Mention m;
  m.channel = channel;
  m.guid = guid;
  m.provider_ts = ts;
  m.title = title;
  m.snippet = snippet;
  return m;
}

}  // namespace

TEST_CASE("keyword sets union, normalize, and dedupe query terms") {
  BooleanQuery news;
  news.kind = QueryKind::news_tight;
  news.clusters = {{"U.S. Senate", "Senate"}, {"vote"}, {"Washington"}};
  BooleanQuery x;
  x.kind = QueryKind::x_permissive;
  x.clusters = {{"senate"}};

  const KeywordSet k = KeywordSet::from_queries(news, x);
  CHECK(k.terms == std::vector<std::string>{"u s senate", "senate", "vote",
                                            "washington"});

  const auto found = k.matches_in("The U.S. Senate vote passed");
  CHECK(found == std::vector<std::string>{"u s senate", "senate", "vote"});
  // Whole-word only: "senates" is not the token "senate"... but a repeat
  // of one keyword still counts once.
  CHECK(k.matches_in("vote vote vote") == std::vector<std::string>{"vote"});
  CHECK(k.matches_in("senator speaks").empty());
}

TEST_CASE("tweet verification takes two keywords or one adjudicated") {
  FallbackBackend adjudicator;
  const Event e = match_event();
  const KeywordSet k = keywords_for(e);

  const auto two = verify_x(
      tweet("1", 5, "Qalandar Khel takes the Karachi Trophy opener"), k,
      adjudicator, e);
  CHECK(two.status == Verification::verified);
  CHECK_FALSE(two.was_ambiguous);
  CHECK(two.matched_terms.size() >= 2);

  // One keyword, on-topic body: subject word plus an event word.
  const auto one_yes =
      verify_x(tweet("2", 5, "Khel wins it at the death"), k, adjudicator, e);
  CHECK(one_yes.status == Verification::verified);
  CHECK(one_yes.was_ambiguous);

  // One keyword, off-topic body: no event word in sight.
  const auto one_no = verify_x(tweet("3", 5, "Khel thoughts over breakfast"),
                               k, adjudicator, e);
  CHECK(one_no.status == Verification::polluted);
  CHECK(one_no.was_ambiguous);

  const auto zero =
      verify_x(tweet("4", 5, "weekend plans and errands"), k, adjudicator, e);
  CHECK(zero.status == Verification::polluted);
  CHECK_FALSE(zero.was_ambiguous);

  const auto no_body = verify_x(tweet("5", 5, std::nullopt), k, adjudicator, e);
  CHECK(no_body.status == Verification::polluted);

  // A failing adjudicator is conservative.
  FailingBackend broken;
  broken.throw_on_features = false;
  struct ThrowingAdjudicator : FallbackBackend {
    bool adjudicate(const std::string&, const Event&) override {
      throw BackendError("adjudicator offline");
    }
  } throwing;
  const auto conservative =
      verify_x(tweet("6", 5, "Khel wins it at the death"), k, throwing, e);
  CHECK(conservative.status == Verification::polluted);
  CHECK(conservative.was_ambiguous);
}

TEST_CASE("non-tweet verification needs one keyword across title+snippet") {
  const Event e = match_event();
  const KeywordSet k = keywords_for(e);

  const auto hit = verify_other(
      item(channels::kNews, "d1", 9, "Qalandar Khel presses ahead"), k);
  CHECK(hit.status == Verification::verified);

  const auto via_snippet = verify_other(
      item(channels::kNews, "d2", 9, "midday roundup",
           "notes as Karachi Trophy starts"),
      k);
  CHECK(via_snippet.status == Verification::verified);

  const auto miss = verify_other(
      item(channels::kNews, "d3", 9, "unrelated bulletin", "nothing here"), k);
  CHECK(miss.status == Verification::polluted);

  Mention bare;
  bare.channel = channels::kNews;
  bare.guid = "d4";
  bare.provider_ts = 9;
  CHECK(verify_other(bare, k).status == Verification::polluted);
}

TEST_CASE("channel grouping sorts by the channel's ordering timestamp") {
  std::vector<Mention> mentions = {
      item(channels::kNews, "d2", 200, "b"),
      item(channels::kNews, "d1", 100, "a"),
      tweet("9", 150, "t"),
      tweet("8", 50, "t"),
  };
  Mention no_ts;
  no_ts.channel = channels::kNews;
  no_ts.guid = "d3";
  mentions.push_back(no_ts);

  auto grouped = group_by_channel(mentions);
  REQUIRE(grouped.size() == 2);
  REQUIRE(grouped[channels::kNews].size() == 3);
  CHECK(grouped[channels::kNews][0].guid == "d1");
  CHECK(grouped[channels::kNews][1].guid == "d2");
  CHECK(grouped[channels::kNews][2].guid == "d3");  // missing ts sorts last
  CHECK(grouped[channels::kTwitter][0].guid == "8");
  CHECK(grouped[channels::kTwitter][1].guid == "9");
}

TEST_CASE("earliest walk records depth and stops at the first verified") {
  FallbackBackend adjudicator;
  const Event e = match_event();
  const KeywordSet k = keywords_for(e);

  std::vector<Mention> mentions = {
      tweet("11", 100, "weekend plans and errands"),          // polluted
      tweet("12", 200, "Khel wins it at the death"),          // adjudicated on
      tweet("13", 300, "Qalandar Khel takes Karachi Trophy"), // never walked
      item(channels::kNews, "d1", 150, "no keywords at all"),
      item(channels::kNews, "d2", 250, "Karachi Trophy update"),
      item(channels::kForum, "f1", 50, "off-topic forever"),
  };
  auto by_channel = group_by_channel(mentions);
  const auto result = earliest_verified(e, by_channel, k, adjudicator);

  REQUIRE(result.earliest.size() == 2);  // forum never verifies
  std::map<std::string, ChannelEarliest> by;
  for (const auto& ce : result.earliest) by[ce.channel] = ce;

  CHECK(by[channels::kTwitter].mention.guid == "12");
  CHECK(by[channels::kTwitter].fallback_depth == 1);
  CHECK(by[channels::kNews].mention.guid == "d2");
  CHECK(by[channels::kNews].fallback_depth == 1);

  // In-place statuses: walked mentions settle, later ones stay unverified.
  CHECK(by_channel[channels::kTwitter][0].verification ==
        Verification::polluted);
  CHECK(by_channel[channels::kTwitter][1].verification ==
        Verification::verified);
  CHECK(by_channel[channels::kTwitter][2].verification ==
        Verification::unverified);
  CHECK(by_channel[channels::kForum][0].verification ==
        Verification::polluted);

  REQUIRE(result.transcripts.size() == 1);
  CHECK(result.transcripts[0].guid == "12");
  CHECK(result.transcripts[0].on_topic);
}

// ---------------------------------------------------------------------------
// statistics
// ---------------------------------------------------------------------------

TEST_CASE("integer percent rounds half up") {
  CHECK(percent_of(1, 8) == 13);
  CHECK(percent_of(39, 66) == 59);
  CHECK(percent_of(171, 586) == 29);
  CHECK(percent_of(1, 200) == 1);  // exactly .5 rounds up
  CHECK(percent_of(0, 5) == 0);
  CHECK(percent_of(5, 5) == 100);
  CHECK(percent_of(3, 0) == 0);
}

TEST_CASE("fixed-point minutes round half away from zero") {
  CHECK(format_minutes(-1'296'000, 1, 1) == "-21.6");
  CHECK(format_minutes(-2400, 2, 2) == "-0.02");
  CHECK(format_minutes(93'000, 1, 1) == "+1.6");
  CHECK(format_minutes(-93'000, 1, 1) == "-1.6");
  CHECK(format_minutes(72'000, 1, 2) == "+1.20");
  CHECK(format_minutes(0, 1, 1) == "0.0");
  CHECK(format_minutes(0, 1, 2) == "0.00");
  CHECK(format_minutes(150'000, 1, 2) == "+2.50");
}

namespace {

ChannelEarliest earliest(const std::string& event_id,
                         const std::string& channel, TimeMs ts) {
  ChannelEarliest ce;
  ce.event_id = event_id;
  ce.channel = channel;
  if (channel == channels::kTwitter) {
    ce.mention = tweet("1", ts, "body");
  } else {
    ce.mention = item(channel, "d", ts, "title");
  }
  ce.mention.verification = Verification::verified;
  return ce;
}

}  // namespace

TEST_CASE("winner shares split millisecond ties exactly") {
  std::map<std::string, std::vector<ChannelEarliest>> by_event;
  by_event["e1"] = {earliest("e1", channels::kTwitter, 100),
                    earliest("e1", channels::kNews, 200)};
  by_event["e2"] = {earliest("e2", channels::kNews, 500),
                    earliest("e2", channels::kBluesky, 500)};
  by_event["e3"] = {};  // no evidence, no winner

  const auto rows = winner_shares(by_event);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].channel == channels::kTwitter);
  CHECK(rows[0].win_units == kWinUnit);
  CHECK(rows[1].channel == channels::kBluesky);  // tie broken by name
  CHECK(rows[1].win_units == kWinUnit / 2);
  CHECK(rows[2].channel == channels::kNews);
  CHECK(rows[2].win_units == kWinUnit / 2);
  CHECK(rows[1].wins() == doctest::Approx(0.5));
}

TEST_CASE("paired deltas need both a tweet and a news article") {
  std::map<std::string, std::vector<ChannelEarliest>> by_event;
  by_event["both"] = {earliest("both", channels::kTwitter, 1000),
                      earliest("both", channels::kNews, 61'000)};
  by_event["x-only"] = {earliest("x-only", channels::kTwitter, 10)};
  by_event["news-only"] = {earliest("news-only", channels::kNews, 10)};

  const auto deltas = paired_deltas(by_event);
  REQUIRE(deltas.size() == 1);
  CHECK(deltas[0].event_id == "both");
  CHECK(deltas[0].delta_ms() == 60'000);
  CHECK(deltas[0].delta_min() == doctest::Approx(1.0));
}

TEST_CASE("latency summary matches the reference statistics") {
  const std::vector<TimeMs> table_a = {-426'000,   -600'000,   -672'000,
                                       -1'920'000, -2'004'000, -3'222'000};
  std::vector<PairedDelta> deltas;
  int i = 0;
  for (const TimeMs ms : table_a) {
    PairedDelta d;
    d.event_id = "e" + std::to_string(i++);
    d.t_x = 0;
    d.t_news = ms;
    deltas.push_back(d);
  }
  const LatencySummary s = summarize_latency(deltas);
  CHECK(s.n == 6);
  CHECK(s.x_first_count == 0);
  CHECK(format_minutes(s.median_num_ms, s.median_den, 1) == "-21.6");
  CHECK(format_minutes(s.q1_ms, 1, 1) == "-33.4");
  CHECK(format_minutes(s.q3_ms, 1, 1) == "-10.0");

  std::vector<long long> ms(table_a.begin(), table_a.end());
  CHECK(*s.median_min == doctest::Approx(oracle::median_minutes(ms)));
  CHECK(*s.q1_min == doctest::Approx(oracle::quantile_minutes(ms, 1)));
  CHECK(*s.q3_min == doctest::Approx(oracle::quantile_minutes(ms, 3)));

  CHECK(summarize_latency({}).n == 0);
  CHECK_FALSE(summarize_latency({}).median_min.has_value());
}

TEST_CASE("hit rates bucket events and warn on unknown categories") {
  std::vector<Event> events;
  auto add = [&](const std::string& id, const std::string& cat) {
    Event e = event_of("T " + id, "D");
    e.event_id = id;
    e.category = cat;
    events.push_back(e);
  };
  add("s1", category::kSports);
  add("s2", category::kSports);
  add("p1", category::kPolitics);
  add("weird", "interpretive_dance");

  std::map<std::string, std::vector<ChannelEarliest>> by_event;
  by_event["s1"] = {earliest("s1", channels::kNews, 5)};
  by_event["weird"] = {earliest("weird", channels::kNews, 5)};

  std::vector<std::string> warnings;
  const auto rows = hit_rates(events, by_event, &warnings);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("interpretive_dance") != std::string::npos);

  // sports, politics, other (hosting the unknown), then the "all" row;
  // macro_crypto is absent because it has no events.
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].category == category::kSports);
  CHECK(rows[0].hits == 1);
  CHECK(rows[0].total == 2);
  CHECK(rows[1].category == category::kPolitics);
  CHECK(rows[1].total == 1);
  CHECK(rows[2].category == category::kOther);
  CHECK(rows[2].hits == 1);
  CHECK(rows[3].category == "all");
  CHECK(rows[3].hits == 2);
  CHECK(rows[3].total == 4);
}

TEST_CASE("paired table renders pv or category depending on the sample") {
  Event a = event_of("Jentar Marden", "bullet");
  a.event_id = "a1";
  a.attention_prior = 1'940'000.4;  // rounds to the nearest pageview
  Event b = event_of("Will the spring match settle yes?", "market",
                     Surface::polymarket);
  b.event_id = "b1";
  b.category = category::kSports;

  SampleAnalytics s;
  PairedDelta d;
  d.event_id = "a1";
  d.t_x = 3'222'000;
  d.t_news = 0;
  s.paired = {d};
  const auto ta = render_paired(s, {a}, /*decimals=*/1);
  CHECK(ta.csv ==
        "event,pv,delta_min\n"
        "Jentar Marden,1940000,-53.7\n");

  d.event_id = "b1";
  d.t_x = 1200;
  d.t_news = 0;
  s.paired = {d};
  const auto tb = render_paired(s, {b}, /*decimals=*/2);
  CHECK(tb.csv ==
        "event,category,delta_min\n"
        "Will the spring match settle yes?,spt,-0.02\n");
}

TEST_CASE("paired rows sort by delta then title") {
  Event e1 = event_of("Zeta", "z");
  e1.event_id = "z";
  Event e2 = event_of("Alpha", "a");
  e2.event_id = "a";
  Event e3 = event_of("Midway", "m");
  e3.event_id = "m";

  SampleAnalytics s;
  auto mk = [](const std::string& id, TimeMs delta) {
    PairedDelta d;
    d.event_id = id;
    d.t_x = 0;
    d.t_news = delta;
    return d;
  };
  // Two ties at -60000 sort by title: Alpha before Zeta.
  s.paired = {mk("z", -60'000), mk("a", -60'000), mk("m", -120'000)};
  const auto t = render_paired(s, {e1, e2, e3}, 1);
  const std::string expected =
      "event,pv,delta_min\n"
      "Midway,0,-2.0\n"
      "Alpha,0,-1.0\n"
      "Zeta,0,-1.0\n";
  CHECK(t.csv == expected);
}

// ---------------------------------------------------------------------------
// probe
// ---------------------------------------------------------------------------

namespace {

// Provider wrapper that refuses one specific rendered query.
class VetoProvider : public ProviderClient {
 public:
  VetoProvider(ProviderClient& inner, std::string vetoed_rendered)
      : inner_(inner), vetoed_(std::move(vetoed_rendered)) {}

  SavedQuery create_query(const BooleanQuery& query, TimeMs now) override {
    if (query.render() == vetoed_) {
      throw ProviderRequestError(500, "synthetic outage");
    }
    return inner_.create_query(query, now);
  }
  double poll_backfill(const std::string& id, TimeMs now) override {
    return inner_.poll_backfill(id, now);
  }
  std::vector<Mention> pull_mentions(
      const std::string& id, const TimeWindow& window,
      const std::optional<std::string>& channel, int page_size) override {
    return inner_.pull_mentions(id, window, channel, page_size);
  }
  void delete_query(const std::string& id) override {
    inner_.delete_query(id);
  }

 private:
  ProviderClient& inner_;
  std::string vetoed_;
};

}  // namespace

TEST_CASE("the probe surveys every level and survives a failing one") {
  std::vector<FixtureDoc> docs;
  {
    FixtureDoc d;
    d.channel = channels::kNews;
    d.guid = "d1";
    d.ts = 700;
    d.text = "alpha coverage begins";
    d.title = "Alpha coverage";
    docs.push_back(d);
    d.guid = "d2";
    d.ts = 900;
    d.text = "beta follow-up thread";
    d.title = "Beta follow-up";
    docs.push_back(d);
  }
  MockProvider mock(std::move(docs));
  mock.set_default_backfill({75.0});

  BooleanQuery l1;
  l1.kind = QueryKind::x_permissive;
  l1.clusters = {{"alpha"}};
  BooleanQuery l2 = l1;
  l2.clusters = {{"alpha", "beta"}};
  BooleanQuery vetoed = l1;
  vetoed.clusters = {{"gamma"}};

  VetoProvider provider(mock, vetoed.render());
  RateLimiter limiter(100, 600 * kMsPerSecond);
  SimClock clock(0);

  const Event e = event_of("Alpha event", "alpha description");
  const auto report = probe_event(e, {l1, vetoed, l2}, provider, limiter,
                                  clock, TimeWindow{0, 10'000});

  REQUIRE(report.levels.size() == 3);
  CHECK(report.event_id == e.event_id);

  CHECK(report.levels[0].level == 1);
  CHECK(report.levels[0].hits == 1);
  CHECK_FALSE(report.levels[0].errored);
  CHECK(report.levels[0].earliest_ts == 700);
  CHECK(report.levels[0].earliest_title == "Alpha coverage");

  CHECK(report.levels[1].errored);
  CHECK(report.levels[1].hits == 0);

  CHECK(report.levels[2].hits == 2);
  CHECK(report.levels[2].earliest_ts == 700);

  // Each healthy level runs a full 5-request session with one poll; the
  // vetoed level burns its create slot before the provider refuses.
  CHECK(limiter.grant_log().size() == 11);
}

// ---------------------------------------------------------------------------
// stores and the manifest
// ---------------------------------------------------------------------------

TEST_CASE("atomic writes, checksums, and jsonl round trips") {
  const fs::path dir = temp_dir("store");
  atomic_write_file(dir / "deep" / "nested.txt", "payload");
  CHECK(read_file(dir / "deep" / "nested.txt") == "payload");
  CHECK_FALSE(fs::exists(dir / "deep" / "nested.txt.tmp"));

  atomic_write_file(dir / "a.txt", "same bytes");
  atomic_write_file(dir / "b.txt", "same bytes");
  atomic_write_file(dir / "c.txt", "other bytes");
  CHECK(file_checksum_hex(dir / "a.txt") == file_checksum_hex(dir / "b.txt"));
  CHECK(file_checksum_hex(dir / "a.txt") != file_checksum_hex(dir / "c.txt"));
  CHECK(file_checksum_hex(dir / "a.txt").size() == 16);

  RunStore store(dir / "runs", "r1");
  CHECK(store.root() == dir / "runs" / "r1");
  CHECK(store.rel(store.mentions_path("e1")) == "mentions/e1.jsonl");

  std::vector<Mention> mentions = {
      tweet("42", 500, "hello"),
      item(channels::kNews, "d9", 600, "headline", "snippet text"),
  };
  store.write_jsonl(store.mentions_path("e1"), mentions);
  const auto back = store.read_jsonl<Mention>(store.mentions_path("e1"));
  CHECK(back == mentions);
  CHECK(store.read_jsonl_raw(store.mentions_path("e1")).size() == 2);
  fs::remove_all(dir);
}

TEST_CASE("the manifest round-trips and refuses corrupt files") {
  const fs::path dir = temp_dir("manifest");

  RunManifest m;
  m.run_id = "r1";
  m.created_at = 123;
  m.config = {{"provider_mode", "mock"}};
  m.config_hash = "abcd";
  m.request_count = 42;
  m.log_line(5, stages::kSeed, "started");
  m.advance_event("e1", stages::kSeed);
  m.advance_event("e1", stages::kDraft);
  m.advance_event("e1", stages::kSeed);  // never moves backwards
  m.event("e1").pull_counts["news"] = 3;
  m.event("e1").errors.push_back("boom");
  m.complete_stage(stages::kSeed, 7, {{"events.jsonl", "ff"}});

  m.save(dir / "manifest.json");
  const RunManifest back = RunManifest::load(dir / "manifest.json");
  CHECK(back.run_id == "r1");
  CHECK(back.created_at == 123);
  CHECK(back.config_hash == "abcd");
  CHECK(back.request_count == 42);
  CHECK(back.events.at("e1").stage_reached == stages::kDraft);
  CHECK(back.events.at("e1").reached(stages::kSeed));
  CHECK_FALSE(back.events.at("e1").reached(stages::kPull));
  CHECK(back.events.at("e1").pull_counts.at("news") == 3);
  CHECK(back.events.at("e1").errors ==
        std::vector<std::string>{"boom"});
  CHECK(back.stage_completed(stages::kSeed));
  CHECK_FALSE(back.stage_completed(stages::kDraft));
  CHECK(back.stages.at(stages::kSeed).outputs.at("events.jsonl") == "ff");
  REQUIRE(back.log.size() == 1);
  CHECK(back.log[0].message == "started");

  CHECK_THROWS_AS(RunManifest::load(dir / "missing.json"),
                  std::runtime_error);
  atomic_write_file(dir / "corrupt.json", "{ not json");
  CHECK_THROWS_AS(RunManifest::load(dir / "corrupt.json"),
                  std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("stage order and channel sets") {
  CHECK(stage_index(stages::kSeed) == 0);
  CHECK(stage_index(stages::kAnalyze) == 5);
  CHECK(stage_index("lunch") == -1);
  CHECK(stage_order().size() == 6);

  const ChannelSet channels = ChannelSet::defaults();
  CHECK(channels.size() == 9);
  CHECK(channels.contains("twitter"));
  CHECK(channels.contains("news"));
  CHECK(channels.contains("reddit"));
  CHECK(channels.contains("blog"));
  CHECK_FALSE(channels.contains("pigeon"));
  CHECK_THROWS_AS(ChannelSet::with_extras("twitter", "blog"),
                  std::invalid_argument);
  CHECK_THROWS_AS(ChannelSet::with_extras("", "blog"),
                  std::invalid_argument);
}
