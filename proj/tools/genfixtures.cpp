// Deterministic fixture-corpus generator.
//
// Writes the complete mock fixture tree — WCEP month page + pageview table,
// Polymarket markets + trades, per-channel social-listening docs, and oEmbed
// payloads — then replays a full pipeline run against it in a scratch
// directory and asserts every number the analytics tables are expected to
// reproduce.  The corpus is pure index arithmetic over fantasy name pools,
// so regeneration is byte-stable:
//
//   ./build/tools/genfixtures --out fixtures
//
// Run from the repository root (data/us_lexicon.txt and data/prompts are
// resolved relative to the working directory).

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "newsrace/analytics.hpp"
#include "newsrace/boolean_query.hpp"
#include "newsrace/channel.hpp"
#include "newsrace/chrono.hpp"
#include "newsrace/manifest.hpp"
#include "newsrace/pipeline.hpp"
#include "newsrace/provider.hpp"
#include "newsrace/store.hpp"
#include "newsrace/text.hpp"
#include "newsrace/types.hpp"
#include "newsrace/wcep.hpp"
#include "newsrace/xrecover.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace newsrace;

#define CHECK(cond, msg)                                                  \
  do {                                                                    \
    if (!(cond)) {                                                        \
      throw std::runtime_error(std::string("fixture check failed at ") + \
                               __FILE__ + ":" + std::to_string(__LINE__) + \
                               ": " + std::string(msg));                  \
    }                                                                     \
  } while (0)

namespace {

// ---------------------------------------------------------------------------
// Name pools.  Every generated proper noun is a "First Second" pair drawn
// from two 45-word pools of invented words; pool_name(i) is injective for
// i < 45*45, so disjoint index ranges can never collide.  The audit below
// proves no pool word hides a substring that any matcher cares about.
// ---------------------------------------------------------------------------

const std::vector<std::string>& first_words() {
  static const std::vector<std::string> kWords = {
      "Valtor",  "Brenk",   "Dorval",  "Kelmar",  "Tarvik",  "Solmen",
      "Drev",    "Polnar",  "Vesk",    "Tromel",  "Zarvel",  "Helmok",
      "Quorv",   "Jentar",  "Milvok",  "Ferdan",  "Ostrel",  "Balrek",
      "Tindor",  "Corvel",  "Ruvald",  "Selmar",  "Wulfen",  "Yandor",
      "Plevik",  "Grontar", "Ulvek",   "Nordven", "Ashkel",  "Belvor",
      "Trosk",   "Karmel",  "Devlar",  "Fenrok",  "Halvek",  "Ivorn",
      "Jalvek",  "Kronmel", "Lurven",  "Morvek",  "Norvel",  "Ovrand",
      "Pelkar",  "Ralvok",  "Survek"};
  return kWords;
}

const std::vector<std::string>& second_words() {
  static const std::vector<std::string> kWords = {
      "Marden",  "Veldros", "Kintor",  "Sarnel",  "Tovrek",  "Welgar",
      "Yolvek",  "Zemrin",  "Ardvel",  "Bolsek",  "Cravent", "Drolmek",
      "Eskarn",  "Fandrek", "Garvel",  "Hosmer",  "Irvalt",  "Jormek",
      "Kelvros", "Lomvar",  "Melkor",  "Norvik",  "Ostvel",  "Pendrak",
      "Quilmar", "Rovensk", "Stelvar", "Tornek",  "Ulmrek",  "Varnos",
      "Welkin",  "Xandrel", "Yeldrov", "Zolmek",  "Arbrost", "Beldrav",
      "Cormek",  "Dunvrek", "Elstrom", "Folrek",  "Gelmost", "Hindrov",
      "Imrek",   "Jolvex",  "Kandrel"};
  return kWords;
}

std::string pool_name(int i) {
  const auto& f = first_words();
  const auto& s = second_words();
  CHECK(i >= 0 && i < static_cast<int>(f.size() * s.size()),
        "pool index out of range");
  return f[i % f.size()] + " " + s[(i / f.size()) % s.size()];
}

// U.S. markers that make a WCEP bullet pass the relevance lexicon.  Doc
// texts must never contain any of these (queries carry them as OR terms).
const std::vector<std::string>& markers() {
  static const std::vector<std::string> kMarkers = {
      "California", "Texas",   "Florida",  "Ohio",        "Colorado",
      "Oregon",     "Michigan", "Arizona", "Nevada",      "Utah",
      "Kansas",     "Iowa",    "Maine",    "Idaho",       "Montana",
      "Vermont",    "Delaware", "Wyoming", "Alaska",      "Hawaii",
      "Chicago",    "Seattle", "Denver",   "Boston",      "Miami",
      "Atlanta",    "Detroit", "Minneapolis", "Baltimore", "Pentagon"};
  return kMarkers;
}

// Substrings that must never occur inside a pool word: market categoriser
// keys, query broadeners, event-vocabulary stems, and everything else the
// matchers treat as a signal.
const std::vector<std::string>& hazard_substrings() {
  static const std::vector<std::string> kHazards = {
      // categorise_market keys
      " vs", " v ", "game", "match", "cup", "league", "nba", "nfl", "ufc",
      "masters", "premier", "liga", "madrid", "barcelona", "champions",
      "playoff", "final", "wins 20", "tournament", "grand prix", "open",
      "kickoff", "semifinal", "election", "president", "prime minister",
      "minister", "war", "conflict", "ceasefire", "senate", "parliament",
      "congress", "coup", "sanction", "treaty", "khamenei", "government",
      "out by", "resign", "impeach", "vote", "referendum", "border",
      "strike on", "invasion", "bitcoin", "btc", "ethereum", "eth", "crypto",
      "fed ", "rate cut", "rate hike", "cpi", "inflation", "gdp",
      "recession", "stock", "market cap", "ipo", "apple", "openai", "spacex",
      "launch", "ai model", "chip", "earnings", "tariff",
      // query broadeners
      "breaking", "news", "update", "report", "latest", "today", "live",
      "now", "new", "world",
      // event-vocabulary stems that could turn an unrelated body on-topic
      "win", "won", "out", "cut", "ban", "sign", "defeat", "beat", "elect",
      "announce", "release", "approve", "deal", "agree", "raise", "record",
      "verdict", "arrest", "charge", "crash", "blast", "dead", "death",
      "fire", "flood", "strike",
      // month names (prohibited-entity filter input)
      "january", "february", "march", "april", "may", "june", "july",
      "august", "september", "october", "november", "december"};
  return kHazards;
}

void audit_pools(const std::vector<LexiconTerm>& lexicon) {
  std::vector<std::string> words = first_words();
  const auto& seconds = second_words();
  words.insert(words.end(), seconds.begin(), seconds.end());
  CHECK(first_words().size() == 45 && seconds.size() == 45,
        "pool sizes changed");

  for (const std::string& w : words) {
    for (const std::string& h : hazard_substrings()) {
      CHECK(!text::contains_ci(w, h),
            "pool word '" + w + "' contains hazard '" + h + "'");
    }
    for (const auto& term : lexicon) {
      const bool hit = term.exact_case ? text::contains_cs(w, term.text)
                                       : text::contains_ci(w, term.text);
      CHECK(!hit, "pool word '" + w + "' trips lexicon term '" + term.text +
                      "'");
    }
    for (const std::string& m : markers()) {
      CHECK(!text::contains_ci(w, m) && !text::contains_ci(m, w),
            "pool word '" + w + "' collides with marker '" + m + "'");
    }
    CHECK(!text::contains_ci(w, "pakistan") &&
              !text::contains_ci(w, "islamabad") &&
              !text::contains_ci(w, "qalandar") &&
              !text::contains_ci(w, "khel") &&
              !text::contains_ci(w, "karachi") &&
              !text::contains_ci(w, "trophy"),
          "pool word '" + w + "' collides with the probe vocabulary");
  }
  // No pool word may be a substring of another: two-word names must only
  // ever match their exact selves.
  for (const std::string& a : words) {
    for (const std::string& b : words) {
      if (a == b) continue;
      CHECK(!text::contains_ci(a, b),
            "pool word '" + b + "' is a substring of '" + a + "'");
    }
  }
}

// ---------------------------------------------------------------------------
// Plan structures.
// ---------------------------------------------------------------------------

struct AEvent {
  int k = 0;
  std::string article;
  std::string prim;
  std::string sec;
  std::string marker;
  std::string heading;
  std::string category;  // bucketed category id
  int day = 0;
  long long total = 0;  // two-day pageview sum
  TimeMs t_e = 0;
};

struct BEvent {
  int i = 0;
  std::string market_id;
  std::string slug;
  std::string title;
  std::string question;
  std::string prim;
  std::string sec;
  std::string category;
  TimeMs t_e = 0;
  long long cents = 0;
};

struct Bullet {
  int day = 0;
  std::string heading;
  std::string article;
  std::string plain;  // stripped text of the <li>
  std::string li;     // inner HTML of the <li>
  bool relevant = false;
  long long total = -1;  // pageview sum; only ranked candidates carry one
};

struct MarketRow {
  std::string id, slug, title, question, volume_usd;
  TimeMs rs = 0, re = 0;
  bool binary = true;
};

struct TradeRow {
  std::string market_id;
  TimeMs ts = 0;
  std::string usd;
};

struct Doc {
  std::string owner;  // "a<k>", "b<i>", or "bg" for background noise
  std::string channel;
  TimeMs ts = 0;
  std::string guid;
  std::string text;
  std::optional<std::string> title;
  std::optional<std::string> snippet;
  bool tweet = false;
  std::string body;          // oEmbed <p> payload for tweets
  bool oembed = true;        // false: the oEmbed fixture file is withheld
  std::string expected;      // "verified" | "polluted" (post-verification)
};

struct Plans {
  std::vector<AEvent> a;
  std::vector<BEvent> b;
  std::vector<Bullet> bullets;
  std::map<std::string, long long> pageviews;  // "Article|YYYY-MM-DD" -> views
  std::vector<MarketRow> markets;
  std::vector<TradeRow> trades;
  std::vector<Doc> docs;
  TimeMs deltas_a[6] = {-3222000, -2004000, -1920000,
                        -672000,  -600000,  -426000};  // k6..k11
  TimeMs deltas_b[16] = {-2053800, -37200, -30000,  -15600,  -12000,   -6000,
                         -3600,    -1200,  -1200,   -1200,   72000,    75600,
                         150000,   851400, 8628000, 33130200};  // i3..i18
};

Date april(int day) { return Date{2026, 4, day}; }

Date day_after(const Date& d) {
  if (d.day < 30) return Date{d.year, d.month, d.day + 1};
  return Date{2026, 5, 1};
}

// ---------------------------------------------------------------------------
// Sample A: the WCEP month page.
// ---------------------------------------------------------------------------

int a_article_index(int k) {
  if (k < 3) return 0;               // three-bullet chain, exercises the cap
  if (k <= 11) return 10 + (k - 3);  // distinct singles (paired events live here)
  if (k <= 29) return 1 + (k - 12) / 2;  // two bullets per article
  return 19 + (k - 30);
}

std::string a_heading(int k) {
  if (k < 5) return "Sports";
  if (k < 34) {
    static const char* kCycle[] = {"Politics and elections",
                                   "Armed conflicts and attacks",
                                   "Law and crime"};
    return kCycle[(k - 5) % 3];
  }
  if (k < 44) {
    static const char* kCycle[] = {"Business and economy",
                                   "Science and technology"};
    return kCycle[(k - 34) % 2];
  }
  static const char* kCycle[] = {"Disasters and accidents",
                                 "Health and environment", "Arts and culture"};
  return kCycle[(k - 44) % 3];
}

std::string a_category(int k) {
  if (k < 5) return "sports";
  if (k < 34) return "politics";
  if (k < 44) return "macro_crypto";
  return "other";
}

// Bullet text for a ranked candidate.  The leading "The" keeps the article
// run separate from the title during entity extraction, and the verb is an
// event-vocabulary word so query drafting finds a usable cluster.
std::string a_bullet_plain(const std::string& category, const std::string& art,
                           const std::string& prim, const std::string& sec,
                           const std::string& marker) {
  if (category == "sports") {
    return "The " + art + " commentary notes " + prim + " defeats " + sec +
           " before the " + marker + " crowd.";
  }
  if (category == "politics") {
    return "The " + art + " desk says " + prim + " defeats " + sec +
           " in the " + marker + " tally.";
  }
  if (category == "macro_crypto") {
    return "The " + art + " note says " + prim + " launches " + sec +
           " before the " + marker + " bell.";
  }
  return "The " + art + " diary says " + prim + " announces " + sec +
         " beside the " + marker + " ridge.";
}

std::string wiki_link(const std::string& article) {
  std::string slug = article;
  std::replace(slug.begin(), slug.end(), ' ', '_');
  return "<a href=\"/wiki/" + slug + "\" title=\"" + article + "\">" +
         article + "</a>";
}

// The <li> inner HTML: the plain text with the first article mention linked.
std::string linkify(const std::string& plain, const std::string& article) {
  const size_t pos = plain.find(article);
  CHECK(pos != std::string::npos, "article name missing from bullet");
  return plain.substr(0, pos) + wiki_link(article) +
         plain.substr(pos + article.size());
}

void build_sample_a(Plans& p) {
  // Ranked winners: two per day over days 1-25, strictly descending totals.
  for (int k = 0; k < 50; ++k) {
    AEvent e;
    e.k = k;
    e.article = pool_name(a_article_index(k));
    e.prim = pool_name(100 + 2 * k);
    e.sec = pool_name(101 + 2 * k);
    e.marker = markers()[k % markers().size()];
    e.heading = a_heading(k);
    e.category = a_category(k);
    e.day = 1 + (k % 25);
    e.total = 2'000'000 - 10'000LL * k;
    e.t_e = midnight_ms(april(e.day));
    p.a.push_back(e);

    Bullet b;
    b.day = e.day;
    b.heading = e.heading;
    b.article = e.article;
    b.plain = a_bullet_plain(e.category, e.article, e.prim, e.sec, e.marker);
    b.li = linkify(b.plain, e.article);
    b.relevant = true;
    b.total = e.total;
    p.bullets.push_back(b);
  }

  // Two more bullets for the same article as k0..k2: they rank 4th and 5th
  // overall but the per-article cap (3) knocks them out.
  for (int x = 0; x < 2; ++x) {
    Bullet b;
    b.day = 6 + x;
    b.heading = "Politics and elections";
    b.article = pool_name(0);
    b.plain = a_bullet_plain("politics", b.article, pool_name(200 + 2 * x),
                             pool_name(201 + 2 * x),
                             markers()[(50 + x) % markers().size()]);
    b.li = linkify(b.plain, b.article);
    b.relevant = true;
    b.total = 1'979'000 - 1'000LL * x;
    p.bullets.push_back(b);
  }

  // Low-attention relevant bullets: pass the lexicon but never rank.
  for (int j = 0; j < 119; ++j) {
    Bullet b;
    b.day = 1 + (j % 30);
    b.heading = "International relations";
    b.article = pool_name(210 + j);
    b.plain = "In " + markers()[j % markers().size()] + ", the " + b.article +
              " program draws steady interest.";
    b.li = linkify(b.plain, b.article);
    b.relevant = true;
    b.total = 5'000 - 10LL * j;
    p.bullets.push_back(b);
  }

  // Foreign-flavoured fillers: no lexicon term anywhere.
  static const char* kAllHeadings[] = {
      "Armed conflicts and attacks", "Arts and culture",
      "Business and economy",        "Disasters and accidents",
      "Health and environment",      "International relations",
      "Law and crime",               "Politics and elections",
      "Science and technology",      "Sports"};
  for (int f = 0; f < 415; ++f) {
    Bullet b;
    b.day = 1 + (f % 30);
    b.heading = kAllHeadings[f % 10];
    b.article = pool_name(400 + f);
    const std::string other = pool_name(1300 + f);
    switch (f % 3) {
      case 0:
        b.plain = "The council of " + other + " ratifies the " + b.article +
                  " accord.";
        break;
      case 1:
        b.plain = "Delegates from " + other + " endorse the " + b.article +
                  " charter.";
        break;
      default:
        b.plain = "The " + b.article + " assembly adjourns after statements from " +
                  other + ".";
        break;
    }
    b.li = linkify(b.plain, b.article);
    b.relevant = false;
    p.bullets.push_back(b);
  }

  CHECK(p.bullets.size() == 586, "bullet census drifted");

  // Pageview series: for each article, walk its ranked bullets by date and
  // solve day/day+1 views so consecutive two-day sums stay consistent.
  std::map<std::string, std::vector<std::pair<int, long long>>> per_article;
  for (const Bullet& b : p.bullets) {
    if (b.total >= 0) per_article[b.article].push_back({b.day, b.total});
  }
  for (auto& [article, series] : per_article) {
    std::sort(series.begin(), series.end());
    std::map<int, long long> v;  // day -> views
    for (const auto& [d, total] : series) {
      const bool has0 = v.count(d) != 0;
      const bool has1 = v.count(d + 1) != 0;
      if (!has0 && !has1) {
        v[d] = total * 3 / 5;
        v[d + 1] = total - v[d];
      } else if (has0 && !has1) {
        v[d + 1] = total - v[d];
      } else if (!has0 && has1) {
        v[d] = total - v[d + 1];
      } else {
        CHECK(v[d] + v[d + 1] == total, "pageview series over-constrained");
      }
      CHECK(v[d] >= 0 && v[d + 1] >= 0, "negative pageview solved");
    }
    for (const auto& [d, views] : v) {
      const Date date = d <= 30 ? april(d) : Date{2026, 5, d - 30};
      p.pageviews[article + "|" + format_date(date)] = views;
    }
  }
}

std::string render_month_page(const Plans& p) {
  // day -> heading -> list of <li> bodies, headings in canonical order.
  static const char* kOrder[] = {
      "Armed conflicts and attacks", "Arts and culture",
      "Business and economy",        "Disasters and accidents",
      "Health and environment",      "International relations",
      "Law and crime",               "Politics and elections",
      "Science and technology",      "Sports"};
  std::map<int, std::map<std::string, std::vector<std::string>>> days;
  for (const Bullet& b : p.bullets) days[b.day][b.heading].push_back(b.li);

  std::string html = "<div class=\"mw-parser-output\">\n";
  for (int d = 1; d <= 30; ++d) {
    const auto it = days.find(d);
    if (it == days.end()) continue;
    html += "<div class=\"current-events\" id=\"2026_April_" +
            std::to_string(d) + "\">\n";
    html += "<div class=\"current-events-content\">\n";
    for (const char* heading : kOrder) {
      const auto hit = it->second.find(heading);
      if (hit == it->second.end()) continue;
      html += "<p><b>" + std::string(heading) + "</b></p>\n<ul>\n";
      for (const std::string& li : hit->second) {
        html += "<li>" + li + "</li>\n";
      }
      html += "</ul>\n";
    }
    html += "</div>\n</div>\n";
  }
  html += "</div>\n";
  return html;
}

// ---------------------------------------------------------------------------
// Sample B: Polymarket markets and trades.
// ---------------------------------------------------------------------------

std::string b_category(int i) {
  if (i < 66) return "sports";
  if (i < 94) return "politics";
  if (i < 103) return "macro_crypto";
  return "other";
}

std::string lower(std::string s) { return text::to_lower(std::move(s)); }

void build_sample_b(Plans& p) {
  const TimeMs rs = midnight_ms(Date{2026, 3, 1});
  const TimeMs re = midnight_ms(Date{2026, 6, 1});

  for (int rank = 0; rank < 130; ++rank) {
    const long long cents = 1'000'000'000 - 1'000'000LL * rank;
    MarketRow m;
    m.id = "m" + std::string(rank < 10 ? "00" : rank < 100 ? "0" : "") +
           std::to_string(rank);
    m.volume_usd = std::to_string(cents / 100);
    m.rs = rs;
    m.re = re;
    m.binary = true;

    if (rank < 109) {
      const int i = rank;
      BEvent e;
      e.i = i;
      e.market_id = m.id;
      e.category = b_category(i);
      e.prim = i == 0 ? "Qalandar Khel" : pool_name(900 + 2 * i);
      e.sec = i == 0 ? "Karachi Trophy" : pool_name(901 + 2 * i);
      e.slug = i < 66 ? "series-" + std::to_string(i / 2)
                      : "solo-" + std::to_string(i);
      if (i == 0) {
        e.title = "karachi trophy deciders in pakistan";
        e.question = "Will Qalandar Khel take the Karachi Trophy final?";
      } else if (e.category == "sports") {
        e.title = "spring fixture " + std::to_string(i) + ": " +
                  lower(e.prim) + " against " + lower(e.sec);
        e.question =
            "Will " + e.prim + " defeat " + e.sec + " in the spring match?";
      } else if (e.category == "politics") {
        e.title = "cabinet watch " + std::to_string(i) + ": " + lower(e.prim) +
                  " standing";
        e.question = "Will " + e.prim + " resign as " + e.sec + " minister?";
      } else if (e.category == "macro_crypto") {
        e.title = "ticker desk " + std::to_string(i) + ": " + lower(e.prim) +
                  " listing";
        e.question = "Will " + e.prim + " cut the " + e.sec +
                     " stock offering?";
      } else {
        e.title = "culture notes " + std::to_string(i) + ": " + lower(e.prim) +
                  " mural";
        e.question = "Will " + e.prim + " announce the " + e.sec + " mural?";
      }
      e.t_e = midnight_ms(april(1 + (i % 28))) + (12 + i / 28) * kMsPerHour;
      e.cents = cents;

      m.slug = e.slug;
      m.title = e.title;
      m.question = e.question;
      p.b.push_back(e);

      // Trades: paired events carry a three-trade tape whose one-hour
      // rolling-dollar peak sits exactly at t_e; everything else gets a
      // single decisive print at t_e.
      if (i >= 3 && i <= 18) {
        p.trades.push_back({m.id, e.t_e - 2 * kMsPerHour, "100"});
        p.trades.push_back({m.id, e.t_e, "50000"});
        p.trades.push_back({m.id, e.t_e + 90 * kMsPerMinute, "200"});
      } else {
        p.trades.push_back({m.id, e.t_e, "50000"});
      }
    } else {
      // Passes every filter but shows no in-scan trade: dropped at pinning.
      const int d = rank - 109;
      const std::string prim = pool_name(1200 + 2 * d);
      const std::string sec = pool_name(1201 + 2 * d);
      m.slug = "drop-" + std::to_string(rank);
      m.title = "ledger series " + std::to_string(rank) + ": " + lower(prim) +
                " watch";
      m.question =
          "Will " + prim + " defeat " + sec + " in the autumn opener?";
      if (d < 10) {
        p.trades.push_back(
            {m.id, midnight_ms(Date{2026, 3, 25}) + 12 * kMsPerHour, "750"});
      }
    }
    p.markets.push_back(m);
  }

  // Rejected rows: two per filter, none survive to pinning.
  for (int r = 0; r < 8; ++r) {
    const std::string prim = pool_name(1250 + 2 * r);
    const std::string sec = pool_name(1251 + 2 * r);
    MarketRow m;
    m.id = "x" + std::to_string(r);
    m.slug = "rej-" + std::to_string(r);
    m.title = "margin notes " + std::to_string(r) + ": " + lower(prim) +
              " docket";
    m.question = "Will " + prim + " defeat " + sec + " in the spring match?";
    m.rs = rs;
    m.re = re;
    m.binary = true;
    m.volume_usd = "9000000";
    if (r < 2) {
      m.volume_usd = "50000";  // below the lifetime-volume floor
    } else if (r < 4) {
      m.binary = false;  // categorical market
    } else if (r < 6) {
      m.rs = midnight_ms(Date{2026, 1, 5});  // resolves outside the window
      m.re = midnight_ms(Date{2026, 2, 20});
    } else {
      // Duplicate event titles of two keepers at lower volume: title-level
      // dedupe must discard these, not the originals.
      m.title = p.b[24 + r].title;        // keepers i=30, i=31
      m.question = p.b[24 + r].question;
      m.volume_usd = "500000";
    }
    p.markets.push_back(m);
  }

  CHECK(p.markets.size() == 138, "market census drifted");
  CHECK(p.b.size() == 109, "pinned event census drifted");
}

// ---------------------------------------------------------------------------
// Social-listening docs and oEmbed payloads.
// ---------------------------------------------------------------------------

std::string snowflake_guid(TimeMs ts) {
  CHECK(ts > kTwitterEpochMs, "tweet timestamp precedes the snowflake epoch");
  return std::to_string((ts - kTwitterEpochMs) << 22);
}

struct DocBuilder {
  Plans& p;
  int counter = 0;

  void tweet(const std::string& owner, TimeMs ts, std::string text,
             std::string body, bool oembed, std::string expected) {
    Doc d;
    d.owner = owner;
    d.channel = channels::kTwitter;
    d.ts = ts;
    d.guid = snowflake_guid(ts);
    d.text = std::move(text);
    d.tweet = true;
    d.body = std::move(body);
    d.oembed = oembed;
    d.expected = std::move(expected);
    p.docs.push_back(std::move(d));
  }

  void item(const std::string& owner, const std::string& channel, TimeMs ts,
            std::string text, std::optional<std::string> title,
            std::optional<std::string> snippet, std::string expected) {
    Doc d;
    d.owner = owner;
    d.channel = channel;
    d.ts = ts;
    d.guid = "d" + std::string(5 - std::to_string(counter).size(), '0') +
             std::to_string(counter);
    ++counter;
    d.text = std::move(text);
    d.title = std::move(title);
    d.snippet = std::move(snippet);
    d.expected = std::move(expected);
    p.docs.push_back(std::move(d));
  }

  void verified_item(const std::string& owner, const std::string& channel,
                     TimeMs ts, const std::string& prim,
                     const std::string& sec) {
    item(owner, channel, ts, prim + " briefing recap", prim + " presses ahead",
         "remarks on " + sec + " circulate", "verified");
  }

  void polluted_news(const std::string& owner, TimeMs ts,
                     const std::string& prim) {
    item(owner, channels::kNews, ts, prim + " wire copy",
         "Rolling coverage notes", "general midday roundup", "polluted");
  }
};

std::string verified_body(const std::string& prim, const std::string& sec) {
  return prim + " and " + sec + " confirmed at the venue";
}

void build_docs(Plans& p) {
  DocBuilder d{p};

  // --- Sample A ----------------------------------------------------------
  const std::map<int, std::string> a_singles = {
      {3, channels::kBluesky},        {4, channels::kFacebookPublic},
      {5, channels::kTwitter},        {12, channels::kNews},
      {13, channels::kNews},          {14, channels::kNews},
      {15, channels::kNews},          {16, channels::kNews},
      {17, channels::kNews},          {18, channels::kNews},
      {19, channels::kNews},          {20, channels::kBluesky},
      {21, channels::kBluesky},       {22, channels::kFacebookPublic},
      {23, channels::kFacebookPublic}, {24, channels::kYoutube},
      {25, channels::kForum},         {26, channels::kTwitter},
      {34, channels::kTwitter},       {35, channels::kTwitter},
      {36, channels::kNews},          {37, channels::kNews},
      {38, channels::kBluesky},       {39, channels::kYoutube},
      {44, channels::kNews},          {45, channels::kNews},
      {46, channels::kNews},          {47, channels::kFacebookPublic},
      {48, channels::kFacebookPublic}};
  const std::set<int> a_polluted = {27, 28, 29, 30, 31, 32, 33,
                                    40, 41, 42, 43, 49};

  for (const AEvent& e : p.a) {
    const std::string owner = "a" + std::to_string(e.k);
    if (e.k == 0) {
      // Fallback-walk showcase: unrelated body, off-topic single-keyword
      // body, then a single-keyword body the adjudicator accepts.
      d.tweet(owner, e.t_e + 90 * kMsPerMinute, e.prim + " reaction thread",
              "weekend plans and errands list", true, "polluted");
      d.tweet(owner, e.t_e + 100 * kMsPerMinute,
              e.prim + " reaction thread continues",
              e.prim + " thoughts ahead of the weekend", true, "polluted");
      d.tweet(owner, e.t_e + 110 * kMsPerMinute,
              e.prim + " reaction thread wrap", e.prim + " wins it", true,
              "verified");
    } else if (e.k == 1) {
      // Missing oEmbed payload: no recoverable text, counted as polluted.
      d.tweet(owner, e.t_e + 80 * kMsPerMinute, e.prim + " posting thread",
              "", false, "polluted");
      d.tweet(owner, e.t_e + 95 * kMsPerMinute,
              e.prim + " posting thread later", verified_body(e.prim, e.sec),
              true, "verified");
    } else if (e.k == 2) {
      // A polluted item ahead of the verified one: fallback depth 1.
      d.polluted_news(owner, e.t_e + 70 * kMsPerMinute, e.prim);
      d.verified_item(owner, channels::kNews, e.t_e + 85 * kMsPerMinute,
                      e.prim, e.sec);
    } else if (e.k >= 6 && e.k <= 11) {
      const TimeMs t_news = e.t_e + 2 * kMsPerHour;
      const TimeMs t_x = t_news - p.deltas_a[e.k - 6];  // deltas negative
      d.verified_item(owner, channels::kNews, t_news, e.prim, e.sec);
      d.tweet(owner, t_x, e.prim + " posting thread",
              verified_body(e.prim, e.sec), true, "verified");
    } else if (a_singles.count(e.k) != 0) {
      const std::string& ch = a_singles.at(e.k);
      const TimeMs ts = e.t_e + 120 * kMsPerMinute;
      if (ch == channels::kTwitter) {
        d.tweet(owner, ts, e.prim + " posting thread",
                verified_body(e.prim, e.sec), true, "verified");
      } else {
        d.verified_item(owner, ch, ts, e.prim, e.sec);
      }
    } else {
      CHECK(a_polluted.count(e.k) != 0, "unmapped sample-A role");
      d.polluted_news(owner, e.t_e + 3 * kMsPerHour, e.prim);
      if (e.k == 27) {
        d.item(owner, "reddit", e.t_e + 4 * kMsPerHour,
               e.prim + " wire copy extended", "Daily discussion digest",
               "community chatter compiled", "polluted");
      } else if (e.k == 28) {
        d.item(owner, "blog", e.t_e + 4 * kMsPerHour,
               e.prim + " wire copy annotated", "Weekly notebook entry",
               "assorted links and notes", "polluted");
      }
    }
  }

  // --- Sample B ----------------------------------------------------------
  const std::vector<std::string> sports_singles = {
      channels::kTwitter, channels::kTwitter, channels::kBluesky,
      channels::kTwitter, channels::kBluesky, channels::kNews,
      channels::kTwitter, channels::kBluesky, channels::kTwitter,
      channels::kFacebookPublic, channels::kTwitter, channels::kBluesky,
      channels::kYoutube, channels::kTwitter, channels::kInstagramPublic,
      channels::kTwitter, channels::kBluesky, channels::kTwitter,
      channels::kNews,  channels::kFacebookPublic, channels::kTwitter,
      channels::kBluesky};  // i = 20..41
  const std::vector<std::string> politics_singles = {
      channels::kTwitter, channels::kNews,    channels::kBluesky,
      channels::kTwitter, channels::kFacebookPublic, channels::kYoutube,
      channels::kTwitter, channels::kBluesky, channels::kNews,
      channels::kTwitter, channels::kForum};  // i = 66..76
  const std::vector<std::string> macro_singles = {
      channels::kTwitter, channels::kNews, channels::kBluesky,
      channels::kYoutube};  // i = 94..97
  const std::vector<std::string> other_singles = {
      channels::kInstagramPublic, channels::kFacebookPublic};  // i = 103..104

  for (const BEvent& e : p.b) {
    const std::string owner = "b" + std::to_string(e.i);
    const int i = e.i;
    if (i <= 2) continue;  // zero-hit events: no docs at all
    if (i >= 3 && i <= 18) {
      TimeMs t_news, t_x;
      if (i == 18) {
        // The tweet lands inside the pre-event slack of the pull window;
        // with pre-event clamping off it stays a legitimate candidate.
        t_x = e.t_e - 600000;
        t_news = t_x + p.deltas_b[15];
      } else {
        t_news = e.t_e + 3 * kMsPerHour;
        t_x = t_news - p.deltas_b[i - 3];
      }
      d.verified_item(owner, channels::kNews, t_news, e.prim, e.sec);
      d.tweet(owner, t_x, e.prim + " posting thread",
              verified_body(e.prim, e.sec), true, "verified");
    } else if (i == 19) {
      // Millisecond tie across two channels: the win splits evenly.
      const TimeMs tie = e.t_e + 90 * kMsPerMinute;
      d.tweet(owner, tie, e.prim + " posting thread",
              verified_body(e.prim, e.sec), true, "verified");
      d.verified_item(owner, channels::kInstagramPublic, tie, e.prim, e.sec);
    } else if (i >= 20 && i <= 41) {
      const std::string& ch = sports_singles[i - 20];
      const TimeMs ts = e.t_e + 2 * kMsPerHour;
      if (ch == channels::kTwitter) {
        d.tweet(owner, ts, e.prim + " posting thread",
                verified_body(e.prim, e.sec), true, "verified");
      } else {
        d.verified_item(owner, ch, ts, e.prim, e.sec);
      }
    } else if (i >= 66 && i <= 76) {
      const std::string& ch = politics_singles[i - 66];
      const TimeMs ts = e.t_e + 2 * kMsPerHour;
      if (ch == channels::kTwitter) {
        d.tweet(owner, ts, e.prim + " posting thread",
                verified_body(e.prim, e.sec), true, "verified");
      } else {
        d.verified_item(owner, ch, ts, e.prim, e.sec);
      }
    } else if (i >= 94 && i <= 97) {
      const std::string& ch = macro_singles[i - 94];
      const TimeMs ts = e.t_e + 2 * kMsPerHour;
      if (ch == channels::kTwitter) {
        d.tweet(owner, ts, e.prim + " posting thread",
                verified_body(e.prim, e.sec), true, "verified");
      } else {
        d.verified_item(owner, ch, ts, e.prim, e.sec);
      }
    } else if (i == 103 || i == 104) {
      d.verified_item(owner, other_singles[i - 103],
                      e.t_e + 2 * kMsPerHour, e.prim, e.sec);
    } else {
      d.polluted_news(owner, e.t_e + 3 * kMsPerHour, e.prim);
    }
  }

  // Probe pollution: two background news items mentioning the geography but
  // none of the event's named entities, so only the widest ladder level —
  // the geography cluster — can reach them.
  const BEvent& b0 = p.b[0];
  d.item("bg", channels::kNews, b0.t_e + 2 * kMsPerHour,
         "weekend replay chatter across pakistan fan communities tonight",
         "Replay chatter roundup", std::nullopt, "");
  d.item("bg", channels::kNews, b0.t_e + 5 * kMsPerHour,
         "floodlight schedules shift across pakistan grounds this week",
         "Floodlight schedule notes", std::nullopt, "");

  // Inert background noise: matches no query.
  static const char* kNoise[] = {
      "quiet harbor lanterns flicker along the jetty",
      "drifting fog settles over the orchard rows",
      "gentle tides carry driftwood past the pier",
      "evening chorus hums beneath the cedar grove",
      "distant bells echo across the terraced fields",
      "soft rain gathers in the courtyard basin",
      "morning mist lingers over the shallow marsh",
      "lantern stalls glow beside the river walk",
      "threadbare sails catch the midday breeze",
      "old granaries stand along the canal bend",
      "stone bridges arch over the quiet millstream",
      "harvest carts roll toward the village square"};
  static const char* kNoiseChannels[] = {channels::kNews, channels::kForum,
                                         "blog", "reddit",
                                         channels::kYoutube,
                                         channels::kBluesky};
  for (int n = 0; n < 12; ++n) {
    d.item("bg", kNoiseChannels[n % 6],
           midnight_ms(april(2 + 2 * (n % 14))) + 9 * kMsPerHour, kNoise[n],
           std::nullopt, std::nullopt, "");
  }

  // Tweet timestamps double as snowflake ids; they must be globally unique.
  std::set<TimeMs> tweet_ts;
  for (const Doc& doc : p.docs) {
    if (!doc.tweet) continue;
    CHECK(tweet_ts.insert(doc.ts).second, "tweet timestamp collision");
  }
}

// ---------------------------------------------------------------------------
// Emission.
// ---------------------------------------------------------------------------

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

void emit_fixtures(const Plans& p, const fs::path& root) {
  fs::remove_all(root);

  write_file(root / "wcep" / "2026-04.html", render_month_page(p));

  json views = json::object();
  for (const auto& [key, count] : p.pageviews) views[key] = count;
  write_file(root / "wcep" / "pageviews.json", views.dump(2) + "\n");

  std::string markets;
  for (const MarketRow& m : p.markets) {
    markets += json{{"market_id", m.id},
                    {"event_slug", m.slug},
                    {"event_title", m.title},
                    {"question", m.question},
                    {"resolution_start", m.rs},
                    {"resolution_end", m.re},
                    {"lifetime_volume_usd", m.volume_usd},
                    {"is_binary", m.binary}}
                   .dump() +
               "\n";
  }
  write_file(root / "polymarket" / "markets.jsonl", markets);

  std::string trades;
  for (const TradeRow& t : p.trades) {
    trades += json{{"market_id", t.market_id}, {"ts", t.ts}, {"usd_size", t.usd}}
                  .dump() +
              "\n";
  }
  write_file(root / "polymarket" / "trades.jsonl", trades);

  std::map<std::string, std::string> channel_files;
  for (const Doc& doc : p.docs) {
    json j{{"channel", doc.channel},
           {"guid", doc.guid},
           {"ts", doc.ts},
           {"text", doc.text}};
    if (doc.title) j["title"] = *doc.title;
    if (doc.snippet) j["snippet"] = *doc.snippet;
    channel_files[doc.channel] += j.dump() + "\n";

    if (doc.tweet && doc.oembed) {
      const std::string html =
          "<blockquote class=\"twitter-tweet\"><p lang=\"en\" dir=\"ltr\">" +
          doc.body +
          "</p>&mdash; Desk Account (@deskaccount) <a "
          "href=\"https://twitter.com/deskaccount/status/" +
          doc.guid + "\">April 2026</a></blockquote>";
      write_file(root / "oembed" / (doc.guid + ".json"),
                 json{{"url", "https://twitter.com/deskaccount/status/" +
                                  doc.guid},
                      {"author_name", "Desk Account"},
                      {"html", html},
                      {"provider_name", "Twitter"}}
                         .dump(2) +
                     "\n");
    }
  }
  for (const auto& [channel, content] : channel_files) {
    write_file(root / "provider" / (channel + ".jsonl"), content);
  }
}

// ---------------------------------------------------------------------------
// Pre-run structural audits: the page parses back to the planned census and
// the ranking mirror reproduces the planned winner order.
// ---------------------------------------------------------------------------

void audit_bullets(const Plans& p, const std::vector<LexiconTerm>& lexicon) {
  for (const Bullet& b : p.bullets) {
    CHECK(us_filter(b.plain, lexicon) == b.relevant,
          "bullet relevance mismatch: " + b.plain);
  }
}

void audit_parse_and_rank(const Plans& p, const fs::path& root) {
  const DateWindow window{april(1), april(30)};
  std::vector<std::string> errors;
  std::ifstream in(root / "wcep" / "2026-04.html", std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  const auto bullets = parse_month_page(buf.str(), window, errors);
  CHECK(errors.empty(), "month page parse errors");
  CHECK(bullets.size() == 586, "parsed bullet count is " +
                                   std::to_string(bullets.size()));

  const auto lexicon = load_lexicon("data/us_lexicon.txt");
  std::vector<WcepBullet> relevant;
  for (const auto& b : bullets) {
    if (us_filter(b.bullet_text, lexicon)) relevant.push_back(b);
  }
  CHECK(relevant.size() == 171, "relevant bullet count is " +
                                    std::to_string(relevant.size()));

  FixturePageviews views(root / "wcep" / "pageviews.json");
  std::map<std::string, PageviewRecord> by_key;
  std::vector<std::string> warnings;
  for (const auto& b : relevant) {
    by_key[bullet_view_key(b)] =
        fetch_pageviews(b.linked_article, b.event_date, views, warnings);
  }
  CHECK(warnings.empty(), "pageview warnings during mirror ranking");

  const RankedSeedResult ranked = rank_and_cap(relevant, by_key, 3, 50);
  CHECK(ranked.events.size() == 50, "mirror ranking size");
  for (int k = 0; k < 50; ++k) {
    const Event& ev = ranked.events[k];
    CHECK(ev.title == p.a[k].article,
          "rank " + std::to_string(k) + " article mismatch");
    CHECK(ev.category == p.a[k].category, "rank category mismatch");
    CHECK(ev.t_e == p.a[k].t_e, "rank t_e mismatch");
    CHECK(static_cast<long long>(ev.attention_prior) == p.a[k].total,
          "rank attention mismatch");
  }
}

// ---------------------------------------------------------------------------
// Full pipeline self-check.
// ---------------------------------------------------------------------------

std::vector<json> read_rows(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  CHECK(in.good(), "missing " + path.string());
  std::vector<json> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(json::parse(line));
  }
  return rows;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  CHECK(in.good(), "missing " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

RunConfig check_config(const fs::path& fixtures, const fs::path& runs_root,
                       const std::string& run_id) {
  RunConfig cfg;
  cfg.run_id = run_id;
  cfg.runs_root = runs_root;
  cfg.fixtures_dir = fixtures;
  cfg.wcep_window = DateWindow{april(1), april(30)};
  cfg.polymarket_window = DateWindow{april(1), april(30)};
  const std::string problem = cfg.validate();
  CHECK(problem.empty(), "config invalid: " + problem);
  return cfg;
}

struct ExpectedEarliest {
  std::string guid;
  int depth = 0;
  TimeMs ts = 0;
};

void verify_run(const Plans& p, const fs::path& fixtures,
                const fs::path& runs_root, bool keep_run) {
  const RunConfig cfg = check_config(fixtures, runs_root, "fixture-check");
  SimClock clock(midnight_ms(Date{2026, 5, 2}));
  Pipeline pipeline(cfg, clock);
  const RunOutcome outcome = pipeline.full_run();
  CHECK(outcome == RunOutcome::ok, "full run did not finish clean");

  const RunStore& store = pipeline.store();
  const RunManifest& man = pipeline.manifest();

  // ---- events.jsonl: order, identity, timing ---------------------------
  const auto events = read_rows(store.events_path());
  CHECK(events.size() == 159, "event count is " +
                                  std::to_string(events.size()));
  std::vector<std::string> event_ids;
  std::map<std::string, std::string> owner_of_event;  // event_id -> owner tag
  for (size_t r = 0; r < events.size(); ++r) {
    const json& ev = events[r];
    const std::string id = ev.at("event_id").get<std::string>();
    event_ids.push_back(id);
    if (r < 50) {
      const AEvent& a = p.a[r];
      CHECK(ev.at("surface") == "wcep", "surface order broke at row " +
                                            std::to_string(r));
      CHECK(ev.at("title") == a.article, "A title mismatch at k=" +
                                             std::to_string(r));
      CHECK(ev.at("category") == a.category, "A category mismatch");
      CHECK(ev.at("t_e").get<TimeMs>() == a.t_e, "A t_e mismatch");
      CHECK(static_cast<long long>(ev.at("attention_prior").get<double>()) ==
                a.total,
            "A attention mismatch");
      owner_of_event[id] = "a" + std::to_string(r);
    } else {
      const BEvent& b = p.b[r - 50];
      CHECK(ev.at("surface") == "polymarket", "surface order broke");
      CHECK(ev.at("title") == b.question, "B title mismatch at i=" +
                                              std::to_string(r - 50));
      CHECK(ev.at("category") == b.category,
            "B category mismatch at i=" + std::to_string(r - 50));
      CHECK(ev.at("t_e").get<TimeMs>() == b.t_e, "B t_e mismatch");
      owner_of_event[id] = "b" + std::to_string(r - 50);
    }
  }

  // ---- queries.jsonl: all approved, probe seed exact --------------------
  const auto queries = read_rows(store.queries_path());
  CHECK(queries.size() == 159, "query count");
  std::map<std::string, BooleanQuery> x_by_owner;
  for (const json& q : queries) {
    CHECK(q.at("approved").get<bool>(), "query not approved for " +
                                            q.at("event_id").get<std::string>());
    const std::string owner =
        owner_of_event.at(q.at("event_id").get<std::string>());
    x_by_owner.emplace(owner, parse_boolean(q.at("x").get<std::string>(),
                                            QueryKind::x_permissive));
  }
  CHECK(x_by_owner.at("b0").render() ==
            "(\"Qalandar Khel\" OR \"Karachi Trophy\") AND (\"Pakistan\")",
        "probe-seed x query drifted: " + x_by_owner.at("b0").render());

  // ---- master cross-match: a doc is pulled by its owner and nobody else -
  std::map<std::string, TimeMs> t_e_by_owner;
  for (int k = 0; k < 50; ++k) t_e_by_owner["a" + std::to_string(k)] = p.a[k].t_e;
  for (const BEvent& b : p.b) t_e_by_owner["b" + std::to_string(b.i)] = b.t_e;
  for (const auto& [owner, query] : x_by_owner) {
    const TimeWindow window{t_e_by_owner.at(owner) - cfg.window_pre_ms,
                            t_e_by_owner.at(owner) + cfg.window_post_ms};
    for (const Doc& doc : p.docs) {
      const bool matched = query.matches(doc.text) && window.contains(doc.ts);
      const bool owned = doc.owner == owner;
      CHECK(matched == owned, "cross-match violation: doc '" + doc.text +
                                  "' vs event " + owner);
    }
  }
  // Every owned doc really is reachable by its own event's query.
  for (const Doc& doc : p.docs) {
    if (doc.owner == "bg") continue;
    CHECK(x_by_owner.at(doc.owner).matches(doc.text),
          "planted doc does not match its owner: " + doc.text);
  }
  // The widest probe level reaches exactly the two background items.
  {
    const BooleanQuery geo = parse_boolean(
        "(\"Pakistan\" OR \"Pakistani\" OR \"Islamabad\")",
        QueryKind::x_permissive);
    const TimeWindow window{p.b[0].t_e - cfg.window_pre_ms,
                            p.b[0].t_e + cfg.window_post_ms};
    int hits = 0;
    for (const Doc& doc : p.docs) {
      if (geo.matches(doc.text) && window.contains(doc.ts)) {
        ++hits;
        CHECK(doc.owner == "bg", "geo probe reached a planted doc");
      }
    }
    CHECK(hits == 2, "geo probe hit count is " + std::to_string(hits));
  }

  // ---- manifest: stages, budget, per-event bookkeeping -------------------
  for (const char* stage :
       {stages::kSeed, stages::kDraft, stages::kPull, stages::kVerify,
        stages::kProbe, stages::kAnalyze}) {
    CHECK(man.stage_completed(stage), std::string("stage incomplete: ") +
                                          stage);
  }
  CHECK(man.request_count == 984, "request count is " +
                                      std::to_string(man.request_count));

  std::map<std::string, std::map<std::string, int>> expected_pull;
  std::map<std::string, std::map<std::string, int>> expected_outcomes;
  std::map<std::string, std::map<std::string, ExpectedEarliest>> expected_first;
  std::map<std::string, std::map<std::string, std::vector<const Doc*>>> by_owner;
  for (const Doc& doc : p.docs) {
    if (doc.owner == "bg") continue;
    by_owner[doc.owner][doc.channel].push_back(&doc);
  }
  for (auto& [owner, channels_map] : by_owner) {
    for (auto& [channel, docs] : channels_map) {
      std::sort(docs.begin(), docs.end(),
                [](const Doc* a, const Doc* b) { return a->ts < b->ts; });
      int depth = 0;
      for (const Doc* doc : docs) {
        expected_pull[owner][channel] += 1;
        expected_outcomes[owner][doc->expected] += 1;
        if (doc->expected == "verified") {
          if (expected_first[owner].count(channel) == 0) {
            expected_first[owner][channel] = {doc->guid, depth, doc->ts};
          }
        } else {
          ++depth;
        }
      }
    }
  }

  CHECK(man.events.size() == 159, "manifest event count");
  for (const std::string& id : event_ids) {
    const auto it = man.events.find(id);
    CHECK(it != man.events.end(), "manifest missing event " + id);
    const EventRecord& rec = it->second;
    const std::string& owner = owner_of_event.at(id);
    CHECK(rec.reached(stages::kAnalyze), "event stalled: " + owner);
    CHECK(rec.errors.empty(), "event errors recorded for " + owner);
    CHECK(rec.warnings.empty(), "event warnings recorded for " + owner);
    CHECK(rec.backfill_percent.has_value() && *rec.backfill_percent == 75.0,
          "backfill percent drifted for " + owner);
    CHECK(rec.provider_query_id.has_value(), "missing provider query id");
    const auto want_pull = expected_pull.count(owner) != 0
                               ? expected_pull.at(owner)
                               : std::map<std::string, int>{};
    CHECK(rec.pull_counts == want_pull, "pull counts drifted for " + owner);
    const auto want_out = expected_outcomes.count(owner) != 0
                              ? expected_outcomes.at(owner)
                              : std::map<std::string, int>{};
    CHECK(rec.verification_counts == want_out,
          "verification counts drifted for " + owner);
  }

  // ---- per-mention audit -------------------------------------------------
  for (const std::string& id : event_ids) {
    const std::string& owner = owner_of_event.at(id);
    const fs::path path = store.mentions_path(id);
    CHECK(fs::exists(path), "missing mentions file for " + owner);
    const auto rows = read_rows(path);
    std::map<std::string, const Doc*> planted;
    size_t planted_count = 0;
    if (by_owner.count(owner) != 0) {
      for (const auto& [channel, docs] : by_owner.at(owner)) {
        for (const Doc* doc : docs) {
          planted[doc->guid] = doc;
          ++planted_count;
        }
      }
    }
    CHECK(rows.size() == planted_count, "mention count drifted for " + owner);
    for (const json& m : rows) {
      const Doc* doc = planted.at(m.at("guid").get<std::string>());
      CHECK(m.at("channel") == doc->channel, "mention channel mismatch");
      CHECK(m.at("verification") == doc->expected,
            "verification drifted for doc '" + doc->text + "': " +
                m.at("verification").get<std::string>());
      if (doc->tweet) {
        CHECK(!m.contains("provider_ts"),
              "tweet kept a provider timestamp: " + doc->guid);
        CHECK(m.contains("recovered_ts") &&
                  m.at("recovered_ts").get<TimeMs>() == doc->ts,
              "snowflake recovery drifted for " + doc->guid);
        if (doc->oembed) {
          CHECK(m.contains("body") && m.at("body") == doc->body,
                "tweet body not recovered: " + doc->guid);
        } else {
          CHECK(!m.contains("body"), "body appeared without a payload");
        }
      } else {
        CHECK(m.contains("provider_ts") &&
                  m.at("provider_ts").get<TimeMs>() == doc->ts,
              "provider timestamp drifted for " + doc->guid);
      }
    }
  }

  // ---- earliest verified walk --------------------------------------------
  const auto earliest = read_rows(store.earliest_path());
  CHECK(earliest.size() == 117, "earliest row count is " +
                                    std::to_string(earliest.size()));
  std::map<std::string, std::map<std::string, json>> first_by_owner;
  for (const json& row : earliest) {
    const std::string owner =
        owner_of_event.at(row.at("event_id").get<std::string>());
    first_by_owner[owner][row.at("channel").get<std::string>()] = row;
  }
  for (const auto& [owner, channels_map] : expected_first) {
    CHECK(first_by_owner.count(owner) != 0, "no earliest rows for " + owner);
    CHECK(first_by_owner.at(owner).size() == channels_map.size(),
          "earliest channel census drifted for " + owner);
    for (const auto& [channel, want] : channels_map) {
      const auto it = first_by_owner.at(owner).find(channel);
      CHECK(it != first_by_owner.at(owner).end(),
            "missing earliest row: " + owner + "/" + channel);
      const json& row = it->second;
      CHECK(row.at("mention").at("guid") == want.guid,
            "earliest winner drifted for " + owner + "/" + channel);
      CHECK(row.at("fallback_depth").get<int>() == want.depth,
            "fallback depth drifted for " + owner + "/" + channel);
    }
  }

  // ---- adjudications -------------------------------------------------------
  const auto adjudications = read_rows(store.adjudications_path());
  CHECK(adjudications.size() == 2, "adjudication count is " +
                                       std::to_string(adjudications.size()));
  CHECK(owner_of_event.at(
            adjudications[0].at("event_id").get<std::string>()) == "a0" &&
            owner_of_event.at(
                adjudications[1].at("event_id").get<std::string>()) == "a0",
        "adjudications attached to the wrong event");
  CHECK(adjudications[0].at("on_topic").get<bool>() == false &&
            adjudications[1].at("on_topic").get<bool>() == true,
        "adjudication outcomes drifted");

  // ---- zero-hit events hold empty mention files ---------------------------
  for (int i = 0; i <= 2; ++i) {
    const fs::path path = store.mentions_path(event_ids[50 + i]);
    CHECK(fs::exists(path), "zero-hit mentions file missing");
    CHECK(read_rows(path).empty(), "zero-hit event pulled something");
  }

  // ---- probe report --------------------------------------------------------
  const json probe = json::parse(slurp(store.probe_path(event_ids[50])));
  CHECK(probe.at("event_id") == event_ids[50], "probe targeted wrong event");
  const auto& levels = probe.at("levels");
  CHECK(levels.size() == 5, "probe ladder depth");
  const int want_hits[5] = {0, 0, 0, 0, 2};
  for (int l = 0; l < 5; ++l) {
    CHECK(levels[l].at("level").get<int>() == l + 1, "probe level order");
    CHECK(!levels[l].at("errored").get<bool>(), "probe level errored");
    CHECK(levels[l].at("hits").get<int>() == want_hits[l],
          "probe hits drifted at level " + std::to_string(l + 1));
  }
  CHECK(levels[0].at("query") ==
            "(\"Qalandar Khel\" OR \"Karachi Trophy\") AND (\"Pakistan\")",
        "probe level 1 query drifted");
  CHECK(contains(levels[1].at("query").get<std::string>(), "\"Qalandar\"") &&
            contains(levels[1].at("query").get<std::string>(), "\"Trophy\""),
        "probe level 2 should add title words");
  CHECK(contains(levels[2].at("query").get<std::string>(), "\"breaking\""),
        "probe level 3 should add the first generic broadener");
  CHECK(contains(levels[3].at("query").get<std::string>(), "\"news\""),
        "probe level 4 should add the second generic broadener");
  CHECK(levels[4].at("query") ==
            "(\"Pakistan\" OR \"Pakistani\" OR \"Islamabad\")",
        "probe level 5 should collapse to the geography cluster");
  CHECK(levels[4].at("earliest_ts").get<TimeMs>() ==
            p.b[0].t_e + 2 * kMsPerHour,
        "probe earliest timestamp drifted");
  CHECK(levels[4].at("earliest_title") == "Replay chatter roundup",
        "probe earliest title drifted");

  // ---- seed log lines --------------------------------------------------------
  std::string log_blob;
  for (const LogEntry& entry : man.log) log_blob += entry.message + "\n";
  for (const char* needle :
       {"586 bullets scanned, 171 U.S.-relevant (29.2%)",
        "50 events across 39 articles",
        "138 markets, 130 past filters, 21 dropped without in-scan trades, "
        "109 events across 76 event slugs",
        "seeded 159 events"}) {
    CHECK(contains(log_blob, needle), std::string("log line missing: ") +
                                          needle);
  }
  CHECK(!contains(log_blob, "fewer survivors"), "ranking came up short");
  CHECK(!contains(log_blob, "pageviews missing"), "pageview fixture has holes");

  // ---- tables ------------------------------------------------------------
  const std::string hits_csv = slurp(store.table_path("hits", "csv"));
  CHECK(hits_csv ==
            "category,wcep_hits,wcep_total,wcep_pct,polymarket_hits,"
            "polymarket_total,polymarket_pct\n"
            "sports,5,5,100,39,66,59\n"
            "politics,22,29,76,11,28,39\n"
            "macro_crypto,6,10,60,4,9,44\n"
            "other,5,6,83,2,6,33\n"
            "all,38,50,76,56,109,51\n",
        "hits.csv drifted:\n" + hits_csv);

  const std::string winners_csv = slurp(store.table_path("winners", "csv"));
  CHECK(winners_csv ==
            "channel,wcep_wins,wcep_share_pct,polymarket_wins,"
            "polymarket_share_pct,shift_pp\n"
            "twitter,6,16,21.5,38,22\n"
            "news,20,53,15,27,-26\n"
            "bluesky,4,11,9,16,5\n"
            "facebook_public,5,13,4,7,-6\n"
            "youtube,2,5,3,5,0\n"
            "instagram_public,0,0,2.5,4,4\n"
            "forum,1,3,1,2,-1\n",
        "winners.csv drifted:\n" + winners_csv);
  CHECK(contains(slurp(store.table_path("winners", "txt")),
                 "events with evidence: wcep 38, polymarket 56"),
        "winners footing drifted");

  std::string want_paired_a = "event,pv,delta_min\n";
  const char* kDeltaA[6] = {"-53.7", "-33.4", "-32.0", "-11.2", "-10.0",
                            "-7.1"};
  for (int k = 6; k <= 11; ++k) {
    want_paired_a += p.a[k].article + "," + std::to_string(p.a[k].total) +
                     "," + kDeltaA[k - 6] + "\n";
  }
  const std::string paired_a_csv = slurp(store.table_path("paired_a", "csv"));
  CHECK(paired_a_csv == want_paired_a,
        "paired_a.csv drifted:\n" + paired_a_csv);
  const std::string paired_a_txt = slurp(store.table_path("paired_a", "txt"));
  for (const char* needle : {"-21.6", "-33.4 to -10.0", "0/6 (0%)"}) {
    CHECK(contains(paired_a_txt, needle),
          std::string("paired_a summary missing ") + needle);
  }

  std::string want_paired_b = "event,category,delta_min\n";
  const char* kDeltaB[16] = {"-34.23", "-0.62", "-0.50",  "-0.26",
                             "-0.20",  "-0.10", "-0.06",  "-0.02",
                             "-0.02",  "-0.02", "+1.20",  "+1.26",
                             "+2.50",  "+14.19", "+143.80", "+552.17"};
  // Rows sort by delta, title; the three -0.02 ties reorder by question.
  const int kOrderB[16] = {3, 4, 5, 6, 7, 8, 9, 12, 10, 11,
                           13, 14, 15, 16, 17, 18};
  for (int j = 0; j < 16; ++j) {
    want_paired_b += p.b[kOrderB[j]].question + ",spt," + kDeltaB[j] + "\n";
  }
  const std::string paired_b_csv = slurp(store.table_path("paired_b", "csv"));
  CHECK(paired_b_csv == want_paired_b,
        "paired_b.csv drifted:\n" + paired_b_csv);
  const std::string paired_b_txt = slurp(store.table_path("paired_b", "txt"));
  for (const char* needle : {"-0.02", "-0.26 to +2.50", "6/16 (38%)"}) {
    CHECK(contains(paired_b_txt, needle),
          std::string("paired_b summary missing ") + needle);
  }

  for (const char* name : {"hits", "winners", "paired_a", "paired_b", "probe"}) {
    for (const char* ext : {"txt", "csv", "md"}) {
      CHECK(fs::exists(store.table_path(name, ext)) &&
                fs::file_size(store.table_path(name, ext)) > 0,
            std::string("table missing: ") + name + "." + ext);
    }
  }

  // ---- determinism: a second run renders byte-identical tables -----------
  {
    const fs::path rerun_root = runs_root.string() + "-rerun";
    fs::remove_all(rerun_root);
    const RunConfig cfg2 = check_config(fixtures, rerun_root, "fixture-check");
    SimClock clock2(midnight_ms(Date{2026, 5, 2}));
    Pipeline second(cfg2, clock2);
    CHECK(second.full_run() == RunOutcome::ok, "second run did not finish");
    for (const char* name :
         {"hits", "winners", "paired_a", "paired_b", "probe"}) {
      for (const char* ext : {"txt", "csv", "md"}) {
        CHECK(slurp(store.table_path(name, ext)) ==
                  slurp(second.store().table_path(name, ext)),
              std::string("nondeterministic table: ") + name + "." + ext);
      }
    }
    if (!keep_run) fs::remove_all(rerun_root);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deterministic fixture corpus generator"};
  std::string out = "fixtures";
  bool keep_run = false;
  bool skip_check = false;
  app.add_option("--out", out, "fixture output root (default: fixtures)");
  app.add_flag("--keep-run", keep_run,
               "keep the scratch verification run directory");
  app.add_flag("--skip-check", skip_check,
               "write fixtures without the pipeline self-check");
  CLI11_PARSE(app, argc, argv);

  const fs::path runs_root =
      fs::temp_directory_path() / "newsrace-fixture-check";
  try {
    CHECK(fs::exists("data/us_lexicon.txt"),
          "run from the repository root (data/us_lexicon.txt not found)");
    const auto lexicon = load_lexicon("data/us_lexicon.txt");
    audit_pools(lexicon);

    Plans plans;
    build_sample_a(plans);
    build_sample_b(plans);
    build_docs(plans);
    audit_bullets(plans, lexicon);

    emit_fixtures(plans, out);
    audit_parse_and_rank(plans, out);

    if (!skip_check) {
      fs::remove_all(runs_root);
      verify_run(plans, out, runs_root, keep_run);
      if (!keep_run) fs::remove_all(runs_root);
    }

    size_t oembed_files = 0, docs = plans.docs.size();
    for (const Doc& d : plans.docs) {
      if (d.tweet && d.oembed) ++oembed_files;
    }
    std::cout << "fixture corpus written to " << out << "\n"
              << "  wcep bullets: " << plans.bullets.size()
              << " (171 relevant, 50 ranked)\n"
              << "  markets: " << plans.markets.size()
              << " (109 pinned events)\n"
              << "  docs: " << docs << " across channels, " << oembed_files
              << " oEmbed payloads\n"
              << (skip_check ? "  self-check skipped\n"
                             : "  self-check passed (full mock run, tables "
                               "byte-stable)\n");
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "genfixtures: " << e.what() << "\n";
    if (fs::exists(runs_root)) {
      std::cerr << "scratch run kept for inspection: " << runs_root << "\n";
    }
    return 1;
  }
}
