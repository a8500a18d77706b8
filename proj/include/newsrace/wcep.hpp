#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "newsrace/chrono.hpp"
#include "newsrace/types.hpp"

namespace newsrace {

// One bulleted item from a Current Events month page.
struct WcepBullet {
  Date event_date;
  std::string bullet_text;
  std::string linked_article;  // first wiki link's article title
  std::vector<std::string> alternate_articles;
  std::string wcep_category;  // the page's own section heading

  bool operator==(const WcepBullet&) const = default;
};

struct PageviewRecord {
  std::string article;
  long long day0_views = 0;
  long long day1_views = 0;
  long long total() const { return day0_views + day1_views; }
};

// One relevance-lexicon entry.  `exact_case` terms (written with a leading
// '=' in the data file) match case-sensitively — "U.S." must not match the
// word "us" — everything else matches case-insensitively.
struct LexiconTerm {
  std::string text;
  bool exact_case = false;
};

// Loads the lexicon data file: one term per line, '#' comments and blank
// lines skipped, a leading '=' marks an exact-case term.
std::vector<LexiconTerm> load_lexicon(const std::filesystem::path& path);

// True iff any lexicon term occurs as a substring of the bullet text,
// case-sensitively for exact_case terms and case-insensitively otherwise.
bool us_filter(const std::string& bullet_text,
               const std::vector<LexiconTerm>& lexicon);

// Extracts every in-window bullet from one month page's HTML.  Day sections
// are anchored by id="YYYY_Month_D" markers; section headings (<b>…</b>)
// name the category for the bullets that follow.  A day whose anchor or
// body cannot be parsed is skipped with a diagnostic appended to `errors`;
// the rest of the page still parses.  Output order is (date, page order).
std::vector<WcepBullet> parse_month_page(const std::string& html,
                                         const DateWindow& window,
                                         std::vector<std::string>& errors);

// Parses every month page covering the window; `pages` maps "YYYY-MM" to
// the page HTML.  Missing months are reported in `errors` and skipped.
std::vector<WcepBullet> scrape_wcep(
    const std::map<std::string, std::string>& pages, const DateWindow& window,
    std::vector<std::string>& errors);

// The months ("YYYY-MM") a window spans, in order.
std::vector<std::string> months_in_window(const DateWindow& window);

// Pageview counts per article/day: the live REST endpoint or a fixture map.
class PageviewSource {
 public:
  virtual ~PageviewSource() = default;
  // Views of one article on one UTC day, or nothing when unknown.
  virtual std::optional<long long> views(const std::string& article,
                                         const Date& day) = 0;
};

// Fixture file format: one JSON object mapping "Article|YYYY-MM-DD" to a
// view count.
class FixturePageviews : public PageviewSource {
 public:
  explicit FixturePageviews(const std::filesystem::path& file);
  std::optional<long long> views(const std::string& article,
                                 const Date& day) override;

 private:
  std::map<std::string, long long> table_;
};

// Wikimedia REST per-article daily endpoint, English edition.
class LivePageviews : public PageviewSource {
 public:
  std::optional<long long> views(const std::string& article,
                                 const Date& day) override;
};

// Event-day plus next-day views.  Unknown articles yield a zero record and
// a warning; the ranking still proceeds.
PageviewRecord fetch_pageviews(const std::string& article,
                               const Date& event_date, PageviewSource& source,
                               std::vector<std::string>& warnings);

// Maps a Current Events section heading onto the four-bucket category
// scheme shared by both samples.
std::string wcep_bucket(const std::string& wcep_category);

struct RankedSeedResult {
  std::vector<Event> events;
  int distinct_articles = 0;
  bool shortfall = false;  // fewer survivors than requested
};

// Sorts filtered bullets by total pageviews descending (ties: earlier date,
// then lexicographic bullet text), retains at most `per_article_cap`
// bullets per linked article, and emits the first `top_n` survivors as
// events: t_e = event-date midnight UTC, attention_prior = total views.
RankedSeedResult rank_and_cap(
    const std::vector<WcepBullet>& bullets,
    const std::map<std::string, PageviewRecord>& views_by_bullet_key,
    int per_article_cap, int top_n);

// Key into rank_and_cap's pageview map: the bullet's article and date.
std::string bullet_view_key(const WcepBullet& bullet);

}  // namespace newsrace
