#include "newsrace/wcep.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "newsrace/store.hpp"
#include "newsrace/text.hpp"

namespace newsrace {

namespace {

const char* kMonthNames[12] = {"January", "February", "March",     "April",
                               "May",     "June",     "July",      "August",
                               "September", "October", "November", "December"};

int month_from_name(const std::string& name) {
  for (int i = 0; i < 12; ++i) {
    if (name == kMonthNames[i]) return i + 1;
  }
  return 0;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string url_decode(const std::string& s) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(s[i + 1]) &&
        std::isxdigit(s[i + 2])) {
      out.push_back(static_cast<char>(
          std::stoi(s.substr(i + 1, 2), nullptr, 16)));
      i += 2;
    } else {
      out.push_back(s[i]);
    }
  }
  return out;
}

// Article title of one <a ...> tag when it points into the wiki article
// namespace; empty otherwise.
std::string wiki_link_title(const std::string& tag) {
  const size_t href_pos = tag.find("href=\"");
  if (href_pos == std::string::npos) return "";
  const size_t href_start = href_pos + 6;
  const size_t href_end = tag.find('"', href_start);
  if (href_end == std::string::npos) return "";
  std::string href = tag.substr(href_start, href_end - href_start);
  if (href.rfind("/wiki/", 0) != 0) return "";
  std::string title;
  const size_t title_pos = tag.find("title=\"");
  if (title_pos != std::string::npos) {
    const size_t t_start = title_pos + 7;
    const size_t t_end = tag.find('"', t_start);
    if (t_end != std::string::npos) title = tag.substr(t_start, t_end - t_start);
  }
  if (title.empty()) {
    title = url_decode(href.substr(6));
    std::replace(title.begin(), title.end(), '_', ' ');
  }
  title = text::decode_entities(title);
  // Skip non-article namespaces.
  for (const char* ns : {"File:", "Category:", "Portal:", "Wikipedia:",
                         "Template:", "Help:", "Special:"}) {
    if (title.rfind(ns, 0) == 0) return "";
  }
  return title;
}

struct DayAnchor {
  size_t pos;
  Date date;
};

}  // namespace

std::vector<WcepBullet> parse_month_page(const std::string& html,
                                         const DateWindow& window,
                                         std::vector<std::string>& errors) {
  // Locate day anchors: id="YYYY_Month_D".
  std::vector<DayAnchor> anchors;
  size_t pos = 0;
  while ((pos = html.find("id=\"", pos)) != std::string::npos) {
    const size_t start = pos + 4;
    const size_t end = html.find('"', start);
    if (end == std::string::npos) break;
    const std::string id = html.substr(start, end - start);
    pos = end;

    // Accept only ids shaped like a day anchor: digits '_' letters '_' digits.
    const size_t u1 = id.find('_');
    const size_t u2 = id.rfind('_');
    if (u1 == std::string::npos || u2 == u1) continue;
    const std::string y = id.substr(0, u1);
    const std::string mon = id.substr(u1 + 1, u2 - u1 - 1);
    const std::string d = id.substr(u2 + 1);
    if (y.empty() || d.empty() ||
        !std::all_of(y.begin(), y.end(), ::isdigit) ||
        !std::all_of(d.begin(), d.end(), ::isdigit)) {
      continue;
    }
    const int month = month_from_name(mon);
    if (month == 0) {
      errors.push_back("unparseable day anchor id=\"" + id + "\": unknown month");
      continue;
    }
    Date date{std::stoi(y), month, std::stoi(d)};
    if (!is_valid_date(date)) {
      errors.push_back("unparseable day anchor id=\"" + id +
                       "\": invalid date");
      continue;
    }
    anchors.push_back({start, date});
  }

  std::vector<WcepBullet> bullets;
  for (size_t ai = 0; ai < anchors.size(); ++ai) {
    const Date date = anchors[ai].date;
    if (!window.contains(date)) continue;
    const size_t block_start = anchors[ai].pos;
    const size_t block_end =
        ai + 1 < anchors.size() ? anchors[ai + 1].pos : html.size();
    const std::string block = html.substr(block_start, block_end - block_start);

    // Walk the day block in document order, tracking the current category
    // heading and extracting nesting-aware <li> items.
    std::string category = "Other";
    size_t cursor = 0;
    int items_found = 0;
    while (cursor < block.size()) {
      const size_t b_open = block.find("<b>", cursor);
      const size_t li_open = block.find("<li", cursor);
      if (b_open == std::string::npos && li_open == std::string::npos) break;

      if (b_open != std::string::npos &&
          (li_open == std::string::npos || b_open < li_open)) {
        const size_t b_close = block.find("</b>", b_open);
        if (b_close == std::string::npos) {
          errors.push_back("unterminated heading on " + format_date(date));
          break;
        }
        const std::string heading =
            trim(text::strip_html(block.substr(b_open, b_close - b_open + 4)));
        if (!heading.empty()) category = heading;
        cursor = b_close + 4;
        continue;
      }

      // Nesting-aware scan to the matching </li>.
      const size_t tag_end = block.find('>', li_open);
      if (tag_end == std::string::npos) {
        errors.push_back("unterminated <li> tag on " + format_date(date));
        break;
      }
      size_t depth = 1;
      size_t scan = tag_end + 1;
      size_t item_end = std::string::npos;
      while (depth > 0) {
        const size_t next_open = block.find("<li", scan);
        const size_t next_close = block.find("</li>", scan);
        if (next_close == std::string::npos) break;
        if (next_open != std::string::npos && next_open < next_close) {
          ++depth;
          scan = next_open + 3;
        } else {
          --depth;
          if (depth == 0) item_end = next_close;
          scan = next_close + 5;
        }
      }
      if (item_end == std::string::npos) {
        errors.push_back("unbalanced list items on " + format_date(date));
        break;
      }
      const std::string inner =
          block.substr(tag_end + 1, item_end - tag_end - 1);
      cursor = item_end + 5;
      ++items_found;

      // Collect wiki links in order; an item without any is navigation, not
      // an event bullet.
      std::vector<std::string> links;
      size_t a_pos = 0;
      while ((a_pos = inner.find("<a ", a_pos)) != std::string::npos) {
        const size_t a_end = inner.find('>', a_pos);
        if (a_end == std::string::npos) break;
        const std::string title =
            wiki_link_title(inner.substr(a_pos, a_end - a_pos + 1));
        if (!title.empty()) links.push_back(title);
        a_pos = a_end + 1;
      }
      if (links.empty()) continue;

      WcepBullet bullet;
      bullet.event_date = date;
      bullet.bullet_text = trim(text::strip_html(inner));
      bullet.linked_article = links.front();
      bullet.alternate_articles.assign(links.begin() + 1, links.end());
      bullet.wcep_category = category;
      if (bullet.bullet_text.empty()) continue;
      bullets.push_back(std::move(bullet));
    }
    if (items_found == 0) {
      errors.push_back("no list items found on " + format_date(date));
    }
  }

  std::stable_sort(bullets.begin(), bullets.end(),
                   [](const WcepBullet& a, const WcepBullet& b) {
                     return a.event_date < b.event_date;
                   });
  return bullets;
}

std::vector<std::string> months_in_window(const DateWindow& window) {
  std::vector<std::string> months;
  int year = window.from.year;
  int month = window.from.month;
  while (year < window.to.year ||
         (year == window.to.year && month <= window.to.month)) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    months.emplace_back(buf);
    if (++month > 12) {
      month = 1;
      ++year;
    }
  }
  return months;
}

std::vector<WcepBullet> scrape_wcep(
    const std::map<std::string, std::string>& pages, const DateWindow& window,
    std::vector<std::string>& errors) {
  std::vector<WcepBullet> bullets;
  for (const auto& month : months_in_window(window)) {
    const auto it = pages.find(month);
    if (it == pages.end()) {
      errors.push_back("missing month page " + month);
      continue;
    }
    auto page_bullets = parse_month_page(it->second, window, errors);
    bullets.insert(bullets.end(), page_bullets.begin(), page_bullets.end());
  }
  std::stable_sort(bullets.begin(), bullets.end(),
                   [](const WcepBullet& a, const WcepBullet& b) {
                     return a.event_date < b.event_date;
                   });
  return bullets;
}

std::vector<LexiconTerm> load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon: " + path.string());
  std::vector<LexiconTerm> lexicon;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line[0] == '=') {
      lexicon.push_back({trim(line.substr(1)), true});
    } else {
      lexicon.push_back({line, false});
    }
  }
  return lexicon;
}

bool us_filter(const std::string& bullet_text,
               const std::vector<LexiconTerm>& lexicon) {
  for (const auto& term : lexicon) {
    if (term.text.empty()) continue;
    const bool hit = term.exact_case
                         ? text::contains_cs(bullet_text, term.text)
                         : text::contains_ci(bullet_text, term.text);
    if (hit) return true;
  }
  return false;
}

FixturePageviews::FixturePageviews(const std::filesystem::path& file) {
  const auto j = nlohmann::json::parse(read_file(file));
  for (const auto& [key, value] : j.items()) {
    table_[key] = value.get<long long>();
  }
}

std::optional<long long> FixturePageviews::views(const std::string& article,
                                                 const Date& day) {
  const auto it = table_.find(article + "|" + format_date(day));
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

std::optional<long long> LivePageviews::views(const std::string& article,
                                              const Date& day) {
  std::string slug = article;
  std::replace(slug.begin(), slug.end(), ' ', '_');
  char stamp[16];
  std::snprintf(stamp, sizeof(stamp), "%04d%02d%02d", day.year, day.month,
                day.day);
  const std::string path =
      "/api/rest_v1/metrics/pageviews/per-article/en.wikipedia/all-access/"
      "user/" +
      httplib::detail::encode_url(slug) + "/daily/" + stamp + "00/" + stamp +
      "00";

  httplib::SSLClient client("wikimedia.org");
  client.set_connection_timeout(10);
  client.set_read_timeout(15);

  std::string last_error;
  for (int attempt = 0; attempt < 3; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(250 * attempt));
    }
    auto res = client.Get(path);
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 404) return std::nullopt;
    if (res->status != 200) {
      last_error = "http status " + std::to_string(res->status);
      continue;
    }
    const auto j = nlohmann::json::parse(res->body);
    const auto& items = j.at("items");
    if (items.empty()) return std::nullopt;
    return items.at(0).at("views").get<long long>();
  }
  throw std::runtime_error("pageview fetch failed for " + article + ": " +
                           last_error);
}

PageviewRecord fetch_pageviews(const std::string& article,
                               const Date& event_date, PageviewSource& source,
                               std::vector<std::string>& warnings) {
  PageviewRecord record;
  record.article = article;
  const Date next = civil_from_days(days_from_civil(event_date) + 1);

  const auto day0 = source.views(article, event_date);
  const auto day1 = source.views(article, next);
  record.day0_views = day0.value_or(0);
  record.day1_views = day1.value_or(0);
  if (!day0 || !day1) {
    warnings.push_back("pageviews missing for \"" + article + "\" around " +
                       format_date(event_date) + "; counted as zero");
  }
  return record;
}

std::string wcep_bucket(const std::string& wcep_category) {
  const std::string c = text::to_lower(wcep_category);
  if (c.find("sport") != std::string::npos) return category::kSports;
  for (const char* p : {"armed conflict", "attack", "politics", "election",
                        "international relation", "law and crime"}) {
    if (c.find(p) != std::string::npos) return category::kPolitics;
  }
  for (const char* p : {"business", "econom", "science", "technology"}) {
    if (c.find(p) != std::string::npos) return category::kMacroCrypto;
  }
  return category::kOther;
}

std::string bullet_view_key(const WcepBullet& bullet) {
  return bullet.linked_article + "|" + format_date(bullet.event_date);
}

RankedSeedResult rank_and_cap(
    const std::vector<WcepBullet>& bullets,
    const std::map<std::string, PageviewRecord>& views_by_bullet_key,
    int per_article_cap, int top_n) {
  struct Scored {
    const WcepBullet* bullet;
    long long total;
  };
  std::vector<Scored> scored;
  scored.reserve(bullets.size());
  for (const auto& bullet : bullets) {
    const auto it = views_by_bullet_key.find(bullet_view_key(bullet));
    if (it == views_by_bullet_key.end()) {
      throw std::invalid_argument("no pageview record for bullet key " +
                                  bullet_view_key(bullet));
    }
    scored.push_back({&bullet, it->second.total()});
  }

  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.total != b.total) return a.total > b.total;
    if (a.bullet->event_date != b.bullet->event_date) {
      return a.bullet->event_date < b.bullet->event_date;
    }
    return a.bullet->bullet_text < b.bullet->bullet_text;
  });

  RankedSeedResult result;
  std::map<std::string, int> per_article;
  std::map<std::string, int> articles_in_output;
  for (const auto& s : scored) {
    if (static_cast<int>(result.events.size()) >= top_n) break;
    int& used = per_article[s.bullet->linked_article];
    if (used >= per_article_cap) continue;
    ++used;

    Event event;
    event.surface = Surface::wcep;
    event.title = s.bullet->linked_article;
    event.description = s.bullet->bullet_text;
    event.category = wcep_bucket(s.bullet->wcep_category);
    event.t_e = midnight_ms(s.bullet->event_date);
    event.attention_prior = static_cast<double>(s.total);
    event.source_key = s.bullet->linked_article + "|" +
                       format_date(s.bullet->event_date) + "|" +
                       fnv1a64_hex(s.bullet->bullet_text);
    event.event_id =
        make_event_id(event.surface, event.source_key, event.title, event.t_e);
    result.events.push_back(std::move(event));
    ++articles_in_output[s.bullet->linked_article];
  }

  result.distinct_articles = static_cast<int>(articles_in_output.size());
  result.shortfall = static_cast<int>(result.events.size()) < top_n;
  return result;
}

}  // namespace newsrace
