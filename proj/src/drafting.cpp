#include "newsrace/drafting.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <httplib.h>
#include <json.hpp>

#include "newsrace/text.hpp"

namespace newsrace {
namespace {

using json = nlohmann::json;

const std::set<std::string>& stopwords() {
  static const std::set<std::string> kWords = {
      "the", "a",    "an",   "of",   "in",   "on",    "at",    "by",
      "to",  "for",  "and",  "or",   "is",   "are",   "was",   "were",
      "be",  "been", "will", "with", "as",   "it",    "this",  "that",
      "who", "what", "when", "where", "which", "why",  "how",   "does",
      "do",  "did",  "would", "could", "should", "from", "into", "over"};
  return kWords;
}

const std::set<std::string>& month_words() {
  static const std::set<std::string> kMonths = {
      "january", "february", "march",     "april",   "may",      "june",
      "july",    "august",   "september", "october", "november", "december",
      "jan",     "feb",      "mar",       "apr",     "jun",      "jul",
      "aug",     "sep",      "sept",      "oct",     "nov",      "dec"};
  return kMonths;
}

// Words whose presence signals the event type; shared by the tight boolean's
// event-word OR-set, the feature rules, and ambiguity adjudication.
const std::vector<std::string>& event_words() {
  static const std::vector<std::string> kWords = {
      "strike",   "attack",  "explosion", "blast",    "crash",  "shooting",
      "killed",   "dies",    "die",       "dead",     "death",  "injured",
      "earthquake", "flood", "collapse",  "fire",     "erupt",  "resign",
      "win",      "won",     "defeat",    "beat",     "elect",  "election",
      "vote",     "draft",   "sign",      "announce", "launch", "release",
      "approve",  "ban",     "sanction",  "deal",     "agree",  "cut",
      "raise",    "record",  "verdict",   "arrest",   "charge", "out",
      "match",    "final",   "game"};
  return kWords;
}

const std::vector<std::string>& generic_broadeners() {
  static const std::vector<std::string> kWords = {
      "breaking", "news", "update", "report", "latest",
      "today",    "live", "now",    "new",    "world"};
  return kWords;
}

const std::map<std::string, std::vector<std::string>>& alias_table() {
  static const std::map<std::string, std::vector<std::string>> kTable = {
      // NBA / NFL / MLB team shorthands -> home market.
      {"mavericks", {"Dallas"}},
      {"lakers", {"Los Angeles"}},
      {"celtics", {"Boston"}},
      {"nuggets", {"Denver"}},
      {"thunder", {"Oklahoma City"}},
      {"pistons", {"Detroit"}},
      {"spurs", {"San Antonio"}},
      {"knicks", {"New York"}},
      {"warriors", {"Golden State"}},
      {"chiefs", {"Kansas City"}},
      {"eagles", {"Philadelphia"}},
      {"cowboys", {"Dallas"}},
      {"yankees", {"New York"}},
      {"dodgers", {"Los Angeles"}},
      // Organisations.
      {"nfl", {"National Football League"}},
      {"nba", {"National Basketball Association"}},
      {"mlb", {"Major League Baseball"}},
      {"ufc", {"Ultimate Fighting Championship"}},
      {"fifa", {"World Cup"}},
      {"fed", {"Federal Reserve"}},
      {"ecb", {"European Central Bank"}},
      {"opec", {"oil producers"}},
      {"sec", {"Securities and Exchange Commission"}},
      {"fda", {"Food and Drug Administration"}},
      {"nato", {"North Atlantic Treaty Organization"}},
      // Country adjectives, useful for ladder widening.
      {"iran", {"Iranian", "Tehran"}},
      {"pakistan", {"Pakistani", "Islamabad"}},
      {"india", {"Indian", "New Delhi"}},
      {"china", {"Chinese", "Beijing"}},
      {"russia", {"Russian", "Moscow"}},
      {"ukraine", {"Ukrainian", "Kyiv"}},
      {"israel", {"Israeli", "Jerusalem"}},
      {"germany", {"German", "Berlin"}},
      {"france", {"French", "Paris"}},
      {"spain", {"Spanish", "Madrid"}},
      {"hungary", {"Hungarian", "Budapest"}},
      {"turkey", {"Turkish", "Ankara"}},
      {"japan", {"Japanese", "Tokyo"}},
      {"brazil", {"Brazilian", "Brasilia"}},
      {"mexico", {"Mexican", "Mexico City"}},
      {"venezuela", {"Venezuelan", "Caracas"}},
      {"argentina", {"Argentine", "Buenos Aires"}},
      {"nigeria", {"Nigerian", "Abuja"}},
      {"egypt", {"Egyptian", "Cairo"}},
      {"syria", {"Syrian", "Damascus"}},
      {"yemen", {"Yemeni", "Sanaa"}},
      {"lebanon", {"Lebanese", "Beirut"}},
      {"afghanistan", {"Afghan", "Kabul"}},
      {"greenland", {"Nuuk", "Danish"}},
      {"canada", {"Canadian", "Ottawa"}},
      {"australia", {"Australian", "Canberra"}},
  };
  return kTable;
}

const std::vector<std::string>& country_names() {
  static const std::vector<std::string> kNames = {
      "United States", "Pakistan",  "Iran",    "India",     "China",
      "Russia",        "Ukraine",   "Israel",  "Germany",   "France",
      "Spain",         "Hungary",   "Turkey",  "Japan",     "Brazil",
      "Mexico",        "Venezuela", "Argentina", "Nigeria", "Egypt",
      "Syria",         "Yemen",     "Lebanon", "Afghanistan", "Greenland",
      "Canada",        "Australia", "Italy",   "Poland",    "Greece",
      "Sweden",        "Norway",    "Serbia",  "Romania",   "Indonesia",
      "Philippines",   "Thailand",  "Vietnam", "Korea",     "Taiwan",
      "Saudi Arabia",  "Qatar",     "Iraq",    "Jordan",    "Sudan",
      "Ethiopia",      "Kenya",     "Ghana",   "Chile",     "Colombia",
      "Peru",          "Bolivia",   "Ecuador", "Cuba",      "Haiti"};
  return kNames;
}

const std::vector<std::string>& us_markers() {
  static const std::vector<std::string> kMarkers = {
      "United States", "U.S.",     "US",        "American", "Washington",
      "NFL",           "NBA",      "MLB",       "NHL",      "Congress",
      "Senate",        "White House", "Federal Reserve",    "California",
      "Texas",         "Florida",  "New York",  "Supreme Court"};
  return kMarkers;
}

bool is_all_digits(const std::string& word) {
  if (word.empty()) return false;
  return std::all_of(word.begin(), word.end(), [](unsigned char c) {
    return std::isdigit(c) != 0;
  });
}

bool starts_upper(const std::string& word) {
  return !word.empty() && std::isupper(static_cast<unsigned char>(word[0]));
}

// Strips punctuation from both ends; keeps internal dots of abbreviations
// like "U.S." intact, including the trailing one.
std::string strip_edges(const std::string& raw) {
  static const std::string kEdge = "\"'`,;:!?()[]{}<>";
  size_t begin = 0;
  size_t end = raw.size();
  while (begin < end && (kEdge.find(raw[begin]) != std::string::npos ||
                         raw[begin] == '.')) {
    ++begin;
  }
  while (end > begin && kEdge.find(raw[end - 1]) != std::string::npos) {
    --end;
  }
  // Trailing dots: drop them unless the token is a dotted abbreviation.
  while (end > begin && raw[end - 1] == '.') {
    const std::string inner = raw.substr(begin, end - begin - 1);
    if (inner.find('.') != std::string::npos) break;
    --end;
  }
  return raw.substr(begin, end - begin);
}

std::vector<std::string> whitespace_words(const std::string& s) {
  std::vector<std::string> words;
  std::istringstream in(s);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

bool is_stopword(const std::string& word) {
  return stopwords().count(text::to_lower(word)) > 0;
}

bool is_month(const std::string& word) {
  return month_words().count(text::to_lower(word)) > 0;
}

// token matches `word` allowing the common inflections (s, es, ed, d, ing).
bool stem_equal(const std::string& token, const std::string& word) {
  if (token == word) return true;
  if (token.size() <= word.size()) return false;
  const std::string tail = token.substr(word.size());
  if (token.compare(0, word.size(), word) != 0) return false;
  return tail == "s" || tail == "es" || tail == "ed" || tail == "d" ||
         tail == "ing";
}

std::vector<std::string> found_event_words(const std::string& text_blob) {
  std::vector<std::string> tokens = text::tokenize(text_blob);
  std::vector<std::string> found;
  for (const std::string& w : event_words()) {
    for (const std::string& tok : tokens) {
      if (stem_equal(tok, w)) {
        if (std::find(found.begin(), found.end(), w) == found.end()) {
          found.push_back(w);
        }
        break;
      }
    }
  }
  return found;
}

bool contains_term_ci(const std::vector<std::string>& terms,
                      const std::string& candidate) {
  const std::string lowered = text::to_lower(candidate);
  for (const std::string& t : terms) {
    if (text::to_lower(t) == lowered) return true;
  }
  return false;
}

void append_unique_ci(std::vector<std::string>& terms,
                      const std::string& candidate) {
  if (!contains_term_ci(terms, candidate)) terms.push_back(candidate);
}

std::string event_blob(const Event& event) {
  return event.title + " " + event.description;
}

std::string title_phrase(const Event& event) {
  std::vector<std::string> words = whitespace_words(event.title);
  std::vector<std::string> kept;
  for (std::string& w : words) {
    std::string cleaned = strip_edges(w);
    if (!cleaned.empty()) kept.push_back(cleaned);
  }
  std::string phrase;
  for (const std::string& w : kept) {
    if (!phrase.empty()) phrase += ' ';
    phrase += w;
  }
  return phrase.empty() ? event.title : phrase;
}

bool term_is_prohibited(const std::string& term,
                        const std::vector<std::string>& prohibited) {
  for (const std::string& tok : text::tokenize(term)) {
    if (std::find(prohibited.begin(), prohibited.end(), tok) !=
        prohibited.end()) {
      return true;
    }
  }
  return false;
}

std::vector<std::string> filter_prohibited(
    const std::vector<std::string>& terms,
    const std::vector<std::string>& prohibited) {
  std::vector<std::string> kept;
  for (const std::string& t : terms) {
    if (!term_is_prohibited(t, prohibited)) kept.push_back(t);
  }
  return kept;
}

double term_score(const std::string& term) {
  const std::vector<std::string> tokens = whitespace_words(term);
  if (tokens.empty()) return 0.0;
  bool all_stop = true;
  for (const std::string& tok : tokens) {
    if (!is_stopword(strip_edges(tok))) {
      all_stop = false;
      break;
    }
  }
  if (all_stop) return 0.0;
  static const std::set<std::string> kCommon = {
      "news",  "report", "update", "breaking", "today", "live",
      "latest", "world", "game",   "match",    "video", "watch",
      "now",   "new"};
  if (kCommon.count(text::to_lower(term)) > 0) return 0.2;
  for (const std::string& tok : tokens) {
    if (is_all_digits(strip_edges(tok))) return 0.3;
  }
  if (tokens.size() >= 2) return 0.6;
  return starts_upper(term) ? 0.5 : 0.3;
}

std::string require_env(const char* name) {
  const char* value = std::getenv(name);
  if (value == nullptr || *value == '\0') {
    throw BackendError(std::string(name) +
                       " is not set; the remote model backend needs it");
  }
  return value;
}

std::string json_string_or_throw(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw BackendError(std::string("model reply missing string field '") +
                       key + "'");
  }
  return j.at(key).get<std::string>();
}

std::string validated_label(const std::string& value,
                            const std::vector<std::string>& domain) {
  if (std::find(domain.begin(), domain.end(), value) == domain.end()) {
    throw BackendError("model reply used label '" + value +
                       "' outside the closed vocabulary");
  }
  return value;
}

BooleanQuery query_from_json_clusters(const json& clusters, QueryKind kind) {
  if (!clusters.is_array()) {
    throw BackendError("model reply boolean is not an array of OR-sets");
  }
  BooleanQuery q;
  q.kind = kind;
  for (const json& cluster : clusters) {
    if (!cluster.is_array()) {
      throw BackendError("model reply OR-set is not an array");
    }
    std::vector<std::string> terms;
    for (const json& term : cluster) {
      if (!term.is_string()) {
        throw BackendError("model reply term is not a string");
      }
      terms.push_back(term.get<std::string>());
    }
    q.clusters.push_back(std::move(terms));
  }
  if (const std::string reason = q.invalid_reason(); !reason.empty()) {
    throw BackendError("model reply boolean invalid: " + reason);
  }
  return q;
}

}  // namespace

std::vector<std::string> extract_entities(const Event& event) {
  const std::vector<std::string> words = whitespace_words(event_blob(event));
  std::vector<std::string> entities;
  std::vector<std::string> run;
  auto flush = [&]() {
    if (!run.empty()) {
      std::string joined;
      for (const std::string& w : run) {
        if (!joined.empty()) joined += ' ';
        joined += w;
      }
      if (joined.size() >= 2) append_unique_ci(entities, joined);
      run.clear();
    }
  };
  for (const std::string& raw : words) {
    const std::string w = strip_edges(raw);
    const bool breaks = w.empty() || !starts_upper(w) || is_stopword(w) ||
                        is_month(w) || is_all_digits(w);
    if (breaks) {
      flush();
    } else {
      run.push_back(w);
    }
    // Punctuation at the end of the raw token ends the phrase too:
    // "Dallas, Texas" is two runs, not one.
    if (!breaks && !raw.empty()) {
      const char last = raw.back();
      if (last == ',' || last == ';' || last == ':' || last == '?' ||
          last == '!' || (last == '.' && w.back() != '.')) {
        flush();
      }
    }
  }
  flush();
  if (entities.size() > 8) entities.resize(8);
  return entities;
}

std::vector<std::string> alias_terms(const std::string& entity) {
  const auto& table = alias_table();
  // Try the whole entity first, then its individual words.
  auto it = table.find(text::to_lower(entity));
  if (it != table.end()) return it->second;
  std::vector<std::string> merged;
  for (const std::string& raw : whitespace_words(entity)) {
    auto wit = table.find(text::to_lower(strip_edges(raw)));
    if (wit != table.end()) {
      for (const std::string& a : wit->second) append_unique_ci(merged, a);
    }
  }
  return merged;
}

std::vector<std::string> geo_terms(const Event& event) {
  const std::vector<std::string> tokens = text::tokenize(event_blob(event));
  std::vector<std::string> found;
  for (const std::string& name : country_names()) {
    if (text::term_matches(tokens, text::normalize_term(name))) {
      append_unique_ci(found, name);
    }
  }
  return found;
}

std::vector<std::string> prohibited_terms(const Event& event) {
  if (event.surface != Surface::polymarket) return {};
  std::vector<std::string> banned = {"yes",    "no",     "out",   "remain",
                                     "remains", "win",   "wins",  "lose",
                                     "loses",  "above",  "below", "before"};
  for (const std::string& raw : whitespace_words(event.title)) {
    const std::string w = strip_edges(raw);
    const std::string lw = text::to_lower(w);
    if (is_month(w) || is_all_digits(w)) {
      if (std::find(banned.begin(), banned.end(), lw) == banned.end()) {
        banned.push_back(lw);
      }
    }
  }
  return banned;
}

FeatureVector FallbackBackend::extract_features(const Event& event) {
  FeatureVector f;
  f.clock_edge = labels::kUnknown;
  f.live_visible = labels::kUnknown;
  f.institutional_source = labels::kUnknown;
  f.geographic_scope = labels::kUnknown;
  f.language_primary = labels::kUnknown;

  const std::string blob = event_blob(event);
  size_t alnum = 0;
  for (unsigned char c : blob) {
    if (std::isalnum(c)) ++alnum;
  }
  if (alnum < 3) return f;  // effectively empty text: everything unknown

  // language_primary: byte-level heuristic.
  size_t non_ascii = 0;
  for (unsigned char c : blob) {
    if (c >= 0x80) ++non_ascii;
  }
  f.language_primary = (non_ascii * 5 > blob.size()) ? labels::kNonEnglish
                                                     : labels::kEnglish;

  const std::vector<std::string> tokens = text::tokenize(blob);
  auto any_token = [&](const std::vector<std::string>& words) {
    for (const std::string& w : words) {
      for (const std::string& tok : tokens) {
        if (stem_equal(tok, w)) return true;
      }
    }
    return false;
  };

  static const std::vector<std::string> kUnscheduled = {
      "attack", "strike", "explosion", "blast",      "crash",  "dies",
      "die",    "dead",   "death",     "killed",     "shooting", "earthquake",
      "flood",  "collapse", "resign",  "fire",       "erupt",  "outage",
      "spill",  "derail"};
  static const std::vector<std::string> kScheduled = {
      "draft",   "election", "match", "game",  "final",  "cup",
      "ceremony", "award",   "vote",  "summit", "olympic", "debate",
      "launch",  "ipo",      "meeting", "hearing", "verdict", "deadline"};
  if (any_token(kUnscheduled)) {
    f.clock_edge = labels::kUnscheduled;
  } else if (any_token(kScheduled)) {
    f.clock_edge = labels::kScheduled;
  }

  static const std::vector<std::string> kLive = {
      "game", "match", "draft", "live",  "ceremony", "race",
      "fight", "debate", "launch", "award", "final",  "olympic"};
  if (any_token(kLive)) {
    f.live_visible = labels::kYes;
  } else if (f.clock_edge == labels::kUnscheduled) {
    f.live_visible = labels::kNo;
  }

  static const std::vector<std::string> kInstitutional = {
      "government", "ministry", "parliament", "court",   "federal",
      "commission", "police",   "military",   "senate",  "congress",
      "regulator",  "central",  "agency",     "official"};
  if (any_token(kInstitutional)) {
    f.institutional_source = labels::kYes;
  } else if (f.live_visible == labels::kYes) {
    f.institutional_source = labels::kNo;
  }

  bool us = false;
  for (const std::string& marker : us_markers()) {
    if (text::term_matches(tokens, text::normalize_term(marker))) {
      us = true;
      break;
    }
  }
  static const std::vector<std::string> kGlobalWords = {"world", "global",
                                                        "olympics",
                                                        "worldwide"};
  std::vector<std::string> geos = geo_terms(event);
  const bool foreign =
      std::any_of(geos.begin(), geos.end(), [](const std::string& g) {
        return g != "United States";
      });
  if (us && !foreign) {
    f.geographic_scope = labels::kUsNational;
  } else if (any_token(kGlobalWords)) {
    f.geographic_scope = labels::kGlobal;
  } else if (foreign) {
    f.geographic_scope = labels::kInternational;
  }
  return f;
}

std::pair<BooleanQuery, BooleanQuery> FallbackBackend::draft_booleans(
    const Event& event) {
  const std::vector<std::string> entities = extract_entities(event);
  const std::vector<std::string> geos = geo_terms(event);
  const std::vector<std::string> banned = prohibited_terms(event);
  const std::vector<std::string> evwords = found_event_words(event_blob(event));

  // --- tight query: 3-4 AND clusters ------------------------------------
  BooleanQuery news;
  news.kind = QueryKind::news_tight;

  std::vector<std::vector<std::string>> tight;
  auto entity_cluster = [&](const std::string& entity) {
    std::vector<std::string> cluster = {entity};
    for (const std::string& a : alias_terms(entity)) {
      append_unique_ci(cluster, a);
    }
    return cluster;
  };
  if (!entities.empty()) {
    tight.push_back(entity_cluster(entities[0]));
    if (entities.size() >= 2) tight.push_back(entity_cluster(entities[1]));
  } else {
    tight.push_back({title_phrase(event)});
  }
  {
    std::vector<std::string> ev =
        evwords.empty() ? std::vector<std::string>{"breaking", "report"}
                        : evwords;
    if (ev.size() > 4) ev.resize(4);
    tight.push_back(ev);
  }
  if (!geos.empty()) {
    std::vector<std::string> geo_cluster;
    for (const std::string& g : geos) {
      bool already = false;
      for (const auto& cluster : tight) {
        if (contains_term_ci(cluster, g)) {
          already = true;
          break;
        }
      }
      if (!already) append_unique_ci(geo_cluster, g);
    }
    if (!geo_cluster.empty() && tight.size() < 4) tight.push_back(geo_cluster);
  }
  if (tight.size() < 3) {
    const std::string phrase = title_phrase(event);
    if (!contains_term_ci(tight.front(), phrase)) {
      tight.insert(tight.begin() + 1, {phrase});
    } else {
      tight.push_back({"update", "latest"});
    }
  }
  if (tight.size() > 4) tight.resize(4);
  news.clusters = std::move(tight);

  // --- permissive query: 1-2 AND clusters -------------------------------
  BooleanQuery x;
  x.kind = QueryKind::x_permissive;

  std::vector<std::string> broad;
  for (const std::string& e : entities) {
    if (broad.size() >= 4) break;
    append_unique_ci(broad, e);
  }
  broad = filter_prohibited(broad, banned);
  if (broad.empty()) {
    // Fall back to the title with any prohibited words removed.
    std::vector<std::string> kept;
    for (const std::string& raw : whitespace_words(event.title)) {
      const std::string w = strip_edges(raw);
      if (w.empty()) continue;
      if (term_is_prohibited(w, banned)) continue;
      kept.push_back(w);
    }
    std::string phrase;
    for (const std::string& w : kept) {
      if (!phrase.empty()) phrase += ' ';
      phrase += w;
    }
    broad.push_back(phrase.empty() ? event.title : phrase);
  }
  x.clusters.push_back(broad);
  if (!geos.empty()) {
    std::vector<std::string> geo_cluster;
    for (const std::string& g : geos) {
      if (!contains_term_ci(broad, g)) append_unique_ci(geo_cluster, g);
    }
    geo_cluster = filter_prohibited(geo_cluster, banned);
    if (!geo_cluster.empty()) x.clusters.push_back(geo_cluster);
  }
  return {news, x};
}

double FallbackBackend::specificity(const BooleanQuery& query) {
  double total = 0.0;
  for (const auto& cluster : query.clusters) {
    double best = 0.0;
    for (const std::string& term : cluster) {
      best = std::max(best, term_score(term));
    }
    total += best;
  }
  return std::min(total, 1.0);
}

bool FallbackBackend::adjudicate(const std::string& body, const Event& event) {
  // On-topic iff the body names the event's subject AND carries an
  // event word.  Subject terms: entities, their aliases, single entity
  // words, and the geo terms.
  std::vector<std::string> subject_terms;
  for (const std::string& e : extract_entities(event)) {
    append_unique_ci(subject_terms, e);
    for (const std::string& a : alias_terms(e)) {
      append_unique_ci(subject_terms, a);
    }
    for (const std::string& raw : whitespace_words(e)) {
      const std::string w = strip_edges(raw);
      if (w.size() >= 3 && !is_stopword(w)) append_unique_ci(subject_terms, w);
    }
  }
  for (const std::string& g : geo_terms(event)) {
    append_unique_ci(subject_terms, g);
  }
  const std::vector<std::string> body_tokens = text::tokenize(body);
  bool subject = false;
  for (const std::string& t : subject_terms) {
    if (text::term_matches(body_tokens, text::normalize_term(t))) {
      subject = true;
      break;
    }
  }
  if (!subject) return false;
  return !found_event_words(body).empty();
}

RemoteBackend::RemoteBackend(std::filesystem::path prompt_dir,
                             std::string model_name)
    : prompt_dir_(std::move(prompt_dir)),
      model_name_(std::move(model_name)),
      host_(require_env("NEWSRACE_MODEL_HOST")),
      key_(require_env("NEWSRACE_MODEL_KEY")) {}

std::string RemoteBackend::prompt_text(const std::string& prompt_name) {
  const std::filesystem::path path = prompt_dir_ / (prompt_name + ".txt");
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw BackendError("prompt asset not found: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string RemoteBackend::complete(const std::string& prompt_name,
                                    const std::string& user_payload) {
  json body = {
      {"model", model_name_},
      {"temperature", 0},
      {"messages",
       json::array({json{{"role", "system"}, {"content", prompt_text(prompt_name)}},
                    json{{"role", "user"}, {"content", user_payload}}})},
  };
  const std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 0; attempt < 3; ++attempt) {
    httplib::SSLClient client(host_);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(120, 0);
    httplib::Headers headers = {{"Authorization", "Bearer " + key_}};
    auto res = client.Post("/v1/chat/completions", headers, payload,
                           "application/json");
    if (!res) {
      last_error = "transport failure talking to " + host_;
      continue;
    }
    if (res->status >= 500) {
      last_error = "model host returned " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw BackendError("model host returned " + std::to_string(res->status) +
                         ": " + res->body);
    }
    json parsed;
    try {
      parsed = json::parse(res->body);
    } catch (const json::exception& e) {
      throw BackendError(std::string("model reply is not JSON: ") + e.what());
    }
    if (!parsed.contains("choices") || !parsed["choices"].is_array() ||
        parsed["choices"].empty()) {
      throw BackendError("model reply has no choices");
    }
    const json& message = parsed["choices"][0].value("message", json::object());
    if (!message.contains("content") || !message["content"].is_string()) {
      throw BackendError("model reply has no message content");
    }
    return message["content"].get<std::string>();
  }
  throw BackendError("model request failed after retries: " + last_error);
}

FeatureVector RemoteBackend::extract_features(const Event& event) {
  json payload = {{"title", event.title}, {"description", event.description}};
  json reply;
  try {
    reply = json::parse(complete("features", payload.dump()));
  } catch (const json::exception& e) {
    throw BackendError(std::string("feature reply is not JSON: ") + e.what());
  }
  FeatureVector f;
  f.clock_edge = validated_label(
      json_string_or_throw(reply, "clock_edge"),
      {labels::kScheduled, labels::kUnscheduled, labels::kUnknown});
  f.live_visible =
      validated_label(json_string_or_throw(reply, "live_visible"),
                      {labels::kYes, labels::kNo, labels::kUnknown});
  f.institutional_source =
      validated_label(json_string_or_throw(reply, "institutional_source"),
                      {labels::kYes, labels::kNo, labels::kUnknown});
  f.geographic_scope = validated_label(
      json_string_or_throw(reply, "geographic_scope"),
      {labels::kUsNational, labels::kInternational, labels::kGlobal,
       labels::kUnknown});
  f.language_primary =
      validated_label(json_string_or_throw(reply, "language_primary"),
                      {labels::kEnglish, labels::kNonEnglish, labels::kUnknown});
  return f;
}

std::pair<BooleanQuery, BooleanQuery> RemoteBackend::draft_booleans(
    const Event& event) {
  json payload = {{"title", event.title},
                  {"description", event.description},
                  {"surface", to_string(event.surface)}};
  json reply;
  try {
    reply = json::parse(complete("booleans", payload.dump()));
  } catch (const json::exception& e) {
    throw BackendError(std::string("boolean reply is not JSON: ") + e.what());
  }
  if (!reply.contains("news_tight") || !reply.contains("x_permissive")) {
    throw BackendError("boolean reply missing news_tight/x_permissive");
  }
  BooleanQuery news =
      query_from_json_clusters(reply["news_tight"], QueryKind::news_tight);
  BooleanQuery x =
      query_from_json_clusters(reply["x_permissive"], QueryKind::x_permissive);
  return {news, x};
}

double RemoteBackend::specificity(const BooleanQuery& query) {
  json payload = {{"query", query.render()}};
  json reply;
  try {
    reply = json::parse(complete("specificity", payload.dump()));
  } catch (const json::exception& e) {
    throw BackendError(std::string("specificity reply is not JSON: ") +
                       e.what());
  }
  if (!reply.contains("score") || !reply["score"].is_number()) {
    throw BackendError("specificity reply missing numeric score");
  }
  const double score = reply["score"].get<double>();
  if (score < 0.0 || score > 1.0) {
    throw BackendError("specificity score outside [0,1]");
  }
  return score;
}

bool RemoteBackend::adjudicate(const std::string& body, const Event& event) {
  json payload = {{"body", body},
                  {"title", event.title},
                  {"description", event.description}};
  json reply;
  try {
    reply = json::parse(complete("adjudicate", payload.dump()));
  } catch (const json::exception& e) {
    throw BackendError(std::string("adjudication reply is not JSON: ") +
                       e.what());
  }
  if (!reply.contains("on_topic") || !reply["on_topic"].is_boolean()) {
    throw BackendError("adjudication reply missing on_topic boolean");
  }
  return reply["on_topic"].get<bool>();
}

SpecificityScore specificity_gate(const BooleanQuery& query,
                                  ModelBackend& backend, double threshold) {
  SpecificityScore result;
  result.threshold = threshold;
  if (!query.valid()) {
    result.value = 0.0;
    result.approved = false;
    return result;
  }
  result.value = backend.specificity(query);
  result.approved = result.value >= threshold;
  return result;
}

DraftResult draft_booleans_with_retry(const Event& event,
                                      ModelBackend& backend,
                                      FallbackBackend& fallback) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      auto [news, x] = backend.draft_booleans(event);
      if (news.valid() && x.valid()) {
        return {std::move(news), std::move(x), false};
      }
    } catch (const BackendError&) {
      // retry, then fall back
    }
  }
  auto [news, x] = fallback.draft_booleans(event);
  return {std::move(news), std::move(x), true};
}

FeatureVector extract_features_safe(const Event& event, ModelBackend& backend,
                                    bool& warned) {
  warned = false;
  try {
    return backend.extract_features(event);
  } catch (const std::exception&) {
    warned = true;
    FeatureVector f;
    f.clock_edge = labels::kUnknown;
    f.live_visible = labels::kUnknown;
    f.institutional_source = labels::kUnknown;
    f.geographic_scope = labels::kUnknown;
    f.language_primary = labels::kUnknown;
    return f;
  }
}

std::vector<BooleanQuery> broaden_ladder(const BooleanQuery& x,
                                         const Event& event, int levels) {
  if (levels < 1) {
    throw std::invalid_argument("broaden_ladder needs at least one level");
  }
  std::vector<BooleanQuery> ladder;
  ladder.push_back(x);
  if (levels == 1) return ladder;

  // Widening material, grouped so successive levels draw from successively
  // less specific vocabulary: aliases, then other entities, then title and
  // description proper nouns, then generic broadeners one at a time.
  std::vector<std::vector<std::string>> groups;
  {
    std::vector<std::string> aliases;
    for (const std::string& term : x.clusters.front()) {
      for (const std::string& a : alias_terms(term)) {
        append_unique_ci(aliases, a);
      }
    }
    groups.push_back(std::move(aliases));

    std::vector<std::string> extra_entities;
    for (const std::string& e : extract_entities(event)) {
      extra_entities.push_back(e);
    }
    groups.push_back(std::move(extra_entities));

    auto proper_words = [](const std::string& s) {
      std::vector<std::string> out;
      for (const std::string& raw : whitespace_words(s)) {
        const std::string w = strip_edges(raw);
        if (w.size() >= 3 && starts_upper(w) && !is_stopword(w) &&
            !is_month(w) && !is_all_digits(w)) {
          append_unique_ci(out, w);
        }
      }
      return out;
    };
    groups.push_back(proper_words(event.title));
    groups.push_back(proper_words(event.description));
    for (const std::string& g : generic_broadeners()) {
      groups.push_back({g});
    }
  }

  const std::vector<std::string> banned = prohibited_terms(event);
  size_t group_idx = 0;
  std::vector<std::string> widened = x.clusters.front();
  auto widen_once = [&]() {
    while (group_idx < groups.size()) {
      std::vector<std::string> fresh;
      for (const std::string& t : filter_prohibited(groups[group_idx], banned)) {
        if (!contains_term_ci(widened, t)) fresh.push_back(t);
      }
      ++group_idx;
      if (!fresh.empty()) {
        for (const std::string& t : fresh) widened.push_back(t);
        return;
      }
    }
    // Material exhausted: the level repeats the previous one, which keeps
    // the ladder monotone.
  };

  for (int level = 1; level <= levels - 2; ++level) {
    widen_once();
    BooleanQuery q;
    q.kind = QueryKind::x_permissive;
    q.clusters.push_back(widened);
    for (size_t i = 1; i < x.clusters.size(); ++i) {
      q.clusters.push_back(x.clusters[i]);
    }
    ladder.push_back(std::move(q));
  }

  // Last level: geography only.  With a separate geo cluster, dropping the
  // entity cluster leaves the (unchanged) geo OR-set; with a single
  // cluster, widen it into the geo vocabulary instead.
  BooleanQuery last;
  last.kind = QueryKind::x_permissive;
  if (x.clusters.size() >= 2) {
    std::vector<std::string> geo_cluster = x.clusters.back();
    for (const std::string& g : geo_cluster) {
      for (const std::string& a : alias_terms(g)) {
        if (!term_is_prohibited(a, banned)) {
          append_unique_ci(geo_cluster, a);
        }
      }
    }
    last.clusters.push_back(std::move(geo_cluster));
  } else {
    std::vector<std::string> merged = widened;
    for (const std::string& g : geo_terms(event)) {
      if (!term_is_prohibited(g, banned)) append_unique_ci(merged, g);
      for (const std::string& a : alias_terms(g)) {
        if (!term_is_prohibited(a, banned)) append_unique_ci(merged, a);
      }
    }
    if (merged == widened) {
      // No geography in the event text: fall back to the broadest generic
      // terms so the level still widens.
      append_unique_ci(merged, "world");
      append_unique_ci(merged, "international");
    }
    last.clusters.push_back(std::move(merged));
  }
  ladder.push_back(std::move(last));
  return ladder;
}

}  // namespace newsrace
