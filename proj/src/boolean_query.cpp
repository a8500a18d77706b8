#include "newsrace/boolean_query.hpp"

#include <algorithm>
#include <stdexcept>

#include "newsrace/text.hpp"

namespace newsrace {

std::string to_string(QueryKind k) {
  return k == QueryKind::news_tight ? "news_tight" : "x_permissive";
}

QueryKind query_kind_from_string(const std::string& s) {
  if (s == "news_tight") return QueryKind::news_tight;
  if (s == "x_permissive") return QueryKind::x_permissive;
  throw std::invalid_argument("unknown query kind: " + s);
}

std::string BooleanQuery::render() const {
  std::string out;
  for (size_t ci = 0; ci < clusters.size(); ++ci) {
    if (ci) out += " AND ";
    out += '(';
    const auto& cluster = clusters[ci];
    for (size_t ti = 0; ti < cluster.size(); ++ti) {
      if (ti) out += " OR ";
      out += '"';
      out += cluster[ti];
      out += '"';
    }
    out += ')';
  }
  return out;
}

bool BooleanQuery::matches(const std::string& doc_text) const {
  for (const auto& cluster : clusters) {
    bool any = false;
    for (const auto& term : cluster) {
      if (text::contains_ci(doc_text, term)) {
        any = true;
        break;
      }
    }
    if (!any) return false;
  }
  return true;
}

std::string BooleanQuery::invalid_reason() const {
  const size_t n = clusters.size();
  if (kind == QueryKind::news_tight && (n < 3 || n > 4)) {
    return "news_tight query must have 3-4 AND-clusters, has " +
           std::to_string(n);
  }
  if (kind == QueryKind::x_permissive && (n < 1 || n > 2)) {
    return "x_permissive query must have 1-2 AND-clusters, has " +
           std::to_string(n);
  }
  for (const auto& cluster : clusters) {
    if (cluster.empty()) return "empty OR-set";
    for (const auto& term : cluster) {
      if (term.empty()) return "empty term";
      if (term.find('"') != std::string::npos) {
        return "term contains a double quote: " + term;
      }
    }
  }
  return "";
}

namespace {

struct Parser {
  const std::string& s;
  size_t pos = 0;

  explicit Parser(const std::string& text) : s(text) {}

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("malformed boolean at offset " +
                                std::to_string(pos) + ": " + what);
  }

  bool eat(char c) {
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  bool eat_word(const char* w) {
    const size_t len = std::char_traits<char>::length(w);
    if (s.compare(pos, len, w) == 0) {
      pos += len;
      return true;
    }
    return false;
  }

  std::string parse_term() {
    if (!eat('"')) fail("expected opening quote");
    const size_t start = pos;
    const size_t close = s.find('"', start);
    if (close == std::string::npos) fail("unterminated quoted term");
    pos = close + 1;
    std::string term = s.substr(start, close - start);
    if (term.empty()) fail("empty term");
    return term;
  }

  std::vector<std::string> parse_cluster() {
    if (!eat('(')) fail("expected '('");
    std::vector<std::string> terms;
    skip_ws();
    terms.push_back(parse_term());
    skip_ws();
    while (eat_word("OR")) {
      skip_ws();
      terms.push_back(parse_term());
      skip_ws();
    }
    if (!eat(')')) fail("expected ')' or OR");
    return terms;
  }

  std::vector<std::vector<std::string>> parse_query() {
    std::vector<std::vector<std::string>> clusters;
    skip_ws();
    clusters.push_back(parse_cluster());
    skip_ws();
    while (eat_word("AND")) {
      skip_ws();
      clusters.push_back(parse_cluster());
      skip_ws();
    }
    if (pos != s.size()) fail("trailing input");
    return clusters;
  }
};

}  // namespace

BooleanQuery parse_boolean(const std::string& text, QueryKind kind) {
  Parser p(text);
  BooleanQuery q;
  q.kind = kind;
  q.clusters = p.parse_query();
  return q;
}

namespace {

bool cluster_superset_ci(const std::vector<std::string>& small,
                         const std::vector<std::string>& big) {
  for (const auto& t : small) {
    const std::string tl = text::to_lower(t);
    const bool found = std::any_of(big.begin(), big.end(), [&](const auto& u) {
      return text::to_lower(u) == tl;
    });
    if (!found) return false;
  }
  return true;
}

}  // namespace

bool structurally_broadens(const BooleanQuery& prev, const BooleanQuery& next) {
  for (const auto& nc : next.clusters) {
    const bool anchored = std::any_of(
        prev.clusters.begin(), prev.clusters.end(),
        [&](const auto& pc) { return cluster_superset_ci(pc, nc); });
    if (!anchored) return false;
  }
  return true;
}

}  // namespace newsrace
