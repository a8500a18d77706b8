#include "newsrace/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <unordered_set>

namespace newsrace::text {

std::string to_lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

bool contains_ci(const std::string& haystack, const std::string& needle) {
  if (needle.empty()) return false;
  auto it = std::search(haystack.begin(), haystack.end(), needle.begin(),
                        needle.end(), [](char a, char b) {
                          return std::tolower(static_cast<unsigned char>(a)) ==
                                 std::tolower(static_cast<unsigned char>(b));
                        });
  return it != haystack.end();
}

bool contains_cs(const std::string& haystack, const std::string& needle) {
  if (needle.empty()) return false;
  return haystack.find(needle) != std::string::npos;
}

std::vector<std::string> tokenize(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string normalize_term(const std::string& term) {
  const auto tokens = tokenize(term);
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

bool term_matches(const std::vector<std::string>& tokens,
                  const std::string& normalized_term) {
  const auto want = tokenize(normalized_term);
  if (want.empty() || tokens.size() < want.size()) return false;
  for (size_t i = 0; i + want.size() <= tokens.size(); ++i) {
    bool all = true;
    for (size_t j = 0; j < want.size(); ++j) {
      if (tokens[i + j] != want[j]) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

bool is_stopword(const std::string& w) {
  static const std::unordered_set<std::string> kStop = {
      "a",    "an",   "and",  "are",  "as",   "at",   "be",    "by",   "did",
      "do",   "does", "for",  "from", "had",  "has",  "have",  "he",   "her",
      "his",  "if",   "in",   "is",   "it",   "its",  "of",    "on",   "or",
      "our",  "she",  "that", "the",  "their", "there", "they", "this", "to",
      "was",  "were", "will", "with", "would", "into", "after", "before",
      "over", "under", "than", "then", "when", "who",  "what",  "which",
      "out",  "up",   "down", "not",  "no",   "yes",  "been",  "about"};
  return kStop.count(w) > 0;
}

namespace {

bool decode_named_entity(const std::string& name, std::string* out) {
  if (name == "amp") return *out += '&', true;
  if (name == "lt") return *out += '<', true;
  if (name == "gt") return *out += '>', true;
  if (name == "quot") return *out += '"', true;
  if (name == "apos" || name == "#39") return *out += '\'', true;
  if (name == "nbsp") return *out += ' ', true;
  if (name == "mdash") return *out += "\xE2\x80\x94", true;
  if (name == "ndash") return *out += "\xE2\x80\x93", true;
  if (name == "hellip") return *out += "\xE2\x80\xA6", true;
  return false;
}

void append_utf8(unsigned long cp, std::string* out) {
  if (cp < 0x80) {
    out->push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out->push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out->push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out->push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out->push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

}  // namespace

std::string decode_entities(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    const size_t semi = s.find(';', i + 1);
    if (semi == std::string::npos || semi - i > 10) {
      out.push_back(s[i++]);
      continue;
    }
    const std::string name = s.substr(i + 1, semi - i - 1);
    if (!name.empty() && name[0] == '#') {
      const char* p = name.c_str() + 1;
      unsigned long cp = 0;
      if (name.size() > 1 && (name[1] == 'x' || name[1] == 'X')) {
        cp = std::strtoul(p + 1, nullptr, 16);
      } else {
        cp = std::strtoul(p, nullptr, 10);
      }
      if (cp > 0 && cp <= 0x10FFFF) {
        append_utf8(cp, &out);
        i = semi + 1;
        continue;
      }
    } else if (decode_named_entity(name, &out)) {
      i = semi + 1;
      continue;
    }
    out.push_back(s[i++]);
  }
  return out;
}

std::string strip_html(const std::string& s) {
  std::string raw;
  raw.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '<') {
      const size_t close = s.find('>', i);
      if (close == std::string::npos) break;
      std::string tag = to_lower(s.substr(i + 1, close - i - 1));
      // script/style bodies carry no visible text
      if (tag.rfind("script", 0) == 0 || tag.rfind("style", 0) == 0) {
        const std::string end =
            tag.rfind("script", 0) == 0 ? "</script" : "</style";
        size_t stop = s.find(end, close);
        if (stop == std::string::npos) break;
        stop = s.find('>', stop);
        if (stop == std::string::npos) break;
        i = stop + 1;
        continue;
      }
      // block-level closers separate words
      if (!raw.empty() && raw.back() != ' ') raw.push_back(' ');
      i = close + 1;
      continue;
    }
    raw.push_back(s[i++]);
  }
  std::string decoded = decode_entities(raw);
  // collapse whitespace
  std::string out;
  out.reserve(decoded.size());
  bool in_space = true;
  for (char ch : decoded) {
    const bool sp = std::isspace(static_cast<unsigned char>(ch)) != 0;
    if (sp) {
      if (!in_space) out.push_back(' ');
      in_space = true;
    } else {
      out.push_back(ch);
      in_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

}  // namespace newsrace::text
