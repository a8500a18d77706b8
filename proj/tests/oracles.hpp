#pragma once

// Independent reference implementations used only by tests.  Each oracle is
// deliberately written with a different technique from the production code
// (string arithmetic instead of 64-bit shifts, quadratic scans instead of
// prefix sums, character-level scans instead of the shared tokenizer) so an
// agreement test is evidence, not an echo.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------------------
// Snowflake decode via decimal-string arithmetic.
//
// The production decoder computes (raw >> 22) + 1288834974657 with native
// integers.  This oracle takes the id as a decimal string, performs long
// division by 2^22 = 4194304 digit by digit, and adds the epoch with
// schoolbook string addition.  No 64-bit shift is involved anywhere.
// ---------------------------------------------------------------------------

// Quotient of a non-negative decimal string divided by a small divisor.
inline std::string decimal_div(const std::string& number,
                               unsigned long long divisor) {
  std::string quotient;
  unsigned long long remainder = 0;
  for (char c : number) {
    remainder = remainder * 10 + static_cast<unsigned long long>(c - '0');
    quotient.push_back(static_cast<char>('0' + remainder / divisor));
    remainder %= divisor;
  }
  const size_t first = quotient.find_first_not_of('0');
  if (first == std::string::npos) return "0";
  return quotient.substr(first);
}

// Schoolbook addition of two non-negative decimal strings.
inline std::string decimal_add(const std::string& a, const std::string& b) {
  std::string out;
  int carry = 0;
  size_t ia = a.size(), ib = b.size();
  while (ia > 0 || ib > 0 || carry) {
    int sum = carry;
    if (ia > 0) sum += a[--ia] - '0';
    if (ib > 0) sum += b[--ib] - '0';
    out.push_back(static_cast<char>('0' + sum % 10));
    carry = sum / 10;
  }
  std::reverse(out.begin(), out.end());
  return out.empty() ? "0" : out;
}

// Milliseconds-since-Unix-epoch of a snowflake id given as a decimal string.
inline std::string snowflake_ms_decimal(const std::string& id_decimal) {
  return decimal_add(decimal_div(id_decimal, 4194304ull), "1288834974657");
}

// ---------------------------------------------------------------------------
// Rolling-window trade spike, brute force.
//
// For every anchor trade inside the scan window, sums the cents of all
// trades in (anchor - window_len, anchor] with a full O(n^2) rescan.
// Returns the anchor timestamp with the maximal sum; ties go to the
// earliest anchor.  Production code uses sorted prefix sums.
// ---------------------------------------------------------------------------

struct SpikeAnswer {
  bool found = false;
  long long anchor_ms = 0;
  long long cents = 0;
};

inline SpikeAnswer spike_brute_force(
    const std::vector<std::pair<long long, long long>>& trades_ms_cents,
    long long scan_start_ms, long long scan_end_ms, long long window_len_ms) {
  SpikeAnswer best;
  for (const auto& [anchor, _] : trades_ms_cents) {
    if (anchor < scan_start_ms || anchor > scan_end_ms) continue;
    long long sum = 0;
    for (const auto& [t, cents] : trades_ms_cents) {
      if (t > anchor - window_len_ms && t <= anchor) sum += cents;
    }
    if (!best.found || sum > best.cents ||
        (sum == best.cents && anchor < best.anchor_ms)) {
      best = {true, anchor, sum};
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Sliding-window rate-limit audit.
//
// True when no window (t - window_ms, t] anchored at any grant holds more
// than `cap` grants.  A violating window, if one exists, can always be slid
// right until its right edge sits on a grant, so anchoring at grants is
// exhaustive.
// ---------------------------------------------------------------------------

inline bool grants_respect_cap(const std::vector<long long>& grants_ms,
                               int cap, long long window_ms) {
  for (long long end : grants_ms) {
    int in_window = 0;
    for (long long g : grants_ms) {
      if (g > end - window_ms && g <= end) ++in_window;
    }
    if (in_window > cap) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Keyword verification, character-level.
//
// Counts how many distinct keywords appear whole-word in the text.  Instead
// of the shared tokenizer, both text and keyword are mapped onto a
// canonical " a b c "-style form (alnum runs lowered, everything else a
// single space, padded), and the keyword must appear as " keyword "
// somewhere in that canvas.
// ---------------------------------------------------------------------------

inline std::string word_canvas(const std::string& text) {
  std::string canvas = " ";
  bool in_gap = true;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      canvas.push_back(static_cast<char>(std::tolower(c)));
      in_gap = false;
    } else if (!in_gap) {
      canvas.push_back(' ');
      in_gap = true;
    }
  }
  if (canvas.back() != ' ') canvas.push_back(' ');
  return canvas;
}

inline bool keyword_in_text(const std::string& keyword,
                            const std::string& text) {
  const std::string canvas = word_canvas(text);
  std::string needle = word_canvas(keyword);
  // word_canvas already wraps the keyword in single spaces.
  return canvas.find(needle) != std::string::npos;
}

inline int distinct_keyword_hits(const std::vector<std::string>& keywords,
                                 const std::string& text) {
  std::set<std::string> seen;
  for (const auto& k : keywords) {
    if (keyword_in_text(k, text)) seen.insert(word_canvas(k));
  }
  return static_cast<int>(seen.size());
}

// ---------------------------------------------------------------------------
// Boolean-query evaluation for ladder monotonicity.
//
// Independent of BooleanQuery::matches: lowercases by hand and scans for
// each term as a plain substring.  Returns the set of matching document
// indices so the test can assert set inclusion level by level.
// ---------------------------------------------------------------------------

inline std::string lowered(const std::string& s) {
  std::string out = s;
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::set<size_t> matching_docs(
    const std::vector<std::vector<std::string>>& clusters,
    const std::vector<std::string>& corpus) {
  std::set<size_t> matched;
  for (size_t i = 0; i < corpus.size(); ++i) {
    const std::string doc = lowered(corpus[i]);
    bool all = true;
    for (const auto& cluster : clusters) {
      bool any = false;
      for (const auto& term : cluster) {
        if (doc.find(lowered(term)) != std::string::npos) {
          any = true;
          break;
        }
      }
      if (!any) {
        all = false;
        break;
      }
    }
    if (all) matched.insert(i);
  }
  return matched;
}

// ---------------------------------------------------------------------------
// Order statistics on millisecond deltas, by explicit full sort.
// ---------------------------------------------------------------------------

inline double median_minutes(std::vector<long long> deltas_ms) {
  std::sort(deltas_ms.begin(), deltas_ms.end());
  const size_t n = deltas_ms.size();
  if (n == 0) return 0.0;
  if (n % 2 == 1) return static_cast<double>(deltas_ms[n / 2]) / 60000.0;
  const double lo = static_cast<double>(deltas_ms[n / 2 - 1]);
  const double hi = static_cast<double>(deltas_ms[n / 2]);
  return (lo + hi) / 2.0 / 60000.0;
}

// Nearest order statistic at rank (n+1)*q, rounded half away from zero and
// clamped to [1, n]; mirrors the documented production convention but is
// computed here from scratch.
inline double quantile_minutes(std::vector<long long> deltas_ms, int quarter) {
  std::sort(deltas_ms.begin(), deltas_ms.end());
  const long long n = static_cast<long long>(deltas_ms.size());
  // rank = (n+1) * quarter / 4, rounded half away from zero (always
  // positive here, so half up).
  const long long numer = (n + 1) * quarter;
  long long rank = (2 * numer + 4) / 8;  // round(numer/4) half up
  if (rank < 1) rank = 1;
  if (rank > n) rank = n;
  return static_cast<double>(deltas_ms[static_cast<size_t>(rank - 1)]) /
         60000.0;
}

}  // namespace oracle
