#pragma once

#include <string>
#include <vector>

namespace newsrace {

// Which drafting policy a query was produced under.  Tight news queries carry
// 3-4 AND-clusters of named-entity anchors; permissive X queries carry 1-2
// clusters of broader OR-sets.
enum class QueryKind { news_tight, x_permissive };

std::string to_string(QueryKind k);
QueryKind query_kind_from_string(const std::string& s);

// An AND of OR-sets.  Each cluster is a non-empty list of quoted phrases or
// terms; a document satisfies the query when every cluster contributes at
// least one term found case-insensitively in the document text.
//
// Rendered grammar (the provider's quoted-term syntax):
//
//   query   := cluster { " AND " cluster }
//   cluster := "(" term { " OR " term } ")"
//   term    := '"' <any characters except '"'> '"'
//
// Clusters are always parenthesised, even when they hold a single term, and
// terms may not contain a double quote (there is no escape sequence).
struct BooleanQuery {
  QueryKind kind = QueryKind::x_permissive;
  std::vector<std::vector<std::string>> clusters;

  bool operator==(const BooleanQuery&) const = default;

  // Provider query-string form per the grammar above.
  std::string render() const;

  // True when every AND-cluster has at least one OR-term occurring
  // case-insensitively as a substring of `doc_text`.  This is the reference
  // matching semantics used by the mock provider and the ladder tests.
  bool matches(const std::string& doc_text) const;

  // Returns an empty string when the query satisfies its invariants,
  // otherwise a human-readable reason: cluster-count bounds for the kind,
  // no empty OR-set, no empty term, no embedded double quote.
  std::string invalid_reason() const;
  bool valid() const { return invalid_reason().empty(); }
};

// Parses the rendered grammar back into a query of the given kind.  Throws
// std::invalid_argument on malformed input.  parse_boolean(q.render(),
// q.kind) == q for every valid q.
BooleanQuery parse_boolean(const std::string& text, QueryKind kind);

// Structural broader-or-equal test: every cluster of `next` contains, as a
// superset, some cluster of `prev` (term comparison is case-insensitive).
// Dropping a cluster or widening an OR-set both weaken the conjunction, so
// this implies next's match set is a superset of prev's on any corpus.
bool structurally_broadens(const BooleanQuery& prev, const BooleanQuery& next);

}  // namespace newsrace
