#pragma once

#include <map>
#include <string>
#include <vector>

#include "newsrace/boolean_query.hpp"
#include "newsrace/drafting.hpp"
#include "newsrace/types.hpp"

namespace newsrace {

// Deduplicated, normalized terms from the union of an event's tight and
// permissive booleans; the vocabulary every mention is verified against.
struct KeywordSet {
  std::vector<std::string> terms;  // normalized, insertion order, deduped

  static KeywordSet from_queries(const BooleanQuery& news,
                                 const BooleanQuery& x);

  // Distinct keyword terms found whole-word in `text` (multiword terms as
  // contiguous token runs).  Distinct terms, not distinct positions.
  std::vector<std::string> matches_in(const std::string& text) const;
};

// The first verified mention on one channel, with how many polluted
// candidates were skipped to reach it.
struct ChannelEarliest {
  std::string event_id;
  std::string channel;
  Mention mention;  // mention.verification == verified
  int fallback_depth = 0;
};

// Audit record for one ambiguity adjudication (exactly-one-keyword tweets).
struct AdjudicationRecord {
  std::string event_id;
  std::string channel;
  std::string guid;
  std::string matched_term;
  bool on_topic = false;
};

void to_json(nlohmann::json& j, const ChannelEarliest& c);
void from_json(const nlohmann::json& j, ChannelEarliest& c);
void to_json(nlohmann::json& j, const AdjudicationRecord& r);
void from_json(const nlohmann::json& j, AdjudicationRecord& r);

// Outcome of verifying a single mention.
struct VerifyOutcome {
  Verification status = Verification::unverified;
  bool was_ambiguous = false;             // hit the one-match adjudication tier
  std::vector<std::string> matched_terms; // distinct keywords found
};

// X tier: >=2 distinct keyword matches in the recovered body -> verified;
// exactly 1 -> the adjudicator decides; 0 (or no body at all) -> polluted.
// An adjudicator failure is conservative: polluted.
VerifyOutcome verify_x(const Mention& m, const KeywordSet& k,
                       ModelBackend& adjudicator, const Event& event);

// Non-X tier: a single distinct match across title+snippet suffices; both
// fields absent -> polluted.
VerifyOutcome verify_other(const Mention& m, const KeywordSet& k);

// Groups mentions by channel and sorts each list ascending by the channel's
// ordering timestamp (recovered_ts on twitter, provider_ts elsewhere);
// mentions with no usable timestamp sort last.
std::map<std::string, std::vector<Mention>> group_by_channel(
    const std::vector<Mention>& mentions);

struct EarliestResult {
  std::vector<ChannelEarliest> earliest;        // one entry per channel with evidence
  std::vector<AdjudicationRecord> transcripts;  // every adjudicator call
};

// Per channel, walk ascending and verify until the first verified mention;
// channels where everything is polluted are absent from the output.  The
// walked mentions' verification fields are updated in place (later,
// unwalked mentions stay `unverified`).
EarliestResult earliest_verified(
    const Event& event, std::map<std::string, std::vector<Mention>>& by_channel,
    const KeywordSet& k, ModelBackend& adjudicator);

}  // namespace newsrace
