#include "newsrace/verify.hpp"

#include <algorithm>

#include "newsrace/channel.hpp"
#include "newsrace/text.hpp"

namespace newsrace {

KeywordSet KeywordSet::from_queries(const BooleanQuery& news,
                                    const BooleanQuery& x) {
  KeywordSet k;
  auto add_all = [&](const BooleanQuery& q) {
    for (const auto& cluster : q.clusters) {
      for (const std::string& term : cluster) {
        const std::string normalized = text::normalize_term(term);
        if (normalized.empty()) continue;
        if (std::find(k.terms.begin(), k.terms.end(), normalized) ==
            k.terms.end()) {
          k.terms.push_back(normalized);
        }
      }
    }
  };
  add_all(news);
  add_all(x);
  return k;
}

std::vector<std::string> KeywordSet::matches_in(const std::string& text) const {
  const std::vector<std::string> tokens = text::tokenize(text);
  std::vector<std::string> matched;
  for (const std::string& term : terms) {
    if (text::term_matches(tokens, term)) matched.push_back(term);
  }
  return matched;
}

void to_json(nlohmann::json& j, const ChannelEarliest& c) {
  j = nlohmann::json{{"event_id", c.event_id},
                     {"channel", c.channel},
                     {"mention", c.mention},
                     {"fallback_depth", c.fallback_depth}};
}

void from_json(const nlohmann::json& j, ChannelEarliest& c) {
  j.at("event_id").get_to(c.event_id);
  j.at("channel").get_to(c.channel);
  j.at("mention").get_to(c.mention);
  j.at("fallback_depth").get_to(c.fallback_depth);
}

void to_json(nlohmann::json& j, const AdjudicationRecord& r) {
  j = nlohmann::json{{"event_id", r.event_id},
                     {"channel", r.channel},
                     {"guid", r.guid},
                     {"matched_term", r.matched_term},
                     {"on_topic", r.on_topic}};
}

void from_json(const nlohmann::json& j, AdjudicationRecord& r) {
  j.at("event_id").get_to(r.event_id);
  j.at("channel").get_to(r.channel);
  j.at("guid").get_to(r.guid);
  j.at("matched_term").get_to(r.matched_term);
  j.at("on_topic").get_to(r.on_topic);
}

VerifyOutcome verify_x(const Mention& m, const KeywordSet& k,
                       ModelBackend& adjudicator, const Event& event) {
  VerifyOutcome out;
  if (!m.body.has_value() || m.body->empty()) {
    // Unrecoverable content (deleted tweet, empty oEmbed payload): cannot
    // be verified, falls to the next-earliest candidate.
    out.status = Verification::polluted;
    return out;
  }
  out.matched_terms = k.matches_in(*m.body);
  if (out.matched_terms.size() >= 2) {
    out.status = Verification::verified;
    return out;
  }
  if (out.matched_terms.empty()) {
    out.status = Verification::polluted;
    return out;
  }
  out.was_ambiguous = true;
  try {
    out.status = adjudicator.adjudicate(*m.body, event)
                     ? Verification::verified
                     : Verification::polluted;
  } catch (const std::exception&) {
    out.status = Verification::polluted;  // conservative
  }
  return out;
}

VerifyOutcome verify_other(const Mention& m, const KeywordSet& k) {
  VerifyOutcome out;
  std::string text;
  if (m.title.has_value()) text += *m.title;
  if (m.snippet.has_value()) {
    if (!text.empty()) text += ' ';
    text += *m.snippet;
  }
  if (text.empty()) {
    out.status = Verification::polluted;
    return out;
  }
  out.matched_terms = k.matches_in(text);
  out.status = out.matched_terms.empty() ? Verification::polluted
                                         : Verification::verified;
  return out;
}

std::map<std::string, std::vector<Mention>> group_by_channel(
    const std::vector<Mention>& mentions) {
  std::map<std::string, std::vector<Mention>> grouped;
  for (const Mention& m : mentions) {
    grouped[m.channel].push_back(m);
  }
  for (auto& [channel, list] : grouped) {
    std::stable_sort(list.begin(), list.end(),
                     [](const Mention& a, const Mention& b) {
                       const auto ta = a.order_ts();
                       const auto tb = b.order_ts();
                       if (ta.has_value() && tb.has_value()) return *ta < *tb;
                       return ta.has_value() && !tb.has_value();
                     });
  }
  return grouped;
}

EarliestResult earliest_verified(
    const Event& event,
    std::map<std::string, std::vector<Mention>>& by_channel,
    const KeywordSet& k, ModelBackend& adjudicator) {
  EarliestResult result;
  for (auto& [channel, list] : by_channel) {
    int skipped = 0;
    bool found = false;
    for (Mention& m : list) {
      if (found) break;  // later mentions stay unverified
      if (!m.order_ts().has_value()) {
        // No usable timestamp on this channel: cannot participate in an
        // earliest-race, treated as polluted.
        m.verification = Verification::polluted;
        ++skipped;
        continue;
      }
      VerifyOutcome outcome = (channel == channels::kTwitter)
                                  ? verify_x(m, k, adjudicator, event)
                                  : verify_other(m, k);
      m.verification = outcome.status;
      if (outcome.was_ambiguous) {
        AdjudicationRecord rec;
        rec.event_id = event.event_id;
        rec.channel = channel;
        rec.guid = m.guid;
        rec.matched_term =
            outcome.matched_terms.empty() ? "" : outcome.matched_terms.front();
        rec.on_topic = (outcome.status == Verification::verified);
        result.transcripts.push_back(std::move(rec));
      }
      if (outcome.status == Verification::verified) {
        ChannelEarliest ce;
        ce.event_id = event.event_id;
        ce.channel = channel;
        ce.mention = m;
        ce.fallback_depth = skipped;
        result.earliest.push_back(std::move(ce));
        found = true;
      } else {
        ++skipped;
      }
    }
  }
  return result;
}

}  // namespace newsrace
