#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "newsrace/boolean_query.hpp"
#include "newsrace/types.hpp"

namespace newsrace {

// Closed label vocabularies for the five descriptive feature axes.
namespace labels {
// clock_edge
inline constexpr const char* kScheduled = "scheduled";
inline constexpr const char* kUnscheduled = "unscheduled";
// live_visible / institutional_source
inline constexpr const char* kYes = "yes";
inline constexpr const char* kNo = "no";
// geographic_scope
inline constexpr const char* kUsNational = "us_national";
inline constexpr const char* kInternational = "international";
inline constexpr const char* kGlobal = "global";
// language_primary
inline constexpr const char* kEnglish = "en";
inline constexpr const char* kNonEnglish = "non_en";
// any axis
inline constexpr const char* kUnknown = "unknown";
}  // namespace labels

struct SpecificityScore {
  double value = 0.0;
  double threshold = 0.5;
  bool approved = false;  // value >= threshold
};

class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Language-model backend behind feature extraction, boolean drafting, the
// specificity score, and ambiguity adjudication.  Two implementations ship:
// a remote chat-completion client and a deterministic rule-based fallback.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;

  virtual FeatureVector extract_features(const Event& event) = 0;
  // (news_tight, x_permissive).  May throw BackendError on malformed
  // output; callers retry once and then use the fallback drafter.
  virtual std::pair<BooleanQuery, BooleanQuery> draft_booleans(
      const Event& event) = 0;
  virtual double specificity(const BooleanQuery& query) = 0;
  // True when a single-keyword tweet body is judged on-topic for the event.
  virtual bool adjudicate(const std::string& body, const Event& event) = 0;
};

// Pure rule-based backend: keyword rules for features, named-entity
// extraction with an alias table for booleans, an entity-count/rarity score
// for specificity, and the entity + event-word co-occurrence rule for
// adjudication.  Same event in, same answers out, no network.
class FallbackBackend : public ModelBackend {
 public:
  FeatureVector extract_features(const Event& event) override;
  std::pair<BooleanQuery, BooleanQuery> draft_booleans(
      const Event& event) override;
  double specificity(const BooleanQuery& query) override;
  bool adjudicate(const std::string& body, const Event& event) override;
};

// Chat-completion client.  Environment:
//   NEWSRACE_MODEL_HOST  api host
//   NEWSRACE_MODEL_KEY   bearer token
// Prompts are versioned text assets loaded from `prompt_dir`.
class RemoteBackend : public ModelBackend {
 public:
  RemoteBackend(std::filesystem::path prompt_dir, std::string model_name);

  FeatureVector extract_features(const Event& event) override;
  std::pair<BooleanQuery, BooleanQuery> draft_booleans(
      const Event& event) override;
  double specificity(const BooleanQuery& query) override;
  bool adjudicate(const std::string& body, const Event& event) override;

 private:
  std::string complete(const std::string& prompt_name,
                       const std::string& user_payload);
  std::string prompt_text(const std::string& prompt_name);

  std::filesystem::path prompt_dir_;
  std::string model_name_;
  std::string host_;
  std::string key_;
};

// Proper-noun runs from the event's title and description: capitalized word
// sequences with question/aux words, bare numbers, and month names removed.
// Order-preserving, deduplicated case-insensitively.
std::vector<std::string> extract_entities(const Event& event);

// Known expansions for an entity term (team cities, organisation long
// forms, country adjectives); empty when the table has none.
std::vector<std::string> alias_terms(const std::string& entity);

// Country/region terms found in the event text, e.g. {"Pakistan"}.  Empty
// when none are mentioned.
std::vector<std::string> geo_terms(const Event& event);

// Terms a Sample-B x query must not contain: the market question's deadline
// date tokens and the binary outcome words.  Lower-cased.
std::vector<std::string> prohibited_terms(const Event& event);

// Score wrapper: evaluates the backend score against the threshold.  An
// invalid query short-circuits to value 0, never approved.
SpecificityScore specificity_gate(const BooleanQuery& query,
                                  ModelBackend& backend,
                                  double threshold = 0.5);

struct DraftResult {
  BooleanQuery news;
  BooleanQuery x;
  bool used_fallback = false;
};

// One backend attempt, one retry on malformed output, then the
// deterministic fallback drafter.
DraftResult draft_booleans_with_retry(const Event& event, ModelBackend& backend,
                                      FallbackBackend& fallback);

// Feature extraction that degrades to an all-`unknown` vector (with
// `warned` set) instead of failing: the axes are covariates, never gating.
FeatureVector extract_features_safe(const Event& event, ModelBackend& backend,
                                    bool& warned);

// The progressive-broadening ladder: list[0] is the as-drafted permissive
// query; each later level strictly weakens it by widening the first OR-set
// or, at the last level, dropping the entity cluster so only the
// country/region OR-set remains.  When the query has no separate geo
// cluster the last level widens into the geo (or geographic-scope label)
// terms instead, preserving monotonicity.  Every level's match set is a
// superset of the previous level's on any corpus.
std::vector<BooleanQuery> broaden_ladder(const BooleanQuery& x,
                                         const Event& event, int levels = 5);

}  // namespace newsrace
