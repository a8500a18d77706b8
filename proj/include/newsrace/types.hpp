#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "newsrace/chrono.hpp"

namespace newsrace {

enum class Surface { wcep, polymarket };

std::string to_string(Surface s);
Surface surface_from_string(const std::string& s);

// Four-bucket category scheme shared by both samples.
namespace category {
inline constexpr const char* kSports = "sports";
inline constexpr const char* kPolitics = "politics";
inline constexpr const char* kMacroCrypto = "macro_crypto";
inline constexpr const char* kOther = "other";
}  // namespace category

// Presentation label for a bucket ("politics" -> "Politics & conflict").
std::string category_display(const std::string& bucket);

// One sampled news event.
struct Event {
  std::string event_id;
  Surface surface = Surface::wcep;
  std::string title;
  std::string description;
  std::string category;          // four-bucket label
  TimeMs t_e = 0;                // event time, ms UTC
  double attention_prior = 0.0;  // pageviews (wcep) or lifetime USD (polymarket)
  std::string source_key;        // wikipedia article title or market id

  bool operator==(const Event&) const = default;
};

// Deterministic content-derived id, stable across runs over the same inputs.
std::string make_event_id(Surface surface, const std::string& source_key,
                          const std::string& title, TimeMs t_e);

enum class Verification { unverified, verified, polluted, ambiguous };

std::string to_string(Verification v);
Verification verification_from_string(const std::string& s);

// One provider-returned item on one channel.
struct Mention {
  std::string channel;
  std::string guid;  // for twitter: 64-bit snowflake as decimal string
  std::optional<TimeMs> provider_ts;   // absent when the provider redacts it
  std::optional<TimeMs> recovered_ts;  // snowflake-decoded, twitter only
  std::optional<std::string> title;
  std::optional<std::string> snippet;
  std::optional<std::string> body;  // oEmbed-recovered for twitter
  std::optional<std::string> url;
  Verification verification = Verification::unverified;

  bool operator==(const Mention&) const = default;

  // Ordering timestamp: recovered_ts on twitter, provider_ts elsewhere.
  std::optional<TimeMs> order_ts() const;
};

struct FeatureVector {
  std::string clock_edge = "unknown";
  std::string live_visible = "unknown";
  std::string institutional_source = "unknown";
  std::string geographic_scope = "unknown";
  std::string language_primary = "unknown";

  bool operator==(const FeatureVector&) const = default;
};

// Per-event X-vs-news latency with the Δ>0-means-X-earlier convention.
struct PairedDelta {
  std::string event_id;
  TimeMs t_news = 0;
  TimeMs t_x = 0;

  double delta_min() const { return delta_minutes(t_news, t_x); }
  TimeMs delta_ms() const { return t_news - t_x; }

  bool operator==(const PairedDelta&) const = default;
};

// JSON bindings (used by the line-delimited stores).
void to_json(nlohmann::json& j, const Event& e);
void from_json(const nlohmann::json& j, Event& e);
void to_json(nlohmann::json& j, const Mention& m);
void from_json(const nlohmann::json& j, Mention& m);
void to_json(nlohmann::json& j, const FeatureVector& f);
void from_json(const nlohmann::json& j, FeatureVector& f);
void to_json(nlohmann::json& j, const PairedDelta& d);
void from_json(const nlohmann::json& j, PairedDelta& d);

// FNV-1a 64, used for content ids and stage checksums.
std::uint64_t fnv1a64(const void* data, size_t len);
std::uint64_t fnv1a64(const std::string& s);
std::string fnv1a64_hex(const std::string& s);

}  // namespace newsrace
