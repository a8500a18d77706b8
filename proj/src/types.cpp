#include "newsrace/types.hpp"

#include <cstdio>
#include <stdexcept>

namespace newsrace {

std::string to_string(Surface s) {
  return s == Surface::wcep ? "wcep" : "polymarket";
}

Surface surface_from_string(const std::string& s) {
  if (s == "wcep") return Surface::wcep;
  if (s == "polymarket") return Surface::polymarket;
  throw std::invalid_argument("unknown surface: " + s);
}

std::string category_display(const std::string& bucket) {
  if (bucket == category::kSports) return "Sports";
  if (bucket == category::kPolitics) return "Politics & conflict";
  if (bucket == category::kMacroCrypto) return "Macro & tech";
  return "Other";
}

std::string to_string(Verification v) {
  switch (v) {
    case Verification::unverified: return "unverified";
    case Verification::verified: return "verified";
    case Verification::polluted: return "polluted";
    case Verification::ambiguous: return "ambiguous";
  }
  return "unverified";
}

Verification verification_from_string(const std::string& s) {
  if (s == "unverified") return Verification::unverified;
  if (s == "verified") return Verification::verified;
  if (s == "polluted") return Verification::polluted;
  if (s == "ambiguous") return Verification::ambiguous;
  throw std::invalid_argument("unknown verification: " + s);
}

std::optional<TimeMs> Mention::order_ts() const {
  if (channel == "twitter") return recovered_ts;
  return provider_ts;
}

std::uint64_t fnv1a64(const void* data, size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 14695981039346656037ull;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::string fnv1a64_hex(const std::string& s) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(s)));
  return buf;
}

std::string make_event_id(Surface surface, const std::string& source_key,
                          const std::string& title, TimeMs t_e) {
  const std::string prefix = surface == Surface::wcep ? "a-" : "b-";
  const std::string key = to_string(surface) + "|" + source_key + "|" + title +
                          "|" + std::to_string(t_e);
  return prefix + fnv1a64_hex(key);
}

namespace {

template <typename T>
void put_opt(nlohmann::json& j, const char* key, const std::optional<T>& v) {
  if (v.has_value()) j[key] = *v;
}

template <typename T>
void get_opt(const nlohmann::json& j, const char* key, std::optional<T>& v) {
  if (j.contains(key) && !j.at(key).is_null()) {
    v = j.at(key).get<T>();
  } else {
    v.reset();
  }
}

}  // namespace

void to_json(nlohmann::json& j, const Event& e) {
  j = nlohmann::json{{"event_id", e.event_id},
                     {"surface", to_string(e.surface)},
                     {"title", e.title},
                     {"description", e.description},
                     {"category", e.category},
                     {"t_e", e.t_e},
                     {"attention_prior", e.attention_prior},
                     {"source_key", e.source_key}};
}

void from_json(const nlohmann::json& j, Event& e) {
  e.event_id = j.at("event_id").get<std::string>();
  e.surface = surface_from_string(j.at("surface").get<std::string>());
  e.title = j.at("title").get<std::string>();
  e.description = j.at("description").get<std::string>();
  e.category = j.at("category").get<std::string>();
  e.t_e = j.at("t_e").get<TimeMs>();
  e.attention_prior = j.at("attention_prior").get<double>();
  e.source_key = j.at("source_key").get<std::string>();
}

void to_json(nlohmann::json& j, const Mention& m) {
  j = nlohmann::json{{"channel", m.channel},
                     {"guid", m.guid},
                     {"verification", to_string(m.verification)}};
  put_opt(j, "provider_ts", m.provider_ts);
  put_opt(j, "recovered_ts", m.recovered_ts);
  put_opt(j, "title", m.title);
  put_opt(j, "snippet", m.snippet);
  put_opt(j, "body", m.body);
  put_opt(j, "url", m.url);
}

void from_json(const nlohmann::json& j, Mention& m) {
  m.channel = j.at("channel").get<std::string>();
  m.guid = j.at("guid").get<std::string>();
  m.verification =
      verification_from_string(j.at("verification").get<std::string>());
  get_opt(j, "provider_ts", m.provider_ts);
  get_opt(j, "recovered_ts", m.recovered_ts);
  get_opt(j, "title", m.title);
  get_opt(j, "snippet", m.snippet);
  get_opt(j, "body", m.body);
  get_opt(j, "url", m.url);
}

void to_json(nlohmann::json& j, const FeatureVector& f) {
  j = nlohmann::json{{"clock_edge", f.clock_edge},
                     {"live_visible", f.live_visible},
                     {"institutional_source", f.institutional_source},
                     {"geographic_scope", f.geographic_scope},
                     {"language_primary", f.language_primary}};
}

void from_json(const nlohmann::json& j, FeatureVector& f) {
  f.clock_edge = j.at("clock_edge").get<std::string>();
  f.live_visible = j.at("live_visible").get<std::string>();
  f.institutional_source = j.at("institutional_source").get<std::string>();
  f.geographic_scope = j.at("geographic_scope").get<std::string>();
  f.language_primary = j.at("language_primary").get<std::string>();
}

void to_json(nlohmann::json& j, const PairedDelta& d) {
  j = nlohmann::json{
      {"event_id", d.event_id}, {"t_news", d.t_news}, {"t_x", d.t_x}};
}

void from_json(const nlohmann::json& j, PairedDelta& d) {
  d.event_id = j.at("event_id").get<std::string>();
  d.t_news = j.at("t_news").get<TimeMs>();
  d.t_x = j.at("t_x").get<TimeMs>();
}

}  // namespace newsrace
