#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

#include "newsrace/chrono.hpp"

namespace newsrace {

// First millisecond representable in a snowflake id:
// 2010-11-04T01:42:54.657Z.
inline constexpr TimeMs kTwitterEpochMs = 1288834974657;

// Publish time encoded in the high-order bits of a 64-bit id:
// ms = (raw >> 22) + kTwitterEpochMs.
TimeMs decode_snowflake(std::uint64_t raw);

// Extracts the trailing run of decimal digits from a guid that may arrive as
// a bare number or embedded in a status URL.  Empty result when the string
// does not end in a digit or the run overflows 64 bits.
std::optional<std::uint64_t> parse_guid(const std::string& s);

// Canonical tweet URL for the oEmbed endpoint.  When the author handle is
// unknown the "i" placeholder path is used, which the endpoint accepts.
std::string make_status_url(const std::optional<std::string>& author,
                            const std::string& guid);

struct OembedBody {
  std::string text;  // visible tweet content only, markup stripped
  std::string author;
  TimeMs fetched_at = 0;

  bool operator==(const OembedBody&) const = default;
};

// Converts a raw oEmbed JSON payload to a stripped body.  The tweet text is
// the first <p> element of the payload's html field (the attribution line
// that follows it is not tweet content).  Empty or unusable payloads yield
// no body, which callers treat as unverifiable.
std::optional<OembedBody> parse_oembed_payload(const std::string& raw_json,
                                               TimeMs fetched_at);

// Source of raw oEmbed payloads.  fetch_raw returns the payload text, or
// nothing for a 404 (deleted tweet).  Transport errors are retried a bounded
// number of times internally and then surfaced as exceptions.
class OembedClient {
 public:
  virtual ~OembedClient() = default;
  virtual std::optional<std::string> fetch_raw(const std::string& status_url) = 0;
};

// Serves payloads from a directory of <guid>.json files; a missing file
// behaves like a 404.
class FixtureOembed : public OembedClient {
 public:
  explicit FixtureOembed(std::filesystem::path dir) : dir_(std::move(dir)) {}
  std::optional<std::string> fetch_raw(const std::string& status_url) override;

 private:
  std::filesystem::path dir_;
};

// Unauthenticated GET against publish.twitter.com/oembed?url=...
class LiveOembed : public OembedClient {
 public:
  std::optional<std::string> fetch_raw(const std::string& status_url) override;
};

// Guid-keyed cache persisted under the run directory.  A hit returns the
// stored body byte-identically and never refetches; 404s are cached as
// negative entries.  Safe for concurrent use.
class OembedCache {
 public:
  explicit OembedCache(std::filesystem::path cache_dir);

  // Returns the cached or freshly fetched body; empty when the tweet is
  // deleted or the payload is unusable (both cached negatively).
  std::optional<OembedBody> get_or_fetch(const std::string& guid,
                                         const std::optional<std::string>& author,
                                         OembedClient& client, TimeMs now);

 private:
  std::filesystem::path entry_path(const std::string& guid) const;

  std::filesystem::path dir_;
  std::mutex mu_;
};

}  // namespace newsrace
