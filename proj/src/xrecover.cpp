#include "newsrace/xrecover.hpp"

#include <cctype>
#include <charconv>
#include <chrono>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "newsrace/store.hpp"
#include "newsrace/text.hpp"

namespace newsrace {

TimeMs decode_snowflake(std::uint64_t raw) {
  return static_cast<TimeMs>(raw >> 22) + kTwitterEpochMs;
}

std::optional<std::uint64_t> parse_guid(const std::string& s) {
  size_t end = s.size();
  while (end > 0 && !std::isdigit(static_cast<unsigned char>(s[end - 1]))) {
    // Tolerate trailing slashes or query fragments after the id.
    if (s[end - 1] == '/' || s[end - 1] == '?') {
      --end;
      continue;
    }
    return std::nullopt;
  }
  size_t begin = end;
  while (begin > 0 && std::isdigit(static_cast<unsigned char>(s[begin - 1]))) {
    --begin;
  }
  if (begin == end) return std::nullopt;
  std::uint64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(s.data() + begin, s.data() + end, value);
  if (ec != std::errc{} || ptr != s.data() + end) return std::nullopt;
  return value;
}

std::string make_status_url(const std::optional<std::string>& author,
                            const std::string& guid) {
  const std::string handle = author && !author->empty() ? *author : "i";
  return "https://twitter.com/" + handle + "/status/" + guid;
}

std::optional<OembedBody> parse_oembed_payload(const std::string& raw_json,
                                               TimeMs fetched_at) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(raw_json);
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
  if (!j.is_object() || !j.contains("html")) return std::nullopt;
  const std::string html = j.at("html").get<std::string>();

  // The payload's html is a blockquote whose first <p> holds the tweet
  // text; everything after it is attribution, not content.
  std::string fragment = html;
  const size_t p_open = html.find("<p");
  if (p_open != std::string::npos) {
    const size_t p_start = html.find('>', p_open);
    const size_t p_close = html.find("</p>", p_open);
    if (p_start != std::string::npos && p_close != std::string::npos &&
        p_start < p_close) {
      fragment = html.substr(p_start + 1, p_close - p_start - 1);
    }
  }

  OembedBody body;
  body.text = text::strip_html(fragment);
  body.author = j.value("author_name", std::string{});
  body.fetched_at = fetched_at;
  if (body.text.empty()) return std::nullopt;
  return body;
}

std::optional<std::string> FixtureOembed::fetch_raw(
    const std::string& status_url) {
  const auto guid = parse_guid(status_url);
  if (!guid) return std::nullopt;
  const auto path = dir_ / (std::to_string(*guid) + ".json");
  if (!std::filesystem::exists(path)) return std::nullopt;
  return read_file(path);
}

std::optional<std::string> LiveOembed::fetch_raw(const std::string& status_url) {
  httplib::SSLClient client("publish.twitter.com");
  client.set_connection_timeout(10);
  client.set_read_timeout(10);
  const std::string target =
      "/oembed?omit_script=1&url=" + httplib::detail::encode_url(status_url);

  std::string last_error;
  for (int attempt = 0; attempt < 3; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(250 * attempt));
    }
    auto res = client.Get(target);
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 404) return std::nullopt;
    if (res->status == 200) return res->body;
    last_error = "http status " + std::to_string(res->status);
  }
  throw std::runtime_error("oembed fetch failed for " + status_url + ": " +
                           last_error);
}

OembedCache::OembedCache(std::filesystem::path cache_dir)
    : dir_(std::move(cache_dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path OembedCache::entry_path(const std::string& guid) const {
  return dir_ / (guid + ".json");
}

std::optional<OembedBody> OembedCache::get_or_fetch(
    const std::string& guid, const std::optional<std::string>& author,
    OembedClient& client, TimeMs now) {
  const auto path = entry_path(guid);
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (std::filesystem::exists(path)) {
      const auto j = nlohmann::json::parse(read_file(path));
      if (j.value("missing", false)) return std::nullopt;
      OembedBody body;
      body.text = j.at("text").get<std::string>();
      body.author = j.at("author").get<std::string>();
      body.fetched_at = j.at("fetched_at").get<TimeMs>();
      return body;
    }
  }

  // Fetch outside the lock; concurrent fetchers of the same guid at worst
  // duplicate one request and then agree on the written entry.
  const auto raw = client.fetch_raw(make_status_url(author, guid));
  std::optional<OembedBody> body;
  if (raw) body = parse_oembed_payload(*raw, now);

  nlohmann::json entry;
  if (body) {
    entry = {{"text", body->text},
             {"author", body->author},
             {"fetched_at", body->fetched_at}};
  } else {
    entry = {{"missing", true}};
  }
  {
    std::lock_guard<std::mutex> lock(mu_);
    atomic_write_file(path, entry.dump() + "\n");
  }
  return body;
}

}  // namespace newsrace
