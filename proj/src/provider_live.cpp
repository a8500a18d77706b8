#include "newsrace/provider_live.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>

namespace newsrace {

namespace {

std::string require_env(const char* name) {
  const char* value = std::getenv(name);
  if (!value || !*value) {
    throw std::runtime_error(std::string("live provider mode requires the ") +
                             name + " environment variable");
  }
  return value;
}

}  // namespace

LiveProvider::LiveProvider()
    : host_(require_env("NEWSRACE_PROVIDER_HOST")),
      token_(require_env("NEWSRACE_PROVIDER_TOKEN")) {}

nlohmann::json LiveProvider::request(const std::string& method,
                                     const std::string& path,
                                     const std::optional<nlohmann::json>& body) {
  httplib::SSLClient client(host_);
  client.set_connection_timeout(15);
  client.set_read_timeout(30);
  const httplib::Headers headers = {
      {"Authorization", "Bearer " + token_},
      {"Accept", "application/json"},
  };

  std::string last_error;
  for (int attempt = 0; attempt < 3; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(500 * attempt));
    }
    httplib::Result res;
    if (method == "GET") {
      res = client.Get(path, headers);
    } else if (method == "POST") {
      res = client.Post(path, headers, body ? body->dump() : "{}",
                        "application/json");
    } else if (method == "DELETE") {
      res = client.Delete(path, headers);
    } else {
      throw std::logic_error("unsupported method " + method);
    }

    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "http status " + std::to_string(res->status);
      continue;
    }
    if (res->status >= 400) {
      throw ProviderRequestError(res->status, res->body);
    }
    if (res->body.empty()) return nlohmann::json::object();
    return nlohmann::json::parse(res->body);
  }
  throw std::runtime_error("provider request " + method + " " + path +
                           " failed after retries: " + last_error);
}

SavedQuery LiveProvider::create_query(const BooleanQuery& query, TimeMs now) {
  const std::string reason = query.invalid_reason();
  if (!reason.empty()) {
    throw ProviderRequestError(400, "malformed boolean: " + reason);
  }
  const nlohmann::json payload = {{"query", query.render()},
                                  {"languages", nlohmann::json::array()}};
  const auto res = request("POST", "/v1/saved-queries", payload);
  SavedQuery q;
  q.provider_query_id = res.at("id").get<std::string>();
  q.boolean_rendered = query.render();
  q.created_at = now;
  q.backfill_percent = 0.0;
  return q;
}

double LiveProvider::poll_backfill(const std::string& provider_query_id,
                                   TimeMs) {
  const auto res = request(
      "GET", "/v1/saved-queries/" + provider_query_id + "/backfill",
      std::nullopt);
  return res.at("percent").get<double>();
}

std::vector<Mention> LiveProvider::pull_mentions(
    const std::string& provider_query_id, const TimeWindow& window,
    const std::optional<std::string>& channel_filter, int page_size) {
  std::string path = "/v1/saved-queries/" + provider_query_id +
                     "/mentions?since=" + std::to_string(window.start) +
                     "&until=" + std::to_string(window.end) +
                     "&limit=" + std::to_string(page_size) + "&sort=asc";
  if (channel_filter) path += "&channel=" + *channel_filter;

  const auto res = request("GET", path, std::nullopt);
  std::vector<Mention> mentions;
  for (const auto& item : res.at("mentions")) {
    Mention m;
    m.channel = item.at("channel").get<std::string>();
    m.guid = item.at("guid").get<std::string>();
    if (item.contains("published_at") && !item.at("published_at").is_null()) {
      m.provider_ts = item.at("published_at").get<TimeMs>();
    }
    if (item.contains("title")) m.title = item.at("title").get<std::string>();
    if (item.contains("snippet")) {
      m.snippet = item.at("snippet").get<std::string>();
    }
    if (item.contains("url")) m.url = item.at("url").get<std::string>();
    mentions.push_back(std::move(m));
  }
  return mentions;
}

void LiveProvider::delete_query(const std::string& provider_query_id) {
  try {
    request("DELETE", "/v1/saved-queries/" + provider_query_id, std::nullopt);
  } catch (const ProviderRequestError& e) {
    // Deleting an already-deleted query is a success for our purposes.
    if (e.status != 404) throw;
  }
}

}  // namespace newsrace
