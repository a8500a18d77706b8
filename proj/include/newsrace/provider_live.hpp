#pragma once

#include "newsrace/provider.hpp"

namespace newsrace {

// HTTPS adapter for the real social-listening service.  All endpoint paths
// and payload shapes live in this one translation unit.  Credentials come
// from the environment only:
//   NEWSRACE_PROVIDER_HOST   api host (e.g. api.example-listening.com)
//   NEWSRACE_PROVIDER_TOKEN  bearer token
// 4xx responses raise ProviderRequestError immediately; transport errors
// and 5xx responses are retried a bounded number of times first.
class LiveProvider : public ProviderClient {
 public:
  // Reads the environment; throws std::runtime_error when either variable
  // is missing so misconfiguration fails at startup, not mid-run.
  LiveProvider();

  SavedQuery create_query(const BooleanQuery& query, TimeMs now) override;
  double poll_backfill(const std::string& provider_query_id,
                       TimeMs now) override;
  std::vector<Mention> pull_mentions(
      const std::string& provider_query_id, const TimeWindow& window,
      const std::optional<std::string>& channel_filter,
      int page_size) override;
  void delete_query(const std::string& provider_query_id) override;

 private:
  nlohmann::json request(const std::string& method, const std::string& path,
                         const std::optional<nlohmann::json>& body);

  std::string host_;
  std::string token_;
};

}  // namespace newsrace
