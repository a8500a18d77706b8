#include "newsrace/provider.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <thread>

#include "newsrace/channel.hpp"
#include "newsrace/xrecover.hpp"

namespace newsrace {

TimeMs RealClock::now() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

void RealClock::sleep_until(TimeMs t) {
  const TimeMs current = now();
  if (t > current) {
    std::this_thread::sleep_for(std::chrono::milliseconds(t - current));
  }
}

TimeMs SimClock::now() {
  std::lock_guard<std::mutex> lock(mu_);
  return now_;
}

void SimClock::sleep_until(TimeMs t) {
  std::lock_guard<std::mutex> lock(mu_);
  if (t > now_) now_ = t;
}

RateLimiter::RateLimiter(int cap, TimeMs window_ms)
    : cap_(cap), window_(window_ms) {
  if (cap <= 0 || window_ms <= 0) {
    throw std::invalid_argument("rate limiter needs positive cap and window");
  }
}

TimeMs RateLimiter::grant_at(TimeMs now) {
  std::lock_guard<std::mutex> lock(mu_);
  // Grants still inside (now - window, now], plus any already scheduled in
  // the future by concurrent acquirers.
  const auto first_live =
      std::upper_bound(grants_.begin(), grants_.end(), now - window_);
  const auto live = static_cast<size_t>(grants_.end() - first_live);

  TimeMs grant = now;
  if (live >= static_cast<size_t>(cap_)) {
    // The slot opens when the cap-th most recent live grant leaves the
    // window.
    const TimeMs blocker = *(first_live + (live - static_cast<size_t>(cap_)));
    grant = std::max(now, blocker + window_);
  }
  grants_.insert(std::upper_bound(grants_.begin(), grants_.end(), grant),
                 grant);
  return grant;
}

TimeMs RateLimiter::acquire(Clock& clock) {
  const TimeMs grant = grant_at(clock.now());
  clock.sleep_until(grant);
  return grant;
}

std::vector<TimeMs> RateLimiter::grant_log() const {
  std::lock_guard<std::mutex> lock(mu_);
  return grants_;
}

void to_json(nlohmann::json& j, const FixtureDoc& d) {
  j = nlohmann::json{{"channel", d.channel},
                     {"guid", d.guid},
                     {"ts", d.ts},
                     {"text", d.text}};
  if (d.title) j["title"] = *d.title;
  if (d.snippet) j["snippet"] = *d.snippet;
  if (d.url) j["url"] = *d.url;
  if (d.author) j["author"] = *d.author;
}

void from_json(const nlohmann::json& j, FixtureDoc& d) {
  d.channel = j.at("channel").get<std::string>();
  d.guid = j.at("guid").get<std::string>();
  d.ts = j.at("ts").get<TimeMs>();
  d.text = j.at("text").get<std::string>();
  d.title = d.snippet = d.url = d.author = std::nullopt;
  if (j.contains("title")) d.title = j.at("title").get<std::string>();
  if (j.contains("snippet")) d.snippet = j.at("snippet").get<std::string>();
  if (j.contains("url")) d.url = j.at("url").get<std::string>();
  if (j.contains("author")) d.author = j.at("author").get<std::string>();
}

MockProvider::MockProvider(std::vector<FixtureDoc> docs)
    : docs_(std::move(docs)) {}

std::vector<FixtureDoc> MockProvider::load_docs(
    const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::exists(dir)) {
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<FixtureDoc> docs;
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      docs.push_back(nlohmann::json::parse(line).get<FixtureDoc>());
    }
  }
  return docs;
}

MockProvider MockProvider::from_dir(const std::filesystem::path& dir) {
  return MockProvider(load_docs(dir));
}

void MockProvider::set_default_backfill(std::vector<double> schedule) {
  std::lock_guard<std::mutex> lock(mu_);
  default_schedule_ = std::move(schedule);
}

void MockProvider::set_backfill_schedule(const std::string& provider_query_id,
                                         std::vector<double> schedule) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = registry_.find(provider_query_id);
  if (it != registry_.end()) {
    it->second.schedule = std::move(schedule);
  } else {
    pending_schedules_[provider_query_id] = std::move(schedule);
  }
}

SavedQuery MockProvider::create_query(const BooleanQuery& query, TimeMs now) {
  const std::string reason = query.invalid_reason();
  if (!reason.empty()) {
    throw ProviderRequestError(400, "malformed boolean: " + reason);
  }
  const std::string rendered = query.render();
  const std::string id = "q-" + fnv1a64_hex(rendered);

  std::lock_guard<std::mutex> lock(mu_);
  auto it = registry_.find(id);
  if (it == registry_.end()) {
    Registered reg;
    reg.query = query;
    const auto pending = pending_schedules_.find(id);
    if (pending != pending_schedules_.end()) {
      reg.schedule = pending->second;
      pending_schedules_.erase(pending);
    } else {
      reg.schedule = default_schedule_;
    }
    registry_.emplace(id, std::move(reg));
  }
  return SavedQuery{id, rendered, now, 0.0};
}

double MockProvider::poll_backfill(const std::string& provider_query_id,
                                   TimeMs) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = registry_.find(provider_query_id);
  if (it == registry_.end()) {
    throw ProviderRequestError(404, "unknown query " + provider_query_id);
  }
  Registered& reg = it->second;
  const auto& schedule = reg.schedule;
  const size_t idx = std::min(reg.polls, schedule.size() - 1);
  ++reg.polls;
  // Coverage never regresses between polls.
  reg.reported_max = std::max(reg.reported_max, schedule[idx]);
  return reg.reported_max;
}

std::vector<Mention> MockProvider::pull_mentions(
    const std::string& provider_query_id, const TimeWindow& window,
    const std::optional<std::string>& channel_filter, int page_size) {
  BooleanQuery query;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = registry_.find(provider_query_id);
    if (it == registry_.end()) {
      throw ProviderRequestError(404, "unknown query " + provider_query_id);
    }
    query = it->second.query;
  }

  std::vector<const FixtureDoc*> matched;
  for (const auto& doc : docs_) {
    if (!window.contains(doc.ts)) continue;
    if (channel_filter && doc.channel != *channel_filter) continue;
    if (!query.matches(doc.text)) continue;
    matched.push_back(&doc);
  }
  std::stable_sort(matched.begin(), matched.end(),
                   [](const FixtureDoc* a, const FixtureDoc* b) {
                     if (a->ts != b->ts) return a->ts < b->ts;
                     return a->guid < b->guid;
                   });
  if (matched.size() > static_cast<size_t>(page_size)) {
    matched.resize(static_cast<size_t>(page_size));
  }

  std::vector<Mention> out;
  out.reserve(matched.size());
  for (const FixtureDoc* doc : matched) {
    Mention m;
    m.channel = doc->channel;
    m.guid = doc->guid;
    if (doc->channel == channels::kTwitter) {
      // The provider redacts X timestamps; only the snowflake id and a
      // reconstructable status URL survive.
      m.url = doc->url ? *doc->url : make_status_url(doc->author, doc->guid);
    } else {
      m.provider_ts = doc->ts;
      m.title = doc->title;
      m.snippet = doc->snippet;
      m.url = doc->url;
    }
    out.push_back(std::move(m));
  }
  return out;
}

void MockProvider::delete_query(const std::string& provider_query_id) {
  std::lock_guard<std::mutex> lock(mu_);
  registry_.erase(provider_query_id);
}

std::string to_string(SessionState s) {
  switch (s) {
    case SessionState::fresh: return "fresh";
    case SessionState::created: return "created";
    case SessionState::backfilled: return "backfilled";
    case SessionState::pulled_all: return "pulled_all";
    case SessionState::pulled_twitter: return "pulled_twitter";
    case SessionState::deleted: return "deleted";
  }
  return "?";
}

void QuerySession::expect(SessionState required, const char* op) const {
  if (state_ != required) {
    throw std::logic_error(std::string("query lifecycle violation: ") + op +
                           " requires state " + to_string(required) +
                           ", session is " + to_string(state_));
  }
}

TimeMs QuerySession::take_slot() {
  ++requests_;
  return limiter_.acquire(clock_);
}

SavedQuery QuerySession::create(const BooleanQuery& query) {
  expect(SessionState::fresh, "create");
  const TimeMs at = take_slot();
  saved_ = provider_.create_query(query, at);
  state_ = SessionState::created;
  return saved_;
}

double QuerySession::await_backfill(double floor_percent, TimeMs cap_ms,
                                    TimeMs poll_interval_ms) {
  expect(SessionState::created, "await_backfill");
  const TimeMs start = clock_.now();
  double percent = 0.0;
  while (true) {
    take_slot();
    try {
      percent = provider_.poll_backfill(saved_.provider_query_id, clock_.now());
      saved_.backfill_percent = std::max(saved_.backfill_percent, percent);
    } catch (const ProviderRequestError&) {
      // A failed poll burns time against the cap but never aborts the wait.
    }
    if (saved_.backfill_percent >= floor_percent) break;
    const TimeMs next = clock_.now() + poll_interval_ms;
    if (next - start >= cap_ms) {
      // Cap reached: proceed at exactly start + cap with partial coverage.
      clock_.sleep_until(start + cap_ms);
      break;
    }
    clock_.sleep_until(next);
  }
  state_ = SessionState::backfilled;
  return saved_.backfill_percent;
}

std::vector<Mention> QuerySession::pull_all(const TimeWindow& window,
                                            int page_size) {
  expect(SessionState::backfilled, "pull_all");
  take_slot();
  auto mentions = provider_.pull_mentions(saved_.provider_query_id, window,
                                          std::nullopt, page_size);
  state_ = SessionState::pulled_all;
  return mentions;
}

std::vector<Mention> QuerySession::pull_twitter(const TimeWindow& window,
                                                int page_size) {
  expect(SessionState::pulled_all, "pull_twitter");
  take_slot();
  auto mentions = provider_.pull_mentions(
      saved_.provider_query_id, window, std::string(channels::kTwitter),
      page_size);
  state_ = SessionState::pulled_twitter;
  return mentions;
}

void QuerySession::remove() {
  if (state_ == SessionState::deleted) return;
  expect(SessionState::pulled_twitter, "delete");
  take_slot();
  try {
    provider_.delete_query(saved_.provider_query_id);
  } catch (const std::exception&) {
    // Delete failures are logged by callers; the run continues either way.
  }
  state_ = SessionState::deleted;
}

}  // namespace newsrace
