#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "newsrace/boolean_query.hpp"
#include "newsrace/chrono.hpp"
#include "newsrace/types.hpp"

namespace newsrace {

// Time source used by everything that waits: the real wall clock in live
// runs, a simulated clock in mock runs and tests so no test ever sleeps.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual TimeMs now() = 0;
  // Blocks (or advances simulated time) until `t`; returns immediately when
  // t is already past.
  virtual void sleep_until(TimeMs t) = 0;
};

class RealClock : public Clock {
 public:
  TimeMs now() override;
  void sleep_until(TimeMs t) override;
};

class SimClock : public Clock {
 public:
  explicit SimClock(TimeMs start = 0) : now_(start) {}
  TimeMs now() override;
  void sleep_until(TimeMs t) override;

 private:
  std::mutex mu_;
  TimeMs now_;
};

// Sliding-window limiter: at any grant instant t, at most `cap` grants fall
// inside (t - window, t].  acquire() never rejects — it computes the
// earliest admissible instant, records it, and sleeps the clock forward.
// The full grant log is kept so a run can audit the invariant globally.
class RateLimiter {
 public:
  explicit RateLimiter(int cap = 28, TimeMs window_ms = 600 * kMsPerSecond);

  // Earliest admissible grant time >= now; records the grant.
  TimeMs grant_at(TimeMs now);

  // grant_at(clock.now()) followed by sleeping the clock to the grant.
  TimeMs acquire(Clock& clock);

  int cap() const { return cap_; }
  TimeMs window_ms() const { return window_; }
  std::vector<TimeMs> grant_log() const;

 private:
  const int cap_;
  const TimeMs window_;
  mutable std::mutex mu_;
  std::vector<TimeMs> grants_;  // sorted ascending
};

struct SavedQuery {
  std::string provider_query_id;
  std::string boolean_rendered;
  TimeMs created_at = 0;
  double backfill_percent = 0.0;
};

// A provider-reported request failure.  4xx statuses are permanent (the
// event is marked failed); retryable failures are handled inside clients.
class ProviderRequestError : public std::runtime_error {
 public:
  ProviderRequestError(int status, const std::string& message)
      : std::runtime_error("provider error " + std::to_string(status) + ": " +
                           message),
        status(status) {}
  int status;
};

// Social-listening provider: saved-query lifecycle plus paged pulls.
// Callers are responsible for holding a rate-limiter grant before every
// call (QuerySession does this).
class ProviderClient {
 public:
  virtual ~ProviderClient() = default;

  virtual SavedQuery create_query(const BooleanQuery& query, TimeMs now) = 0;
  // Backfill coverage percent in [0, 100]; monotone per query.
  virtual double poll_backfill(const std::string& provider_query_id,
                               TimeMs now) = 0;
  // Date-sorted ascending, at most page_size, optionally channel-filtered.
  // Twitter mentions come back with provider_ts redacted.
  virtual std::vector<Mention> pull_mentions(
      const std::string& provider_query_id, const TimeWindow& window,
      const std::optional<std::string>& channel_filter, int page_size) = 0;
  // Idempotent: deleting an unknown id succeeds.
  virtual void delete_query(const std::string& provider_query_id) = 0;
};

// One indexed document in the mock provider's fixture corpus.  `text` is
// the searchable body; title/snippet/url/author feed the emitted Mention.
struct FixtureDoc {
  std::string channel;
  std::string guid;
  TimeMs ts = 0;
  std::string text;
  std::optional<std::string> title;
  std::optional<std::string> snippet;
  std::optional<std::string> url;
  std::optional<std::string> author;
};

void to_json(nlohmann::json& j, const FixtureDoc& d);
void from_json(const nlohmann::json& j, FixtureDoc& d);

// Deterministic in-process provider over a fixture corpus.  A document
// matches a query iff every AND-cluster contributes at least one term
// found case-insensitively in the document text.  Query ids derive from
// the rendered boolean, so identical queries get identical ids.  Twitter
// redaction is simulated: emitted twitter mentions carry no provider_ts,
// only the snowflake guid.
class MockProvider : public ProviderClient {
 public:
  explicit MockProvider(std::vector<FixtureDoc> docs);

  // Loads every *.jsonl file under `dir` in lexicographic order.
  static std::vector<FixtureDoc> load_docs(const std::filesystem::path& dir);
  static MockProvider from_dir(const std::filesystem::path& dir);

  // Backfill percents reported on successive polls; the last value repeats.
  // Default schedule is {100} (complete on the first poll).
  void set_default_backfill(std::vector<double> schedule);
  void set_backfill_schedule(const std::string& provider_query_id,
                             std::vector<double> schedule);

  SavedQuery create_query(const BooleanQuery& query, TimeMs now) override;
  double poll_backfill(const std::string& provider_query_id,
                       TimeMs now) override;
  std::vector<Mention> pull_mentions(
      const std::string& provider_query_id, const TimeWindow& window,
      const std::optional<std::string>& channel_filter,
      int page_size) override;
  void delete_query(const std::string& provider_query_id) override;

  const std::vector<FixtureDoc>& docs() const { return docs_; }

 private:
  struct Registered {
    BooleanQuery query;
    std::vector<double> schedule;
    size_t polls = 0;
    double reported_max = 0.0;
  };

  std::vector<FixtureDoc> docs_;
  std::vector<double> default_schedule_{100.0};
  std::map<std::string, Registered> registry_;
  std::map<std::string, std::vector<double>> pending_schedules_;
  std::mutex mu_;
};

enum class SessionState {
  fresh,
  created,
  backfilled,
  pulled_all,
  pulled_twitter,
  deleted
};

std::string to_string(SessionState s);

// Per-event saved-query lifecycle, enforced as a typed state machine:
// create -> await_backfill -> pull(all) -> pull(twitter) -> delete.  Every
// provider call first takes a limiter grant; the session counts them so the
// run can report its request total.
class QuerySession {
 public:
  QuerySession(ProviderClient& provider, RateLimiter& limiter, Clock& clock)
      : provider_(provider), limiter_(limiter), clock_(clock) {}

  SavedQuery create(const BooleanQuery& query);

  // Polls at poll_interval spacing while elapsed < cap; returns early once
  // the floor is reached, otherwise proceeds at exactly the cap with the
  // last observed percent.  Poll failures count against the cap.
  double await_backfill(double floor_percent, TimeMs cap_ms,
                        TimeMs poll_interval_ms);

  std::vector<Mention> pull_all(const TimeWindow& window, int page_size);
  std::vector<Mention> pull_twitter(const TimeWindow& window, int page_size);

  // Idempotent once deleted; rejected before pulls complete.
  void remove();

  SessionState state() const { return state_; }
  const SavedQuery& saved() const { return saved_; }
  int requests_made() const { return requests_; }

 private:
  void expect(SessionState required, const char* op) const;
  TimeMs take_slot();

  ProviderClient& provider_;
  RateLimiter& limiter_;
  Clock& clock_;
  SessionState state_ = SessionState::fresh;
  SavedQuery saved_;
  int requests_ = 0;
};

}  // namespace newsrace
