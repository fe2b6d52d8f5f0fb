#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "nudge/sessionlog.hpp"

namespace httplib {
class Server;
}

namespace nudge {

struct TelemetryConfig {
  std::string url;    // base URL, e.g. http://127.0.0.1:8099; empty disables
  std::string token;  // bearer token
  std::size_t batch_size = 60;
  int max_attempts = 5;
  std::chrono::milliseconds retry_base{200};
  double retry_multiplier = 2.0;
  std::chrono::milliseconds retry_cap{5000};
  std::chrono::milliseconds request_timeout{2000};

  bool enabled() const { return !url.empty(); }
  void validate() const;
  /// Overrides url/token from NUDGE_TELEMETRY_URL / NUDGE_TELEMETRY_TOKEN.
  void apply_env();
};

enum class TelemetryStatus { Disabled, Ok, Degraded };
std::string_view to_string(TelemetryStatus status);

struct TelemetryRecord {
  Second t = 0;
  SessionRecord record;
};

struct Batch {
  std::string session_id;
  std::vector<TelemetryRecord> records;

  Second first_t() const { return records.front().t; }
  Second last_t() const { return records.back().t; }
  /// Idempotency key: session_id:first_t:last_t.
  std::string key() const;
  std::string path() const;
  nlohmann::json body() const;
};

/// HTTP status code, or a negative value when the request never completed.
class TelemetryTransport {
public:
  virtual ~TelemetryTransport() = default;
  virtual int post(const std::string& path, const std::string& body,
                   const std::string& idempotency_key) = 0;
};

class HttpTransport : public TelemetryTransport {
public:
  explicit HttpTransport(const TelemetryConfig& cfg);
  ~HttpTransport() override;

  int post(const std::string& path, const std::string& body,
           const std::string& idempotency_key) override;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Delay before retry number `attempt` (1-based): base * multiplier^(attempt-1),
/// capped.
std::chrono::milliseconds retry_delay(const TelemetryConfig& cfg, int attempt);

struct UploadResult {
  bool acked = false;
  int attempts = 0;
  int last_status = 0;
};

// Sends one batch, retrying network failures and 5xx with exponential delay.
// 2xx and 409 (already stored) count as acknowledged. `sleep` returns false
// to abandon the retries early.
UploadResult upload_batch(
    const Batch& batch, TelemetryTransport& transport, const TelemetryConfig& cfg,
    const std::function<bool(std::chrono::milliseconds)>& sleep);

// Background uploader fed from the tick loop. enqueue() only takes a short
// lock; network work happens on the worker thread. Failed batches stay queued
// and are retried oldest-first; the local log is never touched.
class TelemetryUploader {
public:
  TelemetryUploader(TelemetryConfig cfg, std::string session_id,
                    std::unique_ptr<TelemetryTransport> transport);
  ~TelemetryUploader();

  TelemetryUploader(const TelemetryUploader&) = delete;
  TelemetryUploader& operator=(const TelemetryUploader&) = delete;

  void enqueue(Second t, const SessionRecord& record);

  /// Flushes the partial batch and waits up to `timeout` for the queue to
  /// drain, then stops the worker.
  TelemetryStatus finish(std::chrono::milliseconds timeout);

  TelemetryStatus status() const { return status_.load(); }
  std::size_t batches_acked() const { return acked_.load(); }
  std::size_t batches_pending() const;

private:
  void run();
  void run_loop();
  bool interruptible_sleep(std::chrono::milliseconds d);

  TelemetryConfig cfg_;
  std::string session_id_;
  std::unique_ptr<TelemetryTransport> transport_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::vector<TelemetryRecord> partial_;
  std::deque<Batch> ready_;
  bool finishing_ = false;
  bool stop_ = false;
  bool retry_now_ = false;
  bool worker_done_ = false;
  std::chrono::steady_clock::time_point deadline_{};

  std::atomic<TelemetryStatus> status_{TelemetryStatus::Ok};
  std::atomic<std::size_t> acked_{0};
  std::thread worker_;
};

// Test endpoint for POST /v1/sessions/{id}/records. Deduplicates on the
// Idempotency-Key header and can inject failures.
class MockTelemetryServer {
public:
  explicit MockTelemetryServer(std::string token = {});
  ~MockTelemetryServer();

  /// Binds to 127.0.0.1 on an ephemeral port and serves in the background.
  void start();
  void stop();
  std::string url() const;

  /// Next n requests fail with 503 before touching storage.
  void fail_next(int n);
  /// Every k-th request stores the batch but answers 500, so the client
  /// resends a batch the server already holds. 0 disables.
  void drop_ack_every(int k);

  std::size_t requests() const;
  std::size_t unique_batches() const;
  /// Records stored for a session, ordered by t, duplicates removed.
  std::vector<nlohmann::json> records(const std::string& session_id) const;

private:
  std::string token_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;

  mutable std::mutex mu_;
  int fail_next_ = 0;
  int drop_every_ = 0;
  std::size_t requests_ = 0;
  std::map<std::string, nlohmann::json> batches_;  // key -> body
};

}  // namespace nudge
