#include "nudge/telemetry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "httplib.h"

namespace nudge {

void TelemetryConfig::validate() const {
  if (batch_size == 0) throw Error(ErrorKind::Config, "telemetry: batch_size must be >= 1");
  if (max_attempts < 1) throw Error(ErrorKind::Config, "telemetry: max_attempts must be >= 1");
  if (!(retry_multiplier >= 1.0)) {
    throw Error(ErrorKind::Config, "telemetry: retry_multiplier must be >= 1");
  }
}

void TelemetryConfig::apply_env() {
  if (const char* u = std::getenv("NUDGE_TELEMETRY_URL")) url = u;
  if (const char* t = std::getenv("NUDGE_TELEMETRY_TOKEN")) token = t;
}

std::string_view to_string(TelemetryStatus status) {
  switch (status) {
    case TelemetryStatus::Disabled: return "disabled";
    case TelemetryStatus::Ok: return "ok";
    case TelemetryStatus::Degraded: return "degraded";
  }
  return "?";
}

std::string Batch::key() const {
  return session_id + ":" + std::to_string(first_t()) + ":" + std::to_string(last_t());
}

std::string Batch::path() const { return "/v1/sessions/" + session_id + "/records"; }

nlohmann::json Batch::body() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) {
    const auto& rec = r.record;
    arr.push_back({{"t", r.t},
                   {"time", format_time(rec.time)},
                   {"score", rec.score},
                   {"speech", rec.speech == SpeechCell::True    ? "TRUE"
                              : rec.speech == SpeechCell::False ? "FALSE"
                                                                : "-"},
                   {"intervention", rec.intervention}});
  }
  return arr;
}

struct HttpTransport::Impl {
  httplib::Client client;
  std::string token;

  explicit Impl(const TelemetryConfig& cfg) : client(cfg.url), token(cfg.token) {
    const auto ms = cfg.request_timeout.count();
    client.set_connection_timeout(ms / 1000, (ms % 1000) * 1000);
    client.set_read_timeout(ms / 1000, (ms % 1000) * 1000);
    client.set_write_timeout(ms / 1000, (ms % 1000) * 1000);
  }
};

HttpTransport::HttpTransport(const TelemetryConfig& cfg)
    : impl_(std::make_unique<Impl>(cfg)) {}

HttpTransport::~HttpTransport() = default;

int HttpTransport::post(const std::string& path, const std::string& body,
                        const std::string& idempotency_key) {
  httplib::Headers headers{{"Idempotency-Key", idempotency_key}};
  if (!impl_->token.empty()) {
    headers.emplace("Authorization", "Bearer " + impl_->token);
  }
  auto res = impl_->client.Post(path, headers, body, "application/json");
  if (!res) return -1;
  return res->status;
}

std::chrono::milliseconds retry_delay(const TelemetryConfig& cfg, int attempt) {
  const double ms = static_cast<double>(cfg.retry_base.count()) *
                    std::pow(cfg.retry_multiplier, attempt - 1);
  const double capped = std::min(ms, static_cast<double>(cfg.retry_cap.count()));
  return std::chrono::milliseconds(static_cast<long long>(capped));
}

UploadResult upload_batch(
    const Batch& batch, TelemetryTransport& transport, const TelemetryConfig& cfg,
    const std::function<bool(std::chrono::milliseconds)>& sleep) {
  UploadResult result;
  const std::string body = batch.body().dump();
  const std::string key = batch.key();
  for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
    result.attempts = attempt;
    result.last_status = transport.post(batch.path(), body, key);
    const int s = result.last_status;
    if ((s >= 200 && s < 300) || s == 409) {
      result.acked = true;
      return result;
    }
    const bool retryable = s < 0 || s >= 500 || s == 429;
    if (!retryable || attempt == cfg.max_attempts) break;
    if (sleep && !sleep(retry_delay(cfg, attempt))) break;
  }
  return result;
}

TelemetryUploader::TelemetryUploader(TelemetryConfig cfg, std::string session_id,
                                     std::unique_ptr<TelemetryTransport> transport)
    : cfg_(std::move(cfg)), session_id_(std::move(session_id)),
      transport_(std::move(transport)) {
  cfg_.validate();
  worker_ = std::thread([this] { run(); });
}

TelemetryUploader::~TelemetryUploader() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

void TelemetryUploader::enqueue(Second t, const SessionRecord& record) {
  {
    std::lock_guard lock(mu_);
    partial_.push_back({t, record});
    if (partial_.size() < cfg_.batch_size) return;
    ready_.push_back(Batch{session_id_, std::move(partial_)});
    partial_.clear();
    retry_now_ = true;
  }
  cv_.notify_all();
}

std::size_t TelemetryUploader::batches_pending() const {
  std::lock_guard lock(mu_);
  return ready_.size() + (partial_.empty() ? 0 : 1);
}

bool TelemetryUploader::interruptible_sleep(std::chrono::milliseconds d) {
  std::unique_lock lock(mu_);
  auto until = std::chrono::steady_clock::now() + d;
  if (finishing_ && deadline_ < until) until = deadline_;
  cv_.wait_until(lock, until, [&] { return stop_; });
  if (stop_) return false;
  return !(finishing_ && std::chrono::steady_clock::now() >= deadline_);
}

void TelemetryUploader::run() {
  run_loop();
  {
    std::lock_guard lock(mu_);
    worker_done_ = true;
  }
  cv_.notify_all();
}

void TelemetryUploader::run_loop() {
  while (true) {
    Batch batch;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] {
        return stop_ || (retry_now_ && !ready_.empty()) ||
               (finishing_ && !ready_.empty());
      });
      if (stop_) return;
      if (finishing_ && std::chrono::steady_clock::now() >= deadline_) return;
      batch = ready_.front();
      retry_now_ = false;
    }

    const auto result = upload_batch(
        batch, *transport_, cfg_,
        [this](std::chrono::milliseconds d) { return interruptible_sleep(d); });

    std::lock_guard lock(mu_);
    if (result.acked) {
      ready_.pop_front();
      ++acked_;
      // Keep going while more batches wait.
      retry_now_ = !ready_.empty();
      if (status_.load() == TelemetryStatus::Degraded && ready_.empty()) {
        status_ = TelemetryStatus::Ok;
      }
    } else {
      status_ = TelemetryStatus::Degraded;
      if (finishing_) return;  // one full retry cycle per batch at shutdown
    }
    cv_.notify_all();
  }
}

TelemetryStatus TelemetryUploader::finish(std::chrono::milliseconds timeout) {
  {
    std::unique_lock lock(mu_);
    if (!partial_.empty()) {
      ready_.push_back(Batch{session_id_, std::move(partial_)});
      partial_.clear();
    }
    finishing_ = true;
    retry_now_ = true;
    deadline_ = std::chrono::steady_clock::now() + timeout;
    cv_.notify_all();
    cv_.wait_until(lock, deadline_, [&] { return ready_.empty() || worker_done_; });
    if (!ready_.empty()) status_ = TelemetryStatus::Degraded;
    stop_ = true;
  }
  cv_.notify_all();
  if (worker_.joinable()) worker_.join();
  return status_.load();
}

MockTelemetryServer::MockTelemetryServer(std::string token)
    : token_(std::move(token)), server_(std::make_unique<httplib::Server>()) {
  server_->Post(R"(/v1/sessions/([^/]+)/records)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  std::lock_guard lock(mu_);
                  ++requests_;
                  if (!token_.empty() &&
                      req.get_header_value("Authorization") != "Bearer " + token_) {
                    res.status = 401;
                    return;
                  }
                  if (fail_next_ > 0) {
                    --fail_next_;
                    res.status = 503;
                    return;
                  }
                  const std::string key = req.get_header_value("Idempotency-Key");
                  if (key.empty()) {
                    res.status = 400;
                    return;
                  }
                  nlohmann::json body;
                  try {
                    body = nlohmann::json::parse(req.body);
                  } catch (const nlohmann::json::parse_error&) {
                    res.status = 400;
                    return;
                  }
                  const bool fresh = batches_.emplace(key, std::move(body)).second;
                  if (drop_every_ > 0 && requests_ % drop_every_ == 0) {
                    res.status = 500;
                    return;
                  }
                  res.status = fresh ? 201 : 200;
                  res.set_content(nlohmann::json{{"key", key}}.dump(), "application/json");
                });
}

MockTelemetryServer::~MockTelemetryServer() { stop(); }

void MockTelemetryServer::start() {
  port_ = server_->bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw Error(ErrorKind::Io, "mock telemetry: bind failed");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void MockTelemetryServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockTelemetryServer::url() const {
  return "http://127.0.0.1:" + std::to_string(port_);
}

void MockTelemetryServer::fail_next(int n) {
  std::lock_guard lock(mu_);
  fail_next_ = n;
}

void MockTelemetryServer::drop_ack_every(int k) {
  std::lock_guard lock(mu_);
  drop_every_ = k;
}

std::size_t MockTelemetryServer::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::size_t MockTelemetryServer::unique_batches() const {
  std::lock_guard lock(mu_);
  return batches_.size();
}

std::vector<nlohmann::json> MockTelemetryServer::records(
    const std::string& session_id) const {
  std::lock_guard lock(mu_);
  std::map<Second, nlohmann::json> by_t;
  const std::string prefix = session_id + ":";
  for (const auto& [key, body] : batches_) {
    if (key.rfind(prefix, 0) != 0) continue;
    for (const auto& r : body) by_t.emplace(r.at("t").get<Second>(), r);
  }
  std::vector<nlohmann::json> out;
  for (auto& [t, r] : by_t) out.push_back(r);
  return out;
}

}  // namespace nudge
