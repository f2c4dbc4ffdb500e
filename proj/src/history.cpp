#include "ztsfc/history.hpp"

#include <chrono>

#include "ztsfc/errors.hpp"

namespace ztsfc {

const char* outcome_name(Outcome outcome) {
  switch (outcome) {
    case Outcome::Served: return "Served";
    case Outcome::Denied: return "Denied";
    case Outcome::DroppedByFunction: return "DroppedByFunction";
    case Outcome::PotFailure: return "PotFailure";
    case Outcome::UpstreamError: return "UpstreamError";
  }
  return "Unknown";
}

nlohmann::json HistoryRecord::to_json() const {
  return nlohmann::json{
      {"request_id", request_id},
      {"client", client},
      {"method", method},
      {"target", target},
      {"attributes", attributes},
      {"score", score},
      {"chain", chain},
      {"outcome", outcome_name(outcome)},
      {"detail", detail},
      {"status", status},
      {"started_at_ms", started_at_ms},
      {"duration_ms", duration_ms},
  };
}

nlohmann::json FeedbackEvent::to_json() const {
  return nlohmann::json{
      {"request_id", request_id},
      {"function_id", function_id},
      {"verdict", verdict},
      {"reason", reason},
      {"at_ms", at_ms},
  };
}

std::optional<FeedbackEvent> FeedbackEvent::from_json(const nlohmann::json& j) {
  FeedbackEvent event;
  if (!j.is_object()) return std::nullopt;
  for (const char* field : {"request_id", "function_id", "verdict", "reason"}) {
    if (!j.contains(field) || !j[field].is_string()) return std::nullopt;
  }
  event.request_id = j["request_id"].get<std::string>();
  event.function_id = j["function_id"].get<std::string>();
  event.verdict = j["verdict"].get<std::string>();
  event.reason = j["reason"].get<std::string>();
  if (event.request_id.empty() || event.function_id.empty()) return std::nullopt;
  event.at_ms = now_ms();
  return event;
}

NdjsonLog::NdjsonLog(const std::string& path) {
  if (path.empty()) return;
  out_.open(path, std::ios::app);
  if (!out_) throw ConfigError("cannot open log file " + path);
}

void NdjsonLog::append(const nlohmann::json& record) {
  std::lock_guard lock(mu_);
  if (!out_) return;
  out_ << record.dump() << "\n";
  out_.flush();
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace ztsfc
