#pragma once

#include <cstdint>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "ztsfc/trust.hpp"

namespace ztsfc {

enum class Outcome {
  Served,             // reached the service, response relayed
  Denied,             // policy said no (or challenged for credentials)
  DroppedByFunction,  // a chain function reported a drop
  PotFailure,         // response arrived but transit proof did not hold
  UpstreamError,      // a hop or the service was unreachable or broke protocol
};

const char* outcome_name(Outcome outcome);

// One line of the PEP's access history.
struct HistoryRecord {
  std::string request_id;
  std::string client;  // certificate CN, or "anonymous"
  std::string method;
  std::string target;
  std::vector<std::string> attributes;  // trust attributes present at ingress
  std::int64_t score = 0;
  std::vector<FunctionId> chain;  // planned hops, in order
  Outcome outcome = Outcome::Denied;
  std::string detail;  // deny/drop/pot reason, empty when served
  int status = 0;      // HTTP status relayed to the client
  std::int64_t started_at_ms = 0;
  std::int64_t duration_ms = 0;

  nlohmann::json to_json() const;
};

// Drop report a function files against an in-flight request.
struct FeedbackEvent {
  std::string request_id;
  FunctionId function_id;
  std::string verdict;  // "drop" is the only one functions send today
  std::string reason;
  std::int64_t at_ms = 0;

  nlohmann::json to_json() const;
  // Empty optional when required fields are missing or not strings.
  static std::optional<FeedbackEvent> from_json(const nlohmann::json& j);
};

// Append-only newline-delimited JSON file; empty path disables it.
class NdjsonLog {
 public:
  explicit NdjsonLog(const std::string& path);

  void append(const nlohmann::json& record);
  bool enabled() const { return static_cast<bool>(out_); }

 private:
  std::mutex mu_;
  std::ofstream out_;
};

std::int64_t now_ms();

}  // namespace ztsfc
