#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "echelon/scenario.hpp"

namespace mock {

struct Request {
  int period = -1;  // parsed from "Round N." in the user prompt, -1 if absent
  int stage = -1;   // parsed from "stage M of"
  std::string system;
  std::string user;
  std::string authorization;
  nlohmann::json body;
  int attempt = 0;  // 0 for the first request seen for this (period, stage, episode ordinal)
};

struct Reply {
  int status = 200;
  std::string content;          // wrapped into a chat-completions body
  std::optional<std::string> raw_body;  // sent as is when set
  std::chrono::milliseconds delay{0};
};

inline Reply ok(std::string content) { return Reply{200, std::move(content), std::nullopt, {}}; }
inline Reply fail(int status, std::string body) { return Reply{status, "", std::move(body), {}}; }

/// Local chat-completions endpoint on 127.0.0.1 with a scripted responder.
class Server {
 public:
  using Responder = std::function<Reply(const Request&)>;

  explicit Server(Responder responder);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::string base_url() const;
  int port() const { return port_; }
  std::size_t requests() const { return requests_.load(); }
  std::vector<Request> log() const;

 private:
  Responder responder_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<std::size_t> requests_{0};
  mutable std::mutex mu_;
  std::vector<Request> log_;
  std::map<std::pair<int, int>, int> attempts_;
};

std::string chat_body(const std::string& content);

/// Orders a scripted safety-stock (z = 0) rollout places, keyed by (period, stage).
std::map<std::pair<int, int>, echelon::Units> safety_stock_orders(const echelon::ScenarioSpec& spec);

}  // namespace mock
