#include "mock_llm.hpp"

#include <regex>

#include "echelon/agents.hpp"
#include "echelon/backend.hpp"
#include "echelon/prompts.hpp"

namespace mock {

std::string chat_body(const std::string& content) {
  nlohmann::json j = {{"id", "mock"},
                      {"object", "chat.completion"},
                      {"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}}}};
  return j.dump();
}

Server::Server(Responder responder) : responder_(std::move(responder)) {
  server_.Post(R"(.*/chat/completions)", [this](const httplib::Request& req, httplib::Response& res) {
    Request r;
    r.authorization = req.get_header_value("Authorization");
    r.body = nlohmann::json::parse(req.body, nullptr, false);
    if (!r.body.is_discarded() && r.body.contains("messages")) {
      for (const auto& msg : r.body["messages"]) {
        const auto role = msg.value("role", "");
        if (role == "system") r.system = msg.value("content", "");
        if (role == "user") r.user = msg.value("content", "");
      }
    }
    static const std::regex round_re(R"(Round (\d+)\.)");
    static const std::regex stage_re(R"(stage (\d+) of)");
    std::smatch m;
    if (std::regex_search(r.user, m, round_re)) r.period = std::stoi(m[1].str());
    if (std::regex_search(r.user, m, stage_re)) r.stage = std::stoi(m[1].str());
    {
      std::lock_guard lock(mu_);
      r.attempt = attempts_[{r.period, r.stage}]++;
      log_.push_back(r);
    }
    ++requests_;
    const Reply reply = responder_(r);
    if (reply.delay.count() > 0) std::this_thread::sleep_for(reply.delay);
    res.status = reply.status;
    res.set_content(reply.raw_body ? *reply.raw_body : chat_body(reply.content), "application/json");
  });
  port_ = server_.bind_to_any_port("127.0.0.1");
  thread_ = std::thread([this] { server_.listen_after_bind(); });
  server_.wait_until_ready();
}

Server::~Server() {
  server_.stop();
  if (thread_.joinable()) thread_.join();
}

std::string Server::base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

std::vector<Request> Server::log() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::map<std::pair<int, int>, echelon::Units> safety_stock_orders(const echelon::ScenarioSpec& spec) {
  echelon::PolicyConfig pc;
  pc.kind = echelon::PolicyKind::safety_stock;
  echelon::ScriptedBackend backend(spec, pc);
  auto bundle = echelon::default_prompt_bundle();
  bundle.demand_description = echelon::describe_demand(spec);
  const auto res = echelon::run_episode(spec, backend, bundle, echelon::MemoryConfig{});
  std::map<std::pair<int, int>, echelon::Units> out;
  for (const auto& d : res.decisions) out[{d.period, d.stage}] = d.decision.order;
  return out;
}

}  // namespace mock
