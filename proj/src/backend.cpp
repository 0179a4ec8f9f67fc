#include "echelon/backend.hpp"

#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <regex>

#include <httplib.h>
#include <json.hpp>

#include "echelon/errors.hpp"

namespace echelon {

using nlohmann::json;

std::string to_string(ReasoningEffort e) { return e == ReasoningEffort::high ? "high" : "medium"; }

ReasoningEffort reasoning_effort_from_string(const std::string& s) {
  if (s == "medium") return ReasoningEffort::medium;
  if (s == "high") return ReasoningEffort::high;
  throw ConfigError("reasoning effort must be 'medium' or 'high', got '" + s + "'");
}

void validate(const BackendConfig& cfg) {
  if (cfg.kind != BackendConfig::Kind::remote) return;
  if (cfg.endpoint.empty()) throw ConfigError("remote backend needs an endpoint URL");
  if (cfg.model.empty()) throw ConfigError("remote backend needs a model name");
  if (cfg.max_retries < 0) throw ConfigError("max retries must be >= 0");
  if (cfg.max_concurrent < 1) throw ConfigError("max concurrent requests must be >= 1");
}

ScriptedBackend::ScriptedBackend(ScenarioSpec spec, PolicyConfig policy)
    : spec_(std::move(spec)), policy_(policy) {}

Decision ScriptedBackend::decide(const std::string&, const std::string&, const DecisionContext& ctx) const {
  Decision d;
  d.order = policy_order(policy_, spec_, ctx.observation, ctx.recent_sales);
  d.reason = to_string(policy_.kind);
  return d;
}

std::string ScriptedBackend::name() const { return "scripted:" + to_string(policy_.kind); }

ScheduleBackend::ScheduleBackend(std::vector<std::vector<Units>> orders, std::string label)
    : orders_(std::move(orders)), label_(std::move(label)) {}

Decision ScheduleBackend::decide(const std::string&, const std::string&, const DecisionContext& ctx) const {
  if (ctx.stage < 0 || static_cast<std::size_t>(ctx.stage) >= orders_.size() || ctx.period < 1 ||
      static_cast<std::size_t>(ctx.period) > orders_[ctx.stage].size()) {
    throw DomainError("schedule has no order for stage " + std::to_string(ctx.stage) + ", period " +
                      std::to_string(ctx.period));
  }
  return {orders_[ctx.stage][ctx.period - 1], label_, false, {}};
}

namespace {

std::optional<Units> integral_order(const json& v) {
  if (v.is_number_integer()) {
    const auto x = v.get<long long>();
    if (x < 0) return std::nullopt;
    return static_cast<Units>(x);
  }
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (x < 0 || std::floor(x) != x) return std::nullopt;
    return static_cast<Units>(x);
  }
  if (v.is_string()) {
    static const std::regex digits(R"(^\s*(\d+)\s*$)");
    std::smatch m;
    const auto s = v.get<std::string>();
    if (std::regex_match(s, m, digits)) return static_cast<Units>(std::stoll(m[1].str()));
  }
  return std::nullopt;
}

std::optional<ParsedReply> from_object(const json& j) {
  if (!j.is_object() || !j.contains("order")) return std::nullopt;
  auto order = integral_order(j["order"]);
  if (!order) return std::nullopt;
  ParsedReply r;
  r.order = *order;
  if (j.contains("reason") && j["reason"].is_string()) r.reason = j["reason"].get<std::string>();
  return r;
}

}  // namespace

std::optional<ParsedReply> parse_reply(const std::string& content) {
  json whole = json::parse(content, nullptr, false);
  if (!whole.is_discarded()) {
    if (auto r = from_object(whole)) return r;
  }
  const auto open = content.find('{');
  const auto close = content.rfind('}');
  if (open != std::string::npos && close != std::string::npos && close > open) {
    json inner = json::parse(content.substr(open, close - open + 1), nullptr, false);
    if (!inner.is_discarded()) {
      if (inner.is_object() && inner.contains("order")) return from_object(inner);
    }
  }
  static const std::regex labelled(R"(order[^0-9\-\n]{0,40}?(-?\d+))", std::regex::icase);
  std::optional<long long> last;
  for (auto it = std::sregex_iterator(content.begin(), content.end(), labelled); it != std::sregex_iterator(); ++it) {
    last = std::stoll((*it)[1].str());
  }
  if (!last || *last < 0) return std::nullopt;
  return ParsedReply{static_cast<Units>(*last), content};
}

struct RemoteBackend::Limiter {
  explicit Limiter(int n) : available(n) {}
  void acquire() {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return available > 0; });
    --available;
  }
  void release() {
    {
      std::lock_guard lock(mu);
      ++available;
    }
    cv.notify_one();
  }
  std::mutex mu;
  std::condition_variable cv;
  int available;
};

RemoteBackend::RemoteBackend(BackendConfig cfg, ScenarioSpec spec)
    : cfg_(std::move(cfg)), fallback_(std::move(spec), cfg_.fallback), limiter_(std::make_unique<Limiter>(cfg_.max_concurrent)) {
  validate(cfg_);
}

RemoteBackend::~RemoteBackend() = default;

std::string RemoteBackend::request_body(const std::string& system_prompt, const std::string& prompt) const {
  json body;
  body["model"] = cfg_.model;
  body["messages"] = json::array({
      {{"role", "system"}, {"content", system_prompt}},
      {{"role", "user"}, {"content", prompt}},
  });
  body["reasoning_effort"] = to_string(cfg_.effort);
  body["response_format"] = {{"type", "json_object"}};
  return body.dump();
}

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // full request path
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint must start with http:// or https://: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  e.origin = url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  const std::string suffix = "/chat/completions";
  if (prefix.size() >= suffix.size() && prefix.compare(prefix.size() - suffix.size(), suffix.size(), suffix) == 0) {
    e.path = prefix;
  } else {
    e.path = prefix + suffix;
  }
  return e;
}

std::optional<std::string> reply_content(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  try {
    const auto& msg = j.at("choices").at(0).at("message");
    if (msg.contains("content") && msg["content"].is_string()) return msg["content"].get<std::string>();
  } catch (const json::exception&) {
  }
  return std::nullopt;
}

}  // namespace

Decision RemoteBackend::decide(const std::string& system_prompt, const std::string& prompt,
                               const DecisionContext& ctx) const {
  const Endpoint ep = split_endpoint(cfg_.endpoint);
  const std::string body = request_body(system_prompt, prompt);
  httplib::Headers headers;
  if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  Decision d;
  const int attempts = 1 + cfg_.max_retries;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    limiter_->acquire();
    httplib::Result res{nullptr, httplib::Error::Unknown};
    try {
      httplib::Client cli(ep.origin);
      const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
      const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg_.timeout - secs);
      cli.set_connection_timeout(secs.count(), usecs.count());
      cli.set_read_timeout(secs.count(), usecs.count());
      cli.set_write_timeout(secs.count(), usecs.count());
      res = cli.Post(ep.path, headers, body, "application/json");
    } catch (...) {
      limiter_->release();
      throw;
    }
    limiter_->release();

    if (!res) {
      d.raw_replies.push_back("<transport error: " + httplib::to_string(res.error()) + ">");
      continue;
    }
    if (res->status != 200) {
      d.raw_replies.push_back("<http " + std::to_string(res->status) + "> " + res->body);
      continue;
    }
    const auto content = reply_content(res->body);
    d.raw_replies.push_back(content.value_or(res->body));
    if (!content) continue;
    if (auto parsed = parse_reply(*content)) {
      d.order = parsed->order;
      d.reason = parsed->reason;
      return d;
    }
  }

  Decision fb = fallback_.decide(system_prompt, prompt, ctx);
  fb.fallback = true;
  fb.reason = "fallback " + fb.reason + " after " + std::to_string(attempts) + " failed attempt(s)";
  fb.raw_replies = std::move(d.raw_replies);
  return fb;
}

std::shared_ptr<DecisionBackend> make_backend(const BackendConfig& cfg, const ScenarioSpec& spec) {
  validate(cfg);
  if (cfg.kind == BackendConfig::Kind::remote) return std::make_shared<RemoteBackend>(cfg, spec);
  return std::make_shared<ScriptedBackend>(spec, cfg.policy);
}

}  // namespace echelon
