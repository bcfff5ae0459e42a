#include "fake_servers.hpp"

#include <chrono>

#include <httplib.h>

#include "tqa/semantic.hpp"

namespace tqa::testing {

LoopbackServer::LoopbackServer() : server_(std::make_unique<httplib::Server>()) {}

LoopbackServer::~LoopbackServer() { stop(); }

void LoopbackServer::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

void LoopbackServer::start() {
  port_ = server_->bind_to_any_port("127.0.0.1");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

FakeEmbedServer::FakeEmbedServer(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  server().Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    const Mode mode = mode_;
    if (mode == Mode::kServerError) {
      res.status = 500;
      res.set_content(R"({"error":"boom"})", "application/json");
      return;
    }
    const auto body = nlohmann::json::parse(req.body);
    const auto& texts = body.at("texts");
    std::size_t seen = max_batch_;
    while (texts.size() > seen && !max_batch_.compare_exchange_weak(seen, texts.size())) {
    }
    nlohmann::json out;
    out["dim"] = dim_;
    out["vectors"] = nlohmann::json::array();
    for (const auto& t : texts) {
      auto values = hash_embed(t.get<std::string>(), dim_, seed_).values;
      if (mode == Mode::kShortVectors) values.pop_back();
      out["vectors"].push_back(values);
    }
    res.set_content(out.dump(), "application/json");
  });
  start();
}

FakeLlmServer::FakeLlmServer(Reply reply) : reply_(std::move(reply)) {
  server().Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    const auto body = nlohmann::json::parse(req.body);
    {
      std::lock_guard lock(mu_);
      last_request_ = body;
      last_authorization_ = req.get_header_value("Authorization");
    }
    if (status_ != 200) {
      res.status = status_;
      res.set_content(R"({"error":{"message":"unavailable"}})", "application/json");
      return;
    }
    std::string system;
    std::string user;
    for (const auto& m : body.at("messages")) {
      if (m.at("role") == "system") system = m.at("content");
      if (m.at("role") == "user") user = m.at("content");
    }
    nlohmann::json out;
    out["id"] = "chatcmpl-test";
    out["choices"] = nlohmann::json::array(
        {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", reply_(system, user)}}}}});
    res.set_content(out.dump(), "application/json");
  });
  start();
}

nlohmann::json FakeLlmServer::last_request() const {
  std::lock_guard lock(mu_);
  return last_request_;
}

std::string FakeLlmServer::last_authorization() const {
  std::lock_guard lock(mu_);
  return last_authorization_;
}

}  // namespace tqa::testing
