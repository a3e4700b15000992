#pragma once

// Minimal in-process chat-completions endpoint for agent and runner tests.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <atomic>
#include <functional>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

namespace testutil {

struct MockReply {
  int status = 200;
  std::string content;  // message content for 200, raw body otherwise
};

/// Serves POST /v1/chat/completions on an ephemeral localhost port. The
/// responder sees the parsed request body and the 1-based call number.
class MockLlmServer {
 public:
  using Responder = std::function<MockReply(const nlohmann::json& request, int call)>;

  explicit MockLlmServer(Responder responder) : responder_(std::move(responder)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      const int call = ++calls_;
      nlohmann::json body;
      try {
        body = nlohmann::json::parse(req.body);
      } catch (const nlohmann::json::exception&) {
        res.status = 400;
        res.set_content("bad request", "text/plain");
        return;
      }
      if (req.has_header("Authorization")) {
        last_auth_ = req.get_header_value("Authorization");
      } else {
        last_auth_.clear();
      }
      const MockReply reply = responder_(body, call);
      if (reply.status != 200) {
        res.status = reply.status;
        res.set_content(reply.content, "text/plain");
        return;
      }
      const nlohmann::json out{
          {"choices",
           nlohmann::json::array(
               {nlohmann::json{{"message", nlohmann::json{{"role", "assistant"},
                                                          {"content", reply.content}}}}})}};
      res.set_content(out.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockLlmServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int calls() const { return calls_.load(); }
  std::string last_auth() const { return last_auth_; }

 private:
  Responder responder_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> calls_{0};
  std::string last_auth_;
};

}  // namespace testutil
