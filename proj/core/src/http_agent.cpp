#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "dilemma/agents.hpp"
#include "dilemma/errors.hpp"

namespace dilemma {
namespace detail {

using nlohmann::json;

namespace {

struct ParsedUrl {
  std::string base;  // scheme://host[:port]
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint URL needs a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    return {url, "/v1/chat/completions"};
  }
  return {url.substr(0, path_start), url.substr(path_start)};
}

bool retryable_status(int status) {
  return status == 429 || (status >= 500 && status < 600);
}

std::chrono::milliseconds backoff_delay(const RetryPolicy& retry, int attempt) {
  double ms = static_cast<double>(retry.base.count());
  for (int i = 0; i < attempt; ++i) ms *= retry.factor;
  ms = std::min(ms, static_cast<double>(retry.cap.count()));
  return std::chrono::milliseconds(static_cast<long long>(ms));
}

bool timeout_error(httplib::Error err) {
  return err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
         err == httplib::Error::Write;
}

}  // namespace

AgentResponse llm_decide(const LlmHttpSpec& spec, const TrialInput& input,
                         const ParsePolicy& base_policy) {
  if (spec.endpoint_url.empty()) throw ConfigError("llm-http agent needs an endpoint URL");
  if (spec.temperature < 0) throw ConfigError("temperature must be >= 0");

  const ParsedUrl url = split_url(spec.endpoint_url);

  std::string user_text = input.bundle.user;
  ParsePolicy policy = base_policy;
  if (spec.ask_motivation && !input.pgg) {
    user_text += "\n\n" + motivation_request_sentence();
    policy.final_token_wins = true;
  }

  json body{
      {"model", spec.model_name},
      {"temperature", spec.temperature},
      {"messages",
       json::array({json{{"role", "system"}, {"content", input.bundle.system}},
                    json{{"role", "user"}, {"content", user_text}}})},
  };
  if (spec.max_tokens) body["max_tokens"] = *spec.max_tokens;
  for (const auto& [key, value] : spec.extra_params) body[key] = value;
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!spec.auth_token_env.empty()) {
    const char* token = std::getenv(spec.auth_token_env.c_str());
    if (token && *token) headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  httplib::Client client(url.base);
  client.set_connection_timeout(spec.timeout);
  client.set_read_timeout(spec.timeout);
  client.set_write_timeout(spec.timeout);

  const auto start = std::chrono::steady_clock::now();
  httplib::Result result;
  for (int attempt = 0;; ++attempt) {
    result = client.Post(url.path, headers, payload, "application/json");
    const bool retryable = !result || retryable_status(result->status);
    if (!retryable || attempt >= spec.retry.max_retries) break;
    std::this_thread::sleep_for(backoff_delay(spec.retry, attempt));
  }

  if (!result) {
    const auto err = result.error();
    const std::string what = "request to " + spec.endpoint_url +
                             " failed: " + httplib::to_string(err);
    if (timeout_error(err)) throw TimeoutError(what);
    throw HttpError(what);
  }
  if (result->status != 200) {
    throw HttpError("endpoint " + spec.endpoint_url + " returned HTTP " +
                    std::to_string(result->status));
  }

  AgentResponse response;
  try {
    const json reply = json::parse(result->body);
    response.raw_text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw HttpError("malformed chat completion response: " + std::string(e.what()));
  }
  response.latency_ms = std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(
                            std::chrono::steady_clock::now() - start)
                            .count();

  finish_llm_response(response, input, policy);
  return response;
}

}  // namespace detail
}  // namespace dilemma
