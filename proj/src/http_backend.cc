#include "httplib.h"

#include <cstdlib>

#include "json.hpp"
#include "natdisc/prelabel.h"

namespace natdisc {

HttpJsonBackend::HttpJsonBackend(HttpBackendConfig config)
    : config_(std::move(config)) {
  const std::string& url = config_.endpoint;
  size_t scheme = url.find("://");
  if (scheme == std::string::npos ||
      (url.compare(0, scheme, "http") != 0 &&
       url.compare(0, scheme, "https") != 0)) {
    throw ContractError("backend endpoint must be an http(s) URL: " + url);
  }
  size_t slash = url.find('/', scheme + 3);
  scheme_host_port_ = url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : url.substr(slash);
  if (config_.model.empty()) throw ContractError("backend model name is empty");
}

std::string HttpJsonBackend::Complete(const std::string& prompt) {
  using json = nlohmann::json;
  httplib::Client client(scheme_host_port_);
  const auto secs = static_cast<time_t>(config_.timeout.count());
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  httplib::Headers headers;
  if (!config_.token_env.empty()) {
    if (const char* token = std::getenv(config_.token_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }
  json body = {{"model", config_.model},
               {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
               {"temperature", 0}};
  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    throw BackendError("backend request failed: " +
                       httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw BackendError("backend returned HTTP " + std::to_string(res->status));
  }
  json reply;
  try {
    reply = json::parse(res->body);
  } catch (const json::parse_error&) {
    throw BackendError("backend returned invalid JSON");
  }
  if (reply.contains("choices") && reply["choices"].is_array() &&
      !reply["choices"].empty()) {
    const json& choice = reply["choices"][0];
    if (choice.contains("message") && choice["message"].contains("content") &&
        choice["message"]["content"].is_string()) {
      return choice["message"]["content"].get<std::string>();
    }
    if (choice.contains("text") && choice["text"].is_string()) {
      return choice["text"].get<std::string>();
    }
  }
  if (reply.contains("response") && reply["response"].is_string()) {
    return reply["response"].get<std::string>();
  }
  throw BackendError("backend reply has no completion text");
}

}  // namespace natdisc
