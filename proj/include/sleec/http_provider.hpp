#pragma once

// Live model client speaking the common chat-completions JSON protocol over HTTP(S).
// HTTPS needs CPPHTTPLIB_OPENSSL_SUPPORT defined before this header.

#include "sleec/extractor.hpp"

#include "httplib.h"

#include <string>

namespace sleec {

struct HttpProviderConfig {
  std::string url;  // full endpoint, e.g. https://host/v1/chat/completions
  std::string api_key;
  std::string model;
  double temperature = 0.0;
  int timeout_seconds = 120;
};

class HttpProvider : public Provider {
public:
  explicit HttpProvider(HttpProviderConfig cfg) : cfg_(std::move(cfg)) {
    const auto scheme_end = cfg_.url.find("://");
    if (scheme_end == std::string::npos) throw ProviderError("provider URL needs a scheme: " + cfg_.url);
    const auto path_start = cfg_.url.find('/', scheme_end + 3);
    origin_ = cfg_.url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : cfg_.url.substr(path_start);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (cfg_.url.rfind("https://", 0) == 0) throw ProviderError("this build has no TLS support; use an http:// endpoint");
#endif
  }

  std::string complete(const std::string& prompt) override {
    httplib::Client cli(origin_);
    cli.set_read_timeout(cfg_.timeout_seconds, 0);
    cli.set_connection_timeout(30, 0);
    httplib::Headers headers;
    if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);
    nlohmann::json body{{"model", cfg_.model},
                        {"temperature", cfg_.temperature},
                        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
    auto res = cli.Post(path_, headers, body.dump(), "application/json");
    if (!res) throw ProviderError("provider request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw ProviderError("provider answered HTTP " + std::to_string(res->status));
    nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded()) throw ProviderError("provider answered with invalid JSON");
    try {
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw ProviderError("provider answer has no choices[0].message.content");
    }
  }

private:
  HttpProviderConfig cfg_;
  std::string origin_;
  std::string path_;
};

}  // namespace sleec
