#include "httplib.h"
#include "json.hpp"

#include "aflow/inference.hpp"

namespace aflow {

namespace {

// Chat-completions + embeddings client for any OpenAI-compatible server.
class LiveLm final : public LmBackend {
 public:
  explicit LiveLm(LiveLmConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) throw LmError("AFLOW_LM_URL is not configured");
    if (config_.model.empty()) throw LmError("AFLOW_LM_MODEL is not configured");
  }

  std::string complete(const std::string& system_prompt, const std::string& user_prompt) override {
    nlohmann::json body;
    body["model"] = config_.model;
    body["messages"] = {{{"role", "system"}, {"content", system_prompt}},
                        {{"role", "user"}, {"content", user_prompt}}};
    nlohmann::json reply = post("/chat/completions", body);
    try {
      std::string content = reply.at("choices").at(0).at("message").at("content");
      if (content.empty()) throw EmptyResponse("model returned empty content");
      return content;
    } catch (const nlohmann::json::exception& e) {
      throw LmError(std::string("malformed chat response: ") + e.what());
    }
  }

  std::vector<float> embed(std::string_view text) override {
    if (config_.embed_model.empty()) throw LmError("AFLOW_EMBED_MODEL is not configured");
    nlohmann::json body;
    body["model"] = config_.embed_model;
    body["input"] = std::string(text);
    nlohmann::json reply = post("/embeddings", body);
    try {
      return reply.at("data").at(0).at("embedding").get<std::vector<float>>();
    } catch (const nlohmann::json::exception& e) {
      throw LmError(std::string("malformed embeddings response: ") + e.what());
    }
  }

 private:
  nlohmann::json post(const std::string& path, const nlohmann::json& body) {
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(30, 0);
    client.set_read_timeout(300, 0);
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + config_.api_key);
    }
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) {
      throw LmError("cannot reach '" + config_.base_url + "': " +
                    httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw LmError("POST " + path + " returned status " + std::to_string(res->status) + ": " +
                    res->body);
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw LmError(std::string("malformed response body: ") + e.what());
    }
  }

  LiveLmConfig config_;
};

}  // namespace

std::unique_ptr<LmBackend> live_lm_backend(LiveLmConfig config) {
  return std::make_unique<LiveLm>(std::move(config));
}

}  // namespace aflow
