#pragma once

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "vqkit/dataset.hpp"
#include "vqkit/error.hpp"

namespace vqkit {

inline constexpr const char* kJudgeEndpointEnvVar = "JUDGE_ENDPOINT";
inline constexpr const char* kJudgeTokenEnvVar = "JUDGE_TOKEN";

/// Thin generic POST client for an external judge service. The request body
/// is {statement, media_url, round} plus a mode marker; anything beyond that
/// is deployment configuration. Three attempts with exponential backoff.
class HttpJudge : public JudgeBackend {
public:
    HttpJudge() {
        const char* endpoint = std::getenv(kJudgeEndpointEnvVar);
        if (!endpoint || !*endpoint) {
            throw Error(ErrorCode::JudgeUnavailable,
                        std::string(kJudgeEndpointEnvVar) + " is not set");
        }
        endpoint_ = endpoint;
        if (const char* token = std::getenv(kJudgeTokenEnvVar); token && *token) {
            token_ = token;
        }
        const auto scheme_end = endpoint_.find("://");
        const auto path_start = endpoint_.find('/', scheme_end == std::string::npos
                                                        ? 0
                                                        : scheme_end + 3);
        if (path_start == std::string::npos) {
            base_ = endpoint_;
            path_ = "/";
        } else {
            base_ = endpoint_.substr(0, path_start);
            path_ = endpoint_.substr(path_start);
        }
    }

    JudgeVerdict evaluate(const std::string& statement, const std::string& media_ref,
                          int round_index) override {
        const nlohmann::json response =
            post({{"mode", "evaluate"}, {"statement", statement}, {"media_url", media_ref},
                  {"round", round_index}});
        JudgeVerdict verdict;
        verdict.score = response.at("score").get<int>();
        if (response.contains("revision")) verdict.revision = response.at("revision").get<std::string>();
        if (response.contains("reason")) verdict.reason = response.at("reason").get<std::string>();
        verdict.validate();
        return verdict;
    }

    bool binary_judge(const std::string& statement, const std::string& media_ref,
                      int round_index) override {
        const nlohmann::json response =
            post({{"mode", "binary"}, {"statement", statement}, {"media_url", media_ref},
                  {"round", round_index}});
        return response.at("positive").get<bool>();
    }

private:
    nlohmann::json post(const nlohmann::json& body) {
        httplib::Client client(base_);
        client.set_connection_timeout(5);
        client.set_read_timeout(30);
        httplib::Headers headers;
        if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
        std::string last_error = "no attempt made";
        for (int attempt = 0; attempt < 3; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(100 << attempt));
            }
            auto result = client.Post(path_, headers, body.dump(), "application/json");
            if (!result) {
                last_error = "transport error: " + httplib::to_string(result.error());
                continue;
            }
            if (result->status != 200) {
                last_error = "http status " + std::to_string(result->status);
                continue;
            }
            try {
                return nlohmann::json::parse(result->body);
            } catch (const nlohmann::json::exception& e) {
                last_error = std::string("bad response body: ") + e.what();
            }
        }
        throw Error(ErrorCode::JudgeUnavailable, "judge endpoint failed: " + last_error);
    }

    std::string endpoint_;
    std::string base_;
    std::string path_;
    std::string token_;
};

}  // namespace vqkit
