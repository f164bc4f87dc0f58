// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "emf/gate/llm_client.hpp"

#include <httplib.h>

#include <cstdlib>

#include "emf/core/json.hpp"
#include "emf/core/url.hpp"
#include "emf/error.hpp"

namespace emf::gate {

const std::string_view kGateSystemInstruction =
    "You split video generation requests into sub-prompts for separate video generators. "
    "Classify the request as \"temporal\" when it describes events that happen one after another, "
    "\"spatial\" when it describes subjects or actions that happen at the same time in one scene, "
    "or \"atomic\" when it describes a single subject or action. "
    "For temporal requests return one clause per event in order of occurrence. "
    "For spatial requests return the main scene clause first, then one clause per additional subject. "
    "For atomic requests return the request as a single clause. "
    "Reply with only a JSON object of the form {\"kind\": \"temporal|spatial|atomic\", \"clauses\": [\"...\"]} "
    "and no other text.";

namespace {

std::string strip_code_fence(std::string_view content) {
    std::string s(content);
    const auto first = s.find('{');
    const auto last = s.rfind('}');
    if (first == std::string::npos || last == std::string::npos || last < first) return s;
    return s.substr(first, last - first + 1);
}

[[noreturn]] void malformed(const std::string& why) { fail(ErrorCode::MalformedLLMResponse, why); }

}  // namespace

DecompositionPlan parse_llm_reply(std::string_view content, const PromptSpec& prompt) {
    Json reply;
    try {
        reply = Json::parse(strip_code_fence(content));
    } catch (const Json::parse_error& e) {
        malformed(std::string("reply is not JSON: ") + e.what());
    }
    if (!reply.is_object() || !reply.contains("kind") || !reply["kind"].is_string() || !reply.contains("clauses") ||
        !reply["clauses"].is_array()) {
        malformed("reply must be an object with string 'kind' and array 'clauses'");
    }
    TaskKind kind;
    try {
        kind = parse_task_kind(reply["kind"].get<std::string>());
    } catch (const Error& e) {
        malformed(e.what());
    }
    std::vector<std::string> clauses;
    for (const auto& c : reply["clauses"]) {
        if (!c.is_string()) malformed("clauses must be strings");
        clauses.push_back(c.get<std::string>());
    }
    try {
        return build_plan(prompt, kind, clauses, PlanOrigin::ExternalLLM);
    } catch (const Error& e) {
        malformed(std::string("reply violates plan invariants: ") + e.what());
    }
}

DecompositionPlan llm_decompose(const PromptSpec& prompt, const LLMEndpointConfig& cfg) {
    try {
        cfg.validate();
    } catch (const Error& e) {
        fail(ErrorCode::GateUnavailable, e.what());
    }
    const UrlParts ep = split_url(cfg.base_url);
    std::string key = cfg.api_key;
    if (key.empty()) {
        if (const char* env = std::getenv("EMF_LLM_API_KEY")) key = env;
    }

    const Json body{{"model", cfg.model_name},
                    {"temperature", 0},
                    {"messages",
                     Json::array({Json{{"role", "system"}, {"content", std::string(kGateSystemInstruction)}},
                                  Json{{"role", "user"}, {"content", prompt.text}}})}};
    const std::string payload = body.dump();

    httplib::Client client(ep.origin);
    const auto ms = cfg.timeout.count();
    client.set_connection_timeout(ms / 1000, static_cast<time_t>((ms % 1000) * 1000));
    client.set_read_timeout(ms / 1000, static_cast<time_t>((ms % 1000) * 1000));
    client.set_write_timeout(ms / 1000, static_cast<time_t>((ms % 1000) * 1000));
    httplib::Headers headers;
    if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        auto res = client.Post(ep.path + "/chat/completions", headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "endpoint returned HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            fail(ErrorCode::GateUnavailable, "endpoint returned HTTP " + std::to_string(res->status));
        }
        Json envelope;
        try {
            envelope = Json::parse(res->body);
            const auto& content = envelope.at("choices").at(0).at("message").at("content");
            return parse_llm_reply(content.get<std::string>(), prompt);
        } catch (const Json::exception& e) {
            malformed(std::string("chat completion envelope malformed: ") + e.what());
        }
    }
    fail(ErrorCode::GateUnavailable, last_error);
}

}  // namespace emf::gate
