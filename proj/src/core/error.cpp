// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "emf/error.hpp"

namespace emf {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::MalformedContainer: return "MalformedContainer";
        case ErrorCode::GateUnavailable: return "GateUnavailable";
        case ErrorCode::MalformedLLMResponse: return "MalformedLLMResponse";
        case ErrorCode::DegeneratePrompt: return "DegeneratePrompt";
        case ErrorCode::DuplicateExpert: return "DuplicateExpert";
        case ErrorCode::UnknownExpert: return "UnknownExpert";
        case ErrorCode::NoEligibleExpert: return "NoEligibleExpert";
        case ErrorCode::LeaderFailed: return "LeaderFailed";
        case ErrorCode::ProtocolViolation: return "ProtocolViolation";
        case ErrorCode::TransportClosed: return "TransportClosed";
        case ErrorCode::ExpertTimeout: return "ExpertTimeout";
        case ErrorCode::ExpertFailed: return "ExpertFailed";
        case ErrorCode::EmptyClip: return "EmptyClip";
        case ErrorCode::SlotGap: return "SlotGap";
        case ErrorCode::NoBaseLayer: return "NoBaseLayer";
        case ErrorCode::MergeError: return "MergeError";
        case ErrorCode::TooFewFrames: return "TooFewFrames";
        case ErrorCode::ScorerUnavailable: return "ScorerUnavailable";
        case ErrorCode::UnknownJob: return "UnknownJob";
        case ErrorCode::CorruptJournal: return "CorruptJournal";
    }
    return "Unknown";
}

namespace {

std::string decorate(ErrorCode code, const std::string& message, std::optional<std::size_t> offset) {
    std::string out{to_string(code)};
    out += ": ";
    out += message;
    if (offset) {
        out += " (at " + std::to_string(*offset) + ")";
    }
    return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> offset)
    : std::runtime_error(decorate(code, message, offset)), code_(code), offset_(offset) {}

void fail(ErrorCode code, const std::string& message, std::optional<std::size_t> offset) {
    throw Error(code, message, offset);
}

}  // namespace emf
