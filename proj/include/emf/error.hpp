// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace emf {

enum class ErrorCode {
    InvalidArgument,
    MalformedContainer,
    GateUnavailable,
    MalformedLLMResponse,
    DegeneratePrompt,
    DuplicateExpert,
    UnknownExpert,
    NoEligibleExpert,
    LeaderFailed,
    ProtocolViolation,
    TransportClosed,
    ExpertTimeout,
    ExpertFailed,
    EmptyClip,
    SlotGap,
    NoBaseLayer,
    MergeError,
    TooFewFrames,
    ScorerUnavailable,
    UnknownJob,
    CorruptJournal,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library. `offset` carries a byte offset for
/// codec errors and a 1-based line number for journal errors.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::optional<std::size_t> offset = std::nullopt);

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::size_t> offset() const noexcept { return offset_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> offset_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message,
                       std::optional<std::size_t> offset = std::nullopt);

}  // namespace emf
