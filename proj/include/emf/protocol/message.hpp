// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emf/core/json.hpp"

namespace emf::protocol {

// Frame: u32 BE header length | JSON header | payload.
// Header: {"type", "request_id", "body", "payload_length"}.
inline constexpr std::size_t kMaxHeaderBytes = std::size_t{1} << 20;
inline constexpr std::size_t kMaxPayloadBytes = std::size_t{1} << 30;

enum class MessageType { Hello, HelloAck, Generate, Progress, Result, Error, Heartbeat };

std::string_view to_string(MessageType type);
MessageType parse_message_type(std::string_view text);

/// True for types that must carry a UUID request_id.
bool requires_request_id(MessageType type);

struct Message {
    MessageType type = MessageType::Hello;
    std::string request_id;  // empty when absent
    Json body = Json::object();
    std::vector<std::uint8_t> payload;

    bool operator==(const Message&) const = default;
};

std::vector<std::uint8_t> encode_message(const Message& m);

/// Decodes exactly one frame. Throws ProtocolViolation with the byte offset.
Message decode_message(std::span<const std::uint8_t> bytes);

bool is_uuid(std::string_view text);
std::string new_request_id();

}  // namespace emf::protocol
