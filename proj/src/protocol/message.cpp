// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "emf/protocol/message.hpp"

#include <random>

#include "emf/error.hpp"

namespace emf::protocol {

namespace {

[[noreturn]] void violation(const std::string& why, std::size_t offset) {
    fail(ErrorCode::ProtocolViolation, why, offset);
}

}  // namespace

std::string_view to_string(MessageType type) {
    switch (type) {
        case MessageType::Hello: return "HELLO";
        case MessageType::HelloAck: return "HELLO_ACK";
        case MessageType::Generate: return "GENERATE";
        case MessageType::Progress: return "PROGRESS";
        case MessageType::Result: return "RESULT";
        case MessageType::Error: return "ERROR";
        case MessageType::Heartbeat: return "HEARTBEAT";
    }
    return "HELLO";
}

MessageType parse_message_type(std::string_view text) {
    if (text == "HELLO") return MessageType::Hello;
    if (text == "HELLO_ACK") return MessageType::HelloAck;
    if (text == "GENERATE") return MessageType::Generate;
    if (text == "PROGRESS") return MessageType::Progress;
    if (text == "RESULT") return MessageType::Result;
    if (text == "ERROR") return MessageType::Error;
    if (text == "HEARTBEAT") return MessageType::Heartbeat;
    fail(ErrorCode::ProtocolViolation, "unknown message type '" + std::string(text) + "'");
}

bool requires_request_id(MessageType type) {
    return type == MessageType::Generate || type == MessageType::Progress || type == MessageType::Result ||
           type == MessageType::Error;
}

std::vector<std::uint8_t> encode_message(const Message& m) {
    if (requires_request_id(m.type) && !is_uuid(m.request_id)) {
        fail(ErrorCode::ProtocolViolation, std::string(to_string(m.type)) + " needs a UUID request_id");
    }
    if (!m.body.is_object()) fail(ErrorCode::ProtocolViolation, "message body must be an object");
    if (m.payload.size() > kMaxPayloadBytes) fail(ErrorCode::ProtocolViolation, "payload exceeds limit");

    Json header{{"type", std::string(to_string(m.type))}, {"body", m.body}, {"payload_length", m.payload.size()}};
    if (!m.request_id.empty()) header["request_id"] = m.request_id;
    const std::string text = header.dump();
    if (text.size() > kMaxHeaderBytes) fail(ErrorCode::ProtocolViolation, "header exceeds 1 MiB");

    std::vector<std::uint8_t> out;
    out.reserve(4 + text.size() + m.payload.size());
    const auto n = static_cast<std::uint32_t>(text.size());
    out.push_back(static_cast<std::uint8_t>(n >> 24));
    out.push_back(static_cast<std::uint8_t>(n >> 16));
    out.push_back(static_cast<std::uint8_t>(n >> 8));
    out.push_back(static_cast<std::uint8_t>(n));
    out.insert(out.end(), text.begin(), text.end());
    out.insert(out.end(), m.payload.begin(), m.payload.end());
    return out;
}

Message decode_message(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4) violation("truncated header length", bytes.size());
    const std::size_t header_len = (std::size_t{bytes[0]} << 24) | (std::size_t{bytes[1]} << 16) |
                                   (std::size_t{bytes[2]} << 8) | std::size_t{bytes[3]};
    if (header_len > kMaxHeaderBytes) violation("header length exceeds 1 MiB", 0);
    if (4 + header_len > bytes.size()) violation("header length exceeds available bytes", 0);

    Json header;
    try {
        header = Json::parse(bytes.begin() + 4, bytes.begin() + 4 + static_cast<std::ptrdiff_t>(header_len));
    } catch (const Json::parse_error& e) {
        violation(std::string("header is not valid JSON: ") + e.what(), 4 + (e.byte > 0 ? e.byte - 1 : 0));
    }

    Message m;
    std::size_t payload_len = 0;
    try {
        if (!header.is_object()) violation("header is not an object", 4);
        m.type = parse_message_type(header.at("type").get<std::string>());
        if (header.contains("request_id")) m.request_id = header.at("request_id").get<std::string>();
        m.body = header.value("body", Json::object());
        payload_len = header.value("payload_length", std::size_t{0});
    } catch (const Json::exception& e) {
        violation(std::string("header field error: ") + e.what(), 4);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ProtocolViolation && e.offset()) throw;
        violation(e.what(), 4);
    }
    if (!m.body.is_object()) violation("message body must be an object", 4);
    if (requires_request_id(m.type) && !is_uuid(m.request_id)) {
        violation(std::string(to_string(m.type)) + " needs a UUID request_id", 4);
    }

    const std::size_t payload_start = 4 + header_len;
    const std::size_t available = bytes.size() - payload_start;
    if (payload_len != available) {
        violation("declared payload length " + std::to_string(payload_len) + " does not match " +
                      std::to_string(available) + " received bytes",
                  payload_start);
    }
    m.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(payload_start), bytes.end());
    return m;
}

bool is_uuid(std::string_view text) {
    if (text.size() != 36) return false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (i == 8 || i == 13 || i == 18 || i == 23) {
            if (c != '-') return false;
        } else if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F'))) {
            return false;
        }
    }
    return true;
}

std::string new_request_id() {
    thread_local std::mt19937_64 rng{std::random_device{}()};
    std::uint64_t hi = rng();
    std::uint64_t lo = rng();
    hi = (hi & 0xFFFFFFFFFFFF0FFFull) | 0x0000000000004000ull;  // version 4
    lo = (lo & 0x3FFFFFFFFFFFFFFFull) | 0x8000000000000000ull;  // RFC 4122 variant
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(36);
    auto emit = [&](std::uint64_t v, int nibbles) {
        for (int i = nibbles - 1; i >= 0; --i) out.push_back(kDigits[(v >> (4 * i)) & 0xF]);
    };
    emit(hi >> 32, 8);
    out.push_back('-');
    emit((hi >> 16) & 0xFFFF, 4);
    out.push_back('-');
    emit(hi & 0xFFFF, 4);
    out.push_back('-');
    emit(lo >> 48, 4);
    out.push_back('-');
    emit(lo & 0xFFFFFFFFFFFFull, 12);
    return out;
}

}  // namespace emf::protocol
