// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>

namespace emf {

/// 256-bit SHA-256 digest.
struct Digest {
    std::array<std::uint8_t, 32> bytes{};

    std::string hex() const;
    static Digest from_hex(std::string_view hex);

    auto operator<=>(const Digest&) const = default;
    bool operator==(const Digest&) const = default;
};

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view data);

/// Incremental hasher.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    Sha256& update(std::span<const std::uint8_t> data);
    Sha256& update(std::string_view data);
    Digest finish();

private:
    void* ctx_;
};

}  // namespace emf

template <>
struct std::hash<emf::Digest> {
    std::size_t operator()(const emf::Digest& d) const noexcept {
        std::size_t h = 0;
        for (int i = 0; i < 8; ++i) {
            h = (h << 8) | d.bytes[i];
        }
        return h;
    }
};
