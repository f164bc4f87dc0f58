// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

#include "emf/core/types.hpp"
#include "emf/gate/gate.hpp"

namespace emf::gate {

/// System message sent with every decomposition request. Documented in
/// docs/gate_llm_instruction.md; keep the two in sync.
extern const std::string_view kGateSystemInstruction;

/// One chat-completion round trip. Throws GateUnavailable after
/// `max_retries` failed attempts and MalformedLLMResponse when the reply
/// cannot be turned into a valid plan.
DecompositionPlan llm_decompose(const PromptSpec& prompt, const LLMEndpointConfig& cfg);

/// Parses the assistant message content ({"kind": ..., "clauses": [...]}).
DecompositionPlan parse_llm_reply(std::string_view content, const PromptSpec& prompt);

}  // namespace emf::gate
