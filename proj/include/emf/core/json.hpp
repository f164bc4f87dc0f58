// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

// nlohmann::json adapters for the domain types. Used by the container
// header, the wire protocol, the job journal and the HTTP API.

#pragma once

#include <json.hpp>

#include "emf/core/types.hpp"

namespace emf {

using Json = nlohmann::json;

void to_json(Json& j, const GenerationParams& p);
void from_json(const Json& j, GenerationParams& p);

void to_json(Json& j, const Box& b);
void from_json(const Json& j, Box& b);

void to_json(Json& j, const SubjectTrack& t);
void from_json(const Json& j, SubjectTrack& t);

void to_json(Json& j, const Provenance& p);
void from_json(const Json& j, Provenance& p);

void to_json(Json& j, const SubTask& t);
void from_json(const Json& j, SubTask& t);

void to_json(Json& j, const DecompositionPlan& p);
void from_json(const Json& j, DecompositionPlan& p);

void to_json(Json& j, const PromptSpec& p);
void from_json(const Json& j, PromptSpec& p);

void to_json(Json& j, const QualityReport& r);
void from_json(const Json& j, QualityReport& r);

}  // namespace emf
