// Copyright 2026 The EMF Authors
// SPDX-License-Identifier: Apache-2.0

#include "emf/core/json.hpp"

namespace emf {

void to_json(Json& j, const GenerationParams& p) {
    j = Json{{"width", p.width}, {"height", p.height}, {"frame_count", p.frame_count}, {"fps", p.fps}, {"seed", p.seed}};
}

void from_json(const Json& j, GenerationParams& p) {
    j.at("width").get_to(p.width);
    j.at("height").get_to(p.height);
    j.at("frame_count").get_to(p.frame_count);
    j.at("fps").get_to(p.fps);
    j.at("seed").get_to(p.seed);
}

void to_json(Json& j, const Box& b) { j = Json::array({b.x, b.y, b.w, b.h}); }

void from_json(const Json& j, Box& b) {
    if (!j.is_array() || j.size() != 4) {
        throw Json::type_error::create(302, "box must be an array of 4 integers", &j);
    }
    j[0].get_to(b.x);
    j[1].get_to(b.y);
    j[2].get_to(b.w);
    j[3].get_to(b.h);
}

void to_json(Json& j, const SubjectTrack& t) {
    Json boxes = Json::array();
    for (const auto& b : t.boxes) {
        boxes.push_back(b ? Json(*b) : Json(nullptr));
    }
    j = Json{{"label", t.label}, {"boxes", std::move(boxes)}};
}

void from_json(const Json& j, SubjectTrack& t) {
    j.at("label").get_to(t.label);
    t.boxes.clear();
    for (const auto& b : j.at("boxes")) {
        if (b.is_null()) {
            t.boxes.emplace_back(std::nullopt);
        } else {
            t.boxes.emplace_back(b.get<Box>());
        }
    }
}

void to_json(Json& j, const Provenance& p) {
    j = Json{{"cache_key", p.cache_key.hex()}, {"expert_id", p.expert_id}};
}

void from_json(const Json& j, Provenance& p) {
    p.cache_key = Digest::from_hex(j.at("cache_key").get<std::string>());
    j.at("expert_id").get_to(p.expert_id);
}

void to_json(Json& j, const SubTask& t) {
    j = Json{{"sub_prompt", t.sub_prompt}, {"subjects", t.subjects}, {"cache_key", t.cache_key.hex()}};
    if (const auto* ts = std::get_if<TimeSlot>(&t.slot)) {
        j["slot"] = Json{{"time_index", ts->time_index}};
    } else {
        const auto& ls = std::get<LayerSlot>(t.slot);
        j["slot"] = Json{{"z_index", ls.z_index}, {"anchor", std::string(to_string(ls.anchor))}};
    }
}

void from_json(const Json& j, SubTask& t) {
    j.at("sub_prompt").get_to(t.sub_prompt);
    j.at("subjects").get_to(t.subjects);
    t.cache_key = Digest::from_hex(j.at("cache_key").get<std::string>());
    const auto& slot = j.at("slot");
    if (slot.contains("time_index")) {
        t.slot = TimeSlot{slot.at("time_index").get<std::uint32_t>()};
    } else {
        t.slot = LayerSlot{slot.at("z_index").get<std::uint32_t>(), parse_anchor(slot.at("anchor").get<std::string>())};
    }
}

void to_json(Json& j, const DecompositionPlan& p) {
    j = Json{{"kind", std::string(to_string(p.kind))},
             {"origin", std::string(to_string(p.origin))},
             {"subtasks", p.subtasks}};
}

void from_json(const Json& j, DecompositionPlan& p) {
    p.kind = parse_task_kind(j.at("kind").get<std::string>());
    p.origin = parse_plan_origin(j.at("origin").get<std::string>());
    j.at("subtasks").get_to(p.subtasks);
}

void to_json(Json& j, const PromptSpec& p) {
    j = Json{{"text", p.text}, {"params", p.params}, {"declared_subjects", p.declared_subjects}};
}

void from_json(const Json& j, PromptSpec& p) {
    j.at("text").get_to(p.text);
    j.at("params").get_to(p.params);
    p.declared_subjects = j.value("declared_subjects", std::vector<std::string>{});
}

void to_json(Json& j, const QualityReport& r) {
    j = Json{{"imaging_quality", r.imaging_quality},
             {"background_consistency", r.background_consistency},
             {"subject_consistency", r.subject_consistency},
             {"overall_consistency", r.overall_consistency},
             {"average_quality", r.average_quality}};
}

void from_json(const Json& j, QualityReport& r) {
    j.at("imaging_quality").get_to(r.imaging_quality);
    j.at("background_consistency").get_to(r.background_consistency);
    j.at("subject_consistency").get_to(r.subject_consistency);
    j.at("overall_consistency").get_to(r.overall_consistency);
    j.at("average_quality").get_to(r.average_quality);
}

}  // namespace emf
